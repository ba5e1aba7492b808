#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "numeric.hpp"

namespace gradstrat {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) { h ^= c; h *= 0x100000001b3ULL; }
    return h;
}
} // namespace detail

/// Deterministic per-purpose random stream. Independent streams are derived
/// from (root seed, purpose tag, index) so results do not depend on
/// evaluation order or scheduling.
inline std::mt19937_64 stream(std::uint64_t root, std::string_view purpose, std::uint64_t index = 0) {
    std::uint64_t s = root ^ detail::fnv1a(purpose);
    detail::splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL * (index + 1);
    std::uint64_t a = detail::splitmix64(s);
    return std::mt19937_64(a);
}

inline VecC random_unit_complex(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    VecC v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
    return v / v.norm();
}

inline VecC random_unit_real(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    VecC v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), 0.0);
    return v / v.norm();
}

inline VecR random_gaussian(std::mt19937_64& rng, int n, double sigma = 1.0) {
    std::normal_distribution<double> g(0.0, sigma);
    VecR v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

} // namespace gradstrat
