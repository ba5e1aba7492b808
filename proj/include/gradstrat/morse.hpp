#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace gradstrat {

/// Truncated formal power series with integer coefficients. The coefficient
/// field (Q when all strata are orientable, Z2 otherwise) is carried as a
/// metadata tag and surfaced in reports; it does not change the arithmetic.
struct PoincareSeries {
    std::vector<long long> coeffs; // c_0 .. c_N
    std::string label;
    std::string field = "Q";

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    long long at(int k) const {
        return k >= 0 && k < static_cast<int>(coeffs.size()) ? coeffs[static_cast<size_t>(k)] : 0;
    }
};

inline PoincareSeries series_const(long long c, int N, std::string label = "") {
    PoincareSeries s;
    s.coeffs.assign(static_cast<size_t>(N) + 1, 0);
    s.coeffs[0] = c;
    s.label = std::move(label);
    return s;
}

inline PoincareSeries series_from(std::vector<long long> c, int N, std::string label = "") {
    c.resize(static_cast<size_t>(N) + 1, 0);
    PoincareSeries s;
    s.coeffs = std::move(c);
    s.label = std::move(label);
    return s;
}

/// 1 + t + t^2 + ...
inline PoincareSeries series_geom(int N, std::string label = "geom") {
    PoincareSeries s;
    s.coeffs.assign(static_cast<size_t>(N) + 1, 1);
    s.label = std::move(label);
    return s;
}

/// 1 + t^2 + t^4 + ...  (the Poincare series of B S^1)
inline PoincareSeries series_geom_even(int N, std::string label = "geom_even") {
    PoincareSeries s;
    s.coeffs.assign(static_cast<size_t>(N) + 1, 0);
    for (int k = 0; k <= N; k += 2) s.coeffs[static_cast<size_t>(k)] = 1;
    s.label = std::move(label);
    return s;
}

inline int common_degree(const PoincareSeries& a, const PoincareSeries& b) {
    return std::min(a.degree(), b.degree());
}

inline PoincareSeries add(const PoincareSeries& a, const PoincareSeries& b) {
    int N = common_degree(a, b);
    PoincareSeries s;
    s.coeffs.resize(static_cast<size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) s.coeffs[static_cast<size_t>(k)] = a.at(k) + b.at(k);
    s.field = a.field;
    return s;
}

inline PoincareSeries sub(const PoincareSeries& a, const PoincareSeries& b) {
    int N = common_degree(a, b);
    PoincareSeries s;
    s.coeffs.resize(static_cast<size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) s.coeffs[static_cast<size_t>(k)] = a.at(k) - b.at(k);
    s.field = a.field;
    return s;
}

inline PoincareSeries multiply(const PoincareSeries& a, const PoincareSeries& b) {
    int N = common_degree(a, b);
    PoincareSeries s;
    s.coeffs.assign(static_cast<size_t>(N) + 1, 0);
    for (int i = 0; i <= N; ++i)
        for (int j = 0; i + j <= N; ++j) s.coeffs[static_cast<size_t>(i + j)] += a.at(i) * b.at(j);
    s.field = a.field;
    return s;
}

inline PoincareSeries scale(long long c, const PoincareSeries& a) {
    PoincareSeries s = a;
    for (auto& x : s.coeffs) x *= c;
    return s;
}

/// Multiplication by t^m, the codimension weight. Negative shifts rejected.
inline PoincareSeries shift_by_t_power(const PoincareSeries& a, int m) {
    if (m < 0) throw std::invalid_argument("shift_by_t_power: negative shift");
    PoincareSeries s;
    s.coeffs.assign(a.coeffs.size(), 0);
    for (int k = 0; k + m <= a.degree(); ++k) s.coeffs[static_cast<size_t>(k + m)] = a.at(k);
    s.field = a.field;
    return s;
}

/// Kirwan's product formula for compact Z and compact connected K:
/// P_K(Z) = P(Z) · P(BK).
inline PoincareSeries kirwan_product(const PoincareSeries& space, const PoincareSeries& bk) {
    PoincareSeries s = multiply(space, bk);
    s.label = space.label.empty() || bk.label.empty() ? "" : space.label + "*" + bk.label;
    return s;
}

// ---------------------------------------------------------------------------
// Morse inequalities: sum_{beta,m} t^m P_K(S_{beta,m}) - P_K(X) = (1+t) R(t)
// with R having non-negative integer coefficients.
// ---------------------------------------------------------------------------

struct MorseCheck {
    PoincareSeries difference;  // D = sum of shifted stratum terms - total
    PoincareSeries remainder;   // R with D = (1+t) R, truncated one degree lower
    bool pass = false;
    bool exact_division = false;
    bool nonnegative = false;
    int offending_degree = -1;
};

inline MorseCheck check_inequalities(const std::vector<std::pair<int, PoincareSeries>>& stratum_terms,
                                     const PoincareSeries& total) {
    int N = total.degree();
    for (const auto& [m, s] : stratum_terms) N = std::min(N, s.degree());
    MorseCheck out;
    PoincareSeries D = scale(-1, series_from(total.coeffs, N));
    for (const auto& [m, s] : stratum_terms)
        D = add(D, shift_by_t_power(series_from(s.coeffs, N), m));
    out.difference = D;
    out.difference.label = "D";

    // synthetic division by (1+t): R_k = D_k - R_{k-1}
    PoincareSeries R;
    R.label = "R";
    R.coeffs.assign(static_cast<size_t>(std::max(N, 1)), 0);
    long long prev = 0;
    out.nonnegative = true;
    for (int k = 0; k <= N - 1; ++k) {
        long long r = D.at(k) - prev;
        R.coeffs[static_cast<size_t>(k)] = r;
        if (r < 0 && out.nonnegative) {
            out.nonnegative = false;
            out.offending_degree = k;
        }
        prev = r;
    }
    out.exact_division = N == 0 ? D.at(0) == 0 : D.at(N) == prev;
    if (!out.exact_division && out.offending_degree < 0) out.offending_degree = N;
    out.remainder = R;
    out.pass = out.exact_division && out.nonnegative;
    return out;
}

// ---------------------------------------------------------------------------
// Series expressions for config files:
//   expr   := term ('+' term)*
//   term   := factor ('*' factor)*
//   factor := INT | 't^' INT | 'geom' | 'geom_even' | 'poly(' ints ')' | '(' expr ')'
// ---------------------------------------------------------------------------

namespace detail {
struct SeriesParser {
    std::string s;
    size_t i = 0;
    int N;

    explicit SeriesParser(std::string text, int trunc) : s(std::move(text)), N(trunc) {}

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) { ++i; return true; }
        return false;
    }
    bool eat_word(const std::string& w) {
        skip();
        if (s.compare(i, w.size(), w) == 0) {
            size_t j = i + w.size();
            if (j >= s.size() || !std::isalnum(static_cast<unsigned char>(s[j]))) {
                i = j;
                return true;
            }
        }
        return false;
    }
    long long integer() {
        skip();
        size_t j = i;
        if (j < s.size() && (s[j] == '-' || s[j] == '+')) ++j;
        size_t k = j;
        while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
        if (k == j) throw std::invalid_argument("series: integer expected at '" + s.substr(i) + "'");
        long long v = std::stoll(s.substr(i, k - i));
        i = k;
        return v;
    }

    PoincareSeries expr() {
        PoincareSeries a = term();
        while (eat('+')) a = add(a, term());
        return a;
    }
    PoincareSeries term() {
        PoincareSeries a = factor();
        while (eat('*')) a = multiply(a, factor());
        return a;
    }
    PoincareSeries factor() {
        skip();
        if (eat_word("geom_even")) return series_geom_even(N);
        if (eat_word("geom")) return series_geom(N);
        if (eat_word("poly")) {
            if (!eat('(')) throw std::invalid_argument("series: '(' expected after poly");
            std::vector<long long> c;
            skip();
            while (i < s.size() && s[i] != ')') {
                c.push_back(integer());
                skip();
                if (i < s.size() && s[i] == ',') ++i;
                skip();
            }
            if (!eat(')')) throw std::invalid_argument("series: ')' expected");
            return series_from(std::move(c), N);
        }
        if (i < s.size() && s[i] == 't') {
            ++i;
            int m = 1;
            if (eat('^')) m = static_cast<int>(integer());
            return shift_by_t_power(series_const(1, N), m);
        }
        if (eat('(')) {
            PoincareSeries a = expr();
            if (!eat(')')) throw std::invalid_argument("series: ')' expected");
            return a;
        }
        return series_const(integer(), N);
    }
};
} // namespace detail

/// Parses a series expression truncated at degree N.
inline PoincareSeries parse_series(const std::string& text, int N, std::string label = "") {
    detail::SeriesParser p(text, N);
    PoincareSeries s = p.expr();
    p.skip();
    if (p.i != p.s.size())
        throw std::invalid_argument("series: trailing input '" + p.s.substr(p.i) + "'");
    s.label = std::move(label);
    return s;
}

} // namespace gradstrat
