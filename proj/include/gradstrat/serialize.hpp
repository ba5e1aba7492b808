#pragma once

#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "lie_core.hpp"
#include "proj_geom.hpp"

namespace gradstrat {

// ---------------------------------------------------------------------------
// Group specs as structured text (JSON), matrices row-major split into real
// and imaginary parts.
// ---------------------------------------------------------------------------

namespace detail {
inline nlohmann::json matrix_to_json(const MatC& m) {
    std::vector<double> re, im;
    re.reserve(static_cast<size_t>(m.size()));
    im.reserve(static_cast<size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    return nlohmann::json{{"re", re}, {"im", im}};
}

inline MatC matrix_from_json(const nlohmann::json& j, int n) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (static_cast<int>(re.size()) != n * n || static_cast<int>(im.size()) != n * n)
        throw structural_error("group spec: matrix entry count does not match n");
    MatC m(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            m(i, k) = cplx(re[static_cast<size_t>(i * n + k)].get<double>(),
                           im[static_cast<size_t>(i * n + k)].get<double>());
    return m;
}

inline nlohmann::json basis_to_json(const std::vector<MatC>& b) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : b) arr.push_back(matrix_to_json(m));
    return arr;
}

inline std::vector<MatC> basis_from_json(const nlohmann::json& j, int n) {
    std::vector<MatC> out;
    for (const auto& e : j) out.push_back(matrix_from_json(e, n));
    return out;
}
} // namespace detail

inline std::string write_group_spec(const GroupSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["n"] = spec.n;
    j["real_form"] = spec.real_form;
    j["weyl"] = spec.weyl == WeylAction::SortDescending ? "sort_descending" : "trivial";
    j["k_basis"] = detail::basis_to_json(spec.k_basis);
    j["p_basis"] = detail::basis_to_json(spec.p_basis);
    j["a_basis"] = detail::basis_to_json(spec.a_basis);
    return j.dump(2);
}

inline GroupSpec read_group_spec(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    GroupSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.n = j.at("n").get<int>();
    spec.real_form = j.value("real_form", false);
    std::string w = j.value("weyl", "sort_descending");
    spec.weyl = w == "trivial" ? WeylAction::Trivial : WeylAction::SortDescending;
    spec.k_basis = detail::basis_from_json(j.at("k_basis"), spec.n);
    spec.p_basis = detail::basis_from_json(j.at("p_basis"), spec.n);
    spec.a_basis = detail::basis_from_json(j.at("a_basis"), spec.n);
    return spec;
}

// ---------------------------------------------------------------------------
// Columnar text data files: one header line, then fixed-format rows.
// ---------------------------------------------------------------------------

inline void write_columnar(const std::string& path, const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "\t" : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << row[i];
        os << "\n";
    }
}

/// ProjPoints serialize as 2n reals, real/imag interleaved.
inline std::vector<std::string> point_fields(const ProjPoint& p) {
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(2 * p.rep.size()));
    for (Eigen::Index i = 0; i < p.rep.size(); ++i) {
        out.push_back(fmt(p.rep[i].real()));
        out.push_back(fmt(p.rep[i].imag()));
    }
    return out;
}

inline std::vector<std::string> vector_fields(const VecR& v) {
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(fmt(v[i]));
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << text;
}

} // namespace gradstrat
