#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace gradstrat {

/// Restricted Weyl action of N_K(a)/Z_K(a) on a, as realized by the presets.
/// Presets with a = traceless diagonal matrices and K ⊇ permutations act by
/// entry permutation (chamber = descending diagonals); the abelian preset has
/// trivial Weyl group.
enum class WeylAction { SortDescending, Trivial };

/// Concrete data of a compatible subgroup G = K·exp(p) of U^C: bases of k, p
/// and of a maximal abelian a ⊂ p, as n x n matrices.
struct GroupSpec {
    std::string name;
    int n = 0;
    bool real_form = false; // true: acts on V_R ⊗ C, P(V_R) is meaningful
    std::vector<MatC> k_basis;
    std::vector<MatC> p_basis;
    std::vector<MatC> a_basis;
    WeylAction weyl = WeylAction::SortDescending;
};

struct ValidationCheck {
    std::string name;
    double residual = 0.0;
    bool pass = true;
};

struct ValidationReport {
    bool pass = true;
    double scale = 0.0;
    double tolerance = 0.0;
    std::vector<ValidationCheck> checks;
};

namespace detail {
inline void require_square(const std::vector<MatC>& b, int n, const char* which) {
    for (const auto& m : b)
        if (m.rows() != n || m.cols() != n)
            throw structural_error(std::string("basis element of ") + which +
                                   " has wrong dimension");
}
} // namespace detail

/// Numerically enforces the compatibility hypotheses: k ⊂ u, p ⊂ i·u, the
/// Cartan relations, commutativity of a, a ⊂ p and positive definiteness of
/// the trace form on p. Dimension mismatches are structural errors, not
/// residual failures.
inline ValidationReport validate_group_spec(const GroupSpec& spec) {
    if (spec.n <= 0) throw structural_error("matrix dimension must be positive");
    detail::require_square(spec.k_basis, spec.n, "k");
    detail::require_square(spec.p_basis, spec.n, "p");
    detail::require_square(spec.a_basis, spec.n, "a");
    if (spec.a_basis.size() > spec.p_basis.size())
        throw structural_error("a_basis larger than p_basis");

    ValidationReport rep;
    double scale = 0.0;
    for (const auto& m : spec.k_basis) scale = std::max(scale, m.norm());
    for (const auto& m : spec.p_basis) scale = std::max(scale, m.norm());
    if (scale == 0.0) scale = 1.0;
    rep.scale = scale;
    rep.tolerance = 1e-10 * scale;

    auto push = [&](const std::string& name, double res) {
        rep.checks.push_back({name, res, res < rep.tolerance});
        rep.pass = rep.pass && rep.checks.back().pass;
    };

    double r = 0.0;
    for (const auto& x : spec.k_basis) r = std::max(r, skew_residual(x));
    push("k anti-selfadjoint", r);

    r = 0.0;
    for (const auto& x : spec.p_basis) r = std::max(r, herm_residual(x));
    push("p selfadjoint", r);

    auto kon = orthonormalize(spec.k_basis);
    auto pon = orthonormalize(spec.p_basis);

    r = 0.0;
    for (const auto& x : spec.k_basis)
        for (const auto& y : spec.k_basis) r = std::max(r, span_residual(bracket(x, y), kon));
    push("[k,k] in span(k)", r);

    r = 0.0;
    for (const auto& x : spec.k_basis)
        for (const auto& y : spec.p_basis) r = std::max(r, span_residual(bracket(x, y), pon));
    push("[k,p] in span(p)", r);

    r = 0.0;
    for (const auto& x : spec.p_basis)
        for (const auto& y : spec.p_basis) r = std::max(r, span_residual(bracket(x, y), kon));
    push("[p,p] in span(k)", r);

    r = 0.0;
    for (const auto& x : spec.a_basis)
        for (const auto& y : spec.a_basis) r = std::max(r, bracket(x, y).norm());
    push("a commutes", r);

    r = 0.0;
    for (const auto& x : spec.a_basis) r = std::max(r, span_residual(x, pon));
    push("a in span(p)", r);

    // Positive definiteness of the trace form on span(p): smallest Gram
    // eigenvalue, flipped so that "residual < tol" means pass.
    if (!spec.p_basis.empty()) {
        const auto m = static_cast<Eigen::Index>(spec.p_basis.size());
        MatR gram(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                gram(i, j) = tform(spec.p_basis[static_cast<size_t>(i)],
                                   spec.p_basis[static_cast<size_t>(j)]);
        Eigen::SelfAdjointEigenSolver<MatR> es(gram);
        double lo = es.eigenvalues().minCoeff();
        push("trace form positive definite on p", lo > rep.tolerance ? 0.0 : rep.tolerance + std::abs(lo));
    }
    return rep;
}

/// A GroupSpec together with the orthonormal frames every operation needs.
/// Immutable after construction; cheap to copy (frames are small).
class Group {
public:
    explicit Group(GroupSpec spec) : spec_(std::move(spec)) {
        detail::require_square(spec_.k_basis, spec_.n, "k");
        detail::require_square(spec_.p_basis, spec_.n, "p");
        detail::require_square(spec_.a_basis, spec_.n, "a");
        k_on_ = orthonormalize(spec_.k_basis);
        p_on_ = orthonormalize(spec_.p_basis);
        a_on_ = orthonormalize(spec_.a_basis);
        g_on_ = k_on_;
        for (const auto& m : p_on_) g_on_.push_back(m);
        g_on_ = orthonormalize(g_on_);
        if (g_on_.size() != k_on_.size() + p_on_.size())
            throw structural_error("k and p overlap: g = k + p is not direct");
    }

    const GroupSpec& spec() const { return spec_; }
    const std::string& name() const { return spec_.name; }
    int n() const { return spec_.n; }
    bool real_form() const { return spec_.real_form; }
    WeylAction weyl() const { return spec_.weyl; }

    const std::vector<MatC>& k_frame() const { return k_on_; }
    const std::vector<MatC>& p_frame() const { return p_on_; }
    const std::vector<MatC>& a_frame() const { return a_on_; }
    const std::vector<MatC>& g_frame() const { return g_on_; }

    int dim_k() const { return static_cast<int>(k_on_.size()); }
    int dim_p() const { return static_cast<int>(p_on_.size()); }
    int dim_a() const { return static_cast<int>(a_on_.size()); }
    int dim_g() const { return static_cast<int>(g_on_.size()); }

private:
    GroupSpec spec_;
    std::vector<MatC> k_on_, p_on_, a_on_, g_on_;
};

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace detail {
/// Orthonormal basis of real traceless diagonal n x n matrices.
inline std::vector<MatC> diag_traceless(int n) {
    std::vector<MatC> out;
    for (int k = 1; k < n; ++k) {
        MatC h = MatC::Zero(n, n);
        for (int i = 0; i < k; ++i) h(i, i) = 1.0;
        h(k, k) = -double(k);
        out.push_back(h / std::sqrt(double(k) * (k + 1)));
    }
    return out;
}
} // namespace detail

/// SL(n,R): K = SO(n), p = real symmetric traceless, a = diagonal traceless.
inline GroupSpec make_sl_real(int n) {
    GroupSpec s;
    s.name = "sl" + std::to_string(n) + "r";
    s.n = n;
    s.real_form = true;
    s.weyl = WeylAction::SortDescending;
    const double iq = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            MatC e = MatC::Zero(n, n);
            e(i, j) = iq; e(j, i) = -iq;
            s.k_basis.push_back(e);
        }
    s.p_basis = detail::diag_traceless(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            MatC e = MatC::Zero(n, n);
            e(i, j) = iq; e(j, i) = iq;
            s.p_basis.push_back(e);
        }
    s.a_basis = detail::diag_traceless(n);
    return s;
}

/// SL(n,C) viewed as a real group: K = SU(n), p = i·su(n) (traceless
/// Hermitian), a = diagonal traceless. This is the complex-reductive case
/// G = K^C.
inline GroupSpec make_sl_complex(int n) {
    GroupSpec s;
    s.name = "sl" + std::to_string(n) + "c";
    s.n = n;
    s.real_form = false;
    s.weyl = WeylAction::SortDescending;
    const double iq = 1.0 / std::sqrt(2.0);
    const cplx I(0.0, 1.0);
    for (const auto& h : detail::diag_traceless(n)) s.k_basis.push_back(I * h);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            MatC e = MatC::Zero(n, n);
            e(i, j) = iq; e(j, i) = -iq;
            s.k_basis.push_back(e);
            MatC f = MatC::Zero(n, n);
            f(i, j) = I * iq; f(j, i) = I * iq;
            s.k_basis.push_back(f);
        }
    s.p_basis = detail::diag_traceless(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            MatC e = MatC::Zero(n, n);
            e(i, j) = iq; e(j, i) = iq;
            s.p_basis.push_back(e);
            MatC f = MatC::Zero(n, n);
            f(i, j) = I * iq; f(j, i) = -I * iq;
            s.p_basis.push_back(f);
        }
    s.a_basis = detail::diag_traceless(n);
    return s;
}

/// The abelian subgroup A = exp(a) of a preset. K is trivial and the
/// restricted Weyl group is trivial, so no chamber folding happens.
inline GroupSpec make_abelian(const GroupSpec& base) {
    GroupSpec s;
    s.name = base.name + "_a";
    s.n = base.n;
    s.real_form = base.real_form;
    s.weyl = WeylAction::Trivial;
    s.p_basis = base.a_basis;
    s.a_basis = base.a_basis;
    return s;
}

/// Presets addressable by name: sl<n>r, sl<n>c and their abelian subgroups
/// sl<n>r_a / sl<n>c_a.
inline std::optional<GroupSpec> preset_by_name(const std::string& name) {
    auto core = name;
    bool abelian = false;
    if (core.size() > 2 && core.substr(core.size() - 2) == "_a") {
        abelian = true;
        core = core.substr(0, core.size() - 2);
    }
    if (core.size() < 4 || core.substr(0, 2) != "sl") return std::nullopt;
    char kind = core.back();
    std::string num = core.substr(2, core.size() - 3);
    if (num.empty()) return std::nullopt;
    for (char c : num)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    int n = std::stoi(num);
    if (n < 2 || n > 16) return std::nullopt;
    GroupSpec s;
    if (kind == 'r') s = make_sl_real(n);
    else if (kind == 'c') s = make_sl_complex(n);
    else return std::nullopt;
    return abelian ? make_abelian(s) : s;
}

// ---------------------------------------------------------------------------
// ad(beta) eigenstructure
// ---------------------------------------------------------------------------

/// Grading of g by ad(β)-eigenvalue. Conjugation by exp(tβ) scales the
/// λ-eigenspace by e^{tλ}, so nonneg_part is the parabolic q = g^{β+} and
/// pos_part its nilradical r^{β+}.
struct AdEigenDecomposition {
    MatC beta;
    std::vector<double> eigenvalues;                      // cluster values, ascending
    std::vector<std::pair<double, std::vector<MatC>>> graded;
    std::vector<MatC> zero_part;    // g^beta
    std::vector<MatC> nonneg_part;  // g^{beta+}
    std::vector<MatC> pos_part;     // r^{beta+}
};

/// Eigenvalue clustering width for ad(β); values within this of each other
/// are merged so the zero eigenspace separates robustly.
inline double ad_cluster_tol(const MatC& beta) { return 1e-8 * tnorm(beta) + 1e-14; }

inline AdEigenDecomposition ad_decompose(const Group& G, const MatC& beta) {
    const auto& pon = G.p_frame();
    if (span_residual(beta, pon) > 1e-8 * (1.0 + tnorm(beta)))
        throw std::invalid_argument("ad_decompose: beta is not in span(p_basis)");
    const auto& gon = G.g_frame();
    const auto d = static_cast<Eigen::Index>(gon.size());

    // ad(beta) is selfadjoint w.r.t. the trace form for beta in p.
    MatR A(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        MatC bj = bracket(beta, gon[static_cast<size_t>(j)]);
        for (Eigen::Index i = 0; i < d; ++i) A(i, j) = tform(bj, gon[static_cast<size_t>(i)]);
    }
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatR> es(A);
    const VecR lam = es.eigenvalues();
    const MatR V = es.eigenvectors();

    AdEigenDecomposition out;
    out.beta = beta;
    const double ctol = ad_cluster_tol(beta);
    Eigen::Index i = 0;
    while (i < d) {
        Eigen::Index j = i;
        while (j + 1 < d && lam[j + 1] - lam[j] < ctol) ++j;
        double value = lam.segment(i, j - i + 1).mean();
        if (std::abs(value) < ctol) value = 0.0;
        std::vector<MatC> basis;
        for (Eigen::Index c = i; c <= j; ++c) {
            MatC m = MatC::Zero(G.n(), G.n());
            for (Eigen::Index r = 0; r < d; ++r) m += V(r, c) * gon[static_cast<size_t>(r)];
            basis.push_back(m);
        }
        out.eigenvalues.push_back(value);
        out.graded.emplace_back(value, std::move(basis));
        i = j + 1;
    }
    for (const auto& [value, basis] : out.graded) {
        if (value == 0.0)
            out.zero_part.insert(out.zero_part.end(), basis.begin(), basis.end());
        if (value > 0.0)
            out.pos_part.insert(out.pos_part.end(), basis.begin(), basis.end());
        if (value >= 0.0)
            out.nonneg_part.insert(out.nonneg_part.end(), basis.begin(), basis.end());
    }
    return out;
}

/// Basis of the centralizer of beta inside the real span of `family`
/// (kernel of ad(beta) restricted to that span).
inline std::vector<MatC> centralizer_in(const Group& G, const std::vector<MatC>& family,
                                        const MatC& beta) {
    auto fon = orthonormalize(family);
    if (fon.empty()) return {};
    const auto m = static_cast<Eigen::Index>(fon.size());
    const auto& gon = G.g_frame();
    const auto d = static_cast<Eigen::Index>(gon.size());
    MatR A(d, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        MatC bj = bracket(beta, fon[static_cast<size_t>(j)]);
        for (Eigen::Index i = 0; i < d; ++i) A(i, j) = tform(bj, gon[static_cast<size_t>(i)]);
    }
    Eigen::JacobiSVD<MatR> svd(A, Eigen::ComputeFullV);
    double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    double tol = std::max(1e-10 * (1.0 + smax), 1e-12);
    std::vector<MatC> out;
    for (Eigen::Index j = 0; j < m; ++j) {
        double sv = j < svd.singularValues().size() ? svd.singularValues()[j] : 0.0;
        if (sv < tol) {
            MatC c = MatC::Zero(G.n(), G.n());
            for (Eigen::Index i = 0; i < m; ++i) c += svd.matrixV()(i, j) * fon[static_cast<size_t>(i)];
            out.push_back(c);
        }
    }
    return orthonormalize(out);
}

// ---------------------------------------------------------------------------
// Conjugation limits
// ---------------------------------------------------------------------------

struct ConjLimitResult {
    bool converged = false;
    bool overflow = false;
    double overflow_time = 0.0;
    MatC limit;            // element of G^beta when converged
    double last_delta = 0.0;
};

/// lim_{t→-∞} exp(tβ) g exp(-tβ) along a decreasing time schedule. The
/// conjugates are evaluated entrywise in the eigenbasis of β, where
/// conjugation scales entry (i,j) by e^{t(λ_i-λ_j)}.
inline ConjLimitResult conj_limit(const Group& G, const MatC& beta, const MatC& g,
                                  const std::vector<double>& t_schedule, double tol = 1e-10) {
    (void)G;
    Eigen::FullPivLU<MatC> lu(g);
    if (!lu.isInvertible()) throw std::invalid_argument("conj_limit: g is singular");
    Eigen::SelfAdjointEigenSolver<MatC> es(beta);
    const MatC U = es.eigenvectors();
    const VecR lam = es.eigenvalues();
    const MatC gh = U.adjoint() * g * U;
    const auto n = gh.rows();

    ConjLimitResult out;
    MatC prev;
    const double scale = std::max(1.0, g.norm());
    for (double t : t_schedule) {
        MatC c(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                c(i, j) = gh(i, j) * std::exp(t * (lam[i] - lam[j]));
        if (!c.allFinite() || c.norm() > 1e100) {
            out.overflow = true;
            out.overflow_time = t;
            return out;
        }
        if (prev.size() > 0) {
            out.last_delta = (c - prev).norm();
            if (out.last_delta < tol * scale) {
                out.converged = true;
                out.limit = U * c * U.adjoint();
                return out;
            }
        }
        prev = c;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weyl chamber representatives
// ---------------------------------------------------------------------------

struct WeylOrbitRep {
    VecR point;        // coordinates w.r.t. the orthonormal a-frame
    VecR chamber;      // coordinates of the chamber representative
    MatC point_mat;
    MatC chamber_mat;
};

/// Chamber representative of a selfadjoint element of p under the restricted
/// Weyl action. For the sorting presets this is the descending spectrum put
/// on the diagonal; elements of a are fixed by the trivial action.
inline MatC chamber_rep_matrix(const Group& G, const MatC& m) {
    if (G.weyl() == WeylAction::Trivial) return m;
    Eigen::SelfAdjointEigenSolver<MatC> es(m);
    VecR lam = es.eigenvalues();
    std::sort(lam.data(), lam.data() + lam.size(), std::greater<double>());
    MatC rep = MatC::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < lam.size(); ++i) rep(i, i) = lam[i];
    return rep;
}

inline WeylOrbitRep chamber_representative(const Group& G, const MatC& v) {
    if (span_residual(v, G.a_frame()) > 1e-8 * (1.0 + tnorm(v)))
        throw std::invalid_argument("chamber_representative: v not in span(a_basis)");
    WeylOrbitRep out;
    out.point_mat = v;
    out.point = coords_in(v, G.a_frame());
    out.chamber_mat = chamber_rep_matrix(G, v);
    out.chamber = coords_in(out.chamber_mat, G.a_frame());
    return out;
}

} // namespace gradstrat
