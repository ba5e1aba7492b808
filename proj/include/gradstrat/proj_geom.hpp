#pragma once

#include <cmath>
#include <vector>

#include "lie_core.hpp"
#include "numeric.hpp"

namespace gradstrat {

/// Which manifold X the toolkit works on: all of P(V) or the real form
/// P(V_R) inside it.
enum class Space { ComplexProjective, RealProjective };

/// A point of P(V), stored as a unit representative with a canonical phase
/// (largest component real positive) so that serialized output is stable.
/// real_flag records whether the line meets the real locus.
struct ProjPoint {
    VecC rep;
    bool real_flag = false;
};

inline ProjPoint make_point(VecC v) {
    double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("make_point: zero vector");
    v /= n;
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > best) { best = std::abs(v[i]); imax = i; }
    cplx ph = v[imax] / std::abs(v[imax]);
    v *= std::conj(ph);
    ProjPoint p;
    p.rep = v;
    // [z] meets P(V_R) iff |z^T z| = 1 for a unit representative.
    cplx zz = (v.transpose() * v)(0);
    p.real_flag = std::abs(std::abs(zz) - 1.0) < 1e-10;
    if (p.real_flag && v.imag().norm() > 1e-13) {
        // rotate exactly onto the real locus
        cplx half = std::sqrt(std::conj(zz));
        VecC r = half * v;
        p.rep = VecC(r.real().cast<cplx>());
        p.rep /= p.rep.norm();
        if (p.rep[imax].real() < 0) p.rep = -p.rep;
    }
    return p;
}

inline ProjPoint make_point(std::initializer_list<cplx> v) {
    VecC z(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (cplx c : v) z[i++] = c;
    return make_point(z);
}

/// |<z1,z2>| = 1 within tolerance <=> equal points.
inline double chordal_distance(const ProjPoint& a, const ProjPoint& b) {
    double c = std::abs(a.rep.dot(b.rep));
    double s = 1.0 - c * c;
    return s > 0.0 ? std::sqrt(s) : 0.0;
}

inline bool same_point(const ProjPoint& a, const ProjPoint& b, double tol = 1e-9) {
    return chordal_distance(a, b) < tol;
}

inline ProjPoint act(const MatC& g, const ProjPoint& x) {
    Eigen::FullPivLU<MatC> lu(g);
    if (!lu.isInvertible()) throw std::invalid_argument("act: singular group element");
    return make_point(g * x.rep);
}

// ---------------------------------------------------------------------------
// Fubini-Study geometry on horizontal representatives
// ---------------------------------------------------------------------------

/// Riemannian inner product on horizontal vectors at a unit representative.
/// The factor 2 is what makes grad mu_p^beta = beta_X exact for the moment
/// map normalization below (checked by the finite-difference suites).
inline double riem(const VecC& v, const VecC& w) { return 2.0 * w.dot(v).real(); }
inline double riem_norm(const VecC& v) { return std::sqrt(2.0) * v.norm(); }

/// Component of w tangent to X at x (horizontal space of the sphere bundle;
/// real horizontal space for X = P(V_R)).
inline VecC project_tangent(const ProjPoint& x, const VecC& w, Space space) {
    if (space == Space::RealProjective) {
        VecR xr = x.rep.real();
        VecR wr = w.real();
        wr -= xr * xr.dot(wr);
        return wr.cast<cplx>();
    }
    return w - x.rep * x.rep.dot(w);
}

/// beta_X(x): the induced vector field of beta at x, as a horizontal vector.
inline VecC vector_field(const Group& G, const MatC& beta, const ProjPoint& x,
                         Space space = Space::ComplexProjective) {
    (void)G;
    const VecC& z = x.rep;
    double r = (z.adjoint() * beta * z)(0).real();
    VecC v = beta * z - r * z;
    if (space == Space::RealProjective) return project_tangent(x, v, space);
    return v;
}

/// mu^xi([z]) = <xi z, z> / (i <z,z>) for xi in u; real-valued.
inline double eval_moment(const Group& G, const MatC& xi, const ProjPoint& x) {
    (void)G;
    if (skew_residual(xi) > 1e-8 * (1.0 + xi.norm()))
        throw std::invalid_argument("eval_moment: xi is not anti-selfadjoint");
    cplx num = (x.rep.adjoint() * xi * x.rep)(0);
    double den = x.rep.squaredNorm();
    return num.imag() / den;
}

/// mu_p^beta(x) = <mu_p(x), beta> = Re(z* beta z)/(z* z), the pairing whose
/// gradient is beta_X.
inline double mu_pairing(const Group& G, const MatC& beta, const ProjPoint& x) {
    (void)G;
    cplx num = (x.rep.adjoint() * beta * x.rep)(0);
    return num.real() / x.rep.squaredNorm();
}

struct GradientMapEval {
    ProjPoint point;
    MatC mu_p;
    VecR mu_coords;        // w.r.t. the orthonormal p-frame
    double eta = 0.0;      // 1/2 |mu_p|^2, exactly by construction
    double grad_eta_norm = 0.0;
};

/// Scale-invariant criticality threshold.
inline double criticality_tol(const GradientMapEval& e) {
    return 1e-8 * (1.0 + std::sqrt(2.0 * e.eta));
}

inline MatC gradient_map(const Group& G, const ProjPoint& x) {
    MatC mu = MatC::Zero(G.n(), G.n());
    for (const auto& P : G.p_frame()) mu += mu_pairing(G, P, x) * P;
    return mu;
}

inline GradientMapEval eval_gradient_map(const Group& G, const ProjPoint& x,
                                         Space space = Space::ComplexProjective) {
    GradientMapEval e;
    e.point = x;
    e.mu_coords = VecR(G.dim_p());
    e.mu_p = MatC::Zero(G.n(), G.n());
    for (int j = 0; j < G.dim_p(); ++j) {
        e.mu_coords[j] = mu_pairing(G, G.p_frame()[static_cast<size_t>(j)], x);
        e.mu_p += e.mu_coords[j] * G.p_frame()[static_cast<size_t>(j)];
    }
    e.eta = 0.5 * e.mu_coords.squaredNorm();
    e.grad_eta_norm = riem_norm(vector_field(G, e.mu_p, x, space));
    return e;
}

inline double eta_value(const Group& G, const ProjPoint& x) {
    double s = 0.0;
    for (const auto& P : G.p_frame()) {
        double c = mu_pairing(G, P, x);
        s += c * c;
    }
    return 0.5 * s;
}

// ---------------------------------------------------------------------------
// Tangent frames and linearizations at fixed points
// ---------------------------------------------------------------------------

/// Orthonormal frame of T_x(X) w.r.t. the Riemannian metric.
inline std::vector<VecC> tangent_frame(const ProjPoint& x, Space space) {
    const int n = static_cast<int>(x.rep.size());
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<VecC> frame;
    if (space == Space::RealProjective) {
        if (!x.real_flag)
            throw std::invalid_argument("tangent_frame: point not on the real locus");
        MatR m(n, 1);
        m.col(0) = x.rep.real();
        Eigen::HouseholderQR<MatR> qr(m);
        MatR Q = qr.householderQ();
        for (int j = 1; j < n; ++j) frame.push_back(s * Q.col(j).cast<cplx>());
        return frame;
    }
    MatC m(n, 1);
    m.col(0) = x.rep;
    Eigen::HouseholderQR<MatC> qr(m);
    MatC Q = qr.householderQ() * MatC::Identity(n, n);
    for (int j = 1; j < n; ++j) {
        frame.push_back(s * Q.col(j));
        frame.push_back(s * cplx(0.0, 1.0) * Q.col(j));
    }
    return frame;
}

/// Differential of the vector field beta_X at a zero x of the field,
/// applied to a horizontal vector v. Only meaningful where beta_X(x) = 0.
inline VecC d_vector_field(const Group& G, const MatC& beta, const ProjPoint& x,
                           const VecC& v, Space space) {
    (void)G;
    const VecC& z = x.rep;
    double r = (z.adjoint() * beta * z)(0).real();
    cplx zbv = (z.adjoint() * beta * v)(0);
    VecC d = beta * v - 2.0 * zbv.real() * z - r * v;
    return project_tangent(x, d, space);
}

/// dmu_p(x)(v) as an element of p.
inline MatC d_gradient_map(const Group& G, const ProjPoint& x, const VecC& v) {
    MatC out = MatC::Zero(G.n(), G.n());
    for (const auto& P : G.p_frame()) {
        double c = 2.0 * (x.rep.adjoint() * P * v)(0).real();
        out += c * P;
    }
    return out;
}

inline VecR d_gradient_map_coords(const Group& G, const ProjPoint& x, const VecC& v) {
    VecR c(G.dim_p());
    for (int j = 0; j < G.dim_p(); ++j)
        c[j] = 2.0 * (x.rep.adjoint() * G.p_frame()[static_cast<size_t>(j)] * v)(0).real();
    return c;
}

/// Eigenstructure of the selfadjoint operator d beta_X(x) on T_x(X) at a
/// point fixed by beta. nonneg_span realizes W^{beta+} = W^beta + W^+.
struct TangentDecomposition {
    ProjPoint base;
    MatC beta;
    std::vector<VecC> frame;
    std::vector<std::pair<double, std::vector<VecC>>> eigenpairs;
    std::vector<VecC> zero_span, pos_span, nonneg_span;
};

inline TangentDecomposition tangent_decompose(const Group& G, const MatC& beta,
                                              const ProjPoint& x, Space space) {
    double res = riem_norm(vector_field(G, beta, x, space));
    if (res > 1e-8 * (1.0 + tnorm(beta)))
        throw std::invalid_argument("tangent_decompose: x not fixed by beta, |beta_X(x)| = " +
                                    fmt(res));
    TangentDecomposition out;
    out.base = x;
    out.beta = beta;
    out.frame = tangent_frame(x, space);
    const auto d = static_cast<Eigen::Index>(out.frame.size());
    MatR M(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
        VecC db = d_vector_field(G, beta, x, out.frame[static_cast<size_t>(b)], space);
        for (Eigen::Index a = 0; a < d; ++a) M(a, b) = riem(db, out.frame[static_cast<size_t>(a)]);
    }
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatR> es(M);
    const VecR lam = es.eigenvalues();
    const MatR V = es.eigenvectors();
    const double ctol = 1e-8 * (1.0 + tnorm(beta));

    Eigen::Index i = 0;
    while (i < d) {
        Eigen::Index j = i;
        while (j + 1 < d && lam[j + 1] - lam[j] < ctol) ++j;
        double value = lam.segment(i, j - i + 1).mean();
        if (std::abs(value) < ctol) value = 0.0;
        std::vector<VecC> vecs;
        for (Eigen::Index c = i; c <= j; ++c) {
            VecC w = VecC::Zero(x.rep.size());
            for (Eigen::Index r = 0; r < d; ++r) w += V(r, c) * out.frame[static_cast<size_t>(r)];
            vecs.push_back(w);
        }
        for (const auto& w : vecs) {
            if (value == 0.0) out.zero_span.push_back(w);
            if (value > 0.0) out.pos_span.push_back(w);
            if (value >= 0.0) out.nonneg_span.push_back(w);
        }
        out.eigenpairs.emplace_back(value, std::move(vecs));
        i = j + 1;
    }
    return out;
}

/// Hessian of eta_p at a critical point, assembled in an orthonormal tangent
/// frame: H(v,w) = (d beta_X(x) v, w) + <dmu_p(x)v, dmu_p(x)w> with
/// beta = mu_p(x). On a d beta_X eigenvector this is the quadratic form
/// lambda |v|^2 + |dmu_p(x)v|^2.
struct HessianForm {
    ProjPoint base;
    MatC beta;
    std::vector<VecC> frame;
    MatR H;
    VecR eigenvalues;
};

inline HessianForm hessian_eta(const Group& G, const ProjPoint& x, Space space) {
    GradientMapEval e = eval_gradient_map(G, x, space);
    if (e.grad_eta_norm > criticality_tol(e))
        throw std::invalid_argument("hessian_eta: point is not critical, |grad eta| = " +
                                    fmt(e.grad_eta_norm));
    HessianForm out;
    out.base = x;
    out.beta = e.mu_p;
    out.frame = tangent_frame(x, space);
    const auto d = static_cast<Eigen::Index>(out.frame.size());
    std::vector<VecR> dmu(static_cast<size_t>(d));
    for (Eigen::Index a = 0; a < d; ++a)
        dmu[static_cast<size_t>(a)] = d_gradient_map_coords(G, x, out.frame[static_cast<size_t>(a)]);
    out.H = MatR(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
        VecC db = d_vector_field(G, e.mu_p, x, out.frame[static_cast<size_t>(b)], space);
        for (Eigen::Index a = 0; a < d; ++a)
            out.H(a, b) = riem(db, out.frame[static_cast<size_t>(a)]) +
                          dmu[static_cast<size_t>(a)].dot(dmu[static_cast<size_t>(b)]);
    }
    out.H = 0.5 * (out.H + out.H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatR> es(out.H);
    out.eigenvalues = es.eigenvalues();
    return out;
}

} // namespace gradstrat
