#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradstrat {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

/// Trace-form inner product <X,Y> = Re tr(X Y*). Restricted to p it is the
/// K-invariant inner product every norm in this library refers to.
inline double tform(const MatC& X, const MatC& Y) {
    return (X * Y.adjoint()).trace().real();
}

inline double tnorm(const MatC& X) {
    double s = tform(X, X);
    return s > 0.0 ? std::sqrt(s) : 0.0;
}

inline MatC bracket(const MatC& X, const MatC& Y) { return X * Y - Y * X; }

/// Residual of anti-selfadjointness (membership of u).
inline double skew_residual(const MatC& X) { return (X + X.adjoint()).norm(); }

/// Residual of selfadjointness (membership of i*u).
inline double herm_residual(const MatC& X) { return (X - X.adjoint()).norm(); }

/// Orthonormalize a family of matrices w.r.t. the trace form (modified
/// Gram-Schmidt over the real span). Vectors with residual norm below
/// `drop_tol` times the largest input norm are dropped.
inline std::vector<MatC> orthonormalize(const std::vector<MatC>& basis, double drop_tol = 1e-10) {
    std::vector<MatC> out;
    double scale = 0.0;
    for (const auto& b : basis) scale = std::max(scale, tnorm(b));
    if (scale == 0.0) return out;
    for (const auto& b : basis) {
        MatC v = b;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : out) v -= tform(v, e) * e;
        double nv = tnorm(v);
        if (nv > drop_tol * scale) out.push_back(v / nv);
    }
    return out;
}

/// Distance of X from the real span of an orthonormal family.
inline double span_residual(const MatC& X, const std::vector<MatC>& onb) {
    MatC r = X;
    for (const auto& e : onb) r -= tform(r, e) * e;
    return tnorm(r);
}

/// Coordinates of X w.r.t. an orthonormal family.
inline VecR coords_in(const MatC& X, const std::vector<MatC>& onb) {
    VecR c(static_cast<Eigen::Index>(onb.size()));
    for (size_t j = 0; j < onb.size(); ++j) c[static_cast<Eigen::Index>(j)] = tform(X, onb[j]);
    return c;
}

inline MatC from_coords(const VecR& c, const std::vector<MatC>& onb) {
    if (onb.empty()) return MatC();
    MatC X = MatC::Zero(onb[0].rows(), onb[0].cols());
    for (size_t j = 0; j < onb.size(); ++j) X += c[static_cast<Eigen::Index>(j)] * onb[j];
    return X;
}

/// Fixed decimal formatting used by every writer so that reruns are
/// byte-identical.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(long long x) { return std::to_string(x); }

struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gradstrat
