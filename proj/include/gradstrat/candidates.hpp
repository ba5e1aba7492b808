#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "proj_geom.hpp"
#include "rng.hpp"

namespace gradstrat {

// ---------------------------------------------------------------------------
// Torus weights
// ---------------------------------------------------------------------------

/// The finite weight set V = mu_a(X^A) together with one A-fixed
/// representative per weight.
struct WeightTable {
    std::vector<MatC> weights;          // elements of a
    std::vector<VecR> coords;           // w.r.t. the orthonormal a-frame
    std::vector<ProjPoint> fixed_points;
    std::vector<int> multiplicity;      // dimension of the weight space
    double max_norm = 0.0;
    double fixed_residual = 0.0;        // max |a_X(fixed point)| observed
};

inline WeightTable extract_weights(const Group& G, Space space = Space::ComplexProjective) {
    WeightTable table;
    const int n = G.n();
    if (G.dim_a() == 0) {
        table.weights.push_back(MatC::Zero(n, n));
        table.coords.push_back(VecR(0));
        VecC e1 = VecC::Zero(n);
        e1[0] = 1.0;
        table.fixed_points.push_back(make_point(e1));
        table.multiplicity.push_back(n);
        return table;
    }

    const auto& aon = G.a_frame();
    MatC V;
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
        auto rng = stream(0x5eedULL + static_cast<std::uint64_t>(attempt), "weights");
        VecR c = random_gaussian(rng, G.dim_a());
        c += VecR::Ones(G.dim_a());
        MatC xi = from_coords(c, aon);
        Eigen::SelfAdjointEigenSolver<MatC> es(xi);
        V = es.eigenvectors();
        ok = true;
        for (Eigen::Index i = 0; i < V.cols() && ok; ++i)
            for (const auto& a : aon) {
                VecC v = V.col(i);
                double lam = (v.adjoint() * a * v)(0).real();
                if ((a * v - lam * v).norm() > 1e-8 * (1.0 + a.norm())) { ok = false; break; }
            }
    }
    if (!ok) throw structural_error("extract_weights: simultaneous diagonalization failed");

    // weight vector per common eigenline
    std::vector<VecR> line_coords;
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
        VecR w(G.dim_a());
        for (int j = 0; j < G.dim_a(); ++j)
            w[j] = (V.col(i).adjoint() * aon[static_cast<size_t>(j)] * V.col(i))(0).real();
        line_coords.push_back(w);
    }
    double max_c = 0.0;
    for (const auto& w : line_coords) max_c = std::max(max_c, w.norm());
    const double dtol = 1e-7 * (1.0 + max_c);

    std::vector<bool> used(static_cast<size_t>(V.cols()), false);
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
        if (used[static_cast<size_t>(i)]) continue;
        std::vector<Eigen::Index> grp{i};
        used[static_cast<size_t>(i)] = true;
        for (Eigen::Index j = i + 1; j < V.cols(); ++j)
            if (!used[static_cast<size_t>(j)] &&
                (line_coords[static_cast<size_t>(j)] - line_coords[static_cast<size_t>(i)]).norm() < dtol) {
                grp.push_back(j);
                used[static_cast<size_t>(j)] = true;
            }

        ProjPoint rep;
        if (space == Space::RealProjective) {
            MatC P = MatC::Zero(n, n);
            for (auto j : grp) P += V.col(j) * V.col(j).adjoint();
            if ((P - P.conjugate()).norm() > 1e-8 * static_cast<double>(grp.size()))
                continue; // weight space misses the real locus
            Eigen::SelfAdjointEigenSolver<MatR> er(P.real());
            VecR top = er.eigenvectors().col(er.eigenvalues().size() - 1);
            if (er.eigenvalues()(er.eigenvalues().size() - 1) < 1.0 - 1e-8) continue;
            rep = make_point(top.cast<cplx>());
        } else {
            rep = make_point(V.col(grp[0]));
        }

        VecR w = line_coords[static_cast<size_t>(i)];
        table.coords.push_back(w);
        table.weights.push_back(from_coords(w, aon));
        table.fixed_points.push_back(rep);
        table.multiplicity.push_back(static_cast<int>(grp.size()));
        table.max_norm = std::max(table.max_norm, w.norm());
        for (const auto& a : aon)
            table.fixed_residual =
                std::max(table.fixed_residual, riem_norm(vector_field(G, a, rep)));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Minimum-norm point in a convex hull (Wolfe's active-set method)
// ---------------------------------------------------------------------------

struct MinNormResult {
    VecR point;
    double norm = 0.0;
    std::vector<int> support;   // indices into the input list
    VecR coeffs;                // convex coefficients on support
    double certificate = 0.0;   // min_j <x, p_j - x>; >= -tol at optimum
};

namespace detail {
/// Minimizer of |sum mu_i p_i| subject to sum mu_i = 1 over the affine hull
/// of the active set.
inline VecR affine_minimizer(const std::vector<VecR>& pts, const std::vector<int>& S) {
    const auto m = static_cast<Eigen::Index>(S.size());
    MatR A(m + 1, m + 1);
    VecR b = VecR::Zero(m + 1);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            A(i, j) = pts[static_cast<size_t>(S[static_cast<size_t>(i)])].dot(
                pts[static_cast<size_t>(S[static_cast<size_t>(j)])]);
    for (Eigen::Index i = 0; i < m; ++i) { A(i, m) = 1.0; A(m, i) = 1.0; }
    A(m, m) = 0.0;
    b[m] = 1.0;
    VecR sol = Eigen::CompleteOrthogonalDecomposition<MatR>(A).solve(b);
    return sol.head(m);
}
} // namespace detail

/// Closest point to the origin in conv(points), with convex coefficients on
/// an affinely independent support and the variational optimality
/// certificate <x, p - x> >= -tol for every input point.
inline MinNormResult min_norm_point(const std::vector<VecR>& points) {
    if (points.empty()) throw std::invalid_argument("min_norm_point: empty input");
    const auto dim = points[0].size();
    MinNormResult out;
    double scale2 = 0.0;
    for (const auto& p : points) scale2 = std::max(scale2, p.squaredNorm());
    const double tol = 1e-12 * (1.0 + scale2);

    int j0 = 0;
    for (size_t j = 1; j < points.size(); ++j)
        if (points[j].squaredNorm() < points[static_cast<size_t>(j0)].squaredNorm())
            j0 = static_cast<int>(j);
    std::vector<int> S{j0};
    std::vector<double> lam{1.0};
    VecR x = points[static_cast<size_t>(j0)];

    const int max_major = 64 + 8 * static_cast<int>(points.size() + static_cast<size_t>(dim));
    for (int major = 0; major < max_major; ++major) {
        int J = 0;
        double best = points[0].dot(x);
        for (size_t j = 1; j < points.size(); ++j) {
            double v = points[j].dot(x);
            if (v < best - 1e-18) { best = v; J = static_cast<int>(j); }
        }
        if (x.squaredNorm() <= best + tol) break;
        if (std::find(S.begin(), S.end(), J) != S.end()) break;
        S.push_back(J);
        lam.push_back(0.0);

        for (int minor = 0; minor < 4 * max_major; ++minor) {
            VecR mu = detail::affine_minimizer(points, S);
            bool interior = true;
            for (Eigen::Index i = 0; i < mu.size(); ++i)
                if (mu[i] <= 1e-12) { interior = false; break; }
            if (interior) {
                lam.assign(mu.data(), mu.data() + mu.size());
                break;
            }
            double theta = 1.0;
            for (Eigen::Index i = 0; i < mu.size(); ++i)
                if (mu[i] <= 1e-12 && lam[static_cast<size_t>(i)] > mu[i])
                    theta = std::min(theta, lam[static_cast<size_t>(i)] /
                                                (lam[static_cast<size_t>(i)] - mu[i]));
            for (Eigen::Index i = 0; i < mu.size(); ++i)
                lam[static_cast<size_t>(i)] = (1.0 - theta) * lam[static_cast<size_t>(i)] + theta * mu[i];
            std::vector<int> keepS;
            std::vector<double> keepL;
            for (size_t i = 0; i < S.size(); ++i)
                if (lam[i] > 1e-12) { keepS.push_back(S[i]); keepL.push_back(lam[i]); }
            if (keepS.empty()) { keepS.push_back(S[0]); keepL.push_back(1.0); }
            S = std::move(keepS);
            lam = std::move(keepL);
        }
        x = VecR::Zero(dim);
        double sum = 0.0;
        for (double l : lam) sum += l;
        for (size_t i = 0; i < S.size(); ++i) lam[i] /= sum;
        for (size_t i = 0; i < S.size(); ++i) x += lam[i] * points[static_cast<size_t>(S[i])];
    }

    out.point = x;
    out.norm = x.norm();
    out.support = S;
    out.coeffs = VecR(static_cast<Eigen::Index>(lam.size()));
    for (size_t i = 0; i < lam.size(); ++i) out.coeffs[static_cast<Eigen::Index>(i)] = lam[i];
    out.certificate = 0.0;
    for (const auto& p : points) out.certificate = std::min(out.certificate, x.dot(p - x));
    return out;
}

/// Distance from q to conv(points); < tol means membership.
inline double hull_membership_residual(const VecR& q, const std::vector<VecR>& points) {
    std::vector<VecR> shifted;
    shifted.reserve(points.size());
    for (const auto& p : points) shifted.push_back(p - q);
    return min_norm_point(shifted).norm;
}

// ---------------------------------------------------------------------------
// Candidate enumeration
// ---------------------------------------------------------------------------

/// A closest-to-origin point of a convex hull of a weight subset, folded to
/// the chamber. The candidate list is a superset of B_p ∩ a_+; realized
/// candidates are confirmed by the flow module.
struct CandidateBeta {
    VecR coords;            // chamber representative, a-frame coordinates
    MatC beta;
    double norm = 0.0;
    std::vector<int> support;   // indices into the weight table
    VecR witness;               // convex coefficients on support
};

struct candidate_budget_error : structural_error {
    using structural_error::structural_error;
};

inline std::vector<CandidateBeta> enumerate_candidates(const Group& G, const WeightTable& table,
                                                       int max_support = -1,
                                                       long long budget = 2000000) {
    if (table.coords.empty()) throw std::invalid_argument("enumerate_candidates: empty table");
    const int m = static_cast<int>(table.coords.size());
    if (max_support < 0) max_support = G.dim_a() + 1; // Caratheodory bound
    max_support = std::min(max_support, m);

    long long total = 0;
    {
        long long c = 1;
        for (int k = 1; k <= max_support; ++k) {
            c = c * (m - k + 1) / k;
            total += c;
            if (total > budget)
                throw candidate_budget_error("enumerate_candidates: subset budget exceeded (" +
                                             std::to_string(total) + " subsets)");
        }
    }

    const double dtol = 1e-7 * (1.0 + table.max_norm);
    std::vector<CandidateBeta> out;
    std::vector<int> idx;
    auto consider = [&](const std::vector<int>& subset) {
        std::vector<VecR> pts;
        pts.reserve(subset.size());
        for (int i : subset) pts.push_back(table.coords[static_cast<size_t>(i)]);
        MinNormResult r = min_norm_point(pts);
        MatC beta = from_coords(r.point, G.a_frame());
        MatC rep = chamber_rep_matrix(G, beta);
        VecR coords = coords_in(rep, G.a_frame());
        for (const auto& c : out)
            if ((c.coords - coords).norm() < dtol) return;
        CandidateBeta cb;
        cb.coords = coords;
        cb.beta = rep;
        cb.norm = coords.norm();
        for (int k : r.support) cb.support.push_back(subset[static_cast<size_t>(k)]);
        cb.witness = r.coeffs;
        out.push_back(std::move(cb));
    };
    // subsets in canonical order: by size, then lexicographic
    std::vector<int> sel;
    std::function<void(int, int)> rec = [&](int start, int remaining) {
        if (remaining == 0) { consider(sel); return; }
        for (int i = start; i <= m - remaining; ++i) {
            sel.push_back(i);
            rec(i + 1, remaining - 1);
            sel.pop_back();
        }
    };
    for (int k = 1; k <= max_support; ++k) rec(0, k);

    std::sort(out.begin(), out.end(), [](const CandidateBeta& a, const CandidateBeta& b) {
        if (a.norm != b.norm) return a.norm < b.norm;
        for (Eigen::Index i = 0; i < a.coords.size(); ++i)
            if (a.coords[i] != b.coords[i]) return a.coords[i] < b.coords[i];
        return false;
    });
    return out;
}

} // namespace gradstrat
