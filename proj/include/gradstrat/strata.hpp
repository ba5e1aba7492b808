#pragma once

#include <functional>
#include <limits>

#include "flow.hpp"

namespace gradstrat {

// ---------------------------------------------------------------------------
// Matrix exponentials for the compact and symmetric directions
// ---------------------------------------------------------------------------

/// exp of a selfadjoint matrix via its spectral decomposition.
inline MatC expm_herm(const MatC& H) {
    Eigen::SelfAdjointEigenSolver<MatC> es(H);
    VecC d(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::exp(es.eigenvalues()[i]);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

/// exp of an anti-selfadjoint matrix (exp(iH) with H = -i xi selfadjoint).
inline MatC expm_skew(const MatC& xi) {
    const cplx I(0.0, 1.0);
    MatC H = -I * xi;
    Eigen::SelfAdjointEigenSolver<MatC> es(H);
    VecC d(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::exp(I * es.eigenvalues()[i]);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

/// Group element in Cartan form k·exp(beta) from frame coordinates.
inline MatC group_element(const Group& G, const VecR& k_coords, const VecR& p_coords) {
    MatC k = expm_skew(from_coords(k_coords, G.k_frame()).size() == 0
                           ? MatC::Zero(G.n(), G.n())
                           : from_coords(k_coords, G.k_frame()));
    MatC p = expm_herm(from_coords(p_coords, G.p_frame()).size() == 0
                           ? MatC::Zero(G.n(), G.n())
                           : from_coords(p_coords, G.p_frame()));
    return k * p;
}

// ---------------------------------------------------------------------------
// Eigenvalue clusters of a p-element acting on C^n
// ---------------------------------------------------------------------------

struct EigenClusters {
    std::vector<double> values;       // ascending
    std::vector<MatC> projectors;     // orthogonal projectors onto the clusters
    std::vector<int> dims;
};

inline EigenClusters eigen_clusters(const MatC& beta) {
    Eigen::SelfAdjointEigenSolver<MatC> es(beta);
    const VecR lam = es.eigenvalues();
    const MatC V = es.eigenvectors();
    const double ctol = 1e-8 * (1.0 + beta.norm());
    EigenClusters out;
    Eigen::Index i = 0;
    while (i < lam.size()) {
        Eigen::Index j = i;
        while (j + 1 < lam.size() && lam[j + 1] - lam[j] < ctol) ++j;
        MatC P = MatC::Zero(beta.rows(), beta.cols());
        for (Eigen::Index c = i; c <= j; ++c) P += V.col(c) * V.col(c).adjoint();
        out.values.push_back(lam.segment(i, j - i + 1).mean());
        out.projectors.push_back(std::move(P));
        out.dims.push_back(static_cast<int>(j - i + 1));
        i = j + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// beta-limits p^{beta+}
// ---------------------------------------------------------------------------

/// Component mass below which an eigen-coefficient counts as zero in the
/// limit expansion; mislabeling flips the limit line, so masses near the
/// threshold are surfaced in the result.
inline constexpr double kBetaLimitMassTol = 1e-12;

struct BetaLimitResult {
    ProjPoint seed;
    MatC beta;
    bool converged = true;   // always true for linear actions on P(V)
    bool in_space = true;    // limit inside the configured X
    ProjPoint limit;
    double mu_beta_at_seed = 0.0;
    double r_value = 0.0;    // mu_p^beta at the limit
    double retained_mass = 0.0;
    double dropped_mass = 0.0;
};

/// lim_{t→-∞} exp(tβ)·seed in closed form: expand the representative in the
/// β-eigenbasis; the limit line is the component with minimal eigenvalue
/// among those present.
inline BetaLimitResult beta_limit(const Group& G, const MatC& beta, const ProjPoint& seed,
                                  Space space = Space::ComplexProjective) {
    BetaLimitResult out;
    out.seed = seed;
    out.beta = beta;
    out.mu_beta_at_seed = mu_pairing(G, beta, seed);
    EigenClusters cl = eigen_clusters(beta);
    int arg = -1;
    for (size_t c = 0; c < cl.values.size(); ++c) {
        double mass = (cl.projectors[c] * seed.rep).norm();
        if (mass > kBetaLimitMassTol) { arg = static_cast<int>(c); break; }
        out.dropped_mass = std::max(out.dropped_mass, mass);
    }
    if (arg < 0) throw structural_error("beta_limit: representative has no retained component");
    VecC v = cl.projectors[static_cast<size_t>(arg)] * seed.rep;
    out.retained_mass = v.norm();
    out.limit = make_point(v);
    out.r_value = mu_pairing(G, beta, out.limit);
    if (space == Space::RealProjective && !out.limit.real_flag) out.in_space = false;
    return out;
}

// ---------------------------------------------------------------------------
// Fixed-point components X^beta
// ---------------------------------------------------------------------------

struct FixedComponent {
    double eigenvalue = 0.0;
    int dim = 0;              // complex dimension of the eigenspace
    ProjPoint representative;
    double mu_beta = 0.0;     // the locally constant value of mu_p^beta
    double probe_residual = 0.0;
};

/// X^beta is the union of projectivized beta-eigenspaces; one representative
/// per eigenvalue, with mu_p^beta probed for constancy on the component.
inline std::vector<FixedComponent> fixed_set_components(const Group& G, const MatC& beta,
                                                        Space space, int probe_count = 10) {
    std::vector<FixedComponent> out;
    if (tnorm(beta) < 1e-14) {
        FixedComponent c;
        VecC e1 = VecC::Zero(G.n());
        e1[0] = 1.0;
        c.representative = make_point(e1);
        c.dim = G.n();
        out.push_back(c);
        return out;
    }
    EigenClusters cl = eigen_clusters(beta);
    for (size_t c = 0; c < cl.values.size(); ++c) {
        FixedComponent fc;
        fc.eigenvalue = cl.values[c];
        fc.dim = cl.dims[c];
        const MatC& P = cl.projectors[c];
        if (space == Space::RealProjective) {
            if ((P - P.conjugate()).norm() > 1e-8 * cl.dims[c]) continue;
            Eigen::SelfAdjointEigenSolver<MatR> er(P.real());
            if (er.eigenvalues()(er.eigenvalues().size() - 1) < 1.0 - 1e-8) continue;
            fc.representative = make_point(er.eigenvectors().col(er.eigenvalues().size() - 1).cast<cplx>());
        } else {
            Eigen::SelfAdjointEigenSolver<MatC> ev(P);
            fc.representative = make_point(ev.eigenvectors().col(ev.eigenvalues().size() - 1));
        }
        fc.mu_beta = mu_pairing(G, beta, fc.representative);
        auto rng = stream(0xf1bedULL, "fixed-probes", static_cast<std::uint64_t>(c));
        for (int t = 0; t < probe_count; ++t) {
            VecC r = space == Space::RealProjective ? random_unit_real(rng, G.n())
                                                    : random_unit_complex(rng, G.n());
            VecC pr = P * r;
            if (space == Space::RealProjective) pr = pr.real().cast<cplx>();
            if (pr.norm() < 1e-8) continue;
            double v = mu_pairing(G, beta, make_point(pr));
            fc.probe_residual = std::max(fc.probe_residual, std::abs(v - fc.mu_beta));
        }
        out.push_back(std::move(fc));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Semistability for the shifted gradient map on X^beta
// ---------------------------------------------------------------------------

enum class Semistability { Semistable, Unstable, Inconclusive };

struct SemistableResult {
    Semistability verdict = Semistability::Inconclusive;
    double shifted_eta = 0.0;
    double shifted_grad = 0.0;
    long steps = 0;
    bool plateau = false;
    double drift_seen = 0.0;
};

inline const char* to_string(Semistability s) {
    switch (s) {
        case Semistability::Semistable: return "SEMISTABLE";
        case Semistability::Unstable: return "UNSTABLE";
        default: return "INCONCLUSIVE";
    }
}

/// Runs the eta-flow of the shifted gradient map mu_{p^beta} - beta for the
/// centralizer G^beta restricted to the seed's component of X^beta.
/// SEMISTABLE when the shifted eta reaches ~0 (the G^beta-orbit closure
/// meets M_{p^beta}(beta)); UNSTABLE when it settles at a positive level.
inline SemistableResult semistable_test(const Group& G, const MatC& beta, const ProjPoint& x,
                                        Space space, FlowOptions opts = {},
                                        double semistable_tol = 1e-10,
                                        double unstable_floor = 1e-6) {
    double fix_res = riem_norm(vector_field(G, beta, x, space));
    if (fix_res > 1e-8 * (1.0 + tnorm(beta)))
        throw std::invalid_argument("semistable_test: x not in X^beta, |beta_X(x)| = " + fmt(fix_res));

    auto pbeta = centralizer_in(G, G.p_frame(), beta);
    EigenClusters cl = eigen_clusters(beta);
    int comp = 0;
    double best = -1.0;
    for (size_t c = 0; c < cl.values.size(); ++c) {
        double mass = (cl.projectors[c] * x.rep).norm();
        if (mass > best) { best = mass; comp = static_cast<int>(c); }
    }
    const MatC P = cl.projectors[static_cast<size_t>(comp)];

    auto shifted = [&, pbeta](const VecC& u) -> MatC {
        MatC zeta = -beta;
        for (const auto& Q : pbeta) zeta += (u.adjoint() * Q * u)(0).real() * Q;
        return zeta;
    };

    opts.plateau_window = std::max<long>(opts.plateau_window, 10000);

    DescentProblem prob;
    prob.field = [&](const VecC& z) -> VecC {
        VecC u = z / z.norm();
        return -detail::field_of(shifted(u), u, space);
    };
    prob.value = [&](const VecC& z) {
        VecC u = z / z.norm();
        MatC zeta = shifted(u);
        return 0.5 * tform(zeta, zeta);
    };
    prob.grad_norm = [&](const VecC& z) {
        VecC u = z / z.norm();
        return riem_norm(detail::field_of(shifted(u), u, space));
    };
    prob.grad_tol = [&](const VecC& z) {
        VecC u = z / z.norm();
        return opts.tol_crit_rel * (1.0 + tnorm(shifted(u)));
    };
    prob.constrain = [&](const VecC& z) -> VecC {
        VecC u = P * z;
        if (space == Space::RealProjective) u = u.real().cast<cplx>();
        return u / u.norm();
    };
    prob.drift = [&](const VecC& z) {
        double d = (z - P * z).norm();
        if (space == Space::RealProjective) d = std::max(d, z.imag().norm());
        return d;
    };

    DescentResult R = integrate_descent(prob, x.rep, opts);
    SemistableResult out;
    out.shifted_eta = R.final_value;
    out.shifted_grad = R.final_grad;
    out.steps = R.steps;
    out.plateau = R.plateau;
    out.drift_seen = R.drift_seen;
    if (R.final_value < semistable_tol) out.verdict = Semistability::Semistable;
    else if ((R.grad_converged || R.plateau) && R.final_value >= unstable_floor)
        out.verdict = Semistability::Unstable;
    else out.verdict = Semistability::Inconclusive;
    return out;
}

// ---------------------------------------------------------------------------
// Compact-group searches
// ---------------------------------------------------------------------------

struct KSearchOptions {
    int restarts = 16;
    int max_iters = 300;
    double step0 = 0.7;
    double step_min = 1e-10;
    std::uint64_t rng_seed = 0x6b736561ULL;
};

/// Derivative-free minimization over K = exp(k): random restarts followed by
/// compass search in exponential coordinates. Deterministic merge: best
/// residual, ties by restart index.
inline std::pair<double, MatC> minimize_over_K(const Group& G,
                                               const std::function<double(const MatC&)>& f,
                                               const KSearchOptions& opts = {}) {
    const int d = G.dim_k();
    if (d == 0) {
        MatC id = MatC::Identity(G.n(), G.n());
        return {f(id), id};
    }
    double best_val = std::numeric_limits<double>::infinity();
    VecR best_theta = VecR::Zero(d);
    for (int r = 0; r < opts.restarts; ++r) {
        auto rng = stream(opts.rng_seed, "ksearch", static_cast<std::uint64_t>(r));
        VecR theta = r == 0 ? VecR::Zero(d) : random_gaussian(rng, d, 1.6);
        double val = f(expm_skew(from_coords(theta, G.k_frame())));
        double step = opts.step0;
        for (int it = 0; it < opts.max_iters && step > opts.step_min; ++it) {
            bool improved = false;
            for (int j = 0; j < d; ++j) {
                for (double s : {step, -step}) {
                    VecR cand = theta;
                    cand[j] += s;
                    double v = f(expm_skew(from_coords(cand, G.k_frame())));
                    if (v < val - 1e-18) {
                        val = v;
                        theta = cand;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (val < best_val) {
            best_val = val;
            best_theta = theta;
        }
    }
    return {best_val, expm_skew(from_coords(best_theta, G.k_frame()))};
}

/// Least distance from K·x to y and the achieving k.
inline std::pair<double, MatC> k_orbit_reach(const Group& G, const ProjPoint& x,
                                             const ProjPoint& y, const KSearchOptions& opts = {}) {
    auto f = [&](const MatC& k) { return chordal_distance(act(k, x), y); };
    return minimize_over_K(G, f, opts);
}

// ---------------------------------------------------------------------------
// Pre-stratum membership S_beta = K · S^{beta+}
// ---------------------------------------------------------------------------

enum class Membership { Member, NotFound };

struct MembershipResult {
    Membership verdict = Membership::NotFound;
    MatC witness_k;          // z ~ k · s with s in S^{beta+}
    ProjPoint transported;   // k^{-1}·z
    ProjPoint limit;         // its beta-limit in X^beta
    double mass_residual = std::numeric_limits<double>::infinity();
    bool level_cluster_found = false;
    SemistableResult semistable;
};

/// Searches K for k with k^{-1}·z in S^{beta+}: the transported point must
/// have no eigencomponent below the level lambda* = |beta|^2 (so its
/// beta-limit lands in X^beta_{|beta|^2}) and the limit must pass the
/// shifted semistability test. Failure is NOT-FOUND (undecided), never a
/// refutation; refutation comes from the flow classification cross-check.
inline MembershipResult prestratum_membership(const Group& G, const CandidateBeta& cand,
                                              const ProjPoint& z, Space space,
                                              FlowOptions flow_opts = {},
                                              KSearchOptions k_opts = {},
                                              double mass_tol = 1e-14) {
    MembershipResult out;
    const MatC& beta = cand.beta;
    const double level = cand.norm * cand.norm;
    EigenClusters cl = eigen_clusters(beta);
    int star = -1;
    for (size_t c = 0; c < cl.values.size(); ++c)
        if (std::abs(cl.values[c] - level) < 1e-6 * (1.0 + std::abs(level))) star = static_cast<int>(c);
    if (star < 0) return out;
    out.level_cluster_found = true;

    MatC below = MatC::Zero(G.n(), G.n());
    for (int c = 0; c < star; ++c) below += cl.projectors[static_cast<size_t>(c)];
    const MatC& at = cl.projectors[static_cast<size_t>(star)];

    auto residual = [&](const MatC& k) {
        VecC w = k.adjoint() * z.rep; // k^{-1} = k* on the compact group
        double bad = (below * w).squaredNorm();
        double good = (at * w).squaredNorm();
        return bad + std::max(0.0, 1e-6 - good); // require visible level mass
    };
    auto [val, k] = minimize_over_K(G, residual, k_opts);
    out.mass_residual = val;
    out.witness_k = k;
    VecC w = k.adjoint() * z.rep;
    out.transported = make_point(w);
    if (val > mass_tol) return out;
    VecC lv = at * w;
    if (space == Space::RealProjective) {
        VecR lr = lv.real();
        if (lr.norm() < 0.5 * lv.norm()) return out; // limit leaves the real locus
        lv = lr.cast<cplx>();
    }
    out.limit = make_point(lv);
    out.semistable = semistable_test(G, beta, out.limit, space, flow_opts);
    if (out.semistable.verdict == Semistability::Semistable) out.verdict = Membership::Member;
    return out;
}

// ---------------------------------------------------------------------------
// Maximal pre-strata and Wolf's uniqueness
// ---------------------------------------------------------------------------

struct MaxStratumSample {
    double norm_deviation = 0.0;    // max | |mu_p(g z)| - |beta| | over random g
    bool witnessed = false;
    double witness_residual = 0.0;
    double limit_fix_distance = 0.0; // beta_limit must fix the witness point
};

struct MaxStratumReport {
    std::vector<MaxStratumSample> samples;
    double max_norm_deviation = 0.0;
    double max_limit_fix_distance = 0.0;
    bool all_witnessed = true;
    bool ok = false;
    double tol = 0.0;
};

/// For a maximal candidate, G-orbits inside S_beta are K-orbits: |mu_p| is
/// constant along random group moves, and witnesses are fixed by the
/// beta-limit (S^{beta+} is a union of components of X^beta).
inline MaxStratumReport verify_maximal_stratum(const Group& G, const CandidateBeta& cand,
                                               const std::vector<ProjPoint>& samples, Space space,
                                               int n_group_moves = 100,
                                               std::uint64_t rng_seed = 0x3a11ULL,
                                               double tol = 1e-8) {
    MaxStratumReport rep;
    rep.tol = tol;
    for (size_t i = 0; i < samples.size(); ++i) {
        const ProjPoint& z = samples[i];
        MaxStratumSample s;
        auto rng = stream(rng_seed, "maxstratum", static_cast<std::uint64_t>(i));
        for (int t = 0; t < n_group_moves; ++t) {
            VecR kc = G.dim_k() ? random_gaussian(rng, G.dim_k(), 0.8) : VecR(0);
            VecR pc = G.dim_p() ? random_gaussian(rng, G.dim_p(), 0.8) : VecR(0);
            MatC g = group_element(G, kc, pc);
            double mun = gradient_map(G, act(g, z)).norm() / std::sqrt(1.0); // trace norm below
            MatC mu = gradient_map(G, act(g, z));
            mun = tnorm(mu);
            s.norm_deviation = std::max(s.norm_deviation, std::abs(mun - cand.norm));
        }
        MembershipResult m = prestratum_membership(G, cand, z, space);
        s.witnessed = m.verdict == Membership::Member;
        s.witness_residual = m.mass_residual;
        if (s.witnessed) {
            BetaLimitResult bl = beta_limit(G, cand.beta, m.transported, space);
            s.limit_fix_distance = chordal_distance(bl.limit, m.transported);
        }
        rep.max_norm_deviation = std::max(rep.max_norm_deviation, s.norm_deviation);
        rep.max_limit_fix_distance = std::max(rep.max_limit_fix_distance, s.limit_fix_distance);
        rep.all_witnessed = rep.all_witnessed && s.witnessed;
        rep.samples.push_back(std::move(s));
    }
    rep.ok = rep.all_witnessed && rep.max_norm_deviation < tol &&
             rep.max_limit_fix_distance < 1e-6;
    return rep;
}

/// Wolf-type uniqueness: all points must lie on a single K-orbit. Returns
/// the largest reach distance to the first point.
inline double wolf_uniqueness_check(const Group& G, const std::vector<ProjPoint>& points,
                                    const KSearchOptions& opts = {}) {
    if (points.size() < 2) return 0.0;
    double worst = 0.0;
    for (size_t i = 1; i < points.size(); ++i)
        worst = std::max(worst, k_orbit_reach(G, points[i], points[0], opts).first);
    return worst;
}

} // namespace gradstrat
