#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <vector>

#include "candidates.hpp"
#include "proj_geom.hpp"
#include "rng.hpp"

namespace gradstrat {

struct FlowOptions {
    double tol_crit_rel = 1e-8;   // criticality: |grad eta| < tol*(1+|mu_p|)
    long max_steps = 1000000;
    double t_span = 1000.0;
    double h0 = 1e-2;
    double h_min = 1e-12;
    double h_max = 0.5;
    double rtol = 1e-9;
    double atol = 1e-12;
    double eta_increase_tol = 1e-9;   // per-step monotonicity slack
    long plateau_window = 1000;       // steps
    double plateau_delta = 1e-12;
    double real_drift_tol = 1e-6;
    int record_stride = 25;
    double label_match_rel = 1e-5;    // label matching: 1e-5*(1+|beta|)
};

// ---------------------------------------------------------------------------
// Generic descent integrator on the unit sphere (embedded Runge-Kutta 5(4),
// Dormand-Prince pair) with per-step renormalization and constraint
// projection. Shared by the eta_p flow and the shifted flows in strata.
// ---------------------------------------------------------------------------

struct DescentProblem {
    std::function<VecC(const VecC&)> field;       // descent direction (already negated)
    std::function<double(const VecC&)> value;     // monitored potential
    std::function<double(const VecC&)> grad_norm;
    std::function<double(const VecC&)> grad_tol;  // stop when grad_norm < grad_tol
    std::function<VecC(const VecC&)> constrain;   // renormalize / project
    std::function<double(const VecC&)> drift;     // distance to constraint set
};

struct DescentSample {
    double t = 0.0;
    VecC z;
    double value = 0.0;
    double grad = 0.0;
};

struct DescentResult {
    VecC z;
    double t = 0.0;
    long steps = 0;
    bool grad_converged = false;
    bool plateau = false;
    bool budget_exhausted = false;
    bool drift_error = false;
    double drift_seen = 0.0;
    double final_value = 0.0;
    double final_grad = 0.0;
    bool monotone_ok = true;
    double worst_increase = 0.0;
    std::vector<DescentSample> samples;
};

inline DescentResult integrate_descent(const DescentProblem& P, const VecC& z0,
                                       const FlowOptions& opts) {
    // Dormand-Prince 5(4) tableau
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    DescentResult R;
    R.z = P.constrain(z0);
    R.t = 0.0;
    double h = opts.h0;
    double val = P.value(R.z);
    double gn = P.grad_norm(R.z);
    R.samples.push_back({0.0, R.z, val, gn});

    std::deque<double> window;
    window.push_back(val);

    if (gn < P.grad_tol(R.z)) {
        R.grad_converged = true;
        R.final_value = val;
        R.final_grad = gn;
        return R;
    }

    long accepted = 0;
    while (accepted < opts.max_steps && R.t < opts.t_span) {
        h = std::min(h, opts.h_max);
        h = std::min(h, opts.t_span - R.t);
        if (h < opts.h_min) h = opts.h_min;

        const VecC& z = R.z;
        VecC k1 = P.field(z);
        VecC k2 = P.field(z + h * a21 * k1);
        VecC k3 = P.field(z + h * (a31 * k1 + a32 * k2));
        VecC k4 = P.field(z + h * (a41 * k1 + a42 * k2 + a43 * k3));
        VecC k5 = P.field(z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        VecC k6 = P.field(z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        VecC y5 = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        VecC k7 = P.field(y5);
        VecC err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double errn = err.norm() / (opts.atol + opts.rtol);
        double newval = 0.0;
        bool accept = errn <= 1.0;
        if (accept) {
            newval = P.value(y5 / y5.norm());
            if (newval > val + opts.eta_increase_tol && h > 4.0 * opts.h_min) accept = false;
        }
        if (!accept && h <= opts.h_min * 1.0000001) accept = true; // cannot refine further

        if (accept) {
            double dr = P.drift(y5 / y5.norm());
            R.drift_seen = std::max(R.drift_seen, dr);
            if (dr > opts.real_drift_tol) {
                R.drift_error = true;
                break;
            }
            R.t += h;
            R.z = P.constrain(y5);
            ++accepted;
            newval = P.value(R.z);
            if (newval > val + opts.eta_increase_tol) {
                R.monotone_ok = false;
                R.worst_increase = std::max(R.worst_increase, newval - val);
            }
            val = newval;
            gn = P.grad_norm(R.z);
            if (accepted % opts.record_stride == 0) R.samples.push_back({R.t, R.z, val, gn});

            window.push_back(val);
            if (static_cast<long>(window.size()) > opts.plateau_window) window.pop_front();
            bool plateau = static_cast<long>(window.size()) == opts.plateau_window &&
                           window.front() - window.back() < opts.plateau_delta;
            if (gn < P.grad_tol(R.z)) {
                R.grad_converged = true;
                break;
            }
            if (plateau) {
                R.plateau = true;
                break;
            }
        }
        double fac = errn > 0.0 ? 0.9 * std::pow(errn, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
        if (h < opts.h_min) h = opts.h_min;
    }
    if (!R.grad_converged && !R.plateau && !R.drift_error) R.budget_exhausted = true;
    R.steps = accepted;
    if (R.samples.empty() || R.samples.back().t != R.t) R.samples.push_back({R.t, R.z, val, gn});
    R.final_value = val;
    R.final_grad = gn;
    return R;
}

// ---------------------------------------------------------------------------
// The negative eta_p flow
// ---------------------------------------------------------------------------

struct FlowSample {
    double t = 0.0;
    ProjPoint point;
    double eta = 0.0;
    double grad_norm = 0.0;
};

struct FlowTrace {
    ProjPoint seed;
    std::vector<FlowSample> samples;
    ProjPoint terminal;
    GradientMapEval terminal_eval;
    bool converged = false;   // grad-norm threshold reached
    bool stalled = false;     // eta plateau without criticality
    bool drift_error = false;
    long step_count = 0;
    double wall_time_s = 0.0;
    bool monotone_ok = true;
    double worst_eta_increase = 0.0;
};

namespace detail {
inline MatC mu_p_raw(const Group& G, const VecC& z) {
    MatC mu = MatC::Zero(G.n(), G.n());
    for (const auto& P : G.p_frame()) {
        double c = (z.adjoint() * P * z)(0).real();
        mu += c * P;
    }
    return mu;
}
inline VecC field_of(const MatC& beta, const VecC& z, Space space) {
    double r = (z.adjoint() * beta * z)(0).real();
    VecC v = beta * z - r * z;
    if (space == Space::RealProjective) {
        VecR vr = v.real();
        VecR zr = z.real();
        vr -= zr * zr.dot(vr);
        return vr.cast<cplx>();
    }
    return v;
}
} // namespace detail

/// Integrates dz/dt = -(mu_p(z))_X(z), i.e. the negative-time direction of
/// the grad eta_p flow, until criticality or budget exhaustion.
inline FlowTrace flow_to_limit(const Group& G, const ProjPoint& seed, Space space,
                               const FlowOptions& opts = {}) {
    if (space == Space::RealProjective && !seed.real_flag)
        throw std::invalid_argument("flow_to_limit: seed not in the configured real locus");

    DescentProblem P;
    P.field = [&](const VecC& z) -> VecC {
        VecC u = z / z.norm();
        return -detail::field_of(detail::mu_p_raw(G, u), u, space);
    };
    P.value = [&](const VecC& z) {
        double s = 0.0;
        for (const auto& Pj : G.p_frame()) {
            double c = (z.adjoint() * Pj * z)(0).real() / z.squaredNorm();
            s += c * c;
        }
        return 0.5 * s;
    };
    P.grad_norm = [&](const VecC& z) {
        VecC u = z / z.norm();
        return riem_norm(detail::field_of(detail::mu_p_raw(G, u), u, space));
    };
    P.grad_tol = [&](const VecC& z) {
        double mun = detail::mu_p_raw(G, z / z.norm()).norm();
        return opts.tol_crit_rel * (1.0 + mun);
    };
    P.constrain = [&](const VecC& z) -> VecC {
        if (space == Space::RealProjective) {
            VecR r = z.real();
            return (r / r.norm()).cast<cplx>();
        }
        return z / z.norm();
    };
    P.drift = [&](const VecC& z) {
        if (space == Space::RealProjective) return z.imag().norm();
        return 0.0;
    };

    auto t0 = std::chrono::steady_clock::now();
    DescentResult R = integrate_descent(P, seed.rep, opts);
    auto t1 = std::chrono::steady_clock::now();

    FlowTrace tr;
    tr.seed = seed;
    for (const auto& s : R.samples) {
        FlowSample fs;
        fs.t = s.t;
        fs.point = make_point(s.z);
        fs.eta = s.value;
        fs.grad_norm = s.grad;
        tr.samples.push_back(std::move(fs));
    }
    tr.terminal = make_point(R.z);
    tr.terminal_eval = eval_gradient_map(G, tr.terminal, space);
    tr.converged = R.grad_converged;
    tr.stalled = R.plateau && !R.grad_converged;
    tr.drift_error = R.drift_error;
    tr.step_count = R.steps;
    tr.monotone_ok = R.monotone_ok;
    tr.worst_eta_increase = R.worst_increase;
    tr.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    return tr;
}

// ---------------------------------------------------------------------------
// Stratum labels
// ---------------------------------------------------------------------------

struct ClassifyResult {
    FlowTrace trace;
    int label = -1;              // index into the candidate list
    double match_distance = 0.0;
    VecR beta_coords;            // chamber rep of mu_p(terminal), a-frame coords
    bool unmatched = true;
};

/// Labels a seed by the K-orbit of mu_p at its flow limit: the chamber
/// representative of the (spectrum-sorted) terminal gradient-map value is
/// matched to the nearest candidate.
inline ClassifyResult classify_point(const Group& G, const ProjPoint& seed, Space space,
                                     const std::vector<CandidateBeta>& candidates,
                                     const FlowOptions& opts = {}) {
    ClassifyResult out;
    out.trace = flow_to_limit(G, seed, space, opts);
    MatC rep = chamber_rep_matrix(G, out.trace.terminal_eval.mu_p);
    out.beta_coords = coords_in(rep, G.a_frame());
    if (!out.trace.converged) return out;
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (size_t i = 0; i < candidates.size(); ++i) {
        double d = (candidates[i].coords - out.beta_coords).norm();
        if (d < best) { best = d; arg = static_cast<int>(i); }
    }
    out.match_distance = best;
    if (arg >= 0 && best <= opts.label_match_rel * (1.0 + out.beta_coords.norm())) {
        out.label = arg;
        out.unmatched = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Basin survey with the empirical closure-ordering audit
// ---------------------------------------------------------------------------

struct SurveyEntry {
    ProjPoint seed;
    bool real_seed = false;
    int label = -1;
    double match_distance = 0.0;
    double eta_terminal = 0.0;
    double terminal_mu_norm = 0.0;
    long steps = 0;
    bool converged = false;
};

struct LabelCount {
    int label = -1;       // -1 collects unmatched seeds
    long count = 0;
    double mean_steps = 0.0;
};

struct ClosureAuditEntry {
    int entry_index = -1;
    int label = -1;        // label of the audited point
    int adjacent_label = -1;
    bool violation = false; // literal rule: |beta_point| > |beta_adjacent|
};

struct SurveyReport {
    std::vector<SurveyEntry> entries;
    std::vector<LabelCount> counts;
    long unmatched = 0;
    std::vector<double> eps_sweep;
    std::vector<ClosureAuditEntry> audit;
    long audit_qualifying = 0;
    long audit_violations = 0;
};

/// Boundary-adjacency audit of Theorem-style closure ordering: a point
/// qualifies against label L if every ball of the epsilon sweep around it
/// contains an L-labeled point with a different label than its own; the
/// violation predicate follows the strictly-larger-norm ordering rule.
inline void closure_ordering_audit(const std::vector<CandidateBeta>& candidates,
                                   const std::vector<double>& eps_sweep, SurveyReport& rep) {
    rep.eps_sweep = eps_sweep;
    if (eps_sweep.empty() || rep.entries.empty()) return;
    const double eps_max = *std::max_element(eps_sweep.begin(), eps_sweep.end());
    const size_t N = rep.entries.size();
    for (size_t i = 0; i < N; ++i) {
        const auto& x = rep.entries[i];
        if (x.label < 0) continue;
        // labels present within each radius
        std::vector<std::vector<bool>> present(eps_sweep.size(),
                                               std::vector<bool>(candidates.size(), false));
        for (size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const auto& y = rep.entries[j];
            if (y.label < 0 || y.label == x.label) continue;
            double d = chordal_distance(x.seed, y.seed);
            if (d > eps_max) continue;
            for (size_t e = 0; e < eps_sweep.size(); ++e)
                if (d <= eps_sweep[e]) present[e][static_cast<size_t>(y.label)] = true;
        }
        for (size_t L = 0; L < candidates.size(); ++L) {
            if (static_cast<int>(L) == x.label) continue;
            bool all = true;
            for (size_t e = 0; e < eps_sweep.size(); ++e) all = all && present[e][L];
            if (!all) continue;
            ClosureAuditEntry a;
            a.entry_index = static_cast<int>(i);
            a.label = x.label;
            a.adjacent_label = static_cast<int>(L);
            double nx = candidates[static_cast<size_t>(x.label)].norm;
            double nl = candidates[L].norm;
            a.violation = nx > nl + 1e-9;
            rep.audit.push_back(a);
            ++rep.audit_qualifying;
            if (a.violation) ++rep.audit_violations;
        }
    }
}

/// Classifies uniform random seeds (and optionally seeds of the real locus)
/// and aggregates per-label statistics. Deterministic given rng_seed: seeds
/// are drawn from per-index streams.
inline SurveyReport basin_survey(const Group& G, Space space,
                                 const std::vector<CandidateBeta>& candidates, long n_complex,
                                 long n_real, std::uint64_t rng_seed,
                                 const FlowOptions& opts = {},
                                 const std::vector<double>& eps_sweep = {1e-2, 1e-3}) {
    SurveyReport rep;
    auto classify_into = [&](const ProjPoint& seed, bool real_seed) {
        ClassifyResult c = classify_point(G, seed, space, candidates, opts);
        SurveyEntry e;
        e.seed = seed;
        e.real_seed = real_seed;
        e.label = c.label;
        e.match_distance = c.match_distance;
        e.eta_terminal = c.trace.terminal_eval.eta;
        e.terminal_mu_norm = std::sqrt(2.0 * c.trace.terminal_eval.eta);
        e.steps = c.trace.step_count;
        e.converged = c.trace.converged;
        rep.entries.push_back(std::move(e));
    };
    for (long i = 0; i < n_complex; ++i) {
        auto rng = stream(rng_seed, "survey-complex", static_cast<std::uint64_t>(i));
        VecC z = space == Space::RealProjective ? random_unit_real(rng, G.n())
                                                : random_unit_complex(rng, G.n());
        classify_into(make_point(z), space == Space::RealProjective);
    }
    for (long i = 0; i < n_real; ++i) {
        auto rng = stream(rng_seed, "survey-real", static_cast<std::uint64_t>(i));
        classify_into(make_point(random_unit_real(rng, G.n())), true);
    }

    std::vector<long> counts(candidates.size() + 1, 0);
    std::vector<double> steps(candidates.size() + 1, 0.0);
    for (const auto& e : rep.entries) {
        size_t k = e.label < 0 ? candidates.size() : static_cast<size_t>(e.label);
        ++counts[k];
        steps[k] += static_cast<double>(e.steps);
    }
    for (size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) continue;
        LabelCount lc;
        lc.label = k == candidates.size() ? -1 : static_cast<int>(k);
        lc.count = counts[k];
        lc.mean_steps = steps[k] / static_cast<double>(counts[k]);
        rep.counts.push_back(lc);
        if (lc.label < 0) rep.unmatched = lc.count;
    }
    closure_ordering_audit(candidates, eps_sweep, rep);
    return rep;
}

// ---------------------------------------------------------------------------
// Hessian signatures at flow limits
// ---------------------------------------------------------------------------

struct HessianLimitReport {
    VecR eigenvalues;          // spectrum of the Hessian of eta_p at the limit
    int n_negative = 0;
    int codim = 0;             // codimension of T_x(S_beta) in T_x(X)
    double min_on_stratum = 0.0;
    double max_on_normal = 0.0;  // 0 when the stratum is open
    bool nonneg_on_stratum = true;
    bool negative_on_normal = true;
};

/// Checks Hessian semidefiniteness along T_x(S_beta) = k·x + W^{beta+} and
/// strict negativity on its orthocomplement at a converged flow terminal.
inline HessianLimitReport check_hessian_at_limits(const Group& G, const FlowTrace& trace,
                                                  Space space) {
    if (!trace.converged)
        throw std::invalid_argument("check_hessian_at_limits: trace did not converge");
    const ProjPoint& x = trace.terminal;
    HessianForm hf = hessian_eta(G, x, space);
    const auto d = static_cast<Eigen::Index>(hf.frame.size());

    TangentDecomposition td = tangent_decompose(G, hf.beta, x, space);
    std::vector<VecC> span_vecs;
    for (const auto& k : G.k_frame()) span_vecs.push_back(vector_field(G, k, x, space));
    for (const auto& w : td.nonneg_span) span_vecs.push_back(w);

    // coordinates in the tangent frame, orthonormalized
    MatR B(d, static_cast<Eigen::Index>(span_vecs.size()));
    for (size_t c = 0; c < span_vecs.size(); ++c)
        for (Eigen::Index a = 0; a < d; ++a)
            B(a, static_cast<Eigen::Index>(c)) = riem(span_vecs[c], hf.frame[static_cast<size_t>(a)]);
    Eigen::ColPivHouseholderQR<MatR> qr(B);
    qr.setThreshold(1e-9);
    const auto r = qr.rank();
    MatR Q = qr.householderQ() * MatR::Identity(d, d);
    MatR S = Q.leftCols(r);    // T_x(S_beta)
    MatR Ncmp = Q.rightCols(d - r);

    HessianLimitReport rep;
    Eigen::SelfAdjointEigenSolver<MatR> full(hf.H);
    rep.eigenvalues = full.eigenvalues();
    const double scale = 1.0 + rep.eigenvalues.cwiseAbs().maxCoeff();
    const double tol = 1e-8 * scale;
    for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
        if (rep.eigenvalues[i] < -tol) ++rep.n_negative;
    rep.codim = static_cast<int>(d - r);
    if (r > 0) {
        Eigen::SelfAdjointEigenSolver<MatR> es(MatR(S.transpose() * hf.H * S));
        rep.min_on_stratum = es.eigenvalues().minCoeff();
    }
    rep.nonneg_on_stratum = rep.min_on_stratum >= -tol;
    if (d - r > 0) {
        Eigen::SelfAdjointEigenSolver<MatR> es(MatR(Ncmp.transpose() * hf.H * Ncmp));
        rep.max_on_normal = es.eigenvalues().maxCoeff();
        rep.negative_on_normal = rep.max_on_normal < -tol;
    }
    return rep;
}

} // namespace gradstrat
