#pragma once

#include <chrono>
#include <filesystem>
#include <optional>

#include "config.hpp"
#include "morse.hpp"
#include "serialize.hpp"
#include "strata.hpp"

namespace gradstrat {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunSetup {
    Config cfg;
    GroupSpec spec;
    Space space = Space::ComplexProjective;
    std::uint64_t rng_seed = 0;
    std::string out_dir;
    std::vector<std::string> experiments;
    FlowOptions flow;
};

namespace detail {
inline const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> k{"validate", "candidates", "survey", "stratify", "morse"};
    return k;
}
inline std::vector<std::string> deps_of(const std::string& e) {
    if (e == "survey") return {"candidates"};
    if (e == "stratify") return {"candidates", "survey"};
    return {};
}
} // namespace detail

/// Validates the configuration and resolves the group, the space and the
/// experiment DAG. Throws config_error on any problem (CLI exit code 2).
inline RunSetup make_setup(Config cfg) {
    RunSetup s;
    std::string group = cfg.get("run.group");
    std::string group_file = cfg.get("run.group_file");
    if (!group.empty()) {
        auto preset = preset_by_name(group);
        if (!preset) throw config_error("unknown preset group '" + group + "'");
        s.spec = *preset;
    } else if (!group_file.empty()) {
        try {
            s.spec = read_group_spec(read_file(group_file));
        } catch (const std::exception& e) {
            throw config_error("cannot load group file '" + group_file + "': " + e.what());
        }
    } else {
        throw config_error("config must set run.group or run.group_file");
    }

    std::string space = cfg.get("run.space", "complex");
    if (space == "complex") s.space = Space::ComplexProjective;
    else if (space == "real") s.space = Space::RealProjective;
    else throw config_error("run.space must be 'complex' or 'real'");
    if (s.space == Space::RealProjective && !s.spec.real_form)
        throw config_error("run.space = real requires a real-form group");

    s.rng_seed = static_cast<std::uint64_t>(cfg.get_int("run.rng_seed", 20210914));
    s.out_dir = cfg.get("run.out", "out");

    s.experiments = cfg.get_list("run.experiments");
    for (const auto& e : s.experiments) {
        if (std::find(detail::known_experiments().begin(), detail::known_experiments().end(), e) ==
            detail::known_experiments().end())
            throw config_error("unknown experiment '" + e + "'");
        for (const auto& d : detail::deps_of(e))
            if (std::find(s.experiments.begin(), s.experiments.end(), d) == s.experiments.end())
                throw config_error("experiment '" + e + "' requires '" + d + "'");
    }

    s.flow.tol_crit_rel = cfg.get_double("flow.tol_crit_rel", s.flow.tol_crit_rel);
    if (s.flow.tol_crit_rel <= 0) throw config_error("flow.tol_crit_rel must be positive");
    s.flow.max_steps = cfg.get_int("flow.max_steps", s.flow.max_steps);
    s.flow.t_span = cfg.get_double("flow.t_span", s.flow.t_span);
    s.flow.rtol = cfg.get_double("flow.rtol", s.flow.rtol);
    s.flow.atol = cfg.get_double("flow.atol", s.flow.atol);
    s.flow.h0 = cfg.get_double("flow.h0", s.flow.h0);
    s.flow.h_max = cfg.get_double("flow.h_max", s.flow.h_max);
    s.flow.plateau_window = cfg.get_int("flow.plateau_window", s.flow.plateau_window);
    s.flow.plateau_delta = cfg.get_double("flow.plateau_delta", s.flow.plateau_delta);
    s.flow.record_stride = static_cast<int>(cfg.get_int("flow.record_stride", s.flow.record_stride));
    s.flow.label_match_rel = cfg.get_double("flow.label_match_rel", s.flow.label_match_rel);
    s.flow.real_drift_tol = cfg.get_double("flow.real_drift_tol", s.flow.real_drift_tol);
    for (double v : {s.flow.t_span, s.flow.rtol, s.flow.atol, s.flow.label_match_rel})
        if (v <= 0) throw config_error("flow tolerances and budgets must be positive");
    s.cfg = std::move(cfg);
    return s;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ExperimentRecord {
    std::string name;
    std::string status; // ok | failed | skipped
    std::vector<std::string> artifacts;
    std::string error;
    double wall_time_s = 0.0; // reported on stdout only, never serialized
};

struct RunResult {
    std::string manifest_path;
    std::vector<ExperimentRecord> records;
    bool any_failed = false;
};

namespace detail {
inline std::string config_hash(const Config& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(cfg.canonical())));
    return buf;
}

inline std::string manifest_text(const RunSetup& s, const std::vector<ExperimentRecord>& recs) {
    std::string out;
    out += "# gradstrat run manifest\n";
    out += "version = " + std::string(kVersion) + "\n";
    out += "config_hash = " + config_hash(s.cfg) + "\n";
    out += "[config]\n";
    out += s.cfg.canonical();
    out += "[experiments]\n";
    for (const auto& r : recs) {
        out += r.name + " status=" + r.status;
        if (!r.artifacts.empty()) {
            out += " artifacts=";
            for (size_t i = 0; i < r.artifacts.size(); ++i)
                out += (i ? "," : "") + r.artifacts[i];
        }
        if (!r.error.empty()) {
            std::string e = r.error;
            for (auto& c : e)
                if (c == '\n') c = ' ';
            out += " error=\"" + e + "\"";
        }
        out += "\n";
    }
    return out;
}
} // namespace detail

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace detail {

struct RunState {
    const RunSetup& setup;
    const Group& G;
    std::optional<WeightTable> weights;
    std::optional<std::vector<CandidateBeta>> candidates;
    std::optional<SurveyReport> survey;
};

inline std::string artifact(const RunSetup& s, const std::string& name) {
    return (std::filesystem::path(s.out_dir) / name).string();
}

inline std::vector<std::string> run_validate(RunState& st) {
    ValidationReport rep = validate_group_spec(st.setup.spec);
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : rep.checks)
        rows.push_back({c.name, fmt(c.residual), c.pass ? "pass" : "fail"});
    rows.push_back({"overall", fmt(rep.tolerance), rep.pass ? "pass" : "fail"});
    write_columnar(artifact(st.setup, "validation.txt"), {"check", "residual", "verdict"}, rows);
    if (!rep.pass) throw std::runtime_error("group spec validation failed");
    return {"validation.txt"};
}

inline std::vector<std::string> run_candidates(RunState& st) {
    st.weights = extract_weights(st.G, st.setup.space);
    int max_support = static_cast<int>(st.setup.cfg.get_int("candidates.max_support", -1));
    long long budget = st.setup.cfg.get_int("candidates.budget", 2000000);
    st.candidates = enumerate_candidates(st.G, *st.weights, max_support, budget);

    std::vector<std::string> whdr{"index", "multiplicity", "norm"};
    for (int j = 0; j < st.G.dim_a(); ++j) whdr.push_back("a" + std::to_string(j));
    for (int j = 0; j < st.G.n(); ++j) {
        whdr.push_back("re" + std::to_string(j));
        whdr.push_back("im" + std::to_string(j));
    }
    std::vector<std::vector<std::string>> wrows;
    for (size_t i = 0; i < st.weights->coords.size(); ++i) {
        std::vector<std::string> row{std::to_string(i),
                                     std::to_string(st.weights->multiplicity[i]),
                                     fmt(st.weights->coords[i].norm())};
        for (const auto& f : vector_fields(st.weights->coords[i])) row.push_back(f);
        for (const auto& f : point_fields(st.weights->fixed_points[i])) row.push_back(f);
        wrows.push_back(std::move(row));
    }
    write_columnar(artifact(st.setup, "weights.txt"), whdr, wrows);

    std::vector<std::string> chdr{"index", "norm", "support", "witness"};
    for (int j = 0; j < st.G.dim_a(); ++j) chdr.push_back("a" + std::to_string(j));
    std::vector<std::vector<std::string>> crows;
    for (size_t i = 0; i < st.candidates->size(); ++i) {
        const auto& c = (*st.candidates)[i];
        std::string supp, wit;
        for (size_t k = 0; k < c.support.size(); ++k)
            supp += (k ? ";" : "") + std::to_string(c.support[k]);
        for (Eigen::Index k = 0; k < c.witness.size(); ++k)
            wit += (k ? ";" : "") + fmt(c.witness[k]);
        std::vector<std::string> row{std::to_string(i), fmt(c.norm), supp, wit};
        for (const auto& f : vector_fields(c.coords)) row.push_back(f);
        crows.push_back(std::move(row));
    }
    write_columnar(artifact(st.setup, "candidates.txt"), chdr, crows);
    return {"weights.txt", "candidates.txt"};
}

inline std::vector<std::string> run_survey(RunState& st) {
    const auto& cfg = st.setup.cfg;
    long n_complex = cfg.get_int("survey.complex_seeds", 1000);
    long n_real = cfg.get_int("survey.real_seeds", 0);
    std::vector<double> eps = cfg.get_double_list("survey.eps_sweep");
    if (eps.empty()) eps = {1e-2, 1e-3};
    SurveyReport rep = basin_survey(st.G, st.setup.space, *st.candidates, n_complex, n_real,
                                    st.setup.rng_seed, st.setup.flow, eps);
    st.survey = rep;

    std::vector<std::vector<std::string>> counts;
    long total = static_cast<long>(rep.entries.size());
    for (const auto& lc : rep.counts)
        counts.push_back({std::to_string(lc.label), std::to_string(lc.count),
                          fmt(lc.mean_steps),
                          fmt(total ? 100.0 * static_cast<double>(lc.count) / total : 0.0)});
    write_columnar(artifact(st.setup, "survey.txt"),
                   {"label", "count", "mean_steps", "percent"}, counts);

    std::vector<std::string> lhdr{"index",  "real_seed", "label",     "match_distance",
                                  "eta",    "mu_norm",   "steps",     "converged"};
    for (int j = 0; j < st.G.n(); ++j) {
        lhdr.push_back("re" + std::to_string(j));
        lhdr.push_back("im" + std::to_string(j));
    }
    std::vector<std::vector<std::string>> lrows;
    for (size_t i = 0; i < rep.entries.size(); ++i) {
        const auto& e = rep.entries[i];
        std::vector<std::string> row{std::to_string(i),
                                     e.real_seed ? "1" : "0",
                                     std::to_string(e.label),
                                     fmt(e.match_distance),
                                     fmt(e.eta_terminal),
                                     fmt(e.terminal_mu_norm),
                                     std::to_string(e.steps),
                                     e.converged ? "1" : "0"};
        for (const auto& f : point_fields(e.seed)) row.push_back(f);
        lrows.push_back(std::move(row));
    }
    write_columnar(artifact(st.setup, "labels.txt"), lhdr, lrows);

    std::vector<std::vector<std::string>> arows;
    for (const auto& a : rep.audit)
        arows.push_back({std::to_string(a.entry_index), std::to_string(a.label),
                         std::to_string(a.adjacent_label), a.violation ? "1" : "0"});
    write_columnar(artifact(st.setup, "audit.txt"),
                   {"entry", "label", "adjacent_label", "violation"}, arows);

    std::vector<std::string> files{"survey.txt", "labels.txt", "audit.txt"};

    long trace_count = cfg.get_int("survey.trace_count", 3);
    trace_count = std::min<long>(trace_count, n_complex);
    for (long i = 0; i < trace_count; ++i) {
        auto rng = stream(st.setup.rng_seed, "survey-complex", static_cast<std::uint64_t>(i));
        VecC z = st.setup.space == Space::RealProjective ? random_unit_real(rng, st.G.n())
                                                         : random_unit_complex(rng, st.G.n());
        FlowTrace tr = flow_to_limit(st.G, make_point(z), st.setup.space, st.setup.flow);
        std::vector<std::string> thdr{"t", "eta", "grad_norm"};
        for (int j = 0; j < st.G.n(); ++j) {
            thdr.push_back("re" + std::to_string(j));
            thdr.push_back("im" + std::to_string(j));
        }
        std::vector<std::vector<std::string>> trows;
        for (const auto& sm : tr.samples) {
            std::vector<std::string> row{fmt(sm.t), fmt(sm.eta), fmt(sm.grad_norm)};
            for (const auto& f : point_fields(sm.point)) row.push_back(f);
            trows.push_back(std::move(row));
        }
        std::string name = "trace_" + std::to_string(i) + ".txt";
        write_columnar(artifact(st.setup, name), thdr, trows);
        files.push_back(name);
    }
    return files;
}

inline std::vector<std::string> run_stratify(RunState& st) {
    const auto& cfg = st.setup.cfg;
    const auto& cands = *st.candidates;
    const auto& survey = *st.survey;
    long samples = cfg.get_int("stratify.samples", 6);
    int group_moves = static_cast<int>(cfg.get_int("stratify.group_moves", 100));

    // realized labels and one converged terminal per label
    std::vector<int> realized;
    std::vector<ProjPoint> terminal_of(cands.size());
    std::vector<bool> have_terminal(cands.size(), false);
    for (const auto& lc : survey.counts)
        if (lc.label >= 0 && lc.count > 0) realized.push_back(lc.label);
    std::vector<std::vector<ProjPoint>> terminals(cands.size());
    for (const auto& e : survey.entries) {
        if (e.label < 0 || !e.converged) continue;
        auto lbl = static_cast<size_t>(e.label);
        if (terminals[lbl].size() < static_cast<size_t>(samples)) {
            FlowTrace tr = flow_to_limit(st.G, e.seed, st.setup.space, st.setup.flow);
            terminals[lbl].push_back(tr.terminal);
            if (!have_terminal[lbl]) {
                terminal_of[lbl] = tr.terminal;
                have_terminal[lbl] = true;
            }
        }
    }

    std::vector<std::string> hdr{"sample", "kind", "beta_id", "verdict", "mass_residual",
                                 "semistable", "shifted_eta", "eta_at_witness", "floor",
                                 "flow_refuted"};
    for (int i = 0; i < st.G.n(); ++i)
        for (int j = 0; j < st.G.n(); ++j) {
            hdr.push_back("kre" + std::to_string(i) + std::to_string(j));
            hdr.push_back("kim" + std::to_string(i) + std::to_string(j));
        }
    std::vector<std::vector<std::string>> rows;
    int sample_id = 0;
    auto add_row = [&](const std::string& kind, int beta_id, const MembershipResult& m,
                       bool flow_refuted) {
        std::vector<std::string> row{std::to_string(sample_id++),
                                     kind,
                                     std::to_string(beta_id),
                                     m.verdict == Membership::Member ? "member" : "not-found",
                                     fmt(m.mass_residual),
                                     to_string(m.semistable.verdict),
                                     fmt(m.semistable.shifted_eta),
                                     m.verdict == Membership::Member
                                         ? fmt(eta_value(st.G, m.transported))
                                         : fmt(0.0),
                                     fmt(0.5 * cands[static_cast<size_t>(beta_id)].norm *
                                         cands[static_cast<size_t>(beta_id)].norm),
                                     flow_refuted ? "1" : "0"};
        const MatC& k = m.witness_k;
        for (Eigen::Index i = 0; i < k.rows(); ++i)
            for (Eigen::Index j = 0; j < k.cols(); ++j) {
                row.push_back(fmt(k.size() ? k(i, j).real() : 0.0));
                row.push_back(fmt(k.size() ? k(i, j).imag() : 0.0));
            }
        rows.push_back(std::move(row));
    };

    for (int lbl : realized) {
        if (cands[static_cast<size_t>(lbl)].norm < 1e-12) continue; // beta = 0: ordinary semistability
        if (!have_terminal[static_cast<size_t>(lbl)]) continue;
        const ProjPoint& x0 = terminal_of[static_cast<size_t>(lbl)];
        for (long i = 0; i < samples; ++i) {
            auto rng = stream(st.setup.rng_seed, "stratify-orbit", static_cast<std::uint64_t>(i));
            VecR kc = st.G.dim_k() ? random_gaussian(rng, st.G.dim_k(), 0.7) : VecR(0);
            VecR pc = st.G.dim_p() ? random_gaussian(rng, st.G.dim_p(), 0.7) : VecR(0);
            ProjPoint z = act(group_element(st.G, kc, pc), x0);
            MembershipResult m = prestratum_membership(st.G, cands[static_cast<size_t>(lbl)], z,
                                                       st.setup.space, st.setup.flow);
            add_row("orbit", lbl, m, false);
        }
        // cross-check: points the flow labeled elsewhere must not be members
        int crosses = 0;
        for (const auto& e : survey.entries) {
            if (crosses >= 2) break;
            if (e.label < 0 || e.label == lbl || !e.converged) continue;
            MembershipResult m = prestratum_membership(st.G, cands[static_cast<size_t>(lbl)],
                                                       e.seed, st.setup.space, st.setup.flow);
            add_row("cross", lbl, m, m.verdict == Membership::NotFound);
            ++crosses;
        }
    }
    write_columnar(artifact(st.setup, "stratify.txt"), hdr, rows);

    // maximal realized stratum
    std::vector<std::vector<std::string>> mrows;
    int max_lbl = -1;
    for (int lbl : realized)
        if (cands[static_cast<size_t>(lbl)].norm > 1e-12 &&
            (max_lbl < 0 || cands[static_cast<size_t>(lbl)].norm > cands[static_cast<size_t>(max_lbl)].norm))
            max_lbl = lbl;
    if (max_lbl >= 0 && !terminals[static_cast<size_t>(max_lbl)].empty()) {
        MaxStratumReport rep = verify_maximal_stratum(
            st.G, cands[static_cast<size_t>(max_lbl)], terminals[static_cast<size_t>(max_lbl)],
            st.setup.space, group_moves, st.setup.rng_seed);
        double wolf = wolf_uniqueness_check(st.G, terminals[static_cast<size_t>(max_lbl)]);
        mrows.push_back({"beta_id", std::to_string(max_lbl)});
        mrows.push_back({"samples", std::to_string(rep.samples.size())});
        mrows.push_back({"max_norm_deviation", fmt(rep.max_norm_deviation)});
        mrows.push_back({"all_witnessed", rep.all_witnessed ? "1" : "0"});
        mrows.push_back({"max_limit_fix_distance", fmt(rep.max_limit_fix_distance)});
        mrows.push_back({"wolf_max_reach_distance", fmt(wolf)});
        mrows.push_back({"ok", rep.ok ? "1" : "0"});
    }
    write_columnar(artifact(st.setup, "maximal.txt"), {"key", "value"}, mrows);
    return {"stratify.txt", "maximal.txt"};
}

inline std::vector<std::string> run_morse(RunState& st) {
    const auto& cfg = st.setup.cfg;
    int N = static_cast<int>(cfg.get_int("morse.truncation", 32));
    std::string total_expr = cfg.get("morse.total");
    if (total_expr.empty()) throw config_error("morse experiment requires morse.total");
    PoincareSeries total = parse_series(total_expr, N, "total");
    total.field = cfg.get("morse.field", "Q");

    std::vector<std::pair<int, PoincareSeries>> terms;
    for (const auto& [key, value] : cfg.values()) {
        if (key.rfind("morse.stratum_", 0) != 0) continue;
        auto comma = value.find(',');
        if (comma == std::string::npos)
            throw config_error("morse key '" + key + "' must be 'codim, series-expr'");
        int m = 0;
        try {
            m = std::stoi(value.substr(0, comma));
        } catch (...) {
            throw config_error("morse key '" + key + "': bad codimension");
        }
        PoincareSeries s = parse_series(value.substr(comma + 1), N, key.substr(6));
        s.field = total.field;
        terms.emplace_back(m, std::move(s));
    }
    if (terms.empty()) throw config_error("morse experiment requires morse.stratum_* terms");

    MorseCheck chk = check_inequalities(terms, total);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"verdict", chk.pass ? "PASS" : "FAIL"});
    rows.push_back({"field", total.field});
    rows.push_back({"truncation", std::to_string(N)});
    rows.push_back({"exact_division", chk.exact_division ? "1" : "0"});
    rows.push_back({"nonnegative", chk.nonnegative ? "1" : "0"});
    rows.push_back({"offending_degree", std::to_string(chk.offending_degree)});
    auto join = [](const std::vector<long long>& c) {
        std::string s;
        for (size_t i = 0; i < c.size(); ++i) s += (i ? ";" : "") + std::to_string(c[i]);
        return s;
    };
    rows.push_back({"D", join(chk.difference.coeffs)});
    rows.push_back({"R", join(chk.remainder.coeffs)});
    write_columnar(artifact(st.setup, "morse.txt"), {"key", "value"}, rows);
    return {"morse.txt"};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

/// Executes the configured experiments in dependency order, writes one data
/// file set per experiment plus the manifest. Any experiment error halts its
/// dependents, completes independent experiments and is recorded in the
/// manifest. Reruns with identical configuration are byte-identical.
inline RunResult run(const RunSetup& setup) {
    std::filesystem::create_directories(setup.out_dir);
    Group G(setup.spec);
    detail::RunState st{setup, G, {}, {}, {}};

    // canonical order is a topological order of the dependency DAG
    std::vector<std::string> order;
    for (const auto& e : detail::known_experiments())
        if (std::find(setup.experiments.begin(), setup.experiments.end(), e) !=
            setup.experiments.end())
            order.push_back(e);

    RunResult result;
    std::map<std::string, bool> ok;
    for (const auto& e : order) {
        ExperimentRecord rec;
        rec.name = e;
        bool deps_ok = true;
        for (const auto& d : detail::deps_of(e))
            if (!ok.count(d) || !ok[d]) deps_ok = false;
        if (!deps_ok) {
            rec.status = "skipped";
            rec.error = "dependency failed";
            ok[e] = false;
            result.records.push_back(rec);
            result.any_failed = true;
            continue;
        }
        auto t0 = std::chrono::steady_clock::now();
        try {
            if (e == "validate") rec.artifacts = detail::run_validate(st);
            else if (e == "candidates") rec.artifacts = detail::run_candidates(st);
            else if (e == "survey") rec.artifacts = detail::run_survey(st);
            else if (e == "stratify") rec.artifacts = detail::run_stratify(st);
            else if (e == "morse") rec.artifacts = detail::run_morse(st);
            rec.status = "ok";
            ok[e] = true;
        } catch (const std::exception& ex) {
            rec.status = "failed";
            rec.error = ex.what();
            ok[e] = false;
            result.any_failed = true;
        }
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.records.push_back(rec);
    }

    result.manifest_path = detail::artifact(setup, "manifest.txt");
    write_file(result.manifest_path, detail::manifest_text(setup, result.records));
    return result;
}

// ---------------------------------------------------------------------------
// Reports: human-readable summary plus columnar plot data, derived from the
// manifest. No plotting library involved; data only.
// ---------------------------------------------------------------------------

struct ReportResult {
    std::string summary_path;
    std::vector<std::string> plot_files;
    std::vector<std::string> missing;
};

inline ReportResult report(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::string text = read_file(manifest_path);
    fs::path dir = fs::path(manifest_path).parent_path();

    ReportResult out;
    std::string summary = "# gradstrat report\n";
    std::istringstream is(text);
    std::string line;
    bool in_experiments = false;
    struct Exp {
        std::string name, status;
        std::vector<std::string> artifacts;
    };
    std::vector<Exp> exps;
    while (std::getline(is, line)) {
        if (line == "[experiments]") { in_experiments = true; continue; }
        if (!in_experiments || line.empty()) {
            if (line.rfind("config_hash", 0) == 0) summary += line + "\n";
            continue;
        }
        Exp e;
        std::istringstream ls(line);
        ls >> e.name;
        std::string tok;
        while (ls >> tok) {
            if (tok.rfind("status=", 0) == 0) e.status = tok.substr(7);
            if (tok.rfind("artifacts=", 0) == 0) {
                std::string lst = tok.substr(10);
                std::string cur;
                for (char c : lst) {
                    if (c == ',') { e.artifacts.push_back(cur); cur.clear(); }
                    else cur += c;
                }
                if (!cur.empty()) e.artifacts.push_back(cur);
            }
        }
        if (!e.name.empty()) exps.push_back(e);
    }

    auto load_rows = [&](const std::string& name,
                         std::vector<std::string>& header) -> std::vector<std::vector<std::string>> {
        std::vector<std::vector<std::string>> rows;
        fs::path p = dir / name;
        if (!fs::exists(p)) {
            out.missing.push_back(name);
            return rows;
        }
        std::ifstream f(p);
        std::string l;
        bool first = true;
        while (std::getline(f, l)) {
            std::vector<std::string> cells;
            std::string cur;
            for (char c : l) {
                if (c == '\t') { cells.push_back(cur); cur.clear(); }
                else cur += c;
            }
            cells.push_back(cur);
            if (first) { header = cells; first = false; }
            else rows.push_back(cells);
        }
        return rows;
    };

    for (const auto& e : exps) {
        summary += "\n## " + e.name + " (" + e.status + ")\n";
        if (e.status != "ok") continue;
        std::vector<std::string> hdr;
        if (e.name == "candidates") {
            auto rows = load_rows("candidates.txt", hdr);
            summary += "candidates (sorted by norm ascending):\n";
            std::vector<std::vector<std::string>> plot;
            for (const auto& r : rows) {
                if (r.size() >= 2) {
                    summary += "  beta_" + r[0] + "  |beta| = " + r[1] + "\n";
                    plot.push_back({r[0], r[1]});
                }
            }
            std::string pf = (dir / "plot_candidate_norms.txt").string();
            write_columnar(pf, {"index", "norm"}, plot);
            out.plot_files.push_back(pf);
        } else if (e.name == "survey") {
            auto rows = load_rows("survey.txt", hdr);
            double pct = 0.0;
            std::vector<std::vector<std::string>> plot;
            for (const auto& r : rows)
                if (r.size() >= 4) {
                    summary += "  label " + r[0] + ": count " + r[1] + " (" + r[3] + "%)\n";
                    pct += std::stod(r[3]);
                    plot.push_back({r[0], r[1], r[3]});
                }
            summary += "  percentages sum to " + fmt(pct) + "\n";
            std::string pf = (dir / "plot_survey_counts.txt").string();
            write_columnar(pf, {"label", "count", "percent"}, plot);
            out.plot_files.push_back(pf);
            for (const auto& a : e.artifacts) {
                if (a.rfind("trace_", 0) != 0) continue;
                std::vector<std::string> th;
                auto trows = load_rows(a, th);
                std::vector<std::vector<std::string>> tplot;
                for (const auto& r : trows)
                    if (r.size() >= 2) tplot.push_back({r[0], r[1]});
                std::string pf2 = (dir / ("plot_eta_" + a)).string();
                write_columnar(pf2, {"t", "eta"}, tplot);
                out.plot_files.push_back(pf2);
            }
        } else if (e.name == "morse") {
            auto rows = load_rows("morse.txt", hdr);
            for (const auto& r : rows)
                if (r.size() >= 2 &&
                    (r[0] == "verdict" || r[0] == "R" || r[0] == "field" || r[0] == "offending_degree"))
                    summary += "  " + r[0] + " = " + r[1] + "\n";
        } else {
            for (const auto& a : e.artifacts) {
                std::vector<std::string> h;
                auto rows = load_rows(a, h);
                summary += "  " + a + ": " + std::to_string(rows.size()) + " rows\n";
            }
        }
    }
    if (!out.missing.empty()) {
        summary += "\n## missing artifacts\n";
        for (const auto& m : out.missing) summary += "  " + m + "\n";
    }
    out.summary_path = (dir / "summary.txt").string();
    write_file(out.summary_path, summary);
    return out;
}

} // namespace gradstrat
