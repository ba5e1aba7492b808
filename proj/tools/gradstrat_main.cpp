// Batch front end: config ingestion, experiment orchestration and report
// emission. See README.md for the config format.

#include <CLI11.hpp>
#include <iostream>

#include <gradstrat/runner.hpp>

namespace {

using namespace gradstrat;

struct CommonFlags {
    std::string config_path;
    std::string out;
    long long rng_seed = -1;
    long long budget = -1;
    double tol = -1.0;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config_path, "configuration file");
    app->add_option("--out", f.out, "output directory (overrides run.out)");
    app->add_option("--rng-seed", f.rng_seed, "root RNG seed (overrides run.rng_seed)");
    app->add_option("--budget", f.budget, "flow step budget (overrides flow.max_steps)");
    app->add_option("--tol", f.tol, "criticality tolerance (overrides flow.tol_crit_rel)");
}

Config load_config(const CommonFlags& f) {
    Config cfg;
    if (!f.config_path.empty()) cfg = Config::parse(read_file(f.config_path));
    Config overrides;
    if (!f.out.empty()) overrides.set("run.out", f.out);
    if (f.rng_seed >= 0) overrides.set("run.rng_seed", std::to_string(f.rng_seed));
    if (f.budget >= 0) overrides.set("flow.max_steps", std::to_string(f.budget));
    if (f.tol > 0) overrides.set("flow.tol_crit_rel", fmt(f.tol));
    cfg.merge_over(overrides);
    return cfg;
}

std::string closure_of(const std::string& verb) {
    if (verb == "survey") return "candidates, survey";
    if (verb == "stratify") return "candidates, survey, stratify";
    return verb;
}

int execute(const CommonFlags& flags, const std::string& verb) {
    Config cfg;
    try {
        cfg = load_config(flags);
        if (!verb.empty()) cfg.set("run.experiments", closure_of(verb));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    RunSetup setup;
    try {
        setup = make_setup(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    RunResult res = run(setup);
    for (const auto& r : res.records) {
        std::cout << r.name << ": " << r.status << "  (" << fmt(r.wall_time_s) << " s)";
        if (!r.error.empty()) std::cout << "  " << r.error;
        std::cout << "\n";
    }
    std::cout << "manifest: " << res.manifest_path << "\n";
    return res.any_failed ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient-map stratification toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string verb;
    for (const char* name : {"run", "validate", "candidates", "survey", "stratify", "morse"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment(s)");
        add_common(sub, flags);
        sub->callback([name, &verb] { verb = name; });
    }
    std::string manifest_path;
    auto* rep = app.add_subcommand("report", "summarize a run manifest and emit plot data");
    rep->add_option("manifest", manifest_path, "path to manifest.txt")->required();
    rep->callback([&verb] { verb = "report"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (verb == "report") {
        try {
            ReportResult r = gradstrat::report(manifest_path);
            std::cout << "summary: " << r.summary_path << "\n";
            for (const auto& p : r.plot_files) std::cout << "plot: " << p << "\n";
            for (const auto& m : r.missing) std::cout << "missing: " << m << "\n";
            return 0;
        } catch (const std::exception& e) {
            std::cerr << "report error: " << e.what() << "\n";
            return 1;
        }
    }
    return execute(flags, verb == "run" ? std::string() : verb);
}
