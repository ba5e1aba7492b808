#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include <gradstrat/runner.hpp>

using namespace gradstrat;
namespace fs = std::filesystem;

namespace {
fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("gradstrat_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string tiny_config(const fs::path& out, const std::string& experiments) {
    return "[run]\n"
           "group = sl2r\n"
           "space = complex\n"
           "rng_seed = 4242\n"
           "out = " + out.string() + "\n"
           "experiments = " + experiments + "\n"
           "[survey]\n"
           "complex_seeds = 12\n"
           "real_seeds = 6\n"
           "trace_count = 1\n"
           "[stratify]\n"
           "samples = 2\n"
           "group_moves = 10\n"
           "[morse]\n"
           "truncation = 32\n"
           "total = poly(1,0,1) * geom_even\n"
           "stratum_open = 0, 2 * geom_even\n"
           "stratum_circle = 1, poly(1)\n";
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        out[e.path().filename().string()] = read_file(e.path().string());
    return out;
}
} // namespace

TEST_CASE("config parsing") {
    Config c = Config::parse("# comment\n[run]\ngroup = sl2r   # trailing\n\n[flow]\nrtol = 1e-7\n");
    CHECK(c.get("run.group") == "sl2r");
    CHECK(c.get_double("flow.rtol", 0) == Catch::Approx(1e-7));
    CHECK(c.get("missing.key", "dflt") == "dflt");
    CHECK_THROWS_AS(Config::parse("[run\n"), config_error);
    CHECK_THROWS_AS(Config::parse("justtext\n"), config_error);
    CHECK_THROWS_AS(Config::parse("= novalue\n"), config_error);

    SECTION("lists") {
        Config l = Config::parse("[a]\nxs = 1, 2,3\n");
        CHECK(l.get_list("a.xs") == std::vector<std::string>{"1", "2", "3"});
        CHECK(l.get_double_list("a.xs") == std::vector<double>{1.0, 2.0, 3.0});
    }
    SECTION("flag overrides take precedence") {
        Config base = Config::parse("[run]\nrng_seed = 1\n");
        Config flags;
        flags.set("run.rng_seed", "2");
        base.merge_over(flags);
        CHECK(base.get_int("run.rng_seed", 0) == 2);
    }
}

TEST_CASE("setup validation") {
    auto parse_setup = [](const std::string& text) { return make_setup(Config::parse(text)); };
    CHECK_THROWS_AS(parse_setup("[run]\nexperiments = validate\n"), config_error);
    CHECK_THROWS_AS(parse_setup("[run]\ngroup = nosuch\n"), config_error);
    CHECK_THROWS_AS(parse_setup("[run]\ngroup = sl2r\nexperiments = survey\n"), config_error);
    CHECK_THROWS_AS(parse_setup("[run]\ngroup = sl2r\nexperiments = nope\n"), config_error);
    CHECK_THROWS_AS(parse_setup("[run]\ngroup = sl2r\nspace = weird\n"), config_error);
    CHECK_THROWS_AS(parse_setup("[run]\ngroup = sl2c\nspace = real\n"), config_error);
    CHECK_THROWS_AS(
        parse_setup("[run]\ngroup = sl2r\n[flow]\ntol_crit_rel = -1\n"), config_error);
    RunSetup ok = parse_setup("[run]\ngroup = sl2r\nexperiments = candidates, survey\n");
    CHECK(ok.spec.name == "sl2r");
}

TEST_CASE("empty experiment list yields a manifest with the config echo only") {
    fs::path dir = fresh_dir("empty");
    RunSetup setup = make_setup(Config::parse(tiny_config(dir, "")));
    RunResult res = run(setup);
    CHECK_FALSE(res.any_failed);
    std::string manifest = read_file(res.manifest_path);
    CHECK(manifest.find("config_hash") != std::string::npos);
    CHECK(manifest.find("run.group = sl2r") != std::string::npos);
    CHECK(manifest.find("status=") == std::string::npos);
    // no artifact files beside the manifest
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) { (void)e; ++files; }
    CHECK(files == 1);
}

TEST_CASE("end-to-end tiny run: manifest, completeness, determinism") {
    fs::path dir = fresh_dir("e2e");
    std::string cfg = tiny_config(dir, "validate, candidates, survey, stratify, morse");
    RunSetup setup = make_setup(Config::parse(cfg));
    RunResult res = run(setup);
    for (const auto& r : res.records) {
        INFO(r.name << " " << r.error);
        CHECK(r.status == "ok");
    }
    REQUIRE_FALSE(res.any_failed);

    SECTION("manifest references every produced file exactly once") {
        std::string manifest = read_file(res.manifest_path);
        std::set<std::string> referenced;
        for (const auto& r : res.records)
            for (const auto& a : r.artifacts) {
                CHECK(referenced.insert(a).second); // exactly once
                CHECK(fs::exists(dir / a));
            }
        std::set<std::string> present;
        for (const auto& e : fs::directory_iterator(dir))
            present.insert(e.path().filename().string());
        present.erase("manifest.txt");
        CHECK(present == referenced);
    }

    SECTION("byte-identical rerun") {
        auto first = dir_bytes(dir);
        RunResult res2 = run(setup);
        REQUIRE_FALSE(res2.any_failed);
        auto second = dir_bytes(dir);
        REQUIRE(first.size() == second.size());
        for (const auto& [name, bytes] : first) {
            INFO(name);
            CHECK(second.at(name) == bytes);
        }
    }

    SECTION("survey artifacts reflect the two strata") {
        std::string survey = read_file((dir / "survey.txt").string());
        CHECK(survey.find("label\tcount") != std::string::npos);
        std::ifstream is((dir / "labels.txt").string());
        std::string line;
        std::getline(is, line); // header
        while (std::getline(is, line)) {
            auto a = line.find('\t');
            auto b = line.find('\t', a + 1);
            auto c = line.find('\t', b + 1);
            CHECK(line.substr(b + 1, c - b - 1) != "-1"); // no unmatched seeds
        }
    }

    SECTION("morse artifact carries the PASS verdict and R = 1") {
        std::string morse = read_file((dir / "morse.txt").string());
        CHECK(morse.find("PASS") != std::string::npos);
        CHECK(morse.find("R\t1;0") != std::string::npos);
    }

    SECTION("report emits summary and plot data, listing missing artifacts") {
        ReportResult rep = report(res.manifest_path);
        CHECK(fs::exists(rep.summary_path));
        CHECK(rep.missing.empty());
        CHECK_FALSE(rep.plot_files.empty());
        std::string summary = read_file(rep.summary_path);
        CHECK(summary.find("survey") != std::string::npos);
        // eta trace plot data is monotone non-increasing
        for (const auto& p : rep.plot_files) {
            if (p.find("plot_eta_trace") == std::string::npos) continue;
            std::ifstream is(p);
            std::string line;
            std::getline(is, line); // header
            double prev = std::numeric_limits<double>::infinity();
            while (std::getline(is, line)) {
                auto tab = line.find('\t');
                double eta = std::stod(line.substr(tab + 1));
                CHECK(eta <= prev + 1e-9);
                prev = eta;
            }
        }

        fs::remove(dir / "survey.txt");
        ReportResult partial = report(res.manifest_path);
        CHECK(std::find(partial.missing.begin(), partial.missing.end(), "survey.txt") !=
              partial.missing.end());
        CHECK(fs::exists(partial.summary_path));
    }
}

TEST_CASE("experiment failure halts dependents and completes independents") {
    fs::path dir = fresh_dir("fail");
    std::string cfg = tiny_config(dir, "candidates, survey, morse");
    Config c = Config::parse(cfg);
    c.set("candidates.budget", "1"); // force a truncation error in candidates
    RunSetup setup = make_setup(c);
    RunResult res = run(setup);
    CHECK(res.any_failed);
    std::map<std::string, std::string> status;
    for (const auto& r : res.records) status[r.name] = r.status;
    CHECK(status["candidates"] == "failed");
    CHECK(status["survey"] == "skipped");
    CHECK(status["morse"] == "ok");
    std::string manifest = read_file(res.manifest_path);
    CHECK(manifest.find("error=") != std::string::npos);
}

TEST_CASE("group files load through the config") {
    fs::path dir = fresh_dir("gfile");
    fs::path gpath = dir / "group.json";
    write_file(gpath.string(), write_group_spec(make_sl_real(2)));
    Config c = Config::parse("[run]\ngroup_file = " + gpath.string() +
                             "\nout = " + (dir / "out").string() + "\nexperiments = validate\n");
    RunSetup setup = make_setup(c);
    RunResult res = run(setup);
    CHECK_FALSE(res.any_failed);
}

TEST_CASE("abelian preset surveys fold nothing: both signs are labels") {
    fs::path dir = fresh_dir("abelian");
    Config c = Config::parse("[run]\ngroup = sl2r_a\nout = " + dir.string() +
                             "\nexperiments = candidates, survey\nrng_seed = 7\n"
                             "[survey]\ncomplex_seeds = 10\nreal_seeds = 0\ntrace_count = 0\n");
    RunSetup setup = make_setup(c);
    RunResult res = run(setup);
    REQUIRE_FALSE(res.any_failed);
    std::string cands = read_file((dir / "candidates.txt").string());
    // three candidates: 0 and the two opposite weights (trivial Weyl group)
    int lines = 0;
    for (char ch : cands)
        if (ch == '\n') ++lines;
    CHECK(lines == 4); // header + 3 rows
}
