// =============================================================================
// Orchestration tests.  Config grammar hand cases (sections prefix keys, '#'
// strips to end of line, 2^k integer tokens, doubling ranges 2^a..2^b), the
// schema rejection of unknown keys, and small end-to-end experiment runs:
//
//   orbit-dump N=64, interval, kpp=1: the orbit is the 18 primes up to 64,
//     so the csv has 18 data rows and both agreement checks are exact;
//   gauss-decay: "C_fit <= 5" is a documented upper bound, so it scales with
//     the tolerance multiplier and tolerance 0 is the negative control;
//   variation-study: same config + same seed => byte-identical artifact,
//     config seed wins over the option seed.
// =============================================================================

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rvl/harness.hpp"
#include "rvl/util.hpp"

using namespace rvl;

// -----------------------------------------------------------------------------
// helpers
// -----------------------------------------------------------------------------
static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class Fn>
static bool throws_containing(Fn&& fn, const std::string& needle) {
    try {
        fn();
    } catch (const std::runtime_error& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

static Config cfg_of(const std::string& text) { return parse_config(text, "unit"); }

// out_dirs under the system temp root so test runs never litter the tree
static std::string scratch(const std::string& name) {
    namespace fs = std::filesystem;
    return (fs::temp_directory_path() / ("rvl_harness_" + name)).string();
}

// -----------------------------------------------------------------------------
// config grammar
// -----------------------------------------------------------------------------
TEST_CASE("config parsing: sections, comments, typed getters") {
    Config cfg = parse_config(
        "# leading comment\n"
        "experiment = gauss-decay\n"
        "seed = 9\n"
        "\n"
        "[gauss]\n"
        "qmax = 7     # trailing comment\n"
        "scale = 2^10\n"
        "ns = 2^6..2^9\n"
        "mix = 3,2^2..2^3,10\n"
        "xs = 0.5,1.5\n"
        "label = plain string\n",
        "unit");

    CHECK(cfg.origin == "unit");
    CHECK(cfg.has("gauss.qmax"));
    CHECK(!cfg.has("qmax"));  // section prefix is part of the key
    CHECK(cfg.get("experiment") == "gauss-decay");
    CHECK(cfg.get_int("seed") == 9);
    CHECK(cfg.get_int("gauss.qmax") == 7);
    CHECK(cfg.get_int("gauss.scale") == 1024);
    CHECK(cfg.get("gauss.label") == "plain string");
    CHECK(cfg.get_or("gauss.missing", "dflt") == "dflt");
    CHECK(cfg.get_int_or("gauss.missing", 42) == 42);
    CHECK(cfg.get_real_or("gauss.missing", 0.25) == 0.25);

    std::vector<i64> ns = cfg.get_int_list("gauss.ns");
    REQUIRE(ns.size() == 4);
    CHECK(ns[0] == 64);
    CHECK(ns[1] == 128);
    CHECK(ns[2] == 256);
    CHECK(ns[3] == 512);

    std::vector<i64> mix = cfg.get_int_list("gauss.mix");
    REQUIRE(mix.size() == 4);
    CHECK(mix[0] == 3);
    CHECK(mix[1] == 4);
    CHECK(mix[2] == 8);
    CHECK(mix[3] == 10);

    std::vector<double> xs = cfg.get_real_list_or("gauss.xs", {});
    REQUIRE(xs.size() == 2);
    CHECK(xs[0] == 0.5);
    CHECK(xs[1] == 1.5);

    // missing key names the origin
    CHECK(throws_containing([&] { cfg.get("nope"); }, "unit"));
    CHECK(throws_containing([&] { cfg.get("nope"); }, "missing key"));

    // malformed inputs fail with the line identified
    CHECK_THROWS_AS(parse_config("just a line\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config("[open\nx = 1\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config("bad key = 1\n"), std::runtime_error);
    CHECK(throws_containing([] { parse_config("x = 1\nx = 2\n"); }, "duplicate"));

    // integer token grammar: only 2^k, k <= 62
    CHECK_THROWS_AS(cfg_of("v = 3^2\n").get_int("v"), std::runtime_error);
    CHECK_THROWS_AS(cfg_of("v = 2^63\n").get_int("v"), std::runtime_error);
    CHECK_THROWS_AS(cfg_of("v = seven\n").get_int("v"), std::runtime_error);
    CHECK_THROWS_AS(cfg_of("v = 3..12\n").get_int_list("v"), std::runtime_error);
    CHECK(cfg_of("v = -3\n").get_int("v") == -3);
}

TEST_CASE("config loading from a file keeps the path as origin") {
    namespace fs = std::filesystem;
    fs::path dir = scratch("cfg");
    fs::create_directories(dir);
    fs::path path = dir / "a.cfg";
    {
        std::ofstream out(path);
        out << "experiment = orbit-dump\n[orbit]\nN = 2^5\n";
    }
    Config cfg = load_config(path.string());
    CHECK(cfg.origin == path.string());
    CHECK(cfg.get("experiment") == "orbit-dump");
    CHECK(cfg.get_int("orbit.N") == 32);

    CHECK(throws_containing([&] { load_config((dir / "nope.cfg").string()); }, "cannot open"));
}

// -----------------------------------------------------------------------------
// dispatch and schemas
// -----------------------------------------------------------------------------
TEST_CASE("experiment ids: fixed roster, unknown ids are listed back") {
    std::vector<std::string> ids = experiment_ids();
    REQUIRE(ids.size() == 8);
    CHECK(ids[0] == "gauss-decay");
    CHECK(ids[1] == "theta-asymptotic");
    CHECK(ids[2] == "multiplier-sweep");
    CHECK(ids[3] == "variation-study");
    CHECK(ids[4] == "weyl-scan");
    CHECK(ids[5] == "iw-build");
    CHECK(ids[6] == "telescoping");
    CHECK(ids[7] == "orbit-dump");

    RunOptions opt;
    opt.out_dir = scratch("misc");
    CHECK(throws_containing([&] { run_experiment(cfg_of("experiment = nope\n"), opt); },
                            "unknown experiment id"));
    CHECK(throws_containing([&] { run_experiment(cfg_of("experiment = nope\n"), opt); },
                            "orbit-dump"));  // the roster is echoed back
    CHECK(throws_containing([&] { run_experiment(cfg_of("x = 1\n"), opt); }, "missing key"));
}

TEST_CASE("unknown config keys are rejected with the key named") {
    RunOptions opt;
    opt.out_dir = scratch("misc");
    Config cfg = cfg_of(
        "experiment = gauss-decay\n"
        "seed = 3\n"  // experiment and seed are always allowed
        "[gauss]\n"
        "qmax = 30\n"
        "qmin = 2\n");
    CHECK(throws_containing([&] { run_experiment(cfg, opt); }, "unknown key 'gauss.qmin'"));
    CHECK(throws_containing([&] { run_experiment(cfg, opt); }, "gauss-decay"));
}

TEST_CASE("experiment parameter validation fails fast") {
    RunOptions opt;
    opt.out_dir = scratch("misc");
    auto run = [&](const std::string& text) { run_experiment(cfg_of(text), opt); };

    CHECK(throws_containing([&] { run("experiment = variation-study\n[var]\nlength = 40\n"); },
                            "2^s + 1"));
    CHECK_THROWS_AS(run("experiment = variation-study\n[var]\nr = 1.5\n"), std::runtime_error);
    CHECK_THROWS_AS(run("experiment = variation-study\n[var]\ncount = 0\n"), std::runtime_error);
    CHECK_THROWS_AS(run("experiment = theta-asymptotic\n[theta]\nnpow_min = 3\n"),
                    std::runtime_error);
    CHECK_THROWS_AS(run("experiment = telescoping\n[tele]\nN1 = 10\nN2 = 10\n"),
                    std::runtime_error);
    // body dimension must match kprime + kpp
    CHECK_THROWS_AS(run("experiment = orbit-dump\n[orbit]\nbody = cube2\n"), std::runtime_error);
}

// -----------------------------------------------------------------------------
// small end-to-end runs
// -----------------------------------------------------------------------------
TEST_CASE("orbit dump: exact agreement checks and the prime orbit csv") {
    RunOptions opt;
    opt.out_dir = scratch("orbit");
    RunReport rep = run_experiment(cfg_of("experiment = orbit-dump\n[orbit]\nN = 64\n"), opt);

    CHECK(rep.experiment == "orbit-dump");
    CHECK(rep.ok());
    REQUIRE(rep.checks.size() == 2);
    CHECK(rep.checks[0].name == "vartheta bit-identical to counting");
    CHECK(rep.checks[0].value == 0.0);  // same association both ways
    CHECK(rep.checks[1].name == "point count matches");
    CHECK(rep.checks[1].value == 18.0);  // pi(64) = 18

    REQUIRE(rep.artifacts.size() == 1);
    std::string csv = slurp(rep.artifacts[0]);
    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "x1,weight,q1,q2");
    int rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 18);
}

TEST_CASE("gauss decay: documented bounds pass, tolerance zero is the negative control") {
    Config cfg = cfg_of("experiment = gauss-decay\n[gauss]\nqmax = 100\n");

    RunOptions opt;
    opt.out_dir = scratch("gauss");
    RunReport rep = run_experiment(cfg, opt);
    REQUIRE(rep.checks.size() == 2);
    CHECK(rep.checks[0].name == "delta_fit >= 0.2");
    CHECK(rep.checks[1].name == "C(0.2) <= 5");
    CHECK(rep.ok());
    CHECK(rep.checks[0].value >= 0.2);
    REQUIRE(rep.artifacts.size() == 1);
    std::string csv = slurp(rep.artifacts[0]);
    CHECK(csv.rfind("q,max_abs,argmax_a1,argmax_a2\n", 0) == 0);

    // tolerance 0 collapses every scaled bound; the envelope constant is
    // >= 1 (the q = 2 unit group is a single point with |G| = 1), so the
    // check flips
    RunOptions zero = opt;
    zero.tolerance = 0.0;
    RunReport neg = run_experiment(cfg, zero);
    CHECK(!neg.ok());
    CHECK(neg.checks[1].pass == false);
    CHECK(neg.checks[1].bound == 0.0);
    CHECK(neg.checks[1].value >= 1.0);
}

TEST_CASE("variation study: byte-identical reruns, config seed beats option seed") {
    std::string base =
        "experiment = variation-study\n"
        "[var]\n"
        "count = 12\n"
        "length = 33\n"
        "r = 2.5\n";

    RunOptions a1;
    a1.seed = 7;
    a1.out_dir = scratch("var_a1");
    RunOptions a2 = a1;
    a2.out_dir = scratch("var_a2");
    RunReport r1 = run_experiment(cfg_of(base), a1);
    RunReport r2 = run_experiment(cfg_of(base), a2);
    CHECK(r1.ok());
    REQUIRE(r1.checks.size() == 3);
    CHECK(r1.checks[0].name == "dyadic bound violations = 0");
    CHECK(r1.seed == 7);
    REQUIRE(r1.artifacts.size() == 1);
    REQUIRE(r2.artifacts.size() == 1);
    CHECK(slurp(r1.artifacts[0]) == slurp(r2.artifacts[0]));  // determinism contract

    RunOptions b = a1;
    b.seed = 8;
    b.out_dir = scratch("var_b");
    RunReport r3 = run_experiment(cfg_of(base), b);
    CHECK(slurp(r1.artifacts[0]) != slurp(r3.artifacts[0]));

    // a seed in the config pins the run regardless of the option seed
    std::string pinned = "seed = 42\n" + base;
    RunOptions c1 = a1;
    c1.seed = 1;
    c1.out_dir = scratch("var_c1");
    RunOptions c2 = a1;
    c2.seed = 2;
    c2.out_dir = scratch("var_c2");
    RunReport r4 = run_experiment(cfg_of(pinned), c1);
    RunReport r5 = run_experiment(cfg_of(pinned), c2);
    CHECK(r4.seed == 42);
    CHECK(r5.seed == 42);
    CHECK(slurp(r4.artifacts[0]) == slurp(r5.artifacts[0]));
}

// -----------------------------------------------------------------------------
// report rendering
// -----------------------------------------------------------------------------
TEST_CASE("reports: fixed-width text and json serialization") {
    RunOptions opt;
    opt.out_dir = scratch("rep");
    Config cfg = cfg_of("experiment = orbit-dump\nseed = 5\n[orbit]\nN = 32\n");
    RunReport rep = run_experiment(cfg, opt);

    std::string text = render_report(rep);
    CHECK(text.find("experiment orbit-dump") != std::string::npos);
    CHECK(text.find("seed 5") != std::string::npos);
    CHECK(text.find("[OK  ]") != std::string::npos);
    CHECK(text.find("[FAIL]") == std::string::npos);
    CHECK(text.find("vartheta bit-identical to counting") != std::string::npos);
    CHECK(text.find("artifacts:") != std::string::npos);
    CHECK(text.find(rep.artifacts[0]) != std::string::npos);

    // a failing check renders as [FAIL]
    RunOptions zero = opt;
    zero.tolerance = 0.0;
    zero.out_dir = scratch("rep_neg");
    RunReport neg =
        run_experiment(cfg_of("experiment = gauss-decay\n[gauss]\nqmax = 30\n"), zero);
    std::string negtext = render_report(neg);
    CHECK(negtext.find("[FAIL]") != std::string::npos);

    std::string jpath = scratch("rep") + "/report.json";
    write_report_json(rep, jpath);
    nlohmann::json j = nlohmann::json::parse(slurp(jpath));
    CHECK(j["experiment"].get<std::string>() == "orbit-dump");
    CHECK(j["seed"].get<std::uint64_t>() == 5);
    CHECK(j["ok"].get<bool>() == rep.ok());
    CHECK(j["seconds"].get<double>() >= 0.0);
    REQUIRE(j["checks"].is_array());
    REQUIRE(j["checks"].size() == rep.checks.size());
    CHECK(j["checks"][0]["name"].get<std::string>() == rep.checks[0].name);
    CHECK(j["checks"][0]["pass"].get<bool>() == rep.checks[0].pass);
    CHECK(j["checks"][0]["value"].get<double>() == rep.checks[0].value);
    REQUIRE(j["artifacts"].is_array());
    CHECK(j["artifacts"][0].get<std::string>() == rep.artifacts[0]);
}
