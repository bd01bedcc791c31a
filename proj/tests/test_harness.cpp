#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "gpsq/config.hpp"
#include "gpsq/experiment.hpp"
#include "gpsq/report.hpp"

using namespace gpsq;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;
using Catch::Matchers::WithinRel;

namespace {

const char* kMinimal = R"(
[gps]
c = 1.0
phi1 = 0.5
phi2 = 0.5

[class1]
lambda = 0.1
x_m = 1.0
alpha = 1.5

[class2]
lambda = 0.12
jobs = exponential
rate = 2.0

[levels]
list = 1, 10, 100

[run]
horizon = 50000
)";

std::string patched(const std::string& base, const std::string& from,
                    const std::string& to) {
    std::string s = base;
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
}

}  // namespace

TEST_CASE("minimal config and defaults") {
    auto ec = parse_config_text(kMinimal);
    CHECK(ec.gps.c == 1.0);
    CHECK(ec.gps.rate2() == 0.5);
    CHECK(ec.class1.is_compound_poisson());
    CHECK_THAT(ec.class2.mean_rate(), WithinRel(0.06, 1e-14));
    CHECK(ec.grid.size() == 3);
    CHECK(ec.grid[1] == 10.0);
    CHECK(ec.horizon == 50000.0);
    CHECK(ec.burn_in == 2500.0);  // 5% of the horizon
    CHECK(ec.replications == 1);
    CHECK(ec.seed == 1);
    CHECK(ec.batches == 32);
    CHECK(ec.engine.kind == EngineKind::Event);
    CHECK(ec.estimator == EstimatorChoice::TimeAverage);
    CHECK(ec.outputs.report.empty());
    CHECK(ec.tandem_eps == 0.0);
    CHECK(ec.tandem_samples == 10000);
}

TEST_CASE("ini structure errors carry line numbers") {
    CHECK_THROWS_MATCHES(parse_config_text("[gps\nc = 1\n"), ConfigError,
                         MessageMatches(ContainsSubstring("line 1") &&
                             ContainsSubstring("unterminated")));
    CHECK_THROWS_MATCHES(parse_config_text("c = 1\n"), ConfigError,
                         MessageMatches(ContainsSubstring("outside any [section]")));
    CHECK_THROWS_MATCHES(parse_config_text("[gps]\nc = 1\nc = 2\n"), ConfigError,
                         MessageMatches(ContainsSubstring("line 3") &&
                             ContainsSubstring("duplicate key 'gps.c'")));
    CHECK_THROWS_MATCHES(parse_config_text("[gps]\nc\n"), ConfigError,
                         MessageMatches(ContainsSubstring("expected key = value")));
    // comments and blank lines are fine
    CHECK_NOTHROW(parse_ini_text("# comment\n[gps]\nc = 1 ; trailing\n"));
}

TEST_CASE("field validation names the offending keys") {
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "phi2 = 0.5", "phi2 = 0.6")), ConfigError,
                         MessageMatches(ContainsSubstring("invalid config:") &&
            ContainsSubstring("phi1 + phi2 must equal 1")));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "alpha = 1.5", "alpha = 1.0")), ConfigError,
                         MessageMatches(ContainsSubstring("class1.alpha")));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "c = 1.0", "c = banana")), ConfigError,
                         MessageMatches(ContainsSubstring("not a number: 'banana'")));
    CHECK_THROWS_MATCHES(
        parse_config_text(std::string(kMinimal) + "[junk]\nx = 1\n"), ConfigError,
                         MessageMatches(ContainsSubstring("junk: unknown section")));
    CHECK_THROWS_MATCHES(
        parse_config_text(std::string(kMinimal) + "[tandem]\ntypo = 1\n"), ConfigError,
                         MessageMatches(ContainsSubstring("tandem.typo: unknown key")));

    // one pass reports every problem, joined on a single line
    try {
        parse_config_text(patched(
            patched(kMinimal, "phi2 = 0.5", "phi2 = 0.6"),
            "alpha = 1.5", "alpha = 1.0"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK_THAT(msg, ContainsSubstring("phi1 + phi2"));
        CHECK_THAT(msg, ContainsSubstring("class1.alpha"));
        CHECK_THAT(msg, ContainsSubstring("; "));
        CHECK(msg.find('\n') == std::string::npos);
    }
}

TEST_CASE("level section forms") {
    auto ec = parse_config_text(
        patched(kMinimal, "list = 1, 10, 100", "lo = 5\nhi = 500"));
    CHECK(ec.grid == LevelGrid::geometric(5.0, 500.0, 10));
    auto ec2 = parse_config_text(patched(kMinimal, "list = 1, 10, 100",
                                         "lo = 5\nhi = 500\nper_decade = 4"));
    CHECK(ec2.grid == LevelGrid::geometric(5.0, 500.0, 4));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "list = 1, 10, 100", "lo = 5")), ConfigError,
                         MessageMatches(ContainsSubstring("levels.hi")));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "list = 1, 10, 100", "list = 1, x")), ConfigError,
                         MessageMatches(ContainsSubstring("not a number: 'x'")));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "list = 1, 10, 100", "list = 3, 2")), ConfigError,
                         MessageMatches(ContainsSubstring("strictly increasing")));
}

TEST_CASE("horizon policy in the config") {
    // target_level derives the horizon from the policy at full drain c
    auto ec = parse_config_text(
        patched(kMinimal, "horizon = 50000", "target_level = 1000"));
    double mu = 0.3 + 0.06;
    CHECK_THAT(ec.horizon,
               WithinRel(10.0 / (1.0 - mu) * 1000.0 * std::log1p(1000.0),
                         1e-12));
    CHECK(ec.burn_in == default_burn_in(ec.horizon));

    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "horizon = 50000", "seed = 4")), ConfigError,
                         MessageMatches(ContainsSubstring("either horizon or target_level")));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "horizon = 50000",
                                  "horizon = 50000\nburn_in = 50000")), ConfigError,
                         MessageMatches(ContainsSubstring("smaller than the horizon")));
}

TEST_CASE("engine and estimator compatibility") {
    std::string stable2 = patched(
        kMinimal, "lambda = 0.12\njobs = exponential\nrate = 2.0",
        "type = stable\nalpha = 1.5\nbeta = 1.0\nmu = 0.1");
    CHECK_THROWS_MATCHES(parse_config_text(stable2), ConfigError,
                         MessageMatches(ContainsSubstring("no event calendar")));
    auto ok = parse_config_text(patched(stable2, "horizon = 50000",
                                        "horizon = 50000\nengine = discrete\nh = 0.01"));
    CHECK(ok.engine.kind == EngineKind::Discrete);
    CHECK(ok.engine.h == 0.01);
    CHECK(ok.class2.is_stable());

    CHECK_THROWS_MATCHES(
        parse_config_text(patched(
            kMinimal, "horizon = 50000",
            "horizon = 50000\nengine = discrete\nh = 0.01\nestimator = regenerative")), ConfigError,
                         MessageMatches(ContainsSubstring("regeneration epochs")));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "horizon = 50000",
                                  "horizon = 50000\nengine = discrete")), ConfigError,
                         MessageMatches(ContainsSubstring("run.h")));
    CHECK_THROWS_MATCHES(
        parse_config_text(patched(kMinimal, "horizon = 50000",
                                  "horizon = 50000\nh = 0.01")), ConfigError,
                         MessageMatches(ContainsSubstring("discrete engine only")));

    CHECK_THROWS_AS(parse_config("/nonexistent/experiment.ini"), ConfigError);
}

TEST_CASE("six significant digits") {
    CHECK(format_sig6(0.0) == "0");
    CHECK(format_sig6(0.5) == "0.5");
    CHECK(format_sig6(-2.0) == "-2");
    CHECK(format_sig6(1.0 / 3.0) == "0.333333");
    CHECK(format_sig6(12345.678) == "12345.7");
    CHECK(format_sig6(0.013298076013381089) == "0.0132981");
    CHECK(format_sig6(std::nan("")) == "nan");
    CHECK(format_sig6(INFINITY) == "inf");
}

TEST_CASE("csv emitters") {
    std::ostringstream os;
    emit_csv(os, {});
    CHECK(os.str() == "u,p_hat,ci_low,ci_high,f_asym,ratio,scenario\n");

    std::ostringstream es;
    emit_estimates_csv(
        es, {{1.0, 0.25, 0.2, 0.3, EstimateMethod::Empirical, 100.0}});
    CHECK(es.str() ==
          "u,p_hat,ci_low,ci_high,method,n_effective\n"
          "1,0.25,0.2,0.3,empirical,100\n");

    // jumps precede the segments they start
    std::ostringstream ts;
    emit_trajectory_csv(ts,
                        {{1, Segment{0.0, 1.0, 0.0, 0.0}},
                         {1, Segment{1.0, 2.0, 2.0, -1.0}}},
                        {JumpRecord{1.0, 1, 2.0}});
    std::istringstream lines(ts.str());
    std::string l0, l1, l2, l3;
    std::getline(lines, l0);
    std::getline(lines, l1);
    std::getline(lines, l2);
    std::getline(lines, l3);
    CHECK(l0 == "kind,t_start,t_end,queue,q_start,slope,jump_size");
    CHECK_THAT(l1, ContainsSubstring("segment,0,"));
    CHECK_THAT(l2, ContainsSubstring("jump,1,"));
    CHECK_THAT(l3, ContainsSubstring("segment,1,"));

    std::ostringstream ms;
    RunManifest m;
    m.engine = "event";
    m.seed = 42;
    m.warnings = {"w1"};
    emit_manifest(ms, m);
    CHECK_THAT(ms.str(), ContainsSubstring("# tool_version=1.0.0\n"));
    CHECK_THAT(ms.str(), ContainsSubstring("# engine=event\n"));
    CHECK_THAT(ms.str(), ContainsSubstring("# seed=42\n"));
    CHECK_THAT(ms.str(), ContainsSubstring("# warning w1\n"));
}

TEST_CASE("experiment reruns are byte-identical") {
    std::string text = patched(
        patched(kMinimal, "lambda = 0.12\njobs = exponential\nrate = 2.0",
                "lambda = 0.12\nx_m = 1.0\nalpha = 2.5"),
        "horizon = 50000", "horizon = 20000\nseed = 42");
    text = patched(text, "list = 1, 10, 100", "list = 1, 2");
    auto ec = parse_config_text(text);

    auto res1 = run_experiment(ec);
    auto res2 = run_experiment(ec);
    REQUIRE_FALSE(res1.failed);
    CHECK(res1.scenario == "S2");
    CHECK(res1.estimates.size() == 2);
    CHECK(res1.manifest.engine == "event");

    std::ostringstream a, b;
    emit_csv(a, res1.rows);
    emit_csv(b, res2.rows);
    CHECK(a.str() == b.str());
    CHECK(res1.rows[0].f_asym > 0.0);
    CHECK(res1.rows[0].ratio == res1.rows[0].p_hat / res1.rows[0].f_asym);

    // a different seed moves the estimate
    auto ec2 = parse_config_text(patched(text, "seed = 42", "seed = 43"));
    auto res3 = run_experiment(ec2);
    CHECK(res3.rows[0].p_hat != res1.rows[0].p_hat);
}

TEST_CASE("boundary parameterization reports values without a closed form") {
    // mu2 equals the class-2 guaranteed rate exactly: no regime applies,
    // but the simulation still runs and the rows carry NaN asymptotes.
    std::string text = patched(
        patched(kMinimal, "lambda = 0.12\njobs = exponential\nrate = 2.0",
                "lambda = 0.25\nx_m = 1.0\nalpha = 2.0"),
        "horizon = 50000", "horizon = 20000");
    text = patched(text, "list = 1, 10, 100", "list = 1, 2");
    auto ec = parse_config_text(text);
    auto res = run_experiment(ec);
    REQUIRE_FALSE(res.failed);
    CHECK(res.scenario == "unclassified");
    REQUIRE_FALSE(res.manifest.warnings.empty());
    CHECK_THAT(res.manifest.warnings.front(),
               ContainsSubstring("no closed form"));
    for (const auto& row : res.rows) {
        CHECK(std::isnan(row.f_asym));
        CHECK(std::isnan(row.ratio));
        CHECK(row.p_hat >= 0.0);
    }
}

TEST_CASE("estimation failures mark the result instead of aborting") {
    // almost no arrivals: the regenerative estimator cannot complete 30
    // cycles and the run reports the error in-band
    std::string text = patched(
        patched(patched(kMinimal, "lambda = 0.1\n", "lambda = 0.0001\n"),
                "lambda = 0.12", "lambda = 0.0001"),
        "horizon = 50000",
        "horizon = 1000\nburn_in = 0\nestimator = regenerative\nseed = 3");
    auto ec = parse_config_text(text);
    auto res = run_experiment(ec);
    CHECK(res.failed);
    REQUIRE_FALSE(res.rows.empty());
    CHECK(res.rows.back().scenario.rfind("error: ", 0) == 0);
    CHECK(std::isnan(res.rows.back().u));
    REQUIRE_FALSE(res.manifest.warnings.empty());
}

TEST_CASE("closed-form-only run") {
    std::string text = patched(
        patched(kMinimal, "lambda = 0.12\njobs = exponential\nrate = 2.0",
                "lambda = 0.12\nx_m = 1.0\nalpha = 2.5"),
        "list = 1, 10, 100", "list = 100");
    auto ec = parse_config_text(text);
    auto res = run_asymptote(ec);
    REQUIRE_FALSE(res.failed);
    CHECK(res.scenario == "S2");
    CHECK(res.estimates.empty());
    CHECK(res.manifest.engine == "none");
    REQUIRE(res.rows.size() == 1);
    CHECK_THAT(res.rows[0].f_asym, WithinRel(0.04, 1e-12));
    CHECK(std::isnan(res.rows[0].p_hat));
}

TEST_CASE("tandem sampling run") {
    const char* text = R"(
[gps]
c = 1.0
phi1 = 0.3
phi2 = 0.7
[class1]
lambda = 0.2
x_m = 1.0
alpha = 2.0
[class2]
lambda = 0.04
x_m = 1.0
alpha = 1.5
[levels]
list = 2, 5
[run]
horizon = 10000
seed = 9
[tandem]
samples = 200
)";
    auto ec = parse_config_text(text);
    auto res = run_tandem(ec);
    REQUIRE_FALSE(res.failed);
    CHECK(res.scenario == "tandem");
    REQUIRE(res.estimates.size() == 2);
    for (const auto& e : res.estimates) {
        CHECK(e.method == EstimateMethod::Empirical);
        CHECK(e.n_effective == 200.0);
        CHECK(e.p_hat >= 0.0);
        CHECK(e.p_hat <= 1.0);
    }
    for (const auto& row : res.rows) {
        CHECK(row.f_asym > 0.0);
        CHECK(row.scenario == "tandem");
    }
    // reruns reproduce the samples
    auto res2 = run_tandem(ec);
    CHECK(res2.rows[0].p_hat == res.rows[0].p_hat);
}
