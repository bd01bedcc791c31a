// Command-line front end: simulate | asymptote | tandem | validate.
//
// Results go to stdout (or --out) as CSV whose bytes depend only on the
// config and seed; the run manifest, which carries wall-clock time and
// warnings, goes to stderr or to <out>.manifest so reruns stay comparable
// byte for byte.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpsq/config.hpp"
#include "gpsq/experiment.hpp"
#include "gpsq/validation.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> engine;
    std::optional<std::string> levels;
    std::optional<int> replications;
};

std::vector<double> parse_levels_csv(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto b = tok.find_first_not_of(" \t");
        auto e = tok.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw gpsq::ConfigError("--levels: empty entry in '" + text + "'");
        tok = tok.substr(b, e - b + 1);
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            throw gpsq::ConfigError("--levels: cannot parse '" + tok + "'");
        }
        if (pos != tok.size())
            throw gpsq::ConfigError("--levels: cannot parse '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw gpsq::ConfigError("--levels: empty list");
    return out;
}

void apply_overrides(gpsq::ExperimentConfig& ec, const Overrides& ov) {
    if (ov.seed) ec.seed = *ov.seed;
    if (ov.replications) {
        if (*ov.replications < 1)
            throw gpsq::ConfigError("--replications must be >= 1");
        ec.replications = *ov.replications;
    }
    if (ov.levels) ec.grid = gpsq::LevelGrid(parse_levels_csv(*ov.levels));
    if (ov.engine) {
        if (*ov.engine == "event") {
            ec.engine.kind = gpsq::EngineKind::Event;
        } else if (*ov.engine == "discrete") {
            if (!(ec.engine.h > 0.0))
                throw gpsq::ConfigError(
                    "--engine discrete needs a step: set h in [run]");
            ec.engine.kind = gpsq::EngineKind::Discrete;
        } else {
            throw gpsq::ConfigError("--engine must be 'event' or 'discrete'");
        }
    }
    // Overrides can break the cross-field rules the parser enforced.
    if (ec.engine.kind == gpsq::EngineKind::Event &&
        (ec.class1.is_stable() || ec.class2.is_stable()))
        throw gpsq::ConfigError(
            "stable input has no event calendar; use engine = discrete");
    if (ec.estimator == gpsq::EstimatorChoice::Regenerative &&
        ec.engine.kind == gpsq::EngineKind::Discrete)
        throw gpsq::ConfigError(
            "the regenerative estimator needs the event engine");
    if (ov.out) ec.outputs.report = *ov.out;
}

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw gpsq::ConfigError("cannot open output file: " + path);
    return f;
}

int write_outputs(const gpsq::ExperimentResult& res,
                  const gpsq::ExperimentConfig& ec) {
    if (ec.outputs.report.empty()) {
        gpsq::emit_csv(std::cout, res.rows);
        gpsq::emit_manifest(std::cerr, res.manifest);
    } else {
        auto f = open_or_throw(ec.outputs.report);
        gpsq::emit_csv(f, res.rows);
        auto mf = open_or_throw(ec.outputs.report + ".manifest");
        gpsq::emit_manifest(mf, res.manifest);
    }
    if (!ec.outputs.estimates.empty()) {
        auto f = open_or_throw(ec.outputs.estimates);
        gpsq::emit_estimates_csv(f, res.estimates);
    }
    if (!ec.outputs.trajectory.empty()) {
        auto f = open_or_throw(ec.outputs.trajectory);
        gpsq::emit_trajectory_csv(f, res.trajectory_segments,
                                  res.trajectory_jumps);
    }
    if (res.failed) {
        std::cerr << (res.rows.empty() ? std::string("error: run failed")
                                       : res.rows.back().scenario)
                  << '\n';
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "two-class GPS fluid queue: exact simulation, tail estimation, and "
        "closed-form asymptotics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string selector = "all";
    Overrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment file (INI)")
            ->required();
        sub->add_option("--seed", ov.seed, "overrides the seed in the config");
        sub->add_option("--out", ov.out, "report CSV path (default: stdout)");
        sub->add_option("--levels", ov.levels,
                        "comma-separated level grid override");
        sub->add_option("--replications", ov.replications,
                        "independent replications to merge");
    };

    auto* sim = app.add_subcommand(
        "simulate", "estimate the class-1 tail and compare with its asymptote");
    add_common(sim);
    sim->add_option("--engine", ov.engine, "event | discrete");

    auto* asym = app.add_subcommand(
        "asymptote", "evaluate the closed-form tail approximation only");
    add_common(asym);

    auto* tand = app.add_subcommand(
        "tandem", "sample the tandem functional of the overloaded-first regime");
    add_common(tand);

    auto* val = app.add_subcommand("validate", "run the acceptance criteria");
    val->add_option("suite", selector,
                    "all | oracles | scenario1 | scenario2 | scenario3 | "
                    "scenario4 | stable | discretization | classifier | "
                    "horizon");

    CLI11_PARSE(app, argc, argv);

    try {
        if (val->parsed()) {
            auto results = gpsq::validate_suite(selector);
            int fails = gpsq::print_criteria(std::cout, results);
            std::cerr << (results.size() - (std::size_t)fails) << " of "
                      << results.size() << " criteria passed\n";
            return fails ? 1 : 0;
        }
        auto ec = gpsq::parse_config(config_path);
        apply_overrides(ec, ov);
        gpsq::ExperimentResult res;
        if (sim->parsed())
            res = gpsq::run_experiment(ec);
        else if (asym->parsed())
            res = gpsq::run_asymptote(ec);
        else
            res = gpsq::run_tandem(ec);
        return write_outputs(res, ec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
