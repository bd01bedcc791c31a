#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpsq/asymptotics.hpp"
#include "gpsq/config.hpp"
#include "gpsq/engine.hpp"
#include "gpsq/estimation.hpp"
#include "gpsq/report.hpp"
#include "gpsq/suprema.hpp"

namespace gpsq {

struct ExperimentResult {
    std::vector<ReportRow> rows;
    std::vector<TailEstimate> estimates;  // class-1 estimates backing the rows
    RunManifest manifest;
    std::string scenario;  // regime label, or "unclassified"
    bool failed = false;   // a marker row carries the error when set
    // Captured path (event engine, single replication, on request).
    std::vector<std::pair<int, Segment>> trajectory_segments;
    std::vector<JumpRecord> trajectory_jumps;
};

namespace detail {

inline std::string describe_input(const ClassInputSpec& spec) {
    if (spec.is_compound_poisson()) {
        const auto& cp = spec.cp();
        std::string jobs = std::visit(
            [](const auto& j) -> std::string {
                using J = std::decay_t<decltype(j)>;
                if constexpr (std::is_same_v<J, Pareto>)
                    return "pareto(x_m=" + format_sig6(j.x_m) +
                           ",alpha=" + format_sig6(j.alpha) + ")";
                else if constexpr (std::is_same_v<J, ExponentialJobs>)
                    return "exponential(rate=" + format_sig6(j.rate) + ")";
                else
                    return "deterministic(size=" + format_sig6(j.size) + ")";
            },
            cp.jobs);
        return "cp(lambda=" + format_sig6(cp.lambda) + "," + jobs + ")";
    }
    const auto& st = spec.stable();
    return "stable(alpha=" + format_sig6(st.alpha) +
           ",beta=" + format_sig6(st.beta) + ",mu=" + format_sig6(st.mu) + ")";
}

inline std::string config_echo(const ExperimentConfig& ec) {
    std::string s = "c=" + format_sig6(ec.gps.c) +
                    " phi1=" + format_sig6(ec.gps.phi1) +
                    " phi2=" + format_sig6(ec.gps.phi2) +
                    " class1=" + describe_input(ec.class1) +
                    " class2=" + describe_input(ec.class2) + " levels=[" +
                    format_sig6(ec.grid.levels().front()) + ".." +
                    format_sig6(ec.grid.levels().back()) +
                    ",n=" + std::to_string(ec.grid.size()) + "]";
    if (ec.engine.kind == EngineKind::Discrete)
        s += " h=" + format_sig6(ec.engine.h);
    s += std::string(" estimator=") +
         (ec.estimator == EstimatorChoice::Regenerative ? "regenerative"
                                                        : "time-average") +
         " batches=" + std::to_string(ec.batches);
    return s;
}

// Selects the closed-form evaluator (if any) for the configured inputs.
// Falls back to the compound Poisson case-4 closed form when the general
// regime only fails its non-integer-index hypothesis: that statement has no
// such hypothesis, so the value is still reported, with a warning.
struct AsymptotePlan {
    bool have = false;
    std::string label = "unclassified";
    std::function<double(double)> eval;
    std::vector<std::string> warnings;
};

inline AsymptotePlan plan_asymptote(const ExperimentConfig& ec) {
    AsymptotePlan plan;
    std::optional<ModelSummary> s;
    try {
        s = ModelSummary::from_specs(ec.class1, ec.class2);
    } catch (const ParameterError& e) {
        plan.warnings.push_back(std::string("no closed form: ") + e.what());
        return plan;
    }
    try {
        Scenario sc = classify(ec.gps, *s);
        plan.have = true;
        plan.label = scenario_label(sc);
        plan.eval = [cfg = ec.gps, sum = *s, sc](double u) {
            return tail_asymptote_q1(sc, cfg, sum, u);
        };
    } catch (const UnsupportedScenarioError& e) {
        bool cp_case4 = ec.class1.is_compound_poisson() &&
                        ec.class2.is_compound_poisson() &&
                        s->mu1 > ec.gps.rate1() && s->mu2 < ec.gps.rate2() &&
                        s->alpha2 < s->alpha1 && is_integer_index(s->alpha2);
        if (cp_case4) {
            plan.have = true;
            plan.label = "S4";
            plan.eval = [cfg = ec.gps, cp1 = ec.class1.cp(),
                         cp2 = ec.class2.cp()](double u) {
                return cp_asymptote(4, cfg, cp1, cp2, u);
            };
            plan.warnings.push_back(
                "class-2 tail index is an integer: reporting the compound "
                "Poisson case-4 value, which the general regime formula "
                "excludes");
        } else {
            plan.warnings.push_back(std::string("no closed form: ") + e.what());
        }
    } catch (const std::exception& e) {
        // Unstable, boundary, or equal-index parameterizations.
        plan.warnings.push_back(std::string("no closed form: ") + e.what());
    }
    return plan;
}

// Routes engine callbacks to whichever consumers this run wired up.
struct ExperimentObserver : NullObserver {
    OccupancyAccumulator* occ1 = nullptr;
    RegenerativeAccumulator* reg = nullptr;
    TrajectoryRecorder* rec = nullptr;

    void on_segment(int queue, const Segment& seg) {
        if (occ1 && queue == 1) occ1->add_segment(seg);
        if (reg) reg->on_segment(queue, seg);
        if (rec) rec->on_segment(queue, seg);
    }
    void on_jump(double t, int cls, double size, const SystemState& st) {
        if (rec) rec->on_jump(t, cls, size, st);
    }
    void on_regeneration(double t) {
        if (reg) reg->on_regeneration(t);
    }
};

// Discrete-engine adapter: each step contributes a flat piece at the
// post-step workload.
struct StepOccupancy : NullObserver {
    OccupancyAccumulator* occ1;
    double h;

    void on_step(std::uint64_t, double t, double q1, double /*q2*/) {
        occ1->add_segment(Segment{t - h, t, q1, 0.0});
    }
};

inline ReportRow error_marker_row(std::string msg) {
    for (auto& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
    double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan, nan, "error: " + msg};
}

inline void fill_rows(ExperimentResult& res, const AsymptotePlan& plan) {
    for (const auto& est : res.estimates) {
        ReportRow row{est.u,
                      est.p_hat,
                      est.ci_low,
                      est.ci_high,
                      std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(),
                      plan.label};
        if (plan.have) {
            row.f_asym = plan.eval(est.u);
            row.ratio = est.p_hat / row.f_asym;
        }
        res.rows.push_back(row);
    }
}

}  // namespace detail

// Simulate, estimate the class-1 tail, and compare against the classified
// regime's closed form.  Deterministic given (config, seed): replication r
// draws from streams 2r and 2r+1 and accumulators merge in that order.
inline ExperimentResult run_experiment(const ExperimentConfig& ec) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.manifest.engine =
        ec.engine.kind == EngineKind::Event ? "event" : "discrete";
    res.manifest.seed = ec.seed;
    res.manifest.replications = ec.replications;
    res.manifest.horizon = ec.horizon;
    res.manifest.burn_in = ec.burn_in;
    res.manifest.config_echo = detail::config_echo(ec);

    auto plan = detail::plan_asymptote(ec);
    res.manifest.warnings = plan.warnings;
    res.scenario = plan.label;

    bool record = !ec.outputs.trajectory.empty();
    if (record && ec.engine.kind != EngineKind::Event) {
        res.manifest.warnings.push_back(
            "trajectory output requires the event engine; skipped");
        record = false;
    }
    if (record && ec.replications != 1) {
        res.manifest.warnings.push_back(
            "trajectory output records replication 0 only");
    }
    TrajectoryRecorder recorder;

    try {
        if (ec.estimator == EstimatorChoice::TimeAverage) {
            std::optional<OccupancyAccumulator> total;
            for (int r = 0; r < ec.replications; ++r) {
                OccupancyAccumulator acc(ec.grid, ec.burn_in, ec.horizon,
                                         ec.batches);
                RngStream rng1(ec.seed, 2 * static_cast<std::uint64_t>(r));
                RngStream rng2(ec.seed, 2 * static_cast<std::uint64_t>(r) + 1);
                if (ec.engine.kind == EngineKind::Event) {
                    detail::ExperimentObserver obs;
                    obs.occ1 = &acc;
                    if (record && r == 0) obs.rec = &recorder;
                    simulate_event_driven(ec.gps, ec.class1.cp(),
                                          ec.class2.cp(), ec.horizon, rng1,
                                          rng2, obs);
                } else {
                    detail::StepOccupancy obs{{}, &acc, ec.engine.h};
                    auto n_steps = static_cast<std::uint64_t>(
                        std::ceil(ec.horizon / ec.engine.h));
                    simulate_discrete(ec.gps, ec.class1, ec.class2,
                                      ec.engine.h, n_steps, rng1, rng2, obs);
                }
                if (!total) total.emplace(std::move(acc));
                else total->merge(acc);
            }
            res.estimates = estimate_tail_time_average(*total);
        } else {
            RegenerativeAccumulator total(ec.grid);
            for (int r = 0; r < ec.replications; ++r) {
                RegenerativeAccumulator acc(ec.grid);
                RngStream rng1(ec.seed, 2 * static_cast<std::uint64_t>(r));
                RngStream rng2(ec.seed, 2 * static_cast<std::uint64_t>(r) + 1);
                detail::ExperimentObserver obs;
                obs.reg = &acc;
                if (record && r == 0) obs.rec = &recorder;
                simulate_event_driven(ec.gps, ec.class1.cp(), ec.class2.cp(),
                                      ec.horizon, rng1, rng2, obs);
                total.merge(acc);
            }
            res.estimates = regenerative_estimate(total);
        }
        detail::fill_rows(res, plan);
    } catch (const std::exception& e) {
        res.failed = true;
        res.manifest.warnings.push_back(e.what());
        res.rows.push_back(detail::error_marker_row(e.what()));
    }

    res.trajectory_segments = std::move(recorder.segments);
    res.trajectory_jumps = std::move(recorder.jumps);
    res.manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
}

// Evaluate the closed forms only: rows carry f_asym with empty estimates.
inline ExperimentResult run_asymptote(const ExperimentConfig& ec) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.manifest.engine = "none";
    res.manifest.seed = ec.seed;
    res.manifest.replications = 0;
    res.manifest.config_echo = detail::config_echo(ec);

    auto plan = detail::plan_asymptote(ec);
    res.manifest.warnings = plan.warnings;
    res.scenario = plan.label;

    double nan = std::numeric_limits<double>::quiet_NaN();
    for (double u : ec.grid.levels()) {
        ReportRow row{u, nan, nan, nan, nan, nan, plan.label};
        if (plan.have) row.f_asym = plan.eval(u);
        res.rows.push_back(row);
    }
    res.manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
}

// Sample the coupled-suprema difference V and compare its empirical tail
// against the tandem asymptote.  Class 1 enters only through its mean rate.
inline ExperimentResult run_tandem(const ExperimentConfig& ec) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.manifest.engine = "tandem";
    res.manifest.seed = ec.seed;
    res.manifest.replications = ec.tandem_samples;
    res.manifest.config_echo = detail::config_echo(ec) +
                               " eps=" + format_sig6(ec.tandem_eps) +
                               " samples=" + std::to_string(ec.tandem_samples);
    res.scenario = "tandem";

    detail::AsymptotePlan plan;
    plan.label = "tandem";
    {
        auto a2 = tail_index(ec.class2);
        auto k2 = tail_coefficient(ec.class2);
        bool sp2 = ec.class2.is_compound_poisson() ||
                   ec.class2.stable().spectrally_positive();
        if (a2 && k2) {
            // Class-1 slots in the summary are placeholders; the tandem
            // asymptote reads only mu1 and the class-2 fields.
            ModelSummary sum(ec.class1.mean_rate(), ec.class2.mean_rate(),
                             *a2 + 1.0, *a2, 1.0, *k2,
                             ec.class2.is_stable() ? ec.class2.stable().beta
                                                   : 1.0,
                             sp2);
            try {
                tandem_tail(ec.grid.levels().back(), ec.tandem_eps, ec.gps, sum);
                plan.have = true;
                plan.eval = [cfg = ec.gps, sum, eps = ec.tandem_eps](double u) {
                    return tandem_tail(u, eps, cfg, sum);
                };
            } catch (const std::exception& e) {
                res.manifest.warnings.push_back(
                    std::string("no closed form: ") + e.what());
            }
        } else {
            res.manifest.warnings.push_back(
                "no closed form: class-2 input has no regularly varying tail");
        }
    }

    try {
        double u_top = ec.grid.levels().back();
        double mu1 = ec.class1.mean_rate();
        std::vector<double> samples;
        samples.reserve(static_cast<std::size_t>(ec.tandem_samples));
        for (int i = 0; i < ec.tandem_samples; ++i) {
            RngStream rng(ec.seed, static_cast<std::uint64_t>(i));
            samples.push_back(
                simulate_tandem_V(ec.class2, ec.gps, mu1, u_top, rng,
                                  ec.tandem_eps)
                    .v);
        }
        res.estimates = empirical_tail(std::move(samples), ec.grid);
        detail::fill_rows(res, plan);
    } catch (const std::exception& e) {
        res.failed = true;
        res.manifest.warnings.push_back(e.what());
        res.rows.push_back(detail::error_marker_row(e.what()));
    }

    res.manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
}

}  // namespace gpsq
