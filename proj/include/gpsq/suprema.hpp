#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gpsq/engine.hpp"
#include "gpsq/inputs.hpp"
#include "gpsq/rng.hpp"

namespace gpsq {

// The stationary workload of a single queue with input Z and drain rate d
// equals in law sup_{t >= 0} (Z(t) - d t); a finite-horizon path sample
// truncates the supremum at T.  For compound Poisson input the supremum is
// attained immediately after a jump, so the walk is evaluated only there and
// the sample is exact for its horizon.  Stable input is evaluated on a grid
// of step stable_step.

struct SupSample {
    double value;
    double horizon;
};

inline SupSample supremum_over_horizon(const ClassInputSpec& spec, double drain,
                                       double horizon, RngStream& rng,
                                       double stable_step = 1e-2) {
    if (!(horizon > 0.0))
        throw ParameterError("supremum_over_horizon: horizon must be > 0");
    if (!(drain > spec.mean_rate()))
        throw UnstableQueueError(
            "supremum_over_horizon: drain rate must exceed the mean input rate");

    double m = 0.0;
    if (spec.is_compound_poisson()) {
        const auto& cp = spec.cp();
        if (cp.lambda > 0.0) {
            double t = rng.exponential(cp.lambda);
            double z = 0.0;
            while (t < horizon) {
                z += sample_job(cp.jobs, rng);
                m = std::max(m, z - drain * t);
                t += rng.exponential(cp.lambda);
            }
        }
    } else {
        const auto& st = spec.stable();
        if (!(stable_step > 0.0))
            throw ParameterError("supremum_over_horizon: stable_step must be > 0");
        double t = 0.0, z = 0.0;
        while (t < horizon) {
            double h = std::min(stable_step, horizon - t);
            z += sample_stable_increment(st, h, rng);
            t += h;
            m = std::max(m, z - drain * t);
        }
    }
    return {m, horizon};
}

// Dual walk sup_{t in [0,T]} (d t - Z(t)), the workload of a queue drained
// by Z and fed at constant rate d; stable only when d is below the mean
// input rate.  For compound Poisson input the supremum is attained just
// before a jump or at the horizon.
inline SupSample check_queue_supremum(const ClassInputSpec& spec, double drain,
                                      double horizon, RngStream& rng,
                                      double stable_step = 1e-2) {
    if (!(horizon > 0.0))
        throw ParameterError("check_queue_supremum: horizon must be > 0");
    if (!(drain < spec.mean_rate()))
        throw UnstableQueueError(
            "check_queue_supremum: drain rate must be below the mean input rate");
    if (!(drain >= 0.0))
        throw ParameterError("check_queue_supremum: drain rate must be >= 0");

    double m = 0.0;
    if (spec.is_compound_poisson()) {
        const auto& cp = spec.cp();
        double z = 0.0;
        if (cp.lambda > 0.0) {
            double t = rng.exponential(cp.lambda);
            while (t < horizon) {
                m = std::max(m, drain * t - z);
                z += sample_job(cp.jobs, rng);
                t += rng.exponential(cp.lambda);
            }
        }
        m = std::max(m, drain * horizon - z);
    } else {
        const auto& st = spec.stable();
        if (!(stable_step > 0.0))
            throw ParameterError("check_queue_supremum: stable_step must be > 0");
        double t = 0.0, z = 0.0;
        while (t < horizon) {
            double h = std::min(stable_step, horizon - t);
            z += sample_stable_increment(st, h, rng);
            t += h;
            m = std::max(m, drain * t - z);
        }
    }
    return {m, horizon};
}

// Tandem functional of a single class-2 path:
//   V = sup_t (Z2(t) - (c - mu1 - eps) t) - sup_s (Z2(s) - phi2 c s),
// both suprema over the same path.  When class 1 is overloaded
// (mu1 > phi1 c) the first drain is the slower one and V >= 0; its tail
// reproduces the class-1 workload tail to leading order.  eps > 0 slackens
// the first drain (upper comparison), eps < 0 tightens it (lower).
struct TandemSample {
    double v;
    double horizon;
};

inline TandemSample tandem_V_over_horizon(const ClassInputSpec& spec2,
                                          const GpsConfig& cfg, double mu1,
                                          double horizon, RngStream& rng,
                                          double eps = 0.0,
                                          double stable_step = 1e-2) {
    if (!(horizon > 0.0))
        throw ParameterError("tandem_V_over_horizon: horizon must be > 0");
    if (spec2.is_stable() && !spec2.stable().spectrally_positive())
        throw ScenarioError(
            "tandem_V_over_horizon: class-2 input must be spectrally positive");
    double d1 = cfg.c - mu1 - eps;
    double d2 = cfg.rate2();
    double mu2 = spec2.mean_rate();
    if (!(d1 < d2))
        throw ScenarioError(
            "tandem_V_over_horizon: requires c - mu1 - eps < phi2 c (class 1 overloaded)");
    if (!(d1 > mu2))
        throw ScenarioError(
            "tandem_V_over_horizon: c - mu1 - eps must exceed the class-2 rate");
    if (!(d2 > mu2))
        throw ScenarioError(
            "tandem_V_over_horizon: phi2 c must exceed the class-2 rate");

    double m1 = 0.0, m2 = 0.0;
    if (spec2.is_compound_poisson()) {
        const auto& cp = spec2.cp();
        if (cp.lambda > 0.0) {
            double t = rng.exponential(cp.lambda);
            double z = 0.0;
            while (t < horizon) {
                z += sample_job(cp.jobs, rng);
                m1 = std::max(m1, z - d1 * t);
                m2 = std::max(m2, z - d2 * t);
                t += rng.exponential(cp.lambda);
            }
        }
    } else {
        const auto& st = spec2.stable();
        if (!(stable_step > 0.0))
            throw ParameterError("tandem_V_over_horizon: stable_step must be > 0");
        double t = 0.0, z = 0.0;
        while (t < horizon) {
            double h = std::min(stable_step, horizon - t);
            z += sample_stable_increment(st, h, rng);
            t += h;
            m1 = std::max(m1, z - d1 * t);
            m2 = std::max(m2, z - d2 * t);
        }
    }
    return {m1 - m2, horizon};
}

// Reflected net-input path R(t) = (Z(t) - drain t) - inf_{s <= t}(Z(s) - drain s),
// sampled at the given nondecreasing times.  Used by the long-horizon drift
// diagnostic, which watches R(t)/t.
inline std::vector<double> reflected_queue_at(const ClassInputSpec& spec,
                                              double drain,
                                              std::span<const double> times,
                                              RngStream& rng,
                                              double stable_step = 1e-2) {
    if (!(drain >= 0.0))
        throw ParameterError("reflected_queue_at: drain must be >= 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1]))
            throw InputError("reflected_queue_at: times must be nondecreasing and >= 0");
    }
    std::vector<double> out;
    out.reserve(times.size());
    if (times.empty()) return out;
    double horizon = times.back();

    if (spec.is_compound_poisson()) {
        const auto& cp = spec.cp();
        double r = 0.0;        // reflected value just after the last jump
        double t_last = 0.0;   // time of the last jump
        std::size_t i = 0;
        // Right-continuous convention: a sample time coinciding with a jump
        // sees the post-jump value.
        auto emit_until = [&](double t_next, bool inclusive) {
            while (i < times.size() &&
                   (inclusive ? times[i] <= t_next : times[i] < t_next)) {
                out.push_back(std::max(r - drain * (times[i] - t_last), 0.0));
                ++i;
            }
        };
        if (cp.lambda > 0.0) {
            double t = rng.exponential(cp.lambda);
            while (t <= horizon) {
                emit_until(t, false);
                r = std::max(r - drain * (t - t_last), 0.0) +
                    sample_job(cp.jobs, rng);
                t_last = t;
                t += rng.exponential(cp.lambda);
            }
        }
        emit_until(horizon, true);
    } else {
        const auto& st = spec.stable();
        if (!(stable_step > 0.0))
            throw ParameterError("reflected_queue_at: stable_step must be > 0");
        double t = 0.0, r = 0.0;
        std::size_t i = 0;
        while (i < times.size() && times[i] <= t) {
            out.push_back(r);
            ++i;
        }
        while (t < horizon) {
            double h = std::min(stable_step, horizon - t);
            r = std::max(r + sample_stable_increment(st, h, rng) - drain * h, 0.0);
            t += h;
            while (i < times.size() && times[i] <= t) {
                out.push_back(r);
                ++i;
            }
        }
        while (i < times.size()) {
            out.push_back(r);
            ++i;
        }
    }
    return out;
}

}  // namespace gpsq
