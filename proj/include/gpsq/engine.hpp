#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gpsq/gps.hpp"
#include "gpsq/inputs.hpp"
#include "gpsq/rng.hpp"

namespace gpsq {

struct ClassedArrival {
    double t;
    int cls;  // 1 or 2
    double size;
};

// Observers receive every linear piece of both workload paths, every jump,
// and every regeneration epoch (an arrival that finds the whole system
// empty).  Derive from NullObserver and override what you need.
struct NullObserver {
    void on_segment(int /*queue*/, const Segment&) {}
    void on_jump(double /*t*/, int /*cls*/, double /*size*/, const SystemState&) {}
    void on_regeneration(double /*t*/) {}
    void on_step(std::uint64_t /*k*/, double /*t*/, double /*q1*/, double /*q2*/) {}
};

// ---------------------------------------------------------------------------
// Arrival streams.
// ---------------------------------------------------------------------------

// Lazy time-ordered merge of two compound Poisson streams.  Each class draws
// from its own RngStream (interarrival, then job size), so the per-class
// sequences are reproducible independently of the merge order.  Ties go to
// class 1.
class MergedCpStream {
public:
    MergedCpStream(const CompoundPoissonSpec& s1, const CompoundPoissonSpec& s2,
                   double horizon, RngStream& rng1, RngStream& rng2)
        : s1_(&s1), s2_(&s2), horizon_(horizon), rng1_(&rng1), rng2_(&rng2) {
        if (!(horizon >= 0.0))
            throw ParameterError("MergedCpStream: horizon must be >= 0");
        t1_ = first_time(*s1_, *rng1_);
        t2_ = first_time(*s2_, *rng2_);
    }

    std::optional<ClassedArrival> next() {
        if (t1_ <= t2_) {
            if (t1_ >= horizon_) return std::nullopt;
            ClassedArrival a{t1_, 1, sample_job(s1_->jobs, *rng1_)};
            t1_ += rng1_->exponential(s1_->lambda);
            return a;
        }
        if (t2_ >= horizon_) return std::nullopt;
        ClassedArrival a{t2_, 2, sample_job(s2_->jobs, *rng2_)};
        t2_ += rng2_->exponential(s2_->lambda);
        return a;
    }

private:
    static double first_time(const CompoundPoissonSpec& s, RngStream& rng) {
        if (s.lambda == 0.0) return std::numeric_limits<double>::infinity();
        return rng.exponential(s.lambda);
    }

    const CompoundPoissonSpec* s1_;
    const CompoundPoissonSpec* s2_;
    double horizon_;
    RngStream* rng1_;
    RngStream* rng2_;
    double t1_, t2_;
};

// Replays a prepared arrival list; rejects streams that are not in time
// order.
class VectorArrivalStream {
public:
    explicit VectorArrivalStream(std::span<const ClassedArrival> arrivals)
        : arrivals_(arrivals) {
        for (std::size_t i = 1; i < arrivals_.size(); ++i)
            if (arrivals_[i].t < arrivals_[i - 1].t)
                throw InputError("arrival stream is not sorted by time");
    }

    std::optional<ClassedArrival> next() {
        if (pos_ >= arrivals_.size()) return std::nullopt;
        return arrivals_[pos_++];
    }

private:
    std::span<const ClassedArrival> arrivals_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Event-driven engine.
// ---------------------------------------------------------------------------

struct EventResult {
    SystemState final_state;
    ServiceLedger ledger;
    std::uint64_t n_jumps = 0;
    double input1 = 0.0;  // total workload injected per class
    double input2 = 0.0;
};

// Exact simulation: between jumps both workloads are piecewise linear and
// every regime boundary is located in closed form, so the only error is
// floating-point rounding.  Arrivals at or past the horizon are ignored;
// the final drain stops exactly at the horizon.
template <class Stream, class Observer>
EventResult run_event_engine(const GpsConfig& cfg, Stream&& stream,
                             double horizon, Observer&& obs,
                             SystemState init = {}) {
    if (!(horizon >= init.t))
        throw ParameterError("run_event_engine: horizon precedes start time");

    SystemState s = init;
    EventResult res;
    auto sink = [&obs](int queue, const Segment& seg) { obs.on_segment(queue, seg); };

    while (auto a = stream.next()) {
        if (a->t >= horizon) break;
        if (a->t < s.t) throw InputError("arrival stream is not sorted by time");
        s = drain_until(s, a->t - s.t, cfg, &res.ledger, sink);
        if (s.q1 == 0.0 && s.q2 == 0.0) obs.on_regeneration(s.t);
        s = apply_jump(s, a->cls, a->size);
        (a->cls == 1 ? res.input1 : res.input2) += a->size;
        obs.on_jump(s.t, a->cls, a->size, s);
        ++res.n_jumps;
    }
    s = drain_until(s, horizon - s.t, cfg, &res.ledger, sink);
    res.final_state = s;
    return res;
}

// Convenience front end for two compound Poisson classes.
template <class Observer>
EventResult simulate_event_driven(const GpsConfig& cfg,
                                  const CompoundPoissonSpec& in1,
                                  const CompoundPoissonSpec& in2, double horizon,
                                  RngStream& rng1, RngStream& rng2,
                                  Observer&& obs, SystemState init = {}) {
    MergedCpStream stream(in1, in2, horizon, rng1, rng2);
    return run_event_engine(cfg, stream, horizon, obs, init);
}

// ---------------------------------------------------------------------------
// Discrete-time engine.
// ---------------------------------------------------------------------------

// Per-step workload increments.  Compound Poisson steps draw a Poisson count
// and sum that many jobs; stable steps draw one scaled stable variate.
class IncrementSampler {
public:
    IncrementSampler(const ClassInputSpec& spec, double h, RngStream& rng)
        : spec_(&spec), h_(h), rng_(&rng) {
        if (!(h > 0.0)) throw ParameterError("IncrementSampler: h must be > 0");
        if (spec.is_compound_poisson()) {
            double mean_count = spec.cp().lambda * h;
            if (mean_count > 500.0)
                throw ParameterError(
                    "IncrementSampler: lambda * h too large for exact counts");
            exp_neg_ = std::exp(-mean_count);
        }
    }

    double next() {
        if (spec_->is_compound_poisson()) {
            const auto& cp = spec_->cp();
            if (cp.lambda == 0.0) return 0.0;
            // Knuth's product method for the Poisson count.
            int count = 0;
            double prod = rng_->uniform_open();
            while (prod > exp_neg_) {
                ++count;
                prod *= rng_->uniform_open();
            }
            double sum = 0.0;
            for (int i = 0; i < count; ++i) sum += sample_job(cp.jobs, *rng_);
            return sum;
        }
        return sample_stable_increment(spec_->stable(), h_, *rng_);
    }

private:
    const ClassInputSpec* spec_;
    double h_;
    RngStream* rng_;
    double exp_neg_ = 1.0;
};

struct DiscreteResult {
    SystemState final_state;
    std::uint64_t n_steps = 0;
};

// Discrete-time approximation on a grid of step h: increments are deposited
// at step boundaries and the service split follows gps_discrete_step.  The
// observer sees the post-step state via on_step(k, t, q1, q2).
template <class Observer>
DiscreteResult simulate_discrete(const GpsConfig& cfg, const ClassInputSpec& in1,
                                 const ClassInputSpec& in2, double h,
                                 std::uint64_t n_steps, RngStream& rng1,
                                 RngStream& rng2, Observer&& obs,
                                 SystemState init = {}) {
    IncrementSampler s1(in1, h, rng1);
    IncrementSampler s2(in2, h, rng2);
    double q1 = init.q1, q2 = init.q2;
    double t = init.t;
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        auto [n1, n2] = gps_discrete_step(q1, q2, s1.next(), s2.next(), cfg, h);
        q1 = n1;
        q2 = n2;
        t = init.t + static_cast<double>(k + 1) * h;
        obs.on_step(k, t, q1, q2);
    }
    return {SystemState{t, q1, q2}, n_steps};
}

// ---------------------------------------------------------------------------
// Aggregate reference process.
// ---------------------------------------------------------------------------

// Single-server workload at capacity c fed by the merged input, evolved by
// the one-dimensional reflection recursion.  The two-class split never
// changes the total backlog, so this is an independent cross-check on the
// engine: total GPS workload must match this to rounding error whenever the
// total load keeps it stable.
class TotalWorkloadReference {
public:
    explicit TotalWorkloadReference(double c) : c_(c) {
        if (!(c > 0.0)) throw ParameterError("TotalWorkloadReference: c must be > 0");
    }

    void advance(double t) {
        if (t < t_) throw InputError("TotalWorkloadReference: time went backwards");
        w_ = std::max(w_ - c_ * (t - t_), 0.0);
        t_ = t;
    }

    void add(double size) {
        if (!(size >= 0.0))
            throw ParameterError("TotalWorkloadReference: size must be >= 0");
        w_ += size;
    }

    double value() const { return w_; }
    double time() const { return t_; }

private:
    double c_;
    double t_ = 0.0;
    double w_ = 0.0;
};

// Reference workload immediately after each jump of a sorted arrival list.
inline std::vector<double> total_workload_at_jumps(
    std::span<const ClassedArrival> arrivals, double c) {
    TotalWorkloadReference ref(c);
    std::vector<double> out;
    out.reserve(arrivals.size());
    for (const auto& a : arrivals) {
        ref.advance(a.t);  // throws InputError when unsorted
        ref.add(a.size);
        out.push_back(ref.value());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory capture.
// ---------------------------------------------------------------------------

struct JumpRecord {
    double t;
    int cls;
    double size;
};

struct TrajectoryRecorder : NullObserver {
    std::vector<std::pair<int, Segment>> segments;
    std::vector<JumpRecord> jumps;

    void on_segment(int queue, const Segment& seg) {
        segments.emplace_back(queue, seg);
    }
    void on_jump(double t, int cls, double size, const SystemState&) {
        jumps.push_back({t, cls, size});
    }
};

}  // namespace gpsq
