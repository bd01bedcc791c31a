#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gpsq/errors.hpp"

namespace gpsq {

// Workloads at or below this are treated as empty when deciding which
// drain regime applies.  Breakpoints are computed in closed form, so the
// tolerance only has to absorb accumulated rounding.
inline constexpr double kEmptyTol = 1e-12;

// Hard cap on any single workload; exceeding it aborts the run with a
// diagnostic instead of silently saturating.
inline constexpr double kWorkloadCap = 1e300;

// Two-class processor-sharing discipline on a server of capacity c.
// Class i is guaranteed rate phi_i * c while backlogged; if exactly one
// class is backlogged it receives the full capacity c.
struct GpsConfig {
    double c;
    double phi1;
    double phi2;

    GpsConfig(double c_, double phi1_, double phi2_)
        : c(c_), phi1(phi1_), phi2(phi2_) {
        if (!(c > 0.0)) throw ParameterError("GpsConfig: c must be > 0");
        if (!(phi1 > 0.0 && phi1 < 1.0))
            throw ParameterError("GpsConfig: phi1 must lie in (0,1)");
        if (!(phi2 > 0.0 && phi2 < 1.0))
            throw ParameterError("GpsConfig: phi2 must lie in (0,1)");
        if (std::abs(phi1 + phi2 - 1.0) > 1e-12)
            throw ParameterError("GpsConfig: phi1 + phi2 must equal 1");
    }

    double rate1() const { return phi1 * c; }
    double rate2() const { return phi2 * c; }
};

struct SystemState {
    double t = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
};

// One linear piece of a workload path: q(s) = q0 + slope * (s - t0) on
// [t0, t1].  Slopes come from the alphabet {0, -phi1 c, -phi2 c, -c}.
struct Segment {
    double t0;
    double t1;
    double q0;
    double slope;

    double q_end() const { return q0 + slope * (t1 - t0); }
};

// Cumulative service accounting over a simulated interval: b_i is work
// actually served for class i, cap_i is the capacity the discipline offered
// it (gap = offered minus served = capacity idled while class i was empty).
struct ServiceLedger {
    double served1 = 0.0;
    double served2 = 0.0;
    double offered1 = 0.0;
    double offered2 = 0.0;
};

// Evolve both workloads over dt with no arrivals, emitting each maximal
// linear piece to sink(queue_index, Segment) in time order (queue 1 piece
// first when both change at once).  Regime boundaries (a queue hitting
// zero) are located in closed form, so workloads reach 0 exactly.
template <class SegmentSink>
SystemState drain_until(SystemState s, double dt, const GpsConfig& cfg,
                        ServiceLedger* ledger, SegmentSink&& sink) {
    if (!(dt >= 0.0)) throw ParameterError("drain_until: dt must be >= 0");

    double remaining = dt;
    while (remaining > 0.0) {
        if (s.q1 < kEmptyTol) s.q1 = 0.0;
        if (s.q2 < kEmptyTol) s.q2 = 0.0;

        double r1, r2;  // current drain rates
        double step = remaining;
        bool q1_hits_zero = false, q2_hits_zero = false;

        if (s.q1 > 0.0 && s.q2 > 0.0) {
            r1 = cfg.rate1();
            r2 = cfg.rate2();
            double tau1 = s.q1 / r1;
            double tau2 = s.q2 / r2;
            double tau = std::min(tau1, tau2);
            if (tau <= remaining) {
                step = tau;
                q1_hits_zero = (tau1 <= tau2);
                q2_hits_zero = (tau2 <= tau1);
            }
        } else if (s.q1 > 0.0) {
            r1 = cfg.c;
            r2 = 0.0;
            double tau = s.q1 / cfg.c;
            if (tau <= remaining) {
                step = tau;
                q1_hits_zero = true;
            }
        } else if (s.q2 > 0.0) {
            r1 = 0.0;
            r2 = cfg.c;
            double tau = s.q2 / cfg.c;
            if (tau <= remaining) {
                step = tau;
                q2_hits_zero = true;
            }
        } else {
            // Both empty: flat to the end of the interval.
            sink(1, Segment{s.t, s.t + remaining, 0.0, 0.0});
            sink(2, Segment{s.t, s.t + remaining, 0.0, 0.0});
            if (ledger) {
                ledger->offered1 += cfg.rate1() * remaining;
                ledger->offered2 += cfg.rate2() * remaining;
            }
            s.t += remaining;
            return s;
        }

        sink(1, Segment{s.t, s.t + step, s.q1, -r1});
        sink(2, Segment{s.t, s.t + step, s.q2, -r2});

        if (ledger) {
            ledger->served1 += r1 * step;
            ledger->served2 += r2 * step;
            // A lone backlogged class is offered the full capacity; an empty
            // class is still offered its guaranteed share.
            if (s.q1 > 0.0 && s.q2 > 0.0) {
                ledger->offered1 += cfg.rate1() * step;
                ledger->offered2 += cfg.rate2() * step;
            } else if (s.q1 > 0.0) {
                ledger->offered1 += cfg.c * step;
                ledger->offered2 += cfg.rate2() * step;
            } else {
                ledger->offered1 += cfg.rate1() * step;
                ledger->offered2 += cfg.c * step;
            }
        }

        s.q1 = q1_hits_zero ? 0.0 : s.q1 - r1 * step;
        s.q2 = q2_hits_zero ? 0.0 : s.q2 - r2 * step;
        s.q1 = std::max(s.q1, 0.0);
        s.q2 = std::max(s.q2, 0.0);
        s.t += step;
        remaining -= step;
        // Guard against a stalled loop when remaining is at the resolution
        // limit of t.
        if (step <= 0.0) break;
    }
    return s;
}

// Vector-returning convenience wrapper around drain_until.
inline std::pair<SystemState, std::vector<std::pair<int, Segment>>>
drain_segments(SystemState s, double dt, const GpsConfig& cfg,
               ServiceLedger* ledger = nullptr) {
    std::vector<std::pair<int, Segment>> out;
    SystemState end = drain_until(
        s, dt, cfg, ledger,
        [&out](int queue, const Segment& seg) { out.emplace_back(queue, seg); });
    return {end, std::move(out)};
}

// Instantaneous workload jump for one class.
inline SystemState apply_jump(SystemState s, int cls, double size) {
    if (cls != 1 && cls != 2) throw ParameterError("apply_jump: cls must be 1 or 2");
    if (!(size >= 0.0)) throw ParameterError("apply_jump: size must be >= 0");
    double& q = (cls == 1) ? s.q1 : s.q2;
    q += size;
    if (q > kWorkloadCap)
        throw SimulationOverflowError(
            "workload of class " + std::to_string(cls) + " exceeded " +
            std::to_string(kWorkloadCap) + " at t = " + std::to_string(s.t));
    return s;
}

// One step of the discrete-time approximation: increments dz_i for a step of
// length h are applied as if deposited at the start of the step, then both
// queues drain for h.  Service a class cannot use within the step (because
// it empties) is transferred to the other backlogged class.  Negative dz_i
// (possible for two-sided stable input) may drive the pre-drain content
// negative; it is floored at zero, matching reflection at the origin.
//
// For dz = 0 the rule reproduces drain_until exactly: the deficit transfer
// is precisely the excess capacity a lone backlogged class receives.
inline std::pair<double, double> gps_discrete_step(double q1, double q2,
                                                   double dz1, double dz2,
                                                   const GpsConfig& cfg,
                                                   double h) {
    if (!(h > 0.0)) throw ParameterError("gps_discrete_step: h must be > 0");
    if (!(q1 >= 0.0 && q2 >= 0.0))
        throw ParameterError("gps_discrete_step: workloads must be >= 0");

    double w1 = std::max(q1 + dz1, 0.0);
    double w2 = std::max(q2 + dz2, 0.0);

    // Guaranteed-share pass.
    double t1 = w1 - cfg.rate1() * h;
    double t2 = w2 - cfg.rate2() * h;
    double deficit1 = std::max(-t1, 0.0);  // capacity class 1 left unused
    double deficit2 = std::max(-t2, 0.0);

    // Reassignment pass: each class absorbs the other's unused capacity.
    double n1 = std::max(std::max(t1, 0.0) - deficit2, 0.0);
    double n2 = std::max(std::max(t2, 0.0) - deficit1, 0.0);

    if (n1 > kWorkloadCap || n2 > kWorkloadCap)
        throw SimulationOverflowError("discrete step drove workload past cap");
    return {n1, n2};
}

}  // namespace gpsq
