#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gpsq/engine.hpp"
#include "gpsq/estimation.hpp"

using namespace gpsq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// M/M/1 workload tail for arrival rate lambda, unit-mean jobs, unit drain.
double mm1_tail(double lambda, double u) {
    return lambda * std::exp(-(1.0 - lambda) * u);
}

// Collects every class-1 and class-2 segment in emission order.
struct SegmentLog : NullObserver {
    std::vector<Segment> q1;
    void on_segment(int queue, const Segment& seg) {
        if (queue == 1) q1.push_back(seg);
    }
};

}  // namespace

TEST_CASE("level grids") {
    LevelGrid g({1.0, 2.0, 5.0});
    CHECK(g.size() == 3);
    CHECK(g[2] == 5.0);
    CHECK_THROWS_AS(LevelGrid({}), ParameterError);
    CHECK_THROWS_AS(LevelGrid({0.0, 1.0}), ParameterError);
    CHECK_THROWS_AS(LevelGrid({1.0, 1.0}), ParameterError);
    CHECK_THROWS_AS(LevelGrid({2.0, 1.0}), ParameterError);

    LevelGrid geo = LevelGrid::geometric(5.0, 500.0, 10);
    CHECK(geo.size() == 21);
    CHECK_THAT(geo[0], WithinRel(5.0, 1e-12));
    CHECK(geo[geo.size() - 1] == 500.0);
    for (std::size_t i = 1; i < geo.size(); ++i) CHECK(geo[i] > geo[i - 1]);
    CHECK_THROWS_AS(LevelGrid::geometric(5.0, 5.0, 10), ParameterError);
    CHECK_THROWS_AS(LevelGrid::geometric(5.0, 500.0, 0), ParameterError);
}

TEST_CASE("occupancy of single segments") {
    // declining piece: q(t) = 2 - 0.5 t on [0,4]
    {
        OccupancyAccumulator acc(LevelGrid({1.0}), 0.0, 4.0, 1);
        acc.add_segment({0.0, 4.0, 2.0, -0.5});
        CHECK(acc.time_above(0, 0) == 2.0);
    }
    {
        OccupancyAccumulator acc(LevelGrid({3.0}), 0.0, 4.0, 1);
        acc.add_segment({0.0, 4.0, 2.0, -0.5});
        CHECK(acc.time_above(0, 0) == 0.0);
    }
    // flat piece above the level counts its full length
    {
        OccupancyAccumulator acc(LevelGrid({4.0}), 0.0, 7.0, 1);
        acc.add_segment({0.0, 7.0, 5.0, 0.0});
        CHECK(acc.time_above(0, 0) == 7.0);
    }
    // sitting exactly at the level does not count (strict exceedance)
    {
        OccupancyAccumulator acc(LevelGrid({5.0}), 0.0, 7.0, 1);
        acc.add_segment({0.0, 7.0, 5.0, 0.0});
        CHECK(acc.time_above(0, 0) == 0.0);
    }
    // pieces outside the window are ignored, overlaps are clipped
    {
        OccupancyAccumulator acc(LevelGrid({1.0}), 2.0, 6.0, 1);
        acc.add_segment({0.0, 2.0, 9.0, 0.0});   // before the window
        acc.add_segment({1.0, 3.0, 4.0, 0.0});   // clipped to [2,3]
        CHECK(acc.time_above(0, 0) == 1.0);
        CHECK(acc.covered_time() == 1.0);
    }
    CHECK_THROWS_AS(OccupancyAccumulator(LevelGrid({1.0}), 3.0, 3.0, 1),
                    ParameterError);
    CHECK_THROWS_AS(OccupancyAccumulator(LevelGrid({1.0}), 0.0, 1.0, 0),
                    ParameterError);
}

TEST_CASE("exact occupancy matches a midpoint riemann sum on a fixed path") {
    // Jump times and sizes are chosen so every level crossing lands on a
    // multiple of the sampling step; the midpoint sum is then exact and the
    // two estimators must agree to rounding error.
    GpsConfig cfg(1.0, 0.5, 0.5);
    std::vector<ClassedArrival> arrivals = {
        {1.0, 1, 2.0},  {2.0, 2, 1.5}, {4.0, 1, 1.0},  {7.5, 2, 3.0},
        {9.0, 1, 4.0},  {12.0, 2, 0.5}, {14.5, 1, 1.5}, {16.0, 2, 2.0},
    };
    double horizon = 20.0;
    SegmentLog log;
    VectorArrivalStream stream(arrivals);
    run_event_engine(cfg, stream, horizon, log);

    LevelGrid grid({0.5, 1.0, 2.0});
    OccupancyAccumulator acc(grid, 0.0, horizon, 1);
    for (const auto& seg : log.q1) acc.add_segment(seg);

    double h = 1e-3;
    auto n = static_cast<std::size_t>(std::llround(horizon / h));
    std::vector<double> above(grid.size(), 0.0);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double t = (static_cast<double>(k) + 0.5) * h;
        while (cursor + 1 < log.q1.size() && log.q1[cursor].t1 <= t) ++cursor;
        const Segment& s = log.q1[cursor];
        double q = s.q0 + s.slope * (t - s.t0);
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (q > grid[i]) above[i] += h;
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double exact = acc.time_above(0, i);
        REQUIRE(exact > 0.0);
        CHECK_THAT(above[i], WithinRel(exact, 1e-6));
    }
}

TEST_CASE("time-average estimator recovers the mm1 workload tail") {
    // Class 2 stays empty, so class 1 sees the full server: an M/M/1 queue
    // in workload form with rho = 0.5.
    GpsConfig cfg(1.0, 0.5, 0.5);
    CompoundPoissonSpec cp1(0.5, ExponentialJobs(1.0));
    CompoundPoissonSpec cp2(0.0, DeterministicJobs(1.0));
    double horizon = 2e5;
    LevelGrid grid({1.0, 2.0, 4.0});
    OccupancyAccumulator acc(grid, default_burn_in(horizon), horizon, 32);
    OccupancyObserver obs;
    obs.acc1 = &acc;
    RngStream r1(101, 0), r2(101, 1);
    simulate_event_driven(cfg, cp1, cp2, horizon, r1, r2, obs);

    auto ests = estimate_tail_time_average(acc);
    REQUIRE(ests.size() == grid.size());
    for (const auto& e : ests) {
        double exact = mm1_tail(0.5, e.u);
        double hw = 0.5 * (e.ci_high - e.ci_low);
        REQUIRE(hw > 0.0);
        CHECK(std::abs(e.p_hat - exact) < 3.0 * hw);
        CHECK(e.ci_low <= e.p_hat);
        CHECK(e.p_hat <= e.ci_high);
        CHECK(e.method == EstimateMethod::TimeAverage);
    }
    // tail estimates decrease along the grid
    CHECK(ests[0].p_hat > ests[1].p_hat);
    CHECK(ests[1].p_hat > ests[2].p_hat);

    // an empty window is rejected rather than silently extrapolated
    OccupancyAccumulator starved(grid, 0.0, 10.0, 16);
    CHECK_THROWS_AS(estimate_tail_time_average(starved), EstimationError);
}

TEST_CASE("zero input gives zero occupancy") {
    GpsConfig cfg(1.0, 0.5, 0.5);
    LevelGrid grid({0.5, 1.0});
    OccupancyAccumulator acc(grid, 0.0, 100.0, 10);
    OccupancyObserver obs;
    obs.acc1 = &acc;
    VectorArrivalStream stream(std::vector<ClassedArrival>{});
    run_event_engine(cfg, stream, 100.0, obs);
    auto ests = estimate_tail_time_average(acc);
    for (const auto& e : ests) {
        CHECK(e.p_hat == 0.0);
        CHECK(e.ci_low == 0.0);
    }
}

TEST_CASE("batch means interval") {
    std::vector<double> few(9, 0.5);
    CHECK_THROWS_AS(batch_means_ci(few), EstimationError);
    std::vector<double> flat(16, 0.25);
    auto ci = batch_means_ci(flat);
    CHECK(ci.low == 0.25);
    CHECK(ci.high == 0.25);
    CHECK_THROWS_AS(batch_means_ci(flat, 0.0), ParameterError);
    CHECK_THROWS_AS(batch_means_ci(flat, 1.0), ParameterError);

    // width follows the CLT: z * s / sqrt(n)
    RngStream rng(102, 0);
    std::vector<double> xs(64);
    for (auto& x : xs) x = rng.uniform(0.0, 1.0);
    auto mv = mean_variance(xs);
    auto ci2 = batch_means_ci(xs, 0.95);
    double expect_half =
        normal_quantile(0.975) * std::sqrt(mv.variance / 64.0);
    CHECK_THAT(0.5 * (ci2.high - ci2.low), WithinRel(expect_half, 1e-12));
}

TEST_CASE("interval coverage under replication") {
    // 100 independent runs; the nominal 95% interval should cover the exact
    // tail in at least 90 of them.
    GpsConfig cfg(1.0, 0.5, 0.5);
    CompoundPoissonSpec cp1(0.5, ExponentialJobs(1.0));
    CompoundPoissonSpec cp2(0.0, DeterministicJobs(1.0));
    double horizon = 2e4;
    double exact = mm1_tail(0.5, 1.0);
    int covered = 0;
    for (int rep = 0; rep < 100; ++rep) {
        OccupancyAccumulator acc(LevelGrid({1.0}), 1e3, horizon, 32);
        OccupancyObserver obs;
        obs.acc1 = &acc;
        RngStream r1(103, 2 * rep), r2(103, 2 * rep + 1);
        simulate_event_driven(cfg, cp1, cp2, horizon, r1, r2, obs);
        auto e = estimate_tail_time_average(acc).front();
        if (e.ci_low <= exact && exact <= e.ci_high) ++covered;
    }
    INFO("covered " << covered << " of 100");
    CHECK(covered >= 90);
}

TEST_CASE("regenerative estimator") {
    GpsConfig cfg(1.0, 0.5, 0.5);
    CompoundPoissonSpec cp1(0.5, ExponentialJobs(1.0));
    CompoundPoissonSpec cp2(0.0, DeterministicJobs(1.0));
    double horizon = 2e5;
    LevelGrid grid({1.0, 2.0});

    RegenerativeAccumulator reg(grid);
    OccupancyAccumulator occ(grid, default_burn_in(horizon), horizon, 32);
    struct Both : NullObserver {
        RegenerativeAccumulator* reg;
        OccupancyAccumulator* occ;
        void on_segment(int queue, const Segment& seg) {
            reg->on_segment(queue, seg);
            if (queue == 1) occ->add_segment(seg);
        }
        void on_regeneration(double t) { reg->on_regeneration(t); }
    } obs{{}, &reg, &occ};
    RngStream r1(104, 0), r2(104, 1);
    simulate_event_driven(cfg, cp1, cp2, horizon, r1, r2, obs);

    REQUIRE(reg.completed_cycles() > 1000);
    auto rest = regenerative_estimate(reg);
    auto test = estimate_tail_time_average(occ);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double exact = mm1_tail(0.5, grid[i]);
        double hw = 0.5 * (rest[i].ci_high - rest[i].ci_low);
        CHECK(std::abs(rest[i].p_hat - exact) < 3.0 * hw);
        // the two estimators agree: intervals overlap
        CHECK(rest[i].ci_low <= test[i].ci_high);
        CHECK(test[i].ci_low <= rest[i].ci_high);
        CHECK(rest[i].method == EstimateMethod::Regenerative);
        CHECK(rest[i].n_effective ==
              static_cast<double>(reg.completed_cycles()));
    }

    // too few cycles is an error, not a wide interval
    RegenerativeAccumulator empty(grid);
    CHECK_THROWS_AS(regenerative_estimate(empty), EstimationError);

    // pooling replications adds cycles
    RegenerativeAccumulator a(grid), b(grid);
    RngStream s1(105, 0), s2(105, 1), s3(105, 2), s4(105, 3);
    simulate_event_driven(cfg, cp1, cp2, 1e4, s1, s2, a);
    simulate_event_driven(cfg, cp1, cp2, 1e4, s3, s4, b);
    std::size_t na = a.completed_cycles(), nb = b.completed_cycles();
    a.merge(b);
    CHECK(a.completed_cycles() == na + nb);
    CHECK_NOTHROW(regenerative_estimate(a));
    RegenerativeAccumulator other(LevelGrid({3.0}));
    CHECK_THROWS_AS(a.merge(other), ParameterError);
}

TEST_CASE("empirical tail from samples") {
    std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    auto ests = empirical_tail(xs, LevelGrid({0.5, 2.5}));
    CHECK(ests[0].p_hat == 1.0);
    CHECK(ests[1].p_hat == 0.5);
    for (const auto& e : ests) {
        CHECK(e.ci_low <= e.p_hat);
        CHECK(e.p_hat <= e.ci_high);
        CHECK(e.ci_high <= 1.0);
        CHECK(e.ci_low >= 0.0);
        CHECK(e.n_effective == 4.0);
        CHECK(e.method == EstimateMethod::Empirical);
    }
    // exact hits do not count as exceedances
    auto at = empirical_tail(xs, LevelGrid({4.0}));
    CHECK(at[0].p_hat == 0.0);
    CHECK_THROWS_AS(empirical_tail({}, LevelGrid({1.0})), EstimationError);
}

TEST_CASE("horizon policy") {
    // floor binds: 20 * 100 * log(101) ~ 9230 < 1e4
    CHECK(horizon_for_level(100.0, 1.0, 0.5) == 1e4);
    CHECK_THAT(horizon_for_level(1000.0, 1.0, 0.5),
               WithinRel(20.0 * 1000.0 * std::log1p(1000.0), 1e-14));
    CHECK(horizon_for_level(2000.0, 1.0, 0.5) >
          horizon_for_level(1000.0, 1.0, 0.5));
    // shrinking the drift gap stretches the horizon
    CHECK(horizon_for_level(1000.0, 0.6, 0.5) >
          horizon_for_level(1000.0, 1.0, 0.5));
    CHECK_THROWS_AS(horizon_for_level(0.0, 1.0, 0.5), ParameterError);
    CHECK_THROWS_AS(horizon_for_level(10.0, 0.5, 0.5), UnstableQueueError);

    CHECK(default_burn_in(1e6) == 5e4);
    CHECK(default_burn_in(100.0) == 1e3);
    CHECK_THROWS_AS(default_burn_in(0.0), ParameterError);
}

TEST_CASE("supremum sampling helpers") {
    ClassInputSpec cp(CompoundPoissonSpec(0.3, Pareto(1.0, 1.8)));  // rate 0.675
    RngStream rng(106, 0);
    CHECK_THROWS_AS(single_queue_supremum(cp, 0.5, 10.0, rng),
                    UnstableQueueError);
    auto s = single_queue_supremum(cp, 1.0, 10.0, rng);
    CHECK(s.value >= 0.0);
    CHECK(s.horizon == horizon_for_level(10.0, 1.0, cp.mean_rate()));
}

TEST_CASE("sandwich comparison") {
    auto est = [](double lo, double hi) {
        return TailEstimate{5.0, 0.5 * (lo + hi), lo, hi,
                            EstimateMethod::Empirical, 100.0};
    };
    auto rep = sandwich_check(est(0.010, 0.012), est(0.009, 0.011), 0.9,
                              est(0.013, 0.015), est(0.0005, 0.001));
    CHECK(rep.lower_ok);
    CHECK(rep.upper_ok);
    CHECK(rep.pass);
    CHECK_THAT(rep.lower, WithinRel(0.009 * 0.9, 1e-14));
    CHECK_THAT(rep.upper, WithinRel(0.016, 1e-14));
    CHECK(rep.lower_margin >= 0.0);
    CHECK(rep.upper_margin >= 0.0);

    // a lower bound above the direct interval fails the check
    auto bad = sandwich_check(est(0.010, 0.012), est(0.5, 0.6), 1.0,
                              est(0.013, 0.015), est(0.0005, 0.001));
    CHECK_FALSE(bad.lower_ok);
    CHECK_FALSE(bad.pass);

    CHECK_THROWS_AS(sandwich_check(est(0.01, 0.02), est(0.01, 0.02), 1.5,
                                   est(0.01, 0.02), est(0.01, 0.02)),
                    ParameterError);
}

TEST_CASE("decay assessment") {
    std::vector<double> times, ratios;
    for (double t = 1.0; t <= 1000.0; t *= std::sqrt(10.0)) {
        times.push_back(t);
        ratios.push_back(1.0 / t);
    }
    auto rep = assess_decay(times, ratios);
    CHECK(rep.decaying);
    CHECK(rep.max_ratio == 1.0);

    std::vector<double> flat(times.size(), 0.2);
    auto rep2 = assess_decay(times, flat);
    CHECK_FALSE(rep2.decaying);

    CHECK_THROWS_AS(assess_decay(times, std::vector<double>{1.0}),
                    EstimationError);
    CHECK_THROWS_AS(assess_decay(std::vector<double>{}, std::vector<double>{}),
                    EstimationError);
    CHECK_THROWS_AS(assess_decay(times, ratios, 1.0), ParameterError);
    std::vector<double> narrow{1.0, 2.0}, nr{1.0, 0.5};
    CHECK_THROWS_AS(assess_decay(narrow, nr), EstimationError);
}

TEST_CASE("drift diagnostic") {
    // A busy but stable queue: R(t) stays O(1), so R(t)/t falls a decade
    // per decade.  Ten samples per decade keep the decade means clear of
    // single-sample noise.
    ClassInputSpec stable_load(CompoundPoissonSpec(0.8, ExponentialJobs(1.0)));
    RngStream rng(107, 0);
    auto rep = drift_diagnostic(stable_load, 0.9, 100.0, 1e5, 10, rng);
    CHECK(rep.decaying);
    CHECK(rep.ratios.back() < 0.01);
    CHECK(rep.times.back() == 1e5);

    // drain below the mean rate: ratio converges to the positive drift
    ClassInputSpec heavy(CompoundPoissonSpec(2.0, DeterministicJobs(0.25)));
    RngStream rng2(107, 1);
    auto rep2 = drift_diagnostic(heavy, 0.3, 100.0, 1e5, 2, rng2);
    CHECK_FALSE(rep2.decaying);
    CHECK(rep2.max_ratio > 0.15);
    CHECK_THAT(rep2.ratios.back(), WithinAbs(0.2, 0.05));

    RngStream rng3(107, 2);
    CHECK_THROWS_AS(drift_diagnostic(heavy, 0.3, 100.0, 50.0, 2, rng3),
                    EstimationError);
    CHECK_THROWS_AS(drift_diagnostic(heavy, 0.0, 100.0, 1e5, 2, rng3),
                    ParameterError);
    CHECK_THROWS_AS(drift_diagnostic(heavy, 0.3, 0.0, 1e5, 2, rng3),
                    ParameterError);
    CHECK_THROWS_AS(drift_diagnostic(heavy, 0.3, 100.0, 1e5, 0, rng3),
                    ParameterError);
}
