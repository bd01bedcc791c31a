#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "gpsq/inputs.hpp"
#include "gpsq/stats.hpp"

using namespace gpsq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("pareto parameter validation") {
    CHECK_THROWS_AS(Pareto(0.0, 1.5), ParameterError);
    CHECK_THROWS_AS(Pareto(1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(Pareto(1.0, 0.5), ParameterError);
    CHECK_NOTHROW(Pareto(2.0, 1.0001));
}

TEST_CASE("pareto quantile and moments") {
    Pareto p(1.0, 1.5);
    // 0.25^(-2/3)
    CHECK_THAT(p.quantile(0.25), WithinRel(2.5198420997897463, 1e-13));
    CHECK(p.quantile(1.0) == 1.0);
    CHECK_THAT(p.mean(), WithinRel(3.0, 1e-15));
    CHECK_THAT(p.tail(2.0), WithinRel(std::pow(2.0, -1.5), 1e-14));
    CHECK(p.tail(0.5) == 1.0);
}

TEST_CASE("job distribution means") {
    CHECK_THAT(job_mean(JobDistribution(ExponentialJobs(2.0))),
               WithinRel(0.5, 1e-15));
    CHECK(job_mean(JobDistribution(DeterministicJobs(0.25))) == 0.25);
    CHECK_THAT(job_mean(JobDistribution(Pareto(1.0, 1.5))),
               WithinRel(3.0, 1e-15));
}

TEST_CASE("mean rates") {
    CHECK_THAT(CompoundPoissonSpec(0.1, Pareto(1.0, 1.5)).mean_rate(),
               WithinRel(0.3, 1e-14));
    CHECK_THAT(CompoundPoissonSpec(2.0, DeterministicJobs(0.25)).mean_rate(),
               WithinRel(0.5, 1e-15));
    CHECK(StableSpec(1.7, 0.0, 0.4).mean_rate() == 0.4);
}

TEST_CASE("rng streams reproduce and separate") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool all_equal = true, any_differ = false;
    for (int i = 0; i < 100; ++i) {
        double x = a.uniform_open_closed();
        double y = b.uniform_open_closed();
        double z = c.uniform_open_closed();
        all_equal = all_equal && (x == y);
        any_differ = any_differ || (x != z);
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("compound poisson arrival stream") {
    CompoundPoissonSpec spec(0.1, Pareto(1.0, 1.5));
    RngStream rng(11, 0);
    auto arr = cp_arrivals(spec, 1e6, rng);

    // Poisson count: relative error below 1% at this scale.
    CHECK_THAT((double)arr.size() / 1e5, WithinAbs(1.0, 0.01));

    bool sorted = true, in_window = true;
    double mean_size = 0.0;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (i > 0 && !(arr[i].t > arr[i - 1].t)) sorted = false;
        if (!(arr[i].t > 0.0 && arr[i].t < 1e6)) in_window = false;
        mean_size += arr[i].size;
    }
    mean_size /= (double)arr.size();
    CHECK(sorted);
    CHECK(in_window);

    // Infinite-variance jobs make the sample mean too loose to pin down,
    // so the mean check uses a finite-variance job law instead.
    CompoundPoissonSpec light(0.1, Pareto(1.0, 2.5));
    RngStream rng_light(11, 1);
    auto arr2 = cp_arrivals(light, 1e6, rng_light);
    double mean2 = 0.0;
    for (const auto& a : arr2) mean2 += a.size;
    mean2 /= (double)arr2.size();
    CHECK_THAT(mean2, WithinAbs(2.5 / 1.5, 0.05));

    CHECK(cp_arrivals(spec, 0.0, rng).empty());
    CHECK_THROWS_AS(cp_arrivals(spec, -1.0, rng), ParameterError);
}

TEST_CASE("pareto sampler passes a KS test") {
    Pareto p(1.0, 1.5);
    RngStream rng(12, 0);
    std::size_t n = 1000000;
    std::vector<double> xs;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        xs.push_back(sample_job(JobDistribution(p), rng));
    double d = ks_statistic(xs, [&](double x) { return 1.0 - p.tail(x); });
    double scale = std::sqrt((double)n) + 0.12 + 0.11 / std::sqrt((double)n);
    CHECK(d < ks_critical(0.01) / scale);
}

TEST_CASE("stable increment edge cases and self-similarity") {
    StableSpec spec(1.5, 0.5, 0.3);
    RngStream a(13, 0), b(13, 0);
    CHECK(sample_stable_increment(spec, 0.0, a) == 0.0);
    CHECK_THROWS_AS(sample_stable_increment(spec, -0.1, a), ParameterError);

    // The step-h increment is exactly mu h + h^(1/alpha) times a standard
    // draw from the same stream state.
    double h = 0.0625;
    double inc = sample_stable_increment(spec, h, a);
    double std_draw = sample_standard_stable(1.5, 0.5, b);
    CHECK_THAT(inc, WithinRel(0.3 * h + std::pow(h, 1.0 / 1.5) * std_draw,
                              1e-12));
}

TEST_CASE("stable sampler matches the characteristic exponent") {
    double alpha = 1.5, beta = 0.5;
    RngStream rng(14, 0);
    std::size_t n = 1000000;
    double sc[3] = {0, 0, 0}, ss[3] = {0, 0, 0};
    double thetas[3] = {0.5, 1.0, 2.0};
    for (std::size_t i = 0; i < n; ++i) {
        double z = sample_standard_stable(alpha, beta, rng);
        for (int j = 0; j < 3; ++j) {
            sc[j] += std::cos(thetas[j] * z);
            ss[j] += std::sin(thetas[j] * z);
        }
    }
    for (int j = 0; j < 3; ++j) {
        double psi = std::pow(thetas[j], alpha);
        double arg = beta * psi * std::tan(M_PI * alpha / 2.0);
        double re = std::exp(-psi) * std::cos(arg);
        double im = std::exp(-psi) * std::sin(arg);
        CHECK_THAT(sc[j] / (double)n, WithinAbs(re, 0.01));
        CHECK_THAT(ss[j] / (double)n, WithinAbs(im, 0.01));
    }
}

TEST_CASE("stable spec validation and flags") {
    CHECK_THROWS_AS(StableSpec(1.0, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(StableSpec(2.1, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(StableSpec(1.5, 1.5, 0.0), ParameterError);
    CHECK_THROWS_AS(StableSpec(1.5, -1.0, 0.0), ParameterError);
    CHECK(StableSpec(1.5, 1.0, 0.0).spectrally_positive());
    CHECK_FALSE(StableSpec(1.5, 0.5, 0.0).spectrally_positive());
    CHECK_FALSE(StableSpec(2.0, 1.0, 0.0).spectrally_positive());
}

TEST_CASE("tail constant c_alpha") {
    CHECK_THAT(c_alpha(1.5), WithinRel(0.19947114020071634, 1e-12));
    CHECK_THAT(c_alpha(1.2), WithinRel(0.27795785826020676, 1e-12));
    CHECK_THAT(c_alpha(1.7), WithinRel(0.13130707825516737, 1e-12));
    CHECK(c_alpha(1.999) < c_alpha(1.9));  // vanishes toward 2
    CHECK_THROWS_AS(c_alpha(1.0), ParameterError);
    CHECK_THROWS_AS(c_alpha(2.0), ParameterError);
}

TEST_CASE("regular-variation summaries of class inputs") {
    ClassInputSpec cp_pareto(CompoundPoissonSpec(0.1, Pareto(1.0, 1.5)));
    CHECK(tail_index(cp_pareto).value() == 1.5);
    CHECK_THAT(tail_coefficient(cp_pareto).value(), WithinRel(0.1, 1e-14));

    ClassInputSpec cp_exp(CompoundPoissonSpec(0.1, ExponentialJobs(1.0)));
    CHECK_FALSE(tail_index(cp_exp).has_value());
    CHECK_FALSE(tail_coefficient(cp_exp).has_value());

    ClassInputSpec st(StableSpec(1.5, 1.0, 0.2));
    CHECK(tail_index(st).value() == 1.5);
    CHECK_THAT(tail_coefficient(st).value(),
               WithinRel(0.39894228040143268, 1e-12));  // 2 c_{1.5}
}

TEST_CASE("marginal tail values") {
    ClassInputSpec cp(CompoundPoissonSpec(0.1, Pareto(1.0, 1.5)));
    CHECK_THAT(marginal_tail(cp, 100.0), WithinRel(1e-4, 1e-12));
    CHECK(marginal_tail(cp, 50.0) > marginal_tail(cp, 100.0));

    ClassInputSpec st(StableSpec(1.5, 1.0, 0.0));
    CHECK_THAT(marginal_tail(st, 1.0), WithinRel(0.39894228040143268, 1e-12));
}
