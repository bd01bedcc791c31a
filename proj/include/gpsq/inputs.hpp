#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gpsq/errors.hpp"
#include "gpsq/rng.hpp"

namespace gpsq {

// ---------------------------------------------------------------------------
// Job size distributions for compound Poisson input.
// ---------------------------------------------------------------------------

// Pareto job sizes: P(B > x) = (x_m / x)^alpha for x >= x_m.
// alpha > 1 keeps the mean finite; 1 < alpha < 2 gives infinite variance,
// which is the regime of interest here.
struct Pareto {
    double x_m;
    double alpha;

    Pareto(double x_m_, double alpha_) : x_m(x_m_), alpha(alpha_) {
        if (!(x_m > 0.0)) throw ParameterError("Pareto: x_m must be > 0");
        if (!(alpha > 1.0)) throw ParameterError("Pareto: alpha must be > 1");
    }

    double mean() const { return alpha * x_m / (alpha - 1.0); }
    double quantile(double u) const {  // u in (0,1], inverse of the tail
        return x_m * std::pow(u, -1.0 / alpha);
    }
    double tail(double x) const {
        return x <= x_m ? 1.0 : std::pow(x_m / x, alpha);
    }
};

struct ExponentialJobs {
    double rate;

    explicit ExponentialJobs(double rate_) : rate(rate_) {
        if (!(rate > 0.0)) throw ParameterError("ExponentialJobs: rate must be > 0");
    }

    double mean() const { return 1.0 / rate; }
};

struct DeterministicJobs {
    double size;

    explicit DeterministicJobs(double size_) : size(size_) {
        if (!(size > 0.0)) throw ParameterError("DeterministicJobs: size must be > 0");
    }

    double mean() const { return size; }
};

using JobDistribution = std::variant<Pareto, ExponentialJobs, DeterministicJobs>;

inline double job_mean(const JobDistribution& d) {
    return std::visit([](const auto& j) { return j.mean(); }, d);
}

inline double sample_job(const JobDistribution& d, RngStream& rng) {
    struct Visitor {
        RngStream& rng;
        double operator()(const Pareto& p) const {
            // Inversion on a (0,1] uniform: u = 1 maps to the minimum x_m and
            // u -> 0 produces the far tail, so the tail is never truncated.
            return p.quantile(rng.uniform_open_closed());
        }
        double operator()(const ExponentialJobs& e) const {
            return rng.exponential(e.rate);
        }
        double operator()(const DeterministicJobs& c) const { return c.size; }
    };
    return std::visit(Visitor{rng}, d);
}

// ---------------------------------------------------------------------------
// Input process specifications.
// ---------------------------------------------------------------------------

// Compound Poisson input: jobs arrive at rate lambda, each contributing an
// independent workload jump.  lambda = 0 is allowed and denotes a silent
// class (no input, mean rate 0).
struct CompoundPoissonSpec {
    double lambda;
    JobDistribution jobs;

    CompoundPoissonSpec(double lambda_, JobDistribution jobs_)
        : lambda(lambda_), jobs(std::move(jobs_)) {
        if (!(lambda >= 0.0))
            throw ParameterError("CompoundPoissonSpec: lambda must be >= 0");
    }

    double mean_rate() const { return lambda * job_mean(jobs); }
};

// Totally skewed or two-sided alpha-stable Levy motion with drift mu.
// The marginal at unit time has characteristic exponent
//   -|theta|^alpha (1 - i beta sign(theta) tan(pi alpha / 2)) + i mu theta,
// i.e. scale 1 per unit time.  alpha in (1,2], beta in (-1,1].
struct StableSpec {
    double alpha;
    double beta;
    double mu;

    StableSpec(double alpha_, double beta_, double mu_)
        : alpha(alpha_), beta(beta_), mu(mu_) {
        if (!(alpha > 1.0 && alpha <= 2.0))
            throw ParameterError("StableSpec: alpha must lie in (1,2]");
        if (!(beta > -1.0 && beta <= 1.0))
            throw ParameterError("StableSpec: beta must lie in (-1,1]");
        if (!std::isfinite(mu)) throw ParameterError("StableSpec: mu must be finite");
    }

    double mean_rate() const { return mu; }
    // Only a totally skewed driver (beta = 1, alpha < 2) has no negative
    // jumps; at alpha = 2 the process is Brownian whatever beta says.
    bool spectrally_positive() const { return beta == 1.0 && alpha < 2.0; }
};

class ClassInputSpec {
public:
    ClassInputSpec(CompoundPoissonSpec cp) : input_(std::move(cp)) {}
    ClassInputSpec(StableSpec st) : input_(st) {}

    bool is_compound_poisson() const {
        return std::holds_alternative<CompoundPoissonSpec>(input_);
    }
    bool is_stable() const { return std::holds_alternative<StableSpec>(input_); }

    const CompoundPoissonSpec& cp() const {
        if (!is_compound_poisson())
            throw ParameterError("ClassInputSpec: not compound Poisson");
        return std::get<CompoundPoissonSpec>(input_);
    }
    const StableSpec& stable() const {
        if (!is_stable()) throw ParameterError("ClassInputSpec: not stable");
        return std::get<StableSpec>(input_);
    }

    double mean_rate() const {
        if (is_compound_poisson()) return cp().mean_rate();
        return stable().mean_rate();
    }

private:
    std::variant<CompoundPoissonSpec, StableSpec> input_;
};

// ---------------------------------------------------------------------------
// Power tails of the unit-time marginal.
// ---------------------------------------------------------------------------

// Tail constant of the standard alpha-stable law:
//   P(S > x) ~ c_alpha (1 + beta) x^(-alpha),
//   c_alpha = (1 - alpha) / (2 Gamma(2 - alpha) cos(pi alpha / 2)).
// Both factors change sign across alpha = 1, so the value is positive on
// (1,2); it vanishes at alpha = 2 where the tail becomes Gaussian.
inline double c_alpha(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ParameterError("c_alpha: alpha must lie in (1,2)");
    return (1.0 - alpha) /
           (2.0 * std::tgamma(2.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

// Tail index of the unit-time marginal, when it is regularly varying:
// the Pareto job index for compound Poisson input, alpha for stable input
// with alpha < 2.  Empty for light-tailed cases.
inline std::optional<double> tail_index(const ClassInputSpec& spec) {
    if (spec.is_compound_poisson()) {
        const auto& s = spec.cp();
        if (s.lambda > 0.0 && std::holds_alternative<Pareto>(s.jobs))
            return std::get<Pareto>(s.jobs).alpha;
        return std::nullopt;
    }
    const auto& s = spec.stable();
    if (s.alpha < 2.0) return s.alpha;
    return std::nullopt;
}

// Coefficient k of the power tail P(Z(1) > u) ~ k u^(-alpha):
// lambda x_m^alpha for compound Poisson with Pareto jobs,
// c_alpha (1 + beta) for stable input.
inline std::optional<double> tail_coefficient(const ClassInputSpec& spec) {
    if (spec.is_compound_poisson()) {
        const auto& s = spec.cp();
        if (s.lambda > 0.0 && std::holds_alternative<Pareto>(s.jobs))
            return s.lambda * std::pow(std::get<Pareto>(s.jobs).x_m,
                                       std::get<Pareto>(s.jobs).alpha);
        return std::nullopt;
    }
    const auto& s = spec.stable();
    if (s.alpha < 2.0) return c_alpha(s.alpha) * (1.0 + s.beta);
    return std::nullopt;
}

// Leading-order tail of the unit-time marginal, k u^(-alpha).  Only defined
// for regularly varying inputs.
inline double marginal_tail(const ClassInputSpec& spec, double u) {
    if (!(u > 0.0)) throw ParameterError("marginal_tail: u must be > 0");
    auto a = tail_index(spec);
    auto k = tail_coefficient(spec);
    if (!a || !k)
        throw ParameterError("marginal_tail: input is not regularly varying");
    return *k * std::pow(u, -*a);
}

// ---------------------------------------------------------------------------
// Samplers.
// ---------------------------------------------------------------------------

struct Arrival {
    double t;
    double size;
};

// All arrivals of a compound Poisson stream on [0, horizon), in time order.
inline std::vector<Arrival> cp_arrivals(const CompoundPoissonSpec& spec,
                                        double horizon, RngStream& rng) {
    if (!(horizon >= 0.0)) throw ParameterError("cp_arrivals: horizon must be >= 0");
    std::vector<Arrival> out;
    if (spec.lambda == 0.0) return out;
    out.reserve(static_cast<std::size_t>(spec.lambda * horizon * 1.1) + 16);
    double t = rng.exponential(spec.lambda);
    while (t < horizon) {
        out.push_back({t, sample_job(spec.jobs, rng)});
        t += rng.exponential(spec.lambda);
    }
    return out;
}

// One draw from the standard alpha-stable law S(alpha, beta; 1, 0) in the
// parameterization above, by the Chambers-Mallows-Stuck construction.
// Only the alpha > 1 branch is implemented (all inputs here satisfy it);
// at alpha = 2 the formula reduces exactly to N(0, 2).
inline double sample_standard_stable(double alpha, double beta, RngStream& rng) {
    if (!(alpha > 1.0 && alpha <= 2.0))
        throw ParameterError("sample_standard_stable: alpha must lie in (1,2]");
    if (!(beta > -1.0 && beta <= 1.0))
        throw ParameterError("sample_standard_stable: beta must lie in (-1,1]");

    double phi = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    double w = rng.exponential();

    if (alpha == 2.0) {
        // Degenerate skewness: variance 2 Gaussian.
        return 2.0 * std::sqrt(w) * std::sin(phi);
    }

    double tan_half = std::tan(std::numbers::pi * alpha / 2.0);
    double theta0 = std::atan(beta * tan_half) / alpha;
    double scale = std::pow(1.0 + beta * beta * tan_half * tan_half,
                            1.0 / (2.0 * alpha));
    double s = scale * std::sin(alpha * (phi + theta0)) /
               std::pow(std::cos(phi), 1.0 / alpha) *
               std::pow(std::cos(phi - alpha * (phi + theta0)) / w,
                        (1.0 - alpha) / alpha);
    return s;
}

// Increment of the stable Levy motion over a step of length h:
//   Z(t + h) - Z(t) = mu h + h^(1/alpha) S.
// h = 0 returns 0 without consuming randomness; negative h is an error.
inline double sample_stable_increment(const StableSpec& spec, double h,
                                      RngStream& rng) {
    if (!(h >= 0.0))
        throw ParameterError("sample_stable_increment: h must be >= 0");
    if (h == 0.0) return 0.0;
    return spec.mu * h +
           std::pow(h, 1.0 / spec.alpha) *
               sample_standard_stable(spec.alpha, spec.beta, rng);
}

}  // namespace gpsq
