#pragma once

#include <cmath>
#include <string>

#include "gpsq/errors.hpp"
#include "gpsq/gps.hpp"
#include "gpsq/inputs.hpp"

namespace gpsq {

// ---------------------------------------------------------------------------
// Model summary: the six numbers the tail theory runs on.
// ---------------------------------------------------------------------------

// Both unit-time marginals are assumed regularly varying,
// P(Z_i(1) > u) ~ k_i u^(-alpha_i), with mean rates mu_i.  beta2 and the
// spectral-positivity flag matter only for the regime where the class-2 tail
// drives the answer.
struct ModelSummary {
    double mu1, mu2;
    double alpha1, alpha2;
    double k1, k2;
    double beta2;
    bool spectrally_positive2;

    ModelSummary(double mu1_, double mu2_, double alpha1_, double alpha2_,
                 double k1_, double k2_, double beta2_ = 1.0,
                 bool spectrally_positive2_ = true)
        : mu1(mu1_), mu2(mu2_), alpha1(alpha1_), alpha2(alpha2_), k1(k1_),
          k2(k2_), beta2(beta2_), spectrally_positive2(spectrally_positive2_) {
        if (!(std::isfinite(mu1) && std::isfinite(mu2)))
            throw ParameterError("ModelSummary: mean rates must be finite");
        if (!(alpha1 > 1.0 && alpha2 > 1.0))
            throw ParameterError("ModelSummary: tail indices must be > 1");
        if (!(k1 > 0.0 && k2 > 0.0))
            throw ParameterError("ModelSummary: tail coefficients must be > 0");
        if (!(beta2 > -1.0 && beta2 <= 1.0))
            throw ParameterError("ModelSummary: beta2 must lie in (-1,1]");
    }

    double mu() const { return mu1 + mu2; }

    static ModelSummary from_specs(const ClassInputSpec& in1,
                                   const ClassInputSpec& in2) {
        auto a1 = tail_index(in1), a2 = tail_index(in2);
        auto c1 = tail_coefficient(in1), c2 = tail_coefficient(in2);
        if (!a1 || !c1)
            throw ParameterError(
                "ModelSummary: class-1 input has no regularly varying tail");
        if (!a2 || !c2)
            throw ParameterError(
                "ModelSummary: class-2 input has no regularly varying tail");
        double beta2 = in2.is_stable() ? in2.stable().beta : 1.0;
        bool sp2 = in2.is_compound_poisson() || in2.stable().spectrally_positive();
        return ModelSummary(in1.mean_rate(), in2.mean_rate(), *a1, *a2, *c1, *c2,
                            beta2, sp2);
    }
};

// ---------------------------------------------------------------------------
// Regimes.
// ---------------------------------------------------------------------------

enum class Scenario {
    SecondOverloaded = 1,          // mu2 > phi2 c
    FirstHeavierSecondStable = 2,  // mu2 < phi2 c, alpha1 < alpha2
    SecondHeavierBothStable = 3,   // mu_i < phi_i c, alpha2 < alpha1
    FirstOverloadedSecondHeavier = 4,  // mu1 > phi1 c, alpha2 < alpha1
};

inline const char* scenario_label(Scenario s) {
    switch (s) {
        case Scenario::SecondOverloaded: return "S1";
        case Scenario::FirstHeavierSecondStable: return "S2";
        case Scenario::SecondHeavierBothStable: return "S3";
        case Scenario::FirstOverloadedSecondHeavier: return "S4";
    }
    throw ParameterError("scenario_label: invalid scenario");
}

inline bool is_integer_index(double alpha) {
    return std::floor(alpha) == alpha;
}

// Assign the regime dictated by the load and tail-index inequalities.
// Boundary parameterizations raise instead of being rounded into a
// neighboring regime: nothing is proved there.
inline Scenario classify(const GpsConfig& cfg, const ModelSummary& s) {
    if (!(s.mu() < cfg.c))
        throw UnstableQueueError(
            "classify: total mean rate must be below capacity");

    if (s.mu2 > cfg.rate2()) return Scenario::SecondOverloaded;
    if (s.mu2 == cfg.rate2())
        throw BoundaryError("classify: mu2 equals phi2 c");

    if (s.alpha1 == s.alpha2)
        throw EqualIndexError("classify: alpha1 equals alpha2");
    if (s.alpha1 < s.alpha2) return Scenario::FirstHeavierSecondStable;

    // Class 2 is the heavier; the class-1 load decides the remaining split.
    if (s.mu1 < cfg.rate1()) return Scenario::SecondHeavierBothStable;
    if (s.mu1 == cfg.rate1())
        throw BoundaryError("classify: mu1 equals phi1 c");

    if (!s.spectrally_positive2)
        throw UnsupportedScenarioError(
            "classify: overloaded-first regime requires spectrally positive "
            "class-2 input");
    if (is_integer_index(s.alpha2))
        throw UnsupportedScenarioError(
            "classify: overloaded-first regime requires non-integer alpha2");
    return Scenario::FirstOverloadedSecondHeavier;
}

// ---------------------------------------------------------------------------
// Closed-form tail asymptotes f1(u) for P(Q1 > u).
// ---------------------------------------------------------------------------

// The four regime formulas.  Re-validates the regime hypotheses so a
// mismatched scenario/summary pair fails loudly instead of producing a
// number from the wrong formula.
inline double tail_asymptote_q1(Scenario scenario, const GpsConfig& cfg,
                                const ModelSummary& s, double u) {
    if (!(u > 0.0)) throw ParameterError("tail_asymptote_q1: u must be > 0");
    if (!(s.mu() < cfg.c))
        throw UnstableQueueError(
            "tail_asymptote_q1: total mean rate must be below capacity");

    switch (scenario) {
        case Scenario::SecondOverloaded:
            if (!(s.mu2 > cfg.rate2()))
                throw ScenarioError("tail_asymptote_q1: regime needs mu2 > phi2 c");
            return s.k1 / ((cfg.rate1() - s.mu1) * (s.alpha1 - 1.0)) *
                   std::pow(u, 1.0 - s.alpha1);

        case Scenario::FirstHeavierSecondStable:
            if (!(s.mu2 < cfg.rate2() && s.alpha1 < s.alpha2))
                throw ScenarioError(
                    "tail_asymptote_q1: regime needs mu2 < phi2 c and alpha1 < alpha2");
            return s.k1 / ((cfg.c - s.mu()) * (s.alpha1 - 1.0)) *
                   std::pow(u, 1.0 - s.alpha1);

        case Scenario::SecondHeavierBothStable:
            if (!(s.mu1 < cfg.rate1() && s.mu2 < cfg.rate2() &&
                  s.alpha2 < s.alpha1))
                throw ScenarioError(
                    "tail_asymptote_q1: regime needs both queues underloaded and "
                    "alpha2 < alpha1");
            return s.k1 / ((cfg.c - s.mu()) * (s.alpha1 - 1.0)) *
                   std::pow(u, 1.0 - s.alpha1);

        case Scenario::FirstOverloadedSecondHeavier:
            if (!(s.mu1 > cfg.rate1() && s.alpha2 < s.alpha1))
                throw ScenarioError(
                    "tail_asymptote_q1: regime needs mu1 > phi1 c and alpha2 < alpha1");
            if (!s.spectrally_positive2)
                throw ScenarioError(
                    "tail_asymptote_q1: regime needs spectrally positive class-2 input");
            if (is_integer_index(s.alpha2))
                throw ScenarioError(
                    "tail_asymptote_q1: regime needs non-integer alpha2");
            return std::pow((s.mu1 - cfg.rate1()) / (cfg.rate2() - s.mu2),
                            s.alpha2 - 1.0) *
                   s.k2 / ((cfg.c - s.mu()) * (s.alpha2 - 1.0)) *
                   std::pow(u, 1.0 - s.alpha2);
    }
    throw ParameterError("tail_asymptote_q1: invalid scenario");
}

// ---------------------------------------------------------------------------
// Specialized evaluators for the two input families.  Separate code paths
// from tail_asymptote_q1 on purpose: agreement between them is a test.
// ---------------------------------------------------------------------------

namespace detail {

struct CpTail {
    double lambda;
    double l;      // job tail constant: P(B > x) ~ l x^(-alpha)
    double alpha;
};

inline CpTail cp_tail_of(const CompoundPoissonSpec& spec, const char* who) {
    if (!(spec.lambda > 0.0) || !std::holds_alternative<Pareto>(spec.jobs))
        throw ParameterError(std::string(who) +
                             ": requires lambda > 0 and Pareto jobs");
    const auto& p = std::get<Pareto>(spec.jobs);
    return {spec.lambda, std::pow(p.x_m, p.alpha), p.alpha};
}

// Shared hypothesis guards for the four closed-form cases; mirrors classify.
inline void check_case(int case_no, const GpsConfig& cfg, double mu1,
                       double mu2, double alpha1, double alpha2,
                       const char* who) {
    double mu = mu1 + mu2;
    if (!(mu < cfg.c))
        throw UnstableQueueError(std::string(who) +
                                 ": total mean rate must be below capacity");
    switch (case_no) {
        case 1:
            if (mu2 == cfg.rate2())
                throw BoundaryError(std::string(who) + ": mu2 equals phi2 c");
            if (!(mu2 > cfg.rate2()))
                throw ScenarioError(std::string(who) + ": case 1 needs mu2 > phi2 c");
            return;
        case 2:
            if (mu2 == cfg.rate2())
                throw BoundaryError(std::string(who) + ": mu2 equals phi2 c");
            if (alpha1 == alpha2)
                throw EqualIndexError(std::string(who) + ": alpha1 equals alpha2");
            if (!(mu2 < cfg.rate2() && alpha1 < alpha2))
                throw ScenarioError(std::string(who) +
                                    ": case 2 needs mu2 < phi2 c and alpha1 < alpha2");
            return;
        case 3:
            if (mu2 == cfg.rate2())
                throw BoundaryError(std::string(who) + ": mu2 equals phi2 c");
            if (mu1 == cfg.rate1())
                throw BoundaryError(std::string(who) + ": mu1 equals phi1 c");
            if (alpha1 == alpha2)
                throw EqualIndexError(std::string(who) + ": alpha1 equals alpha2");
            if (!(mu2 < cfg.rate2() && mu1 < cfg.rate1() && alpha2 < alpha1))
                throw ScenarioError(std::string(who) +
                                    ": case 3 needs both queues underloaded and "
                                    "alpha2 < alpha1");
            return;
        case 4:
            if (mu1 == cfg.rate1())
                throw BoundaryError(std::string(who) + ": mu1 equals phi1 c");
            if (alpha1 == alpha2)
                throw EqualIndexError(std::string(who) + ": alpha1 equals alpha2");
            if (!(mu1 > cfg.rate1() && alpha2 < alpha1))
                throw ScenarioError(std::string(who) +
                                    ": case 4 needs mu1 > phi1 c and alpha2 < alpha1");
            return;
        default:
            throw ParameterError(std::string(who) + ": case must be 1..4");
    }
}

}  // namespace detail

// Compound Poisson specialization: both classes Poisson-timed Pareto jumps,
// job tails P(B_i > x) ~ l_i x^(-alpha_i) with l_i = x_m^alpha_i.
// Case 4 does not reject integer alpha2; the compound Poisson statement
// carries no such hypothesis (flagged upstream as a warning instead).
inline double cp_asymptote(int case_no, const GpsConfig& cfg,
                           const CompoundPoissonSpec& in1,
                           const CompoundPoissonSpec& in2, double u) {
    if (!(u > 0.0)) throw ParameterError("cp_asymptote: u must be > 0");
    auto t1 = detail::cp_tail_of(in1, "cp_asymptote (class 1)");
    auto t2 = detail::cp_tail_of(in2, "cp_asymptote (class 2)");
    double mu1 = in1.mean_rate(), mu2 = in2.mean_rate(), mu = mu1 + mu2;
    detail::check_case(case_no, cfg, mu1, mu2, t1.alpha, t2.alpha,
                       "cp_asymptote");

    switch (case_no) {
        case 1:
            return t1.lambda * t1.l / (cfg.rate1() - mu1) / (t1.alpha - 1.0) *
                   std::pow(u, 1.0 - t1.alpha);
        case 2:
        case 3:
            return t1.lambda * t1.l / (cfg.c - mu) / (t1.alpha - 1.0) *
                   std::pow(u, 1.0 - t1.alpha);
        default:
            return t2.lambda * t2.l / (cfg.c - mu) *
                   std::pow((mu1 - cfg.rate1()) / (cfg.rate2() - mu2),
                            t2.alpha - 1.0) /
                   (t2.alpha - 1.0) * std::pow(u, 1.0 - t2.alpha);
    }
}

// Stable specialization: k_i = c_alpha_i (1 + beta_i); case 4 requires a
// totally skewed class-2 driver (beta2 = 1), giving the 2 c_alpha2 factor.
inline double stable_asymptote(int case_no, const GpsConfig& cfg,
                               const StableSpec& in1, const StableSpec& in2,
                               double u) {
    if (!(u > 0.0)) throw ParameterError("stable_asymptote: u must be > 0");
    if (!(in1.alpha < 2.0 && in2.alpha < 2.0))
        throw ParameterError(
            "stable_asymptote: requires alpha < 2 (regularly varying tails)");
    detail::check_case(case_no, cfg, in1.mu, in2.mu, in1.alpha, in2.alpha,
                       "stable_asymptote");
    double mu = in1.mu + in2.mu;

    switch (case_no) {
        case 1:
            return c_alpha(in1.alpha) * (1.0 + in1.beta) /
                   ((cfg.rate1() - in1.mu) * (in1.alpha - 1.0)) *
                   std::pow(u, 1.0 - in1.alpha);
        case 2:
        case 3:
            return c_alpha(in1.alpha) * (1.0 + in1.beta) /
                   ((cfg.c - mu) * (in1.alpha - 1.0)) *
                   std::pow(u, 1.0 - in1.alpha);
        default:
            if (in2.beta != 1.0)
                throw ScenarioError(
                    "stable_asymptote: case 4 needs beta2 = 1 (spectrally positive)");
            return 2.0 * c_alpha(in2.alpha) / ((cfg.c - mu) * (in2.alpha - 1.0)) *
                   std::pow((in1.mu - cfg.rate1()) / (cfg.rate2() - in2.mu),
                            in2.alpha - 1.0) *
                   std::pow(u, 1.0 - in2.alpha);
    }
}

// ---------------------------------------------------------------------------
// Bounds and auxiliary asymptotes.
// ---------------------------------------------------------------------------

// Two-sided stable class 2 in the overloaded-first regime: coefficients
// (multiplying u^(1 - alpha2)) that bracket the tail when total skewness is
// not available.  Both use (phi2 c) where the exact constant has
// (phi2 c - mu2), which is what keeps them bounds rather than asymptotics.
struct TailCoefficientBounds {
    double lower_coefficient;
    double upper_coefficient;
};

inline TailCoefficientBounds tail_coefficient_bounds(const GpsConfig& cfg, const ModelSummary& s) {
    if (!(s.mu() < cfg.c))
        throw UnstableQueueError(
            "tail_coefficient_bounds: total mean rate must be below capacity");
    if (!(s.mu1 > cfg.rate1()))
        throw ScenarioError("tail_coefficient_bounds: needs mu1 > phi1 c");
    if (!(s.alpha2 < s.alpha1))
        throw ScenarioError("tail_coefficient_bounds: needs alpha2 < alpha1");

    double ratio = std::pow((s.mu1 - cfg.rate1()) / cfg.rate2(), s.alpha2 - 1.0);
    double base = s.k2 / ((cfg.c - s.mu()) * (s.alpha2 - 1.0));
    return {base * ratio, (base + s.k2 / cfg.rate2()) * ratio};
}

// Tail of an isolated queue with drain d and input tail k u^(-alpha):
// k / ((d - mu)(alpha - 1)) u^(1 - alpha).
inline double isolated_tail_asymptote(double u, double d, double mu,
                                      double alpha, double k) {
    if (!(u > 0.0)) throw ParameterError("isolated_tail_asymptote: u must be > 0");
    if (!(alpha > 1.0))
        throw ParameterError("isolated_tail_asymptote: alpha must be > 1");
    if (!(k > 0.0)) throw ParameterError("isolated_tail_asymptote: k must be > 0");
    if (!(d > mu))
        throw UnstableQueueError(
            "isolated_tail_asymptote: drain must exceed the mean rate");
    return k / ((d - mu) * (alpha - 1.0)) * std::pow(u, 1.0 - alpha);
}

// Tail of the supremum over a fixed window [0, T]: to leading order it is
// the one-jump probability, independent of both T and the drain rate, and
// equals the unit-time marginal tail.
inline double finite_horizon_tail(double u, const ClassInputSpec& spec) {
    return marginal_tail(spec, u);
}

// Tail asymptote of the tandem difference functional with drain slack eps:
//   ((mu1 - phi1 c + eps)/(phi2 c - mu2))^(alpha2-1)
//     * k2 / ((c - mu - eps)(alpha2 - 1)) * u^(1 - alpha2).
// eps = 0 reproduces the overloaded-first regime constant.
inline double tandem_tail(double u, double eps, const GpsConfig& cfg,
                          const ModelSummary& s) {
    if (!(u > 0.0)) throw ParameterError("tandem_tail: u must be > 0");
    if (!(s.mu() < cfg.c))
        throw UnstableQueueError("tandem_tail: total mean rate must be below capacity");
    if (!(s.mu1 > cfg.rate1()))
        throw ScenarioError("tandem_tail: needs mu1 > phi1 c");
    if (!s.spectrally_positive2)
        throw ScenarioError("tandem_tail: needs spectrally positive class-2 input");
    if (is_integer_index(s.alpha2))
        throw ScenarioError("tandem_tail: needs non-integer alpha2");
    if (!(std::abs(eps) < std::min(cfg.c - s.mu(), s.mu1 - cfg.rate1())))
        throw ScenarioError(
            "tandem_tail: |eps| must be below min(c - mu, mu1 - phi1 c)");
    return std::pow((s.mu1 - cfg.rate1() + eps) / (cfg.rate2() - s.mu2),
                    s.alpha2 - 1.0) *
           s.k2 / ((cfg.c - s.mu() - eps) * (s.alpha2 - 1.0)) *
           std::pow(u, 1.0 - s.alpha2);
}

}  // namespace gpsq
