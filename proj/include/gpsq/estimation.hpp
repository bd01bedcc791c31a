#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gpsq/engine.hpp"
#include "gpsq/errors.hpp"
#include "gpsq/gps.hpp"
#include "gpsq/stats.hpp"
#include "gpsq/suprema.hpp"

namespace gpsq {

// ---------------------------------------------------------------------------
// Level grids.
// ---------------------------------------------------------------------------

class LevelGrid {
public:
    explicit LevelGrid(std::vector<double> levels) : levels_(std::move(levels)) {
        if (levels_.empty()) throw ParameterError("LevelGrid: empty grid");
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            if (!(levels_[i] > 0.0))
                throw ParameterError("LevelGrid: levels must be positive");
            if (i > 0 && !(levels_[i] > levels_[i - 1]))
                throw ParameterError("LevelGrid: levels must be strictly increasing");
        }
    }

    // Geometric grid from lo to hi inclusive, points_per_decade steps per
    // factor of 10.
    static LevelGrid geometric(double lo, double hi, int points_per_decade = 10) {
        if (!(lo > 0.0 && hi > lo))
            throw ParameterError("LevelGrid: need 0 < lo < hi");
        if (points_per_decade < 1)
            throw ParameterError("LevelGrid: points_per_decade must be >= 1");
        std::vector<double> levels;
        double log_lo = std::log10(lo), log_hi = std::log10(hi);
        int n = static_cast<int>(std::round((log_hi - log_lo) * points_per_decade));
        n = std::max(n, 1);
        for (int i = 0; i <= n; ++i) {
            double x = std::pow(10.0, log_lo + (log_hi - log_lo) * i / n);
            if (!levels.empty() && !(x > levels.back())) continue;
            levels.push_back(x);
        }
        levels.back() = hi;
        return LevelGrid(std::move(levels));
    }

    const std::vector<double>& levels() const { return levels_; }
    std::size_t size() const { return levels_.size(); }
    double operator[](std::size_t i) const { return levels_[i]; }

    bool operator==(const LevelGrid& other) const {
        return levels_ == other.levels_;
    }

private:
    std::vector<double> levels_;
};

// ---------------------------------------------------------------------------
// Tail estimates.
// ---------------------------------------------------------------------------

enum class EstimateMethod { TimeAverage, Regenerative, Empirical };

inline const char* method_label(EstimateMethod m) {
    switch (m) {
        case EstimateMethod::TimeAverage: return "time-average";
        case EstimateMethod::Regenerative: return "regenerative";
        case EstimateMethod::Empirical: return "empirical";
    }
    throw ParameterError("method_label: invalid method");
}

struct TailEstimate {
    double u;
    double p_hat;
    double ci_low;
    double ci_high;
    EstimateMethod method;
    double n_effective;  // observed time, cycles, or samples
};

// Normal-approximation interval from a series of batch averages.
inline Interval batch_means_ci(std::span<const double> batch_means,
                               double confidence = 0.95) {
    if (batch_means.size() < 10)
        throw EstimationError("batch_means_ci: need at least 10 batches");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ParameterError("batch_means_ci: confidence must lie in (0,1)");
    MeanVar mv = mean_variance(batch_means);
    double z = normal_quantile(0.5 * (1.0 + confidence));
    double half = z * std::sqrt(mv.variance / static_cast<double>(mv.n));
    return {mv.mean - half, mv.mean + half};
}

// ---------------------------------------------------------------------------
// Exact-occupancy accumulation over piecewise-linear workload paths.
// ---------------------------------------------------------------------------

// Accumulates, per level, the exact time the workload spends above the level
// inside the window [window_begin, window_end], split into equal batches for
// the batch-means interval.  Feed it every emitted segment of one queue; the
// linear pieces make the above-level sojourn a closed-form quantity, so the
// estimator has no sampling-in-time bias.
class OccupancyAccumulator {
public:
    OccupancyAccumulator(LevelGrid grid, double window_begin, double window_end,
                         int n_batches = 32)
        : grid_(std::move(grid)),
          begin_(window_begin),
          end_(window_end),
          n_batches_(n_batches) {
        if (!(end_ > begin_))
            throw ParameterError("OccupancyAccumulator: empty window");
        if (n_batches_ < 1)
            throw ParameterError("OccupancyAccumulator: need at least one batch");
        batch_width_ = (end_ - begin_) / n_batches_;
        std::size_t m = grid_.size();
        partial_.assign(static_cast<std::size_t>(n_batches_) * m, 0.0);
        // full_marks_[b*(m+1) + j] holds time that applies to every level
        // with index < j; resolved by suffix-summing at readout.
        full_marks_.assign(static_cast<std::size_t>(n_batches_) * (m + 1), 0.0);
    }

    const LevelGrid& grid() const { return grid_; }
    double window_begin() const { return begin_; }
    double window_end() const { return end_; }
    int n_batches() const { return n_batches_; }
    double covered_time() const { return covered_; }

    void add_segment(const Segment& seg) {
        if (!(seg.t1 >= seg.t0))
            throw ParameterError("OccupancyAccumulator: segment runs backwards");
        double a = std::max(seg.t0, begin_);
        double b = std::min(seg.t1, end_);
        if (!(b > a)) return;
        // Split at batch boundaries so each piece lands in one batch.
        while (a < b) {
            int batch = static_cast<int>((a - begin_) / batch_width_);
            batch = std::min(batch, n_batches_ - 1);
            double batch_end = begin_ + batch_width_ * (batch + 1);
            double piece_end = std::min(b, batch_end);
            if (!(piece_end > a)) {  // guard against zero-progress rounding
                piece_end = std::min(b, std::nextafter(a, b));
                if (!(piece_end > a)) break;
            }
            add_piece(batch, a, piece_end,
                      seg.q0 + seg.slope * (a - seg.t0), seg.slope);
            a = piece_end;
        }
    }

    // Concatenates another accumulator's batches (replication merge).
    // Requires identical grids and batch widths; window offsets may differ.
    void merge(const OccupancyAccumulator& other) {
        if (!(grid_ == other.grid_))
            throw ParameterError("OccupancyAccumulator: grids differ in merge");
        if (std::abs(batch_width_ - other.batch_width_) >
            1e-9 * std::max(batch_width_, other.batch_width_))
            throw ParameterError("OccupancyAccumulator: batch widths differ in merge");
        partial_.insert(partial_.end(), other.partial_.begin(),
                        other.partial_.end());
        full_marks_.insert(full_marks_.end(), other.full_marks_.begin(),
                           other.full_marks_.end());
        n_batches_ += other.n_batches_;
        covered_ += other.covered_;
    }

    // Time above grid level i in batch b.
    double time_above(int batch, std::size_t level) const {
        std::size_t m = grid_.size();
        double t = partial_[static_cast<std::size_t>(batch) * m + level];
        const double* marks = &full_marks_[static_cast<std::size_t>(batch) * (m + 1)];
        for (std::size_t j = level + 1; j <= m; ++j) t += marks[j];
        return t;
    }

    double total_window() const { return batch_width_ * n_batches_; }
    double batch_width() const { return batch_width_; }

private:
    void add_piece(int batch, double a, double b, double qa, double slope) {
        double len = b - a;
        covered_ += len;
        double qe = qa + slope * len;
        double lo = std::min(qa, qe), hi = std::max(qa, qe);
        const auto& ls = grid_.levels();
        std::size_t m = ls.size();
        std::size_t i_lo =
            std::lower_bound(ls.begin(), ls.end(), lo) - ls.begin();
        std::size_t i_hi =
            std::lower_bound(ls.begin(), ls.end(), hi) - ls.begin();
        // Levels below the whole piece: full length, recorded as one mark.
        full_marks_[static_cast<std::size_t>(batch) * (m + 1) + i_lo] += len;
        // Levels crossed by the piece: linear-interpolation sojourn.
        for (std::size_t i = i_lo; i < i_hi; ++i) {
            double t_above = (slope < 0.0) ? (qa - ls[i]) / (-slope)
                                           : (qe - ls[i]) / slope;
            partial_[static_cast<std::size_t>(batch) * m + i] +=
                std::clamp(t_above, 0.0, len);
        }
    }

    LevelGrid grid_;
    double begin_, end_;
    int n_batches_;
    double batch_width_;
    double covered_ = 0.0;
    std::vector<double> partial_;
    std::vector<double> full_marks_;
};

// Engine observer routing per-queue segments into accumulators.
struct OccupancyObserver : NullObserver {
    OccupancyAccumulator* acc1 = nullptr;
    OccupancyAccumulator* acc2 = nullptr;

    void on_segment(int queue, const Segment& seg) {
        if (queue == 1 && acc1) acc1->add_segment(seg);
        if (queue == 2 && acc2) acc2->add_segment(seg);
    }
};

// Time-average tail estimates with batch-means confidence intervals.
inline std::vector<TailEstimate> estimate_tail_time_average(
    const OccupancyAccumulator& acc, double confidence = 0.95) {
    double window = acc.total_window();
    if (acc.covered_time() < window * (1.0 - 1e-9) - 1e-9)
        throw EstimationError(
            "estimate_tail_time_average: trajectory does not cover the "
            "estimation window (post-burn-in time too short)");
    std::vector<TailEstimate> out;
    out.reserve(acc.grid().size());
    std::vector<double> batch_means(static_cast<std::size_t>(acc.n_batches()));
    for (std::size_t i = 0; i < acc.grid().size(); ++i) {
        double total = 0.0;
        for (int b = 0; b < acc.n_batches(); ++b) {
            double t = acc.time_above(b, i);
            batch_means[static_cast<std::size_t>(b)] = t / acc.batch_width();
            total += t;
        }
        Interval ci = batch_means_ci(batch_means, confidence);
        double p = total / window;
        out.push_back({acc.grid()[i], p, std::max(0.0, ci.low),
                       std::min(1.0, ci.high), EstimateMethod::TimeAverage,
                       window});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regenerative (ratio) estimation.
// ---------------------------------------------------------------------------

// Collects per-cycle class-1 occupancy between successive empty-system
// arrival epochs.  Only sufficient statistics are kept, so memory is O(grid)
// regardless of cycle count.
class RegenerativeAccumulator : public NullObserver {
public:
    explicit RegenerativeAccumulator(LevelGrid grid) : grid_(std::move(grid)) {
        std::size_t m = grid_.size();
        cur_y_.assign(m, 0.0);
        sum_y_.assign(m, 0.0);
        sum_yy_.assign(m, 0.0);
        sum_yt_.assign(m, 0.0);
    }

    void on_segment(int queue, const Segment& seg) {
        if (queue != 1 || !started_) return;
        double len = seg.t1 - seg.t0;
        if (!(len > 0.0)) return;
        double qe = seg.q_end();
        double lo = std::min(seg.q0, qe), hi = std::max(seg.q0, qe);
        const auto& ls = grid_.levels();
        std::size_t i_lo = std::lower_bound(ls.begin(), ls.end(), lo) - ls.begin();
        std::size_t i_hi = std::lower_bound(ls.begin(), ls.end(), hi) - ls.begin();
        for (std::size_t i = 0; i < i_lo; ++i) cur_y_[i] += len;
        for (std::size_t i = i_lo; i < i_hi; ++i) {
            double t_above = (seg.slope < 0.0) ? (seg.q0 - ls[i]) / (-seg.slope)
                                               : (qe - ls[i]) / seg.slope;
            cur_y_[i] += std::clamp(t_above, 0.0, len);
        }
    }

    void on_regeneration(double t) {
        if (started_) close_cycle(t);
        started_ = true;
        cycle_start_ = t;
        std::fill(cur_y_.begin(), cur_y_.end(), 0.0);
    }

    const LevelGrid& grid() const { return grid_; }
    std::size_t completed_cycles() const { return n_; }
    double total_cycle_time() const { return sum_t_; }

    // Pools completed cycles from an independent replication.
    void merge(const RegenerativeAccumulator& other) {
        if (!(grid_ == other.grid_))
            throw ParameterError("RegenerativeAccumulator: grids differ in merge");
        n_ += other.n_;
        sum_t_ += other.sum_t_;
        sum_tt_ += other.sum_tt_;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            sum_y_[i] += other.sum_y_[i];
            sum_yy_[i] += other.sum_yy_[i];
            sum_yt_[i] += other.sum_yt_[i];
        }
    }

    // Ratio estimator with delta-method variance.
    std::vector<TailEstimate> estimates(double confidence = 0.95) const {
        if (n_ < 30)
            throw EstimationError(
                "regenerative_estimate: fewer than 30 completed regeneration "
                "cycles; an overloaded system does not regenerate - use the "
                "time-average estimator on the class-1 workload instead");
        double n = static_cast<double>(n_);
        double tbar = sum_t_ / n;
        double s_tt = (sum_tt_ - n * tbar * tbar) / (n - 1.0);
        double z = normal_quantile(0.5 * (1.0 + confidence));
        std::vector<TailEstimate> out;
        out.reserve(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            double ybar = sum_y_[i] / n;
            double r = ybar / tbar;
            double s_yy = (sum_yy_[i] - n * ybar * ybar) / (n - 1.0);
            double s_yt = (sum_yt_[i] - n * ybar * tbar) / (n - 1.0);
            double var = (s_yy - 2.0 * r * s_yt + r * r * s_tt) / (n * tbar * tbar);
            double half = z * std::sqrt(std::max(var, 0.0));
            out.push_back({grid_[i], r, std::max(0.0, r - half),
                           std::min(1.0, r + half), EstimateMethod::Regenerative,
                           n});
        }
        return out;
    }

private:
    void close_cycle(double t) {
        double tau = t - cycle_start_;
        if (!(tau > 0.0)) return;
        ++n_;
        sum_t_ += tau;
        sum_tt_ += tau * tau;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            sum_y_[i] += cur_y_[i];
            sum_yy_[i] += cur_y_[i] * cur_y_[i];
            sum_yt_[i] += cur_y_[i] * tau;
        }
    }

    LevelGrid grid_;
    bool started_ = false;
    double cycle_start_ = 0.0;
    std::size_t n_ = 0;
    double sum_t_ = 0.0, sum_tt_ = 0.0;
    std::vector<double> cur_y_, sum_y_, sum_yy_, sum_yt_;
};

inline std::vector<TailEstimate> regenerative_estimate(
    const RegenerativeAccumulator& acc, double confidence = 0.95) {
    return acc.estimates(confidence);
}

// ---------------------------------------------------------------------------
// Empirical tails from i.i.d. samples.
// ---------------------------------------------------------------------------

inline std::vector<TailEstimate> empirical_tail(std::vector<double> samples,
                                                const LevelGrid& grid,
                                                double confidence = 0.95) {
    if (samples.empty())
        throw EstimationError("empirical_tail: need at least one sample");
    std::sort(samples.begin(), samples.end());
    std::vector<TailEstimate> out;
    out.reserve(grid.size());
    std::size_t n = samples.size();
    for (double u : grid.levels()) {
        std::size_t above =
            samples.end() - std::upper_bound(samples.begin(), samples.end(), u);
        Interval ci = wilson_interval(above, n, confidence);
        out.push_back({u, static_cast<double>(above) / static_cast<double>(n),
                       ci.low, ci.high, EstimateMethod::Empirical,
                       static_cast<double>(n)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Horizon policy.
// ---------------------------------------------------------------------------

// Truncation horizon for estimating P(sup > u) functionals: grows faster
// than u (which is what kills the truncation bias asymptotically) and
// inversely with the drift gap.  Constants are artifact choices; the
// doubling test in the validation suite bounds the residual bias.
inline double horizon_for_level(double u, double d, double mu) {
    if (!(u > 0.0)) throw ParameterError("horizon_for_level: u must be > 0");
    if (!(d > mu))
        throw UnstableQueueError(
            "horizon_for_level: drain must exceed the mean rate");
    return std::max(1e4, 10.0 / (d - mu) * u * std::log1p(u));
}

// Default burn-in: 5% of the horizon, floored at 1000 time units.
inline double default_burn_in(double horizon) {
    if (!(horizon > 0.0))
        throw ParameterError("default_burn_in: horizon must be > 0");
    return std::max(1e3, 0.05 * horizon);
}

// Supremum sample with the horizon chosen by the policy for target level u.
inline SupSample single_queue_supremum(const ClassInputSpec& spec, double r,
                                       double u_target, RngStream& rng,
                                       double stable_step = 1e-2) {
    if (!(r > spec.mean_rate()))
        throw UnstableQueueError(
            "single_queue_supremum: drain rate must exceed the mean input rate");
    double horizon = horizon_for_level(u_target, r, spec.mean_rate());
    return supremum_over_horizon(spec, r, horizon, rng, stable_step);
}

// Tandem difference sample with the policy horizon; the relevant drift gap
// is the first drain's, c - mu1 - eps minus mu2.
inline TandemSample simulate_tandem_V(const ClassInputSpec& spec2,
                                      const GpsConfig& cfg, double mu1,
                                      double u_target, RngStream& rng,
                                      double eps = 0.0,
                                      double stable_step = 1e-2) {
    double d1 = cfg.c - mu1 - eps;
    double mu2 = spec2.mean_rate();
    if (!(d1 > mu2))
        throw ScenarioError(
            "simulate_tandem_V: c - mu1 - eps must exceed the class-2 rate");
    double horizon = horizon_for_level(u_target, d1, mu2);
    return tandem_V_over_horizon(spec2, cfg, mu1, horizon, rng, eps, stable_step);
}

// ---------------------------------------------------------------------------
// Inequality cross-check for the overloaded-first regime.
// ---------------------------------------------------------------------------

// Verifies the two-sided comparison
//   P(V^-eps > u+x) P(Qcheck <= x)  <=  P(Q1 > u)  <=  P(V^eps > (1-d)u) + P(Q1^iso > d u)
// after widening every side by its confidence interval; report-only.
struct SandwichReport {
    double lower;         // CI-widened left side
    double upper;         // CI-widened right side
    double p_low, p_high; // direct-estimate interval
    bool lower_ok;
    bool upper_ok;
    bool pass;
    double lower_margin;  // p_high - lower (>= 0 when lower_ok)
    double upper_margin;  // upper - p_low (>= 0 when upper_ok)
};

inline SandwichReport sandwich_check(const TailEstimate& p_q1,
                                     const TailEstimate& p_v_minus,
                                     double p_qcheck_le_x,
                                     const TailEstimate& p_v_plus,
                                     const TailEstimate& p_q1_iso) {
    if (!(p_qcheck_le_x >= 0.0 && p_qcheck_le_x <= 1.0))
        throw ParameterError("sandwich_check: p_qcheck_le_x must lie in [0,1]");
    SandwichReport r;
    r.lower = p_v_minus.ci_low * p_qcheck_le_x;
    r.upper = p_v_plus.ci_high + p_q1_iso.ci_high;
    r.p_low = p_q1.ci_low;
    r.p_high = p_q1.ci_high;
    r.lower_ok = r.lower <= r.p_high;
    r.upper_ok = r.p_low <= r.upper;
    r.pass = r.lower_ok && r.upper_ok;
    r.lower_margin = r.p_high - r.lower;
    r.upper_margin = r.upper - r.p_low;
    return r;
}

// ---------------------------------------------------------------------------
// Long-horizon drift diagnostic.
// ---------------------------------------------------------------------------

// Watches the reflected queue R(t) at the given drain and reports the decay
// of R(t)/t along geometrically spaced sample times.  When the drain
// exceeds the mean input rate the queue is tight and the ratio must vanish;
// with the drain below the mean rate the ratio converges to the positive
// drift instead, and the detector flags it.  Report-only by design: the
// non-decaying outcome is a legitimate result, not an error.
struct DecayReport {
    std::vector<double> times;
    std::vector<double> ratios;   // R(t)/t per sample
    double max_ratio;             // over all samples
    bool decaying;                // decade means fall by >= the factor
};

inline DecayReport assess_decay(std::span<const double> times,
                                std::span<const double> ratios,
                                double factor_per_decade = 2.0) {
    if (times.size() != ratios.size() || times.empty())
        throw EstimationError("assess_decay: empty or mismatched series");
    if (!(factor_per_decade > 1.0))
        throw ParameterError("assess_decay: factor must exceed 1");

    DecayReport rep;
    rep.times.assign(times.begin(), times.end());
    rep.ratios.assign(ratios.begin(), ratios.end());
    rep.max_ratio = *std::max_element(ratios.begin(), ratios.end());

    // Group by decade of t and compare successive decade means.
    std::vector<double> decade_sum, decade_n;
    int first_decade =
        static_cast<int>(std::floor(std::log10(times.front()) + 1e-12));
    for (std::size_t i = 0; i < times.size(); ++i) {
        int d = static_cast<int>(std::floor(std::log10(times[i]) + 1e-12)) -
                first_decade;
        if (d < 0) d = 0;
        if (static_cast<std::size_t>(d) >= decade_sum.size()) {
            decade_sum.resize(static_cast<std::size_t>(d) + 1, 0.0);
            decade_n.resize(static_cast<std::size_t>(d) + 1, 0.0);
        }
        decade_sum[static_cast<std::size_t>(d)] += ratios[i];
        decade_n[static_cast<std::size_t>(d)] += 1.0;
    }
    std::vector<double> means;
    for (std::size_t d = 0; d < decade_sum.size(); ++d)
        if (decade_n[d] > 0.0) means.push_back(decade_sum[d] / decade_n[d]);
    if (means.size() < 2)
        throw EstimationError("assess_decay: need samples spanning two decades");

    rep.decaying = true;
    for (std::size_t d = 1; d < means.size(); ++d) {
        if (!(means[d] <= means[d - 1] / factor_per_decade + 1e-300))
            rep.decaying = false;
    }
    return rep;
}

inline DecayReport drift_diagnostic(const ClassInputSpec& spec, double drain,
                                    double t0, double horizon,
                                    int points_per_decade, RngStream& rng,
                                    double stable_step = 1e-2) {
    if (!(drain > 0.0))
        throw ParameterError("drift_diagnostic: drain must be > 0");
    if (!(t0 > 0.0)) throw ParameterError("drift_diagnostic: t0 must be > 0");
    if (points_per_decade < 1)
        throw ParameterError("drift_diagnostic: points_per_decade must be >= 1");
    if (!(horizon > t0))
        throw EstimationError(
            "drift_diagnostic: empty report, t0 at or beyond the horizon");

    std::vector<double> times;
    double step = std::pow(10.0, 1.0 / points_per_decade);
    for (double t = t0; t <= horizon * (1.0 + 1e-12); t *= step)
        times.push_back(std::min(t, horizon));
    std::vector<double> values = reflected_queue_at(spec, drain, times, rng,
                                                    stable_step);
    std::vector<double> ratios(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        ratios[i] = values[i] / times[i];
    return assess_decay(times, ratios);
}

}  // namespace gpsq
