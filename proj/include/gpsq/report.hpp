#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gpsq/engine.hpp"
#include "gpsq/estimation.hpp"

namespace gpsq {

// Six significant digits, plain decimal.  Reports compare runs across
// machines, so the format is pinned rather than left to stream defaults.
inline std::string format_sig6(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[64];
    int exp10 = static_cast<int>(std::floor(std::log10(std::fabs(x))));
    int decimals = 5 - exp10;
    if (decimals < 0) decimals = 0;
    if (decimals > 40) decimals = 40;
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
    }
    return s;
}

// Full-precision round-trip format for trajectory dumps.
inline std::string format_exact(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// One row of the comparison report: estimate against the predicted tail.
struct ReportRow {
    double u;
    double p_hat;
    double ci_low;
    double ci_high;
    double f_asym;   // NaN when no closed form applies
    double ratio;    // p_hat / f_asym, NaN when no closed form applies
    std::string scenario;  // label, or a warning token
};

inline void emit_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
    os << "u,p_hat,ci_low,ci_high,f_asym,ratio,scenario\n";
    for (const auto& r : rows) {
        os << format_sig6(r.u) << ',' << format_sig6(r.p_hat) << ','
           << format_sig6(r.ci_low) << ',' << format_sig6(r.ci_high) << ','
           << format_sig6(r.f_asym) << ',' << format_sig6(r.ratio) << ','
           << r.scenario << '\n';
    }
}

inline void emit_estimates_csv(std::ostream& os,
                               const std::vector<TailEstimate>& rows) {
    os << "u,p_hat,ci_low,ci_high,method,n_effective\n";
    for (const auto& r : rows) {
        os << format_sig6(r.u) << ',' << format_sig6(r.p_hat) << ','
           << format_sig6(r.ci_low) << ',' << format_sig6(r.ci_high) << ','
           << method_label(r.method) << ',' << format_sig6(r.n_effective)
           << '\n';
    }
}

// Trajectory dump: segment rows and jump rows share one table so the file
// replays in time order.  Values are exact so a replay reproduces the path.
// Jumps precede segments that start at the same instant (the post-jump
// pieces), matching the order the engine produced them.
inline void emit_trajectory_csv(
    std::ostream& os, const std::vector<std::pair<int, Segment>>& segments,
    const std::vector<JumpRecord>& jumps) {
    os << "kind,t_start,t_end,queue,q_start,slope,jump_size\n";
    std::size_t is = 0, ij = 0;
    while (is < segments.size() || ij < jumps.size()) {
        double ts = is < segments.size()
                        ? segments[is].second.t0
                        : std::numeric_limits<double>::infinity();
        double tj = ij < jumps.size() ? jumps[ij].t
                                      : std::numeric_limits<double>::infinity();
        if (tj <= ts) {
            const auto& j = jumps[ij++];
            os << "jump," << format_exact(j.t) << ',' << format_exact(j.t)
               << ',' << j.cls << ",,," << format_exact(j.size) << '\n';
        } else {
            const auto& [q, s] = segments[is++];
            os << "segment," << format_exact(s.t0) << ',' << format_exact(s.t1)
               << ',' << q << ',' << format_exact(s.q0) << ','
               << format_exact(s.slope) << ",\n";
        }
    }
}

// Run provenance header written atop report files.
struct RunManifest {
    std::string tool_version = "1.0.0";
    std::string engine;         // "event" or "discrete"
    std::uint64_t seed = 0;
    int replications = 1;
    double horizon = 0.0;
    double burn_in = 0.0;
    std::string config_echo;    // flattened key=value summary
    std::vector<std::string> warnings;
    double wall_clock_seconds = 0.0;
};

// The manifest lives in its own file: the result CSV must be byte-identical
// across reruns of one seed, and wall-clock never is.
inline void emit_manifest(std::ostream& os, const RunManifest& m) {
    os << "# tool_version=" << m.tool_version << '\n';
    os << "# engine=" << m.engine << '\n';
    os << "# seed=" << m.seed << '\n';
    os << "# replications=" << m.replications << '\n';
    os << "# horizon=" << format_sig6(m.horizon) << '\n';
    os << "# burn_in=" << format_sig6(m.burn_in) << '\n';
    os << "# wall_clock_seconds=" << format_sig6(m.wall_clock_seconds) << '\n';
    if (!m.config_echo.empty()) os << "# config " << m.config_echo << '\n';
    for (const auto& w : m.warnings) os << "# warning " << w << '\n';
}

}  // namespace gpsq
