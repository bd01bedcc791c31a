#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gpsq/errors.hpp"
#include "gpsq/estimation.hpp"
#include "gpsq/gps.hpp"
#include "gpsq/inputs.hpp"

namespace gpsq {

// ---------------------------------------------------------------------------
// Experiment configuration.
// ---------------------------------------------------------------------------

enum class EngineKind { Event, Discrete };

struct EngineChoice {
    EngineKind kind = EngineKind::Event;
    double h = 0.0;  // step, Discrete only
};

enum class EstimatorChoice { TimeAverage, Regenerative };

struct OutputPaths {
    std::string report;      // comparison CSV; empty = stdout
    std::string estimates;   // raw estimate table, optional
    std::string trajectory;  // path dump, optional
};

struct ExperimentConfig {
    GpsConfig gps;
    ClassInputSpec class1;
    ClassInputSpec class2;
    LevelGrid grid;
    double horizon;
    double burn_in;
    int replications;
    std::uint64_t seed;
    EngineChoice engine;
    int batches;
    EstimatorChoice estimator;
    OutputPaths outputs;
    double tandem_eps;
    int tandem_samples;
};

// ---------------------------------------------------------------------------
// Flat INI-style text: [section] headers, key = value lines, # or ;
// comments.  Parsing is strict: malformed lines, duplicate keys, and (later)
// unknown keys are all errors.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

using IniSections = std::map<std::string, std::map<std::string, std::string>>;

inline IniSections parse_ini_text(const std::string& text) {
    IniSections out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": empty section name");
            out[section];  // a section may legitimately be empty
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) +
                              ": key outside any [section]");
        if (!out[section].emplace(key, value).second)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": duplicate key '" + section + "." + key + "'");
    }
    return out;
}

inline IniSections parse_ini_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_ini_text(ss.str());
}

namespace detail {

// Collects field-level problems so one pass reports every error at once.
struct FieldErrors {
    std::vector<std::string> messages;

    void add(const std::string& where, const std::string& what) {
        messages.push_back(where + ": " + what);
    }
    bool ok() const { return messages.empty(); }
    std::string joined() const {
        std::string s = "invalid config: ";
        for (std::size_t i = 0; i < messages.size(); ++i) {
            if (i) s += "; ";
            s += messages[i];
        }
        return s;
    }
};

// Typed view of one section; records which keys were consumed so leftovers
// can be rejected by name.
class SectionReader {
public:
    SectionReader(const IniSections& ini, std::string name, FieldErrors& errs)
        : name_(std::move(name)), errs_(&errs) {
        auto it = ini.find(name_);
        if (it != ini.end()) fields_ = &it->second;
    }

    bool present() const { return fields_ != nullptr; }
    bool has(const std::string& key) const {
        return fields_ && fields_->count(key) > 0;
    }

    std::optional<std::string> raw(const std::string& key) {
        if (!fields_) return std::nullopt;
        auto it = fields_->find(key);
        if (it == fields_->end()) return std::nullopt;
        consumed_.insert(key);
        return it->second;
    }

    std::string string_or(const std::string& key, const std::string& dflt) {
        auto v = raw(key);
        return v ? *v : dflt;
    }

    std::optional<double> number(const std::string& key) {
        auto v = raw(key);
        if (!v) return std::nullopt;
        const char* s = v->c_str();
        char* end = nullptr;
        double x = std::strtod(s, &end);
        if (end == s || *end != '\0') {
            errs_->add(name_ + "." + key, "not a number: '" + *v + "'");
            return std::nullopt;
        }
        return x;
    }

    std::optional<double> require_number(const std::string& key) {
        if (!has(key)) {
            errs_->add(name_ + "." + key, "required field is missing");
            return std::nullopt;
        }
        return number(key);
    }

    double number_or(const std::string& key, double dflt) {
        if (!has(key)) return dflt;
        auto v = number(key);
        return v ? *v : dflt;
    }

    std::optional<std::int64_t> integer(const std::string& key) {
        auto v = raw(key);
        if (!v) return std::nullopt;
        const char* s = v->c_str();
        char* end = nullptr;
        long long x = std::strtoll(s, &end, 10);
        if (end == s || *end != '\0') {
            errs_->add(name_ + "." + key, "not an integer: '" + *v + "'");
            return std::nullopt;
        }
        return x;
    }

    std::int64_t integer_or(const std::string& key, std::int64_t dflt) {
        if (!has(key)) return dflt;
        auto v = integer(key);
        return v ? *v : dflt;
    }

    std::optional<std::uint64_t> unsigned_or(const std::string& key,
                                             std::uint64_t dflt) {
        auto v = raw(key);
        if (!v) return dflt;
        try {
            std::size_t pos = 0;
            unsigned long long x = std::stoull(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            return x;
        } catch (const std::exception&) {
            errs_->add(name_ + "." + key, "not an unsigned integer: '" + *v + "'");
            return std::nullopt;
        }
    }

    void reject_unknown() {
        if (!fields_) return;
        for (const auto& [k, v] : *fields_)
            if (!consumed_.count(k))
                errs_->add(name_ + "." + k, "unknown key");
    }

    void error(const std::string& key, const std::string& what) {
        errs_->add(name_ + "." + key, what);
    }

private:
    std::string name_;
    FieldErrors* errs_;
    const std::map<std::string, std::string>* fields_ = nullptr;
    std::set<std::string> consumed_;
};

inline std::optional<ClassInputSpec> parse_class_section(SectionReader& r) {
    std::string type = r.string_or("type", "compound_poisson");
    if (type == "compound_poisson") {
        auto lambda = r.require_number("lambda");
        std::string jobs = r.string_or("jobs", "pareto");
        std::optional<JobDistribution> dist;
        if (jobs == "pareto") {
            auto x_m = r.require_number("x_m");
            auto alpha = r.require_number("alpha");
            if (x_m && alpha) {
                if (!(*alpha > 1.0))
                    r.error("alpha", "job tail index must be > 1 for a finite mean");
                else if (!(*x_m > 0.0))
                    r.error("x_m", "must be > 0");
                else
                    dist = Pareto(*x_m, *alpha);
            }
        } else if (jobs == "exponential") {
            auto rate = r.require_number("rate");
            if (rate) {
                if (!(*rate > 0.0)) r.error("rate", "must be > 0");
                else dist = ExponentialJobs(*rate);
            }
        } else if (jobs == "deterministic") {
            auto size = r.require_number("size");
            if (size) {
                if (!(*size > 0.0)) r.error("size", "must be > 0");
                else dist = DeterministicJobs(*size);
            }
        } else {
            r.error("jobs", "unknown job distribution '" + jobs +
                                "' (pareto | exponential | deterministic)");
        }
        if (lambda && !(*lambda >= 0.0)) r.error("lambda", "must be >= 0");
        if (lambda && *lambda >= 0.0 && dist)
            return ClassInputSpec(CompoundPoissonSpec(*lambda, *dist));
        return std::nullopt;
    }
    if (type == "stable") {
        auto alpha = r.require_number("alpha");
        auto beta = r.require_number("beta");
        auto mu = r.require_number("mu");
        bool ok = alpha && beta && mu;
        if (alpha && !(*alpha > 1.0 && *alpha <= 2.0)) {
            r.error("alpha", "must lie in (1,2]");
            ok = false;
        }
        if (beta && !(*beta > -1.0 && *beta <= 1.0)) {
            r.error("beta", "must lie in (-1,1]");
            ok = false;
        }
        if (ok) return ClassInputSpec(StableSpec(*alpha, *beta, *mu));
        return std::nullopt;
    }
    r.error("type", "unknown input type '" + type +
                        "' (compound_poisson | stable)");
    return std::nullopt;
}

inline std::vector<double> parse_level_list(const std::string& text,
                                            SectionReader& r) {
    std::vector<double> levels;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const char* s = item.c_str();
        char* end = nullptr;
        double x = std::strtod(s, &end);
        if (end == s || *end != '\0') {
            r.error("list", "not a number: '" + item + "'");
            return {};
        }
        levels.push_back(x);
    }
    if (levels.empty()) r.error("list", "no levels given");
    return levels;
}

}  // namespace detail

inline ExperimentConfig parse_config_sections(const IniSections& ini) {
    detail::FieldErrors errs;
    for (const auto& [name, fields] : ini) {
        static const std::set<std::string> known = {
            "gps", "class1", "class2", "run", "levels", "output", "tandem"};
        if (!known.count(name)) errs.add(name, "unknown section");
    }

    detail::SectionReader gps(ini, "gps", errs);
    std::optional<GpsConfig> cfg;
    {
        auto c = gps.require_number("c");
        auto phi1 = gps.require_number("phi1");
        auto phi2 = gps.require_number("phi2");
        if (c && phi1 && phi2) {
            try {
                cfg = GpsConfig(*c, *phi1, *phi2);
            } catch (const ParameterError& e) {
                errs.add("gps", e.what());
            }
        }
        gps.reject_unknown();
    }

    detail::SectionReader cls1(ini, "class1", errs);
    detail::SectionReader cls2(ini, "class2", errs);
    std::optional<ClassInputSpec> in1, in2;
    if (cls1.present()) in1 = detail::parse_class_section(cls1);
    else errs.add("class1", "section is missing");
    if (cls2.present()) in2 = detail::parse_class_section(cls2);
    else errs.add("class2", "section is missing");
    cls1.reject_unknown();
    cls2.reject_unknown();

    detail::SectionReader levels(ini, "levels", errs);
    std::optional<LevelGrid> grid;
    if (!levels.present()) {
        errs.add("levels", "section is missing");
    } else if (levels.has("list")) {
        auto text = levels.raw("list");
        auto xs = detail::parse_level_list(*text, levels);
        if (!xs.empty()) {
            try {
                grid = LevelGrid(std::move(xs));
            } catch (const ParameterError& e) {
                errs.add("levels.list", e.what());
            }
        }
    } else {
        auto lo = levels.require_number("lo");
        auto hi = levels.require_number("hi");
        auto per_decade = levels.integer_or("per_decade", 10);
        if (lo && hi) {
            try {
                grid = LevelGrid::geometric(*lo, *hi,
                                            static_cast<int>(per_decade));
            } catch (const ParameterError& e) {
                errs.add("levels", e.what());
            }
        }
    }
    levels.reject_unknown();

    detail::SectionReader run(ini, "run", errs);
    EngineChoice engine;
    std::string engine_name = run.string_or("engine", "event");
    if (engine_name == "event") {
        engine.kind = EngineKind::Event;
        if (run.has("h")) run.error("h", "step applies to the discrete engine only");
    } else if (engine_name == "discrete") {
        engine.kind = EngineKind::Discrete;
        auto h = run.require_number("h");
        if (h) {
            if (!(*h > 0.0)) run.error("h", "must be > 0");
            else engine.h = *h;
        }
    } else {
        run.error("engine", "unknown engine '" + engine_name +
                                "' (event | discrete)");
    }

    double horizon = 0.0;
    bool have_horizon = false;
    if (run.has("horizon")) {
        auto h = run.number("horizon");
        if (h) {
            if (!(*h > 0.0)) run.error("horizon", "must be > 0");
            else { horizon = *h; have_horizon = true; }
        }
    } else if (run.has("target_level")) {
        auto u = run.number("target_level");
        if (u && cfg && in1 && in2) {
            double mu = in1->mean_rate() + in2->mean_rate();
            try {
                horizon = horizon_for_level(*u, cfg->c, mu);
                have_horizon = true;
            } catch (const std::exception& e) {
                run.error("target_level", e.what());
            }
        }
    } else {
        run.error("horizon", "either horizon or target_level is required");
    }

    double burn_in = 0.0;
    if (run.has("burn_in")) {
        auto b = run.number("burn_in");
        if (b) {
            if (!(*b >= 0.0)) run.error("burn_in", "must be >= 0");
            else burn_in = *b;
        }
    } else if (have_horizon) {
        burn_in = default_burn_in(horizon);
    }
    if (have_horizon && !(burn_in < horizon))
        run.error("burn_in", "must be smaller than the horizon");

    auto replications = run.integer_or("replications", 1);
    if (replications < 1) run.error("replications", "must be >= 1");
    auto batches = run.integer_or("batches", 32);
    if (batches < 10) run.error("batches", "must be >= 10 for batch means");
    auto seed = run.unsigned_or("seed", 1);

    EstimatorChoice estimator = EstimatorChoice::TimeAverage;
    std::string est_name = run.string_or("estimator", "time-average");
    if (est_name == "regenerative") estimator = EstimatorChoice::Regenerative;
    else if (est_name != "time-average")
        run.error("estimator",
                  "unknown estimator '" + est_name +
                      "' (time-average | regenerative)");

    if (engine.kind == EngineKind::Event && in1 && in2 &&
        (in1->is_stable() || in2->is_stable()))
        run.error("engine",
                  "stable input has no event calendar; use engine = discrete");
    if (estimator == EstimatorChoice::Regenerative &&
        engine.kind == EngineKind::Discrete)
        run.error("estimator",
                  "regenerative estimation needs the event engine's "
                  "regeneration epochs");
    run.reject_unknown();

    detail::SectionReader output(ini, "output", errs);
    OutputPaths outputs;
    outputs.report = output.string_or("report", "");
    outputs.estimates = output.string_or("estimates", "");
    outputs.trajectory = output.string_or("trajectory", "");
    output.reject_unknown();

    detail::SectionReader tandem(ini, "tandem", errs);
    double tandem_eps = tandem.number_or("eps", 0.0);
    auto tandem_samples = tandem.integer_or("samples", 10000);
    if (tandem_samples < 1) tandem.error("samples", "must be >= 1");
    tandem.reject_unknown();

    if (!errs.ok() || !cfg || !in1 || !in2 || !grid || !seed)
        throw ConfigError(errs.ok() ? "invalid config: incomplete"
                                    : errs.joined());

    return ExperimentConfig{*cfg,
                            *in1,
                            *in2,
                            *grid,
                            horizon,
                            burn_in,
                            static_cast<int>(replications),
                            *seed,
                            engine,
                            static_cast<int>(batches),
                            estimator,
                            outputs,
                            tandem_eps,
                            static_cast<int>(tandem_samples)};
}

inline ExperimentConfig parse_config(const std::string& path) {
    return parse_config_sections(parse_ini_file(path));
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    return parse_config_sections(parse_ini_text(text));
}

}  // namespace gpsq
