#pragma once

/// Line-based run configuration: `section.key = value`, one setting per
/// line, `#` starts a comment. The flat format diffs cleanly in regression
/// baselines. Parsing never throws on user input; it returns the typed
/// config plus a list of (line, message) issues, and a config counts only
/// when the list is empty. Sweep lines (`sweep.flux.b = 0, 0.25, 0.5`)
/// cross-product into independent runs; every combination is validated up
/// front so a sweep cannot fail late on a malformed corner.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mbe/errors.hpp"
#include "mbe/flux.hpp"
#include "mbe/grid.hpp"
#include "mbe/model1d.hpp"
#include "mbe/solver.hpp"

namespace mbe {

enum class InitKind { WhiteNoise, Pyramid, Cosine, File };

inline const char* to_string(InitKind k) {
    switch (k) {
        case InitKind::WhiteNoise: return "white_noise";
        case InitKind::Pyramid: return "pyramid";
        case InitKind::Cosine: return "cosine";
        case InitKind::File: return "file";
    }
    return "?";
}

inline bool init_kind_from_string(const std::string& s, InitKind& out) {
    if (s == "white_noise") out = InitKind::WhiteNoise;
    else if (s == "pyramid") out = InitKind::Pyramid;
    else if (s == "cosine") out = InitKind::Cosine;
    else if (s == "file") out = InitKind::File;
    else return false;
    return true;
}

struct SweepEntry {
    std::string key;
    std::vector<std::string> values;
    bool operator==(const SweepEntry&) const = default;
};

/// A fully resolved experiment. Field defaults are the documented key
/// defaults; parse_config reports a missing key only where no default makes
/// sense. The struct compares memberwise so serialize/parse round-trips are
/// testable as plain equality.
struct ExperimentConfig {
    bool one_dimensional = false;

    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    Bc bc = Bc::Neumann;

    FluxKind flux_kind = FluxKind::SiegertRotated;
    double alpha = 1.0;
    double beta = 1.0;
    double b = 0.0;

    Scheme scheme = Scheme::ImexSpectral;
    double dt = 1e-3;
    double t_end = 1.0;
    double nu = 1.0;
    bool stabilization_auto = true;
    double stabilization = 0.0;
    double mollifier_eps0 = 0.0;
    long max_iterations = 50;
    double fp_tol = 1e-8;
    double energy_jump_factor = 10.0;

    InitKind init_kind = InitKind::WhiteNoise;
    double init_amp = 0.0;
    std::uint64_t seed = 1;
    double init_slope = 0.0;
    int init_kx = 0;
    int init_ky = 0;
    std::string init_path;

    long sample_every = 1;
    long snapshot_every = 0;

    bool stability_run = false;
    double stability_amp = 0.0;
    std::uint64_t stability_seed = 0;

    std::vector<SweepEntry> sweep;

    bool operator==(const ExperimentConfig&) const = default;

    FluxModel flux_model() const {
        switch (flux_kind) {
            case FluxKind::SiegertRotated: return FluxModel::siegert_rotated(alpha, beta);
            case FluxKind::SiegertReduced: return FluxModel::siegert_reduced(alpha, beta);
            case FluxKind::Johnson: return FluxModel::johnson(alpha, beta);
            case FluxKind::CubicIsotropic: return FluxModel::cubic_isotropic(alpha);
            case FluxKind::CubicAnisotropic: return FluxModel::cubic_anisotropic(alpha, b);
        }
        throw std::invalid_argument("flux_model: unknown kind");
    }

    SolverConfig solver_config() const {
        SolverConfig cfg;
        cfg.scheme = scheme;
        cfg.dt = dt;
        cfg.t_end = t_end;
        cfg.nu = nu;
        cfg.stabilization =
            stabilization_auto ? default_stabilization(flux_model()) : stabilization;
        cfg.mollifier_eps0 = mollifier_eps0;
        cfg.max_iterations = max_iterations;
        cfg.fp_tol = fp_tol;
        cfg.energy_jump_factor = energy_jump_factor;
        return cfg;
    }

    Grid make_grid() const { return Grid(nx, ny, lx, ly, bc); }

    Line1D make_line() const { return Line1D(nx, lx); }
};

struct ConfigIssue {
    int line = 0;  // 0 = whole-file issue (e.g. a missing required key)
    std::string message;
    bool operator==(const ConfigIssue&) const = default;
};

struct ParsedConfig {
    ExperimentConfig config;
    std::vector<ConfigIssue> issues;
    bool ok() const { return issues.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline bool parse_long(const std::string& s, long& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtol(s.c_str(), &end, 10);
    return end == s.c_str() + s.size();
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-' || s[0] == '+') return false;
    char* end = nullptr;
    out = std::strtoull(s.c_str(), &end, 10);
    return end == s.c_str() + s.size();
}

struct RawEntry {
    std::string value;
    int line = 0;
};

/// The key tables. A key must be known to parse and consumed by the
/// resolved configuration to validate; everything else is reported with its
/// line number.
inline const std::set<std::string>& known_keys_2d() {
    static const std::set<std::string> keys = {
        "grid.nx",         "grid.ny",
        "grid.lx",         "grid.ly",
        "grid.bc",         "flux.kind",
        "flux.alpha",      "flux.beta",
        "flux.b",          "solver.scheme",
        "solver.dt",       "solver.t_end",
        "solver.nu",       "solver.stabilization",
        "solver.mollifier_eps0",
        "solver.max_iterations",
        "solver.fp_tol",   "solver.energy_jump_factor",
        "init.kind",       "init.amp",
        "init.seed",       "init.slope",
        "init.kx",         "init.ky",
        "init.path",       "output.sample_every",
        "output.snapshot_every",
        "stability.amp",   "stability.seed",
    };
    return keys;
}

inline const std::set<std::string>& known_keys_1d() {
    static const std::set<std::string> keys = {
        "grid.nx",    "grid.lx",   "flux.kind", "flux.alpha",
        "solver.scheme", "solver.dt", "solver.t_end", "solver.nu",
        "init.kind",  "init.amp",  "init.seed", "init.kx",
        "output.sample_every",
    };
    return keys;
}

/// Applies one key to the typed config. Returns an error message naming the
/// key on a value it cannot accept; range coupling across keys is left to
/// validate_config.
inline bool apply_key(ExperimentConfig& c, const std::string& key, const std::string& value,
                      std::string& err) {
    auto bad = [&](const char* what) {
        err = key + ": " + what + " (got '" + value + "')";
        return false;
    };
    double d = 0.0;
    long l = 0;
    std::uint64_t u = 0;

    if (key == "grid.nx") {
        if (!parse_long(value, l)) return bad("expected an integer");
        c.nx = static_cast<int>(l);
    } else if (key == "grid.ny") {
        if (!parse_long(value, l)) return bad("expected an integer");
        c.ny = static_cast<int>(l);
    } else if (key == "grid.lx") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.lx = d;
    } else if (key == "grid.ly") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.ly = d;
    } else if (key == "grid.bc") {
        if (!bc_from_string(value, c.bc)) return bad("expected 'neumann' or 'periodic'");
    } else if (key == "flux.kind") {
        if (!flux_kind_from_string(value, c.flux_kind))
            return bad("expected one of siegert_rotated, siegert_reduced, johnson, "
                       "cubic_isotropic, cubic_anisotropic");
    } else if (key == "flux.alpha") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.alpha = d;
    } else if (key == "flux.beta") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.beta = d;
    } else if (key == "flux.b") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.b = d;
    } else if (key == "solver.scheme") {
        if (!scheme_from_string(value, c.scheme))
            return bad("expected one of imex_spectral, explicit_rk2, constructive");
    } else if (key == "solver.dt") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.dt = d;
    } else if (key == "solver.t_end") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.t_end = d;
    } else if (key == "solver.nu") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.nu = d;
    } else if (key == "solver.stabilization") {
        if (value == "auto") {
            c.stabilization_auto = true;
            c.stabilization = 0.0;
        } else {
            if (!parse_double(value, d)) return bad("expected a number or 'auto'");
            c.stabilization_auto = false;
            c.stabilization = d;
        }
    } else if (key == "solver.mollifier_eps0") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.mollifier_eps0 = d;
    } else if (key == "solver.max_iterations") {
        if (!parse_long(value, l)) return bad("expected an integer");
        c.max_iterations = l;
    } else if (key == "solver.fp_tol") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.fp_tol = d;
    } else if (key == "solver.energy_jump_factor") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.energy_jump_factor = d;
    } else if (key == "init.kind") {
        if (!init_kind_from_string(value, c.init_kind))
            return bad("expected one of white_noise, pyramid, cosine, file");
    } else if (key == "init.amp") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.init_amp = d;
    } else if (key == "init.seed") {
        if (!parse_u64(value, u)) return bad("expected an unsigned integer");
        c.seed = u;
    } else if (key == "init.slope") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.init_slope = d;
    } else if (key == "init.kx") {
        if (!parse_long(value, l)) return bad("expected an integer");
        c.init_kx = static_cast<int>(l);
    } else if (key == "init.ky") {
        if (!parse_long(value, l)) return bad("expected an integer");
        c.init_ky = static_cast<int>(l);
    } else if (key == "init.path") {
        if (value.empty()) return bad("expected a file path");
        c.init_path = value;
    } else if (key == "output.sample_every") {
        if (!parse_long(value, l)) return bad("expected an integer");
        c.sample_every = l;
    } else if (key == "output.snapshot_every") {
        if (!parse_long(value, l)) return bad("expected an integer");
        c.snapshot_every = l;
    } else if (key == "stability.amp") {
        if (!parse_double(value, d)) return bad("expected a number");
        c.stability_run = true;
        c.stability_amp = d;
    } else if (key == "stability.seed") {
        if (!parse_u64(value, u)) return bad("expected an unsigned integer");
        c.stability_run = true;
        c.stability_seed = u;
    } else {
        err = "unknown key '" + key + "'";
        return false;
    }
    return true;
}

/// Full validation of a resolved config against a presence set. Issues are
/// attributed to the defining line where one exists, else to line 0.
inline void validate_config(const ExperimentConfig& c, const std::set<std::string>& present,
                            const std::map<std::string, int>& key_line,
                            std::vector<ConfigIssue>& issues) {
    auto line_of = [&](const std::string& key) {
        auto it = key_line.find(key);
        return it == key_line.end() ? 0 : it->second;
    };
    auto add = [&](const std::string& key, const std::string& msg) {
        issues.push_back({line_of(key), key + ": " + msg});
    };
    auto require = [&](const char* key) {
        if (present.count(key)) return true;
        issues.push_back({0, std::string("missing required key '") + key + "'"});
        return false;
    };
    auto reject = [&](const char* key, const std::string& why) {
        if (present.count(key)) add(key, "not used " + why);
    };
    const bool one_d = c.one_dimensional;

    if (require("grid.nx")) {
        int min_cells = one_d ? 8 : 4;
        if (c.nx < min_cells)
            add("grid.nx", "must be at least " + std::to_string(min_cells));
    }
    if (require("grid.lx") && !(c.lx > 0.0 && std::isfinite(c.lx)))
        add("grid.lx", "must be positive and finite");
    if (!one_d) {
        if (require("grid.ny") && c.ny < 4) add("grid.ny", "must be at least 4");
        if (require("grid.ly") && !(c.ly > 0.0 && std::isfinite(c.ly)))
            add("grid.ly", "must be positive and finite");
    }

    if (require("flux.kind")) {
        if (one_d && c.flux_kind != FluxKind::CubicIsotropic)
            add("flux.kind", "the interval model only supports cubic_isotropic");
        if (present.count("flux.alpha") && !(c.alpha >= 0.0 && std::isfinite(c.alpha)))
            add("flux.alpha", "must be >= 0");
        if (flux_uses_beta(c.flux_kind)) {
            if (present.count("flux.beta") && !(c.beta > 0.0 && std::isfinite(c.beta)))
                add("flux.beta", "must be > 0");
        } else {
            reject("flux.beta", "by flux kind '" + std::string(to_string(c.flux_kind)) + "'");
        }
        if (flux_uses_b(c.flux_kind)) {
            if (require("flux.b") && !(c.b > -1.0 && c.b < 1.0))
                add("flux.b", "outside (-1, 1)");
        } else {
            reject("flux.b", "by flux kind '" + std::string(to_string(c.flux_kind)) + "'");
        }
    }

    if (one_d && c.scheme != Scheme::ImexSpectral)
        add("solver.scheme", "the interval model only supports imex_spectral");
    if (require("solver.dt") && !(c.dt > 0.0 && std::isfinite(c.dt)))
        add("solver.dt", "must be positive and finite");
    if (require("solver.t_end") && !(c.t_end >= 0.0 && std::isfinite(c.t_end)))
        add("solver.t_end", "must be >= 0 and finite");
    if (present.count("solver.nu") && !(c.nu > 0.0 && std::isfinite(c.nu)))
        add("solver.nu", "must be positive and finite");
    if (!one_d) {
        if (c.scheme == Scheme::ImexSpectral) {
            if (!c.stabilization_auto &&
                !(c.stabilization >= 0.0 && std::isfinite(c.stabilization)))
                add("solver.stabilization", "must be >= 0 or 'auto'");
        } else {
            reject("solver.stabilization",
                   "by scheme '" + std::string(to_string(c.scheme)) + "'");
        }
        if (c.scheme == Scheme::ConstructiveIteration) {
            if (require("solver.mollifier_eps0") &&
                !(c.mollifier_eps0 > 0.0 && std::isfinite(c.mollifier_eps0)))
                add("solver.mollifier_eps0", "must be positive and finite");
            if (present.count("solver.max_iterations") && c.max_iterations < 1)
                add("solver.max_iterations", "must be >= 1");
            if (present.count("solver.fp_tol") && !(c.fp_tol > 0.0 && std::isfinite(c.fp_tol)))
                add("solver.fp_tol", "must be positive and finite");
        } else {
            reject("solver.mollifier_eps0",
                   "by scheme '" + std::string(to_string(c.scheme)) + "'");
            reject("solver.max_iterations",
                   "by scheme '" + std::string(to_string(c.scheme)) + "'");
            reject("solver.fp_tol", "by scheme '" + std::string(to_string(c.scheme)) + "'");
        }
        if (c.scheme == Scheme::ExplicitRK2) {
            if (present.count("solver.energy_jump_factor") &&
                !(c.energy_jump_factor > 0.0 && std::isfinite(c.energy_jump_factor)))
                add("solver.energy_jump_factor", "must be positive");
        } else {
            reject("solver.energy_jump_factor",
                   "by scheme '" + std::string(to_string(c.scheme)) + "'");
        }
    }
    if (c.dt > 0.0 && std::isfinite(c.dt) && c.t_end >= 0.0 && std::isfinite(c.t_end) &&
        c.t_end > 0.0) {
        if (c.dt > c.t_end * (1.0 + 1e-12)) {
            add("solver.dt", "exceeds solver.t_end");
        } else {
            double steps = c.t_end / c.dt;
            double rounded = std::floor(steps + 0.5);
            if (std::abs(rounded * c.dt - c.t_end) > 1e-9 * std::max(c.dt, c.t_end))
                add("solver.dt", "does not divide solver.t_end into whole steps");
        }
    }

    if (require("init.kind") &&
        one_d && (c.init_kind == InitKind::Pyramid || c.init_kind == InitKind::File)) {
        add("init.kind", "the interval model only supports white_noise and cosine");
    } else if (present.count("init.kind")) {
        auto need = [&](const char* key) {
            if (!present.count(key))
                issues.push_back({0, std::string("missing required key '") + key +
                                         "' for init.kind '" + to_string(c.init_kind) + "'"});
        };
        auto irrelevant = [&](const char* key) {
            reject(key, "by init kind '" + std::string(to_string(c.init_kind)) + "'");
        };
        switch (c.init_kind) {
            case InitKind::WhiteNoise:
                need("init.amp");
                need("init.seed");
                if (present.count("init.amp") &&
                    !(c.init_amp >= 0.0 && std::isfinite(c.init_amp)))
                    add("init.amp", "must be >= 0 and finite");
                irrelevant("init.slope");
                irrelevant("init.kx");
                irrelevant("init.ky");
                irrelevant("init.path");
                break;
            case InitKind::Pyramid:
                need("init.slope");
                if (present.count("init.slope") &&
                    !(c.init_slope >= 0.0 && std::isfinite(c.init_slope)))
                    add("init.slope", "must be >= 0 and finite");
                irrelevant("init.amp");
                irrelevant("init.seed");
                irrelevant("init.kx");
                irrelevant("init.ky");
                irrelevant("init.path");
                break;
            case InitKind::Cosine:
                need("init.amp");
                need("init.kx");
                if (!one_d) need("init.ky");
                if (present.count("init.amp") && !std::isfinite(c.init_amp))
                    add("init.amp", "must be finite");
                if (present.count("init.kx") && c.init_kx < 0)
                    add("init.kx", "must be >= 0");
                if (!one_d && present.count("init.ky") && c.init_ky < 0)
                    add("init.ky", "must be >= 0");
                irrelevant("init.slope");
                irrelevant("init.seed");
                irrelevant("init.path");
                break;
            case InitKind::File:
                need("init.path");
                irrelevant("init.amp");
                irrelevant("init.seed");
                irrelevant("init.slope");
                irrelevant("init.kx");
                irrelevant("init.ky");
                break;
        }
    }

    if (present.count("output.sample_every") && c.sample_every < 1)
        add("output.sample_every", "must be >= 1");
    if (present.count("output.snapshot_every") && c.snapshot_every < 0)
        add("output.snapshot_every", "must be >= 0");

    if (c.stability_run && !one_d) {
        if (!present.count("stability.amp"))
            issues.push_back({0, "missing required key 'stability.amp' for a twin run"});
        if (!present.count("stability.seed"))
            issues.push_back({0, "missing required key 'stability.seed' for a twin run"});
        if (present.count("stability.amp") &&
            !(c.stability_amp != 0.0 && std::isfinite(c.stability_amp)))
            add("stability.amp", "must be nonzero and finite");
        if (c.scheme != Scheme::ImexSpectral)
            add("stability.amp", "twin runs only support scheme imex_spectral");
    }
}

inline std::string join_values(const std::vector<std::string>& vs) {
    std::string out;
    for (std::size_t k = 0; k < vs.size(); ++k) {
        if (k) out += ", ";
        out += vs[k];
    }
    return out;
}

}  // namespace detail

/// One expanded sweep point: a runnable config plus the overrides that
/// produced it, for the manifest.
struct ExpandedRun {
    ExperimentConfig config;
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// Cross-product of the sweep lists, declaration order, last key varying
/// fastest. A config without sweeps expands to itself. Throws
/// ValidationError on override values that fail to apply; parse_config
/// validates every combination, so reachable only with a hand-built config.
inline std::vector<ExpandedRun> expand_sweeps(const ExperimentConfig& base) {
    std::vector<ExpandedRun> runs;
    if (base.sweep.empty()) {
        runs.push_back({base, {}});
        runs.back().config.sweep.clear();
        return runs;
    }
    std::size_t total = 1;
    for (const SweepEntry& e : base.sweep) total *= e.values.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        ExpandedRun run;
        run.config = base;
        run.config.sweep.clear();
        std::size_t rem = idx;
        for (std::size_t k = base.sweep.size(); k-- > 0;) {
            const SweepEntry& e = base.sweep[k];
            std::size_t pick = rem % e.values.size();
            rem /= e.values.size();
            run.overrides.emplace_back(e.key, e.values[pick]);
        }
        std::reverse(run.overrides.begin(), run.overrides.end());
        for (const auto& [key, value] : run.overrides) {
            std::string err;
            if (!detail::apply_key(run.config, key, value, err))
                throw ValidationError("sweep override failed: " + err);
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

/// Parse and validate. All issues are collected rather than thrown; when
/// sweeps are present every combination is validated and distinct issues
/// are reported once. one_dimensional selects the interval-model key table
/// (the `run1d` subcommand).
inline ParsedConfig parse_config(const std::string& text, bool one_dimensional = false) {
    ParsedConfig out;
    out.config.one_dimensional = one_dimensional;

    const std::set<std::string>& known =
        one_dimensional ? detail::known_keys_1d() : detail::known_keys_2d();

    std::map<std::string, detail::RawEntry> entries;
    std::map<std::string, int> key_line;
    std::vector<std::pair<std::string, int>> order;  // diagnostics only

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line =
            eol == std::string::npos ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            out.issues.push_back({line_no, "expected 'section.key = value'"});
            continue;
        }
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || key.find('.') == std::string::npos) {
            out.issues.push_back({line_no, "expected 'section.key = value'"});
            continue;
        }

        if (key.rfind("sweep.", 0) == 0) {
            std::string target = key.substr(6);
            if (!known.count(target)) {
                out.issues.push_back({line_no, "unknown sweep key '" + target + "'"});
                continue;
            }
            bool dup = false;
            for (const SweepEntry& e : out.config.sweep) dup = dup || e.key == target;
            if (dup) {
                out.issues.push_back({line_no, "duplicate sweep key '" + target + "'"});
                continue;
            }
            SweepEntry entry;
            entry.key = target;
            std::size_t start = 0;
            while (start <= value.size()) {
                std::size_t comma = value.find(',', start);
                std::string item = detail::trim(
                    comma == std::string::npos ? value.substr(start)
                                               : value.substr(start, comma - start));
                if (!item.empty()) entry.values.push_back(item);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (entry.values.empty()) {
                out.issues.push_back({line_no, "sweep '" + target + "' has no values"});
                continue;
            }
            key_line["sweep." + target] = line_no;
            out.config.sweep.push_back(std::move(entry));
            continue;
        }

        if (!known.count(key)) {
            std::string note = one_dimensional && detail::known_keys_2d().count(key)
                                   ? " (not meaningful for the interval model)"
                                   : "";
            out.issues.push_back({line_no, "unknown key '" + key + "'" + note});
            continue;
        }
        if (entries.count(key)) {
            out.issues.push_back({line_no, "duplicate key '" + key + "'"});
            continue;
        }
        entries[key] = {value, line_no};
        key_line[key] = line_no;
        order.emplace_back(key, line_no);
    }

    std::set<std::string> present;
    for (const auto& [key, entry] : entries) present.insert(key);
    for (const SweepEntry& e : out.config.sweep) {
        if (present.count(e.key)) {
            out.issues.push_back({key_line["sweep." + e.key],
                                  "'" + e.key + "' is set both directly and by a sweep"});
        }
        present.insert(e.key);
    }

    for (const auto& [key, line] : order) {
        std::string err;
        if (!detail::apply_key(out.config, key, entries[key].value, err))
            out.issues.push_back({line, err});
    }
    if (!out.issues.empty()) return out;

    if (out.config.sweep.empty()) {
        detail::validate_config(out.config, present, key_line, out.issues);
        return out;
    }

    std::vector<ExpandedRun> combos = expand_sweeps(out.config);
    std::set<std::pair<int, std::string>> seen;
    for (const ExpandedRun& run : combos) {
        std::vector<ConfigIssue> combo_issues;
        detail::validate_config(run.config, present, key_line, combo_issues);
        for (ConfigIssue& issue : combo_issues) {
            std::string suffix;
            if (!run.overrides.empty()) {
                suffix = " [sweep point:";
                for (const auto& [k, v] : run.overrides) suffix += " " + k + "=" + v;
                suffix += "]";
            }
            ConfigIssue tagged{issue.line, issue.message + suffix};
            if (seen.insert({tagged.line, tagged.message}).second)
                out.issues.push_back(tagged);
        }
    }
    return out;
}

/// Canonical text form: fixed section order, only the keys the config
/// consumes, sweep lines last. parse(serialize(c)) == c for a valid c.
inline std::string serialize_config(const ExperimentConfig& c) {
    auto g17 = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::set<std::string> swept;
    for (const SweepEntry& e : c.sweep) swept.insert(e.key);

    std::string out;
    auto emit = [&](const std::string& key, const std::string& value) {
        if (swept.count(key)) return;
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };

    emit("grid.nx", std::to_string(c.nx));
    if (!c.one_dimensional) emit("grid.ny", std::to_string(c.ny));
    emit("grid.lx", g17(c.lx));
    if (!c.one_dimensional) {
        emit("grid.ly", g17(c.ly));
        emit("grid.bc", to_string(c.bc));
    }

    emit("flux.kind", to_string(c.flux_kind));
    emit("flux.alpha", g17(c.alpha));
    if (!c.one_dimensional && flux_uses_beta(c.flux_kind)) emit("flux.beta", g17(c.beta));
    if (!c.one_dimensional && flux_uses_b(c.flux_kind)) emit("flux.b", g17(c.b));

    emit("solver.scheme", to_string(c.scheme));
    emit("solver.dt", g17(c.dt));
    emit("solver.t_end", g17(c.t_end));
    emit("solver.nu", g17(c.nu));
    if (!c.one_dimensional) {
        if (c.scheme == Scheme::ImexSpectral)
            emit("solver.stabilization",
                 c.stabilization_auto ? "auto" : g17(c.stabilization));
        if (c.scheme == Scheme::ConstructiveIteration) {
            emit("solver.mollifier_eps0", g17(c.mollifier_eps0));
            emit("solver.max_iterations", std::to_string(c.max_iterations));
            emit("solver.fp_tol", g17(c.fp_tol));
        }
        if (c.scheme == Scheme::ExplicitRK2)
            emit("solver.energy_jump_factor", g17(c.energy_jump_factor));
    }

    emit("init.kind", to_string(c.init_kind));
    switch (c.init_kind) {
        case InitKind::WhiteNoise:
            emit("init.amp", g17(c.init_amp));
            emit("init.seed", std::to_string(c.seed));
            break;
        case InitKind::Pyramid:
            emit("init.slope", g17(c.init_slope));
            break;
        case InitKind::Cosine:
            emit("init.amp", g17(c.init_amp));
            emit("init.kx", std::to_string(c.init_kx));
            if (!c.one_dimensional) emit("init.ky", std::to_string(c.init_ky));
            break;
        case InitKind::File:
            emit("init.path", c.init_path);
            break;
    }

    emit("output.sample_every", std::to_string(c.sample_every));
    if (!c.one_dimensional) emit("output.snapshot_every", std::to_string(c.snapshot_every));

    if (c.stability_run && !c.one_dimensional) {
        emit("stability.amp", g17(c.stability_amp));
        emit("stability.seed", std::to_string(c.stability_seed));
    }

    for (const SweepEntry& e : c.sweep)
        out += "sweep." + e.key + " = " + detail::join_values(e.values) + '\n';
    return out;
}

}  // namespace mbe
