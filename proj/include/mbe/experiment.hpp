#pragma once

/// Experiment orchestration: expand a parsed config into runs, execute them
/// (optionally in parallel), and record every artifact in a manifest with a
/// content checksum. Each run owns its directory, so a failing run cannot
/// touch a sibling; failures are recorded and the remaining runs proceed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mbe/config.hpp"
#include "mbe/diagnostics.hpp"
#include "mbe/io.hpp"
#include "mbe/log.hpp"
#include "mbe/model1d.hpp"
#include "mbe/noise.hpp"
#include "mbe/solver.hpp"
#include "mbe/stability.hpp"

namespace mbe {

/// Initial data from the init.* section. File data must agree with the
/// configured lattice; the y extent is not stored in a snapshot, so ly is
/// taken from the config unchecked.
inline HeightField construct_initial(const ExperimentConfig& c, const Grid& g) {
    switch (c.init_kind) {
        case InitKind::WhiteNoise:
            return HeightField(g, white_noise(g.nx, g.ny, c.init_amp, c.seed));
        case InitKind::Pyramid: {
            Array2 v(g.nx, g.ny);
            const double cx = 0.5 * g.lx, cy = 0.5 * g.ly;
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j) {
                    double x = (i + 0.5) * g.dx, y = (j + 0.5) * g.dy;
                    v(i, j) = -c.init_slope * (std::abs(x - cx) + std::abs(y - cy));
                }
            return HeightField(g, v);
        }
        case InitKind::Cosine: {
            Array2 v(g.nx, g.ny);
            const double fx = (g.bc == Bc::Neumann ? M_PI : 2.0 * M_PI) * c.init_kx;
            const double fy = (g.bc == Bc::Neumann ? M_PI : 2.0 * M_PI) * c.init_ky;
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j)
                    v(i, j) = c.init_amp * std::cos(fx * (i + 0.5) / g.nx) *
                              std::cos(fy * (j + 0.5) / g.ny);
            return HeightField(g, v);
        }
        case InitKind::File: {
            Snapshot s;
            try {
                s = read_snapshot(c.init_path);
            } catch (const ValidationError&) {
                throw;
            } catch (const std::exception& e) {
                throw ValidationError("init.path: " + std::string(e.what()));
            }
            if (s.nx != g.nx || s.ny != g.ny)
                throw ValidationError("init.path: snapshot is " + std::to_string(s.nx) + "x" +
                                      std::to_string(s.ny) + " but the grid is " +
                                      std::to_string(g.nx) + "x" + std::to_string(g.ny));
            if (s.bc != g.bc)
                throw ValidationError(std::string("init.path: snapshot bc is ") +
                                      to_string(s.bc) + " but the grid bc is " +
                                      to_string(g.bc));
            if (std::abs(s.lx - g.lx) > 1e-12 * std::max(1.0, std::abs(g.lx)))
                throw ValidationError("init.path: snapshot lx does not match grid.lx");
            return HeightField(g, s.values, s.time);
        }
    }
    throw ValidationError("init.kind: unknown kind");
}

inline std::vector<double> construct_initial_1d(const ExperimentConfig& c, const Line1D& line) {
    std::vector<double> h(line.n, 0.0);
    switch (c.init_kind) {
        case InitKind::WhiteNoise: {
            SplitMix64 rng(c.seed);
            for (double& v : h) v = rng.next_symmetric(c.init_amp);
            return h;
        }
        case InitKind::Cosine: {
            for (int i = 0; i < line.n; ++i)
                h[i] = c.init_amp * std::cos(M_PI * c.init_kx * (i + 0.5) / line.n);
            return h;
        }
        default:
            throw ValidationError("init.kind: the interval model only supports white_noise "
                                  "and cosine");
    }
}

namespace detail {

struct ArtifactEntry {
    std::string path;  // relative to the experiment directory
    std::string checksum;
    std::uintmax_t bytes = 0;
};

struct RunRecord {
    std::string name;
    std::string status;      // "ok" | "failed"
    std::string error;       // empty when ok
    std::string error_kind;  // "config" | "numerical", empty when ok
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<ArtifactEntry> artifacts;
};

inline void write_manifest(const std::filesystem::path& out_dir,
                           const std::map<std::string, RunRecord>& records) {
    nlohmann::ordered_json j;
    j["runs"] = nlohmann::ordered_json::array();
    for (const auto& [name, rec] : records) {
        nlohmann::ordered_json r;
        r["name"] = rec.name;
        r["status"] = rec.status;
        r["error"] = rec.error;
        if (!rec.error_kind.empty()) r["error_kind"] = rec.error_kind;
        nlohmann::ordered_json ov = nlohmann::ordered_json::object();
        for (const auto& [k, v] : rec.overrides) ov[k] = v;
        r["overrides"] = ov;
        r["artifacts"] = nlohmann::ordered_json::array();
        for (const ArtifactEntry& a : rec.artifacts)
            r["artifacts"].push_back(
                {{"path", a.path}, {"checksum", a.checksum}, {"bytes", a.bytes}});
        j["runs"].push_back(r);
    }
    std::filesystem::path tmp = out_dir / "manifest.json.tmp";
    write_text_file(tmp, j.dump(2) + "\n");
    std::filesystem::rename(tmp, out_dir / "manifest.json");
}

inline std::map<std::string, RunRecord> load_manifest(const std::filesystem::path& path) {
    std::map<std::string, RunRecord> records;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open manifest for resume: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("runs") || !j["runs"].is_array())
        throw ValidationError("manifest is not valid JSON: " + path.string());
    for (const auto& r : j["runs"]) {
        RunRecord rec;
        rec.name = r.value("name", "");
        rec.status = r.value("status", "");
        rec.error = r.value("error", "");
        rec.error_kind = r.value("error_kind", "");
        if (r.contains("overrides"))
            for (auto it = r["overrides"].begin(); it != r["overrides"].end(); ++it)
                rec.overrides.emplace_back(it.key(), it.value().get<std::string>());
        if (r.contains("artifacts"))
            for (const auto& a : r["artifacts"]) {
                ArtifactEntry e;
                e.path = a.value("path", "");
                e.checksum = a.value("checksum", "");
                e.bytes = a.value("bytes", 0ull);
                rec.artifacts.push_back(e);
            }
        if (rec.name.empty() || rec.status.empty())
            throw ValidationError("manifest entry missing name or status");
        records[rec.name] = rec;
    }
    return records;
}

/// Executes one expanded run in its own directory. Never throws; failures
/// come back in the record with the artifacts that were completely written.
inline RunRecord run_one(const ExpandedRun& run, const std::string& name,
                         const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    RunRecord rec;
    rec.name = name;
    rec.status = "ok";
    rec.overrides = run.overrides;

    const fs::path dir = out_dir / name;
    auto record_file = [&](const fs::path& p) {
        ArtifactEntry e;
        e.path = fs::relative(p, out_dir).generic_string();
        e.checksum = file_checksum(p);
        e.bytes = fs::file_size(p);
        rec.artifacts.push_back(e);
    };

    try {
        fs::create_directories(dir);
        const ExperimentConfig& c = run.config;
        write_text_file(dir / "config.txt", serialize_config(c));
        record_file(dir / "config.txt");

        if (c.one_dimensional) {
            Line1D line = c.make_line();
            std::vector<double> h0 = construct_initial_1d(c, line);
            Run1DResult r = run_1d(h0, line, c.nu, c.alpha, c.solver_config(), c.sample_every);
            write_ledger_csv(dir / "ledger.csv", r.rows);
            record_file(dir / "ledger.csv");
            return rec;
        }

        Grid g = c.make_grid();
        FluxModel model = c.flux_model();
        SolverConfig scfg = c.solver_config();
        HeightField h0 = construct_initial(c, g);

        RunOptions opt;
        opt.sample_every = c.sample_every;
        opt.snapshot_every = c.snapshot_every;
        opt.snapshot_sink = [&](const HeightField& h, long n) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "snapshot_%06ld.bin", n);
            write_snapshot(dir / buf, h);
            record_file(dir / buf);
        };

        RunResult rr = mbe::run(h0, model, scfg, opt);
        write_diagnostics_csv(dir / "diagnostics.csv", rr.records);
        record_file(dir / "diagnostics.csv");

        write_histogram_csv(dir / "histogram.csv", slope_statistics(rr.final_state, model));
        record_file(dir / "histogram.csv");

        if (c.stability_run) {
            PerturbationSpec delta;
            delta.amplitude = c.stability_amp;
            delta.seed = c.stability_seed;
            StabilityReport rep = stability_experiment(h0, delta, model, scfg, c.sample_every);
            write_stability_csv(dir / "stability.csv", rep);
            record_file(dir / "stability.csv");
        }
    } catch (const ValidationError& e) {
        rec.status = "failed";
        rec.error = e.what();
        rec.error_kind = "config";
    } catch (const std::exception& e) {
        rec.status = "failed";
        rec.error = e.what();
        rec.error_kind = "numerical";
    }
    return rec;
}

}  // namespace detail

/// Run every sweep point of a validated config under out_dir. Run
/// directories are named run_000, run_001, ... in expansion order (a config
/// without sweeps is the single run_000). The manifest is rewritten after
/// each completion under a single writer, sorted by run name, so the final
/// bytes do not depend on --jobs. With resume, runs already recorded in the
/// manifest are skipped (ok and failed alike); only missing runs execute.
///
/// Returns the process exit code: 0 when every recorded run is ok, 2 when
/// the only failures are configuration-class, 3 when any run failed
/// numerically.
inline int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                          int jobs = 1, bool resume = false) {
    namespace fs = std::filesystem;
    std::vector<ExpandedRun> runs = expand_sweeps(cfg);
    std::vector<std::string> names(runs.size());
    for (std::size_t k = 0; k < runs.size(); ++k) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "run_%03zu", k);
        names[k] = buf;
    }

    fs::create_directories(out_dir);
    std::map<std::string, detail::RunRecord> records;
    if (resume && fs::exists(out_dir / "manifest.json")) {
        std::map<std::string, detail::RunRecord> prior =
            detail::load_manifest(out_dir / "manifest.json");
        for (const std::string& name : names) {
            auto it = prior.find(name);
            if (it != prior.end()) records[name] = it->second;
        }
    }

    std::vector<std::size_t> pending;
    for (std::size_t k = 0; k < runs.size(); ++k)
        if (!records.count(names[k])) pending.push_back(k);

    log_info("experiment: " + std::to_string(runs.size()) + " run(s), " +
             std::to_string(pending.size()) + " to execute");

    std::mutex mu;
    if (!pending.empty()) {
        std::atomic<std::size_t> cursor{0};
        int nthreads = std::clamp(jobs, 1, 64);
        nthreads = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(nthreads), pending.size()));
        auto worker = [&] {
            for (;;) {
                std::size_t slot = cursor.fetch_add(1);
                if (slot >= pending.size()) return;
                std::size_t k = pending[slot];
                detail::RunRecord rec = detail::run_one(runs[k], names[k], out_dir);
                std::lock_guard<std::mutex> lock(mu);
                if (rec.status == "ok")
                    log_info(rec.name + ": ok (" + std::to_string(rec.artifacts.size()) +
                             " artifacts)");
                else
                    log_error(rec.name + ": " + rec.error);
                records[rec.name] = std::move(rec);
                detail::write_manifest(out_dir, records);
            }
        };
        std::vector<std::thread> threads;
        for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    } else {
        std::lock_guard<std::mutex> lock(mu);
        detail::write_manifest(out_dir, records);
    }

    bool any_config = false, any_numerical = false;
    for (const auto& [name, rec] : records) {
        if (rec.status == "ok") continue;
        if (rec.error_kind == "config") any_config = true;
        else any_numerical = true;
    }
    if (any_numerical) return 3;
    if (any_config) return 2;
    return 0;
}

}  // namespace mbe
