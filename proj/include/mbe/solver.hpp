#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mbe/diagnostics.hpp"
#include "mbe/errors.hpp"
#include "mbe/flux.hpp"
#include "mbe/grid.hpp"
#include "mbe/spectral.hpp"

namespace mbe {

enum class Scheme { ImexSpectral, ExplicitRK2, ConstructiveIteration };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::ImexSpectral: return "imex_spectral";
        case Scheme::ExplicitRK2: return "explicit_rk2";
        case Scheme::ConstructiveIteration: return "constructive";
    }
    return "?";
}

inline bool scheme_from_string(const std::string& s, Scheme& out) {
    if (s == "imex_spectral") out = Scheme::ImexSpectral;
    else if (s == "explicit_rk2") out = Scheme::ExplicitRK2;
    else if (s == "constructive") out = Scheme::ConstructiveIteration;
    else return false;
    return true;
}

struct SolverConfig {
    Scheme scheme = Scheme::ImexSpectral;
    double dt = 1e-3;
    double t_end = 1.0;
    double nu = 1.0;
    double stabilization = 0.0;   // A in the shift A*Lap(h_next - h); 0 disables
    double mollifier_eps0 = 0.0;  // first smoothing radius of the constructive scheme
    int max_iterations = 50;      // constructive iteration cap
    double fp_tol = 1e-8;         // relative L2(Q_T) fixed-point tolerance
    double energy_jump_factor = 10.0;  // explicit-step runaway detector

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be positive");
        if (!(t_end >= 0.0)) throw std::invalid_argument("SolverConfig: t_end must be >= 0");
        if (t_end > 0.0 && dt > t_end * (1.0 + 1e-12))
            throw std::invalid_argument("SolverConfig: dt must not exceed t_end");
        if (!(nu > 0.0)) throw std::invalid_argument("SolverConfig: nu must be positive");
        if (!(stabilization >= 0.0))
            throw std::invalid_argument("SolverConfig: stabilization must be >= 0");
        if (max_iterations < 1)
            throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
        if (!(fp_tol > 0.0)) throw std::invalid_argument("SolverConfig: fp_tol must be positive");
        if (!(energy_jump_factor > 0.0))
            throw std::invalid_argument("SolverConfig: energy_jump_factor must be positive");
        if (scheme == Scheme::ConstructiveIteration && !(mollifier_eps0 > 0.0))
            throw std::invalid_argument(
                "SolverConfig: mollifier_eps0 must be positive for the constructive scheme");
        step_count();
    }

    /// Number of steps; dt must tile [0, t_end] to within 1e-9 relative.
    long step_count() const {
        long n = std::lround(t_end / dt);
        if (std::abs(n * dt - t_end) > 1e-9 * std::max(dt, t_end))
            throw std::invalid_argument("SolverConfig: t_end must be an integer multiple of dt");
        return n;
    }
};

struct SimulationState {
    HeightField h;
    long step_count = 0;
};

/// Stabilization strength A = alpha * sup|f| over the working slope range;
/// the cubic profiles are unbounded so they are capped over the selected
/// band |y| <= ~4 where |1 - y| <= 3.
inline double default_stabilization(const FluxModel& model) {
    switch (model.kind) {
        case FluxKind::CubicIsotropic:
        case FluxKind::CubicAnisotropic:
            return 3.0 * model.alpha;
        default:
            return model.alpha;
    }
}

/// Current evaluated on faces: the normal slope lives on the face, the
/// transverse slope is the four-point average of the other staggered array.
/// Neumann boundary faces carry exactly zero flux (no-flux condition).
inline FaceField flux_faces(const FluxModel& model, const SlopeField& s, const Grid& g) {
    FaceField f;
    f.x = Array2(g.nx + 1, g.ny, 0.0);
    f.y = Array2(g.nx, g.ny + 1, 0.0);
    if (model.alpha == 0.0) return f;

    Array2 qbar = transverse_at_xfaces(s.qy, g);
    Array2 pbar = transverse_at_yfaces(s.px, g);

    const int ix_lo = g.bc == Bc::Neumann ? 1 : 0;
    const int ix_hi = g.bc == Bc::Neumann ? g.nx - 1 : g.nx - 1;
    for (int i = ix_lo; i <= ix_hi; ++i)
        for (int j = 0; j < g.ny; ++j)
            f.x(i, j) = model.current(s.px(i, j), qbar(i, j)).first;
    const int jy_lo = g.bc == Bc::Neumann ? 1 : 0;
    const int jy_hi = g.bc == Bc::Neumann ? g.ny - 1 : g.ny - 1;
    for (int i = 0; i < g.nx; ++i)
        for (int j = jy_lo; j <= jy_hi; ++j)
            f.y(i, j) = model.current(pbar(i, j), s.qy(i, j)).second;

    if (g.bc == Bc::Periodic) {
        for (int j = 0; j < g.ny; ++j) f.x(g.nx, j) = f.x(0, j);
        for (int i = 0; i < g.nx; ++i) f.y(i, g.ny) = f.y(i, 0);
    }
    return f;
}

inline Array2 divergence_of_flux(const Array2& values, const Grid& g, const FluxModel& model) {
    SlopeField s = gradient_faces(values, g);
    return divergence_centers(flux_faces(model, s, g), g);
}

/// -nu Lap^2 h - div J(grad h). Conservation form: the cell sum telescopes
/// to zero for both terms.
inline Array2 rhs(const HeightField& h, const FluxModel& model, double nu) {
    ensure_finite(h.values, "rhs");
    Array2 out = bilaplacian(h);
    Array2 divj = divergence_of_flux(h.values, h.grid, model);
    for (std::size_t k = 0; k < out.data.size(); ++k)
        out.data[k] = -nu * out.data[k] - divj.data[k];
    return out;
}

/// In-place IMEX step using a caller-owned transform workspace.
inline void step_imex_inplace(HeightField& h, const FluxModel& model, const SolverConfig& cfg,
                              SpectralSolver& spectral) {
    Array2 divj = divergence_of_flux(h.values, h.grid, model);
    spectral.imex_advance(h.values, divj, cfg.dt, cfg.nu, cfg.stabilization);
    h.time += cfg.dt;
}

inline SimulationState step_imex(const SimulationState& state, const FluxModel& model,
                                 const SolverConfig& cfg) {
    SimulationState next = state;
    SpectralSolver spectral(state.h.grid);
    step_imex_inplace(next.h, model, cfg, spectral);
    next.step_count = state.step_count + 1;
    if (!next.h.values.finite())
        throw NonFiniteError("step_imex: non-finite field after step " +
                             std::to_string(next.step_count));
    return next;
}

/// Largest dt the explicit midpoint scheme accepts: 0.9 * 2 / (nu lam_max^2
/// + 3 alpha lam_max), with lam_max the extreme five-point eigenvalue and
/// the factor 3 covering the catalogue's slope response on the selected
/// band. A guard, not a guarantee; the energy monitor below is the detector.
inline double explicit_dt_limit(const Grid& g, const FluxModel& model, double nu) {
    double lam_max = 4.0 / (g.dx * g.dx) + 4.0 / (g.dy * g.dy);
    return 0.9 * 2.0 / (nu * lam_max * lam_max + 3.0 * model.alpha * lam_max);
}

inline void step_rk2_inplace(HeightField& h, const FluxModel& model, const SolverConfig& cfg) {
    Array2 k1 = rhs(h, model, cfg.nu);
    HeightField mid(h.grid, h.values, h.time);
    for (std::size_t k = 0; k < mid.values.data.size(); ++k)
        mid.values.data[k] += 0.5 * cfg.dt * k1.data[k];
    Array2 k2 = rhs(mid, model, cfg.nu);
    for (std::size_t k = 0; k < h.values.data.size(); ++k)
        h.values.data[k] += cfg.dt * k2.data[k];
    h.time += cfg.dt;
}

inline SimulationState step_explicit_rk2(const SimulationState& state, const FluxModel& model,
                                         const SolverConfig& cfg) {
    if (cfg.dt > explicit_dt_limit(state.h.grid, model, cfg.nu))
        throw std::invalid_argument("step_explicit_rk2: dt exceeds the stability bound " +
                                    std::to_string(explicit_dt_limit(state.h.grid, model, cfg.nu)));
    double e_before = energy(state.h, model, cfg.nu);
    SimulationState next = state;
    step_rk2_inplace(next.h, model, cfg);
    next.step_count = state.step_count + 1;
    if (!next.h.values.finite())
        throw NonFiniteError("step_explicit_rk2: non-finite field after step " +
                             std::to_string(next.step_count));
    double e_after = energy(next.h, model, cfg.nu);
    if (e_after - e_before > cfg.energy_jump_factor * (std::abs(e_before) + 1.0))
        throw StabilityViolation("step_explicit_rk2: energy jumped from " +
                                 std::to_string(e_before) + " to " + std::to_string(e_after));
    return next;
}

namespace detail {

// Mollify the staggered slope arrays in index space, then restore the exact
// boundary structure (zero Neumann wall faces / periodic duplicates).
inline void smooth_slope_faces(SlopeField& s, const Grid& g, double eps) {
    if (mollifier_radius(eps, g.dx) == 0 && mollifier_radius(eps, g.dy) == 0) return;
    if (g.bc == Bc::Neumann) {
        s.px = mollify(s.px, g, eps);
        s.qy = mollify(s.qy, g, eps);
        for (int j = 0; j < g.ny; ++j) {
            s.px(0, j) = 0.0;
            s.px(g.nx, j) = 0.0;
        }
        for (int i = 0; i < g.nx; ++i) {
            s.qy(i, 0) = 0.0;
            s.qy(i, g.ny) = 0.0;
        }
    } else {
        Array2 core_x(g.nx, g.ny);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) core_x(i, j) = s.px(i, j);
        core_x = mollify(core_x, g, eps);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) s.px(i, j) = core_x(i, j);
        for (int j = 0; j < g.ny; ++j) s.px(g.nx, j) = s.px(0, j);

        Array2 core_y(g.nx, g.ny);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) core_y(i, j) = s.qy(i, j);
        core_y = mollify(core_y, g, eps);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) s.qy(i, j) = core_y(i, j);
        for (int i = 0; i < g.nx; ++i) s.qy(i, g.ny) = s.qy(i, 0);
    }
}

}  // namespace detail

/// Linear solve with the flux frozen at a given trajectory: each step takes
/// the frozen state's slopes, smooths them with radius eps, evaluates the
/// current, and advances h0 implicitly in the bilaplacian. With eps below the
/// grid spacing and the frozen trajectory equal to the running one, this is
/// exactly the IMEX recursion without stabilization. The frozen trajectory
/// must cover the full time lattice, nsteps + 1 slices.
inline std::vector<Array2> solve_linear_smoothed(const Array2& h0,
                                                 const std::vector<Array2>& frozen,
                                                 const Grid& g, const FluxModel& model,
                                                 const SolverConfig& cfg, double eps) {
    const long nsteps = cfg.step_count();
    if (static_cast<long>(frozen.size()) != nsteps + 1)
        throw std::invalid_argument("solve_linear_smoothed: trajectory must have " +
                                    std::to_string(nsteps + 1) + " slices, got " +
                                    std::to_string(frozen.size()));
    SpectralSolver spectral(g);
    std::vector<Array2> out;
    out.reserve(frozen.size());
    out.push_back(h0);
    for (long n = 0; n < nsteps; ++n) {
        SlopeField s = gradient_faces(frozen[n], g);
        detail::smooth_slope_faces(s, g, eps);
        Array2 divj = divergence_centers(flux_faces(model, s, g), g);
        Array2 next = out.back();
        spectral.imex_advance(next, divj, cfg.dt, cfg.nu, 0.0);
        if (!next.finite())
            throw NonFiniteError("solve_linear_smoothed: non-finite field after step " +
                                 std::to_string(n + 1));
        out.push_back(std::move(next));
    }
    return out;
}

struct ConstructiveResult {
    std::vector<Array2> trajectory;
    std::vector<double> residuals;
    int iterations = 0;
};

/// Successive linearization: bootstrap from the constant-in-time trajectory,
/// then iterate h^{m+1} = solve_linear_smoothed(h^m, eps0/m) until the
/// relative L2-in-space-and-time change drops below fp_tol. The space-time
/// quadrature weight dx dy dt is common to numerator and denominator and
/// cancels in the residual.
inline ConstructiveResult run_constructive(const HeightField& h0, const FluxModel& model,
                                           const SolverConfig& cfg) {
    if (!(cfg.mollifier_eps0 > 0.0))
        throw std::invalid_argument("run_constructive: mollifier_eps0 must be positive");
    const long nsteps = cfg.step_count();
    const Grid& g = h0.grid;
    std::vector<Array2> cur(static_cast<std::size_t>(nsteps) + 1, h0.values);
    cur = solve_linear_smoothed(h0.values, cur, g, model, cfg, cfg.mollifier_eps0);
    std::vector<double> residuals;
    for (int m = 1; m <= cfg.max_iterations; ++m) {
        double eps_m = cfg.mollifier_eps0 / m;
        std::vector<Array2> next = solve_linear_smoothed(h0.values, cur, g, model, cfg, eps_m);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            for (std::size_t c = 0; c < cur[k].data.size(); ++c) {
                double d = next[k].data[c] - cur[k].data[c];
                num += d * d;
                den += cur[k].data[c] * cur[k].data[c];
            }
        }
        double r = std::sqrt(num / std::max(den, 1e-300));
        residuals.push_back(r);
        cur = std::move(next);
        if (r < cfg.fp_tol) return {std::move(cur), std::move(residuals), m};
    }
    throw NoConvergence("run_constructive: residual " +
                            std::to_string(residuals.back()) + " after " +
                            std::to_string(cfg.max_iterations) + " iterations",
                        residuals);
}

struct RunOptions {
    long sample_every = 1;
    long snapshot_every = 0;  // in samples; initial and final always emitted
    std::function<void(const HeightField&, long)> snapshot_sink;
};

struct RunResult {
    HeightField final_state;
    std::vector<DiagnosticsRecord> records;
    std::vector<double> residuals;  // constructive scheme only
    int iterations = 0;             // constructive scheme only
};

namespace detail {

inline DiagnosticsRecord make_record(const HeightField& h, const FluxModel& model, double e,
                                     double rate, SpectralSolver& spectral) {
    DiagnosticsRecord rec;
    rec.time = h.time;
    rec.mass = mass(h);
    rec.energy = e;
    rec.energy_rate = rate;
    SlopeStatistics st = slope_statistics(h, model);
    rec.max_slope = st.max_slope;
    rec.selected_fraction = st.selected_fraction;
    rec.length_scale = coarsening_length(h, spectral);
    return rec;
}

}  // namespace detail

/// Drive the configured scheme to t_end, sampling diagnostics every
/// sample_every steps (step 0 and the final step always sampled). Errors
/// carry the failing step index and simulated time.
inline RunResult run(const HeightField& h0, const FluxModel& model, const SolverConfig& cfg,
                     const RunOptions& opt = {}) {
    cfg.validate();
    if (opt.sample_every < 1) throw std::invalid_argument("run: sample_every must be >= 1");
    const long nsteps = cfg.step_count();
    const Grid& g = h0.grid;
    const double t0 = h0.time;
    SpectralSolver spectral(g);

    auto is_sample = [&](long n) { return n % opt.sample_every == 0 || n == nsteps; };
    long sample_index = 0;
    auto maybe_snapshot = [&](const HeightField& h, long n) {
        if (!opt.snapshot_sink) return;
        bool wanted = n == 0 || n == nsteps ||
                      (opt.snapshot_every > 0 && sample_index % opt.snapshot_every == 0);
        if (wanted) opt.snapshot_sink(h, n);
    };

    if (cfg.scheme == Scheme::ConstructiveIteration) {
        ConstructiveResult c = run_constructive(h0, model, cfg);
        RunResult out{HeightField(g, c.trajectory.back(), t0 + nsteps * cfg.dt),
                      {},
                      std::move(c.residuals),
                      c.iterations};
        for (long n = 0; n <= nsteps; ++n) {
            if (!is_sample(n)) continue;
            HeightField h(g, c.trajectory[n], t0 + n * cfg.dt);
            double e = energy(h, model, cfg.nu);
            double rate = 0.0;
            if (n < nsteps) {
                HeightField hn(g, c.trajectory[n + 1], t0 + (n + 1) * cfg.dt);
                rate = (energy(hn, model, cfg.nu) - e) / cfg.dt;
            }
            out.records.push_back(detail::make_record(h, model, e, rate, spectral));
            maybe_snapshot(h, n);
            ++sample_index;
        }
        return out;
    }

    if (cfg.scheme == Scheme::ExplicitRK2 && cfg.dt > explicit_dt_limit(g, model, cfg.nu))
        throw std::invalid_argument("run: dt exceeds the explicit stability bound " +
                                    std::to_string(explicit_dt_limit(g, model, cfg.nu)));

    RunResult out{h0, {}, {}, 0};
    HeightField h = h0;
    bool pending = false;
    double pending_energy = 0.0;
    std::size_t pending_slot = 0;

    for (long n = 0; n <= nsteps; ++n) {
        h.time = t0 + n * cfg.dt;
        if (pending) {
            double e_now = energy(h, model, cfg.nu);
            out.records[pending_slot].energy_rate = (e_now - pending_energy) / cfg.dt;
            pending = false;
        }
        if (is_sample(n)) {
            double e = energy(h, model, cfg.nu);
            out.records.push_back(detail::make_record(h, model, e, 0.0, spectral));
            maybe_snapshot(h, n);
            ++sample_index;
            if (n < nsteps) {
                pending = true;
                pending_energy = e;
                pending_slot = out.records.size() - 1;
            }
        }
        if (n == nsteps) break;

        auto where = [&] {
            return "step " + std::to_string(n + 1) + " at t=" +
                   std::to_string(t0 + (n + 1) * cfg.dt);
        };
        if (cfg.scheme == Scheme::ImexSpectral) {
            Array2 divj = divergence_of_flux(h.values, g, model);
            spectral.imex_advance(h.values, divj, cfg.dt, cfg.nu, cfg.stabilization);
        } else {
            double e_before = energy(h, model, cfg.nu);
            step_rk2_inplace(h, model, cfg);
            h.time = t0 + (n + 1) * cfg.dt;
            double e_after = energy(h, model, cfg.nu);
            if (e_after - e_before > cfg.energy_jump_factor * (std::abs(e_before) + 1.0))
                throw StabilityViolation("run: " + where() + ": energy jumped from " +
                                         std::to_string(e_before) + " to " +
                                         std::to_string(e_after));
        }
        if (!h.values.finite())
            throw NonFiniteError("run: non-finite field after " + where());
    }
    out.final_state = h;
    return out;
}

}  // namespace mbe
