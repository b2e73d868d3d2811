#pragma once

/// Interval model: h_t + nu h_xxxx + (alpha h_x (1 - h_x^2))_x = 0 on (0, L)
/// with h_x = h_xxx = 0 at both endpoints. The discretization mirrors the 2D
/// module one dimension down: cell-centered heights, face-centered slopes and
/// fluxes, even reflection at the walls. run_1d integrates with the same IMEX
/// splitting (implicit bending in the cosine basis, explicit current) and
/// accumulates an a priori estimate ledger alongside the sampled trajectory.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbe/array2.hpp"
#include "mbe/errors.hpp"
#include "mbe/solver.hpp"

namespace mbe {

/// Uniform 1D cell lattice. Cell centers sit at (i + 0.5) dx, faces at i dx.
struct Line1D {
    int n = 0;
    double length = 0.0;
    double dx = 0.0;

    Line1D(int n_, double length_) : n(n_), length(length_) {
        if (n < 8) throw std::invalid_argument("Line1D: need at least 8 cells");
        if (!(length > 0.0) || !std::isfinite(length))
            throw std::invalid_argument("Line1D: length must be positive and finite");
        dx = length / n;
    }
};

namespace detail {

inline void require_line_data(const std::vector<double>& h, const Line1D& line, const char* who) {
    if (static_cast<int>(h.size()) != line.n)
        throw std::invalid_argument(std::string(who) + ": data size does not match line");
    for (double v : h)
        if (!std::isfinite(v)) throw NonFiniteError(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// Three-point Laplacian with even reflection at the walls, the same
/// difference-of-differences arithmetic as the 2D stencil.
inline std::vector<double> laplacian_1d(const std::vector<double>& h, const Line1D& line) {
    detail::require_line_data(h, line, "laplacian_1d");
    const int n = line.n;
    const double rdx2 = 1.0 / (line.dx * line.dx);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double c = h[i];
        double w = h[i > 0 ? i - 1 : 0];
        double e = h[i + 1 < n ? i + 1 : n - 1];
        out[i] = ((e - c) - (c - w)) * rdx2;
    }
    return out;
}

/// Face slopes h_x, size n+1. The wall faces are zero by the h_x = 0 condition.
inline std::vector<double> slope_faces_1d(const std::vector<double>& h, const Line1D& line) {
    detail::require_line_data(h, line, "slope_faces_1d");
    std::vector<double> p(line.n + 1, 0.0);
    for (int i = 1; i < line.n; ++i) p[i] = (h[i] - h[i - 1]) / line.dx;
    return p;
}

/// Total conservative face flux G = nu h_xxx + alpha h_x (1 - h_x^2), size
/// n+1. Both wall faces are exactly zero: h_x = 0 kills the current and
/// h_xxx = 0 kills the bending flux. h_xxx at a face is the one-sided
/// difference of the reflected Laplacian.
inline std::vector<double> face_flux_1d(const std::vector<double>& h, const Line1D& line,
                                        double nu, double alpha) {
    std::vector<double> lap = laplacian_1d(h, line);
    std::vector<double> p = slope_faces_1d(h, line);
    std::vector<double> g(line.n + 1, 0.0);
    for (int i = 1; i < line.n; ++i) {
        double current = alpha * p[i] * (1.0 - p[i] * p[i]);
        g[i] = nu * (lap[i] - lap[i - 1]) / line.dx + current;
    }
    return g;
}

/// Right-hand side h_t = -dG/dx in conservative form. The cell sum telescopes
/// to the wall fluxes, which vanish, so the total mass derivative is zero to
/// roundoff. Algebraically this equals -nu bilap(h) - d/dx of the current with
/// reflected ghosts, the operator the IMEX stepper splits.
inline std::vector<double> rhs_1d(const std::vector<double>& h, const Line1D& line, double nu,
                                  double alpha) {
    std::vector<double> g = face_flux_1d(h, line, nu, alpha);
    std::vector<double> out(line.n);
    for (int i = 0; i < line.n; ++i) out[i] = -(g[i + 1] - g[i]) / line.dx;
    return out;
}

/// One row of the a priori estimate ledger. The three L2-level quantities
/// bound the weak-solution construction; the three H1-level quantities bound
/// the slope. Integrals use the left-rectangle rule on the step lattice, so
/// at time n dt they sum the integrand over steps 0..n-1.
///
/// Discrete readings: h_xx is the reflected Laplacian at cell centers, h_x is
/// face-based for the seminorm hx_sq and cell-centered (face average) inside
/// the quartic and mixed integrands so they pair with h_xx at the same point,
/// h_xxx is the one-sided face difference of the Laplacian.
struct Ledger1DRow {
    double time = 0.0;
    double h_sq = 0.0;             // ||h||^2
    double int_hxx_sq_dt = 0.0;    // integral of ||h_xx||^2 dt
    double int_hx4_dxdt = 0.0;     // integral of |h_x|^4 dx dt
    double hx_sq = 0.0;            // ||h_x||^2
    double int_hxxx_sq_dt = 0.0;   // integral of ||h_xxx||^2 dt
    double int_3hx2hxx2_dt = 0.0;  // integral of 3 |h_x|^2 |h_xx|^2 dx dt
};

struct Run1DResult {
    std::vector<double> h;                      // final state
    double time = 0.0;                          // final time
    std::vector<Ledger1DRow> rows;              // ledger at each sample
    std::vector<std::vector<double>> snapshots; // state at each sample, aligned with rows
};

namespace detail {

struct Instant1D {
    double h_sq = 0.0;
    double hxx_sq = 0.0;
    double hx4 = 0.0;
    double hx_sq = 0.0;
    double hxxx_sq = 0.0;
    double mixed = 0.0;
};

inline Instant1D instantaneous_1d(const std::vector<double>& h, const Line1D& line) {
    const int n = line.n;
    const double dx = line.dx;
    std::vector<double> lap = laplacian_1d(h, line);
    std::vector<double> p = slope_faces_1d(h, line);
    Instant1D q;
    for (int i = 0; i < n; ++i) {
        double pc = 0.5 * (p[i] + p[i + 1]);
        q.h_sq += h[i] * h[i];
        q.hxx_sq += lap[i] * lap[i];
        q.hx4 += pc * pc * pc * pc;
        q.mixed += 3.0 * pc * pc * lap[i] * lap[i];
    }
    for (int i = 1; i < n; ++i) {
        q.hx_sq += p[i] * p[i];
        double w = (lap[i] - lap[i - 1]) / dx;
        q.hxxx_sq += w * w;
    }
    q.h_sq *= dx;
    q.hxx_sq *= dx;
    q.hx4 *= dx;
    q.hx_sq *= dx;
    q.hxxx_sq *= dx;
    q.mixed *= dx;
    return q;
}

}  // namespace detail

/// Integrate the interval model. Time stepping is the 2D IMEX scheme one
/// dimension down: bending advances implicitly in the cosine basis, the
/// current divergence explicitly, and the zero mode is pinned to the
/// compensated cell sum so mass is conserved to machine precision.
///
/// Only cfg.dt and cfg.t_end are consulted (plus the step-lattice check);
/// the viscosity argument governs the run, and cfg.scheme must be the
/// default ImexSpectral. Samples land at step 0, every sample_every-th
/// step, and the final step.
inline Run1DResult run_1d(const std::vector<double>& h0, const Line1D& line, double nu,
                          double alpha, const SolverConfig& cfg, long sample_every = 1) {
    detail::require_line_data(h0, line, "run_1d");
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw std::invalid_argument("run_1d: nu must be positive and finite");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("run_1d: alpha must be nonnegative and finite");
    if (cfg.scheme != Scheme::ImexSpectral)
        throw std::invalid_argument("run_1d: only the imex_spectral scheme runs on the interval");
    cfg.validate();
    if (sample_every < 1) throw std::invalid_argument("run_1d: sample_every must be >= 1");

    const long nsteps = cfg.step_count();
    const int n = line.n;
    const double dx = line.dx;
    SpectralLine solver(n, dx);

    Run1DResult res;
    std::vector<double> h = h0;
    detail::Instant1D q = detail::instantaneous_1d(h, line);
    Ledger1DRow row;
    row.time = 0.0;
    row.h_sq = q.h_sq;
    row.hx_sq = q.hx_sq;
    res.rows.push_back(row);
    res.snapshots.push_back(h);

    double int_hxx = 0.0, int_hx4 = 0.0, int_hxxx = 0.0, int_mixed = 0.0;
    std::vector<double> divflux(n);
    for (long step = 1; step <= nsteps; ++step) {
        int_hxx += cfg.dt * q.hxx_sq;
        int_hx4 += cfg.dt * q.hx4;
        int_hxxx += cfg.dt * q.hxxx_sq;
        int_mixed += cfg.dt * q.mixed;

        std::vector<double> p = slope_faces_1d(h, line);
        std::vector<double> cur(n + 1, 0.0);
        for (int i = 1; i < n; ++i) cur[i] = alpha * p[i] * (1.0 - p[i] * p[i]);
        for (int i = 0; i < n; ++i) divflux[i] = (cur[i + 1] - cur[i]) / dx;

        solver.imex_advance(h, divflux, cfg.dt, nu);
        for (double v : h)
            if (!std::isfinite(v))
                throw NonFiniteError("run_1d: non-finite state after step " +
                                     std::to_string(step));

        q = detail::instantaneous_1d(h, line);
        if (step % sample_every == 0 || step == nsteps) {
            Ledger1DRow r;
            r.time = static_cast<double>(step) * cfg.dt;
            r.h_sq = q.h_sq;
            r.int_hxx_sq_dt = int_hxx;
            r.int_hx4_dxdt = int_hx4;
            r.hx_sq = q.hx_sq;
            r.int_hxxx_sq_dt = int_hxxx;
            r.int_3hx2hxx2_dt = int_mixed;
            res.rows.push_back(r);
            res.snapshots.push_back(h);
        }
    }

    res.h = h;
    res.time = static_cast<double>(nsteps) * cfg.dt;
    return res;
}

/// Cell mass of a 1D state, compensated summation times the cell width.
inline double mass_1d(const std::vector<double>& h, const Line1D& line) {
    return kahan_sum(h) * line.dx;
}

}  // namespace mbe
