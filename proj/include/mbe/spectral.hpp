#pragma once

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "mbe/array2.hpp"
#include "mbe/grid.hpp"

namespace mbe {

namespace detail {

// FFTW's planner mutates global state; plan creation and destruction must be
// serialized. Executing distinct plans on their own buffers is safe.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

/// Transform-space stepper for one grid. Under even reflection the half-
/// sample cosine basis (DCT-II) diagonalizes the five-point Laplacian with
/// lambda_k = -(2/dx^2)(1 - cos(pi k/n)); the periodic DFT basis gives
/// lambda_k = -(4/dx^2) sin^2(pi k/n). Plans use FFTW_ESTIMATE so the chosen
/// algorithm, and therefore every rounding, is reproducible run to run.
class SpectralSolver {
  public:
    explicit SpectralSolver(const Grid& g) : grid_(g) {
        const int nx = g.nx, ny = g.ny;
        rin_ = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
        rout_ = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        if (g.bc == Bc::Neumann) {
            fwd_ = fftw_plan_r2r_2d(nx, ny, rin_, rout_, FFTW_REDFT10, FFTW_REDFT10,
                                    FFTW_ESTIMATE);
            inv_ = fftw_plan_r2r_2d(nx, ny, rout_, rin_, FFTW_REDFT01, FFTW_REDFT01,
                                    FFTW_ESTIMATE);
            norm_ = 1.0 / (4.0 * nx * ny);
            spec_h_.resize(static_cast<std::size_t>(nx) * ny);
        } else {
            nyc_ = ny / 2 + 1;
            cbuf_ = fftw_alloc_complex(static_cast<std::size_t>(nx) * nyc_);
            csave_ = fftw_alloc_complex(static_cast<std::size_t>(nx) * nyc_);
            cfwd_ = fftw_plan_dft_r2c_2d(nx, ny, rin_, cbuf_, FFTW_ESTIMATE);
            cinv_ = fftw_plan_dft_c2r_2d(nx, ny, cbuf_, rin_, FFTW_ESTIMATE);
            norm_ = 1.0 / (static_cast<double>(nx) * ny);
        }
        lamx_.resize(nx);
        lamy_.resize(g.bc == Bc::Neumann ? ny : nyc_);
        for (int i = 0; i < nx; ++i)
            lamx_[i] = g.bc == Bc::Neumann ? neumann_eigenvalue(i, nx, g.dx)
                                           : periodic_eigenvalue(i, nx, g.dx);
        for (int j = 0; j < static_cast<int>(lamy_.size()); ++j)
            lamy_[j] = g.bc == Bc::Neumann ? neumann_eigenvalue(j, ny, g.dy)
                                           : periodic_eigenvalue(j, ny, g.dy);
    }

    ~SpectralSolver() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (inv_) fftw_destroy_plan(inv_);
        if (cfwd_) fftw_destroy_plan(cfwd_);
        if (cinv_) fftw_destroy_plan(cinv_);
        fftw_free(rin_);
        fftw_free(rout_);
        if (cbuf_) fftw_free(cbuf_);
        if (csave_) fftw_free(csave_);
    }

    SpectralSolver(const SpectralSolver&) = delete;
    SpectralSolver& operator=(const SpectralSolver&) = delete;

    static double neumann_eigenvalue(int k, int n, double d) {
        return -2.0 / (d * d) * (1.0 - std::cos(std::numbers::pi * k / n));
    }

    static double periodic_eigenvalue(int k, int n, double d) {
        double s = std::sin(std::numbers::pi * k / n);
        return -4.0 / (d * d) * s * s;
    }

    const Grid& grid() const { return grid_; }

    /// One transform-space step of
    ///   (I + dt nu Lap^2 - dt A Lap) h_next = (I - dt A Lap) h - dt g,
    /// i.e. implicit bilaplacian, explicit source g = div J, and the
    /// stabilization shift A applied to the increment only. The zero mode is
    /// overwritten with the compensated cell sum of h, so the step conserves
    /// mass to machine precision by construction.
    void imex_advance(Array2& h, const Array2& divflux, double dt, double nu, double stab) {
        const int nx = grid_.nx, ny = grid_.ny;
        if (grid_.bc == Bc::Neumann) {
            copy_in(h);
            fftw_execute(fwd_);
            for (std::size_t k = 0; k < spec_h_.size(); ++k) spec_h_[k] = rout_[k];
            copy_in(divflux);
            fftw_execute(fwd_);
            for (int i = 0; i < nx; ++i) {
                for (int j = 0; j < ny; ++j) {
                    std::size_t idx = static_cast<std::size_t>(i) * ny + j;
                    double lam = lamx_[i] + lamy_[j];
                    double shift = 1.0 - dt * stab * lam;
                    double den = 1.0 + dt * nu * lam * lam - dt * stab * lam;
                    rout_[idx] = (spec_h_[idx] * shift - dt * rout_[idx]) / den;
                }
            }
            rout_[0] = 4.0 * kahan_sum(h.data);
            fftw_execute(inv_);
            copy_out(h);
        } else {
            copy_in(h);
            fftw_execute(cfwd_);
            std::size_t nmodes = static_cast<std::size_t>(nx) * nyc_;
            for (std::size_t k = 0; k < nmodes; ++k) {
                csave_[k][0] = cbuf_[k][0];
                csave_[k][1] = cbuf_[k][1];
            }
            copy_in(divflux);
            fftw_execute(cfwd_);
            for (int i = 0; i < nx; ++i) {
                for (int j = 0; j < nyc_; ++j) {
                    std::size_t idx = static_cast<std::size_t>(i) * nyc_ + j;
                    double lam = lamx_[i] + lamy_[j];
                    double shift = 1.0 - dt * stab * lam;
                    double den = 1.0 + dt * nu * lam * lam - dt * stab * lam;
                    cbuf_[idx][0] = (csave_[idx][0] * shift - dt * cbuf_[idx][0]) / den;
                    cbuf_[idx][1] = (csave_[idx][1] * shift - dt * cbuf_[idx][1]) / den;
                }
            }
            cbuf_[0][0] = kahan_sum(h.data);
            cbuf_[0][1] = 0.0;
            fftw_execute(cinv_);
            copy_out(h);
        }
    }

    /// Spectral power per mode with its physical wavenumber, zero mode
    /// excluded. Periodic conjugate pairs stored once by r2c are weighted
    /// twice so the pooled spectrum matches the full transform.
    void mode_powers(const Array2& field, std::vector<double>& k_out,
                     std::vector<double>& power_out) {
        const int nx = grid_.nx, ny = grid_.ny;
        k_out.clear();
        power_out.clear();
        copy_in(field);
        if (grid_.bc == Bc::Neumann) {
            fftw_execute(fwd_);
            k_out.reserve(static_cast<std::size_t>(nx) * ny - 1);
            power_out.reserve(k_out.capacity());
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) {
                    if (i == 0 && j == 0) continue;
                    double kx = std::numbers::pi * i / grid_.lx;
                    double ky = std::numbers::pi * j / grid_.ly;
                    double c = rout_[static_cast<std::size_t>(i) * ny + j];
                    k_out.push_back(std::sqrt(kx * kx + ky * ky));
                    power_out.push_back(c * c);
                }
        } else {
            fftw_execute(cfwd_);
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < nyc_; ++j) {
                    if (i == 0 && j == 0) continue;
                    int mi = std::min(i, nx - i);
                    double kx = 2.0 * std::numbers::pi * mi / grid_.lx;
                    double ky = 2.0 * std::numbers::pi * j / grid_.ly;
                    std::size_t idx = static_cast<std::size_t>(i) * nyc_ + j;
                    double p = cbuf_[idx][0] * cbuf_[idx][0] + cbuf_[idx][1] * cbuf_[idx][1];
                    bool paired = j > 0 && !(ny % 2 == 0 && j == ny / 2);
                    k_out.push_back(std::sqrt(kx * kx + ky * ky));
                    power_out.push_back(paired ? 2.0 * p : p);
                }
        }
    }

  private:
    void copy_in(const Array2& a) {
        for (std::size_t k = 0; k < a.data.size(); ++k) rin_[k] = a.data[k];
    }

    void copy_out(Array2& a) {
        for (std::size_t k = 0; k < a.data.size(); ++k) a.data[k] = rin_[k] * norm_;
    }

    Grid grid_;
    double* rin_ = nullptr;
    double* rout_ = nullptr;
    fftw_complex* cbuf_ = nullptr;
    fftw_complex* csave_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr, cfwd_ = nullptr, cinv_ = nullptr;
    std::vector<double> spec_h_;
    std::vector<double> lamx_, lamy_;
    double norm_ = 1.0;
    int nyc_ = 0;
};

/// One-dimensional cosine-basis stepper for the interval model, same
/// conventions as SpectralSolver under even reflection.
class SpectralLine {
  public:
    SpectralLine(int n, double dx) : n_(n), dx_(dx) {
        rin_ = fftw_alloc_real(n);
        rout_ = fftw_alloc_real(n);
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_r2r_1d(n, rin_, rout_, FFTW_REDFT10, FFTW_ESTIMATE);
        inv_ = fftw_plan_r2r_1d(n, rout_, rin_, FFTW_REDFT01, FFTW_ESTIMATE);
        lam_.resize(n);
        for (int k = 0; k < n; ++k) lam_[k] = SpectralSolver::neumann_eigenvalue(k, n, dx);
    }

    ~SpectralLine() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(rin_);
        fftw_free(rout_);
    }

    SpectralLine(const SpectralLine&) = delete;
    SpectralLine& operator=(const SpectralLine&) = delete;

    void imex_advance(std::vector<double>& h, const std::vector<double>& divflux, double dt,
                      double nu) {
        for (int i = 0; i < n_; ++i) rin_[i] = h[i];
        fftw_execute(fwd_);
        std::vector<double> spec_h(rout_, rout_ + n_);
        for (int i = 0; i < n_; ++i) rin_[i] = divflux[i];
        fftw_execute(fwd_);
        for (int i = 0; i < n_; ++i) {
            double lam = lam_[i];
            rout_[i] = (spec_h[i] - dt * rout_[i]) / (1.0 + dt * nu * lam * lam);
        }
        rout_[0] = 2.0 * kahan_sum(h);
        fftw_execute(inv_);
        double norm = 1.0 / (2.0 * n_);
        for (int i = 0; i < n_; ++i) h[i] = rin_[i] * norm;
    }

  private:
    int n_;
    double dx_;
    double* rin_;
    double* rout_;
    fftw_plan fwd_, inv_;
    std::vector<double> lam_;
};

}  // namespace mbe
