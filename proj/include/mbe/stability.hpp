#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mbe/noise.hpp"
#include "mbe/solver.hpp"

namespace mbe {

/// White-noise perturbation added to the second twin. The amplitude must be
/// nonzero; an amplitude far below the field's machine epsilon (say 1e-300
/// for order-one data) is the sanctioned way to request twins that coincide
/// bitwise after roundoff.
struct PerturbationSpec {
    double amplitude = 1e-6;
    std::uint64_t seed = 1;

    void validate() const {
        if (!std::isfinite(amplitude) || amplitude == 0.0)
            throw std::invalid_argument("PerturbationSpec: amplitude must be finite and nonzero");
    }
};

struct StabilityReport {
    std::vector<double> times;
    std::vector<double> u_norm;    // ||h1 - h2||_{L2} at each sample
    std::vector<double> envelope;  // ||u(0)|| e^{c_fit t / 2} sqrt(1.05), the norm-scale bound
    double c_fit = 0.0;            // least-squares slope of log ||u||^2 against t
    bool bound_violated = false;   // some sample has ||u||^2 > ||u(0)||^2 e^{c_fit t} 1.05
};

namespace detail {

inline double l2_norm_of_difference(const Array2& a, const Array2& b, double cell_area) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        double d = a.data[k] - b.data[k];
        acc += d * d;
    }
    return std::sqrt(acc * cell_area);
}

}  // namespace detail

/// Twin experiment for continuous dependence on initial data: advance h0 and
/// h0 + delta in lockstep and watch the L2 distance u(t). The growth constant
/// is fitted (free intercept) on log u^2 over the samples with u > 0, and the
/// squared series is then compared pointwise against u(0)^2 e^{c_fit t} 1.05.
/// Only the spectral IMEX scheme is supported; it is the production stepper
/// and the one whose determinism makes the zero-perturbation case exact.
inline StabilityReport stability_experiment(const HeightField& h0, const PerturbationSpec& delta,
                                            const FluxModel& model, const SolverConfig& cfg,
                                            long sample_every = 1) {
    delta.validate();
    cfg.validate();
    FluxModel::validated(model);
    if (cfg.scheme != Scheme::ImexSpectral)
        throw std::invalid_argument("stability_experiment: only the imex_spectral scheme is supported");
    if (sample_every < 1)
        throw std::invalid_argument("stability_experiment: sample_every must be >= 1");

    const Grid& g = h0.grid;
    const long nsteps = cfg.step_count();
    SpectralSolver spectral(g);

    Array2 h1 = h0.values;
    Array2 h2 = h0.values;
    {
        Array2 noise = white_noise(g.nx, g.ny, delta.amplitude, delta.seed);
        for (std::size_t k = 0; k < h2.data.size(); ++k) h2.data[k] += noise.data[k];
    }

    StabilityReport rep;
    auto sample = [&](long n) {
        rep.times.push_back(h0.time + n * cfg.dt);
        rep.u_norm.push_back(detail::l2_norm_of_difference(h1, h2, g.cell_area()));
    };
    sample(0);
    for (long n = 0; n < nsteps; ++n) {
        Array2 div1 = divergence_of_flux(h1, g, model);
        spectral.imex_advance(h1, div1, cfg.dt, cfg.nu, cfg.stabilization);
        Array2 div2 = divergence_of_flux(h2, g, model);
        spectral.imex_advance(h2, div2, cfg.dt, cfg.nu, cfg.stabilization);
        if (!h1.finite() || !h2.finite())
            throw NonFiniteError("stability_experiment: non-finite twin after step " +
                                 std::to_string(n + 1));
        if ((n + 1) % sample_every == 0 || n + 1 == nsteps) sample(n + 1);
    }

    // Free-intercept least squares of log u^2 on t, restricted to u > 0.
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    long m = 0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        if (!(rep.u_norm[i] > 0.0)) continue;
        double t = rep.times[i];
        double y = 2.0 * std::log(rep.u_norm[i]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++m;
    }
    double det = m * stt - st * st;
    rep.c_fit = (m >= 2 && det > 0.0) ? (m * sty - st * sy) / det : 0.0;

    const double u0 = rep.u_norm.front();
    rep.envelope.resize(rep.times.size());
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        double t_rel = rep.times[i] - rep.times.front();
        double bound_sq = u0 * u0 * std::exp(rep.c_fit * t_rel) * 1.05;
        rep.envelope[i] = std::sqrt(bound_sq);
        if (rep.u_norm[i] * rep.u_norm[i] > bound_sq) rep.bound_violated = true;
    }
    return rep;
}

}  // namespace mbe
