#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mbe/array2.hpp"
#include "mbe/flux.hpp"
#include "mbe/grid.hpp"
#include "mbe/spectral.hpp"

namespace mbe {

/// One sampled row of a run. energy_rate is the forward difference
/// (E(next step) - E(this step)) / dt; the final sample carries 0.
struct DiagnosticsRecord {
    double time = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double energy_rate = 0.0;
    double max_slope = 0.0;
    double selected_fraction = 0.0;  // NaN for models without slope selection
    double length_scale = 0.0;
};

inline double mass(const HeightField& h) {
    return kahan_sum(h.values.data) * h.grid.cell_area();
}

/// Discrete free energy: cell quadrature of nu/2 (Lap h)^2 - Phi(p, q) with
/// the five-point Laplacian and cell-centered slopes.
inline double energy(const HeightField& h, const FluxModel& model, double nu) {
    Array2 lap = laplacian(h);
    SlopeField s = gradient_faces(h);
    double acc = 0.0, comp = 0.0;
    for (int i = 0; i < h.grid.nx; ++i)
        for (int j = 0; j < h.grid.ny; ++j) {
            double l = lap(i, j);
            double term = 0.5 * nu * l * l - model.slope_potential(s.pc(i, j), s.qc(i, j));
            double y = term - comp;
            double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
    return acc * h.grid.cell_area();
}

struct SlopeStatistics {
    double max_slope = 0.0;
    double selected_fraction = 0.0;  // NaN when the model selects no slope
    double histogram_mode = 0.0;     // center of the most populated bin
    double bin_width = 0.0;
    std::vector<double> bin_centers;
    std::vector<long> counts;
};

/// Histogram of the model's slope selection variable over cell-centered
/// slopes, and the fraction of cells whose variables all sit within 10%
/// (relative) of the selected magnitude. Under Neumann the one-cell
/// boundary ring is excluded: its slopes straddle the zeroed wall faces.
inline SlopeStatistics slope_statistics(const HeightField& h, const FluxModel& model) {
    const Grid& g = h.grid;
    SlopeField s = gradient_faces(h);
    const int lo_i = g.bc == Bc::Neumann ? 1 : 0;
    const int hi_i = g.bc == Bc::Neumann ? g.nx - 1 : g.nx;
    const int lo_j = g.bc == Bc::Neumann ? 1 : 0;
    const int hi_j = g.bc == Bc::Neumann ? g.ny - 1 : g.ny;

    SlopeVariable variable = SlopeVariable::RotatedSquares;
    double target = std::numeric_limits<double>::quiet_NaN();
    if (model.has_slope_selection()) {
        SlopeTargets t = model.selected_slopes();
        variable = t.variable;
        target = t.magnitude;
    }

    SlopeStatistics out;
    const int nbins = 200;
    double range = 2.5 * (std::isnan(target) ? 1.0 : target);
    out.bin_width = range / nbins;
    out.bin_centers.resize(nbins);
    out.counts.assign(nbins, 0);
    for (int k = 0; k < nbins; ++k) out.bin_centers[k] = (k + 0.5) * out.bin_width;

    auto deposit = [&](double v) {
        int bin = static_cast<int>(v / out.bin_width);
        if (bin >= 0 && bin < nbins) ++out.counts[bin];
    };

    long selected = 0, considered = 0;
    for (int i = lo_i; i < hi_i; ++i)
        for (int j = lo_j; j < hi_j; ++j) {
            double p = s.pc(i, j), q = s.qc(i, j);
            out.max_slope = std::max(out.max_slope, std::sqrt(p * p + q * q));
            double v1 = 0.0, v2 = 0.0;
            int nvars = 2;
            switch (variable) {
                case SlopeVariable::RotatedSquares:
                    v1 = (p + q) * (p + q);
                    v2 = (p - q) * (p - q);
                    break;
                case SlopeVariable::AxisSquares:
                    v1 = p * p;
                    v2 = q * q;
                    break;
                case SlopeVariable::GradientMagnitude:
                    v1 = std::sqrt(p * p + q * q);
                    nvars = 1;
                    break;
                case SlopeVariable::AxisMagnitudes:
                    v1 = std::abs(p);
                    v2 = std::abs(q);
                    break;
            }
            deposit(v1);
            if (nvars == 2) deposit(v2);
            ++considered;
            if (!std::isnan(target)) {
                bool ok = std::abs(v1 - target) / target < 0.1;
                if (nvars == 2) ok = ok && std::abs(v2 - target) / target < 0.1;
                if (ok) ++selected;
            }
        }

    out.selected_fraction = std::isnan(target)
                                ? target
                                : (considered > 0 ? static_cast<double>(selected) / considered : 0.0);
    long best = 0;
    int best_bin = 0;
    for (int k = 0; k < nbins; ++k)
        if (out.counts[k] > best) {
            best = out.counts[k];
            best_bin = k;
        }
    out.histogram_mode = out.bin_centers[best_bin];
    return out;
}

/// First-moment coarsening length 2 pi sum(S) / sum(k S) from the radially
/// binned power spectrum, zero mode excluded (which also removes the mean).
/// Returns 0 for a field with no spectral content.
inline double coarsening_length(const HeightField& h, SpectralSolver& spectral) {
    const Grid& g = h.grid;
    std::vector<double> ks, power;
    spectral.mode_powers(h.values, ks, power);
    double dk = g.bc == Bc::Neumann
                    ? std::min(std::numbers::pi / g.lx, std::numbers::pi / g.ly)
                    : std::min(2.0 * std::numbers::pi / g.lx, 2.0 * std::numbers::pi / g.ly);
    double kmax = 0.0;
    for (double k : ks) kmax = std::max(kmax, k);
    int nbins = static_cast<int>(kmax / dk) + 2;
    std::vector<double> s_bin(nbins, 0.0);
    for (std::size_t m = 0; m < ks.size(); ++m) {
        int bin = static_cast<int>(ks[m] / dk);
        s_bin[bin] += power[m];
    }
    double num = 0.0, den = 0.0;
    for (int bin = 0; bin < nbins; ++bin) {
        double kc = (bin + 0.5) * dk;
        num += s_bin[bin];
        den += kc * s_bin[bin];
    }
    if (den <= 0.0) return 0.0;
    return 2.0 * std::numbers::pi * num / den;
}

inline double coarsening_length(const HeightField& h) {
    SpectralSolver spectral(h.grid);
    return coarsening_length(h, spectral);
}

}  // namespace mbe
