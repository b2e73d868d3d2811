#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mbe/errors.hpp"

namespace mbe {

/// Slope-current catalogue. The rotated forms couple the diagonal slope
/// combinations u = p+q, v = p-q; the reduced/cubic forms act per axis.
enum class FluxKind {
    SiegertRotated,
    SiegertReduced,
    Johnson,
    CubicIsotropic,
    CubicAnisotropic,
};

inline const char* to_string(FluxKind k) {
    switch (k) {
        case FluxKind::SiegertRotated: return "siegert_rotated";
        case FluxKind::SiegertReduced: return "siegert_reduced";
        case FluxKind::Johnson: return "johnson";
        case FluxKind::CubicIsotropic: return "cubic_isotropic";
        case FluxKind::CubicAnisotropic: return "cubic_anisotropic";
    }
    return "?";
}

inline bool flux_kind_from_string(const std::string& s, FluxKind& out) {
    if (s == "siegert_rotated") out = FluxKind::SiegertRotated;
    else if (s == "siegert_reduced") out = FluxKind::SiegertReduced;
    else if (s == "johnson") out = FluxKind::Johnson;
    else if (s == "cubic_isotropic") out = FluxKind::CubicIsotropic;
    else if (s == "cubic_anisotropic") out = FluxKind::CubicAnisotropic;
    else return false;
    return true;
}

inline bool flux_uses_beta(FluxKind k) {
    return k == FluxKind::SiegertRotated || k == FluxKind::SiegertReduced || k == FluxKind::Johnson;
}

inline bool flux_uses_b(FluxKind k) { return k == FluxKind::CubicAnisotropic; }

/// Which scalar(s) of the slope field the model's histogram pools, and the
/// magnitude the dynamics drive that scalar toward.
enum class SlopeVariable {
    RotatedSquares,     // (p+q)^2 and (p-q)^2
    AxisSquares,        // p^2 and q^2
    GradientMagnitude,  // |grad h|
    AxisMagnitudes,     // |p| and |q|
};

struct SlopeTargets {
    SlopeVariable variable;
    double magnitude;
    std::vector<std::array<double, 2>> vectors;  // representative selected slopes
};

namespace detail {

// Adaptive Simpson on [a,b]; f is smooth on the ranges we integrate.
template <typename F>
double simpson_segment(F&& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(F&& f, double a, double fa, double b, double fb, double m, double fm,
                        double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson_segment(f, a, fa, m, fm, lm, flm);
    double right = simpson_segment(f, m, fm, b, fb, rm, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    double whole = simpson_segment(f, a, fa, b, fb, m, fm);
    return adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

}  // namespace detail

/// One slope-dependent surface current J(p, q) from the catalogue, with its
/// scalar profile f, the potential F (antiderivative of f with F(0) = 0),
/// and the slope potential Phi with J = grad_{p,q} Phi.
struct FluxModel {
    FluxKind kind = FluxKind::SiegertRotated;
    double alpha = 1.0;  // current strength, >= 0 (0 turns the current off)
    double beta = 1.0;   // Siegert/Johnson shape parameter, > 0
    double b = 0.0;      // anisotropy coupling, in (-1, 1)

    static FluxModel siegert_rotated(double alpha, double beta) {
        return validated({FluxKind::SiegertRotated, alpha, beta, 0.0});
    }
    static FluxModel siegert_reduced(double alpha, double beta) {
        return validated({FluxKind::SiegertReduced, alpha, beta, 0.0});
    }
    static FluxModel johnson(double alpha, double beta) {
        return validated({FluxKind::Johnson, alpha, beta, 0.0});
    }
    static FluxModel cubic_isotropic(double alpha) {
        return validated({FluxKind::CubicIsotropic, alpha, 1.0, 0.0});
    }
    static FluxModel cubic_anisotropic(double alpha, double b) {
        return validated({FluxKind::CubicAnisotropic, alpha, 1.0, b});
    }

    static FluxModel validated(FluxModel m) {
        if (!(m.alpha >= 0.0)) throw std::invalid_argument("FluxModel: alpha must be >= 0");
        if (flux_uses_beta(m.kind) && !(m.beta > 0.0))
            throw std::invalid_argument("FluxModel: beta must be > 0");
        if (flux_uses_b(m.kind) && !(m.b > -1.0 && m.b < 1.0))
            throw std::invalid_argument("FluxModel: b must lie in (-1, 1)");
        return m;
    }

    /// Scalar profile f(y) evaluated at y = (slope combination)^2 >= 0.
    double f(double y) const {
        if (y < 0.0) throw std::domain_error("FluxModel::f: y must be >= 0");
        switch (kind) {
            case FluxKind::SiegertRotated:
            case FluxKind::SiegertReduced: {
                double om = 1.0 - y;
                return om / (om * om + beta * y);
            }
            case FluxKind::Johnson:
                return 1.0 / (1.0 + beta * y);
            case FluxKind::CubicIsotropic:
            case FluxKind::CubicAnisotropic:
                return 1.0 - y;
        }
        return 0.0;
    }

    /// d^order f / dy^order for order 1 or 2, closed form.
    double f_derivative(double y, int order) const {
        if (y < 0.0) throw std::domain_error("FluxModel::f_derivative: y must be >= 0");
        if (order != 1 && order != 2)
            throw std::invalid_argument("FluxModel::f_derivative: order must be 1 or 2");
        switch (kind) {
            case FluxKind::SiegertRotated:
            case FluxKind::SiegertReduced: {
                double om = 1.0 - y;
                double g = om * om + beta * y;
                double gp = 2.0 * (y - 1.0) + beta;
                double n = -g - om * gp;
                if (order == 1) return n / (g * g);
                double np = 2.0 * (y - 1.0);
                return (np * g - 2.0 * n * gp) / (g * g * g);
            }
            case FluxKind::Johnson: {
                double d = 1.0 + beta * y;
                if (order == 1) return -beta / (d * d);
                return 2.0 * beta * beta / (d * d * d);
            }
            case FluxKind::CubicIsotropic:
            case FluxKind::CubicAnisotropic:
                return order == 1 ? -1.0 : 0.0;
        }
        return 0.0;
    }

    /// Current components (j1, j2) at slope (p, q).
    std::pair<double, double> current(double p, double q) const {
        switch (kind) {
            case FluxKind::SiegertRotated:
            case FluxKind::Johnson: {
                double u = p + q, v = p - q;
                double a = u * f(u * u), c = v * f(v * v);
                return {alpha * (a + c), alpha * (a - c)};
            }
            case FluxKind::SiegertReduced:
                return {alpha * p * f(p * p), alpha * q * f(q * q)};
            case FluxKind::CubicIsotropic: {
                double s = p * p + q * q;
                return {alpha * p * (1.0 - s), alpha * q * (1.0 - s)};
            }
            case FluxKind::CubicAnisotropic:
                return {alpha * p * (1.0 - p * p - b * q * q),
                        alpha * q * (1.0 - q * q - b * p * p)};
        }
        return {0.0, 0.0};
    }

    /// F(y) = integral of f from 0 to y. Siegert has a closed form for
    /// 0 < beta < 4; outside that range it falls back to adaptive quadrature.
    double potential(double y) const {
        if (y < 0.0) throw std::domain_error("FluxModel::potential: y must be >= 0");
        switch (kind) {
            case FluxKind::SiegertRotated:
            case FluxKind::SiegertReduced: {
                if (beta < 4.0) {
                    double om = 1.0 - y;
                    double g = om * om + beta * y;
                    double s = std::sqrt(beta * (4.0 - beta));
                    return -0.5 * std::log(g) +
                           (beta / s) * (std::atan((2.0 * y + beta - 2.0) / s) -
                                         std::atan((beta - 2.0) / s));
                }
                return detail::integrate([this](double t) { return f(t); }, 0.0, y);
            }
            case FluxKind::Johnson:
                return std::log1p(beta * y) / beta;
            case FluxKind::CubicIsotropic:
            case FluxKind::CubicAnisotropic:
                return y - 0.5 * y * y;
        }
        return 0.0;
    }

    /// Slope potential Phi(p, q) with J = grad_{p,q} Phi. The energy density
    /// is nu/2 (Lap h)^2 - Phi.
    double slope_potential(double p, double q) const {
        switch (kind) {
            case FluxKind::SiegertRotated:
            case FluxKind::Johnson: {
                double u = p + q, v = p - q;
                return 0.5 * alpha * (potential(u * u) + potential(v * v));
            }
            case FluxKind::SiegertReduced:
                return 0.5 * alpha * (potential(p * p) + potential(q * q));
            case FluxKind::CubicIsotropic: {
                double s = p * p + q * q;
                return alpha * (0.5 * s - 0.25 * s * s);
            }
            case FluxKind::CubicAnisotropic: {
                double p2 = p * p, q2 = q * q;
                return alpha * (0.5 * (p2 + q2) - 0.25 * (p2 * p2 + q2 * q2) - 0.5 * b * p2 * q2);
            }
        }
        return 0.0;
    }

    bool has_slope_selection() const { return kind != FluxKind::Johnson; }

    /// Slopes the current drives toward. Throws NoSlopeSelection for the
    /// Johnson profile, whose current vanishes only at zero slope.
    SlopeTargets selected_slopes() const {
        switch (kind) {
            case FluxKind::SiegertRotated:
                return {SlopeVariable::RotatedSquares,
                        1.0,
                        {{{1, 0}}, {{-1, 0}}, {{0, 1}}, {{0, -1}}}};
            case FluxKind::SiegertReduced:
                return {SlopeVariable::AxisSquares,
                        1.0,
                        {{{1, 1}}, {{1, -1}}, {{-1, 1}}, {{-1, -1}}}};
            case FluxKind::Johnson:
                throw NoSlopeSelection(
                    "FluxModel::selected_slopes: the johnson current has no nonzero root, "
                    "so no slope is selected");
            case FluxKind::CubicIsotropic:
                return {SlopeVariable::GradientMagnitude,
                        1.0,
                        {{{1, 0}}, {{-1, 0}}, {{0, 1}}, {{0, -1}}}};
            case FluxKind::CubicAnisotropic: {
                double s = 1.0 / std::sqrt(1.0 + b);
                return {SlopeVariable::AxisMagnitudes,
                        s,
                        {{{s, s}}, {{s, -s}}, {{-s, s}}, {{-s, -s}}}};
            }
        }
        throw NoSlopeSelection("FluxModel::selected_slopes: unknown kind");
    }
};

}  // namespace mbe
