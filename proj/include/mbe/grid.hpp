#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbe/array2.hpp"
#include "mbe/errors.hpp"

namespace mbe {

enum class Bc { Neumann, Periodic };

inline const char* to_string(Bc bc) { return bc == Bc::Neumann ? "neumann" : "periodic"; }

inline bool bc_from_string(const std::string& s, Bc& out) {
    if (s == "neumann") out = Bc::Neumann;
    else if (s == "periodic") out = Bc::Periodic;
    else return false;
    return true;
}

/// Uniform rectangular grid on [0,lx] x [0,ly] with nx*ny cells.
/// Cell centers sit at ((i+1/2)dx, (j+1/2)dy); x-faces at (i*dx, (j+1/2)dy).
struct Grid {
    int nx, ny;
    double lx, ly;
    Bc bc;
    double dx, dy;

    Grid(int nx_, int ny_, double lx_, double ly_, Bc bc_)
        : nx(nx_), ny(ny_), lx(lx_), ly(ly_), bc(bc_) {
        if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: nx and ny must be >= 4");
        if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("Grid: extents must be positive");
        dx = lx / nx;
        dy = ly / ny;
    }

    double cell_area() const { return dx * dy; }
    double area() const { return lx * ly; }

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly && bc == o.bc;
    }
};

/// Height sample h(i,j) at cell centers, plus the simulation clock.
struct HeightField {
    Grid grid;
    Array2 values;
    double time = 0.0;

    explicit HeightField(const Grid& g) : grid(g), values(g.nx, g.ny) {}
    HeightField(const Grid& g, Array2 v, double t = 0.0)
        : grid(g), values(std::move(v)), time(t) {
        if (values.rows != g.nx || values.cols != g.ny)
            throw std::invalid_argument("HeightField: values shape does not match grid");
    }
};

/// Staggered slope components: px on x-faces ((nx+1) x ny), qy on y-faces
/// (nx x (ny+1)), plus cell-centered averages pc, qc (nx x ny).
struct SlopeField {
    Array2 px, qy, pc, qc;
};

/// Vector field sampled on faces, same staggering as SlopeField.
struct FaceField {
    Array2 x, y;
};

// Index folding for ghost neighbors. reflect() is the even extension used
// by the Neumann condition; valid for one fold (|i| <= n).
inline int reflect_index(int i, int n) {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

inline int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline double cell_at(const Array2& a, int i, int j, Bc bc) {
    if (bc == Bc::Neumann)
        return a(reflect_index(i, a.rows), reflect_index(j, a.cols));
    return a(wrap_index(i, a.rows), wrap_index(j, a.cols));
}

inline void ensure_finite(const Array2& a, const char* what) {
    if (!a.finite()) throw NonFiniteError(std::string(what) + ": field is not finite");
}

/// Staggered gradient. Neumann boundary faces are exactly zero, which is the
/// discrete form of dh/dn = 0.
inline SlopeField gradient_faces(const Array2& v, const Grid& g) {
    if (v.rows != g.nx || v.cols != g.ny)
        throw std::invalid_argument("gradient_faces: shape does not match grid");
    SlopeField s;
    s.px = Array2(g.nx + 1, g.ny, 0.0);
    s.qy = Array2(g.nx, g.ny + 1, 0.0);

    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            s.px(i, j) = (v(i, j) - v(i - 1, j)) / g.dx;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            s.qy(i, j) = (v(i, j) - v(i, j - 1)) / g.dy;

    if (g.bc == Bc::Periodic) {
        for (int j = 0; j < g.ny; ++j) {
            double p = (v(0, j) - v(g.nx - 1, j)) / g.dx;
            s.px(0, j) = p;
            s.px(g.nx, j) = p;
        }
        for (int i = 0; i < g.nx; ++i) {
            double q = (v(i, 0) - v(i, g.ny - 1)) / g.dy;
            s.qy(i, 0) = q;
            s.qy(i, g.ny) = q;
        }
    }

    s.pc = Array2(g.nx, g.ny);
    s.qc = Array2(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            s.pc(i, j) = 0.5 * (s.px(i, j) + s.px(i + 1, j));
            s.qc(i, j) = 0.5 * (s.qy(i, j) + s.qy(i, j + 1));
        }
    return s;
}

inline SlopeField gradient_faces(const HeightField& h) { return gradient_faces(h.values, h.grid); }

/// Transverse slope seen by an x-face: four-point average of qy from the two
/// adjacent cell columns. Boundary columns fold by the grid's ghost rule.
inline Array2 transverse_at_xfaces(const Array2& qy, const Grid& g) {
    Array2 out(g.nx + 1, g.ny, 0.0);
    for (int i = 0; i <= g.nx; ++i) {
        int cl = i - 1, cr = i;
        if (g.bc == Bc::Neumann) {
            cl = reflect_index(cl, g.nx);
            cr = reflect_index(cr, g.nx);
        } else {
            cl = wrap_index(cl, g.nx);
            cr = wrap_index(cr, g.nx);
        }
        for (int j = 0; j < g.ny; ++j)
            out(i, j) = 0.25 * (qy(cl, j) + qy(cl, j + 1) + qy(cr, j) + qy(cr, j + 1));
    }
    return out;
}

inline Array2 transverse_at_yfaces(const Array2& px, const Grid& g) {
    Array2 out(g.nx, g.ny + 1, 0.0);
    for (int j = 0; j <= g.ny; ++j) {
        int cb = j - 1, ct = j;
        if (g.bc == Bc::Neumann) {
            cb = reflect_index(cb, g.ny);
            ct = reflect_index(ct, g.ny);
        } else {
            cb = wrap_index(cb, g.ny);
            ct = wrap_index(ct, g.ny);
        }
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = 0.25 * (px(i, cb) + px(i + 1, cb) + px(i, ct) + px(i + 1, ct));
    }
    return out;
}

/// Cell divergence of a face field. Telescopes exactly: with zero (or
/// periodic-matched) boundary faces the cell sum vanishes to roundoff.
inline Array2 divergence_centers(const FaceField& f, const Grid& g) {
    if (f.x.rows != g.nx + 1 || f.x.cols != g.ny || f.y.rows != g.nx || f.y.cols != g.ny + 1)
        throw std::invalid_argument("divergence_centers: face shapes do not match grid");
    Array2 out(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out(i, j) = (f.x(i + 1, j) - f.x(i, j)) / g.dx + (f.y(i, j + 1) - f.y(i, j)) / g.dy;
    return out;
}

/// Five-point Laplacian under the grid's ghost rule. Written as a difference
/// of one-sided differences so it factors through gradient_faces and
/// divergence_centers up to rounding.
inline Array2 laplacian(const Array2& v, const Grid& g) {
    if (v.rows != g.nx || v.cols != g.ny)
        throw std::invalid_argument("laplacian: shape does not match grid");
    Array2 out(g.nx, g.ny);
    const double rdx2 = 1.0 / (g.dx * g.dx);
    const double rdy2 = 1.0 / (g.dy * g.dy);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double c = v(i, j);
            double xw = cell_at(v, i - 1, j, g.bc);
            double xe = cell_at(v, i + 1, j, g.bc);
            double ys = cell_at(v, i, j - 1, g.bc);
            double yn = cell_at(v, i, j + 1, g.bc);
            out(i, j) = ((xe - c) - (c - xw)) * rdx2 + ((yn - c) - (c - ys)) * rdy2;
        }
    return out;
}

inline Array2 laplacian(const HeightField& h) { return laplacian(h.values, h.grid); }

inline Array2 bilaplacian(const Array2& v, const Grid& g) { return laplacian(laplacian(v, g), g); }

inline Array2 bilaplacian(const HeightField& h) { return bilaplacian(h.values, h.grid); }

namespace detail {

// C-infinity bump, zero for |t| >= 1.
inline double bump(double t) {
    double t2 = t * t;
    if (t2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t2));
}

// Largest offset m with m*step strictly inside the support radius eps.
inline int mollifier_radius(double eps, double step) {
    int r = static_cast<int>(std::floor(eps / step));
    while (r > 0 && r * step >= eps) --r;
    return r;
}

inline std::vector<double> mollifier_weights(double eps, double step, int radius) {
    std::vector<double> w(static_cast<std::size_t>(radius) + 1);
    double total = 0.0;
    for (int m = 0; m <= radius; ++m) {
        w[m] = bump(m * step / eps);
        total += (m == 0) ? w[m] : 2.0 * w[m];
    }
    for (double& x : w) x /= total;
    return w;
}

inline void convolve_rows(const Array2& in, Array2& out, const std::vector<double>& w, Bc bc) {
    const int radius = static_cast<int>(w.size()) - 1;
    for (int i = 0; i < in.rows; ++i)
        for (int j = 0; j < in.cols; ++j) {
            double acc = w[0] * in(i, j);
            for (int m = 1; m <= radius; ++m) {
                int lo = bc == Bc::Neumann ? reflect_index(i - m, in.rows) : wrap_index(i - m, in.rows);
                int hi = bc == Bc::Neumann ? reflect_index(i + m, in.rows) : wrap_index(i + m, in.rows);
                acc += w[m] * (in(lo, j) + in(hi, j));
            }
            out(i, j) = acc;
        }
}

inline void convolve_cols(const Array2& in, Array2& out, const std::vector<double>& w, Bc bc) {
    const int radius = static_cast<int>(w.size()) - 1;
    for (int i = 0; i < in.rows; ++i)
        for (int j = 0; j < in.cols; ++j) {
            double acc = w[0] * in(i, j);
            for (int m = 1; m <= radius; ++m) {
                int lo = bc == Bc::Neumann ? reflect_index(j - m, in.cols) : wrap_index(j - m, in.cols);
                int hi = bc == Bc::Neumann ? reflect_index(j + m, in.cols) : wrap_index(j + m, in.cols);
                acc += w[m] * (in(i, lo) + in(i, hi));
            }
            out(i, j) = acc;
        }
}

}  // namespace detail

/// Separable smoothing with a compactly supported unit-mass bump of radius
/// eps, applied per dimension with the grid's ghost rule. Kernel weights are
/// continuous in eps; for eps <= grid spacing the kernel collapses to the
/// identity. Conserves the discrete sum exactly under both ghost rules
/// (reflection pairs image offsets, wrapping permutes them).
inline Array2 mollify(const Array2& field, const Grid& g, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("mollify: eps must be positive");
    int rx = detail::mollifier_radius(eps, g.dx);
    int ry = detail::mollifier_radius(eps, g.dy);
    if (rx >= field.rows || ry >= field.cols)
        throw std::invalid_argument("mollify: kernel support exceeds grid extent");

    Array2 tmp(field.rows, field.cols);
    Array2 out(field.rows, field.cols);
    if (rx > 0)
        detail::convolve_rows(field, tmp, detail::mollifier_weights(eps, g.dx, rx), g.bc);
    else
        tmp = field;
    if (ry > 0)
        detail::convolve_cols(tmp, out, detail::mollifier_weights(eps, g.dy, ry), g.bc);
    else
        out = tmp;
    return out;
}

inline Array2 mollify(const HeightField& h, double eps) { return mollify(h.values, h.grid, eps); }

}  // namespace mbe
