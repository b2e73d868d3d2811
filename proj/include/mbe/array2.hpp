#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mbe {

/// Dense 2D array of doubles, row-major: element (i, j) lives at i*cols + j.
/// Index i runs along x, index j along y.
struct Array2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Array2() = default;

    Array2(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
        if (r <= 0 || c <= 0) throw std::invalid_argument("Array2: dimensions must be positive");
    }

    double& operator()(int i, int j) {
        return data[static_cast<std::size_t>(i) * cols + j];
    }
    double operator()(int i, int j) const {
        return data[static_cast<std::size_t>(i) * cols + j];
    }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Array2& o) const { return rows == o.rows && cols == o.cols; }

    bool finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Compensated (Kahan) sum. Used where a plain sum's O(n*eps) error would
/// eat into 1e-10..1e-12 conservation budgets.
inline double kahan_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

inline double dot(const Array2& a, const Array2& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) s += a.data[k] * b.data[k];
    return s;
}

inline double sum_abs(const Array2& a) {
    double s = 0.0;
    for (double v : a.data) s += std::abs(v);
    return s;
}

inline double max_abs(const Array2& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const Array2& a, const Array2& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k)
        m = std::max(m, std::abs(a.data[k] - b.data[k]));
    return m;
}

}  // namespace mbe
