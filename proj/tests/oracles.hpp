// Test-only reference implementations, kept independent of the library paths
// they check: direct O(N^4) series evaluation, direct transform sums, finite
// differences, and dense spectral convolution.
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// f(x_ij) = sum_{k1,k2} c_{k1,k2} sin(pi k1 x1) sin(pi k2 x2), x = ((i+1)h, (j+1)h)
inline std::vector<double> sine_synthesis_direct(std::span<const double> coeffs, int h) {
    std::vector<double> grid(static_cast<std::size_t>(h) * h, 0.0);
    const double step = M_PI / (h + 1);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j) {
            double acc = 0.0;
            for (int k1 = 1; k1 <= h; ++k1)
                for (int k2 = 1; k2 <= h; ++k2)
                    acc += coeffs[static_cast<std::size_t>(k1 - 1) * h + (k2 - 1)] *
                           std::sin(step * (i + 1) * k1) * std::sin(step * (j + 1) * k2);
            grid[static_cast<std::size_t>(i) * h + j] = acc;
        }
    return grid;
}

inline std::vector<double> sine_forward_direct(std::span<const double> grid, int h) {
    std::vector<double> coeffs(static_cast<std::size_t>(h) * h, 0.0);
    const double step = M_PI / (h + 1);
    const double norm = 2.0 / (h + 1);
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            double acc = 0.0;
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < h; ++j)
                    acc += grid[static_cast<std::size_t>(i) * h + j] * std::sin(step * (i + 1) * k1) *
                           std::sin(step * (j + 1) * k2);
            coeffs[static_cast<std::size_t>(k1 - 1) * h + (k2 - 1)] = norm * norm * acc;
        }
    return coeffs;
}

inline std::vector<cplx> fourier_synthesis_direct(std::span<const cplx> coeffs, int n) {
    std::vector<cplx> grid(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx acc(0.0, 0.0);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    const double phase = 2.0 * M_PI * (static_cast<double>(a) * i + static_cast<double>(b) * j) / n;
                    acc += coeffs[static_cast<std::size_t>(a) * n + b] * cplx(std::cos(phase), std::sin(phase));
                }
            grid[static_cast<std::size_t>(i) * n + j] = acc;
        }
    return grid;
}

inline std::vector<cplx> fourier_forward_direct(std::span<const cplx> grid, int n) {
    std::vector<cplx> coeffs(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cplx acc(0.0, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double phase = -2.0 * M_PI * (static_cast<double>(a) * i + static_cast<double>(b) * j) / n;
                    acc += grid[static_cast<std::size_t>(i) * n + j] * cplx(std::cos(phase), std::sin(phase));
                }
            coeffs[static_cast<std::size_t>(a) * n + b] = acc / (static_cast<double>(n) * n);
        }
    return coeffs;
}

// 5-point Laplacian, periodic wrap, spacing hx.
inline std::vector<double> fd_laplacian_periodic(std::span<const double> grid, int n, double hx) {
    std::vector<double> out(static_cast<std::size_t>(n) * n);
    auto at = [&](int i, int j) {
        return grid[static_cast<std::size_t>(((i % n) + n) % n) * n + (((j % n) + n) % n)];
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<std::size_t>(i) * n + j] =
                (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (hx * hx);
    return out;
}

// 5-point Laplacian on the Dirichlet interior grid (zero outside), spacing 1/(h+1).
inline std::vector<double> fd_laplacian_dirichlet(std::span<const double> grid, int h) {
    const double hx = 1.0 / (h + 1);
    std::vector<double> out(static_cast<std::size_t>(h) * h);
    auto at = [&](int i, int j) {
        if (i < 0 || i >= h || j < 0 || j >= h) return 0.0;
        return grid[static_cast<std::size_t>(i) * h + j];
    };
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j)
            out[static_cast<std::size_t>(i) * h + j] =
                (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (hx * hx);
    return out;
}

// Dense convolution in coefficient space: (uv)_hat(k) = sum_m u_hat(m) v_hat(k-m),
// frequencies treated exactly (no wrap-around), output restricted to |k_i| <= band.
inline std::vector<cplx> spectral_convolution_direct(std::span<const cplx> u, std::span<const cplx> v, int n,
                                                     int band) {
    auto freq = [n](int idx) { return idx < n / 2 ? idx : idx - n; };
    auto idx_of = [n](int k) { return ((k % n) + n) % n; };
    std::vector<cplx> out(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    for (int ka = -band; ka <= band; ++ka)
        for (int kb = -band; kb <= band; ++kb) {
            cplx acc(0.0, 0.0);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    const int m1 = freq(a);
                    const int m2 = freq(b);
                    const int r1 = ka - m1;
                    const int r2 = kb - m2;
                    if (r1 < -n / 2 || r1 >= n / 2 || r2 < -n / 2 || r2 >= n / 2) continue;
                    acc += u[static_cast<std::size_t>(a) * n + b] *
                           v[static_cast<std::size_t>(idx_of(r1)) * n + idx_of(r2)];
                }
            out[static_cast<std::size_t>(idx_of(ka)) * n + idx_of(kb)] = acc;
        }
    return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double l2_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline double rel_l2_err(std::span<const double> got, std::span<const double> want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num / den);
}

}  // namespace oracle
