#include "pisd/transforms.hpp"

#include <cmath>

namespace pisd {

SineTransform2::SineTransform2(int h) : h_(h) {
    if (h < 1) throw ConfigError("sine transform size must be >= 1");
    table_.resize(static_cast<std::size_t>(h) * h);
    const double step = M_PI / (h + 1);
    for (int i = 0; i < h; ++i)
        for (int k = 0; k < h; ++k)
            table_[static_cast<std::size_t>(i) * h + k] = std::sin(step * (i + 1) * (k + 1));
}

// out = scale * S in S for symmetric S; used by all three maps.
void SineTransform2::sandwich(std::span<const double> in, std::span<double> out, double scale) const {
    const int h = h_;
    if (static_cast<int>(in.size()) != h * h || static_cast<int>(out.size()) != h * h)
        throw ConfigError("sine transform: buffer size mismatch");
    std::vector<double> tmp(static_cast<std::size_t>(h) * h, 0.0);
    // tmp = in * S
    for (int i = 0; i < h; ++i) {
        const double* row = in.data() + static_cast<std::size_t>(i) * h;
        double* trow = tmp.data() + static_cast<std::size_t>(i) * h;
        for (int j = 0; j < h; ++j) {
            const double v = row[j];
            if (v == 0.0) continue;
            const double* srow = table_.data() + static_cast<std::size_t>(j) * h;
            for (int b = 0; b < h; ++b) trow[b] += v * srow[b];
        }
    }
    // out = S * tmp
    for (int a = 0; a < h; ++a) {
        const double* srow = table_.data() + static_cast<std::size_t>(a) * h;
        double* orow = out.data() + static_cast<std::size_t>(a) * h;
        for (int b = 0; b < h; ++b) orow[b] = 0.0;
        for (int i = 0; i < h; ++i) {
            const double v = srow[i];
            const double* trow = tmp.data() + static_cast<std::size_t>(i) * h;
            for (int b = 0; b < h; ++b) orow[b] += v * trow[b];
        }
        for (int b = 0; b < h; ++b) orow[b] *= scale;
    }
}

void SineTransform2::forward(std::span<const double> grid, std::span<double> coeffs) const {
    const double norm = 2.0 / (h_ + 1);
    sandwich(grid, coeffs, norm * norm);
}

void SineTransform2::synthesize(std::span<const double> coeffs, std::span<double> grid) const {
    sandwich(coeffs, grid, 1.0);
}

void SineTransform2::adjoint_synthesize(std::span<const double> grid_cot, std::span<double> coeff_cot) const {
    sandwich(grid_cot, coeff_cot, 1.0);
}

FourierTransform2::FourierTransform2(int n) : n_(n) {
    if (!is_power_of_two(n)) throw ConfigError("fourier grid size must be a power of two");
    bitrev_.resize(n);
    int logn = 0;
    while ((1 << logn) < n) ++logn;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < logn; ++b)
            if (i & (1 << b)) r |= 1 << (logn - 1 - b);
        bitrev_[i] = r;
    }
}

void FourierTransform2::fft1(cplx* a, bool inverse) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) {
        int r = bitrev_[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
        const cplx wlen = std::polar(1.0, ang);
        for (int i = 0; i < n; i += len) {
            cplx w{1.0, 0.0};
            for (int j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void FourierTransform2::fft2(cplx* a, bool inverse) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) fft1(a + static_cast<std::size_t>(i) * n, inverse);
    std::vector<cplx> col(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = a[static_cast<std::size_t>(i) * n + j];
        fft1(col.data(), inverse);
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + j] = col[i];
    }
}

void FourierTransform2::forward(std::span<const cplx> grid, std::span<cplx> coeffs) const {
    const std::size_t m = static_cast<std::size_t>(n_) * n_;
    if (grid.size() != m || coeffs.size() != m) throw ConfigError("fourier transform: buffer size mismatch");
    std::copy(grid.begin(), grid.end(), coeffs.begin());
    fft2(coeffs.data(), false);
    const double inv = 1.0 / static_cast<double>(m);
    for (auto& c : coeffs) c *= inv;
}

void FourierTransform2::synthesize(std::span<const cplx> coeffs, std::span<cplx> grid) const {
    const std::size_t m = static_cast<std::size_t>(n_) * n_;
    if (grid.size() != m || coeffs.size() != m) throw ConfigError("fourier transform: buffer size mismatch");
    std::copy(coeffs.begin(), coeffs.end(), grid.begin());
    fft2(grid.data(), true);
}

void FourierTransform2::adjoint_forward(std::span<const cplx> coeff_cot, std::span<cplx> grid_cot) const {
    synthesize(coeff_cot, grid_cot);
    const double inv = 1.0 / (static_cast<double>(n_) * n_);
    for (auto& g : grid_cot) g *= inv;
}

void FourierTransform2::adjoint_synthesize(std::span<const cplx> grid_cot, std::span<cplx> coeff_cot) const {
    forward(grid_cot, coeff_cot);
    const double m = static_cast<double>(n_) * n_;
    for (auto& c : coeff_cot) c *= m;
}

void FourierTransform2::forward_real(std::span<const double> grid, std::span<cplx> coeffs) const {
    std::vector<cplx> tmp(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) tmp[i] = cplx(grid[i], 0.0);
    forward(tmp, coeffs);
}

void FourierTransform2::synthesize_real(std::span<const cplx> coeffs, std::span<double> grid) const {
    std::vector<cplx> tmp(coeffs.size());
    synthesize(coeffs, tmp);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = tmp[i].real();
}

}  // namespace pisd
