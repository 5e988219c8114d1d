// 2D spectral transforms in the series-coefficient convention: forward returns
// the coefficients c_k of f = sum_k c_k phi_k, and synthesize evaluates that
// sum on the grid, so synthesize(forward(f)) = f exactly on grid points.
//
// SineTransform2 is a DST-I pair realized as symmetric matrix sandwiches
// (grids are small; O(H^3) is cheap and exact). FourierTransform2 is an
// iterative radix-2 FFT on power-of-two grids. Both expose the adjoints of
// their linear maps for hand-rolled reverse-mode chains.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "pisd/basis.hpp"
#include "pisd/errors.hpp"

namespace pisd {

using cplx = std::complex<double>;

class SineTransform2 {
  public:
    explicit SineTransform2(int h);

    int size() const { return h_; }

    // c = (2/(H+1))^2 S f S with S_{ik} = sin(pi (i+1)(k+1)/(H+1)).
    void forward(std::span<const double> grid, std::span<double> coeffs) const;
    // f = S c S.
    void synthesize(std::span<const double> coeffs, std::span<double> grid) const;
    // Adjoint of synthesize: S g S (S is symmetric).
    void adjoint_synthesize(std::span<const double> grid_cot, std::span<double> coeff_cot) const;

  private:
    void sandwich(std::span<const double> in, std::span<double> out, double scale) const;
    int h_;
    std::vector<double> table_;  // row-major S
};

class FourierTransform2 {
  public:
    explicit FourierTransform2(int n);

    int size() const { return n_; }
    static bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

    // c = (1/N^2) sum_x f(x) e^{-2 pi i <k, x>}.
    void forward(std::span<const cplx> grid, std::span<cplx> coeffs) const;
    // f(x) = sum_k c_k e^{+2 pi i <k, x>}.
    void synthesize(std::span<const cplx> coeffs, std::span<cplx> grid) const;
    // Adjoint of forward as a real-linear map: (1/N^2) * synthesize.
    void adjoint_forward(std::span<const cplx> coeff_cot, std::span<cplx> grid_cot) const;
    // Adjoint of synthesize: N^2 * forward.
    void adjoint_synthesize(std::span<const cplx> grid_cot, std::span<cplx> coeff_cot) const;

    // Real-field conveniences (complexify / take real part).
    void forward_real(std::span<const double> grid, std::span<cplx> coeffs) const;
    void synthesize_real(std::span<const cplx> coeffs, std::span<double> grid) const;

  private:
    void fft1(cplx* a, bool inverse) const;
    void fft2(cplx* a, bool inverse) const;
    int n_;
    std::vector<int> bitrev_;
};

// Wrapped frequency bookkeeping for an NxN Fourier grid.
inline int freq_of_index(int idx, int n) { return idx < n / 2 ? idx : idx - n; }
inline int index_of_freq(int k, int n) { return ((k % n) + n) % n; }
inline Mode mode_of_indices(int a, int b, int n) { return {freq_of_index(a, n), freq_of_index(b, n)}; }

}  // namespace pisd
