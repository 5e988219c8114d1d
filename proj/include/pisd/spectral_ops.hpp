// Differential operators in coefficient space, the Biot-Savart map, and the
// sample-level Sobolev inequality check behind the latent-noise regularity
// argument.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "pisd/codec.hpp"

namespace pisd {

// Multiplies sine coefficient (k1,k2) by -pi^2 (k1^2 + k2^2); HxH layout, k from 1.
void spectral_laplacian_sine(std::span<const double> coeffs, std::span<double> out, int h);
// Multiplies Fourier coefficient n by -4 pi^2 ||n||^2; NxN wrapped layout.
void spectral_laplacian_fourier(std::span<const cplx> coeffs, std::span<cplx> out, int n);

// v1_hat(k) = i k2/||k||^2 w_hat(k), v2_hat(k) = -i k1/||k||^2 w_hat(k); (0,0) -> 0.
void biot_savart(std::span<const cplx> w, std::span<cplx> v1, std::span<cplx> v2, int n);

// lhs = sum_k s_k^2 ||k||^{2m}, rhs = sum_k mean|X_hat(k)|^2 ||k||^{2m},
// holds = lhs <= rhs + 1e-9. The truncated sample analogue of Var <= E|.|^2.
struct Lemma1Result {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
Lemma1Result lemma1_check(const ScaleVector& scales, const std::vector<std::vector<cplx>>& sample_coeffs,
                          const std::vector<Mode>& modes, int sobolev_order);
// Convenience: gathers coefficients for one codec channel over a dataset.
Lemma1Result lemma1_check(const Codec& codec, int channel, const std::vector<FieldGrid>& dataset,
                          int sobolev_order);

}  // namespace pisd
