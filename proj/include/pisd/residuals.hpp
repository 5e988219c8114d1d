// PDE residual functionals on spectral representations and their exact
// gradients with respect to latent entries.
//
// Poisson/Helmholtz compare Delta u (+ u) against a on the interior grid:
// u lives in the interior sine basis where the Laplacian is diagonal, a is
// decoded from its (possibly boundary-padded) basis and restricted, and the
// squared L2 norm is the interior-grid quadrature, which coincides with the
// coefficient-space sum whenever both channels share one basis.
//
// Navier-Stokes uses centered differences in time on the Fourier coefficients:
//   r_i(k) = (w_{i+1} - w_{i-1})(k) / (t_{i+1} - t_{i-1})
//            + adv(w_i)(k) + nu 4 pi^2 ||k||^2 w_i(k) - q(k)
// summed over interior steps, with the advection term from the dealiased
// pseudo-spectral product V(w) . grad w.
#pragma once

#include <span>
#include <vector>

#include "pisd/codec.hpp"
#include "pisd/grid.hpp"

namespace pisd {

enum class PdeKind : int32_t { Poisson = 0, Helmholtz = 1, NavierStokes = 2 };
enum class Dealias : int32_t { None = 0, TwoThirds = 1 };

struct ResidualSpec {
    PdeKind kind = PdeKind::Poisson;
    Dealias dealias = Dealias::TwoThirds;
    // Navier-Stokes only
    double viscosity = 1e-3;
    std::vector<double> t_grid;
    FieldGrid forcing;
};

struct ResidualValue {
    double value = 0.0;
    std::vector<double> per_time;  // NS: one entry per interior time step
};

// u on the interior HxH sine grid, a on a GAxGA sine grid with GA = H + 2*padding.
ResidualValue elliptic_residual(PdeKind kind, std::span<const double> u_coeffs, int h,
                                std::span<const double> a_coeffs, int ga, int padding);
void elliptic_residual_gradient(PdeKind kind, std::span<const double> u_coeffs, int h,
                                std::span<const double> a_coeffs, int ga, int padding, std::span<double> du,
                                std::span<double> da);

// Fourier coefficients of V(w) . grad w via grid-space products, dealiased.
std::vector<cplx> advection_pseudospectral(std::span<const cplx> w, int n, Dealias dealias);
// Accumulates the adjoint of the advection map at w, applied to cot, into grad.
void advection_adjoint_accumulate(std::span<const cplx> w, std::span<const cplx> cot, int n, Dealias dealias,
                                  std::span<cplx> grad);

ResidualValue ns_residual(const std::vector<std::vector<cplx>>& w_stack, int n, const ResidualSpec& spec);
std::vector<std::vector<cplx>> ns_residual_gradient(const std::vector<std::vector<cplx>>& w_stack, int n,
                                                    const ResidualSpec& spec);

// Latent-level entry points (these are what guidance differentiates).
ResidualValue residual_value(const SpectralLatent& latent, const Codec& codec, const ResidualSpec& spec);
std::vector<double> residual_gradient(const SpectralLatent& latent, const Codec& codec,
                                      const ResidualSpec& spec);

// 2/3-rule cutoff: modes with max(|k1|,|k2|) > n/3 are dropped.
inline int dealias_band(int n) { return n / 3; }

}  // namespace pisd
