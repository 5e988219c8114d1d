// Synthetic data oracles: Gaussian random fields with a rational spectral
// density, exact spectral Poisson/Helmholtz solves, an integrating-factor Heun
// scheme for 2D vorticity Navier-Stokes, and the bit-exact dataset file format.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pisd/basis.hpp"
#include "pisd/grid.hpp"
#include "pisd/residuals.hpp"
#include "pisd/rng.hpp"

namespace pisd {

// Independent coefficients ~ Normal(0, d(k)) with
// d(k) = amplitude * (4 pi^2 ||k||^2 + tau^2)^{-alpha}; complex modes are
// circularly symmetric, the mean mode is zero.
struct GrfSpec {
    double tau = 3.0;
    double alpha = 2.0;
    double amplitude = 1.0;
    BasisDescriptor basis;
};

FieldGrid sample_grf(const GrfSpec& spec, Rng& rng);

// u with Delta u = a and zero boundary: u_hat(k) = -a_hat(k) / (pi^2 ||k||^2).
FieldGrid solve_poisson(const FieldGrid& a);
// u with Delta u + u = a: u_hat(k) = a_hat(k) / (1 - pi^2 ||k||^2).
FieldGrid solve_helmholtz(const FieldGrid& a);

struct NsIntegrateOptions {
    double viscosity = 1e-3;
    double dt_internal = 2e-3;  // target step; rounded to divide record intervals
    Dealias dealias = Dealias::TwoThirds;
};

// Advances vorticity with exp(-nu 4 pi^2 ||k||^2 dt) integrating factors for
// diffusion and explicit Heun for advection + forcing; records the requested
// times (record_times[0] must be 0, returning w0 as the first slice).
// Aborts with NumericError if any |w_hat| exceeds 1e8.
FieldGrid integrate_ns(const FieldGrid& w0, const FieldGrid& forcing, const std::vector<double>& record_times,
                       const NsIntegrateOptions& opts);

// q(x) = 0.1 (sin(2 pi (x1 + x2)) + cos(2 pi (x1 + x2))) on an NxN torus grid.
FieldGrid ns_forcing_field(int n);

enum class Task : uint8_t { Poisson = 0, Helmholtz = 1, NavierStokes = 2 };

struct DatasetSpec {
    Task task = Task::Poisson;
    int count = 0;
    uint64_t seed = 0;
    int resolution = 32;
    GrfSpec grf;               // basis filled from task/resolution if grid_size == 0
    NsIntegrateOptions ns;
    int ns_time_steps = 10;    // records t_i = (i-1)/(N-1), one unit of physical time
};

struct Dataset {
    Task task = Task::Poisson;
    uint64_t seed = 0;
    int resolution = 0;
    std::vector<FieldGrid> samples;
};

// Deterministic in (seed, spec); sample i draws from its own derived stream.
Dataset build_dataset(const DatasetSpec& spec);

void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

// Default coefficient distributions per task, amplitude tuned for unit-order fields.
GrfSpec default_grf(Task task, int resolution);

}  // namespace pisd
