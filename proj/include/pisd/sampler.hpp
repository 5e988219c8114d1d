// Guided reverse-time sampling: Karras-style noise schedule, probability-flow
// Euler steps, diffusion-posterior-sampling gradients evaluated on the
// denoised estimate, and the frequency-aware Adam guidance optimizer whose
// state persists across all diffusion steps of one run.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pisd/codec.hpp"
#include "pisd/denoiser.hpp"
#include "pisd/residuals.hpp"

namespace pisd {

struct NoiseSchedule {
    std::vector<double> sigmas;  // sigma_0 = sigma_max > ... > sigma_N = 0
    double rho = 7.0;
    int steps() const { return static_cast<int>(sigmas.size()) - 1; }
};

// sigma_i = (smax^(1/rho) + i/(N-1) (smin^(1/rho) - smax^(1/rho)))^rho, sigma_N = 0.
NoiseSchedule karras_schedule(int n, double sigma_max, double sigma_min, double rho);

// Point observations of one decoded channel at one time slice.
struct PointObservations {
    int channel = 0;
    int time_index = 0;
    std::vector<std::pair<int, int>> points;
    std::vector<double> values;
};

struct FrequencyAdamConfig {
    double beta1 = 0.985;
    double beta2 = 0.98;
    double eps = 1e-8;
    double lr_low = 0.2;
    double lr_high = 0.01;
    // modes with ||k||_inf <= cutoff take lr_low; -1 means half the retained band
    int low_band_cutoff = -1;
    // optional per-mode weights w_k (aligned with the latent); empty means all ones
    std::vector<double> mode_weights;
};

struct GuidanceSpec {
    std::vector<double> lambda_obs;  // one weight per codec channel
    double lambda_pde = 0.0;
    FrequencyAdamConfig adam;
    ResidualSpec residual;
    std::vector<PointObservations> observations;
};

struct GuidanceAdamState {
    std::vector<double> m;
    std::vector<double> v;
    int64_t step_count = 0;
};

// x' = x + (sigma_next - sigma_cur)/sigma_cur * (x - D(x, sigma_cur)).
std::vector<double> euler_step(std::span<const double> x, double sigma_cur, double sigma_next,
                               const DenoiserCheckpoint& ckpt);

struct GuidanceGradients {
    std::vector<double> g_obs;  // gradient of sum_c lambda_obs[c] ||y_c - M_c(decode(D))||^2
    std::vector<double> g_pde;  // gradient of L_PDE(decode(D)), unweighted
    double obs_loss = 0.0;
    double pde_residual = 0.0;
};

GuidanceGradients guidance_gradients(std::span<const double> x, double sigma, const DenoiserCheckpoint& ckpt,
                                     const Codec& codec, const GuidanceSpec& guidance);

// Appendix-form Adam without bias correction; returns the additive delta.
// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;  delta = -eta_k m / (sqrt(v) + eps)
std::vector<double> frequency_adam_update(GuidanceAdamState& state, std::span<const double> g,
                                          const FrequencyAdamConfig& cfg, std::span<const double> eta);

// Per-slot learning rates eta_k = (lr_low or lr_high) * w_k from the codec band split.
std::vector<double> guidance_learning_rates(const Codec& codec, const FrequencyAdamConfig& cfg);

struct SampleOptions {
    uint64_t seed = 0;
    bool sgd_baseline = false;  // plain gradient-descent guidance instead of Adam
};

struct SampleResult {
    FieldGrid field;
    SpectralLatent latent;
    double final_obs_loss = 0.0;
    double final_pde_residual = 0.0;
};

// Full Alg-style run: x ~ N(0, sigma_max^2 I); per step evaluate guidance at
// the current noise level, take the Euler step, then apply the persistent
// optimizer to lambda-weighted combined gradients; returns decode(x).
SampleResult sample(const DenoiserCheckpoint& ckpt, const Codec& codec, const NoiseSchedule& schedule,
                    const GuidanceSpec& guidance, const SampleOptions& opts);

// Observation helpers shared with evaluation.
double observation_loss(const FieldGrid& decoded, const std::vector<PointObservations>& obs,
                        std::span<const double> lambda_obs);
double observation_rel_error(const FieldGrid& decoded, const std::vector<PointObservations>& obs);

}  // namespace pisd
