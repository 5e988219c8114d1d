// The learnable denoiser D(x, sigma) on latents. A residual MLP F with GELU
// activations and a sinusoidal log-sigma embedding added to its first hidden
// layer, wrapped in the usual preconditioning
//   D(x, sigma) = c_skip x + c_out F(c_in x, embed(sigma)),
//   c_skip = sd^2/(s^2+sd^2), c_out = s sd/sqrt(s^2+sd^2), c_in = 1/sqrt(s^2+sd^2).
// Weights live in one flat f64 vector; forward, input gradients (J^T v) and
// parameter gradients are hand-rolled reverse mode.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pisd/rng.hpp"

namespace pisd {

struct DenoiserConfig {
    int latent_dim = 0;
    int hidden_width = 256;
    int depth = 6;  // hidden layers: the embed-fed first layer plus depth-1 residual blocks
    int sigma_embed_dim = 8;
    double sigma_data = 1.0;
};

struct WeightLayout {
    int w_in = 0, b_in = 0, p_embed = 0;  // offsets
    int blocks = 0;                       // offset of the first residual block
    int block_stride = 0;
    int w_out = 0, b_out = 0;
    int total = 0;
    static WeightLayout make(const DenoiserConfig& cfg);
};

int weight_count(const DenoiserConfig& cfg);

// Layer-scaled uniform init, final layer zeroed so D(x, sigma) = c_skip x at start.
std::vector<double> init_weights(const DenoiserConfig& cfg, Rng& rng);

struct Preconditioner {
    double c_in, c_skip, c_out;
    static Preconditioner at(double sigma, double sigma_data);
};

// Per-sample loss weight lambda(sigma) = (sigma^2 + sd^2) / (sigma sd)^2 = 1/c_out^2.
double loss_weight(double sigma, double sigma_data);

void sigma_embedding(double sigma, int dim, std::span<double> out);

std::vector<double> denoiser_forward(const DenoiserConfig& cfg, std::span<const double> weights,
                                     std::span<const double> x, double sigma, double sigma_max);

// J^T cotangent with J = dD/dx at (x, sigma).
std::vector<double> denoiser_input_gradient(const DenoiserConfig& cfg, std::span<const double> weights,
                                            std::span<const double> x, double sigma, double sigma_max,
                                            std::span<const double> cotangent);

struct DenoiseBatchItem {
    const double* x_noisy;
    const double* x_clean;
    double sigma;
};

// Mean over the batch of lambda(sigma) ||D(x_noisy,sigma) - x_clean||^2 / latent_dim;
// fills grad (same length as weights) and returns the loss.
double denoising_loss_gradient(const DenoiserConfig& cfg, std::span<const double> weights,
                               std::span<const DenoiseBatchItem> batch, double sigma_max,
                               std::span<double> grad);

struct DenoiserCheckpoint {
    DenoiserConfig config;
    std::vector<double> weights;
    double sigma_max = 80.0;
    uint64_t codec_fingerprint = 0;
    uint64_t train_steps = 0;
};

void save_checkpoint(const std::string& path, const DenoiserCheckpoint& ckpt);
DenoiserCheckpoint load_checkpoint(const std::string& path);

}  // namespace pisd
