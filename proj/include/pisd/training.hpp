// The training phase: encode the dataset once, then run Adam on the denoising
// loss over uniformly drawn (sample, sigma, noise) triples.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pisd/codec.hpp"
#include "pisd/datagen.hpp"
#include "pisd/denoiser.hpp"

namespace pisd {

struct TrainConfig {
    int batch_size = 64;
    int64_t total_steps = 20000;
    double learning_rate = 3e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double sigma_min = 2e-3;
    double sigma_max = 80.0;
    bool log_uniform_sigma = true;  // false: sigma ~ U(sigma_min, sigma_max]
    uint64_t seed = 0;
    int64_t checkpoint_every = 0;  // 0: only the final checkpoint
};

struct LatentMatrix {
    int rows = 0;
    int dim = 0;
    uint64_t codec_fingerprint = 0;
    std::vector<double> data;  // row-major

    std::span<const double> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * dim, static_cast<std::size_t>(dim)};
    }
};

// Rows are encode(sample) for every dataset sample, in order.
LatentMatrix precompute_latents(const Dataset& dataset, const Codec& codec);

void save_latents(const std::string& path, const LatentMatrix& latents);
// Throws IoError if the cached fingerprint does not match `codec`.
LatentMatrix load_latents(const std::string& path, const Codec& codec);

struct TrainResult {
    DenoiserCheckpoint checkpoint;
    std::vector<double> loss_curve;  // one entry per step
};

TrainResult train(const LatentMatrix& latents, const DenoiserConfig& arch, const TrainConfig& cfg,
                  const std::string& checkpoint_dir = "");

void write_loss_csv(const std::string& path, const std::vector<double>& losses);

}  // namespace pisd
