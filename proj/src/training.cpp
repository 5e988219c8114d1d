#include "pisd/training.hpp"

#include <cmath>
#include <cstdio>

#include "pisd/io_util.hpp"

namespace pisd {

LatentMatrix precompute_latents(const Dataset& dataset, const Codec& codec) {
    if (dataset.samples.empty()) throw ConfigError("precompute_latents: empty dataset");
    if (dataset.samples.front().channels < 1) throw ConfigError("precompute_latents: dataset has no channels");
    LatentMatrix m;
    m.rows = static_cast<int>(dataset.samples.size());
    m.dim = codec.latent_dim();
    m.codec_fingerprint = codec.fingerprint();
    m.data.reserve(static_cast<std::size_t>(m.rows) * m.dim);
    for (const FieldGrid& f : dataset.samples) {
        SpectralLatent l = encode(f, codec);
        m.data.insert(m.data.end(), l.x.begin(), l.x.end());
    }
    return m;
}

void save_latents(const std::string& path, const LatentMatrix& latents) {
    ByteWriter w;
    w.magic("PISDLATC");
    w.u16(1);
    w.u64(latents.codec_fingerprint);
    w.u32(static_cast<uint32_t>(latents.rows));
    w.u32(static_cast<uint32_t>(latents.dim));
    for (double v : latents.data) w.f64(v);
    w.append_crc32();
    write_file(path, w.data());
}

LatentMatrix load_latents(const std::string& path, const Codec& codec) {
    std::vector<uint8_t> bytes = read_file(path);
    ByteReader r(bytes);
    r.check_crc32_trailer();
    r.expect_magic("PISDLATC");
    if (r.u16() != 1) throw IoError("unsupported latent cache version");
    LatentMatrix m;
    m.codec_fingerprint = r.u64();
    if (m.codec_fingerprint != codec.fingerprint())
        throw IoError("latent cache fingerprint does not match codec");
    m.rows = static_cast<int>(r.u32());
    m.dim = static_cast<int>(r.u32());
    m.data.resize(static_cast<std::size_t>(m.rows) * m.dim);
    for (auto& v : m.data) v = r.f64();
    return m;
}

TrainResult train(const LatentMatrix& latents, const DenoiserConfig& arch, const TrainConfig& cfg,
                  const std::string& checkpoint_dir) {
    if (latents.rows < 1) throw ConfigError("train: empty latent matrix");
    if (latents.dim != arch.latent_dim) throw ConfigError("train: latent dimension mismatch");
    if (!(cfg.sigma_min > 0.0) || cfg.sigma_min >= cfg.sigma_max) throw ConfigError("train: bad sigma range");
    if (cfg.adam_beta1 < 0.0 || cfg.adam_beta1 >= 1.0 || cfg.adam_beta2 < 0.0 || cfg.adam_beta2 >= 1.0)
        throw ConfigError("train: bad adam betas");

    Rng rng(split_seed(cfg.seed, 0x7261696eULL));
    std::vector<double> weights = init_weights(arch, rng);
    std::vector<double> grad(weights.size());
    std::vector<double> m(weights.size(), 0.0), v(weights.size(), 0.0);

    const int l = arch.latent_dim;
    std::vector<double> noisy(static_cast<std::size_t>(cfg.batch_size) * l);
    std::vector<DenoiseBatchItem> batch(cfg.batch_size);
    const double log_min = std::log(cfg.sigma_min);
    const double log_max = std::log(cfg.sigma_max);

    TrainResult out;
    out.loss_curve.reserve(cfg.total_steps);
    for (int64_t step = 0; step < cfg.total_steps; ++step) {
        for (int b = 0; b < cfg.batch_size; ++b) {
            const int row = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(latents.rows)));
            const double u = rng.uniform01_open_zero();
            const double sigma = cfg.log_uniform_sigma
                                     ? std::exp(log_min + u * (log_max - log_min))
                                     : cfg.sigma_min + u * (cfg.sigma_max - cfg.sigma_min);
            std::span<const double> clean = latents.row(row);
            double* dst = noisy.data() + static_cast<std::size_t>(b) * l;
            for (int i = 0; i < l; ++i) dst[i] = clean[i] + sigma * rng.normal();
            batch[b] = {dst, clean.data(), sigma};
        }
        const double loss = denoising_loss_gradient(arch, weights, batch, cfg.sigma_max, grad);
        if (!std::isfinite(loss))
            throw NumericError("train: non-finite loss at step " + std::to_string(step));
        out.loss_curve.push_back(loss);

        // Adam with bias correction
        const double t = static_cast<double>(step + 1);
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
            weights[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
        }

        if (cfg.checkpoint_every > 0 && !checkpoint_dir.empty() && (step + 1) % cfg.checkpoint_every == 0 &&
            step + 1 < cfg.total_steps) {
            DenoiserCheckpoint ck{arch, weights, cfg.sigma_max, latents.codec_fingerprint,
                                  static_cast<uint64_t>(step + 1)};
            save_checkpoint(checkpoint_dir + "/ckpt_step" + std::to_string(step + 1) + ".pisd", ck);
        }
    }

    out.checkpoint.config = arch;
    out.checkpoint.weights = std::move(weights);
    out.checkpoint.sigma_max = cfg.sigma_max;
    out.checkpoint.codec_fingerprint = latents.codec_fingerprint;
    out.checkpoint.train_steps = static_cast<uint64_t>(cfg.total_steps);
    return out;
}

void write_loss_csv(const std::string& path, const std::vector<double>& losses) {
    std::string text = "step,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, losses[i]);
        text += buf;
    }
    write_text_file(path, text);
}

}  // namespace pisd
