#include "pisd/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace pisd {

NoiseSchedule karras_schedule(int n, double sigma_max, double sigma_min, double rho) {
    if (n < 2) throw ConfigError("karras_schedule: need at least 2 steps");
    if (!(sigma_min > 0.0) || sigma_min >= sigma_max) throw ConfigError("karras_schedule: bad sigma range");
    if (!(rho > 0.0)) throw ConfigError("karras_schedule: rho must be positive");
    NoiseSchedule s;
    s.rho = rho;
    s.sigmas.resize(n + 1);
    const double a = std::pow(sigma_max, 1.0 / rho);
    const double b = std::pow(sigma_min, 1.0 / rho);
    s.sigmas[0] = sigma_max;  // endpoints pinned exactly
    s.sigmas[n - 1] = sigma_min;
    for (int i = 1; i < n - 1; ++i) {
        const double f = static_cast<double>(i) / (n - 1);
        s.sigmas[i] = std::pow(a + f * (b - a), rho);
    }
    s.sigmas[n] = 0.0;
    return s;
}

std::vector<double> euler_step(std::span<const double> x, double sigma_cur, double sigma_next,
                               const DenoiserCheckpoint& ckpt) {
    if (!(sigma_cur > sigma_next) || sigma_next < 0.0) throw ConfigError("euler_step: sigma ordering violated");
    std::vector<double> denoised = denoiser_forward(ckpt.config, ckpt.weights, x, sigma_cur, ckpt.sigma_max);
    const double f = (sigma_next - sigma_cur) / sigma_cur;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + f * (x[i] - denoised[i]);
    return out;
}

double observation_loss(const FieldGrid& decoded, const std::vector<PointObservations>& obs,
                        std::span<const double> lambda_obs) {
    double loss = 0.0;
    for (const PointObservations& o : obs) {
        const double lam = lambda_obs.empty() ? 1.0 : lambda_obs[o.channel];
        for (std::size_t p = 0; p < o.points.size(); ++p) {
            const double d = decoded.at(o.time_index, o.channel, o.points[p].first, o.points[p].second) -
                             o.values[p];
            loss += lam * d * d;
        }
    }
    return loss;
}

double observation_rel_error(const FieldGrid& decoded, const std::vector<PointObservations>& obs) {
    double num = 0.0, den = 0.0;
    for (const PointObservations& o : obs)
        for (std::size_t p = 0; p < o.points.size(); ++p) {
            const double got = decoded.at(o.time_index, o.channel, o.points[p].first, o.points[p].second);
            num += (got - o.values[p]) * (got - o.values[p]);
            den += o.values[p] * o.values[p];
        }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

GuidanceGradients guidance_gradients(std::span<const double> x, double sigma, const DenoiserCheckpoint& ckpt,
                                     const Codec& codec, const GuidanceSpec& guidance) {
    if (ckpt.codec_fingerprint != codec.fingerprint())
        throw ConfigError("guidance: checkpoint fingerprint does not match codec");
    if (!guidance.lambda_obs.empty() &&
        guidance.lambda_obs.size() != codec.channels.size())
        throw ConfigError("guidance: lambda_obs size must match codec channels");

    std::vector<double> d = denoiser_forward(ckpt.config, ckpt.weights, x, sigma, ckpt.sigma_max);
    SpectralLatent dl;
    dl.x = std::move(d);
    dl.codec_fingerprint = codec.fingerprint();
    FieldGrid decoded = decode(dl, codec);

    GuidanceGradients out;
    out.obs_loss = observation_loss(decoded, guidance.observations, guidance.lambda_obs);

    // d(obs loss)/d(decoded field), scattered at the observed points
    FieldGrid field_cot(decoded.time_steps, decoded.channels, decoded.height, decoded.width, decoded.domain);
    for (const PointObservations& o : guidance.observations) {
        const double lam = guidance.lambda_obs.empty() ? 1.0 : guidance.lambda_obs[o.channel];
        if (lam == 0.0) continue;
        for (std::size_t p = 0; p < o.points.size(); ++p) {
            const double diff = decoded.at(o.time_index, o.channel, o.points[p].first, o.points[p].second) -
                                o.values[p];
            field_cot.at(o.time_index, o.channel, o.points[p].first, o.points[p].second) += 2.0 * lam * diff;
        }
    }
    std::vector<double> obs_cot_latent = decode_adjoint(field_cot, codec);
    out.g_obs =
        denoiser_input_gradient(ckpt.config, ckpt.weights, x, sigma, ckpt.sigma_max, obs_cot_latent);

    ResidualValue rv = residual_value(dl, codec, guidance.residual);
    out.pde_residual = rv.value;
    std::vector<double> pde_cot_latent = residual_gradient(dl, codec, guidance.residual);
    out.g_pde =
        denoiser_input_gradient(ckpt.config, ckpt.weights, x, sigma, ckpt.sigma_max, pde_cot_latent);
    return out;
}

std::vector<double> guidance_learning_rates(const Codec& codec, const FrequencyAdamConfig& cfg) {
    const auto slots = codec.slot_map();
    if (!cfg.mode_weights.empty() && cfg.mode_weights.size() != slots.size())
        throw ConfigError("guidance: mode_weights length must match latent dim");

    // per-channel cutoff: explicit value, or half the channel's retained band
    std::vector<int> cutoff(codec.channels.size());
    for (std::size_t c = 0; c < codec.channels.size(); ++c) {
        if (cfg.low_band_cutoff >= 0) {
            cutoff[c] = cfg.low_band_cutoff;
        } else {
            int band = 0;
            for (const Mode& k : codec.channels[c].trunc.modes) band = std::max(band, mode_norm_inf(k));
            cutoff[c] = band / 2;
        }
    }
    std::vector<double> eta(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const double base = mode_norm_inf(slots[i].k) <= cutoff[slots[i].channel] ? cfg.lr_low : cfg.lr_high;
        eta[i] = base * (cfg.mode_weights.empty() ? 1.0 : cfg.mode_weights[i]);
    }
    return eta;
}

std::vector<double> frequency_adam_update(GuidanceAdamState& state, std::span<const double> g,
                                          const FrequencyAdamConfig& cfg, std::span<const double> eta) {
    if (state.m.size() != g.size() || state.v.size() != g.size() || eta.size() != g.size())
        throw ConfigError("frequency_adam_update: dimension mismatch");
    std::vector<double> delta(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        delta[i] = -eta[i] * state.m[i] / (std::sqrt(state.v[i]) + cfg.eps);
    }
    state.step_count += 1;
    return delta;
}

SampleResult sample(const DenoiserCheckpoint& ckpt, const Codec& codec, const NoiseSchedule& schedule,
                    const GuidanceSpec& guidance, const SampleOptions& opts) {
    if (ckpt.codec_fingerprint != codec.fingerprint())
        throw ConfigError("sample: checkpoint fingerprint does not match codec");
    if (schedule.sigmas.size() < 2 || schedule.sigmas.front() != ckpt.sigma_max)
        throw ConfigError("sample: schedule must start at the checkpoint sigma_max");

    const int dim = codec.latent_dim();
    Rng rng(split_seed(opts.seed, 0x73616d70ULL));
    std::vector<double> x(dim);
    for (auto& v : x) v = ckpt.sigma_max * rng.normal();

    const bool guided = guidance.lambda_pde > 0.0 ||
                        std::any_of(guidance.lambda_obs.begin(), guidance.lambda_obs.end(),
                                    [](double l) { return l > 0.0; });
    GuidanceAdamState state;
    state.m.assign(dim, 0.0);
    state.v.assign(dim, 0.0);
    const std::vector<double> eta = guidance_learning_rates(codec, guidance.adam);

    GuidanceGradients grads;
    for (int n = 1; n <= schedule.steps(); ++n) {
        const double sigma_cur = schedule.sigmas[n - 1];
        const double sigma_next = schedule.sigmas[n];
        // gradients at the pre-step state and noise level, applied after the Euler step
        if (guided) grads = guidance_gradients(x, sigma_cur, ckpt, codec, guidance);
        x = euler_step(x, sigma_cur, sigma_next, ckpt);
        if (guided) {
            std::vector<double> g(dim);
            for (int i = 0; i < dim; ++i)
                g[i] = grads.g_obs[i] + guidance.lambda_pde * grads.g_pde[i];
            if (opts.sgd_baseline) {
                for (int i = 0; i < dim; ++i) x[i] -= g[i];
            } else {
                std::vector<double> delta = frequency_adam_update(state, g, guidance.adam, eta);
                for (int i = 0; i < dim; ++i) x[i] += delta[i];
            }
        }
        for (double v : x)
            if (!std::isfinite(v))
                throw NumericError("sample: non-finite state after step " + std::to_string(n) +
                                   " (sigma=" + std::to_string(sigma_next) + ")");
    }

    SampleResult out;
    out.latent.x = std::move(x);
    out.latent.codec_fingerprint = codec.fingerprint();
    out.field = decode(out.latent, codec);
    out.final_obs_loss = observation_loss(out.field, guidance.observations, guidance.lambda_obs);
    out.final_pde_residual = residual_value(out.latent, codec, guidance.residual).value;
    return out;
}

}  // namespace pisd
