#include "pisd/denoiser.hpp"

#include <cmath>

#include "pisd/errors.hpp"
#include "pisd/io_util.hpp"

namespace pisd {

namespace {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }
double gelu_deriv(double x) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
}

// y = W x + y0, W row-major (rows x cols)
void matvec_add(const double* w, const double* x, double* y, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

// y += W^T g
void matvec_transpose_add(const double* w, const double* g, double* y, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        const double* row = w + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) y[c] += gr * row[c];
    }
}

// gW += g outer h
void outer_accumulate(double* gw, const double* g, const double* h, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        double* row = gw + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) row[c] += gr * h[c];
    }
}

void check_sigma(double sigma, double sigma_max) {
    if (!(sigma > 0.0) || sigma > sigma_max)
        throw NumericError("denoiser: sigma out of range (0, sigma_max]");
}

void check_config(const DenoiserConfig& cfg) {
    if (cfg.latent_dim < 1 || cfg.hidden_width < 1 || cfg.depth < 1 || cfg.sigma_embed_dim < 2 ||
        cfg.sigma_embed_dim % 2 != 0 || cfg.sigma_data <= 0.0)
        throw ConfigError("denoiser: invalid config");
}

// Full forward pass with captured pre-activations for reverse mode.
struct Trace {
    std::vector<double> z;       // c_in * x
    std::vector<double> embed;
    std::vector<double> pre0;
    std::vector<double> h0;      // gelu(pre0)
    std::vector<std::vector<double>> block_pre;  // depth-1 entries
    std::vector<std::vector<double>> block_h;    // h after each block
    std::vector<double> f;       // network output before preconditioning
    Preconditioner pc{};
};

Trace run_forward(const DenoiserConfig& cfg, std::span<const double> weights, std::span<const double> x,
                  double sigma) {
    const WeightLayout lay = WeightLayout::make(cfg);
    if (static_cast<int>(weights.size()) != lay.total) throw ConfigError("denoiser: weight size mismatch");
    if (static_cast<int>(x.size()) != cfg.latent_dim) throw ConfigError("denoiser: latent size mismatch");
    const int l = cfg.latent_dim;
    const int w = cfg.hidden_width;
    const int e = cfg.sigma_embed_dim;

    Trace t;
    t.pc = Preconditioner::at(sigma, cfg.sigma_data);
    t.z.resize(l);
    for (int i = 0; i < l; ++i) t.z[i] = t.pc.c_in * x[i];
    t.embed.resize(e);
    sigma_embedding(sigma, e, t.embed);

    t.pre0.assign(w, 0.0);
    for (int r = 0; r < w; ++r) t.pre0[r] = weights[lay.b_in + r];
    matvec_add(weights.data() + lay.w_in, t.z.data(), t.pre0.data(), w, l);
    matvec_add(weights.data() + lay.p_embed, t.embed.data(), t.pre0.data(), w, e);
    t.h0.resize(w);
    for (int r = 0; r < w; ++r) t.h0[r] = gelu(t.pre0[r]);

    const double* cur = t.h0.data();
    t.block_pre.resize(cfg.depth - 1);
    t.block_h.resize(cfg.depth - 1);
    for (int b = 0; b < cfg.depth - 1; ++b) {
        const double* wb = weights.data() + lay.blocks + static_cast<std::size_t>(b) * lay.block_stride;
        const double* bb = wb + static_cast<std::size_t>(w) * w;
        auto& pre = t.block_pre[b];
        pre.assign(w, 0.0);
        for (int r = 0; r < w; ++r) pre[r] = bb[r];
        matvec_add(wb, cur, pre.data(), w, w);
        auto& h = t.block_h[b];
        h.resize(w);
        for (int r = 0; r < w; ++r) h[r] = cur[r] + gelu(pre[r]);
        cur = h.data();
    }

    t.f.assign(l, 0.0);
    for (int r = 0; r < l; ++r) t.f[r] = weights[lay.b_out + r];
    matvec_add(weights.data() + lay.w_out, cur, t.f.data(), l, w);
    return t;
}

}  // namespace

WeightLayout WeightLayout::make(const DenoiserConfig& cfg) {
    check_config(cfg);
    const int l = cfg.latent_dim;
    const int w = cfg.hidden_width;
    const int e = cfg.sigma_embed_dim;
    WeightLayout lay;
    lay.w_in = 0;
    lay.b_in = lay.w_in + w * l;
    lay.p_embed = lay.b_in + w;
    lay.blocks = lay.p_embed + w * e;
    lay.block_stride = w * w + w;
    lay.w_out = lay.blocks + (cfg.depth - 1) * lay.block_stride;
    lay.b_out = lay.w_out + l * w;
    lay.total = lay.b_out + l;
    return lay;
}

int weight_count(const DenoiserConfig& cfg) { return WeightLayout::make(cfg).total; }

std::vector<double> init_weights(const DenoiserConfig& cfg, Rng& rng) {
    const WeightLayout lay = WeightLayout::make(cfg);
    std::vector<double> weights(lay.total, 0.0);
    auto fill_uniform = [&](int offset, int count, int fan_in) {
        const double bound = std::sqrt(3.0 / fan_in);
        for (int i = 0; i < count; ++i) weights[offset + i] = bound * (2.0 * rng.uniform01() - 1.0);
    };
    fill_uniform(lay.w_in, cfg.hidden_width * cfg.latent_dim, cfg.latent_dim);
    fill_uniform(lay.p_embed, cfg.hidden_width * cfg.sigma_embed_dim, cfg.sigma_embed_dim);
    for (int b = 0; b < cfg.depth - 1; ++b)
        fill_uniform(lay.blocks + b * lay.block_stride, cfg.hidden_width * cfg.hidden_width, cfg.hidden_width);
    // w_out, b_out stay zero
    return weights;
}

Preconditioner Preconditioner::at(double sigma, double sigma_data) {
    const double sd2 = sigma_data * sigma_data;
    const double denom = sigma * sigma + sd2;
    Preconditioner pc;
    pc.c_in = 1.0 / std::sqrt(denom);
    pc.c_skip = sd2 / denom;
    pc.c_out = sigma * sigma_data / std::sqrt(denom);
    return pc;
}

double loss_weight(double sigma, double sigma_data) {
    const double c = sigma * sigma_data;
    return (sigma * sigma + sigma_data * sigma_data) / (c * c);
}

void sigma_embedding(double sigma, int dim, std::span<double> out) {
    const double t = std::log(sigma);
    const int half = dim / 2;
    for (int j = 0; j < half; ++j) {
        const double freq = 0.25 * std::pow(2.0, j);
        out[j] = std::sin(freq * t);
        out[half + j] = std::cos(freq * t);
    }
}

std::vector<double> denoiser_forward(const DenoiserConfig& cfg, std::span<const double> weights,
                                     std::span<const double> x, double sigma, double sigma_max) {
    check_sigma(sigma, sigma_max);
    Trace t = run_forward(cfg, weights, x, sigma);
    std::vector<double> out(cfg.latent_dim);
    for (int i = 0; i < cfg.latent_dim; ++i) out[i] = t.pc.c_skip * x[i] + t.pc.c_out * t.f[i];
    return out;
}

std::vector<double> denoiser_input_gradient(const DenoiserConfig& cfg, std::span<const double> weights,
                                            std::span<const double> x, double sigma, double sigma_max,
                                            std::span<const double> cotangent) {
    check_sigma(sigma, sigma_max);
    if (cotangent.size() != x.size()) throw ConfigError("denoiser: cotangent size mismatch");
    const WeightLayout lay = WeightLayout::make(cfg);
    const int l = cfg.latent_dim;
    const int w = cfg.hidden_width;
    Trace t = run_forward(cfg, weights, x, sigma);

    std::vector<double> gf(l);
    for (int i = 0; i < l; ++i) gf[i] = t.pc.c_out * cotangent[i];

    std::vector<double> gh(w, 0.0);
    matvec_transpose_add(weights.data() + lay.w_out, gf.data(), gh.data(), l, w);

    std::vector<double> gpre(w);
    for (int b = cfg.depth - 2; b >= 0; --b) {
        const double* wb = weights.data() + lay.blocks + static_cast<std::size_t>(b) * lay.block_stride;
        for (int r = 0; r < w; ++r) gpre[r] = gelu_deriv(t.block_pre[b][r]) * gh[r];
        matvec_transpose_add(wb, gpre.data(), gh.data(), w, w);  // gh += W^T gpre (skip path keeps gh)
    }
    for (int r = 0; r < w; ++r) gpre[r] = gelu_deriv(t.pre0[r]) * gh[r];
    std::vector<double> gz(l, 0.0);
    matvec_transpose_add(weights.data() + lay.w_in, gpre.data(), gz.data(), w, l);

    std::vector<double> gx(l);
    for (int i = 0; i < l; ++i) gx[i] = t.pc.c_skip * cotangent[i] + t.pc.c_in * gz[i];
    return gx;
}

double denoising_loss_gradient(const DenoiserConfig& cfg, std::span<const double> weights,
                               std::span<const DenoiseBatchItem> batch, double sigma_max,
                               std::span<double> grad) {
    if (batch.empty()) throw ConfigError("denoiser: empty batch");
    const WeightLayout lay = WeightLayout::make(cfg);
    if (static_cast<int>(grad.size()) != lay.total) throw ConfigError("denoiser: gradient size mismatch");
    const int l = cfg.latent_dim;
    const int w = cfg.hidden_width;
    std::fill(grad.begin(), grad.end(), 0.0);

    double loss = 0.0;
    const double inv_norm = 1.0 / (static_cast<double>(batch.size()) * l);
    std::vector<double> gf(l), gh(w), gpre(w);
    for (const DenoiseBatchItem& item : batch) {
        check_sigma(item.sigma, sigma_max);
        std::span<const double> x(item.x_noisy, static_cast<std::size_t>(l));
        Trace t = run_forward(cfg, weights, x, item.sigma);
        const double lam = loss_weight(item.sigma, cfg.sigma_data);

        // residual of the preconditioned output against the clean latent
        double sample_loss = 0.0;
        for (int i = 0; i < l; ++i) {
            const double d = t.pc.c_skip * x[i] + t.pc.c_out * t.f[i] - item.x_clean[i];
            sample_loss += d * d;
            gf[i] = 2.0 * lam * inv_norm * t.pc.c_out * d;
        }
        loss += lam * inv_norm * sample_loss;

        const double* h_last = cfg.depth > 1 ? t.block_h.back().data() : t.h0.data();
        outer_accumulate(grad.data() + lay.w_out, gf.data(), h_last, l, w);
        for (int i = 0; i < l; ++i) grad[lay.b_out + i] += gf[i];

        std::fill(gh.begin(), gh.end(), 0.0);
        matvec_transpose_add(weights.data() + lay.w_out, gf.data(), gh.data(), l, w);
        for (int b = cfg.depth - 2; b >= 0; --b) {
            const double* wb = weights.data() + lay.blocks + static_cast<std::size_t>(b) * lay.block_stride;
            double* gwb = grad.data() + lay.blocks + static_cast<std::size_t>(b) * lay.block_stride;
            for (int r = 0; r < w; ++r) gpre[r] = gelu_deriv(t.block_pre[b][r]) * gh[r];
            const double* h_in = b > 0 ? t.block_h[b - 1].data() : t.h0.data();
            outer_accumulate(gwb, gpre.data(), h_in, w, w);
            for (int r = 0; r < w; ++r) gwb[static_cast<std::size_t>(w) * w + r] += gpre[r];
            matvec_transpose_add(wb, gpre.data(), gh.data(), w, w);
        }
        for (int r = 0; r < w; ++r) gpre[r] = gelu_deriv(t.pre0[r]) * gh[r];
        outer_accumulate(grad.data() + lay.w_in, gpre.data(), t.z.data(), w, l);
        for (int r = 0; r < w; ++r) grad[lay.b_in + r] += gpre[r];
        outer_accumulate(grad.data() + lay.p_embed, gpre.data(), t.embed.data(), w, cfg.sigma_embed_dim);
    }
    return loss;
}

void save_checkpoint(const std::string& path, const DenoiserCheckpoint& ckpt) {
    ByteWriter w;
    w.magic("PISDCKPT");
    w.u16(1);
    w.i32(ckpt.config.latent_dim);
    w.i32(ckpt.config.hidden_width);
    w.i32(ckpt.config.depth);
    w.i32(ckpt.config.sigma_embed_dim);
    w.f64(ckpt.config.sigma_data);
    w.f64(ckpt.sigma_max);
    w.u64(ckpt.codec_fingerprint);
    w.u64(ckpt.train_steps);
    w.u64(ckpt.weights.size());
    for (double v : ckpt.weights) w.f64(v);
    w.append_crc32();
    write_file(path, w.data());
}

DenoiserCheckpoint load_checkpoint(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    ByteReader r(bytes);
    r.check_crc32_trailer();
    r.expect_magic("PISDCKPT");
    if (r.u16() != 1) throw IoError("unsupported checkpoint version");
    DenoiserCheckpoint ckpt;
    ckpt.config.latent_dim = r.i32();
    ckpt.config.hidden_width = r.i32();
    ckpt.config.depth = r.i32();
    ckpt.config.sigma_embed_dim = r.i32();
    ckpt.config.sigma_data = r.f64();
    ckpt.sigma_max = r.f64();
    ckpt.codec_fingerprint = r.u64();
    ckpt.train_steps = r.u64();
    const uint64_t count = r.u64();
    if (count != static_cast<uint64_t>(weight_count(ckpt.config)))
        throw IoError("checkpoint weight count does not match its config");
    ckpt.weights.resize(count);
    for (auto& v : ckpt.weights) v = r.f64();
    return ckpt;
}

}  // namespace pisd
