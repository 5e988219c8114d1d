#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pisd/datagen.hpp"
#include "pisd/experiment.hpp"
#include "pisd/io_util.hpp"
#include "pisd/training.hpp"

using namespace pisd;

namespace {

struct Pipeline {
    Dataset ds;
    Codec codec;
};

Pipeline small_poisson_pipeline(int count, int resolution, int trunc_c) {
    Pipeline p;
    DatasetSpec spec;
    spec.task = Task::Poisson;
    spec.count = count;
    spec.seed = 101;
    spec.resolution = resolution;
    p.ds = build_dataset(spec);
    Config cfg;
    cfg.set("codec", "trunc_c", std::to_string(trunc_c));
    p.codec = build_codec_for_task(cfg, Task::Poisson, resolution);
    fit_scales(p.codec, p.ds.samples);
    return p;
}

}  // namespace

TEST_CASE("precomputed latents have near-unit variance on the fitting split") {
    Pipeline p = small_poisson_pipeline(64, 16, 6);
    LatentMatrix m = precompute_latents(p.ds, p.codec);
    REQUIRE(m.rows == 64);
    REQUIRE(m.dim == p.codec.latent_dim());

    // population variance of each latent slot over the split that fit the scales
    for (int j = 0; j < m.dim; ++j) {
        double mean = 0.0, sq = 0.0;
        for (int r = 0; r < m.rows; ++r) {
            const double v = m.row(r)[j];
            mean += v;
            sq += v * v;
        }
        mean /= m.rows;
        const double var = sq / m.rows - mean * mean;
        CHECK(var == doctest::Approx(1.0).epsilon(0.20));
    }
}

TEST_CASE("latent cache reloads bit-exactly and rejects a mismatched codec") {
    Pipeline p = small_poisson_pipeline(8, 16, 4);
    LatentMatrix m = precompute_latents(p.ds, p.codec);
    const std::string path = "test_latents_tmp.pisd";
    save_latents(path, m);
    LatentMatrix back = load_latents(path, p.codec);
    CHECK(back.data == m.data);

    Codec other = p.codec;
    other.channels[0].scales.s[0] *= 1.5;
    CHECK_THROWS_AS(load_latents(path, other), IoError);
    std::remove(path.c_str());

    Dataset empty_channels;
    empty_channels.samples.push_back(FieldGrid(1, 0, 16, 16, Domain::UnitSquareDirichlet));
    CHECK_THROWS_AS(precompute_latents(empty_channels, p.codec), ConfigError);
}

TEST_CASE("training memorizes a single latent at fixed small sigma") {
    LatentMatrix m;
    m.rows = 1;
    m.dim = 16;
    m.codec_fingerprint = 42;
    Rng rng(9);
    m.data.resize(m.dim);
    for (auto& v : m.data) v = rng.normal();

    DenoiserConfig arch;
    arch.latent_dim = m.dim;
    arch.hidden_width = 48;
    arch.depth = 3;

    TrainConfig tc;
    tc.batch_size = 32;
    tc.total_steps = 5000;
    tc.learning_rate = 1e-3;
    tc.sigma_min = 0.0999;
    tc.sigma_max = 0.1001;
    tc.seed = 7;

    TrainResult res = train(m, arch, tc);
    double tail = 0.0;
    for (int i = 0; i < 100; ++i) tail += res.loss_curve[res.loss_curve.size() - 1 - i];
    tail /= 100.0;
    CHECK(tail < 1e-3);
}

TEST_CASE("initial loss matches the zero-init closed form in expectation") {
    // With the output layer zeroed, D = c_skip x, so for fixed sigma the loss is
    // lambda(sigma) E||(c_skip-1) y + c_skip sigma n||^2 / dim
    //   = lambda [ (1-c_skip)^2 ||y||^2 + c_skip^2 sigma^2 dim ] / dim.
    LatentMatrix m;
    m.rows = 1;
    m.dim = 24;
    Rng rng(11);
    m.data.resize(m.dim);
    for (auto& v : m.data) v = rng.normal();

    DenoiserConfig arch;
    arch.latent_dim = m.dim;
    arch.hidden_width = 16;
    arch.depth = 2;

    const double sigma = 0.5;
    TrainConfig tc;
    tc.batch_size = 4096;  // large batch so the single recorded step is near expectation
    tc.total_steps = 1;
    tc.sigma_min = sigma * (1.0 - 1e-9);
    tc.sigma_max = sigma * (1.0 + 1e-9);
    tc.seed = 13;

    TrainResult res = train(m, arch, tc);
    const Preconditioner pc = Preconditioner::at(sigma, arch.sigma_data);
    double y_sq = 0.0;
    for (double v : m.data) y_sq += v * v;
    const double lam = loss_weight(sigma, arch.sigma_data);
    const double want =
        lam * ((1.0 - pc.c_skip) * (1.0 - pc.c_skip) * y_sq + pc.c_skip * pc.c_skip * sigma * sigma * m.dim) /
        m.dim;
    CHECK(res.loss_curve[0] == doctest::Approx(want).epsilon(0.10));
}

TEST_CASE("seed-fixed training is bit-reproducible") {
    Pipeline p = small_poisson_pipeline(12, 16, 4);
    LatentMatrix m = precompute_latents(p.ds, p.codec);
    DenoiserConfig arch;
    arch.latent_dim = m.dim;
    arch.hidden_width = 24;
    arch.depth = 2;
    TrainConfig tc;
    tc.batch_size = 8;
    tc.total_steps = 50;
    tc.seed = 77;
    TrainResult a = train(m, arch, tc);
    TrainResult b = train(m, arch, tc);
    CHECK(a.checkpoint.weights == b.checkpoint.weights);
    CHECK(a.loss_curve == b.loss_curve);
}

TEST_CASE("train validates its configuration") {
    LatentMatrix m;
    m.rows = 1;
    m.dim = 4;
    m.data = {0.0, 0.0, 0.0, 0.0};
    DenoiserConfig arch;
    arch.latent_dim = 4;
    arch.hidden_width = 8;
    arch.depth = 2;
    TrainConfig tc;
    tc.total_steps = 1;
    tc.sigma_min = 2.0;
    tc.sigma_max = 1.0;
    CHECK_THROWS_AS(train(m, arch, tc), ConfigError);
    LatentMatrix empty;
    CHECK_THROWS_AS(train(empty, arch, TrainConfig{}), ConfigError);
}
