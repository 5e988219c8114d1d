#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pisd/rng.hpp"
#include "pisd/spectral_ops.hpp"
#include "pisd/transforms.hpp"

using namespace pisd;

TEST_CASE("sine laplacian: mode (1,1) carries factor -2 pi^2") {
    const int h = 8;
    std::vector<double> c(static_cast<std::size_t>(h) * h, 0.0), out(c.size());
    c[0] = 1.0;
    spectral_laplacian_sine(c, out, h);
    CHECK(out[0] == doctest::Approx(-2.0 * M_PI * M_PI).epsilon(1e-15));
}

TEST_CASE("fourier laplacian: mean mode maps to zero") {
    const int n = 8;
    std::vector<cplx> c(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0)), out(c.size());
    c[0] = cplx(3.0, -1.0);
    spectral_laplacian_fourier(c, out, n);
    CHECK(std::abs(out[0]) == 0.0);
}

TEST_CASE("fourier laplacian converges to finite differences at order two") {
    // u = sin(2 pi x1): Delta u = -4 pi^2 u; the spectral result is exact so the
    // discrepancy to the 5-point stencil is its O(h^2) truncation error.
    double prev_err = 0.0;
    int step = 0;
    for (int n : {16, 32, 64}) {
        FourierTransform2 tr(n);
        std::vector<double> u(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(i) * n + j] = std::sin(2.0 * M_PI * i / n);
        std::vector<cplx> c(u.size()), lc(u.size());
        tr.forward_real(u, c);
        spectral_laplacian_fourier(c, lc, n);
        std::vector<double> lap(u.size());
        tr.synthesize_real(lc, lap);

        for (std::size_t i = 0; i < u.size(); ++i)
            CHECK(lap[i] == doctest::Approx(-4.0 * M_PI * M_PI * u[i]).epsilon(1e-10));

        auto fd = oracle::fd_laplacian_periodic(u, n, 1.0 / n);
        const double err = oracle::max_abs_diff(lap, fd);
        if (step > 0) {
            const double order = std::log2(prev_err / err);
            CHECK(order > 1.9);
            CHECK(order < 2.1);
        }
        prev_err = err;
        ++step;
    }
}

TEST_CASE("biot-savart single modes match the coefficient formulas") {
    const int n = 8;
    std::vector<cplx> w(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    std::vector<cplx> v1(w.size()), v2(w.size());
    const cplx amp(0.7, -0.3);

    w[index_of_freq(0, n) * n + index_of_freq(1, n)] = amp;  // k = (0,1)
    biot_savart(w, v1, v2, n);
    CHECK(std::abs(v1[0 * n + 1] - cplx(0.0, 1.0) * amp) < 1e-15);
    CHECK(std::abs(v2[0 * n + 1]) < 1e-15);

    std::fill(w.begin(), w.end(), cplx(0.0, 0.0));
    w[index_of_freq(1, n) * n + index_of_freq(0, n)] = amp;  // k = (1,0)
    biot_savart(w, v1, v2, n);
    CHECK(std::abs(v1[1 * n + 0]) < 1e-15);
    CHECK(std::abs(v2[1 * n + 0] - cplx(0.0, -1.0) * amp) < 1e-15);
}

TEST_CASE("biot-savart output is divergence free mode-wise") {
    const int n = 16;
    Rng rng(55);
    std::vector<cplx> w(static_cast<std::size_t>(n) * n);
    for (auto& v : w) v = cplx(rng.normal(), rng.normal());
    std::vector<cplx> v1(w.size()), v2(w.size());
    biot_savart(w, v1, v2, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const int k1 = freq_of_index(a, n);
            const int k2 = freq_of_index(b, n);
            const std::size_t idx = static_cast<std::size_t>(a) * n + b;
            const cplx div = cplx(0.0, 1.0) * (static_cast<double>(k1) * v1[idx] + static_cast<double>(k2) * v2[idx]);
            CHECK(std::abs(div) <= 1e-12 * std::abs(w[idx]) + 1e-300);
        }
}

TEST_CASE("lemma 1 sample inequality: zero mean, shifted mean, gaussian field") {
    const int h = 8;
    ChannelCodec cc;
    cc.basis = {BasisKind::SineDirichlet, 2, h};
    cc.trunc = TruncationSet::make(TruncationKind::Cube, 6, cc.basis);
    const auto& modes = cc.trunc.modes;
    const std::size_t n_modes = modes.size();

    Rng rng(808);
    // zero-mean coefficients: lhs == rhs up to the population-variance identity
    std::vector<std::vector<cplx>> zero_mean;
    for (int s = 0; s < 32; ++s) {
        std::vector<cplx> c(n_modes);
        for (auto& v : c) v = cplx(rng.normal(), 0.0);
        zero_mean.push_back(std::move(c));
    }
    ScaleVector sv;
    sv.eps_floor = 1e-8;
    sv.s.resize(n_modes);
    for (std::size_t m = 0; m < n_modes; ++m) {
        cplx mean(0.0, 0.0);
        double sq = 0.0;
        for (const auto& c : zero_mean) {
            mean += c[m];
            sq += std::norm(c[m]);
        }
        mean /= static_cast<double>(zero_mean.size());
        sv.s[m] = std::sqrt(std::max(sq / zero_mean.size() - std::norm(mean), 0.0));
    }
    for (int m : {0, 1, 2}) {
        auto res = lemma1_check(sv, zero_mean, modes, m);
        CHECK(res.holds);
        CHECK(res.lhs <= res.rhs + 1e-9);
    }

    // constant nonzero mean per mode: strict inequality
    std::vector<std::vector<cplx>> shifted = zero_mean;
    for (auto& c : shifted)
        for (auto& v : c) v += cplx(2.0, 0.0);
    for (int m : {0, 1, 2}) {
        auto res = lemma1_check(sv, shifted, modes, m);
        CHECK(res.holds);
        CHECK(res.lhs < res.rhs);
    }

    // gaussian random field with power-law spectrum, scales refit from the data
    std::vector<std::vector<cplx>> grf;
    for (int s = 0; s < 48; ++s) {
        std::vector<cplx> c(n_modes);
        for (std::size_t m = 0; m < n_modes; ++m)
            c[m] = cplx(rng.normal() / (1.0 + mode_norm_sq(modes[m])), 0.0);
        grf.push_back(std::move(c));
    }
    ScaleVector sg;
    sg.eps_floor = 1e-8;
    sg.s.resize(n_modes);
    for (std::size_t m = 0; m < n_modes; ++m) {
        cplx mean(0.0, 0.0);
        double sq = 0.0;
        for (const auto& c : grf) {
            mean += c[m];
            sq += std::norm(c[m]);
        }
        mean /= static_cast<double>(grf.size());
        sg.s[m] = std::max(std::sqrt(std::max(sq / grf.size() - std::norm(mean), 0.0)), sg.eps_floor);
    }
    for (int m : {0, 1, 2}) CHECK(lemma1_check(sg, grf, modes, m).holds);
}
