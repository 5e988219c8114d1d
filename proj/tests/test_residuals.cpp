#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pisd/residuals.hpp"
#include "pisd/rng.hpp"
#include "pisd/spectral_ops.hpp"

using namespace pisd;

namespace {

Codec elliptic_codec(int h, int trunc_c, int padding) {
    Codec codec;
    codec.time_steps = 1;
    ChannelCodec u;
    u.basis = {BasisKind::SineDirichlet, 2, h};
    u.trunc = TruncationSet::make(TruncationKind::Hyperbolic, trunc_c, u.basis);
    u.scales.s.assign(u.trunc.modes.size(), 1.0);
    ChannelCodec a;
    a.basis = {BasisKind::SineDirichlet, 2, h + 2 * padding};
    a.padding_layers = padding;
    a.trunc = TruncationSet::make(TruncationKind::Hyperbolic, trunc_c, a.basis);
    a.scales.s.assign(a.trunc.modes.size(), 1.0);
    codec.channels = {u, a};
    return codec;
}

Codec ns_codec(int n, int trunc_c, int time_steps) {
    Codec codec;
    codec.time_steps = time_steps;
    ChannelCodec w;
    w.basis = {BasisKind::FourierPeriodic, 2, n};
    w.trunc = TruncationSet::make(TruncationKind::Cube, trunc_c, w.basis);
    w.scales.s.assign(w.trunc.modes.size(), 1.0);
    codec.channels = {w};
    return codec;
}

ResidualSpec ns_spec(int steps, double viscosity, Dealias dealias = Dealias::TwoThirds) {
    ResidualSpec spec;
    spec.kind = PdeKind::NavierStokes;
    spec.dealias = dealias;
    spec.viscosity = viscosity;
    spec.t_grid.resize(steps);
    for (int i = 0; i < steps; ++i) spec.t_grid[i] = static_cast<double>(i) / (steps - 1);
    return spec;
}

// central finite differences of a scalar function of the latent
template <typename F>
std::vector<double> fd_gradient(F f, std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double rel_vec_err(std::span<const double> got, std::span<const double> want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("poisson residual vanishes on exact truncated solutions") {
    const int h = 12;
    Rng rng(3);
    std::vector<double> a(static_cast<std::size_t>(h) * h, 0.0), u(a.size(), 0.0);
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            const std::size_t idx = static_cast<std::size_t>(k1 - 1) * h + (k2 - 1);
            a[idx] = rng.normal();
            u[idx] = -a[idx] / (M_PI * M_PI * (k1 * k1 + k2 * k2));
        }
    CHECK(elliptic_residual(PdeKind::Poisson, u, h, a, h, 0).value < 1e-18);
}

TEST_CASE("poisson residual of a single sine mode is its squared L2 norm") {
    const int h = 16;
    std::vector<double> u(static_cast<std::size_t>(h) * h, 0.0), a(u.size(), 0.0);
    a[0] = 1.0;  // a = sin(pi x1) sin(pi x2)
    const double got = elliptic_residual(PdeKind::Poisson, u, h, a, h, 0).value;
    CHECK(got == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("helmholtz residual single-mode cases") {
    const int h = 16;
    std::vector<double> u(static_cast<std::size_t>(h) * h, 0.0), a(u.size(), 0.0);
    // u a single mode with a = (1 - pi^2 ||k||^2) u  ->  zero residual
    u[static_cast<std::size_t>(1) * h + 2] = 0.8;  // mode (2,3)
    a[static_cast<std::size_t>(1) * h + 2] = (1.0 - M_PI * M_PI * 13.0) * 0.8;
    CHECK(elliptic_residual(PdeKind::Helmholtz, u, h, a, h, 0).value < 1e-18);

    std::fill(u.begin(), u.end(), 0.0);
    std::fill(a.begin(), a.end(), 0.0);
    u[0] = 1.0;  // a = 0, u = sin sin
    const double want = (1.0 - 2.0 * M_PI * M_PI) * (1.0 - 2.0 * M_PI * M_PI) / 4.0;
    CHECK(elliptic_residual(PdeKind::Helmholtz, u, h, a, h, 0).value == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("elliptic residual equals the direct grid quadrature oracle") {
    const int h = 12, padding = 4, ga = h + 2 * padding;
    Rng rng(17);
    std::vector<double> u(static_cast<std::size_t>(h) * h), a(static_cast<std::size_t>(ga) * ga);
    for (auto& v : u) v = rng.normal();
    for (auto& v : a) v = rng.normal() * 0.3;

    for (PdeKind kind : {PdeKind::Poisson, PdeKind::Helmholtz}) {
        // oracle: direct series evaluation of L u and a on the interior grid, then quadrature
        std::vector<double> lu_coeffs(u.size());
        for (int k1 = 1; k1 <= h; ++k1)
            for (int k2 = 1; k2 <= h; ++k2) {
                const std::size_t idx = static_cast<std::size_t>(k1 - 1) * h + (k2 - 1);
                double sym = -M_PI * M_PI * (k1 * k1 + k2 * k2);
                if (kind == PdeKind::Helmholtz) sym += 1.0;
                lu_coeffs[idx] = sym * u[idx];
            }
        auto lu = oracle::sine_synthesis_direct(lu_coeffs, h);
        auto a_ext = oracle::sine_synthesis_direct(a, ga);
        const double hx = 1.0 / (h + 1);
        double want = 0.0;
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < h; ++j) {
                const double r = lu[static_cast<std::size_t>(i) * h + j] -
                                 a_ext[static_cast<std::size_t>(i + padding) * ga + (j + padding)];
                want += hx * hx * r * r;
            }
        const double got = elliptic_residual(kind, u, h, a, ga, padding).value;
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("coefficient-space and grid-space elliptic residual agree on a shared basis") {
    const int h = 14;
    Rng rng(29);
    std::vector<double> u(static_cast<std::size_t>(h) * h), a(u.size());
    for (auto& v : u) v = rng.normal();
    for (auto& v : a) v = rng.normal();
    // coefficient route: value = (1/4) sum_k (sym_k u_k - a_k)^2
    double want = 0.0;
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            const std::size_t idx = static_cast<std::size_t>(k1 - 1) * h + (k2 - 1);
            const double g = -M_PI * M_PI * (k1 * k1 + k2 * k2) * u[idx] - a[idx];
            want += 0.25 * g * g;
        }
    const double got = elliptic_residual(PdeKind::Poisson, u, h, a, h, 0).value;
    CHECK(std::abs(got - want) <= 1e-9 * want);
}

TEST_CASE("advection vanishes for constant and shear-flow fields") {
    const int n = 16;
    std::vector<cplx> w(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    w[0] = cplx(2.0, 0.0);  // constant field
    auto adv = advection_pseudospectral(w, n, Dealias::TwoThirds);
    for (const cplx& v : adv) CHECK(std::abs(v) < 1e-14);

    // w = sin(2 pi x2): modes (0, +-1)
    std::fill(w.begin(), w.end(), cplx(0.0, 0.0));
    w[static_cast<std::size_t>(0) * n + index_of_freq(1, n)] = cplx(0.0, -0.5);
    w[static_cast<std::size_t>(0) * n + index_of_freq(-1, n)] = cplx(0.0, 0.5);
    adv = advection_pseudospectral(w, n, Dealias::TwoThirds);
    for (const cplx& v : adv) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("advection matches the dense spectral convolution oracle") {
    const int n = 32, band = 5;
    Rng rng(31);
    std::vector<cplx> w(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    for (int k1 = -band; k1 <= band; ++k1)
        for (int k2 = -band; k2 <= band; ++k2) {
            const Mode k{k1, k2};
            if (!fourier_mode_is_canonical(k) || (k1 == 0 && k2 == 0)) continue;
            const cplx v(rng.normal(), rng.normal());
            w[static_cast<std::size_t>(index_of_freq(k1, n)) * n + index_of_freq(k2, n)] = v;
            w[static_cast<std::size_t>(index_of_freq(-k1, n)) * n + index_of_freq(-k2, n)] = std::conj(v);
        }
    // oracle: exact convolution of (v1,g1) + (v2,g2) restricted to twice the band
    std::vector<cplx> g1(w.size()), g2(w.size()), v1(w.size()), v2(w.size());
    biot_savart(w, v1, v2, n);
    const cplx two_pi_i(0.0, 2.0 * M_PI);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Mode k = mode_of_indices(a, b, n);
            const std::size_t idx = static_cast<std::size_t>(a) * n + b;
            g1[idx] = two_pi_i * static_cast<double>(k.k1) * w[idx];
            g2[idx] = two_pi_i * static_cast<double>(k.k2) * w[idx];
        }
    auto c1 = oracle::spectral_convolution_direct(v1, g1, n, 2 * band);
    auto c2 = oracle::spectral_convolution_direct(v2, g2, n, 2 * band);
    for (std::size_t i = 0; i < c1.size(); ++i) c1[i] += c2[i];

    auto adv = advection_pseudospectral(w, n, Dealias::None);
    CHECK(oracle::max_abs_diff(adv, c1) < 1e-10);

    // products inside the retained band: the 2/3 mask changes nothing
    auto adv_masked = advection_pseudospectral(w, n, Dealias::TwoThirds);
    CHECK(oracle::max_abs_diff(adv, adv_masked) < 1e-12);
}

TEST_CASE("ns residual: stationary unforced single mode and viscous hand value") {
    const int n = 16, steps = 5;
    const std::size_t m = static_cast<std::size_t>(n) * n;
    std::vector<cplx> slice(m, cplx(0.0, 0.0));
    const Mode k0{1, 2};
    const cplx c(0.4, -0.1);
    slice[static_cast<std::size_t>(index_of_freq(k0.k1, n)) * n + index_of_freq(k0.k2, n)] = c;
    slice[static_cast<std::size_t>(index_of_freq(-k0.k1, n)) * n + index_of_freq(-k0.k2, n)] = std::conj(c);
    std::vector<std::vector<cplx>> stack(steps, slice);

    ResidualValue inviscid = ns_residual(stack, n, ns_spec(steps, 0.0));
    CHECK(inviscid.value < 1e-18);

    const double nu = 0.01;
    ResidualValue viscous = ns_residual(stack, n, ns_spec(steps, nu));
    // each interior step contributes |nu 4 pi^2 ||k0||^2 c|^2 for k0 and its conjugate
    const double per_mode = std::norm(nu * 4.0 * M_PI * M_PI * mode_norm_sq(k0) * c);
    const double want = (steps - 2) * 2.0 * per_mode;
    CHECK(viscous.value == doctest::Approx(want).epsilon(1e-12));
    REQUIRE(viscous.per_time.size() == static_cast<std::size_t>(steps - 2));
    double sum = 0.0;
    for (double v : viscous.per_time) sum += v;
    CHECK(sum == doctest::Approx(viscous.value).epsilon(1e-15));
    CHECK(viscous.value >= 0.0);
}

TEST_CASE("ns residual rejects short stacks") {
    const int n = 8;
    std::vector<std::vector<cplx>> stack(2, std::vector<cplx>(static_cast<std::size_t>(n) * n));
    CHECK_THROWS_AS(ns_residual(stack, n, ns_spec(2, 1e-3)), ConfigError);
}

TEST_CASE("elliptic residual gradient: zero at solutions, matches finite differences") {
    Codec codec = elliptic_codec(10, 5, 0);  // unpadded so exact solutions are expressible
    ResidualSpec spec;
    spec.kind = PdeKind::Poisson;

    // latent whose decode solves Delta u = a exactly
    Rng rng(71);
    SpectralLatent sol;
    sol.codec_fingerprint = codec.fingerprint();
    sol.x.assign(codec.latent_dim(), 0.0);
    const int n_modes = codec.channels[0].trunc.mode_count();
    for (int i = 0; i < n_modes; ++i) {
        const Mode k = codec.channels[0].trunc.modes[i];
        const double a_k = rng.normal();
        sol.x[i] = -a_k / (M_PI * M_PI * mode_norm_sq(k));
        sol.x[n_modes + i] = a_k;
    }
    auto grad_at_sol = residual_gradient(sol, codec, spec);
    for (double g : grad_at_sol) CHECK(std::abs(g) < 1e-12);

    // random latents on the padded codec vs central differences
    Codec padded = elliptic_codec(10, 5, 4);
    for (PdeKind kind : {PdeKind::Poisson, PdeKind::Helmholtz}) {
        ResidualSpec s2;
        s2.kind = kind;
        SpectralLatent lat;
        lat.codec_fingerprint = padded.fingerprint();
        lat.x.resize(padded.latent_dim());
        for (auto& v : lat.x) v = rng.normal();
        auto grad = residual_gradient(lat, padded, s2);
        auto value_of = [&](const std::vector<double>& x) {
            SpectralLatent l{x, padded.fingerprint()};
            return residual_value(l, padded, s2).value;
        };
        auto fd = fd_gradient(value_of, lat.x, 1e-5);
        CHECK(rel_vec_err(grad, fd) < 1e-6);
    }
}

TEST_CASE("ns residual gradient matches finite differences") {
    Codec codec = ns_codec(16, 3, 4);
    ResidualSpec spec = ns_spec(4, 5e-3);
    Rng rng(99);
    SpectralLatent lat;
    lat.codec_fingerprint = codec.fingerprint();
    lat.x.resize(codec.latent_dim());
    for (auto& v : lat.x) v = 0.5 * rng.normal();

    auto grad = residual_gradient(lat, codec, spec);
    auto value_of = [&](const std::vector<double>& x) {
        SpectralLatent l{x, codec.fingerprint()};
        return residual_value(l, codec, spec).value;
    };
    auto fd = fd_gradient(value_of, lat.x, 1e-5);
    CHECK(rel_vec_err(grad, fd) < 1e-4);
}

TEST_CASE("residual gradients match finite differences on many random instances") {
    Rng rng(123);
    Codec padded = elliptic_codec(8, 4, 2);
    Codec nsc = ns_codec(8, 2, 3);
    ResidualSpec nspec = ns_spec(3, 2e-3);
    for (int trial = 0; trial < 8; ++trial) {
        for (PdeKind kind : {PdeKind::Poisson, PdeKind::Helmholtz}) {
            ResidualSpec s;
            s.kind = kind;
            SpectralLatent lat;
            lat.codec_fingerprint = padded.fingerprint();
            lat.x.resize(padded.latent_dim());
            for (auto& v : lat.x) v = rng.normal();
            auto grad = residual_gradient(lat, padded, s);
            auto value_of = [&](const std::vector<double>& x) {
                SpectralLatent l{x, padded.fingerprint()};
                return residual_value(l, padded, s).value;
            };
            CHECK(rel_vec_err(grad, fd_gradient(value_of, lat.x, 1e-5)) < 1e-6);
        }
        SpectralLatent lat;
        lat.codec_fingerprint = nsc.fingerprint();
        lat.x.resize(nsc.latent_dim());
        for (auto& v : lat.x) v = 0.7 * rng.normal();
        auto grad = residual_gradient(lat, nsc, nspec);
        auto value_of = [&](const std::vector<double>& x) {
            SpectralLatent l{x, nsc.fingerprint()};
            return residual_value(l, nsc, nspec).value;
        };
        CHECK(rel_vec_err(grad, fd_gradient(value_of, lat.x, 1e-5)) < 1e-4);
    }
}
