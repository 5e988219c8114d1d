#include "pisd/residuals.hpp"

#include <cmath>

#include "pisd/spectral_ops.hpp"
#include "pisd/transforms.hpp"

namespace pisd {

namespace {

void apply_dealias_mask(std::span<cplx> coeffs, int n, Dealias dealias) {
    if (dealias == Dealias::None) return;
    const int band = dealias_band(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Mode k = mode_of_indices(a, b, n);
            if (mode_norm_inf(k) > band) coeffs[static_cast<std::size_t>(a) * n + b] = cplx(0.0, 0.0);
        }
}

// spectral gradient components: g_j(k) = 2 pi i k_j w(k)
void spectral_gradient(std::span<const cplx> w, std::span<cplx> g1, std::span<cplx> g2, int n) {
    const cplx two_pi_i(0.0, 2.0 * M_PI);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Mode k = mode_of_indices(a, b, n);
            const std::size_t idx = static_cast<std::size_t>(a) * n + b;
            g1[idx] = two_pi_i * static_cast<double>(k.k1) * w[idx];
            g2[idx] = two_pi_i * static_cast<double>(k.k2) * w[idx];
        }
}

double sine_laplacian_symbol(int k1, int k2) {
    return -M_PI * M_PI * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
}

double fourier_diffusion_symbol(Mode k) { return 4.0 * M_PI * M_PI * mode_norm_sq(k); }

std::vector<cplx> forcing_coeffs(const ResidualSpec& spec, int n) {
    if (spec.forcing.data.empty()) return std::vector<cplx>(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
    if (spec.forcing.height != n || spec.forcing.width != n)
        throw ConfigError("ns_residual: forcing grid mismatch");
    FourierTransform2 tr(n);
    std::vector<cplx> q(static_cast<std::size_t>(n) * n);
    tr.forward_real(spec.forcing.slice(0, 0), q);
    return q;
}

}  // namespace

ResidualValue elliptic_residual(PdeKind kind, std::span<const double> u_coeffs, int h,
                                std::span<const double> a_coeffs, int ga, int padding) {
    if (kind != PdeKind::Poisson && kind != PdeKind::Helmholtz)
        throw ConfigError("elliptic_residual: wrong pde kind");
    if (ga - 2 * padding != h) throw ConfigError("elliptic_residual: incompatible geometries");

    // L u on the interior grid, computed from the diagonal symbol
    std::vector<double> lu_coeffs(u_coeffs.size());
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            const std::size_t idx = static_cast<std::size_t>(k1 - 1) * h + (k2 - 1);
            double sym = sine_laplacian_symbol(k1, k2);
            if (kind == PdeKind::Helmholtz) sym += 1.0;
            lu_coeffs[idx] = sym * u_coeffs[idx];
        }
    SineTransform2 tr_u(h);
    std::vector<double> lu(static_cast<std::size_t>(h) * h);
    tr_u.synthesize(lu_coeffs, lu);

    SineTransform2 tr_a(ga);
    std::vector<double> a_grid(static_cast<std::size_t>(ga) * ga);
    tr_a.synthesize(a_coeffs, a_grid);
    std::vector<double> a_int =
        padding > 0 ? restrict_interior(a_grid, h, h, padding) : std::move(a_grid);

    const double hx = 1.0 / (h + 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < lu.size(); ++i) {
        const double r = lu[i] - a_int[i];
        acc += r * r;
    }
    ResidualValue out;
    out.value = hx * hx * acc;
    return out;
}

void elliptic_residual_gradient(PdeKind kind, std::span<const double> u_coeffs, int h,
                                std::span<const double> a_coeffs, int ga, int padding, std::span<double> du,
                                std::span<double> da) {
    if (ga - 2 * padding != h) throw ConfigError("elliptic_residual_gradient: incompatible geometries");
    std::vector<double> lu_coeffs(u_coeffs.size());
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            const std::size_t idx = static_cast<std::size_t>(k1 - 1) * h + (k2 - 1);
            double sym = sine_laplacian_symbol(k1, k2);
            if (kind == PdeKind::Helmholtz) sym += 1.0;
            lu_coeffs[idx] = sym * u_coeffs[idx];
        }
    SineTransform2 tr_u(h);
    std::vector<double> lu(static_cast<std::size_t>(h) * h);
    tr_u.synthesize(lu_coeffs, lu);

    SineTransform2 tr_a(ga);
    std::vector<double> a_grid(static_cast<std::size_t>(ga) * ga);
    tr_a.synthesize(a_coeffs, a_grid);
    std::vector<double> a_int = padding > 0 ? restrict_interior(a_grid, h, h, padding) : std::move(a_grid);

    const double hx = 1.0 / (h + 1);
    std::vector<double> r(static_cast<std::size_t>(h) * h);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * hx * hx * (lu[i] - a_int[i]);

    // du = symbol . S r S
    tr_u.adjoint_synthesize(r, du);
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            const std::size_t idx = static_cast<std::size_t>(k1 - 1) * h + (k2 - 1);
            double sym = sine_laplacian_symbol(k1, k2);
            if (kind == PdeKind::Helmholtz) sym += 1.0;
            du[idx] *= sym;
        }

    // da = -adjoint_synthesize(zero-padded r) on the extended grid
    std::vector<double> r_ext(static_cast<std::size_t>(ga) * ga, 0.0);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j)
            r_ext[static_cast<std::size_t>(i + padding) * ga + j + padding] = r[static_cast<std::size_t>(i) * h + j];
    tr_a.adjoint_synthesize(r_ext, da);
    for (auto& v : da) v = -v;
}

std::vector<cplx> advection_pseudospectral(std::span<const cplx> w, int n, Dealias dealias) {
    const std::size_t m = static_cast<std::size_t>(n) * n;
    if (w.size() != m) throw ConfigError("advection: size mismatch");
    FourierTransform2 tr(n);
    std::vector<cplx> g1h(m), g2h(m), v1h(m), v2h(m);
    spectral_gradient(w, g1h, g2h, n);
    biot_savart(w, v1h, v2h, n);
    std::vector<cplx> g1(m), g2(m), v1(m), v2(m);
    tr.synthesize(g1h, g1);
    tr.synthesize(g2h, g2);
    tr.synthesize(v1h, v1);
    tr.synthesize(v2h, v2);
    std::vector<cplx> prod(m);
    for (std::size_t i = 0; i < m; ++i) prod[i] = v1[i] * g1[i] + v2[i] * g2[i];
    std::vector<cplx> out(m);
    tr.forward(prod, out);
    apply_dealias_mask(out, n, dealias);
    return out;
}

void advection_adjoint_accumulate(std::span<const cplx> w, std::span<const cplx> cot, int n, Dealias dealias,
                                  std::span<cplx> grad) {
    const std::size_t m = static_cast<std::size_t>(n) * n;
    FourierTransform2 tr(n);

    // forward values needed by the product rule
    std::vector<cplx> g1h(m), g2h(m), v1h(m), v2h(m);
    spectral_gradient(w, g1h, g2h, n);
    biot_savart(w, v1h, v2h, n);
    std::vector<cplx> g1(m), g2(m), v1(m), v2(m);
    tr.synthesize(g1h, g1);
    tr.synthesize(g2h, g2);
    tr.synthesize(v1h, v1);
    tr.synthesize(v2h, v2);

    std::vector<cplx> c(cot.begin(), cot.end());
    apply_dealias_mask(c, n, dealias);
    std::vector<cplx> p_cot(m);
    tr.adjoint_forward(c, p_cot);

    std::vector<cplx> v1_cot(m), v2_cot(m), g1_cot(m), g2_cot(m);
    for (std::size_t i = 0; i < m; ++i) {
        v1_cot[i] = std::conj(g1[i]) * p_cot[i];
        g1_cot[i] = std::conj(v1[i]) * p_cot[i];
        v2_cot[i] = std::conj(g2[i]) * p_cot[i];
        g2_cot[i] = std::conj(v2[i]) * p_cot[i];
    }
    std::vector<cplx> v1h_cot(m), v2h_cot(m), g1h_cot(m), g2h_cot(m);
    tr.adjoint_synthesize(v1_cot, v1h_cot);
    tr.adjoint_synthesize(v2_cot, v2h_cot);
    tr.adjoint_synthesize(g1_cot, g1h_cot);
    tr.adjoint_synthesize(g2_cot, g2h_cot);

    const cplx iu(0.0, 1.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Mode k = mode_of_indices(a, b, n);
            const std::size_t idx = static_cast<std::size_t>(a) * n + b;
            // adjoint of the spectral gradient: conj(2 pi i k_j)
            grad[idx] += -2.0 * M_PI * iu *
                         (static_cast<double>(k.k1) * g1h_cot[idx] + static_cast<double>(k.k2) * g2h_cot[idx]);
            if (k.k1 == 0 && k.k2 == 0) continue;
            const double k_sq = mode_norm_sq(k);
            // adjoint of the Biot-Savart factors: conj(+-i k_j / ||k||^2)
            grad[idx] += -iu * (k.k2 / k_sq) * v1h_cot[idx] + iu * (k.k1 / k_sq) * v2h_cot[idx];
        }
}

ResidualValue ns_residual(const std::vector<std::vector<cplx>>& w_stack, int n, const ResidualSpec& spec) {
    const int steps = static_cast<int>(w_stack.size());
    if (spec.kind != PdeKind::NavierStokes) throw ConfigError("ns_residual: wrong pde kind");
    if (steps < 3) throw ConfigError("ns_residual: need at least 3 time steps");
    if (static_cast<int>(spec.t_grid.size()) != steps) throw ConfigError("ns_residual: time grid mismatch");
    const std::size_t m = static_cast<std::size_t>(n) * n;
    for (const auto& w : w_stack)
        if (w.size() != m) throw ConfigError("ns_residual: geometry mismatch");

    const std::vector<cplx> q = forcing_coeffs(spec, n);
    ResidualValue out;
    out.per_time.resize(steps - 2, 0.0);
    for (int i = 1; i + 1 < steps; ++i) {
        const double dt = spec.t_grid[i + 1] - spec.t_grid[i - 1];
        const std::vector<cplx> adv = advection_pseudospectral(w_stack[i], n, spec.dealias);
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const Mode k = mode_of_indices(a, b, n);
                const std::size_t idx = static_cast<std::size_t>(a) * n + b;
                const cplx r = (w_stack[i + 1][idx] - w_stack[i - 1][idx]) / dt + adv[idx] +
                               spec.viscosity * fourier_diffusion_symbol(k) * w_stack[i][idx] - q[idx];
                acc += std::norm(r);
            }
        out.per_time[i - 1] = acc;
        out.value += acc;
    }
    return out;
}

std::vector<std::vector<cplx>> ns_residual_gradient(const std::vector<std::vector<cplx>>& w_stack, int n,
                                                    const ResidualSpec& spec) {
    const int steps = static_cast<int>(w_stack.size());
    if (steps < 3) throw ConfigError("ns_residual_gradient: need at least 3 time steps");
    const std::size_t m = static_cast<std::size_t>(n) * n;
    const std::vector<cplx> q = forcing_coeffs(spec, n);

    std::vector<std::vector<cplx>> grad(steps, std::vector<cplx>(m, cplx(0.0, 0.0)));
    std::vector<cplx> r(m);
    for (int i = 1; i + 1 < steps; ++i) {
        const double dt = spec.t_grid[i + 1] - spec.t_grid[i - 1];
        const std::vector<cplx> adv = advection_pseudospectral(w_stack[i], n, spec.dealias);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const Mode k = mode_of_indices(a, b, n);
                const std::size_t idx = static_cast<std::size_t>(a) * n + b;
                r[idx] = (w_stack[i + 1][idx] - w_stack[i - 1][idx]) / dt + adv[idx] +
                         spec.viscosity * fourier_diffusion_symbol(k) * w_stack[i][idx] - q[idx];
            }
        // cotangent 2r through each linear term, advection via its adjoint
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const Mode k = mode_of_indices(a, b, n);
                const std::size_t idx = static_cast<std::size_t>(a) * n + b;
                const cplx c = 2.0 * r[idx];
                grad[i + 1][idx] += c / dt;
                grad[i - 1][idx] -= c / dt;
                grad[i][idx] += spec.viscosity * fourier_diffusion_symbol(k) * c;
            }
        std::vector<cplx> c2(m);
        for (std::size_t idx = 0; idx < m; ++idx) c2[idx] = 2.0 * r[idx];
        advection_adjoint_accumulate(w_stack[i], c2, n, spec.dealias, grad[i]);
    }
    return grad;
}

namespace {

// Shapes the latent's coefficient stacks for the elliptic residuals:
// channel 0 is u (interior, no padding), channel 1 is a (padded or not).
struct EllipticStacks {
    std::vector<double> u;
    std::vector<double> a;
    int h;
    int ga;
    int padding;
};

EllipticStacks elliptic_stacks(const SpectralLatent& latent, const Codec& codec) {
    if (codec.channels.size() != 2 || codec.time_steps != 1 ||
        codec.channels[0].basis.kind != BasisKind::SineDirichlet ||
        codec.channels[1].basis.kind != BasisKind::SineDirichlet)
        throw ConfigError("residual: codec layout incompatible with elliptic pde");
    auto stacks = latent_to_coeff_stacks(latent, codec);
    EllipticStacks out;
    out.h = codec.channels[0].basis.grid_size;
    out.ga = codec.channels[1].basis.grid_size;
    out.padding = codec.channels[1].padding_layers;
    out.u.resize(stacks[0].size());
    out.a.resize(stacks[1].size());
    for (std::size_t i = 0; i < stacks[0].size(); ++i) out.u[i] = stacks[0][i].real();
    for (std::size_t i = 0; i < stacks[1].size(); ++i) out.a[i] = stacks[1][i].real();
    return out;
}

}  // namespace

ResidualValue residual_value(const SpectralLatent& latent, const Codec& codec, const ResidualSpec& spec) {
    if (spec.kind == PdeKind::NavierStokes) {
        if (codec.channels.size() != 1 || codec.channels[0].basis.kind != BasisKind::FourierPeriodic)
            throw ConfigError("residual: codec layout incompatible with navier-stokes");
        return ns_residual(latent_to_coeff_stacks(latent, codec), codec.channels[0].basis.grid_size, spec);
    }
    EllipticStacks st = elliptic_stacks(latent, codec);
    return elliptic_residual(spec.kind, st.u, st.h, st.a, st.ga, st.padding);
}

std::vector<double> residual_gradient(const SpectralLatent& latent, const Codec& codec,
                                      const ResidualSpec& spec) {
    if (spec.kind == PdeKind::NavierStokes) {
        if (codec.channels.size() != 1 || codec.channels[0].basis.kind != BasisKind::FourierPeriodic)
            throw ConfigError("residual: codec layout incompatible with navier-stokes");
        const int n = codec.channels[0].basis.grid_size;
        auto stacks = latent_to_coeff_stacks(latent, codec);
        auto grads = ns_residual_gradient(stacks, n, spec);
        return coeff_stacks_adjoint(grads, codec);
    }
    EllipticStacks st = elliptic_stacks(latent, codec);
    std::vector<double> du(st.u.size()), da(st.a.size());
    elliptic_residual_gradient(spec.kind, st.u, st.h, st.a, st.ga, st.padding, du, da);
    std::vector<std::vector<cplx>> cots(2);
    cots[0].resize(du.size());
    cots[1].resize(da.size());
    for (std::size_t i = 0; i < du.size(); ++i) cots[0][i] = cplx(du[i], 0.0);
    for (std::size_t i = 0; i < da.size(); ++i) cots[1][i] = cplx(da[i], 0.0);
    return coeff_stacks_adjoint(cots, codec);
}

}  // namespace pisd
