#include "pisd/datagen.hpp"

#include <cmath>

#include "pisd/io_util.hpp"
#include "pisd/spectral_ops.hpp"
#include "pisd/transforms.hpp"

namespace pisd {

namespace {

double spectral_density(const GrfSpec& spec, Mode k) {
    const double arg = 4.0 * M_PI * M_PI * mode_norm_sq(k) + spec.tau * spec.tau;
    return spec.amplitude * std::pow(arg, -spec.alpha);
}

}  // namespace

FieldGrid sample_grf(const GrfSpec& spec, Rng& rng) {
    const int g = spec.basis.grid_size;
    if (g < 1) throw ConfigError("sample_grf: basis grid size not set");
    if (spec.basis.kind == BasisKind::SineDirichlet) {
        SineTransform2 tr(g);
        std::vector<double> coeffs(static_cast<std::size_t>(g) * g);
        for (int k1 = 1; k1 <= g; ++k1)
            for (int k2 = 1; k2 <= g; ++k2)
                coeffs[static_cast<std::size_t>(k1 - 1) * g + (k2 - 1)] =
                    std::sqrt(spectral_density(spec, {k1, k2})) * rng.normal();
        FieldGrid f(1, 1, g, g, Domain::UnitSquareDirichlet);
        tr.synthesize(coeffs, f.slice(0, 0));
        return f;
    }
    FourierTransform2 tr(g);
    std::vector<cplx> coeffs(static_cast<std::size_t>(g) * g, cplx(0.0, 0.0));
    const int band = g / 2 - 1;
    for (int k1 = 0; k1 <= band; ++k1)
        for (int k2 = -band; k2 <= band; ++k2) {
            const Mode k{k1, k2};
            if (!fourier_mode_is_canonical(k) || (k1 == 0 && k2 == 0)) continue;
            const double sigma = std::sqrt(spectral_density(spec, k) / 2.0);
            const cplx v(sigma * rng.normal(), sigma * rng.normal());
            coeffs[static_cast<std::size_t>(index_of_freq(k1, g)) * g + index_of_freq(k2, g)] = v;
            coeffs[static_cast<std::size_t>(index_of_freq(-k1, g)) * g + index_of_freq(-k2, g)] = std::conj(v);
        }
    FieldGrid f(1, 1, g, g, Domain::Torus);
    tr.synthesize_real(coeffs, f.slice(0, 0));
    return f;
}

namespace {

FieldGrid elliptic_solve(const FieldGrid& a, bool helmholtz) {
    if (a.channels != 1 || a.time_steps != 1 || a.height != a.width)
        throw ConfigError("elliptic solve: expected one square slice");
    const int h = a.height;
    SineTransform2 tr(h);
    std::vector<double> ac(static_cast<std::size_t>(h) * h), uc(ac.size());
    tr.forward(a.slice(0, 0), ac);
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            const std::size_t idx = static_cast<std::size_t>(k1 - 1) * h + (k2 - 1);
            const double lap = M_PI * M_PI * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
            uc[idx] = helmholtz ? ac[idx] / (1.0 - lap) : -ac[idx] / lap;
        }
    FieldGrid u(1, 1, h, h, Domain::UnitSquareDirichlet);
    tr.synthesize(uc, u.slice(0, 0));
    return u;
}

}  // namespace

FieldGrid solve_poisson(const FieldGrid& a) { return elliptic_solve(a, false); }
FieldGrid solve_helmholtz(const FieldGrid& a) { return elliptic_solve(a, true); }

FieldGrid ns_forcing_field(int n) {
    FieldGrid q(1, 1, n, n, Domain::Torus);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double arg = 2.0 * M_PI * (static_cast<double>(i) + j) / n;
            q.at(0, 0, i, j) = 0.1 * (std::sin(arg) + std::cos(arg));
        }
    return q;
}

FieldGrid integrate_ns(const FieldGrid& w0, const FieldGrid& forcing, const std::vector<double>& record_times,
                       const NsIntegrateOptions& opts) {
    if (w0.height != w0.width || w0.channels != 1 || w0.time_steps != 1)
        throw ConfigError("integrate_ns: w0 must be one square slice");
    if (record_times.size() < 2 || record_times.front() != 0.0)
        throw ConfigError("integrate_ns: record times must start at 0");
    for (std::size_t i = 1; i < record_times.size(); ++i)
        if (record_times[i] <= record_times[i - 1]) throw ConfigError("integrate_ns: record times must increase");
    const int n = w0.height;
    const std::size_t m = static_cast<std::size_t>(n) * n;
    FourierTransform2 tr(n);

    std::vector<cplx> w(m), q(m);
    tr.forward_real(w0.slice(0, 0), w);
    tr.forward_real(forcing.slice(0, 0), q);
    if (opts.dealias == Dealias::TwoThirds) {
        const int band = dealias_band(n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (mode_norm_inf(mode_of_indices(a, b, n)) > band) w[static_cast<std::size_t>(a) * n + b] = 0.0;
    }

    auto tendency = [&](const std::vector<cplx>& state) {
        std::vector<cplx> adv = advection_pseudospectral(state, n, opts.dealias);
        for (std::size_t i = 0; i < m; ++i) adv[i] = q[i] - adv[i];
        return adv;
    };
    auto check_finite = [&](const std::vector<cplx>& state, double t) {
        for (const cplx& v : state)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > 1e8)
                throw NumericError("integrate_ns: blow-up detected at t=" + std::to_string(t));
    };

    FieldGrid out(static_cast<int>(record_times.size()), 1, n, n, Domain::Torus);
    tr.synthesize_real(w, out.slice(0, 0));

    std::vector<double> decay(m);
    std::vector<cplx> pred(m), k1(m), k2(m);
    for (std::size_t rec = 1; rec < record_times.size(); ++rec) {
        const double interval = record_times[rec] - record_times[rec - 1];
        const int n_sub = std::max(1, static_cast<int>(std::llround(interval / opts.dt_internal)));
        const double dt = interval / n_sub;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const double lam = opts.viscosity * 4.0 * M_PI * M_PI * mode_norm_sq(mode_of_indices(a, b, n));
                decay[static_cast<std::size_t>(a) * n + b] = std::exp(-lam * dt);
            }
        for (int s = 0; s < n_sub; ++s) {
            k1 = tendency(w);
            for (std::size_t i = 0; i < m; ++i) pred[i] = decay[i] * (w[i] + dt * k1[i]);
            k2 = tendency(pred);
            for (std::size_t i = 0; i < m; ++i)
                w[i] = decay[i] * w[i] + 0.5 * dt * (decay[i] * k1[i] + k2[i]);
            check_finite(w, record_times[rec - 1] + (s + 1) * dt);
        }
        tr.synthesize_real(w, out.slice(static_cast<int>(rec), 0));
    }
    return out;
}

GrfSpec default_grf(Task task, int resolution) {
    GrfSpec spec;
    spec.tau = 3.0;
    spec.alpha = 2.0;
    spec.basis.grid_size = resolution;
    spec.basis.kind = task == Task::NavierStokes ? BasisKind::FourierPeriodic : BasisKind::SineDirichlet;
    // normalize so the expected squared L2 norm of the field is one
    spec.amplitude = 1.0;
    double total = 0.0;
    if (spec.basis.kind == BasisKind::SineDirichlet) {
        for (int k1 = 1; k1 <= resolution; ++k1)
            for (int k2 = 1; k2 <= resolution; ++k2) total += 0.25 * spectral_density(spec, {k1, k2});
    } else {
        const int band = resolution / 2 - 1;
        for (int k1 = -band; k1 <= band; ++k1)
            for (int k2 = -band; k2 <= band; ++k2)
                if (k1 != 0 || k2 != 0) total += spectral_density(spec, {k1, k2});
    }
    spec.amplitude = 1.0 / total;
    return spec;
}

Dataset build_dataset(const DatasetSpec& spec) {
    if (spec.count < 2) throw ConfigError("build_dataset: count must be >= 2");
    GrfSpec grf = spec.grf;
    if (grf.basis.grid_size == 0) grf = default_grf(spec.task, spec.resolution);

    Dataset ds;
    ds.task = spec.task;
    ds.seed = spec.seed;
    ds.resolution = spec.resolution;
    ds.samples.reserve(spec.count);

    if (spec.task == Task::NavierStokes) {
        const FieldGrid forcing = ns_forcing_field(spec.resolution);
        std::vector<double> times(spec.ns_time_steps);
        for (int i = 0; i < spec.ns_time_steps; ++i)
            times[i] = static_cast<double>(i) / (spec.ns_time_steps - 1);
        for (int i = 0; i < spec.count; ++i) {
            Rng rng(split_seed(spec.seed, static_cast<uint64_t>(i)));
            FieldGrid w0 = sample_grf(grf, rng);
            ds.samples.push_back(integrate_ns(w0, forcing, times, spec.ns));
        }
        return ds;
    }

    for (int i = 0; i < spec.count; ++i) {
        Rng rng(split_seed(spec.seed, static_cast<uint64_t>(i)));
        FieldGrid a = sample_grf(grf, rng);
        FieldGrid u = spec.task == Task::Poisson ? solve_poisson(a) : solve_helmholtz(a);
        FieldGrid pair(1, 2, spec.resolution, spec.resolution, Domain::UnitSquareDirichlet);
        std::copy(u.slice(0, 0).begin(), u.slice(0, 0).end(), pair.slice(0, 0).begin());
        std::copy(a.slice(0, 0).begin(), a.slice(0, 0).end(), pair.slice(0, 1).begin());
        ds.samples.push_back(std::move(pair));
    }
    return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) {
    if (ds.samples.empty()) throw ConfigError("save_dataset: empty dataset");
    const FieldGrid& first = ds.samples.front();
    ByteWriter w;
    w.magic("PISDDATA");
    w.u16(1);
    w.u8(static_cast<uint8_t>(ds.task));
    w.u32(static_cast<uint32_t>(ds.samples.size()));
    w.u16(static_cast<uint16_t>(first.time_steps));
    w.u16(static_cast<uint16_t>(first.channels));
    w.u16(static_cast<uint16_t>(first.height));
    w.u16(static_cast<uint16_t>(first.width));
    w.u64(ds.seed);
    for (const FieldGrid& f : ds.samples) {
        require_same_geometry(f, first, "save_dataset");
        for (double v : f.data) w.f64(v);
    }
    w.append_crc32();
    write_file(path, w.data());
}

Dataset load_dataset(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    ByteReader r(bytes);
    r.check_crc32_trailer();
    r.expect_magic("PISDDATA");
    if (r.u16() != 1) throw IoError("unsupported dataset version");
    Dataset ds;
    ds.task = static_cast<Task>(r.u8());
    const uint32_t count = r.u32();
    const int t = r.u16();
    const int c = r.u16();
    const int h = r.u16();
    const int wd = r.u16();
    ds.seed = r.u64();
    ds.resolution = h;
    const Domain domain = ds.task == Task::NavierStokes ? Domain::Torus : Domain::UnitSquareDirichlet;
    ds.samples.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        FieldGrid f(t, c, h, wd, domain);
        for (double& v : f.data) v = r.f64();
        ds.samples.push_back(std::move(f));
    }
    return ds;
}

}  // namespace pisd
