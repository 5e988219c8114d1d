#include "pisd/codec.hpp"

#include <algorithm>
#include <cmath>

#include "pisd/io_util.hpp"

namespace pisd {

int ChannelCodec::slots_per_slice() const {
    int n = 0;
    for (const Mode& m : trunc.modes) n += mode_real_components(basis.kind, m);
    return n;
}

int Codec::latent_dim() const {
    int n = 0;
    for (const auto& cc : channels) n += cc.slots_per_slice();
    return n * time_steps;
}

std::vector<Codec::SlotInfo> Codec::slot_map() const {
    std::vector<SlotInfo> map;
    map.reserve(latent_dim());
    for (int t = 0; t < time_steps; ++t)
        for (int c = 0; c < static_cast<int>(channels.size()); ++c)
            for (const Mode& k : channels[c].trunc.modes) {
                map.push_back({t, c, k, false});
                if (mode_real_components(channels[c].basis.kind, k) == 2) map.push_back({t, c, k, true});
            }
    return map;
}

std::vector<double> extend_to_zero_boundary(std::span<const double> field, int h, int w, int layers) {
    if (layers < 1) throw ConfigError("extend_to_zero_boundary: layers must be >= 1");
    if (static_cast<int>(field.size()) != h * w) throw ConfigError("extend_to_zero_boundary: size mismatch");
    const int he = h + 2 * layers;
    const int we = w + 2 * layers;
    std::vector<double> out(static_cast<std::size_t>(he) * we, 0.0);
    for (int i = 0; i < he; ++i) {
        const int di = i < layers ? layers - i : (i >= layers + h ? i - (layers + h - 1) : 0);
        const int ii = std::clamp(i - layers, 0, h - 1);
        for (int j = 0; j < we; ++j) {
            const int dj = j < layers ? layers - j : (j >= layers + w ? j - (layers + w - 1) : 0);
            const int jj = std::clamp(j - layers, 0, w - 1);
            const int ring = std::max(di, dj);
            const double factor = ring == 0 ? 1.0 : static_cast<double>(layers - ring) / layers;
            out[static_cast<std::size_t>(i) * we + j] = factor * field[static_cast<std::size_t>(ii) * w + jj];
        }
    }
    return out;
}

std::vector<double> restrict_interior(std::span<const double> ext, int h, int w, int layers) {
    const int he = h + 2 * layers;
    const int we = w + 2 * layers;
    if (static_cast<int>(ext.size()) != he * we) throw ConfigError("restrict_interior: size mismatch");
    std::vector<double> out(static_cast<std::size_t>(h) * w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            out[static_cast<std::size_t>(i) * w + j] =
                ext[static_cast<std::size_t>(i + layers) * we + (j + layers)];
    return out;
}

std::vector<cplx> full_coeffs_of_slice(std::span<const double> slice, const ChannelCodec& cc) {
    const int g = cc.basis.grid_size;
    std::vector<cplx> coeffs(static_cast<std::size_t>(g) * g);
    if (cc.basis.kind == BasisKind::SineDirichlet) {
        std::vector<double> work;
        std::span<const double> in = slice;
        if (cc.padding_layers > 0) {
            const int h = cc.interior_size();
            work = extend_to_zero_boundary(slice, h, h, cc.padding_layers);
            in = work;
        }
        SineTransform2 tr(g);
        std::vector<double> real_coeffs(in.size());
        tr.forward(in, real_coeffs);
        for (std::size_t i = 0; i < real_coeffs.size(); ++i) coeffs[i] = cplx(real_coeffs[i], 0.0);
    } else {
        FourierTransform2 tr(g);
        tr.forward_real(slice, coeffs);
    }
    return coeffs;
}

std::vector<cplx> raw_mode_coeffs(std::span<const double> slice, const ChannelCodec& cc) {
    std::vector<cplx> full = full_coeffs_of_slice(slice, cc);
    const int g = cc.basis.grid_size;
    std::vector<cplx> out;
    out.reserve(cc.trunc.modes.size());
    for (const Mode& k : cc.trunc.modes) {
        if (cc.basis.kind == BasisKind::SineDirichlet)
            out.push_back(full[static_cast<std::size_t>(k.k1 - 1) * g + (k.k2 - 1)]);
        else
            out.push_back(full[static_cast<std::size_t>(index_of_freq(k.k1, g)) * g + index_of_freq(k.k2, g)]);
    }
    return out;
}

void require_field_matches_codec(const FieldGrid& field, const Codec& codec) {
    if (field.time_steps != codec.time_steps) throw ConfigError("codec: time step mismatch");
    if (field.channels != static_cast<int>(codec.channels.size())) throw ConfigError("codec: channel mismatch");
    for (const auto& cc : codec.channels) {
        if (field.height != cc.interior_size() || field.width != cc.interior_size())
            throw ConfigError("codec: grid size mismatch");
        if (cc.basis.kind == BasisKind::FourierPeriodic && field.domain != Domain::Torus)
            throw ConfigError("codec: fourier channel requires torus field");
    }
}

SpectralLatent encode(const FieldGrid& field, const Codec& codec) {
    require_field_matches_codec(field, codec);
    SpectralLatent latent;
    latent.codec_fingerprint = codec.fingerprint();
    latent.x.reserve(codec.latent_dim());
    for (int t = 0; t < codec.time_steps; ++t)
        for (int c = 0; c < static_cast<int>(codec.channels.size()); ++c) {
            const ChannelCodec& cc = codec.channels[c];
            if (cc.scales.s.size() != cc.trunc.modes.size()) throw ConfigError("codec scales not fitted");
            std::vector<cplx> raw = raw_mode_coeffs(field.slice(t, c), cc);
            for (std::size_t m = 0; m < raw.size(); ++m) {
                const double s = cc.scales.s[m];
                latent.x.push_back(raw[m].real() / s);
                if (mode_real_components(cc.basis.kind, cc.trunc.modes[m]) == 2)
                    latent.x.push_back(raw[m].imag() / s);
            }
        }
    return latent;
}

namespace {

// Scaled truncated coefficients of one (time, channel) slice from latent slots.
// Returns the full coefficient array; advances `pos` past the slice's slots.
std::vector<cplx> scatter_slice_coeffs(const std::vector<double>& x, std::size_t& pos, const ChannelCodec& cc) {
    const int g = cc.basis.grid_size;
    std::vector<cplx> full(static_cast<std::size_t>(g) * g, cplx(0.0, 0.0));
    for (std::size_t m = 0; m < cc.trunc.modes.size(); ++m) {
        const Mode k = cc.trunc.modes[m];
        const double s = cc.scales.s[m];
        if (cc.basis.kind == BasisKind::SineDirichlet) {
            full[static_cast<std::size_t>(k.k1 - 1) * g + (k.k2 - 1)] = cplx(s * x[pos++], 0.0);
        } else if (mode_is_self_conjugate(cc.basis.kind, k)) {
            full[0] = cplx(s * x[pos++], 0.0);
        } else {
            const double re = s * x[pos++];
            const double im = s * x[pos++];
            full[static_cast<std::size_t>(index_of_freq(k.k1, g)) * g + index_of_freq(k.k2, g)] = cplx(re, im);
            full[static_cast<std::size_t>(index_of_freq(-k.k1, g)) * g + index_of_freq(-k.k2, g)] =
                cplx(re, -im);
        }
    }
    return full;
}

// Adjoint of scatter_slice_coeffs composed with the scaling.
void gather_slice_adjoint(const std::vector<cplx>& full_cot, const ChannelCodec& cc, std::vector<double>& out) {
    const int g = cc.basis.grid_size;
    for (std::size_t m = 0; m < cc.trunc.modes.size(); ++m) {
        const Mode k = cc.trunc.modes[m];
        const double s = cc.scales.s[m];
        if (cc.basis.kind == BasisKind::SineDirichlet) {
            out.push_back(s * full_cot[static_cast<std::size_t>(k.k1 - 1) * g + (k.k2 - 1)].real());
        } else if (mode_is_self_conjugate(cc.basis.kind, k)) {
            out.push_back(s * full_cot[0].real());
        } else {
            const cplx a = full_cot[static_cast<std::size_t>(index_of_freq(k.k1, g)) * g + index_of_freq(k.k2, g)];
            const cplx b =
                full_cot[static_cast<std::size_t>(index_of_freq(-k.k1, g)) * g + index_of_freq(-k.k2, g)];
            out.push_back(s * (a.real() + b.real()));
            out.push_back(s * (a.imag() - b.imag()));
        }
    }
}

}  // namespace

std::vector<std::vector<cplx>> latent_to_coeff_stacks(const SpectralLatent& latent, const Codec& codec) {
    if (latent.codec_fingerprint != codec.fingerprint())
        throw ConfigError("latent fingerprint does not match codec");
    if (static_cast<int>(latent.x.size()) != codec.latent_dim())
        throw ConfigError("latent dimension does not match codec");
    std::vector<std::vector<cplx>> stacks;
    stacks.reserve(static_cast<std::size_t>(codec.time_steps) * codec.channels.size());
    std::size_t pos = 0;
    for (int t = 0; t < codec.time_steps; ++t)
        for (const auto& cc : codec.channels) stacks.push_back(scatter_slice_coeffs(latent.x, pos, cc));
    return stacks;
}

std::vector<double> coeff_stacks_adjoint(const std::vector<std::vector<cplx>>& cotangents, const Codec& codec) {
    if (cotangents.size() != static_cast<std::size_t>(codec.time_steps) * codec.channels.size())
        throw ConfigError("coeff_stacks_adjoint: slice count mismatch");
    std::vector<double> grad;
    grad.reserve(codec.latent_dim());
    std::size_t idx = 0;
    for (int t = 0; t < codec.time_steps; ++t)
        for (const auto& cc : codec.channels) gather_slice_adjoint(cotangents[idx++], cc, grad);
    return grad;
}

FieldGrid decode(const SpectralLatent& latent, const Codec& codec) {
    if (latent.codec_fingerprint != codec.fingerprint())
        throw ConfigError("latent fingerprint does not match codec");
    if (static_cast<int>(latent.x.size()) != codec.latent_dim())
        throw ConfigError("latent dimension does not match codec");
    const int interior = codec.channels.front().interior_size();
    Domain domain = codec.channels.front().basis.kind == BasisKind::FourierPeriodic
                        ? Domain::Torus
                        : Domain::UnitSquareDirichlet;
    FieldGrid field(codec.time_steps, static_cast<int>(codec.channels.size()), interior, interior, domain);
    std::size_t pos = 0;
    for (int t = 0; t < codec.time_steps; ++t)
        for (int c = 0; c < static_cast<int>(codec.channels.size()); ++c) {
            const ChannelCodec& cc = codec.channels[c];
            const int g = cc.basis.grid_size;
            std::vector<cplx> full = scatter_slice_coeffs(latent.x, pos, cc);
            std::span<double> dst = field.slice(t, c);
            if (cc.basis.kind == BasisKind::SineDirichlet) {
                std::vector<double> coefs(full.size());
                for (std::size_t i = 0; i < full.size(); ++i) coefs[i] = full[i].real();
                std::vector<double> grid(full.size());
                SineTransform2 tr(g);
                tr.synthesize(coefs, grid);
                if (cc.padding_layers > 0) {
                    std::vector<double> inner =
                        restrict_interior(grid, cc.interior_size(), cc.interior_size(), cc.padding_layers);
                    std::copy(inner.begin(), inner.end(), dst.begin());
                } else {
                    std::copy(grid.begin(), grid.end(), dst.begin());
                }
            } else {
                FourierTransform2 tr(g);
                tr.synthesize_real(full, dst);
            }
        }
    return field;
}

std::vector<double> decode_adjoint(const FieldGrid& cotangent, const Codec& codec) {
    require_field_matches_codec(cotangent, codec);
    std::vector<double> grad;
    grad.reserve(codec.latent_dim());
    for (int t = 0; t < codec.time_steps; ++t)
        for (int c = 0; c < static_cast<int>(codec.channels.size()); ++c) {
            const ChannelCodec& cc = codec.channels[c];
            const int g = cc.basis.grid_size;
            std::span<const double> cot = cotangent.slice(t, c);
            std::vector<cplx> full_cot(static_cast<std::size_t>(g) * g);
            if (cc.basis.kind == BasisKind::SineDirichlet) {
                std::vector<double> grid_cot(static_cast<std::size_t>(g) * g, 0.0);
                if (cc.padding_layers > 0) {
                    // adjoint of interior restriction: zero-pad the rings
                    const int h = cc.interior_size();
                    for (int i = 0; i < h; ++i)
                        for (int j = 0; j < h; ++j)
                            grid_cot[static_cast<std::size_t>(i + cc.padding_layers) * g + j + cc.padding_layers] =
                                cot[static_cast<std::size_t>(i) * h + j];
                } else {
                    std::copy(cot.begin(), cot.end(), grid_cot.begin());
                }
                std::vector<double> coeff_cot(grid_cot.size());
                SineTransform2 tr(g);
                tr.adjoint_synthesize(grid_cot, coeff_cot);
                for (std::size_t i = 0; i < coeff_cot.size(); ++i) full_cot[i] = cplx(coeff_cot[i], 0.0);
            } else {
                // adjoint of taking the real part embeds the cotangent with zero imag
                std::vector<cplx> grid_cot(static_cast<std::size_t>(g) * g);
                for (std::size_t i = 0; i < grid_cot.size(); ++i) grid_cot[i] = cplx(cot[i], 0.0);
                FourierTransform2 tr(g);
                tr.adjoint_synthesize(grid_cot, full_cot);
            }
            gather_slice_adjoint(full_cot, cc, grad);
        }
    return grad;
}

ScaleVector fit_channel_scales(const std::vector<FieldGrid>& samples, const ChannelCodec& cc, int channel,
                               int time_steps, double eps_floor) {
    if (samples.size() < 2) throw ConfigError("fit_scales: need at least 2 samples");
    const std::size_t n_modes = cc.trunc.modes.size();
    std::vector<cplx> mean(n_modes, cplx(0.0, 0.0));
    std::vector<double> sq(n_modes, 0.0);
    double count = 0.0;
    for (const FieldGrid& f : samples)
        for (int t = 0; t < time_steps; ++t) {
            std::vector<cplx> raw = raw_mode_coeffs(f.slice(t, channel), cc);
            for (std::size_t m = 0; m < n_modes; ++m) {
                mean[m] += raw[m];
                sq[m] += std::norm(raw[m]);
            }
            count += 1.0;
        }
    ScaleVector sv;
    sv.eps_floor = eps_floor;
    sv.s.resize(n_modes);
    for (std::size_t m = 0; m < n_modes; ++m) {
        const cplx mu = mean[m] / count;
        const double var = std::max(sq[m] / count - std::norm(mu), 0.0);
        sv.s[m] = std::max(std::sqrt(var), eps_floor);
    }
    return sv;
}

void fit_scales(Codec& codec, const std::vector<FieldGrid>& training_samples) {
    if (training_samples.size() < 2) throw ConfigError("fit_scales: need at least 2 samples");
    require_field_matches_codec(training_samples.front(), codec);
    for (int c = 0; c < static_cast<int>(codec.channels.size()); ++c) {
        ChannelCodec& cc = codec.channels[c];
        cc.scales = fit_channel_scales(training_samples, cc, c, codec.time_steps, cc.scales.eps_floor);
    }
}

std::vector<uint8_t> Codec::serialize() const {
    ByteWriter w;
    w.magic("PISDCODC");
    w.u16(1);
    w.i32(static_cast<int32_t>(channels.size()));
    w.i32(time_steps);
    for (const auto& cc : channels) {
        w.i32(static_cast<int32_t>(cc.basis.kind));
        w.i32(cc.basis.spatial_dims);
        w.i32(cc.basis.grid_size);
        w.i32(cc.padding_layers);
        w.i32(static_cast<int32_t>(cc.trunc.kind));
        w.i32(cc.trunc.c);
        w.i32(cc.trunc.mode_count());
        for (const Mode& m : cc.trunc.modes) {
            w.i32(m.k1);
            w.i32(m.k2);
        }
        w.f64(cc.scales.eps_floor);
        w.i32(static_cast<int32_t>(cc.scales.s.size()));
        for (double s : cc.scales.s) w.f64(s);
    }
    return w.take();
}

Codec Codec::deserialize(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    r.expect_magic("PISDCODC");
    const uint16_t version = r.u16();
    if (version != 1) throw IoError("unsupported codec version");
    Codec codec;
    const int n_channels = r.i32();
    codec.time_steps = r.i32();
    if (n_channels < 1 || codec.time_steps < 1) throw IoError("corrupt codec header");
    for (int c = 0; c < n_channels; ++c) {
        ChannelCodec cc;
        cc.basis.kind = static_cast<BasisKind>(r.i32());
        cc.basis.spatial_dims = r.i32();
        cc.basis.grid_size = r.i32();
        cc.padding_layers = r.i32();
        cc.trunc.kind = static_cast<TruncationKind>(r.i32());
        cc.trunc.c = r.i32();
        const int n_modes = r.i32();
        cc.trunc.modes.resize(n_modes);
        for (int m = 0; m < n_modes; ++m) {
            cc.trunc.modes[m].k1 = r.i32();
            cc.trunc.modes[m].k2 = r.i32();
        }
        cc.scales.eps_floor = r.f64();
        const int n_scales = r.i32();
        cc.scales.s.resize(n_scales);
        for (int m = 0; m < n_scales; ++m) cc.scales.s[m] = r.f64();
        codec.channels.push_back(std::move(cc));
    }
    return codec;
}

uint64_t Codec::fingerprint() const { return fnv1a64(serialize()); }

void save_codec(const std::string& path, const Codec& codec) { write_file(path, codec.serialize()); }

Codec load_codec(const std::string& path) { return Codec::deserialize(read_file(path)); }

}  // namespace pisd
