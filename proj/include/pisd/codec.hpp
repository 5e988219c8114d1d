// The spectral codec: truncation, data-driven per-mode scaling, boundary
// padding, encode/decode between field stacks and flat latents, and the
// serialized form whose FNV-1a hash fingerprints a fitted codec.
//
// Latent layout (frozen): slots ordered lexicographically over
// (time, channel, k1, k2, re/im); complex Fourier pairs store (re, im), the
// self-conjugate (0,0) mode and all sine modes store one real slot.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "pisd/basis.hpp"
#include "pisd/grid.hpp"
#include "pisd/transforms.hpp"

namespace pisd {

struct ScaleVector {
    std::vector<double> s;  // one entry per retained mode, pooled re/im for complex modes
    double eps_floor = 1e-8;
};

struct ChannelCodec {
    BasisDescriptor basis;  // grid_size is the transform grid (interior + 2*padding)
    int padding_layers = 0;
    TruncationSet trunc;
    ScaleVector scales;

    int interior_size() const { return basis.grid_size - 2 * padding_layers; }
    int slots_per_slice() const;
};

struct Codec {
    std::vector<ChannelCodec> channels;
    int time_steps = 1;

    int latent_dim() const;

    struct SlotInfo {
        int time;
        int channel;
        Mode k;
        bool imag_part;
    };
    std::vector<SlotInfo> slot_map() const;

    std::vector<uint8_t> serialize() const;
    static Codec deserialize(const std::vector<uint8_t>& bytes);
    uint64_t fingerprint() const;
};

struct SpectralLatent {
    std::vector<double> x;
    uint64_t codec_fingerprint = 0;
};

// Linear boundary ramp: each added ring carries (layers-j)/layers times the
// replicated nearest boundary value, ring `layers` being exactly zero.
std::vector<double> extend_to_zero_boundary(std::span<const double> field, int h, int w, int layers);
std::vector<double> restrict_interior(std::span<const double> ext, int h, int w, int layers);

// Untruncated transform of one channel slice (padding applied for sine
// channels that carry it); sine coefficients come back with zero imag part.
std::vector<cplx> full_coeffs_of_slice(std::span<const double> slice, const ChannelCodec& cc);
// Retained-mode coefficients in trunc.modes order, unscaled.
std::vector<cplx> raw_mode_coeffs(std::span<const double> slice, const ChannelCodec& cc);

SpectralLatent encode(const FieldGrid& field, const Codec& codec);
FieldGrid decode(const SpectralLatent& latent, const Codec& codec);
// Adjoint of decode as a map latent -> field stack; cotangent has field geometry.
std::vector<double> decode_adjoint(const FieldGrid& cotangent, const Codec& codec);

// Scaled full coefficient arrays, one per (time, channel) slice in latent
// order; sine coefficients carry zero imag part. This is decode stopped before
// grid synthesis, used by residual evaluation in coefficient space.
std::vector<std::vector<cplx>> latent_to_coeff_stacks(const SpectralLatent& latent, const Codec& codec);
// Adjoint of latent_to_coeff_stacks: cotangents on the full arrays (real-pair
// convention) pulled back to a latent-sized gradient.
std::vector<double> coeff_stacks_adjoint(const std::vector<std::vector<cplx>>& cotangents, const Codec& codec);

// Population standard deviation per retained mode over samples x time slices,
// complex re/im pooled, clamped below by eps_floor. Requires >= 2 samples.
ScaleVector fit_channel_scales(const std::vector<FieldGrid>& samples, const ChannelCodec& cc, int channel,
                               int time_steps, double eps_floor);
void fit_scales(Codec& codec, const std::vector<FieldGrid>& training_samples);

void require_field_matches_codec(const FieldGrid& field, const Codec& codec);

void save_codec(const std::string& path, const Codec& codec);
Codec load_codec(const std::string& path);

}  // namespace pisd
