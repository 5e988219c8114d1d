#include "pisd/spectral_ops.hpp"

#include <cmath>

namespace pisd {

void spectral_laplacian_sine(std::span<const double> coeffs, std::span<double> out, int h) {
    if (coeffs.size() != out.size() || static_cast<int>(coeffs.size()) != h * h)
        throw ConfigError("spectral_laplacian_sine: size mismatch");
    for (int k1 = 1; k1 <= h; ++k1)
        for (int k2 = 1; k2 <= h; ++k2) {
            const double factor = -M_PI * M_PI * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
            out[static_cast<std::size_t>(k1 - 1) * h + (k2 - 1)] =
                factor * coeffs[static_cast<std::size_t>(k1 - 1) * h + (k2 - 1)];
        }
}

void spectral_laplacian_fourier(std::span<const cplx> coeffs, std::span<cplx> out, int n) {
    if (coeffs.size() != out.size() || static_cast<int>(coeffs.size()) != n * n)
        throw ConfigError("spectral_laplacian_fourier: size mismatch");
    for (int a = 0; a < n; ++a) {
        const int k1 = freq_of_index(a, n);
        for (int b = 0; b < n; ++b) {
            const int k2 = freq_of_index(b, n);
            const double factor =
                -4.0 * M_PI * M_PI * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
            out[static_cast<std::size_t>(a) * n + b] = factor * coeffs[static_cast<std::size_t>(a) * n + b];
        }
    }
}

void biot_savart(std::span<const cplx> w, std::span<cplx> v1, std::span<cplx> v2, int n) {
    if (w.size() != v1.size() || w.size() != v2.size() || static_cast<int>(w.size()) != n * n)
        throw ConfigError("biot_savart: size mismatch");
    const cplx iu(0.0, 1.0);
    for (int a = 0; a < n; ++a) {
        const int k1 = freq_of_index(a, n);
        for (int b = 0; b < n; ++b) {
            const int k2 = freq_of_index(b, n);
            const std::size_t idx = static_cast<std::size_t>(a) * n + b;
            if (k1 == 0 && k2 == 0) {
                v1[idx] = cplx(0.0, 0.0);
                v2[idx] = cplx(0.0, 0.0);
                continue;
            }
            const double k_sq = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
            v1[idx] = iu * (k2 / k_sq) * w[idx];
            v2[idx] = -iu * (k1 / k_sq) * w[idx];
        }
    }
}

Lemma1Result lemma1_check(const ScaleVector& scales, const std::vector<std::vector<cplx>>& sample_coeffs,
                          const std::vector<Mode>& modes, int sobolev_order) {
    if (sample_coeffs.empty()) throw ConfigError("lemma1_check: empty sample set");
    Lemma1Result res;
    const std::size_t n_modes = modes.size();
    for (std::size_t m = 0; m < n_modes; ++m) {
        // ||k||^{2m} with the 0^0 = 1 convention for the mean mode at order 0
        const double weight = sobolev_order == 0 ? 1.0 : std::pow(mode_norm_sq(modes[m]), sobolev_order);
        double second_moment = 0.0;
        for (const auto& coeffs : sample_coeffs) second_moment += std::norm(coeffs[m]);
        second_moment /= static_cast<double>(sample_coeffs.size());
        res.lhs += scales.s[m] * scales.s[m] * weight;
        res.rhs += second_moment * weight;
    }
    res.holds = res.lhs <= res.rhs + 1e-9;
    return res;
}

Lemma1Result lemma1_check(const Codec& codec, int channel, const std::vector<FieldGrid>& dataset,
                          int sobolev_order) {
    const ChannelCodec& cc = codec.channels.at(channel);
    std::vector<std::vector<cplx>> sample_coeffs;
    sample_coeffs.reserve(dataset.size() * codec.time_steps);
    for (const FieldGrid& f : dataset)
        for (int t = 0; t < codec.time_steps; ++t) sample_coeffs.push_back(raw_mode_coeffs(f.slice(t, channel), cc));
    return lemma1_check(cc.scales, sample_coeffs, cc.trunc.modes, sobolev_order);
}

}  // namespace pisd
