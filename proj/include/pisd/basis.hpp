// Spectral bases and truncation sets.
//
// SineDirichlet: phi_k(x) = sin(pi k1 x1) sin(pi k2 x2), k_i >= 1, on the unit
// square with zero boundary; an HxH interior grid resolves k_i in [1, H].
// FourierPeriodic: phi_n(x) = exp(2 pi i <n, x>) on the torus; an NxN grid
// (N a power of two) resolves n_i in [-N/2, N/2-1]. Real fields are stored via
// the Hermitian-reduced half-spectrum, one canonical representative per +-k
// pair; the representative is (k1 > 0) or (k1 == 0 and k2 >= 0).
#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

#include "pisd/errors.hpp"

namespace pisd {

enum class BasisKind : int32_t { SineDirichlet = 0, FourierPeriodic = 1 };

struct BasisDescriptor {
    BasisKind kind = BasisKind::SineDirichlet;
    int spatial_dims = 2;
    int grid_size = 0;  // transform grid points per axis
};

struct Mode {
    int k1 = 0;
    int k2 = 0;
    bool operator==(const Mode&) const = default;
};

inline double mode_norm_sq(Mode k) {
    return static_cast<double>(k.k1) * k.k1 + static_cast<double>(k.k2) * k.k2;
}
inline int mode_norm_inf(Mode k) { return std::max(std::abs(k.k1), std::abs(k.k2)); }

enum class TruncationKind : int32_t { Cube = 0, Hyperbolic = 1 };

// Retained-mode list in frozen lexicographic (k1, k2) order. For Fourier bases
// the list holds canonical Hermitian representatives only; every retained mode
// other than (0,0) stands for the +-k conjugate pair and occupies two real
// latent slots (re, im), while (0,0) and sine modes occupy one.
struct TruncationSet {
    TruncationKind kind = TruncationKind::Cube;
    int c = 0;
    std::vector<Mode> modes;

    int mode_count() const { return static_cast<int>(modes.size()); }

    static TruncationSet make(TruncationKind kind, int c, const BasisDescriptor& basis);
};

inline bool fourier_mode_is_canonical(Mode k) { return k.k1 > 0 || (k.k1 == 0 && k.k2 >= 0); }
inline bool mode_is_self_conjugate(BasisKind kind, Mode k) {
    return kind == BasisKind::FourierPeriodic && k.k1 == 0 && k.k2 == 0;
}
inline int mode_real_components(BasisKind kind, Mode k) {
    if (kind == BasisKind::SineDirichlet) return 1;
    return mode_is_self_conjugate(kind, k) ? 1 : 2;
}

}  // namespace pisd
