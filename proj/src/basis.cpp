#include "pisd/basis.hpp"

#include <algorithm>

namespace pisd {

namespace {

bool hyperbolic_keep_fourier(Mode k, int c) {
    long p = static_cast<long>(std::max(std::abs(k.k1), 1)) * std::max(std::abs(k.k2), 1);
    return p <= c;
}

}  // namespace

TruncationSet TruncationSet::make(TruncationKind kind, int c, const BasisDescriptor& basis) {
    if (c < 1) throw ConfigError("truncation constant must be >= 1");
    TruncationSet t;
    t.kind = kind;
    t.c = c;
    if (basis.kind == BasisKind::SineDirichlet) {
        const int kmax = std::min(c, basis.grid_size);
        for (int k1 = 1; k1 <= kmax; ++k1)
            for (int k2 = 1; k2 <= kmax; ++k2) {
                bool keep = kind == TruncationKind::Cube ? true
                                                         : static_cast<long>(k1) * k2 <= c;
                if (keep) t.modes.push_back({k1, k2});
            }
    } else {
        // Nyquist row/column excluded so every retained mode has its conjugate.
        const int band = basis.grid_size / 2 - 1;
        const int kmax = std::min(c, band);
        if (kmax < 0) throw ConfigError("fourier grid too small for truncation");
        for (int k1 = 0; k1 <= kmax; ++k1)
            for (int k2 = -kmax; k2 <= kmax; ++k2) {
                Mode m{k1, k2};
                if (!fourier_mode_is_canonical(m)) continue;
                bool keep = kind == TruncationKind::Cube ? true : hyperbolic_keep_fourier(m, c);
                if (keep) t.modes.push_back(m);
            }
        std::sort(t.modes.begin(), t.modes.end(), [](Mode a, Mode b) {
            return a.k1 != b.k1 ? a.k1 < b.k1 : a.k2 < b.k2;
        });
    }
    if (t.modes.empty()) throw ConfigError("empty truncation set");
    return t;
}

}  // namespace pisd
