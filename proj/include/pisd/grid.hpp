// Real-valued fields sampled on uniform 2D grids, with time and channel axes.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pisd/errors.hpp"

namespace pisd {

enum class Domain : int32_t { UnitSquareDirichlet = 0, Torus = 1 };

// data layout: [time][channel][row i][col j], C-order. Row index i follows x1,
// column index j follows x2. Dirichlet grids hold interior points x = (i+1)h
// with h = 1/(H+1); torus grids hold x = i/N.
struct FieldGrid {
    int time_steps = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    Domain domain = Domain::UnitSquareDirichlet;
    std::vector<double> data;

    FieldGrid() = default;
    FieldGrid(int t, int c, int h, int w, Domain d)
        : time_steps(t), channels(c), height(h), width(w), domain(d),
          data(static_cast<std::size_t>(t) * c * h * w, 0.0) {}

    std::size_t slice_size() const { return static_cast<std::size_t>(height) * width; }
    std::size_t size() const { return data.size(); }

    double& at(int t, int c, int i, int j) {
        return data[((static_cast<std::size_t>(t) * channels + c) * height + i) * width + j];
    }
    double at(int t, int c, int i, int j) const {
        return data[((static_cast<std::size_t>(t) * channels + c) * height + i) * width + j];
    }

    std::span<double> slice(int t, int c) {
        return {data.data() + (static_cast<std::size_t>(t) * channels + c) * slice_size(), slice_size()};
    }
    std::span<const double> slice(int t, int c) const {
        return {data.data() + (static_cast<std::size_t>(t) * channels + c) * slice_size(), slice_size()};
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void require_same_geometry(const FieldGrid& a, const FieldGrid& b, const char* what) {
    if (a.time_steps != b.time_steps || a.channels != b.channels || a.height != b.height ||
        a.width != b.width)
        throw ConfigError(std::string(what) + ": field geometry mismatch");
}

}  // namespace pisd
