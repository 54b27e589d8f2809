// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

namespace nsf {

// Periodic grid on the torus [-1,1]^dim, N samples per axis at
// x_j = -1 + 2 j / N (midpoints of a shifted uniform partition).
struct Grid {
    int dim = 1;
    int n = 8;  // points per axis, even

    Grid() = default;
    Grid(int dim_, int n_) : dim(dim_), n(n_) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("Grid: dim must be 1, 2 or 3");
        if (n < 8 || n % 2 != 0) throw std::invalid_argument("Grid: n must be even and >= 8");
    }

    std::size_t total_points() const {
        std::size_t p = 1;
        for (int d = 0; d < dim; ++d) p *= static_cast<std::size_t>(n);
        return p;
    }

    double spacing() const { return 2.0 / n; }

    // quadrature weight of one sample (midpoint rule)
    double cell_volume() const { return std::pow(2.0 / n, dim); }

    double volume() const { return std::pow(2.0, dim); }

    double coordinate(int index_along_axis) const { return -1.0 + 2.0 * index_along_axis / n; }

    // signed integer wavenumber for FFT bin k along one axis, in [-n/2, n/2)
    int wavenumber(int k) const { return k < n / 2 ? k : k - n; }

    int nyquist() const { return n / 2; }

    // flat index <-> per-axis indices, row major (axis 0 slowest)
    std::size_t flatten(const std::array<int, 3>& idx) const {
        std::size_t f = 0;
        for (int d = 0; d < dim; ++d) f = f * n + static_cast<std::size_t>(idx[d]);
        return f;
    }

    std::array<int, 3> unflatten(std::size_t flat) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int d = dim - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(flat % n);
            flat /= n;
        }
        return idx;
    }

    bool operator==(const Grid& other) const { return dim == other.dim && n == other.n; }
    bool operator!=(const Grid& other) const { return !(*this == other); }
};

}  // namespace nsf
