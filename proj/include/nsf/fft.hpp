// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "nsf/grid.hpp"

namespace nsf::fft {

using cplx = std::complex<double>;

namespace detail {

// FFTW planner is not thread safe; plans are created once per (dim, n,
// sign) under a global lock and then executed concurrently on per-call
// buffers via the new-array interface.
class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(const Grid& grid, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(grid.dim, grid.n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t total = grid.total_points();
        fftw_complex* in = fftw_alloc_complex(total);
        fftw_complex* out = fftw_alloc_complex(total);
        int dims[3] = {grid.n, grid.n, grid.n};
        fftw_plan plan = fftw_plan_dft(grid.dim, dims, in, out, sign, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, plan);
        return plan;
    }

  private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

struct FftwBuffer {
    explicit FftwBuffer(std::size_t count)
        : data(fftw_alloc_complex(count)) {}
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

inline void execute(const Grid& grid, int sign, const std::vector<cplx>& in,
                    std::vector<cplx>& out) {
    std::size_t total = grid.total_points();
    FftwBuffer bin(total), bout(total);
    for (std::size_t i = 0; i < total; ++i) {
        bin.data[i][0] = in[i].real();
        bin.data[i][1] = in[i].imag();
    }
    fftw_plan plan = PlanCache::instance().get(grid, sign);
    fftw_execute_dft(plan, bin.data, bout.data);
    out.resize(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = cplx(bout.data[i][0], bout.data[i][1]);
}

}  // namespace detail

// Unnormalized multidimensional DFT, sign convention exp(-2 pi i m.j / n).
inline std::vector<cplx> dft(const Grid& grid, const std::vector<cplx>& in) {
    std::vector<cplx> out;
    detail::execute(grid, FFTW_FORWARD, in, out);
    return out;
}

inline std::vector<cplx> idft(const Grid& grid, const std::vector<cplx>& in) {
    std::vector<cplx> out;
    detail::execute(grid, FFTW_BACKWARD, in, out);
    return out;
}

}  // namespace nsf::fft
