// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "nsf/errors.hpp"
#include "nsf/fft.hpp"
#include "nsf/grid.hpp"

namespace nsf {

using fft::cplx;

// Scalar sample field on the torus with a lazily computed spectral mirror.
// Fields are immutable after construction; sample data and the spectral
// cache are shared between copies.
//
// Spectral convention: coefficients of the L2-orthonormal basis
// e_m(x) = 2^{-dim/2} exp(i pi m.x), so that
//   coef(m) = 2^{-dim/2} (2/N)^dim sum_j f_j exp(-i pi m.x_j),
// stored on the FFT bin layout of Grid::wavenumber. Discrete Parseval
// holds exactly: sum_m |coef|^2 = quadrature L2 norm squared.
class ScalarField {
  public:
    ScalarField() = default;

    ScalarField(Grid grid, std::vector<double> values)
        : grid_(grid),
          vals_(std::make_shared<const std::vector<double>>(std::move(values))),
          cache_(std::make_shared<Cache>()) {
        if (vals_->size() != grid_.total_points())
            throw std::invalid_argument("ScalarField: value count does not match grid");
    }

    static ScalarField constant(Grid grid, double c) {
        return ScalarField(grid, std::vector<double>(grid.total_points(), c));
    }

    static ScalarField sample(Grid grid, const std::function<double(const std::array<double, 3>&)>& f) {
        std::vector<double> v(grid.total_points());
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto idx = grid.unflatten(i);
            std::array<double, 3> x{0.0, 0.0, 0.0};
            for (int d = 0; d < grid.dim; ++d) x[d] = grid.coordinate(idx[d]);
            v[i] = f(x);
        }
        return ScalarField(grid, std::move(v));
    }

    static ScalarField from_spectrum(Grid grid, const std::vector<cplx>& spec);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return *vals_; }
    double operator[](std::size_t i) const { return (*vals_)[i]; }
    std::size_t size() const { return vals_->size(); }

    bool finite() const {
        for (double v : *vals_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double min() const { return *std::min_element(vals_->begin(), vals_->end()); }
    double max() const { return *std::max_element(vals_->begin(), vals_->end()); }

    double sup_norm() const {
        double m = 0.0;
        for (double v : *vals_) m = std::max(m, std::abs(v));
        return m;
    }

    // Fourier coefficients in the orthonormal basis (forward transform).
    const std::vector<cplx>& spectrum() const {
        std::call_once(cache_->once, [this] {
            if (!finite()) throw NonFiniteField("transform: non-finite sample values");
            cache_->spec = forward(grid_, *vals_);
        });
        return cache_->spec;
    }

  private:
    struct Cache {
        std::once_flag once;
        std::vector<cplx> spec;
    };

    static std::vector<cplx> forward(const Grid& grid, const std::vector<double>& vals);

    Grid grid_;
    std::shared_ptr<const std::vector<double>> vals_;
    std::shared_ptr<Cache> cache_;
};

namespace detail {

// (-1)^(sum of signed wavenumbers) relating the DFT on index space to the
// basis exp(i pi m.x) on [-1,1]^dim
inline double mode_phase(const Grid& grid, std::size_t flat) {
    auto idx = grid.unflatten(flat);
    long s = 0;
    for (int d = 0; d < grid.dim; ++d) s += grid.wavenumber(idx[d]);
    return (s % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace detail

inline std::vector<cplx> ScalarField::forward(const Grid& grid, const std::vector<double>& vals) {
    std::vector<cplx> in(vals.begin(), vals.end());
    std::vector<cplx> out = fft::dft(grid, in);
    const double scale = std::pow(2.0, -0.5 * grid.dim) * grid.cell_volume();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale * detail::mode_phase(grid, i);
    return out;
}

inline ScalarField ScalarField::from_spectrum(Grid grid, const std::vector<cplx>& spec) {
    if (spec.size() != grid.total_points())
        throw std::invalid_argument("from_spectrum: coefficient count does not match grid");
    std::vector<cplx> in(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) in[i] = spec[i] * detail::mode_phase(grid, i);
    std::vector<cplx> out = fft::idft(grid, in);
    const double scale = std::pow(2.0, -0.5 * grid.dim);
    std::vector<double> vals(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) vals[i] = scale * out[i].real();
    return ScalarField(grid, std::move(vals));
}

// ---- pointwise algebra ----

namespace detail {

template <class Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op) {
    if (a.grid() != b.grid()) throw GridMismatch("field binary op: grids differ");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
    return ScalarField(a.grid(), std::move(v));
}

template <class Op>
ScalarField map(const ScalarField& a, Op op) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i]);
    return ScalarField(a.grid(), std::move(v));
}

}  // namespace detail

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return detail::zip(a, b, std::plus<double>());
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return detail::zip(a, b, std::minus<double>());
}
inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return detail::zip(a, b, std::multiplies<double>());
}
inline ScalarField operator/(const ScalarField& a, const ScalarField& b) {
    return detail::zip(a, b, std::divides<double>());
}
inline ScalarField operator*(double c, const ScalarField& a) {
    return detail::map(a, [c](double v) { return c * v; });
}
inline ScalarField operator+(const ScalarField& a, double c) {
    return detail::map(a, [c](double v) { return v + c; });
}

// ---- spectral operators ----

// Partial derivative of given order along one axis. Spectral
// multiplication by (i pi m)^order; the Nyquist mode is zeroed for odd
// orders (it has no well-defined sign on the real grid).
inline ScalarField derivative(const ScalarField& f, int axis, int order) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim) throw std::invalid_argument("derivative: axis out of range");
    if (order < 1 || order > 2) throw std::invalid_argument("derivative: order must be 1 or 2");
    const auto& spec = f.spectrum();
    std::vector<cplx> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        auto idx = g.unflatten(i);
        int m = g.wavenumber(idx[axis]);
        if (order % 2 == 1 && idx[axis] == g.nyquist()) {
            out[i] = 0.0;
            continue;
        }
        cplx factor = (order == 1) ? cplx(0.0, M_PI * m) : cplx(-M_PI * M_PI * m * m, 0.0);
        out[i] = factor * spec[i];
    }
    return ScalarField::from_spectrum(g, out);
}

inline ScalarField laplacian(const ScalarField& f) {
    const Grid& g = f.grid();
    const auto& spec = f.spectrum();
    std::vector<cplx> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        auto idx = g.unflatten(i);
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            double m = g.wavenumber(idx[d]);
            k2 += m * m;
        }
        out[i] = -M_PI * M_PI * k2 * spec[i];
    }
    return ScalarField::from_spectrum(g, out);
}

// 2/3-rule mask: zero every mode with |m| > N/3 on any axis.
inline ScalarField dealias(const ScalarField& f) {
    const Grid& g = f.grid();
    const int cutoff = g.n / 3;
    const auto& spec = f.spectrum();
    std::vector<cplx> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        auto idx = g.unflatten(i);
        bool keep = true;
        for (int d = 0; d < g.dim; ++d)
            if (std::abs(g.wavenumber(idx[d])) > cutoff) keep = false;
        out[i] = keep ? spec[i] : cplx(0.0);
    }
    return ScalarField::from_spectrum(g, out);
}

// ---- vector fields and states ----

class VectorField {
  public:
    VectorField() = default;

    explicit VectorField(std::vector<ScalarField> components) : comps_(std::move(components)) {
        for (const auto& c : comps_)
            if (c.grid() != comps_.front().grid())
                throw GridMismatch("VectorField: components on different grids");
    }

    static VectorField zero(Grid grid) {
        std::vector<ScalarField> c;
        for (int d = 0; d < grid.dim; ++d) c.push_back(ScalarField::constant(grid, 0.0));
        return VectorField(std::move(c));
    }

    const Grid& grid() const { return comps_.front().grid(); }
    int dim() const { return static_cast<int>(comps_.size()); }
    const ScalarField& operator[](int d) const { return comps_[d]; }

    bool finite() const {
        for (const auto& c : comps_)
            if (!c.finite()) return false;
        return true;
    }

    // pointwise Euclidean magnitude maximum
    double sup_magnitude() const {
        std::size_t npts = comps_.front().size();
        double m = 0.0;
        for (std::size_t i = 0; i < npts; ++i) {
            double s = 0.0;
            for (const auto& c : comps_) s += c[i] * c[i];
            m = std::max(m, s);
        }
        return std::sqrt(m);
    }

  private:
    std::vector<ScalarField> comps_;
};

inline ScalarField divergence(const VectorField& v) {
    ScalarField d = derivative(v[0], 0, 1);
    for (int a = 1; a < v.dim(); ++a) d = d + derivative(v[a], a, 1);
    return d;
}

// State U = (rho, theta, u) on a shared grid.
struct State {
    ScalarField rho;
    ScalarField theta;
    VectorField u;

    const Grid& grid() const { return rho.grid(); }

    bool finite() const { return rho.finite() && theta.finite() && u.finite(); }

    // strict positivity of density and temperature on the grid
    bool in_x_plus() const { return finite() && rho.min() > 0.0 && theta.min() > 0.0; }

    static State constant(Grid grid, double rho0, double theta0) {
        return State{ScalarField::constant(grid, rho0), ScalarField::constant(grid, theta0),
                     VectorField::zero(grid)};
    }
};

inline void require_same_grid(const State& a, const State& b) {
    if (a.grid() != b.grid()) throw GridMismatch("states on different grids");
}

// Tangent vector to the state space (time derivative of each field).
struct Tangent {
    ScalarField drho;
    ScalarField dtheta;
    std::vector<ScalarField> du;
};

inline State axpy(const State& s, double dt, const Tangent& t) {
    std::vector<ScalarField> u;
    for (int d = 0; d < s.grid().dim; ++d) u.push_back(s.u[d] + dt * t.du[d]);
    return State{s.rho + dt * t.drho, s.theta + dt * t.dtheta, VectorField(std::move(u))};
}

}  // namespace nsf
