#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "oamfso/common.hpp"

namespace oamfso {

// Uniform square sampling grid shared by fields, screens and spectra.
// The beam axis sits at sample (n/2, n/2) so that spatial coordinates and
// the FFT frequency layout use the same origin without half-pixel tilts.
struct SimulationGrid {
    int n = 0;               // samples per side, power of two
    double dx = 0.0;         // grid spacing [m]
    double wavelength = 0.0; // optical carrier [m]

    SimulationGrid(int n_samples, double spacing, double lambda)
        : n(n_samples), dx(spacing), wavelength(lambda) {
        if (n <= 0 || !std::has_single_bit(static_cast<unsigned>(n)))
            throw std::invalid_argument("grid size must be a positive power of two");
        if (dx <= 0.0) throw std::invalid_argument("grid spacing must be positive");
        if (wavelength <= 0.0) throw std::invalid_argument("wavelength must be positive");
    }

    double side() const { return n * dx; }
    double wavenumber() const { return 2.0 * kPi / wavelength; }
    double freq_spacing() const { return 2.0 * kPi / (n * dx); }

    // Centered spatial coordinate of sample index i.
    double coord(int i) const { return (i - n / 2) * dx; }

    // Angular spatial frequency of FFT bin i (standard wrap-around order).
    double kappa(int i) const {
        const int f = i < n / 2 ? i : i - n;
        return f * freq_spacing();
    }

    bool operator==(const SimulationGrid&) const = default;
};

// Sampled complex optical field on a SimulationGrid, row-major in x.
class ComplexField {
public:
    explicit ComplexField(const SimulationGrid& grid)
        : grid_(grid), samples_(static_cast<std::size_t>(grid.n) * grid.n) {}

    const SimulationGrid& grid() const { return grid_; }
    int n() const { return grid_.n; }

    cd& at(int ix, int iy) { return samples_[static_cast<std::size_t>(ix) * grid_.n + iy]; }
    const cd& at(int ix, int iy) const {
        return samples_[static_cast<std::size_t>(ix) * grid_.n + iy];
    }

    std::span<cd> samples() { return samples_; }
    std::span<const cd> samples() const { return samples_; }
    cd* data() { return samples_.data(); }
    const cd* data() const { return samples_.data(); }

private:
    SimulationGrid grid_;
    std::vector<cd> samples_;
};

// Discrete scalar product  sum a conj(b) dx^2.
inline cd overlap(const ComplexField& a, const ComplexField& b) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("overlap requires fields on the same grid");
    cd acc{0.0, 0.0};
    const auto sa = a.samples();
    const auto sb = b.samples();
    for (std::size_t i = 0; i < sa.size(); ++i) acc += sa[i] * std::conj(sb[i]);
    return acc * (a.grid().dx * a.grid().dx);
}

inline double power(const ComplexField& a) {
    double acc = 0.0;
    for (const cd& v : a.samples()) acc += std::norm(v);
    return acc * (a.grid().dx * a.grid().dx);
}

inline ComplexField& normalize_in_place(ComplexField& a) {
    const double p = power(a);
    if (p <= 0.0) throw std::domain_error("cannot normalize a zero field");
    const double s = 1.0 / std::sqrt(p);
    for (cd& v : a.samples()) v *= s;
    return a;
}

inline ComplexField normalize(ComplexField a) {
    normalize_in_place(a);
    return a;
}

// Fraction of total power inside the outer border band of relative width
// `band` (0.05 = outermost 5% of samples on each edge).
inline double border_power_fraction(const ComplexField& a, double band = 0.05) {
    const int n = a.n();
    const int margin = std::max(1, static_cast<int>(std::ceil(band * n)));
    double border = 0.0, total = 0.0;
    for (int ix = 0; ix < n; ++ix) {
        const bool edge_x = ix < margin || ix >= n - margin;
        for (int iy = 0; iy < n; ++iy) {
            const double p = std::norm(a.at(ix, iy));
            total += p;
            if (edge_x || iy < margin || iy >= n - margin) border += p;
        }
    }
    return total > 0.0 ? border / total : 0.0;
}

} // namespace oamfso
