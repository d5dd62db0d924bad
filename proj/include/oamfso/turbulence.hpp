#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oamfso/common.hpp"
#include "oamfso/fft.hpp"
#include "oamfso/grid.hpp"
#include "oamfso/rng.hpp"

namespace oamfso {

struct TurbulenceParams {
    double cn2 = 1e-14;          // refractive-index structure parameter [m^-2/3]
    double l0 = 5e-3;            // inner scale [m]
    double outer_scale = 20.0;   // outer scale L0 [m]
    int screen_count = 20;
    double screen_spacing = 50.0; // [m]

    void validate() const {
        if (cn2 <= 0.0) throw std::invalid_argument("cn2 must be positive");
        if (l0 <= 0.0 || l0 >= outer_scale)
            throw std::invalid_argument("need 0 < inner scale < outer scale");
        if (screen_count < 1) throw std::invalid_argument("screen_count must be >= 1");
        if (screen_spacing <= 0.0) throw std::invalid_argument("screen_spacing must be positive");
    }

    double kappa_l() const { return 3.3 / l0; }
    double path_length() const { return screen_count * screen_spacing; }
};

// Modified Kolmogorov refractive-index spectrum with inner-scale bump and
// outer-scale regularization; clamped at zero where the bump polynomial
// would turn negative.
inline double kolmogorov_spectrum(double kappa, const TurbulenceParams& params) {
    if (kappa < 0.0) throw std::invalid_argument("spatial frequency must be >= 0");
    const double q = kappa / params.kappa_l();
    const double bump = 1.0 + 1.802 * q - 0.254 * std::pow(q, 7.0 / 6.0);
    const double value = 0.033 * params.cn2 * std::exp(-q * q) /
                         std::pow(kappa * kappa + 1.0 / params.outer_scale, 11.0 / 6.0) * bump;
    return value > 0.0 ? value : 0.0;
}

// Rytov variance 1.23 Cn^2 k^{7/6} z^{11/6}; < 1 marks the weak and > 1 the
// strong scintillation regime.
inline double rytov_variance(double cn2, double wavelength, double z) {
    if (cn2 <= 0.0 || wavelength <= 0.0 || z <= 0.0)
        throw std::invalid_argument("rytov_variance needs positive arguments");
    const double k = 2.0 * kPi / wavelength;
    return 1.23 * cn2 * std::pow(k, 7.0 / 6.0) * std::pow(z, 11.0 / 6.0);
}

// Fried parameter of a slab of thickness z: (0.423 k^2 Cn^2 z)^{-3/5}.
inline double fried_parameter(double cn2, double wavelength, double z) {
    const double k = 2.0 * kPi / wavelength;
    return std::pow(0.423 * k * k * cn2 * z, -3.0 / 5.0);
}

struct PhaseScreen {
    SimulationGrid grid;
    std::vector<double> phase; // [rad], row-major in x

    explicit PhaseScreen(const SimulationGrid& g)
        : grid(g), phase(static_cast<std::size_t>(g.n) * g.n) {}

    double& at(int ix, int iy) { return phase[static_cast<std::size_t>(ix) * grid.n + iy]; }
    const double& at(int ix, int iy) const {
        return phase[static_cast<std::size_t>(ix) * grid.n + iy];
    }
};

// Fourier-synthesized phase screen for one propagation segment.
//
// Each frequency bin gets a circular complex Gaussian scaled so that its
// total variance is 2 (dk)^2 Psd(kappa), where Psd = 2 pi k^2 dz Phi_n is
// the phase spectrum of a slab of thickness screen_spacing; the factor 2
// compensates for keeping only the real part of the synthesis. The DC bin
// (a physically meaningless random piston) is zeroed, which makes every
// screen exactly zero-mean. Phase values scale as sqrt(cn2), bit-exactly
// for power-of-four cn2 ratios.
inline PhaseScreen generate_phase_screen(const SimulationGrid& grid,
                                         const TurbulenceParams& params, RngStream& rng) {
    params.validate();
    const int n = grid.n;
    const double dk = grid.freq_spacing();
    const double k = grid.wavenumber();
    const double slab = 2.0 * kPi * k * k * params.screen_spacing;

    std::vector<cd> spectrum(static_cast<std::size_t>(n) * n);
    for (int ix = 0; ix < n; ++ix) {
        const double kx = grid.kappa(ix);
        for (int iy = 0; iy < n; ++iy) {
            const double ky = grid.kappa(iy);
            const double kappa = std::sqrt(kx * kx + ky * ky);
            const double sigma = dk * std::sqrt(slab * kolmogorov_spectrum(kappa, params));
            const double amp = std::sqrt(-2.0 * std::log(rng.uniform_pos()));
            const double theta = 2.0 * kPi * rng.uniform();
            spectrum[static_cast<std::size_t>(ix) * n + iy] = std::polar(sigma * amp, theta);
        }
    }
    spectrum[0] = cd{0.0, 0.0};

    fft::transform_2d(spectrum.data(), n, fft::kBackward);

    PhaseScreen screen(grid);
    for (std::size_t i = 0; i < spectrum.size(); ++i) screen.phase[i] = spectrum[i].real();
    return screen;
}

} // namespace oamfso
