#pragma once

#include <cmath>
#include <stdexcept>

#include "oamfso/common.hpp"
#include "oamfso/grid.hpp"

namespace oamfso {

// Laguerre-Gauss beam of radial index p and topological charge m, waist w0,
// evaluated at propagation distance z. The p=0, m!=0 members carry orbital
// angular momentum; the azimuthal factor is exp(-i m phi), so the phase
// winds by -2 pi m per revolution.
struct LgBeamSpec {
    int p = 0;
    int m = 0;
    double w0 = 0.0; // beam waist [m]
    double z = 0.0;  // evaluation distance [m]

    void validate() const {
        if (p < 0) throw std::invalid_argument("radial index p must be >= 0");
        if (w0 <= 0.0) throw std::invalid_argument("beam waist must be positive");
        if (z < 0.0) throw std::invalid_argument("propagation distance must be >= 0");
    }
};

inline double rayleigh_range(double w0, double wavelength) {
    return kPi * w0 * w0 / wavelength;
}

inline double beam_radius(double w0, double z, double wavelength) {
    const double zr = rayleigh_range(w0, wavelength);
    return w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
}

// Generalized Laguerre polynomial L_p^alpha(x) by the three-term recurrence.
inline double laguerre(int p, int alpha, double x) {
    if (p == 0) return 1.0;
    double lkm1 = 1.0;
    double lk = 1.0 + alpha - x;
    for (int k = 2; k <= p; ++k) {
        const double lkp1 = ((2.0 * k - 1.0 + alpha - x) * lk - (k - 1.0 + alpha) * lkm1) / k;
        lkm1 = lk;
        lk = lkp1;
    }
    return lk;
}

// Field value at one point (centered coordinates), before any numerical
// power normalization.
inline cd lg_point(const LgBeamSpec& spec, double wavelength, double x, double y) {
    const int am = std::abs(spec.m);
    const double zr = rayleigh_range(spec.w0, wavelength);
    const double w = beam_radius(spec.w0, spec.z, wavelength);
    const double k = 2.0 * kPi / wavelength;

    const double r2 = x * x + y * y;
    const double phi = std::atan2(y, x);

    double log_fact = 0.0; // log( p! / (p+|m|)! )
    for (int i = spec.p + 1; i <= spec.p + am; ++i) log_fact -= std::log(static_cast<double>(i));
    const double norm = std::sqrt(2.0 / kPi * std::exp(log_fact)) / w;

    const double rho = std::sqrt(2.0 * r2) / w;
    const double radial = norm * std::pow(rho, am) * laguerre(spec.p, am, 2.0 * r2 / (w * w)) *
                          std::exp(-r2 / (w * w));

    const double curvature = spec.z == 0.0 ? 0.0 : -k * r2 * spec.z / (2.0 * (spec.z * spec.z + zr * zr));
    const double gouy = (2.0 * spec.p + am + 1.0) * std::atan2(spec.z, zr);
    const double phase = curvature + gouy - spec.m * phi;
    return std::polar(radial, phase);
}

// Discretized beam, numerically power-normalized to 1 so the overlap
// integrals become exact contracts in spite of sampling error.
inline ComplexField lg_field(const LgBeamSpec& spec, const SimulationGrid& grid) {
    spec.validate();
    const double w = beam_radius(spec.w0, spec.z, grid.wavelength);
    if (w > grid.side() / 4.0)
        throw std::invalid_argument("beam radius exceeds a quarter of the grid side; "
                                    "enlarge the grid to avoid aliasing");

    ComplexField field(grid);
    for (int ix = 0; ix < grid.n; ++ix) {
        const double x = grid.coord(ix);
        for (int iy = 0; iy < grid.n; ++iy) {
            field.at(ix, iy) = lg_point(spec, grid.wavelength, x, grid.coord(iy));
        }
    }
    normalize_in_place(field);
    return field;
}

} // namespace oamfso
