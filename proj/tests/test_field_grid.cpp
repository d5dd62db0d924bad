#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "oamfso/grid.hpp"
#include "oamfso/lg.hpp"
#include "oamfso/rng.hpp"

using namespace oamfso;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const SimulationGrid kGrid{256, 5e-3, 1550e-9};
constexpr double kW0 = 0.016;

ComplexField random_field(const SimulationGrid& grid, std::uint64_t seed) {
    RngStream rng(seed, stream_domain::kTest);
    ComplexField f(grid);
    for (cd& v : f.samples()) v = rng.complex_normal();
    return f;
}

// Winding number of the field phase around a circle of given radius,
// sampled with bilinear interpolation.
int winding_number(const ComplexField& field, double radius) {
    const SimulationGrid& grid = field.grid();
    const int n_angles = 2048;
    double accumulated = 0.0;
    double prev = 0.0;
    for (int a = 0; a <= n_angles; ++a) {
        const double theta = 2.0 * kPi * a / n_angles;
        const double x = radius * std::cos(theta) / grid.dx + grid.n / 2;
        const double y = radius * std::sin(theta) / grid.dx + grid.n / 2;
        const int ix = static_cast<int>(std::floor(x));
        const int iy = static_cast<int>(std::floor(y));
        const double fx = x - ix, fy = y - iy;
        const cd v = field.at(ix, iy) * (1 - fx) * (1 - fy) + field.at(ix + 1, iy) * fx * (1 - fy) +
                     field.at(ix, iy + 1) * (1 - fx) * fy + field.at(ix + 1, iy + 1) * fx * fy;
        const double phase = std::arg(v);
        if (a > 0) {
            double d = phase - prev;
            while (d > kPi) d -= 2.0 * kPi;
            while (d < -kPi) d += 2.0 * kPi;
            accumulated += d;
        }
        prev = phase;
    }
    return static_cast<int>(std::lround(accumulated / (2.0 * kPi)));
}

} // namespace

TEST_CASE("grid construction is validated") {
    CHECK_THROWS_AS(SimulationGrid(100, 5e-3, 1550e-9), std::invalid_argument); // not a power of two
    CHECK_THROWS_AS(SimulationGrid(-256, 5e-3, 1550e-9), std::invalid_argument);
    CHECK_THROWS_AS(SimulationGrid(256, 0.0, 1550e-9), std::invalid_argument);
    CHECK_THROWS_AS(SimulationGrid(256, 5e-3, -1.0), std::invalid_argument);

    const SimulationGrid g(512, 5e-3, 1550e-9);
    CHECK_THAT(g.freq_spacing(), WithinRel(2.0 * kPi / (512 * 5e-3), 1e-13));
    CHECK(g.coord(256) == 0.0);
    CHECK(g.kappa(0) == 0.0);
    CHECK_THAT(g.kappa(511), WithinRel(-g.freq_spacing(), 1e-13));
}

TEST_CASE("beam geometry matches the closed forms") {
    // frozen against a 40-digit evaluation
    CHECK_THAT(rayleigh_range(kW0, 1550e-9), WithinRel(518.8694963348304, 1e-12));
    CHECK_THAT(beam_radius(kW0, 1000.0, 1550e-9), WithinRel(0.03474011458430907, 1e-12));
    CHECK_THAT(beam_radius(kW0, 0.0, 1550e-9), WithinRel(kW0, 1e-15));
}

TEST_CASE("on-axis fundamental mode amplitude") {
    // at r=0, z=0 every factor but the normalization collapses to one
    const cd v = lg_point(LgBeamSpec{0, 0, kW0, 0.0}, 1550e-9, 0.0, 0.0);
    CHECK_THAT(v.real(), WithinRel(std::sqrt(2.0 / kPi) / kW0, 1e-12));
    CHECK_THAT(v.imag(), WithinAbs(0.0, 1e-15));
}

TEST_CASE("azimuthal phase of a charge-one beam decreases with azimuth") {
    const LgBeamSpec spec{0, 1, kW0, 0.0};
    const double r = kW0;
    const cd a = lg_point(spec, 1550e-9, r, 0.0);
    const cd b = lg_point(spec, 1550e-9, r * std::cos(0.1), r * std::sin(0.1));
    double d = std::arg(b) - std::arg(a);
    while (d > kPi) d -= 2.0 * kPi;
    while (d < -kPi) d += 2.0 * kPi;
    CHECK_THAT(d, WithinAbs(-0.1, 1e-9));
}

TEST_CASE("power, normalize and overlap obey their algebra") {
    const ComplexField a = random_field(kGrid, 1);
    const ComplexField b = random_field(kGrid, 2);

    SECTION("conjugate symmetry") {
        const cd ab = overlap(a, b);
        const cd ba = overlap(b, a);
        CHECK_THAT(std::abs(ab - std::conj(ba)), WithinAbs(0.0, 1e-9 * std::abs(ab)));
    }

    SECTION("linearity in the first argument") {
        const cd c{0.7, -1.3};
        ComplexField ca = a;
        for (cd& v : ca.samples()) v *= c;
        const cd lhs = overlap(ca, b);
        const cd rhs = c * overlap(a, b);
        CHECK_THAT(std::abs(lhs - rhs), WithinAbs(0.0, 1e-9 * std::abs(rhs)));
    }

    SECTION("quadratic power scaling") {
        const cd c{-2.0, 0.5};
        ComplexField ca = a;
        for (cd& v : ca.samples()) v *= c;
        CHECK_THAT(power(ca), WithinRel(std::norm(c) * power(a), 1e-12));
    }

    SECTION("power equals the self overlap") {
        CHECK_THAT(power(a), WithinRel(overlap(a, a).real(), 1e-12));
    }

    SECTION("normalization") {
        CHECK_THAT(power(normalize(a)), WithinRel(1.0, 1e-9));
        ComplexField zero(kGrid);
        CHECK(power(zero) == 0.0);
        CHECK_THROWS_AS(normalize(zero), std::domain_error);
    }

    SECTION("grid mismatch is rejected") {
        const SimulationGrid other{128, 5e-3, 1550e-9};
        CHECK_THROWS_AS(overlap(a, ComplexField(other)), std::invalid_argument);
    }
}

TEST_CASE("lg_field validation") {
    CHECK_THROWS_AS(lg_field(LgBeamSpec{0, 1, -1.0, 0.0}, kGrid), std::invalid_argument);
    CHECK_THROWS_AS(lg_field(LgBeamSpec{-1, 1, kW0, 0.0}, kGrid), std::invalid_argument);
    // beam radius beyond a quarter of the grid side
    CHECK_THROWS_AS(lg_field(LgBeamSpec{0, 1, 0.4, 0.0}, kGrid), std::invalid_argument);
    CHECK_THAT(power(lg_field(LgBeamSpec{0, 1, kW0, 0.0}, kGrid)), WithinRel(1.0, 1e-9));
}

TEST_CASE("distinct OAM modes are orthonormal on the grid") {
    const std::vector<int> modes{-3, -1, +1, +3};
    std::vector<ComplexField> beams;
    for (int m : modes) beams.push_back(lg_field(LgBeamSpec{0, m, kW0, 0.0}, kGrid));
    for (std::size_t i = 0; i < beams.size(); ++i) {
        for (std::size_t j = 0; j < beams.size(); ++j) {
            const double magnitude = std::abs(overlap(beams[i], beams[j]));
            if (i == j)
                CHECK_THAT(magnitude, WithinAbs(1.0, 1e-9));
            else
                CHECK(magnitude < 1e-3);
        }
    }
}

TEST_CASE("phase winding recovers the topological charge") {
    for (int m = -5; m <= 5; ++m) {
        if (m == 0) continue;
        const ComplexField beam = lg_field(LgBeamSpec{0, m, kW0, 0.0}, kGrid);
        CHECK(winding_number(beam, kW0) == -m);
    }
}

TEST_CASE("radial profile has p interior nodes") {
    for (int p = 0; p <= 2; ++p) {
        const LgBeamSpec spec{p, 1, kW0, 0.0};
        int sign_changes = 0;
        double prev = lg_point(spec, 1550e-9, 1e-4, 0.0).real();
        for (int i = 2; i < 400; ++i) {
            const double r = i * 1e-4; // out to ~2.5 waists
            const double v = lg_point(spec, 1550e-9, r, 0.0).real();
            if (v * prev < 0.0) ++sign_changes;
            prev = v;
        }
        CHECK(sign_changes == p);
    }
}

TEST_CASE("border power fraction sees a displaced beam") {
    ComplexField f(kGrid);
    f.at(1, 1) = cd{1.0, 0.0}; // inside the 5% border band
    CHECK_THAT(border_power_fraction(f), WithinAbs(1.0, 1e-12));
    ComplexField g(kGrid);
    g.at(128, 128) = cd{1.0, 0.0};
    CHECK(border_power_fraction(g) == 0.0);
}
