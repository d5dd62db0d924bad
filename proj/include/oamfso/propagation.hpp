#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oamfso/common.hpp"
#include "oamfso/fft.hpp"
#include "oamfso/grid.hpp"
#include "oamfso/lg.hpp"
#include "oamfso/rng.hpp"
#include "oamfso/turbulence.hpp"

namespace oamfso {

struct GuardLimits {
    double border_band = 0.05;      // width of the monitored border, fraction of n
    double max_border_power = 0.01; // trip threshold, fraction of total power
};

// Paraxial free-space step: multiply the spectrum by the Fresnel transfer
// function exp(+i dz kappa^2 / (2k)) and transform back. The sign is
// conjugate-matched to the beam convention used by lg_point (exp(-i m phi)
// azimuth, exp(-i k r^2 ...) curvature), which the propagation tests pin
// down against the analytic beam. Exactly power-preserving.
inline ComplexField vacuum_step(const ComplexField& field, double dz) {
    if (dz < 0.0) throw std::invalid_argument("propagation step must be >= 0");
    const SimulationGrid& grid = field.grid();
    const int n = grid.n;
    const double k = grid.wavenumber();

    ComplexField out = field;
    fft::transform_2d(out.data(), n, fft::kForward);
    for (int ix = 0; ix < n; ++ix) {
        const double kx = grid.kappa(ix);
        for (int iy = 0; iy < n; ++iy) {
            const double ky = grid.kappa(iy);
            const double phase = dz * (kx * kx + ky * ky) / (2.0 * k);
            out.at(ix, iy) *= std::polar(1.0, phase);
        }
    }
    fft::transform_2d(out.data(), n, fft::kBackward);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (cd& v : out.samples()) v *= scale;
    return out;
}

// Thin-screen application exp(i phase); modulus-preserving.
inline void apply_phase_screen(ComplexField& field, const PhaseScreen& screen) {
    if (!(field.grid() == screen.grid))
        throw std::invalid_argument("field and screen grids differ");
    auto samples = field.samples();
    for (std::size_t i = 0; i < samples.size(); ++i)
        samples[i] *= std::polar(1.0, screen.phase[i]);
}

// One independent screen stack per (master_seed, trial).
inline std::vector<PhaseScreen> draw_screen_stack(const SimulationGrid& grid,
                                                  const TurbulenceParams& params,
                                                  std::uint64_t master_seed,
                                                  std::uint64_t trial) {
    params.validate();
    std::vector<PhaseScreen> screens;
    screens.reserve(static_cast<std::size_t>(params.screen_count));
    for (int s = 0; s < params.screen_count; ++s) {
        RngStream rng(master_seed, stream_domain::kScreen, trial, static_cast<std::uint64_t>(s));
        screens.push_back(generate_phase_screen(grid, params, rng));
    }
    return screens;
}

// Split-step march: free-space segment followed by its screen, one screen
// per segment. Trips the aliasing guard when too much power reaches the
// grid border.
inline ComplexField propagate_through_screens(const ComplexField& input,
                                              std::span<const PhaseScreen> screens,
                                              double spacing,
                                              const GuardLimits& guard = {}) {
    ComplexField field = input;
    for (const PhaseScreen& screen : screens) {
        field = vacuum_step(field, spacing);
        apply_phase_screen(field, screen);
        const double border = border_power_fraction(field, guard.border_band);
        if (border > guard.max_border_power)
            throw guard_error("aliasing guard: " + std::to_string(border * 100.0) +
                              "% of beam power in the outer grid border");
    }
    return field;
}

inline ComplexField turbulent_propagate(const ComplexField& input,
                                        const TurbulenceParams& params,
                                        std::uint64_t master_seed, std::uint64_t trial,
                                        const GuardLimits& guard = {}) {
    const auto screens = draw_screen_stack(input.grid(), params, master_seed, trial);
    return propagate_through_screens(input, screens, params.screen_spacing, guard);
}

// Bank of normalized analyzing beams for modal projection at distance z.
// Matched-beam detection: the analyzers reuse the transmit waist.
class ModalAnalyzer {
public:
    ModalAnalyzer(const SimulationGrid& grid, std::vector<int> modes, double w0, double z)
        : modes_(std::move(modes)) {
        analyzers_.reserve(modes_.size());
        for (int m : modes_)
            analyzers_.push_back(lg_field(LgBeamSpec{0, m, w0, z}, grid));
    }

    const std::vector<int>& modes() const { return modes_; }

    // Modal amplitudes <field, u_n>, one entry per analyzer mode.
    std::vector<cd> decompose(const ComplexField& field) const {
        std::vector<cd> amplitudes;
        amplitudes.reserve(analyzers_.size());
        for (const ComplexField& u : analyzers_) amplitudes.push_back(overlap(field, u));
        return amplitudes;
    }

private:
    std::vector<int> modes_;
    std::vector<ComplexField> analyzers_;
};

inline std::vector<cd> modal_decompose(const ComplexField& field, std::span<const int> rx_modes,
                                       double w0, double z) {
    ModalAnalyzer analyzer(field.grid(), std::vector<int>(rx_modes.begin(), rx_modes.end()), w0, z);
    return analyzer.decompose(field);
}

// Modal coupling matrix of one turbulence realization: column m holds the
// receive-mode amplitudes of transmit mode m after the shared screen stack.
struct ChannelRealization {
    std::vector<int> tx_modes;
    std::vector<int> rx_modes;
    std::vector<cd> matrix; // rx-major: matrix[rx * n_tx + tx]
    double cn2 = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t trial = 0;

    cd at(int rx_index, int tx_index) const {
        return matrix[static_cast<std::size_t>(rx_index) * tx_modes.size() + tx_index];
    }

    int rx_index_of(int mode) const { return index_of(rx_modes, mode, "receive"); }
    int tx_index_of(int mode) const { return index_of(tx_modes, mode, "transmit"); }

    // |H[m][m]|^2 for transmit mode m.
    double self_coupling(int mode) const {
        return std::norm(at(rx_index_of(mode), tx_index_of(mode)));
    }

    // Power leaked from transmit mode m into all other receive modes.
    double crosstalk_from(int mode) const {
        const int tx = tx_index_of(mode);
        const int self_rx = rx_index_of(mode);
        double acc = 0.0;
        for (std::size_t r = 0; r < rx_modes.size(); ++r)
            if (static_cast<int>(r) != self_rx) acc += std::norm(at(static_cast<int>(r), tx));
        return acc;
    }

    // Interference received on mode m from the other transmit modes.
    double interference_into(int mode) const {
        const int rx = rx_index_of(mode);
        const int self_tx = tx_index_of(mode);
        double acc = 0.0;
        for (std::size_t t = 0; t < tx_modes.size(); ++t)
            if (static_cast<int>(t) != self_tx) acc += std::norm(at(rx, static_cast<int>(t)));
        return acc;
    }

private:
    static int index_of(const std::vector<int>& modes, int mode, const char* kind) {
        for (std::size_t i = 0; i < modes.size(); ++i)
            if (modes[i] == mode) return static_cast<int>(i);
        throw std::invalid_argument(std::string(kind) + " mode " + std::to_string(mode) +
                                    " absent from channel realization");
    }
};

inline ChannelRealization sample_channel(const SimulationGrid& grid,
                                         const std::vector<int>& tx_modes,
                                         const std::vector<int>& rx_modes, double w0,
                                         const TurbulenceParams& params,
                                         std::uint64_t master_seed, std::uint64_t trial,
                                         const ModalAnalyzer* analyzer = nullptr,
                                         const GuardLimits& guard = {}) {
    const double z = params.path_length();
    std::optional<ModalAnalyzer> local;
    if (analyzer == nullptr) local.emplace(grid, rx_modes, w0, z);
    const ModalAnalyzer& rx = analyzer != nullptr ? *analyzer : *local;

    const auto screens = draw_screen_stack(grid, params, master_seed, trial);

    ChannelRealization realization;
    realization.tx_modes = tx_modes;
    realization.rx_modes = rx_modes;
    realization.cn2 = params.cn2;
    realization.master_seed = master_seed;
    realization.trial = trial;
    realization.matrix.assign(rx_modes.size() * tx_modes.size(), cd{0.0, 0.0});

    for (std::size_t t = 0; t < tx_modes.size(); ++t) {
        const ComplexField launched = lg_field(LgBeamSpec{0, tx_modes[t], w0, 0.0}, grid);
        const ComplexField received =
            propagate_through_screens(launched, screens, params.screen_spacing, guard);
        const std::vector<cd> amplitudes = rx.decompose(received);
        for (std::size_t r = 0; r < rx_modes.size(); ++r)
            realization.matrix[r * tx_modes.size() + t] = amplitudes[r];
    }
    return realization;
}

} // namespace oamfso
