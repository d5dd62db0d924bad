#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "oamfso/link_sim.hpp"

using namespace oamfso;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const OfdmImConfig kImConfig{};                                         // (1,4,4) layout
const OfdmImConfig kOfdmConfig = OfdmImConfig::plain_ofdm(128, 16, 4); // reference scheme

// Identity-channel ensemble for capacity checks.
std::vector<ChannelRealization> identity_ensemble(std::size_t count) {
    std::vector<ChannelRealization> ensemble(count);
    for (std::size_t i = 0; i < count; ++i) {
        ChannelRealization& r = ensemble[i];
        r.tx_modes = {+1, +3};
        r.rx_modes = {+1, +3};
        r.matrix = {cd{1.0, 0.0}, cd{0.0, 0.0}, cd{0.0, 0.0}, cd{1.0, 0.0}};
        r.trial = i;
    }
    return ensemble;
}

} // namespace

TEST_CASE("energy accounting") {
    CHECK(alphabet_mean_energy(4) == 2.0);
    // 32 active carriers of energy 2, prefix adds 16/128
    CHECK_THAT(average_block_energy(kImConfig), WithinRel(64.0 * 1.125, 1e-12));
    CHECK_THAT(average_block_energy(kOfdmConfig), WithinRel(256.0 * 1.125, 1e-12));

    // Eb times the bit budget returns the block energy
    const double eb = average_block_energy(kOfdmConfig) / kOfdmConfig.bits_per_block();
    CHECK_THAT(eb * kOfdmConfig.bits_per_block(), WithinRel(average_block_energy(kOfdmConfig), 1e-12));
    CHECK(kImConfig.bits_per_block() == 128);
}

TEST_CASE("measured block energy matches the analytic mean") {
    RngStream rng(4, stream_domain::kTest);
    for (const OfdmImConfig& config :
         {kImConfig, OfdmImConfig{128, 16, 16, 3, 16, IndexMapper::Combinadic}}) {
        double acc = 0.0;
        const int blocks = 2000;
        for (int t = 0; t < blocks; ++t) {
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(config.bits_per_block()));
            for (std::uint8_t& b : bits) b = static_cast<std::uint8_t>(rng.bit());
            const OfdmSymbol symbol = im_encode(bits, config);
            for (const cd& v : symbol.time) acc += std::norm(v);
        }
        CHECK_THAT(acc / blocks, WithinRel(average_block_energy(config), 0.02));
    }
}

TEST_CASE("noise calibration follows Eb/N0") {
    const double e = average_block_energy(kImConfig);
    const double n0_a = eb_n0_to_n0(10.0, kImConfig, e);
    const double n0_b = eb_n0_to_n0(10.0 + 10.0 * std::log10(2.0), kImConfig, e);
    CHECK_THAT(n0_a / n0_b, WithinRel(2.0, 1e-12));
    CHECK_THAT(n0_a, WithinRel(e / 128.0 / 10.0, 1e-12));
    CHECK_THROWS_AS(eb_n0_to_n0(10.0, kImConfig, 0.0), std::invalid_argument);
}

TEST_CASE("apply_channel implements y = h x + n") {
    const std::vector<cd> x{{1.0, 1.0}, {-1.0, 1.0}, {0.5, 0.0}};
    const std::vector<cd> h{{0.5, 0.0}, {0.0, 1.0}, {2.0, -1.0}};

    SECTION("noise-free is the element-wise product") {
        RngStream noise(1, stream_domain::kNoise);
        const auto y = apply_channel(x, h, 0.0, noise);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK_THAT(std::abs(y[i] - h[i] * x[i]), WithinAbs(0.0, 1e-15));
    }

    SECTION("zero input isolates the noise variance") {
        const std::vector<cd> zero(20000, cd{0.0, 0.0});
        const std::vector<cd> ones(20000, cd{1.0, 0.0});
        RngStream noise(2, stream_domain::kNoise);
        const double n0 = 0.8;
        const auto y = apply_channel(zero, ones, n0, noise);
        double var = 0.0;
        for (const cd& v : y) var += std::norm(v);
        CHECK_THAT(var / static_cast<double>(y.size()), WithinRel(n0, 0.05));
    }

    SECTION("fixed seed reproduces the output bit-exactly") {
        RngStream noise_a(3, stream_domain::kNoise, 9, 2);
        RngStream noise_b(3, stream_domain::kNoise, 9, 2);
        const auto ya = apply_channel(x, h, 0.25, noise_a);
        const auto yb = apply_channel(x, h, 0.25, noise_b);
        REQUIRE(ya == yb);
    }

    SECTION("length mismatch is rejected") {
        RngStream noise(1, stream_domain::kNoise);
        const std::vector<cd> short_h{{1.0, 0.0}};
        CHECK_THROWS_AS(apply_channel(x, short_h, 0.0, noise), std::invalid_argument);
    }
}

TEST_CASE("AWGN bit error rate matches the QPSK closed form") {
    const ChannelModel awgn = ChannelModel::awgn();
    const double snr_db = 6.0;
    const auto outcomes = simulate_point(kOfdmConfig, awgn, snr_db, 0, 4000, 97, 2);
    std::uint64_t errors = 0, bits = 0;
    for (const TrialOutcome& o : outcomes) {
        errors += o.bit_errors;
        bits += o.bits;
    }
    const double ber = static_cast<double>(errors) / static_cast<double>(bits);
    const double n0 = eb_n0_to_n0(snr_db, kOfdmConfig, average_block_energy(kOfdmConfig));
    const double expected = q_function(std::sqrt(2.0 / n0)); // per-axis distance 1
    const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(bits));
    REQUIRE(errors >= 100);
    CHECK(std::abs(ber - expected) < 3.0 * sigma);
}

TEST_CASE("noise-free detection over a fixed channel is error-free") {
    const auto ensemble = identity_ensemble(8);
    const ChannelModel channel =
        ChannelModel::from_ensemble(ensemble, +1, GainAssignment::Iid, false);
    const double lossless_snr = 300.0; // vanishing N0
    const auto outcomes = simulate_point(kImConfig, channel, lossless_snr, 0, 200, 7, 2);
    for (const TrialOutcome& o : outcomes) CHECK(o.bit_errors == 0);
}

TEST_CASE("BER is monotone in SNR on AWGN") {
    const std::vector<double> snrs{0.0, 4.0, 8.0};
    const auto records =
        run_ber_sweep(kOfdmConfig, ChannelModel::awgn(), snrs, 2000, 11, "none", 2);
    REQUIRE(records.size() == 3);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double sigma = std::sqrt(records[i - 1].ber /
                                       static_cast<double>(records[i - 1].bits_total));
        CHECK(records[i].ber <= records[i - 1].ber + 3.0 * sigma);
    }
    CHECK(records[0].scheme == "ofdm");
    CHECK(records[0].regime == "none");
}

TEST_CASE("sweeps are reproducible from their seeds") {
    const std::vector<double> snrs{2.0, 6.0};
    const auto a = run_ber_sweep(kImConfig, ChannelModel::awgn(), snrs, 500, 123, "none", 2);
    const auto b = run_ber_sweep(kImConfig, ChannelModel::awgn(), snrs, 500, 123, "none", 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].bit_errors == b[i].bit_errors);
        CHECK(a[i].bits_total == b[i].bits_total);
    }
}

TEST_CASE("index modulation beats plain OFDM at matched Eb/N0 on AWGN") {
    const std::vector<double> snrs{6.0};
    const auto im = run_ber_sweep(kImConfig, ChannelModel::awgn(), snrs, 4000, 55, "none", 2);
    const auto plain = run_ber_sweep(kOfdmConfig, ChannelModel::awgn(), snrs, 4000, 55, "none", 2);
    CHECK(im[0].ber < plain[0].ber);
}

TEST_CASE("capacity of a clean channel at 15 dB") {
    const auto ensemble = identity_ensemble(32);
    const auto points = capacity_cdf(ensemble, 15.0, +1);
    REQUIRE(points.size() == 32);
    for (const CapacityPoint& p : points)
        CHECK_THAT(p.capacity, WithinRel(5.027807673350519, 1e-12)); // log2(1 + 10^1.5)
    CHECK_THAT(points.back().cdf, WithinRel(1.0, 1e-12));

    // vanishing SNR gives vanishing capacity
    const auto zero = capacity_cdf(ensemble, -400.0, +1);
    for (const CapacityPoint& p : zero) CHECK_THAT(p.capacity, WithinAbs(0.0, 1e-12));

    CHECK_THROWS_AS(capacity_cdf(ensemble, 15.0, +7), std::invalid_argument);
    CHECK_THROWS_AS(capacity_cdf({}, 15.0, +1), std::invalid_argument);
}

TEST_CASE("crosstalk lowers the capacity when treated as noise") {
    std::vector<ChannelRealization> ensemble = identity_ensemble(4);
    for (ChannelRealization& r : ensemble) {
        r.matrix[1] = cd{0.4, 0.0}; // leakage from the other transmit mode
    }
    const auto with = capacity_cdf(ensemble, 15.0, +1, true);
    const auto without = capacity_cdf(ensemble, 15.0, +1, false);
    CHECK(with[0].capacity < without[0].capacity);
}

TEST_CASE("union bound on an all-ones channel matches direct pair enumeration") {
    const auto candidates = enumerate_candidates(kImConfig);
    REQUIRE(candidates.size() == 16);

    const double n0 = 0.7;
    const std::vector<cd> h(4, cd{1.0, 0.0});
    const double bound = union_bound_for_gains(candidates, h, n0);

    double oracle = 0.0;
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j) {
            if (i == j) continue;
            double d2 = 0.0;
            for (int c = 0; c < 4; ++c) d2 += std::norm(candidates[i][c] - candidates[j][c]);
            oracle += 0.5 * std::erfc(std::sqrt(d2 / (2.0 * n0)) / std::sqrt(2.0));
        }
    oracle /= 16.0;
    CHECK_THAT(bound, WithinAbs(oracle, 1e-12));
    CHECK(bound >= 0.0);
}

TEST_CASE("union bound dominates the measured AWGN error rate") {
    const std::vector<double> snrs{0.0, 3.0, 6.0};
    const auto bounds = union_bound_ber(kImConfig, ChannelModel::awgn(), snrs, 1, 1, 1);
    const auto records = run_ber_sweep(kImConfig, ChannelModel::awgn(), snrs, 4000, 13, "none", 2);
    for (std::size_t i = 0; i < snrs.size(); ++i) {
        if (records[i].ber < 1e-4) continue;
        const double sigma =
            std::sqrt(records[i].ber / static_cast<double>(records[i].bits_total));
        CHECK(bounds[i] >= records[i].ber - 3.0 * sigma);
    }
}

TEST_CASE("candidate guard rejects oversized sets") {
    const OfdmImConfig big{128, 16, 8, 8, 4, IndexMapper::Combinadic}; // 2^12 * 4^8 candidates
    CHECK_THROWS_AS(enumerate_candidates(big), std::invalid_argument);
}

TEST_CASE("block and iid assignments both draw from the ensemble") {
    std::vector<ChannelRealization> ensemble = identity_ensemble(3);
    ensemble[1].matrix[0] = cd{0.5, 0.0};
    ensemble[2].matrix[0] = cd{0.25, 0.0};

    RngStream picks(5, stream_domain::kChannelPick, 0, 0);
    std::vector<cd> self;
    std::vector<std::vector<cd>> cross;

    const ChannelModel block = ChannelModel::from_ensemble(ensemble, +1, GainAssignment::Block, false);
    block.materialize(8, picks, self, cross);
    REQUIRE(self.size() == 8);
    for (const cd& v : self) CHECK(v == self[0]); // one realization for the block
    CHECK(cross.empty());

    const ChannelModel iid = ChannelModel::from_ensemble(ensemble, +1, GainAssignment::Iid, false);
    RngStream picks2(6, stream_domain::kChannelPick, 0, 0);
    iid.materialize(256, picks2, self, cross);
    bool varied = false;
    for (const cd& v : self) varied = varied || v != self[0];
    CHECK(varied);
}
