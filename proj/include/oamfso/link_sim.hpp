#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "oamfso/common.hpp"
#include "oamfso/ofdm_im.hpp"
#include "oamfso/parallel.hpp"
#include "oamfso/propagation.hpp"
#include "oamfso/rng.hpp"

namespace oamfso {

// Additive noise: circular complex Gaussian with total variance n0 per
// subcarrier (n0/2 per quadrature).
struct NoiseModel {
    double snr_db = 0.0; // Eb/N0
    double n0 = 0.0;
};

inline double alphabet_mean_energy(int mod_order) {
    const std::vector<cd> alphabet = qam_alphabet(mod_order);
    double acc = 0.0;
    for (const cd& a : alphabet) acc += std::norm(a);
    return acc / static_cast<double>(alphabet.size());
}

// Mean transmitted energy of one block including the cyclic prefix. With the
// unitary transform every time sample carries the same mean energy, so the
// prefix contributes the n_cp/n_fft fraction on top of the subcarrier sum.
inline double average_block_energy(const OfdmImConfig& config) {
    const double modulated = static_cast<double>(config.groups) * config.active;
    const double core = modulated * alphabet_mean_energy(config.mod_order);
    return core * (1.0 + static_cast<double>(config.n_cp) / config.n_fft);
}

// Noise density from Eb/N0: energy per information bit is the mean block
// energy over the block's bit budget, and N0 = Eb / 10^(snr/10).
inline double eb_n0_to_n0(double snr_db, const OfdmImConfig& config, double avg_block_energy) {
    if (avg_block_energy <= 0.0) throw std::invalid_argument("block energy must be positive");
    const int bits = config.bits_per_block();
    if (bits == 0) throw std::invalid_argument("configuration carries zero bits per block");
    const double eb = avg_block_energy / static_cast<double>(bits);
    return eb / db_to_linear(snr_db);
}

// y = h .* x + n with n drawn from the supplied stream.
inline std::vector<cd> apply_channel(std::span<const cd> x, std::span<const cd> h, double n0,
                                     RngStream& noise) {
    if (x.size() != h.size()) throw std::invalid_argument("apply_channel: length mismatch");
    std::vector<cd> y(x.size());
    const double scale = std::sqrt(n0 / 2.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = h[i] * x[i] + scale * noise.complex_normal();
    return y;
}

// ---- channel models ----------------------------------------------------------

enum class GainAssignment {
    Block, // one realization drives the whole OFDM block
    Iid    // every subcarrier gets an independently drawn realization
};

// How per-subcarrier gains are materialized for the modem. The optical
// channel is frequency-flat within one realization; the Iid assignment
// interleaves independent realizations across subcarriers, which is what
// gives index modulation its frequency diversity.
struct ChannelModel {
    enum class Kind { Awgn, Ensemble };

    Kind kind = Kind::Awgn;
    const std::vector<ChannelRealization>* ensemble = nullptr;
    int mode = 0;
    GainAssignment assignment = GainAssignment::Iid;
    bool crosstalk = false;

    static ChannelModel awgn() { return ChannelModel{}; }

    static ChannelModel from_ensemble(const std::vector<ChannelRealization>& realizations,
                                      int mode, GainAssignment assignment, bool crosstalk) {
        if (realizations.empty()) throw std::invalid_argument("channel ensemble is empty");
        ChannelModel model;
        model.kind = Kind::Ensemble;
        model.ensemble = &realizations;
        model.mode = mode;
        model.assignment = assignment;
        model.crosstalk = crosstalk;
        // fail fast if the mode is missing
        realizations.front().tx_index_of(mode);
        realizations.front().rx_index_of(mode);
        return model;
    }

    std::vector<int> interferer_modes() const {
        std::vector<int> modes;
        if (kind == Kind::Ensemble && crosstalk) {
            for (int tx : ensemble->front().tx_modes)
                if (tx != mode) modes.push_back(tx);
        }
        return modes;
    }

    // Self gains plus (optionally) one gain vector per interfering transmit
    // mode. All vectors for one subcarrier come from the same realization.
    void materialize(int n_fft, RngStream& picks, std::vector<cd>& self,
                     std::vector<std::vector<cd>>& cross) const {
        self.assign(static_cast<std::size_t>(n_fft), cd{1.0, 0.0});
        cross.clear();
        if (kind == Kind::Awgn) return;

        const auto& realizations = *ensemble;
        const int rx = realizations.front().rx_index_of(mode);
        const int tx = realizations.front().tx_index_of(mode);
        std::vector<int> cross_cols;
        if (crosstalk)
            for (std::size_t t = 0; t < realizations.front().tx_modes.size(); ++t)
                if (static_cast<int>(t) != tx) cross_cols.push_back(static_cast<int>(t));
        cross.assign(cross_cols.size(), std::vector<cd>(static_cast<std::size_t>(n_fft)));

        const auto fill = [&](int carrier, const ChannelRealization& realization) {
            self[static_cast<std::size_t>(carrier)] = realization.at(rx, tx);
            for (std::size_t c = 0; c < cross_cols.size(); ++c)
                cross[c][static_cast<std::size_t>(carrier)] = realization.at(rx, cross_cols[c]);
        };

        if (assignment == GainAssignment::Block) {
            const auto& realization = realizations[picks.uniform_int(realizations.size())];
            for (int f = 0; f < n_fft; ++f) fill(f, realization);
        } else {
            for (int f = 0; f < n_fft; ++f)
                fill(f, realizations[picks.uniform_int(realizations.size())]);
        }
    }
};

// ---- Monte Carlo trials --------------------------------------------------------

struct TrialOutcome {
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
};

struct BerRecord {
    std::string scheme;  // "ofdm" | "ofdm-im"
    std::string regime;  // "none" | "weak" | "strong" | custom label
    int mode = 0;
    double snr_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t bits_total = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    bool low_confidence = false; // fewer than 100 errors counted
    std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kLowConfidenceErrors = 100;

inline std::string scheme_name(const OfdmImConfig& config) {
    return config.is_plain_ofdm() ? "ofdm" : "ofdm-im";
}

// One block through the full chain: bits -> IM/QAM encode -> IFFT+CP ->
// CP strip+FFT -> per-subcarrier channel and noise -> ML detection.
//
// Streams are addressed by (trial, snr index) only, never by scheme, so runs
// with different configurations see identical channel draws and noise: the
// paired-comparison contract.
inline TrialOutcome simulate_trial(const OfdmImConfig& config, const ChannelModel& channel,
                                   double n0, std::uint64_t master_seed, std::uint64_t trial,
                                   std::uint64_t snr_index) {
    const int n_fft = config.n_fft;
    RngStream bit_stream(master_seed, stream_domain::kBits, trial, snr_index);
    RngStream pick_stream(master_seed, stream_domain::kChannelPick, trial, 0);
    RngStream noise_stream(master_seed, stream_domain::kNoise, trial, snr_index);

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(config.bits_per_block()));
    for (std::uint8_t& b : bits) b = static_cast<std::uint8_t>(bit_stream.bit());

    const OfdmSymbol symbol = im_encode(bits, config);
    const std::vector<cd> freq = ofdm_demodulate(symbol.time, config);

    std::vector<cd> self;
    std::vector<std::vector<cd>> cross;
    channel.materialize(n_fft, pick_stream, self, cross);

    std::vector<cd> y(static_cast<std::size_t>(n_fft));
    for (int f = 0; f < n_fft; ++f)
        y[static_cast<std::size_t>(f)] = self[static_cast<std::size_t>(f)] * freq[static_cast<std::size_t>(f)];

    if (!cross.empty()) {
        const std::vector<int> interferers = channel.interferer_modes();
        for (std::size_t c = 0; c < cross.size(); ++c) {
            RngStream xbits(master_seed, stream_domain::kInterfererBits, trial,
                            snr_index * 64 + c);
            std::vector<std::uint8_t> other(bits.size());
            for (std::uint8_t& b : other) b = static_cast<std::uint8_t>(xbits.bit());
            const std::vector<cd> xfreq = im_encode_freq(other, config);
            for (int f = 0; f < n_fft; ++f)
                y[static_cast<std::size_t>(f)] +=
                    cross[c][static_cast<std::size_t>(f)] * xfreq[static_cast<std::size_t>(f)];
        }
    }

    const double noise_scale = std::sqrt(n0 / 2.0);
    for (int f = 0; f < n_fft; ++f)
        y[static_cast<std::size_t>(f)] += noise_scale * noise_stream.complex_normal();

    std::vector<std::uint8_t> decoded(bits.size());
    detect_block(y, self, config, decoded.data());

    TrialOutcome outcome;
    outcome.bits = bits.size();
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] != decoded[i]) ++outcome.bit_errors;
    return outcome;
}

// Per-trial outcomes for one SNR point; slot t belongs to trial t regardless
// of worker count.
inline std::vector<TrialOutcome> simulate_point(const OfdmImConfig& config,
                                                const ChannelModel& channel, double snr_db,
                                                std::uint64_t snr_index, std::uint64_t trials,
                                                std::uint64_t master_seed, unsigned workers) {
    config.validate();
    const double n0 = eb_n0_to_n0(snr_db, config, average_block_energy(config));
    std::vector<TrialOutcome> outcomes(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        outcomes[t] = simulate_trial(config, channel, n0, master_seed,
                                     static_cast<std::uint64_t>(t), snr_index);
    });
    return outcomes;
}

inline std::vector<BerRecord> run_ber_sweep(const OfdmImConfig& config,
                                            const ChannelModel& channel,
                                            std::span<const double> snr_db_list,
                                            std::uint64_t trials, std::uint64_t master_seed,
                                            const std::string& regime, unsigned workers) {
    std::vector<BerRecord> records;
    records.reserve(snr_db_list.size());
    for (std::size_t s = 0; s < snr_db_list.size(); ++s) {
        const auto outcomes =
            simulate_point(config, channel, snr_db_list[s], s, trials, master_seed, workers);
        BerRecord record;
        record.scheme = scheme_name(config);
        record.regime = regime;
        record.mode = channel.kind == ChannelModel::Kind::Ensemble ? channel.mode : 0;
        record.snr_db = snr_db_list[s];
        record.trials = trials;
        record.seed = master_seed;
        for (const TrialOutcome& o : outcomes) {
            record.bits_total += o.bits;
            record.bit_errors += o.bit_errors;
        }
        record.ber = record.bits_total == 0
                         ? 0.0
                         : static_cast<double>(record.bit_errors) / static_cast<double>(record.bits_total);
        record.low_confidence = record.bit_errors < kLowConfidenceErrors;
        records.push_back(std::move(record));
    }
    return records;
}

// ---- capacity ----------------------------------------------------------------

struct CapacityPoint {
    double capacity = 0.0; // bits/s/Hz
    double cdf = 0.0;
};

// Per-realization Shannon capacity of one mode, treating crosstalk received
// from the other transmitted modes as Gaussian interference:
//   log2(1 + rho |H_mm|^2 / (1 + rho sum_{n != m} |H_mn|^2)).
// Interference-free capacity is available as a switch.
inline std::vector<CapacityPoint> capacity_cdf(const std::vector<ChannelRealization>& ensemble,
                                               double snr_db, int mode,
                                               bool crosstalk_as_noise = true) {
    if (ensemble.empty()) throw std::invalid_argument("capacity_cdf: empty ensemble");
    const double rho = db_to_linear(snr_db);
    std::vector<double> capacities;
    capacities.reserve(ensemble.size());
    for (const ChannelRealization& realization : ensemble) {
        const double s = realization.self_coupling(mode);
        const double interference =
            crosstalk_as_noise ? realization.interference_into(mode) : 0.0;
        capacities.push_back(std::log2(1.0 + rho * s / (1.0 + rho * interference)));
    }
    std::sort(capacities.begin(), capacities.end());
    std::vector<CapacityPoint> points(capacities.size());
    for (std::size_t i = 0; i < capacities.size(); ++i) {
        points[i].capacity = capacities[i];
        points[i].cdf = static_cast<double>(i + 1) / static_cast<double>(capacities.size());
    }
    return points;
}

inline double empirical_quantile(const std::vector<CapacityPoint>& cdf, double q) {
    if (cdf.empty()) throw std::invalid_argument("empirical_quantile: empty cdf");
    const auto idx = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(cdf.size()) - 1.0,
                         std::max(0.0, std::ceil(q * static_cast<double>(cdf.size())) - 1.0)));
    return cdf[idx].capacity;
}

// ---- union bound ----------------------------------------------------------------

// All candidate sub-block vectors, in detector enumeration order.
inline std::vector<std::vector<cd>> enumerate_candidates(const OfdmImConfig& config) {
    if (config.candidates_per_group() > 4096)
        throw std::invalid_argument("candidate set too large to enumerate");
    const std::vector<cd> alphabet = qam_alphabet(config.mod_order);
    const int ng = config.group_size();
    const std::uint64_t n_patterns = std::uint64_t{1} << config.index_bits();
    std::uint64_t n_combos = 1;
    for (int i = 0; i < config.active; ++i) n_combos *= static_cast<std::uint64_t>(config.mod_order);

    std::vector<std::vector<cd>> candidates;
    candidates.reserve(static_cast<std::size_t>(config.candidates_per_group()));
    for (std::uint64_t pattern = 0; pattern < n_patterns; ++pattern) {
        const std::vector<int> indices = select_indices(pattern, config);
        for (std::uint64_t combo = 0; combo < n_combos; ++combo) {
            std::vector<cd> x(static_cast<std::size_t>(ng), cd{0.0, 0.0});
            std::uint64_t rest = combo;
            for (int slot = config.active - 1; slot >= 0; --slot) {
                x[static_cast<std::size_t>(indices[static_cast<std::size_t>(slot)])] =
                    alphabet[static_cast<std::size_t>(rest % static_cast<std::uint64_t>(config.mod_order))];
                rest /= static_cast<std::uint64_t>(config.mod_order);
            }
            candidates.push_back(std::move(x));
        }
    }
    return candidates;
}

// Union bound on the sub-block error probability for fixed group gains:
//   (1/|C|) sum_{i != j} Q( sqrt(||h (x_i - x_j)||^2 / (2 N0)) ).
inline double union_bound_for_gains(const std::vector<std::vector<cd>>& candidates,
                                    std::span<const cd> h, double n0) {
    const std::size_t ng = h.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (i == j) continue;
            double d2 = 0.0;
            for (std::size_t c = 0; c < ng; ++c)
                d2 += std::norm(h[c] * (candidates[i][c] - candidates[j][c]));
            acc += q_function(std::sqrt(d2 / (2.0 * n0)));
        }
    }
    return acc / static_cast<double>(candidates.size());
}

// Bound averaged over the channel distribution by Monte Carlo: gains are
// materialized exactly as the BER sweep does, one block per sample, with the
// per-group bound averaged across groups.
inline std::vector<double> union_bound_ber(const OfdmImConfig& config,
                                           const ChannelModel& channel,
                                           std::span<const double> snr_db_list,
                                           std::uint64_t channel_samples,
                                           std::uint64_t master_seed, unsigned workers) {
    config.validate();
    const auto candidates = enumerate_candidates(config);
    const int ng = config.group_size();
    const double block_energy = average_block_energy(config);
    if (channel.kind == ChannelModel::Kind::Awgn) channel_samples = 1;

    std::vector<double> bounds(snr_db_list.size(), 0.0);
    for (std::size_t s = 0; s < snr_db_list.size(); ++s) {
        const double n0 = eb_n0_to_n0(snr_db_list[s], config, block_energy);
        std::vector<double> per_sample(channel_samples, 0.0);
        parallel_for(channel_samples, workers, [&](std::size_t t) {
            RngStream picks(master_seed, stream_domain::kChannelPick, t, 0);
            std::vector<cd> self;
            std::vector<std::vector<cd>> cross;
            channel.materialize(config.n_fft, picks, self, cross);
            double acc = 0.0;
            for (int g = 0; g < config.groups; ++g) {
                const std::span<const cd> hg(self.data() + static_cast<std::size_t>(g) * ng,
                                             static_cast<std::size_t>(ng));
                acc += union_bound_for_gains(candidates, hg, n0);
            }
            per_sample[t] = acc / static_cast<double>(config.groups);
        });
        const double total = std::accumulate(per_sample.begin(), per_sample.end(), 0.0);
        bounds[s] = total / static_cast<double>(channel_samples);
    }
    return bounds;
}

// ---- CSV artifacts ---------------------------------------------------------------

inline void write_ber_csv(const std::string& path, const std::vector<BerRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "scheme,regime,mode,snr_db,trials,bits_total,bit_errors,ber,low_confidence\n";
    char line[256];
    for (const BerRecord& r : records) {
        std::snprintf(line, sizeof(line), "%s,%s,%d,%.6g,%llu,%llu,%llu,%.12g,%d\n",
                      r.scheme.c_str(), r.regime.c_str(), r.mode, r.snr_db,
                      static_cast<unsigned long long>(r.trials),
                      static_cast<unsigned long long>(r.bits_total),
                      static_cast<unsigned long long>(r.bit_errors), r.ber,
                      r.low_confidence ? 1 : 0);
        out << line;
    }
}

inline void write_capacity_csv(const std::string& path, const std::string& regime, int mode,
                               double snr_db, const std::vector<CapacityPoint>& points) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "regime,mode,snr_db,capacity_bps_hz,cdf\n";
    char line[160];
    for (const CapacityPoint& p : points) {
        std::snprintf(line, sizeof(line), "%s,%d,%.6g,%.12g,%.12g\n", regime.c_str(), mode,
                      snr_db, p.capacity, p.cdf);
        out << line;
    }
}

inline void write_union_bound_csv(const std::string& path, const std::string& scheme,
                                  std::span<const double> snr_db_list,
                                  std::span<const double> bounds, bool append = false) {
    std::ofstream out(path, append ? std::ios::app : std::ios::out);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    if (!append) out << "scheme,snr_db,bound\n";
    char line[128];
    for (std::size_t i = 0; i < snr_db_list.size(); ++i) {
        std::snprintf(line, sizeof(line), "%s,%.6g,%.12g\n", scheme.c_str(), snr_db_list[i],
                      bounds[i]);
        out << line;
    }
}

} // namespace oamfso
