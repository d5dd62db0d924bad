#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oamfso/common.hpp"
#include "oamfso/fft.hpp"

namespace oamfso {

// Binomial coefficient in exact 64-bit arithmetic; n is capped so that every
// reachable value fits (C(64,32) < 2^63).
inline std::uint64_t binomial(int n, int k) {
    if (n < 0 || n > 64) throw std::invalid_argument("binomial: need 0 <= n <= 64");
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        // multiply first, divide by i afterwards; the running product of a
        // prefix of C(n,k) factors is always divisible by i!
        result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return result;
}

// j-th K-subset of {0..n-1} in lexicographic order of sorted subsets.
inline std::vector<int> index_to_combination(std::uint64_t j, int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("index_to_combination: need 0 <= k <= n");
    if (j >= binomial(n, k)) throw std::out_of_range("combination index out of range");
    std::vector<int> subset;
    subset.reserve(static_cast<std::size_t>(k));
    int next = 0;
    for (int slot = k; slot > 0; --slot) {
        for (int value = next;; ++value) {
            const std::uint64_t block = binomial(n - 1 - value, slot - 1);
            if (j < block) {
                subset.push_back(value);
                next = value + 1;
                break;
            }
            j -= block;
        }
    }
    return subset;
}

// Exact inverse of index_to_combination.
inline std::uint64_t combination_to_index(std::span<const int> subset, int n, int k) {
    if (static_cast<int>(subset.size()) != k)
        throw std::invalid_argument("combination_to_index: subset size != k");
    std::uint64_t index = 0;
    int prev = -1;
    for (int slot = 0; slot < k; ++slot) {
        const int value = subset[static_cast<std::size_t>(slot)];
        if (value <= prev || value >= n)
            throw std::invalid_argument("combination_to_index: malformed subset");
        for (int skipped = prev + 1; skipped < value; ++skipped)
            index += binomial(n - 1 - skipped, k - 1 - slot);
        prev = value;
    }
    return index;
}

// Look-up-table index selection for the (K=1, N_G=4) sub-block: bit pairs
// 00,01,11,10 activate carriers 1,2,3,4. Gray-coded on purpose; a natural
// binary mapper would order these differently.
inline constexpr std::array<int, 4> kTable1Carrier{0, 1, 3, 2};

inline int table1_carrier(int bits) {
    if (bits < 0 || bits > 3) throw std::invalid_argument("table1_carrier: need a 2-bit value");
    return kTable1Carrier[static_cast<std::size_t>(bits)];
}

inline int table1_index_bits(int carrier) {
    for (int bits = 0; bits < 4; ++bits)
        if (kTable1Carrier[static_cast<std::size_t>(bits)] == carrier) return bits;
    throw std::invalid_argument("table1_index_bits: carrier out of range");
}

// ---- QAM ------------------------------------------------------------------

inline int int_log2(std::uint64_t v) { return std::bit_width(v) - 1; }

inline bool is_power_of_two(int v) {
    return v > 0 && std::has_single_bit(static_cast<unsigned>(v));
}

namespace detail {

// Gray-coded amplitude level for a `bits`-wide value: odd integers
// -(L-1) ... +(L-1), adjacent levels differing in exactly one input bit.
inline int gray_level(unsigned value, int bits) {
    unsigned g = value;
    for (unsigned shift = g >> 1; shift != 0; shift >>= 1) g ^= shift; // gray -> binary
    return 2 * static_cast<int>(g) - ((1 << bits) - 1);
}

inline unsigned gray_value(int level, int bits) {
    const unsigned idx = static_cast<unsigned>((level + ((1 << bits) - 1)) / 2);
    return idx ^ (idx >> 1); // binary -> gray
}

} // namespace detail

inline void validate_mod_order(int m) {
    if (!is_power_of_two(m) || m < 2)
        throw std::invalid_argument("modulation order must be a power of two >= 2");
    if (m != 2 && int_log2(static_cast<std::uint64_t>(m)) % 2 != 0)
        throw std::invalid_argument("only BPSK and square QAM orders are supported");
}

// Unnormalized Gray-coded constellation point; for M=4 the alphabet is
// exactly {+-1 +- i}. Energy accounting happens in the link layer.
inline cd qam_map(std::span<const std::uint8_t> bits, int m) {
    validate_mod_order(m);
    const int total_bits = int_log2(static_cast<std::uint64_t>(m));
    if (static_cast<int>(bits.size()) != total_bits)
        throw std::invalid_argument("qam_map: wrong number of bits");
    if (m == 2) return cd{bits[0] ? -1.0 : 1.0, 0.0};

    const int half = total_bits / 2;
    unsigned vi = 0, vq = 0;
    for (int b = 0; b < half; ++b) vi = vi << 1 | bits[static_cast<std::size_t>(b)];
    for (int b = half; b < total_bits; ++b) vq = vq << 1 | bits[static_cast<std::size_t>(b)];
    return cd{static_cast<double>(detail::gray_level(vi, half)),
              static_cast<double>(detail::gray_level(vq, half))};
}

// Nearest-neighbor hard demapping (inverse of qam_map on the alphabet).
inline void qam_demap(cd symbol, int m, std::uint8_t* bits_out) {
    validate_mod_order(m);
    const int total_bits = int_log2(static_cast<std::uint64_t>(m));
    if (m == 2) {
        bits_out[0] = symbol.real() < 0.0 ? 1 : 0;
        return;
    }
    const int half = total_bits / 2;
    const int levels = 1 << half;
    // nearest odd integer, clamped to the constellation range
    const auto clamp_level = [levels](double v) {
        const int level = 2 * static_cast<int>(std::floor(v / 2.0)) + 1;
        return std::max(-(levels - 1), std::min(levels - 1, level));
    };
    const int li = clamp_level(symbol.real());
    const int lq = clamp_level(symbol.imag());
    const unsigned vi = detail::gray_value(li, half);
    const unsigned vq = detail::gray_value(lq, half);
    for (int b = 0; b < half; ++b)
        bits_out[b] = static_cast<std::uint8_t>(vi >> (half - 1 - b) & 1u);
    for (int b = 0; b < half; ++b)
        bits_out[half + b] = static_cast<std::uint8_t>(vq >> (half - 1 - b) & 1u);
}

inline std::vector<cd> qam_alphabet(int m) {
    validate_mod_order(m);
    const int total_bits = int_log2(static_cast<std::uint64_t>(m));
    std::vector<cd> alphabet;
    alphabet.reserve(static_cast<std::size_t>(m));
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(total_bits));
    for (int v = 0; v < m; ++v) {
        for (int b = 0; b < total_bits; ++b)
            bits[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(v >> (total_bits - 1 - b) & 1);
        alphabet.push_back(qam_map(bits, m));
    }
    return alphabet;
}

// ---- configuration ---------------------------------------------------------

enum class IndexMapper { Table, Combinadic };

struct OfdmImConfig {
    int n_fft = 128;
    int n_cp = 16;
    int groups = 32;   // G
    int active = 1;    // K per group
    int mod_order = 4; // M
    IndexMapper mapper = IndexMapper::Table;

    int group_size() const { return n_fft / groups; } // N_G

    // index-selection bits per group: floor(log2 C(N_G, K))
    int index_bits() const {
        return int_log2(binomial(group_size(), active));
    }
    int bits_per_symbol() const { return int_log2(static_cast<std::uint64_t>(mod_order)); }
    int symbol_bits() const { return active * bits_per_symbol(); }
    int bits_per_group() const { return index_bits() + symbol_bits(); }
    int bits_per_block() const { return groups * bits_per_group(); }
    std::uint64_t candidates_per_group() const {
        std::uint64_t count = std::uint64_t{1} << index_bits();
        for (int i = 0; i < active; ++i) count *= static_cast<std::uint64_t>(mod_order);
        return count;
    }
    bool is_plain_ofdm() const { return active == group_size(); }

    void validate() const {
        if (n_fft <= 0 || groups <= 0) throw std::invalid_argument("n_fft and groups must be positive");
        if (n_fft % groups != 0) throw std::invalid_argument("groups must divide n_fft");
        if (n_cp < 0 || n_cp > n_fft) throw std::invalid_argument("need 0 <= n_cp <= n_fft");
        const int ng = group_size();
        if (ng > 64) throw std::invalid_argument("group size above 64 is unsupported");
        if (active < 1 || active > ng) throw std::invalid_argument("need 1 <= active <= group size");
        validate_mod_order(mod_order);
        if (mapper == IndexMapper::Table && !(active == 1 && ng == 4))
            throw std::invalid_argument("table mapper is defined only for K=1, N_G=4");
    }

    // Conventional OFDM expressed in the same machinery: every subcarrier is
    // its own single-carrier group, so no index bits are spent.
    static OfdmImConfig plain_ofdm(int n_fft, int n_cp, int mod_order) {
        return OfdmImConfig{n_fft, n_cp, n_fft, 1, mod_order, IndexMapper::Combinadic};
    }

    static IndexMapper default_mapper(int active, int group_size) {
        return active == 1 && group_size == 4 ? IndexMapper::Table : IndexMapper::Combinadic;
    }
};

// Active-carrier pattern for index bits value j.
inline std::vector<int> select_indices(std::uint64_t j, const OfdmImConfig& config) {
    if (config.mapper == IndexMapper::Table)
        return {table1_carrier(static_cast<int>(j))};
    return index_to_combination(j, config.group_size(), config.active);
}

inline std::uint64_t indices_to_pattern(std::span<const int> indices, const OfdmImConfig& config) {
    if (config.mapper == IndexMapper::Table)
        return static_cast<std::uint64_t>(table1_index_bits(indices[0]));
    return combination_to_index(indices, config.group_size(), config.active);
}

// ---- block encode / modulate -----------------------------------------------

struct OfdmSymbol {
    std::vector<cd> freq; // n_fft subcarrier values
    std::vector<cd> time; // n_fft + n_cp samples, prefix first
};

// Frequency-domain block: per group, the first b1 bits select the active
// carriers, the remaining K log2(M) bits pick their QAM symbols; groups
// occupy contiguous subcarrier ranges.
inline std::vector<cd> im_encode_freq(std::span<const std::uint8_t> bits,
                                      const OfdmImConfig& config) {
    config.validate();
    if (static_cast<int>(bits.size()) != config.bits_per_block())
        throw std::invalid_argument("im_encode_freq: expected " +
                                    std::to_string(config.bits_per_block()) + " bits, got " +
                                    std::to_string(bits.size()));
    const int ng = config.group_size();
    const int b1 = config.index_bits();
    const int bps = config.bits_per_symbol();
    std::vector<cd> freq(static_cast<std::size_t>(config.n_fft), cd{0.0, 0.0});

    std::size_t cursor = 0;
    for (int g = 0; g < config.groups; ++g) {
        std::uint64_t pattern = 0;
        for (int b = 0; b < b1; ++b) pattern = pattern << 1 | bits[cursor++];
        const std::vector<int> indices = select_indices(pattern, config);
        for (int slot = 0; slot < config.active; ++slot) {
            const cd symbol = qam_map(bits.subspan(cursor, static_cast<std::size_t>(bps)),
                                      config.mod_order);
            cursor += static_cast<std::size_t>(bps);
            freq[static_cast<std::size_t>(g * ng + indices[static_cast<std::size_t>(slot)])] = symbol;
        }
    }
    return freq;
}

// Unitary IFFT plus cyclic prefix.
inline std::vector<cd> ofdm_modulate(std::span<const cd> freq, int n_cp) {
    const int n = static_cast<int>(freq.size());
    std::vector<cd> core(freq.begin(), freq.end());
    fft::transform_1d(core.data(), n, fft::kBackward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (cd& v : core) v *= scale;

    std::vector<cd> time;
    time.reserve(static_cast<std::size_t>(n + n_cp));
    time.insert(time.end(), core.end() - n_cp, core.end());
    time.insert(time.end(), core.begin(), core.end());
    return time;
}

inline OfdmSymbol im_encode(std::span<const std::uint8_t> bits, const OfdmImConfig& config) {
    OfdmSymbol symbol;
    symbol.freq = im_encode_freq(bits, config);
    symbol.time = ofdm_modulate(symbol.freq, config.n_cp);
    return symbol;
}

// Prefix removal plus unitary FFT; exact inverse of ofdm_modulate.
inline std::vector<cd> ofdm_demodulate(std::span<const cd> time, const OfdmImConfig& config) {
    if (static_cast<int>(time.size()) != config.n_fft + config.n_cp)
        throw std::invalid_argument("ofdm_demodulate: expected " +
                                    std::to_string(config.n_fft + config.n_cp) + " samples");
    std::vector<cd> freq(time.begin() + config.n_cp, time.end());
    fft::transform_1d(freq.data(), config.n_fft, fft::kForward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.n_fft));
    for (cd& v : freq) v *= scale;
    return freq;
}

// ---- detection ---------------------------------------------------------------

struct GroupDecision {
    std::uint64_t pattern = 0;
    std::vector<int> indices;
    std::vector<cd> symbols;
    std::vector<std::uint8_t> bits;
    double metric = 0.0;
};

// Joint maximum-likelihood decision for one group: exhaustive argmin of
// ||y - h x||^2 over the 2^b1 M^K candidate sub-blocks, with the channel
// gains h known at the receiver. Ties resolve to the lowest enumeration
// index (pattern-major, then symbol bits ascending).
inline GroupDecision ml_detect(std::span<const cd> y, std::span<const cd> h,
                               const OfdmImConfig& config) {
    const int ng = config.group_size();
    if (static_cast<int>(y.size()) != ng || static_cast<int>(h.size()) != ng)
        throw std::invalid_argument("ml_detect: group size mismatch");
    if (config.candidates_per_group() > 65536)
        throw std::invalid_argument("ml_detect: candidate set too large for exhaustive search");

    const std::vector<cd> alphabet = qam_alphabet(config.mod_order);
    const int b1 = config.index_bits();
    const int bps = config.bits_per_symbol();
    const std::uint64_t n_patterns = std::uint64_t{1} << b1;
    std::uint64_t n_symbol_combos = 1;
    for (int i = 0; i < config.active; ++i)
        n_symbol_combos *= static_cast<std::uint64_t>(config.mod_order);

    double base = 0.0;
    for (const cd& v : y) base += std::norm(v);

    GroupDecision best;
    best.metric = std::numeric_limits<double>::infinity();
    std::vector<int> slots(static_cast<std::size_t>(config.active));
    for (std::uint64_t pattern = 0; pattern < n_patterns; ++pattern) {
        const std::vector<int> indices = select_indices(pattern, config);
        for (std::uint64_t combo = 0; combo < n_symbol_combos; ++combo) {
            std::uint64_t rest = combo;
            for (int slot = config.active - 1; slot >= 0; --slot) {
                slots[static_cast<std::size_t>(slot)] =
                    static_cast<int>(rest % static_cast<std::uint64_t>(config.mod_order));
                rest /= static_cast<std::uint64_t>(config.mod_order);
            }
            double metric = base;
            for (int slot = 0; slot < config.active; ++slot) {
                const int idx = indices[static_cast<std::size_t>(slot)];
                const cd expected = h[static_cast<std::size_t>(idx)] *
                                    alphabet[static_cast<std::size_t>(slots[static_cast<std::size_t>(slot)])];
                metric += std::norm(y[static_cast<std::size_t>(idx)] - expected) -
                          std::norm(y[static_cast<std::size_t>(idx)]);
            }
            if (metric < best.metric) {
                best.metric = metric;
                best.pattern = pattern;
                best.indices = indices;
                best.symbols.clear();
                for (int slot = 0; slot < config.active; ++slot)
                    best.symbols.push_back(
                        alphabet[static_cast<std::size_t>(slots[static_cast<std::size_t>(slot)])]);
            }
        }
    }

    best.bits.resize(static_cast<std::size_t>(config.bits_per_group()));
    std::size_t cursor = 0;
    for (int b = b1 - 1; b >= 0; --b) best.bits[cursor++] = static_cast<std::uint8_t>(best.pattern >> b & 1);
    for (const cd& s : best.symbols) {
        qam_demap(s, config.mod_order, best.bits.data() + cursor);
        cursor += static_cast<std::size_t>(bps);
    }
    return best;
}

// Whole-block detection. When no index bits are in play (plain OFDM) the
// group metric separates per subcarrier and a nearest-neighbor decision per
// carrier is the exact ML answer, so take that fast path.
inline void detect_block(std::span<const cd> freq, std::span<const cd> h,
                         const OfdmImConfig& config, std::uint8_t* bits_out) {
    const int ng = config.group_size();
    const int bps = config.bits_per_symbol();
    if (config.index_bits() == 0 && config.active == ng) {
        const std::vector<cd> alphabet = qam_alphabet(config.mod_order);
        for (int c = 0; c < config.n_fft; ++c) {
            double best_metric = std::numeric_limits<double>::infinity();
            int best_idx = 0;
            for (int a = 0; a < config.mod_order; ++a) {
                const double metric =
                    std::norm(freq[static_cast<std::size_t>(c)] -
                              h[static_cast<std::size_t>(c)] * alphabet[static_cast<std::size_t>(a)]);
                if (metric < best_metric) {
                    best_metric = metric;
                    best_idx = a;
                }
            }
            for (int b = 0; b < bps; ++b)
                bits_out[c * bps + b] = static_cast<std::uint8_t>(best_idx >> (bps - 1 - b) & 1);
        }
        return;
    }
    for (int g = 0; g < config.groups; ++g) {
        const auto yg = freq.subspan(static_cast<std::size_t>(g * ng), static_cast<std::size_t>(ng));
        const auto hg = h.subspan(static_cast<std::size_t>(g * ng), static_cast<std::size_t>(ng));
        const GroupDecision decision = ml_detect(yg, hg, config);
        std::copy(decision.bits.begin(), decision.bits.end(),
                  bits_out + static_cast<std::size_t>(g) * decision.bits.size());
    }
}

// ---- analytics ----------------------------------------------------------------

// Bits carried per OFDM block divided by occupied time-bandwidth product.
inline double spectral_efficiency(const OfdmImConfig& config, double t_fft, double t_cp,
                                  double bandwidth) {
    if (t_fft <= 0.0 || t_cp < 0.0 || bandwidth <= 0.0)
        throw std::invalid_argument("spectral_efficiency: need positive durations and bandwidth");
    return config.bits_per_block() / ((t_fft + t_cp) * bandwidth);
}

// Rate relative to conventional OFDM at the same FFT size and constellation.
inline double se_ratio(const OfdmImConfig& config) {
    return static_cast<double>(config.bits_per_block()) /
           (static_cast<double>(config.n_fft) * config.bits_per_symbol());
}

inline int bits_per_group_for(int group_size, int k, int mod_order) {
    return int_log2(binomial(group_size, k)) + k * int_log2(static_cast<std::uint64_t>(mod_order));
}

// Closed-form approximation of the rate-maximizing number of active
// carriers per group; within one carrier of the exhaustive argmax.
inline int k_opt(int n_fft, int groups, int mod_order) {
    if (n_fft <= 0 || groups <= 0 || n_fft % groups != 0)
        throw std::invalid_argument("k_opt: groups must divide n_fft");
    validate_mod_order(mod_order);
    const int ng = n_fft / groups;
    const auto m = static_cast<std::uint64_t>(mod_order);
    const auto value = static_cast<int>(m * static_cast<std::uint64_t>(n_fft) /
                                        (static_cast<std::uint64_t>(groups) * (m + 1)));
    return std::max(1, std::min(ng, value));
}

// ---- external bit-stream convention ------------------------------------------

inline std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return bytes;
}

inline std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes,
                                             std::size_t bit_count) {
    if (bit_count > bytes.size() * 8) throw std::invalid_argument("unpack_bits: not enough bytes");
    std::vector<std::uint8_t> bits(bit_count);
    for (std::size_t i = 0; i < bit_count; ++i)
        bits[i] = static_cast<std::uint8_t>(bytes[i / 8] >> (7 - i % 8) & 1u);
    return bits;
}

} // namespace oamfso
