#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oamfso/propagation.hpp"

namespace oamfso {

// Channel-ensemble container: JSON lines, one realization per line. This is
// the hand-off format between the wave-optics stage and the modem stage, so
// ensembles can be generated once and reused across link experiments.

inline nlohmann::json channel_to_json(const ChannelRealization& realization) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t r = 0; r < realization.rx_modes.size(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t t = 0; t < realization.tx_modes.size(); ++t) {
            const cd v = realization.at(static_cast<int>(r), static_cast<int>(t));
            row.push_back({v.real(), v.imag()});
        }
        entries.push_back(std::move(row));
    }
    return nlohmann::json{{"seed", realization.master_seed},
                          {"trial", realization.trial},
                          {"cn2", realization.cn2},
                          {"modes", {{"tx", realization.tx_modes}, {"rx", realization.rx_modes}}},
                          {"H", std::move(entries)}};
}

inline ChannelRealization channel_from_json(const nlohmann::json& j) {
    ChannelRealization realization;
    realization.master_seed = j.at("seed").get<std::uint64_t>();
    realization.trial = j.at("trial").get<std::uint64_t>();
    realization.cn2 = j.at("cn2").get<double>();
    realization.tx_modes = j.at("modes").at("tx").get<std::vector<int>>();
    realization.rx_modes = j.at("modes").at("rx").get<std::vector<int>>();
    const auto& rows = j.at("H");
    if (rows.size() != realization.rx_modes.size())
        throw std::runtime_error("channel record: H row count != rx mode count");
    realization.matrix.reserve(rows.size() * realization.tx_modes.size());
    for (const auto& row : rows) {
        if (row.size() != realization.tx_modes.size())
            throw std::runtime_error("channel record: H column count != tx mode count");
        for (const auto& entry : row)
            realization.matrix.emplace_back(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
    return realization;
}

inline void write_channel_ensemble(const std::string& path,
                                   const std::vector<ChannelRealization>& ensemble) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const ChannelRealization& realization : ensemble)
        out << channel_to_json(realization).dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<ChannelRealization> read_channel_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<ChannelRealization> ensemble;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ensemble.push_back(channel_from_json(nlohmann::json::parse(line)));
    }
    return ensemble;
}

} // namespace oamfso
