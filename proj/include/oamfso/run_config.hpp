#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oamfso/common.hpp"
#include "oamfso/link_sim.hpp"
#include "oamfso/ofdm_im.hpp"
#include "oamfso/turbulence.hpp"

namespace oamfso {

// Experiment configuration, shared by the CLI and the sidecar files every
// run writes next to its artifacts. A sidecar re-loaded with --config
// reproduces the run bit-identically, so parsing is fail-closed: unknown
// keys are rejected rather than silently ignored.

namespace detail {

class StrictObject {
public:
    StrictObject(const nlohmann::json& j, std::string path) : json_(j), path_(std::move(path)) {
        if (!json_.is_object()) throw config_error(path_ + ": expected a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (json_.contains(key)) {
            try {
                out = json_.at(key).get<T>();
            } catch (const nlohmann::json::exception& e) {
                throw config_error(path_ + "." + key + ": " + e.what());
            }
            seen_.insert(key);
        }
    }

    bool has(const char* key) {
        return json_.contains(key);
    }

    const nlohmann::json* section(const char* key) {
        if (!json_.contains(key)) return nullptr;
        seen_.insert(key);
        return &json_.at(key);
    }

    void finish() const {
        for (const auto& item : json_.items())
            if (!seen_.contains(item.key()))
                throw config_error("unknown configuration key '" + path_ + "." + item.key() + "'");
    }

private:
    const nlohmann::json& json_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace detail

struct GridConfig {
    int n_samples = 512;
    double dx = 5e-3;
    double wavelength = 1550e-9;
};

struct BeamConfig {
    double w0 = 0.016;
    std::vector<int> tx_modes{+1, +3};
    std::vector<int> rx_modes{-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5};
};

struct LinkConfig {
    std::vector<double> snr_db{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    std::uint64_t trials = 20000;
    GainAssignment assignment = GainAssignment::Iid;
    bool crosstalk = false;
    int ensemble_size = 500;
    double capacity_snr_db = 15.0;
    std::uint64_t bound_samples = 2000;
    std::string ensemble_path;
};

struct SeConfig {
    std::vector<int> groups{2, 4, 8, 16, 32};
};

struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    std::string out = "out";
    unsigned workers = 0; // 0 = machine parallelism
    std::string regime = "weak";

    GridConfig grid;
    BeamConfig beam;
    TurbulenceParams turbulence{1e-14, 5e-3, 20.0, 20, 50.0};
    OfdmImConfig ofdm;
    SeConfig se;
    LinkConfig link;

    // weak/strong presets pin cn2; "none" disables turbulence entirely.
    void apply_regime(const std::string& name) {
        if (name == "weak")
            turbulence.cn2 = 1e-14;
        else if (name == "strong")
            turbulence.cn2 = 1e-13;
        else if (name != "none")
            throw config_error("regime must be one of none, weak, strong");
        regime = name;
    }

    bool turbulence_enabled() const { return regime != "none"; }

    SimulationGrid make_grid() const {
        return SimulationGrid(grid.n_samples, grid.dx, grid.wavelength);
    }
};

inline std::string to_string(GainAssignment a) {
    return a == GainAssignment::Block ? "block" : "iid";
}

inline std::string to_string(IndexMapper m) {
    return m == IndexMapper::Table ? "table" : "combinadic";
}

inline nlohmann::json run_config_to_json(const RunConfig& config) {
    return nlohmann::json{
        {"experiment", config.experiment},
        {"seed", config.seed},
        {"out", config.out},
        {"workers", config.workers},
        {"regime", config.regime},
        {"grid",
         {{"n_samples", config.grid.n_samples},
          {"dx", config.grid.dx},
          {"wavelength", config.grid.wavelength}}},
        {"beam",
         {{"w0", config.beam.w0},
          {"tx_modes", config.beam.tx_modes},
          {"rx_modes", config.beam.rx_modes}}},
        {"turbulence",
         {{"cn2", config.turbulence.cn2},
          {"l0", config.turbulence.l0},
          {"outer_scale", config.turbulence.outer_scale},
          {"screen_count", config.turbulence.screen_count},
          {"screen_spacing", config.turbulence.screen_spacing}}},
        {"ofdm",
         {{"n_fft", config.ofdm.n_fft},
          {"n_cp", config.ofdm.n_cp},
          {"groups", config.ofdm.groups},
          {"active_k", config.ofdm.active},
          {"mod_order", config.ofdm.mod_order},
          {"mapper", to_string(config.ofdm.mapper)}}},
        {"se", {{"groups", config.se.groups}}},
        {"link",
         {{"snr_db", config.link.snr_db},
          {"trials", config.link.trials},
          {"assignment", to_string(config.link.assignment)},
          {"crosstalk", config.link.crosstalk},
          {"ensemble_size", config.link.ensemble_size},
          {"capacity_snr_db", config.link.capacity_snr_db},
          {"bound_samples", config.link.bound_samples},
          {"ensemble_path", config.link.ensemble_path}}}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig config;
    detail::StrictObject root(j, "config");
    root.get("experiment", config.experiment);
    root.get("seed", config.seed);
    root.get("out", config.out);
    root.get("workers", config.workers);

    std::string regime = config.regime;
    root.get("regime", regime);

    if (const nlohmann::json* grid = root.section("grid")) {
        detail::StrictObject s(*grid, "grid");
        s.get("n_samples", config.grid.n_samples);
        s.get("dx", config.grid.dx);
        s.get("wavelength", config.grid.wavelength);
        s.finish();
    }
    if (const nlohmann::json* beam = root.section("beam")) {
        detail::StrictObject s(*beam, "beam");
        s.get("w0", config.beam.w0);
        s.get("tx_modes", config.beam.tx_modes);
        s.get("rx_modes", config.beam.rx_modes);
        s.finish();
    }
    bool explicit_cn2 = false;
    if (const nlohmann::json* turbulence = root.section("turbulence")) {
        detail::StrictObject s(*turbulence, "turbulence");
        explicit_cn2 = s.has("cn2");
        s.get("cn2", config.turbulence.cn2);
        s.get("l0", config.turbulence.l0);
        s.get("outer_scale", config.turbulence.outer_scale);
        s.get("screen_count", config.turbulence.screen_count);
        s.get("screen_spacing", config.turbulence.screen_spacing);
        s.finish();
    }
    if (const nlohmann::json* ofdm = root.section("ofdm")) {
        detail::StrictObject s(*ofdm, "ofdm");
        s.get("n_fft", config.ofdm.n_fft);
        s.get("n_cp", config.ofdm.n_cp);
        s.get("groups", config.ofdm.groups);
        s.get("active_k", config.ofdm.active);
        s.get("mod_order", config.ofdm.mod_order);
        std::string mapper;
        s.get("mapper", mapper);
        if (mapper.empty())
            config.ofdm.mapper =
                OfdmImConfig::default_mapper(config.ofdm.active, config.ofdm.group_size());
        else if (mapper == "table")
            config.ofdm.mapper = IndexMapper::Table;
        else if (mapper == "combinadic")
            config.ofdm.mapper = IndexMapper::Combinadic;
        else
            throw config_error("ofdm.mapper must be \"table\" or \"combinadic\"");
        s.finish();
    }
    if (const nlohmann::json* se = root.section("se")) {
        detail::StrictObject s(*se, "se");
        s.get("groups", config.se.groups);
        s.finish();
    }
    if (const nlohmann::json* link = root.section("link")) {
        detail::StrictObject s(*link, "link");
        s.get("snr_db", config.link.snr_db);
        s.get("trials", config.link.trials);
        std::string assignment;
        s.get("assignment", assignment);
        if (!assignment.empty()) {
            if (assignment == "block")
                config.link.assignment = GainAssignment::Block;
            else if (assignment == "iid")
                config.link.assignment = GainAssignment::Iid;
            else
                throw config_error("link.assignment must be \"block\" or \"iid\"");
        }
        s.get("crosstalk", config.link.crosstalk);
        s.get("ensemble_size", config.link.ensemble_size);
        s.get("capacity_snr_db", config.link.capacity_snr_db);
        s.get("bound_samples", config.link.bound_samples);
        s.get("ensemble_path", config.link.ensemble_path);
        s.finish();
    }
    root.finish();

    // regime presets apply unless the file pinned cn2 itself
    const double custom_cn2 = config.turbulence.cn2;
    config.apply_regime(regime);
    if (explicit_cn2) config.turbulence.cn2 = custom_cn2;

    try {
        config.ofdm.validate();
        if (config.turbulence_enabled()) config.turbulence.validate();
        config.make_grid();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return config;
}

} // namespace oamfso
