#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "amisec/auth/auth.hpp"
#include "amisec/core/wire.hpp"
#include "amisec/localization/pso.hpp"
#include "amisec/localization/rss.hpp"

namespace amisec {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AuthMode { Off, Monitor, Enforce };

inline const char* auth_mode_name(AuthMode m) {
    switch (m) {
        case AuthMode::Off: return "off";
        case AuthMode::Monitor: return "monitor";
        case AuthMode::Enforce: return "enforce";
    }
    return "off";
}

struct AdversarySpec {
    enum class Kind { RogueMeter, Eavesdropper, Replayer };
    Kind kind = Kind::RogueMeter;
    Tick activation = 0;       // ticks
    // RogueMeter
    double x = 0.0, y = 0.0;
    MeterId spoof_of;          // identity it claims
    double rate_s = 2.0;       // seconds between frames
    uint16_t size_bytes = 3;   // payload bytes per frame
    int frames = 20;
    // Eavesdropper / Replayer
    MeterId link_a, link_b;
    double delay_s = 10.0;     // replayer re-injection delay
};

struct ExplicitNode {
    uint32_t id = 0;
    double x = 0.0, y = 0.0;
};

struct ScenarioConfig {
    uint64_t seed = 1;
    int grid_rows = 2;
    int grid_cols = 5;
    double grid_spacing_m = 50.0;
    double radio_range_m = 80.0;
    // Non-empty `nodes` replaces the grid; non-empty `edges` replaces
    // range-based mesh linking.
    std::vector<ExplicitNode> nodes;
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    int sessions_per_meter = 10;
    uint32_t data_bits = 256;
    uint16_t block_count = 32;
    uint32_t key_bits = 256;
    double report_interval_s = 60.0;
    double report_jitter_frac = 0.2;
    double frame_gap_s = 2.0;
    double frame_gap_jitter_frac = 0.1;
    double mesh_delay_ms = 5.0;
    double backhaul_delay_ms = 2.0;
    double loss = 0.0;               // mesh link loss probability
    double session_timeout_s = 300.0;
    double burst_timeout_s = 60.0;   // gaps longer than this reset cadence tracking
    AuthMode auth_mode = AuthMode::Off;
    AuthConfig auth{};
    RssConfig rss{2.93, 2.0, 30.0};
    int pso_swarm = 12;
    int pso_iters = 30;
    int quarantine_alerts = 5;       // alerts from one claimed sender before the
    double quarantine_window_s = 600.0;  // control center quarantines it; 0 = off
    std::vector<AdversarySpec> adversaries;

    int meter_count() const {
        return nodes.empty() ? grid_rows * grid_cols
                             : static_cast<int>(std::count_if(
                                   nodes.begin(), nodes.end(),
                                   [](const ExplicitNode& n) { return n.id >= kFirstMeterId; }));
    }

    void validate() const {
        if (nodes.empty()) {
            if (grid_rows < 1 || grid_cols < 1)
                throw ConfigError("config key 'grid_rows'/'grid_cols': must be >= 1");
            if (grid_spacing_m <= 0)
                throw ConfigError("config key 'grid_spacing_m': must be > 0");
            if (radio_range_m < grid_spacing_m)
                throw ConfigError("config key 'radio_range_m': must reach grid neighbours");
        } else {
            if (meter_count() < 1)
                throw ConfigError("config key 'nodes': needs at least one meter id >= 10");
            for (const auto& n : nodes)
                if (n.id != kConcentrator.id && n.id < kFirstMeterId)
                    throw ConfigError("config key 'nodes[].id': meters are >= 10 (3 = concentrator)");
            for (const auto& [a, b] : edges) {
                auto known = [this](uint32_t id) {
                    return std::any_of(nodes.begin(), nodes.end(),
                                       [id](const ExplicitNode& n) { return n.id == id; });
                };
                if (!known(a) || !known(b))
                    throw ConfigError("config key 'edges': endpoint not in nodes list");
            }
        }
        if (sessions_per_meter < 0) throw ConfigError("config key 'sessions_per_meter': must be >= 0");
        if (block_count < 2) throw ConfigError("config key 'block_count': must be >= 2");
        if (data_bits % 8 != 0 || data_bits == 0) throw ConfigError("config key 'data_bits': whole bytes required");
        if (key_bits != 64 && key_bits != 256 && key_bits != 512)
            throw ConfigError("config key 'key_bits': supported sizes are 64, 256, 512");
        if (loss < 0.0 || loss >= 1.0) throw ConfigError("config key 'loss': must be in [0, 1)");
        if (!(auth.nu > 0.0 && auth.nu <= 1.0)) throw ConfigError("config key 'auth.nu': must be in (0, 1]");
        if (frame_gap_s <= 0) throw ConfigError("config key 'frame_gap_s': must be > 0");
        if (report_interval_s <= 0) throw ConfigError("config key 'report_interval_s': must be > 0");
        for (const auto& adv : adversaries) {
            if (adv.kind == AdversarySpec::Kind::RogueMeter && !adv.spoof_of.is_meter())
                throw ConfigError("config key 'adversaries[].spoof_of': must be a meter id (>= 10)");
        }
    }
};

namespace detail {

inline size_t byte_offset_to_line(const std::string& text, size_t offset) {
    size_t line = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config key '") + key + "': wrong type");
    }
}

}  // namespace detail

inline ScenarioConfig parse_scenario_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error at line " +
                          std::to_string(detail::byte_offset_to_line(text, e.byte)) + ": " +
                          e.what());
    }
    ScenarioConfig c;
    c.seed = detail::get_or<uint64_t>(j, "seed", c.seed);
    c.grid_rows = detail::get_or<int>(j, "grid_rows", c.grid_rows);
    c.grid_cols = detail::get_or<int>(j, "grid_cols", c.grid_cols);
    c.grid_spacing_m = detail::get_or<double>(j, "grid_spacing_m", c.grid_spacing_m);
    c.radio_range_m = detail::get_or<double>(j, "radio_range_m", c.radio_range_m);
    c.sessions_per_meter = detail::get_or<int>(j, "sessions_per_meter", c.sessions_per_meter);
    c.data_bits = detail::get_or<uint32_t>(j, "data_bits", c.data_bits);
    c.block_count = detail::get_or<uint16_t>(j, "block_count", c.block_count);
    c.key_bits = detail::get_or<uint32_t>(j, "key_bits", c.key_bits);
    c.report_interval_s = detail::get_or<double>(j, "report_interval_s", c.report_interval_s);
    c.report_jitter_frac = detail::get_or<double>(j, "report_jitter_frac", c.report_jitter_frac);
    c.frame_gap_s = detail::get_or<double>(j, "frame_gap_s", c.frame_gap_s);
    c.frame_gap_jitter_frac =
        detail::get_or<double>(j, "frame_gap_jitter_frac", c.frame_gap_jitter_frac);
    c.mesh_delay_ms = detail::get_or<double>(j, "mesh_delay_ms", c.mesh_delay_ms);
    c.backhaul_delay_ms = detail::get_or<double>(j, "backhaul_delay_ms", c.backhaul_delay_ms);
    c.loss = detail::get_or<double>(j, "loss", c.loss);
    c.session_timeout_s = detail::get_or<double>(j, "session_timeout_s", c.session_timeout_s);
    c.burst_timeout_s = detail::get_or<double>(j, "burst_timeout_s", c.burst_timeout_s);
    c.quarantine_alerts = detail::get_or<int>(j, "quarantine_alerts", c.quarantine_alerts);
    c.quarantine_window_s =
        detail::get_or<double>(j, "quarantine_window_s", c.quarantine_window_s);

    std::string mode = detail::get_or<std::string>(j, "auth_mode", "off");
    if (mode == "off") c.auth_mode = AuthMode::Off;
    else if (mode == "monitor") c.auth_mode = AuthMode::Monitor;
    else if (mode == "enforce") c.auth_mode = AuthMode::Enforce;
    else throw ConfigError("config key 'auth_mode': expected off|monitor|enforce");

    if (j.contains("auth")) {
        const auto& a = j.at("auth");
        c.auth.nu = detail::get_or<double>(a, "nu", c.auth.nu);
        c.auth.kernel_sigma = detail::get_or<double>(a, "kernel_sigma", c.auth.kernel_sigma);
        c.auth.kernel_sigma_mult =
            detail::get_or<double>(a, "kernel_sigma_mult", c.auth.kernel_sigma_mult);
        c.auth.min_records = detail::get_or<size_t>(a, "min_records", c.auth.min_records);
        c.auth.target_records =
            detail::get_or<size_t>(a, "target_records", c.auth.target_records);
        c.auth.low_confidence_below =
            detail::get_or<size_t>(a, "low_confidence_below", c.auth.low_confidence_below);
    }
    if (j.contains("rss")) {
        const auto& r = j.at("rss");
        c.rss.gamma = detail::get_or<double>(r, "gamma", c.rss.gamma);
        c.rss.sigma_l = detail::get_or<double>(r, "sigma_db", c.rss.sigma_l);
        c.rss.c_true = detail::get_or<double>(r, "tx_power_db", c.rss.c_true);
    }
    if (j.contains("pso")) {
        const auto& p = j.at("pso");
        c.pso_swarm = detail::get_or<int>(p, "swarm", c.pso_swarm);
        c.pso_iters = detail::get_or<int>(p, "iters", c.pso_iters);
    }
    if (j.contains("nodes")) {
        for (const auto& n : j.at("nodes")) {
            ExplicitNode node;
            node.id = detail::get_or<uint32_t>(n, "id", 0);
            node.x = detail::get_or<double>(n, "x", 0.0);
            node.y = detail::get_or<double>(n, "y", 0.0);
            c.nodes.push_back(node);
        }
    }
    if (j.contains("edges")) {
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2)
                throw ConfigError("config key 'edges': expected pairs [a, b]");
            c.edges.emplace_back(e.at(0).get<uint32_t>(), e.at(1).get<uint32_t>());
        }
    }
    if (j.contains("adversaries")) {
        for (const auto& a : j.at("adversaries")) {
            AdversarySpec adv;
            std::string kind = detail::get_or<std::string>(a, "kind", "");
            if (kind == "rogue_meter") adv.kind = AdversarySpec::Kind::RogueMeter;
            else if (kind == "eavesdropper") adv.kind = AdversarySpec::Kind::Eavesdropper;
            else if (kind == "replayer") adv.kind = AdversarySpec::Kind::Replayer;
            else throw ConfigError("config key 'adversaries[].kind': expected "
                                   "rogue_meter|eavesdropper|replayer");
            adv.activation = static_cast<Tick>(
                detail::get_or<double>(a, "activation_s", 0.0) * kTicksPerSecond);
            adv.x = detail::get_or<double>(a, "x", 0.0);
            adv.y = detail::get_or<double>(a, "y", 0.0);
            adv.spoof_of = MeterId{detail::get_or<uint32_t>(a, "spoof_of", 0)};
            adv.rate_s = detail::get_or<double>(a, "rate_s", adv.rate_s);
            adv.size_bytes = detail::get_or<uint16_t>(a, "size_bytes", adv.size_bytes);
            adv.frames = detail::get_or<int>(a, "frames", adv.frames);
            if (a.contains("link")) {
                const auto& l = a.at("link");
                if (!l.is_array() || l.size() != 2)
                    throw ConfigError("config key 'adversaries[].link': expected [a, b]");
                adv.link_a = MeterId{l.at(0).get<uint32_t>()};
                adv.link_b = MeterId{l.at(1).get<uint32_t>()};
            }
            adv.delay_s = detail::get_or<double>(a, "delay_s", adv.delay_s);
            c.adversaries.push_back(adv);
        }
    }
    c.validate();
    return c;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_json(ss.str());
}

inline std::string scenario_to_params_text(const ScenarioConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "seed=" << c.seed << "\n"
       << "grid=" << c.grid_rows << "x" << c.grid_cols << " spacing=" << c.grid_spacing_m
       << "\n"
       << "radio_range_m=" << c.radio_range_m << "\n"
       << "sessions_per_meter=" << c.sessions_per_meter << "\n"
       << "data_bits=" << c.data_bits << " block_count=" << c.block_count
       << " key_bits=" << c.key_bits << "\n"
       << "report_interval_s=" << c.report_interval_s << " frame_gap_s=" << c.frame_gap_s
       << "\n"
       << "loss=" << c.loss << "\n"
       << "auth_mode=" << auth_mode_name(c.auth_mode) << " nu=" << c.auth.nu << "\n"
       << "rss gamma=" << c.rss.gamma << " sigma_db=" << c.rss.sigma_l
       << " tx_power_db=" << c.rss.c_true << "\n"
       << "adversaries=" << c.adversaries.size() << "\n";
    return os.str();
}

}  // namespace amisec
