// config.hpp
// Flat key=value configuration files. Unknown keys are rejected so typos
// surface as configuration errors. '#' starts a comment.

#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqtqkd/adversary.hpp"
#include "pqtqkd/protocol.hpp"

namespace pqtqkd {

struct SimulationConfig {
    ProtocolConfig protocol{
        .channel_params = {ChannelParam(0.5), ChannelParam(0.9)},
        .num_rounds = 100000,
    };
    AttackModel attack;
    bool charlie_discloses = true;

    // Eve's guess pool defaults to the public channel parameters.
    AttackModel resolved_attack() const {
        AttackModel a = attack;
        if (a.kind != AttackModel::Kind::Passive && a.guess_pool.empty())
            a.guess_pool = protocol.channel_params;
        return a;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<ChannelParam> parse_param_list(const std::string& value) {
    std::vector<ChannelParam> params;
    std::istringstream iss(value);
    std::string item;
    while (std::getline(iss, item, ','))
        params.emplace_back(std::stod(trim(item)));
    return params;
}

inline bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("expected boolean, got '" + value + "'");
}

}  // namespace detail

inline void apply_config_line(SimulationConfig& cfg, const std::string& key,
                              const std::string& value) {
    if (key == "channel_params") {
        cfg.protocol.channel_params = detail::parse_param_list(value);
    } else if (key == "rounds") {
        cfg.protocol.num_rounds = std::stoull(value);
    } else if (key == "disclosure_fraction") {
        cfg.protocol.disclosure_fraction = std::stod(value);
    } else if (key == "mode") {
        if (value == "standard")
            cfg.protocol.mode = ProtocolConfig::Mode::Standard;
        else if (value == "controlled")
            cfg.protocol.mode = ProtocolConfig::Mode::Controlled;
        else if (value == "repeater")
            cfg.protocol.mode = ProtocolConfig::Mode::Repeater;
        else
            throw std::invalid_argument("unknown mode '" + value + "'");
    } else if (key == "repeater_links") {
        cfg.protocol.repeater_links = detail::parse_param_list(value);
    } else if (key == "seed") {
        cfg.protocol.seed = std::stoull(value);
    } else if (key == "withhold_station") {
        cfg.protocol.withholding_station = std::stoi(value);
    } else if (key == "attack") {
        if (value == "passive")
            cfg.attack.kind = AttackModel::Kind::Passive;
        else if (value == "intercept")
            cfg.attack.kind = AttackModel::Kind::InterceptReteleport;
        else if (value == "fake_source")
            cfg.attack.kind = AttackModel::Kind::FakeSource;
        else
            throw std::invalid_argument("unknown attack '" + value + "'");
    } else if (key == "guess_pool") {
        cfg.attack.guess_pool = detail::parse_param_list(value);
    } else if (key == "eve_seed") {
        cfg.attack.eve_seed = std::stoull(value);
    } else if (key == "charlie_discloses") {
        cfg.charlie_discloses = detail::parse_bool(value);
    } else {
        throw std::invalid_argument("unknown configuration key '" + key + "'");
    }
}

inline SimulationConfig parse_config(std::istream& is) {
    SimulationConfig cfg;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed line '" + line + "'");
        apply_config_line(cfg, detail::trim(line.substr(0, eq)),
                          detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline SimulationConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open config '" + path + "'");
    return parse_config(in);
}

}  // namespace pqtqkd
