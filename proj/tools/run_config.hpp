#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spelke/common.hpp"
#include "spelke/fields.hpp"
#include "spelke/metrics.hpp"
#include "spelke/scene_gen.hpp"

namespace spelke::cli {

// Full run configuration: JSON file values override the built-in
// defaults, command-line flags override the file.
struct RunConfig {
    // codebook / vocabulary
    double max_magnitude = 8.0;
    std::uint32_t bins_per_axis = 17;
    std::uint32_t rgb_content_size = 0;

    // probing
    std::uint32_t directions = 8;      // R
    std::uint32_t rollouts = 3;        // T
    double magnitude = 0.0;            // 0 means max_magnitude / 2
    double tau = 0.5;                  // motion-token threshold, pixels
    double tau_p = 0.5;                // affordance threshold for poke sampling
    std::uint32_t poke_points = 16;    // N
    std::uint32_t min_separation = 0;  // 0 means grid width / 8
    DecodeMode mode = DecodeMode::sequential;
    bool component_filter = true;

    // evaluation
    std::vector<double> thresholds = default_iou_thresholds();
    bool per_image = false;

    // scene generation
    SceneGenConfig scene_gen;
    std::uint32_t scene_count = 1;

    // runtime
    std::uint32_t jobs = 1;
    std::uint32_t grid_cap = 64;  // guard for dense per-location probing
    bool png = false;

    double poke_magnitude() const {
        return magnitude > 0.0 ? magnitude : max_magnitude / 2.0;
    }
    std::uint32_t separation_for(const GridShape& grid) const {
        return min_separation > 0 ? min_separation : std::max(1u, grid.width / 8);
    }
};

// "a:b:step" inclusive of both endpoints (within 1e-9 slack).
inline std::vector<double> parse_thresholds(const std::string& spec) {
    const auto first = spec.find(':');
    const auto second = spec.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos)
        throw validation_error("thresholds must be given as a:b:step");
    try {
        const double a = std::stod(spec.substr(0, first));
        const double b = std::stod(spec.substr(first + 1, second - first - 1));
        const double step = std::stod(spec.substr(second + 1));
        if (!(step > 0.0) || b < a) throw validation_error("bad threshold range " + spec);
        std::vector<double> out;
        for (int k = 0;; ++k) {
            const double v = a + k * step;
            if (v > b + 1e-9) break;
            out.push_back(v);
        }
        if (out.empty()) throw validation_error("threshold range is empty");
        return out;
    } catch (const std::invalid_argument&) {
        throw validation_error("cannot parse thresholds spec " + spec);
    }
}

inline void apply_scene_gen_json(SceneGenConfig& gen, const nlohmann::json& j) {
    if (j.contains("height") || j.contains("width"))
        gen.grid = GridShape(j.value("height", gen.grid.height), j.value("width", gen.grid.width));
    if (j.contains("group_count")) {
        gen.group_count_min = j["group_count"][0].get<std::uint32_t>();
        gen.group_count_max = j["group_count"][1].get<std::uint32_t>();
    }
    if (j.contains("group_size")) {
        gen.group_size_min = j["group_size"][0].get<std::uint32_t>();
        gen.group_size_max = j["group_size"][1].get<std::uint32_t>();
    }
    if (j.contains("mobility")) {
        gen.mobility_min = j["mobility"][0].get<double>();
        gen.mobility_max = j["mobility"][1].get<double>();
    }
    gen.support_stack_prob = j.value("support_stack_prob", gen.support_stack_prob);
    gen.articulation_prob = j.value("articulation_prob", gen.articulation_prob);
    gen.noise_eps = j.value("noise_eps", gen.noise_eps);
    gen.placement_margin = j.value("placement_margin", gen.placement_margin);
}

inline void apply_config_json(RunConfig& config, const nlohmann::json& j) {
    if (j.contains("codebook")) {
        const auto& cb = j["codebook"];
        config.max_magnitude = cb.value("max_magnitude", config.max_magnitude);
        config.bins_per_axis = cb.value("bins_per_axis", config.bins_per_axis);
    }
    if (j.contains("vocab"))
        config.rgb_content_size = j["vocab"].value("rgb_content_size", config.rgb_content_size);
    if (j.contains("probe")) {
        const auto& p = j["probe"];
        config.directions = p.value("directions", config.directions);
        config.rollouts = p.value("rollouts", config.rollouts);
        config.magnitude = p.value("magnitude", config.magnitude);
        config.tau = p.value("tau", config.tau);
        config.tau_p = p.value("tau_p", config.tau_p);
        config.poke_points = p.value("poke_points", config.poke_points);
        config.min_separation = p.value("min_separation", config.min_separation);
        config.component_filter = p.value("component_filter", config.component_filter);
        if (p.contains("mode")) {
            const std::string mode = p["mode"].get<std::string>();
            if (mode != "par" && mode != "seq")
                throw validation_error("probe mode must be par or seq");
            config.mode = mode == "par" ? DecodeMode::parallel : DecodeMode::sequential;
        }
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        if (e.contains("thresholds")) config.thresholds = parse_thresholds(e["thresholds"]);
        config.per_image = e.value("per_image", config.per_image);
    }
    if (j.contains("scene_gen")) {
        apply_scene_gen_json(config.scene_gen, j["scene_gen"]);
        config.scene_count = j["scene_gen"].value("count", config.scene_count);
    }
    config.jobs = j.value("jobs", config.jobs);
    config.grid_cap = j.value("grid_cap", config.grid_cap);
}

inline RunConfig load_config(const std::optional<std::string>& path) {
    RunConfig config;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw io_error("cannot open config file " + *path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw validation_error("cannot parse config file: " + std::string(e.what()));
        }
        apply_config_json(config, j);
    }
    return config;
}

}  // namespace spelke::cli
