#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spelke/common.hpp"
#include "spelke/epigraphy.hpp"
#include "spelke/scene.hpp"

#include <json.hpp>

namespace spelke {

using ordered_json = nlohmann::ordered_json;

inline ordered_json rle_to_json(const std::vector<Location>& cells) {
    ordered_json runs = ordered_json::array();
    for (const auto& [start, len] : encode_rle(cells)) runs.push_back({start, len});
    return runs;
}

inline std::vector<Location> rle_from_json(const ordered_json& runs) {
    std::vector<std::pair<Location, std::uint32_t>> pairs;
    for (const auto& run : runs) {
        if (!run.is_array() || run.size() != 2) throw io_error("RLE run must be [start, length]");
        pairs.push_back({run[0].get<Location>(), run[1].get<std::uint32_t>()});
    }
    return decode_rle(pairs);
}

inline ordered_json scene_to_json(const SyntheticScene& scene) {
    ordered_json j;
    j["grid"] = {{"height", scene.grid.height}, {"width", scene.grid.width}};
    j["noise_eps"] = scene.noise_eps;
    j["groups"] = ordered_json::array();
    for (const auto& group : scene.groups) {
        ordered_json g;
        g["cells"] = rle_to_json(group.cells);
        g["mobility"] = group.mobility;
        if (!group.articulations.empty()) {
            g["articulations"] = ordered_json::array();
            for (const auto& mode : group.articulations)
                g["articulations"].push_back(
                    {{"probability", mode.probability}, {"cells", rle_to_json(mode.cells)}});
        }
        j["groups"].push_back(std::move(g));
    }
    j["support_edges"] = ordered_json::array();
    for (const auto& [a, b] : scene.support_edges) j["support_edges"].push_back({a, b});
    return j;
}

inline SyntheticScene scene_from_json(const ordered_json& j) {
    SyntheticScene scene;
    try {
        scene.grid = GridShape(j.at("grid").at("height").get<std::uint32_t>(),
                               j.at("grid").at("width").get<std::uint32_t>());
        scene.noise_eps = j.value("noise_eps", 0.0);
        for (const auto& g : j.at("groups")) {
            SceneGroup group;
            group.cells = rle_from_json(g.at("cells"));
            group.mobility = g.at("mobility").get<double>();
            if (g.contains("articulations")) {
                for (const auto& m : g.at("articulations")) {
                    ArticulationMode mode;
                    mode.probability = m.at("probability").get<double>();
                    mode.cells = rle_from_json(m.at("cells"));
                    group.articulations.push_back(std::move(mode));
                }
            }
            scene.groups.push_back(std::move(group));
        }
        if (j.contains("support_edges"))
            for (const auto& e : j.at("support_edges"))
                scene.support_edges.push_back(
                    {e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>()});
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("malformed scene document: ") + e.what());
    }
    scene.validate();
    return scene;
}

inline void save_scene(const std::filesystem::path& path, const SyntheticScene& scene) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << scene_to_json(scene).dump(2) << "\n";
}

inline SyntheticScene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("cannot parse " + path.string() + ": " + e.what());
    }
    return scene_from_json(j);
}

// Epigraphy table file: header fields plus one (token, dx, dy) row per
// flow-content token.
inline void save_epigraphy(const std::filesystem::path& path, const Epigraphy& epi) {
    ordered_json j;
    j["token_base"] = epi.token_base;
    j["count"] = epi.size();
    j["provenance"] =
        epi.provenance == Epigraphy::Provenance::analytic ? "analytic" : "empirical";
    j["rows"] = ordered_json::array();
    for (std::uint32_t k = 0; k < epi.size(); ++k)
        j["rows"].push_back({epi.token_base + k, epi.vectors[k].dx, epi.vectors[k].dy});
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

inline Epigraphy load_epigraphy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("cannot parse " + path.string() + ": " + e.what());
    }
    Epigraphy epi;
    try {
        epi.token_base = j.at("token_base").get<Token>();
        const auto count = j.at("count").get<std::uint32_t>();
        epi.provenance = j.at("provenance").get<std::string>() == "empirical"
                             ? Epigraphy::Provenance::empirical
                             : Epigraphy::Provenance::analytic;
        epi.vectors.assign(count, FlowVector{});
        epi.fallback.assign(count, false);
        std::vector<bool> seen(count, false);
        for (const auto& row : j.at("rows")) {
            const Token t = row[0].get<Token>();
            if (t < epi.token_base || t >= epi.token_base + count)
                throw io_error("epigraphy row token out of range");
            epi.vectors[t - epi.token_base] = {row[1].get<double>(), row[2].get<double>()};
            seen[t - epi.token_base] = true;
        }
        for (std::uint32_t k = 0; k < count; ++k)
            if (!seen[k]) throw io_error("epigraphy table is missing token rows");
    } catch (const nlohmann::json::exception& e) {
        throw io_error("malformed epigraphy table: " + std::string(e.what()));
    }
    return epi;
}

}  // namespace spelke
