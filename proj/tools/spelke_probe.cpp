// spelke-probe: synthetic benchmark generation, counterfactual probing,
// Spelke segment extraction, and evaluation, behind one binary.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spelke/spelke.hpp"
#include "spelke/json_schema.hpp"
#include "spelke/png_io.hpp"

#include "run_config.hpp"

namespace fs = std::filesystem;
using spelke::ordered_json;
using spelke::cli::RunConfig;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitIo = 4;
constexpr int kExitModelContract = 5;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) return *flag_seed;
    std::random_device rd;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cout << "seed: " << seed << "\n";
    return seed;
}

void write_json_file(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw spelke::io_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

ordered_json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw spelke::io_error("cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw spelke::io_error("cannot parse " + path.string() + ": " + e.what());
    }
    return j;
}

spelke::SyntheticScene load_scene_checked(const std::string& path, const RunConfig& config) {
    spelke::SyntheticScene scene = spelke::load_scene(path);
    if (scene.grid.height > config.grid_cap || scene.grid.width > config.grid_cap)
        throw spelke::validation_error("scene grid exceeds the configured cap of " +
                                       std::to_string(config.grid_cap));
    return scene;
}

spelke::OracleModel make_model(const spelke::SyntheticScene& scene, const RunConfig& config) {
    return spelke::OracleModel(scene, config.rgb_content_size, config.max_magnitude,
                               config.bins_per_axis);
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& prefix) {
    if (!fs::is_directory(dir)) throw spelke::io_error(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".pgm")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string zero_pad(std::uint32_t v, int width = 3) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*u", width, v);
    return buf;
}

// ---------------------------------------------------------------------------
// synth-gen

void write_scene_dir(const fs::path& dir, const spelke::GeneratedScene& generated,
                     std::uint64_t scene_seed) {
    fs::create_directories(dir);
    spelke::save_scene(dir / "scene.json", generated.scene);
    ordered_json manifest;
    manifest["scene"] = "scene.json";
    manifest["grid"] = {{"height", generated.scene.grid.height},
                        {"width", generated.scene.grid.width}};
    manifest["seed"] = scene_seed;
    manifest["noise_eps"] = generated.scene.noise_eps;
    manifest["gt"] = ordered_json::array();
    manifest["closure"] = ordered_json::array();
    for (std::uint32_t g = 0; g < generated.gt_masks.size(); ++g) {
        const std::string gt_name = "gt_" + zero_pad(g) + ".pgm";
        const std::string closure_name = "closure_" + zero_pad(g) + ".pgm";
        spelke::write_mask_pgm(dir / gt_name, generated.gt_masks[g]);
        spelke::write_mask_pgm(dir / closure_name, generated.gt_closure_masks[g]);
        manifest["gt"].push_back(
            {{"id", g}, {"file", gt_name}, {"area", generated.gt_masks[g].area()}});
        manifest["closure"].push_back({{"id", g}, {"file", closure_name}});
    }
    write_json_file(dir / "manifest.json", manifest);
}

int cmd_synth_gen(const RunConfig& config, std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    ordered_json suite;
    suite["seed"] = seed;
    suite["scene_count"] = config.scene_count;
    suite["scenes"] = ordered_json::array();
    for (std::uint32_t i = 0; i < config.scene_count; ++i) {
        const std::uint64_t scene_seed = spelke::derive_seed(seed, {i});
        const auto generated = spelke::generate_scene(config.scene_gen, scene_seed);
        const std::string name = "scene_" + zero_pad(i);
        write_scene_dir(fs::path(out_dir) / name, generated, scene_seed);
        suite["scenes"].push_back(name);
    }
    write_json_file(fs::path(out_dir) / "manifest.json", suite);
    return 0;
}

// ---------------------------------------------------------------------------
// affordance

int cmd_affordance(const RunConfig& config, const std::string& scene_path,
                   const std::string& out_dir) {
    const auto scene = load_scene_checked(scene_path, config);
    const auto model = make_model(scene, config);
    const auto epi = spelke::analytic_epigraphy(model.codebook());
    const auto map = spelke::motion_affordance(model, epi, config.tau);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    spelke::write_tensor(dir / "affordance.bin",
                         spelke::tensor_from_scalar_map(map.grid, map.values));
    const auto render = spelke::render_grayscale(map.values);
    spelke::write_pgm(dir / "affordance.pgm", map.grid, render.pixels);
    ordered_json sidecar;
    sidecar["tensor"] = "affordance.bin";
    sidecar["render"] = "affordance.pgm";
    sidecar["min"] = render.min_value;
    sidecar["max"] = render.max_value;
    sidecar["tau"] = config.tau;
    write_json_file(dir / "affordance.json", sidecar);
    if (config.png) spelke::write_png(dir / "affordance.png", map.grid, render.pixels, 1);
    return 0;
}

// ---------------------------------------------------------------------------
// segment-point

int cmd_segment_point(const RunConfig& config, const std::string& scene_path, std::uint32_t x,
                      std::uint32_t y, std::uint64_t seed, const std::string& out_dir) {
    const auto scene = load_scene_checked(scene_path, config);
    if (y >= scene.grid.height || x >= scene.grid.width)
        throw spelke::validation_error("prompt point outside the scene grid");
    const auto model = make_model(scene, config);
    const auto epi = spelke::analytic_epigraphy(model.codebook());
    const spelke::Location point = scene.grid.at(y, x);

    spelke::ProbeParams params;
    params.directions = config.directions;
    params.rollouts = config.rollouts;
    params.magnitude = config.poke_magnitude();
    params.mode = config.mode;
    params.component_filter = config.component_filter;
    params.jobs = config.jobs;

    const auto mask = spelke::segment_from_point(model, point, epi, params, seed);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    spelke::write_mask_pgm(dir / "mask.pgm", mask);
    ordered_json meta;
    meta["prompt"] = {{"x", x}, {"y", y}};
    meta["seed"] = seed;
    meta["mode"] = config.mode == spelke::DecodeMode::parallel ? "par" : "seq";
    meta["area"] = mask.area();
    meta["degenerate"] = mask.degenerate;
    write_json_file(dir / "meta.json", meta);
    if (config.png) {
        std::vector<std::uint8_t> pixels(mask.grid.locations());
        for (spelke::Location i = 0; i < mask.grid.locations(); ++i)
            pixels[i] = mask.contains(i) ? 255 : 0;
        spelke::write_png(dir / "mask.png", mask.grid, pixels, 1);
    }
    return mask.degenerate || mask.empty() ? kExitDegenerate : 0;
}

// ---------------------------------------------------------------------------
// segment-auto

int cmd_segment_auto(const RunConfig& config, const std::string& scene_path, std::uint64_t seed,
                     const std::string& out_dir) {
    const auto scene = load_scene_checked(scene_path, config);
    const auto model = make_model(scene, config);
    const auto epi = spelke::analytic_epigraphy(model.codebook());

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    ordered_json index;
    index["seed"] = seed;
    index["segments"] = ordered_json::array();

    const auto aff = spelke::motion_affordance(model, epi, config.tau);
    std::vector<spelke::Location> points;
    try {
        points = spelke::sample_poke_locations(aff, config.tau_p, config.poke_points,
                                               config.separation_for(scene.grid),
                                               spelke::derive_seed(seed, {1}));
    } catch (const spelke::degenerate_error&) {
        index["poke_points"] = ordered_json::array();
        write_json_file(dir / "index.json", index);
        throw;
    }
    index["poke_points"] = points;

    const auto desc = spelke::build_motion_descriptors(
        model, points, config.directions, config.rollouts, config.poke_magnitude(),
        spelke::derive_seed(seed, {2}), epi, config.jobs);
    const auto rows = spelke::affinity_rows(desc, points, config.jobs);
    const auto segments = spelke::discover_all_segments(rows);

    {
        spelke::Tensor t;
        t.shape = {static_cast<std::uint32_t>(points.size()), scene.grid.locations()};
        t.data.reserve(rows.rows.size());
        for (double v : rows.rows) t.data.push_back(static_cast<float>(v));
        spelke::write_tensor(dir / "affinity_rows.bin", t);
    }

    std::uint32_t file_counter = 0;
    for (std::uint32_t s = 0; s < segments.size(); ++s) {
        const auto& mask = segments[s];
        ordered_json entry;
        entry["id"] = s;
        entry["center"] = mask.prompt ? ordered_json(*mask.prompt) : ordered_json(nullptr);
        entry["area"] = mask.area();
        entry["degenerate"] = mask.degenerate;
        if (!mask.empty()) {
            const std::string name = "seg_" + zero_pad(file_counter++) + ".pgm";
            spelke::write_mask_pgm(dir / name, mask);
            entry["file"] = name;
            if (config.png) {
                std::vector<std::uint8_t> pixels(mask.grid.locations());
                for (spelke::Location i = 0; i < mask.grid.locations(); ++i)
                    pixels[i] = mask.contains(i) ? 255 : 0;
                spelke::write_png(dir / (name.substr(0, name.size() - 4) + ".png"), mask.grid,
                                  pixels, 1);
            }
        }
        index["segments"].push_back(std::move(entry));
    }
    write_json_file(dir / "index.json", index);
    return 0;
}

// ---------------------------------------------------------------------------
// eval

ordered_json report_to_json(const spelke::MetricsReport& report) {
    ordered_json j;
    j["mode"] = report.mode;
    if (report.average_precision) j["average_precision"] = *report.average_precision;
    j["average_recall"] = report.average_recall;
    if (report.f1) j["f1"] = *report.f1;
    j["mean_iou"] = report.mean_iou;
    j["thresholds"] = report.thresholds;
    j["degenerate"] = report.degenerate;
    j["pairs"] = report.per_pair_iou.size();
    return j;
}

std::string report_to_text(const spelke::MetricsReport& report) {
    std::string text = "mode: " + report.mode + "\n";
    const auto row = [&](const std::string& name, double value) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-8s %s\n", name.c_str(),
                      format_double(value).c_str());
        text += buf;
    };
    if (report.average_precision) row("AP", *report.average_precision);
    row("AR", report.average_recall);
    if (report.f1) row("F1", *report.f1);
    row("mIoU", report.mean_iou);
    return text;
}

// Scene pair directories: either flat mask directories or suites with
// matching scene_* subdirectories.
std::vector<std::pair<fs::path, fs::path>> resolve_eval_pairs(const fs::path& pred_dir,
                                                              const fs::path& gt_dir) {
    std::vector<fs::path> gt_subdirs;
    if (fs::is_directory(gt_dir))
        for (const auto& entry : fs::directory_iterator(gt_dir))
            if (entry.is_directory() &&
                entry.path().filename().string().rfind("scene_", 0) == 0)
                gt_subdirs.push_back(entry.path());
    std::sort(gt_subdirs.begin(), gt_subdirs.end());
    if (gt_subdirs.empty()) return {{pred_dir, gt_dir}};
    std::vector<std::pair<fs::path, fs::path>> pairs;
    for (const auto& gt_sub : gt_subdirs) {
        const fs::path pred_sub = pred_dir / gt_sub.filename();
        if (!fs::is_directory(pred_sub))
            throw spelke::io_error("missing prediction directory " + pred_sub.string());
        pairs.push_back({pred_sub, gt_sub});
    }
    return pairs;
}

int cmd_eval(const RunConfig& config, const std::string& mode, const std::string& pred_dir,
             const std::string& gt_dir, const std::string& out_dir) {
    if (mode != "point" && mode != "auto")
        throw spelke::validation_error("eval mode must be point or auto");
    const auto pairs = resolve_eval_pairs(pred_dir, gt_dir);

    spelke::MetricsReport report;
    if (mode == "point") {
        std::vector<spelke::SegmentMask> preds, gts;
        std::vector<spelke::MetricsReport> per_image;
        for (const auto& [pred_sub, gt_sub] : pairs) {
            std::vector<spelke::SegmentMask> scene_preds, scene_gts;
            for (const auto& gt_file : sorted_files(gt_sub, "gt_")) {
                const fs::path pred_file = pred_sub / gt_file.filename();
                if (!fs::exists(pred_file))
                    throw spelke::io_error("missing prediction for " +
                                           gt_file.filename().string());
                scene_gts.push_back(spelke::read_mask_pgm(gt_file));
                scene_preds.push_back(spelke::read_mask_pgm(pred_file));
            }
            if (config.per_image && !scene_gts.empty())
                per_image.push_back(
                    spelke::eval_point_prompted(scene_preds, scene_gts, config.thresholds));
            preds.insert(preds.end(), scene_preds.begin(), scene_preds.end());
            gts.insert(gts.end(), scene_gts.begin(), scene_gts.end());
        }
        if (config.per_image) {
            report.mode = "point";
            report.thresholds = config.thresholds;
            if (per_image.empty()) throw spelke::validation_error("no ground truth to evaluate");
            for (const auto& r : per_image) {
                report.average_recall += r.average_recall;
                report.mean_iou += r.mean_iou;
            }
            report.average_recall /= static_cast<double>(per_image.size());
            report.mean_iou /= static_cast<double>(per_image.size());
        } else {
            report = spelke::eval_point_prompted(preds, gts, config.thresholds);
        }
    } else {
        std::vector<spelke::SegmentSetPair> images;
        for (const auto& [pred_sub, gt_sub] : pairs) {
            spelke::SegmentSetPair image;
            for (const auto& f : sorted_files(pred_sub, "seg_"))
                image.preds.push_back(spelke::read_mask_pgm(f));
            for (const auto& f : sorted_files(gt_sub, "gt_"))
                image.gts.push_back(spelke::read_mask_pgm(f));
            images.push_back(std::move(image));
        }
        if (config.per_image) {
            report.mode = "auto";
            report.thresholds = config.thresholds;
            double ap = 0.0, ar = 0.0, f1 = 0.0, miou = 0.0;
            for (const auto& image : images) {
                const auto r = spelke::eval_auto(image.preds, image.gts, config.thresholds);
                ap += r.average_precision.value_or(0.0);
                ar += r.average_recall;
                f1 += r.f1.value_or(0.0);
                miou += r.mean_iou;
            }
            const double n = static_cast<double>(images.size());
            report.average_precision = ap / n;
            report.average_recall = ar / n;
            report.f1 = f1 / n;
            report.mean_iou = miou / n;
        } else {
            report = spelke::eval_auto_pooled(images, config.thresholds);
        }
    }

    fs::create_directories(out_dir);
    write_json_file(fs::path(out_dir) / "report.json", report_to_json(report));
    std::ofstream text(fs::path(out_dir) / "report.txt");
    text << report_to_text(report);
    std::cout << report_to_text(report);
    return 0;
}

// ---------------------------------------------------------------------------
// bench-run

struct SuiteSpec {
    std::string name = "default";
    std::uint32_t scenes = 5;
    RunConfig config;
    bool run_point = true;
    bool run_auto = true;
    bool closure_gt = false;
};

std::vector<SuiteSpec> parse_suites(const RunConfig& base,
                                    const std::optional<std::string>& config_path) {
    std::vector<SuiteSpec> suites;
    if (config_path) {
        const ordered_json j = read_json_file(*config_path);
        if (j.contains("suites")) {
            for (const auto& s : j["suites"]) {
                SuiteSpec spec;
                spec.config = base;
                spec.name = s.value("name", spec.name);
                spec.scenes = s.value("scenes", spec.scenes);
                if (s.contains("scene_gen"))
                    spelke::cli::apply_scene_gen_json(spec.config.scene_gen, s["scene_gen"]);
                if (s.contains("probe") || s.contains("eval") || s.contains("codebook")) {
                    nlohmann::json overrides = s;
                    overrides.erase("name");
                    overrides.erase("scenes");
                    overrides.erase("pipelines");
                    overrides.erase("gt");
                    overrides.erase("scene_gen");
                    spelke::cli::apply_config_json(spec.config, overrides);
                }
                if (s.contains("pipelines")) {
                    spec.run_point = spec.run_auto = false;
                    for (const auto& p : s["pipelines"]) {
                        if (p.get<std::string>() == "point") spec.run_point = true;
                        if (p.get<std::string>() == "auto") spec.run_auto = true;
                    }
                }
                spec.closure_gt = s.value("gt", std::string("groups")) == "closure";
                suites.push_back(std::move(spec));
            }
            return suites;
        }
    }
    SuiteSpec spec;
    spec.config = base;
    suites.push_back(std::move(spec));
    return suites;
}

int cmd_bench_run(const RunConfig& base, const std::optional<std::string>& config_path,
                  std::uint64_t seed, const std::string& out_dir) {
    const auto suites = parse_suites(base, config_path);
    fs::create_directories(out_dir);

    ordered_json report;
    report["seed"] = seed;
    report["suites"] = ordered_json::array();

    std::string table = "suite            scenes  point.AR  point.mIoU  auto.AP   auto.AR   "
                        "auto.F1   auto.mIoU\n";

    for (std::uint32_t si = 0; si < suites.size(); ++si) {
        const SuiteSpec& suite = suites[si];
        const RunConfig& config = suite.config;

        std::vector<spelke::SegmentMask> point_preds, point_gts;
        std::vector<spelke::SegmentSetPair> auto_images;

        for (std::uint32_t i = 0; i < suite.scenes; ++i) {
            const std::uint64_t scene_seed = spelke::derive_seed(seed, {si, i});
            const auto generated = spelke::generate_scene(config.scene_gen, scene_seed);
            const auto model = make_model(generated.scene, config);
            const auto epi = spelke::analytic_epigraphy(model.codebook());

            if (suite.run_point) {
                spelke::ProbeParams params;
                params.directions = config.directions;
                params.rollouts = config.rollouts;
                params.magnitude = config.poke_magnitude();
                params.mode = config.mode;
                params.component_filter = config.component_filter;
                params.jobs = config.jobs;
                for (std::uint32_t g = 0; g < generated.gt_masks.size(); ++g) {
                    const auto& gt =
                        suite.closure_gt ? generated.gt_closure_masks[g] : generated.gt_masks[g];
                    if (gt.empty()) continue;
                    const spelke::Location prompt = spelke::point_prompt(generated.gt_masks[g]);
                    point_preds.push_back(spelke::segment_from_point(
                        model, prompt, epi, params, spelke::derive_seed(scene_seed, {g})));
                    point_gts.push_back(gt);
                }
            }

            if (suite.run_auto) {
                spelke::SegmentSetPair image;
                image.gts = generated.gt_masks;
                const auto aff = spelke::motion_affordance(model, epi, config.tau);
                try {
                    const auto points = spelke::sample_poke_locations(
                        aff, config.tau_p, config.poke_points,
                        config.separation_for(generated.scene.grid),
                        spelke::derive_seed(scene_seed, {0xA}));
                    const auto desc = spelke::build_motion_descriptors(
                        model, points, config.directions, config.rollouts,
                        config.poke_magnitude(), spelke::derive_seed(scene_seed, {0xB}), epi,
                        config.jobs);
                    const auto rows = spelke::affinity_rows(desc, points, config.jobs);
                    for (auto& mask : spelke::discover_all_segments(rows))
                        if (!mask.empty()) image.preds.push_back(std::move(mask));
                } catch (const spelke::degenerate_error&) {
                    // No pokeable region; predictions stay empty.
                }
                auto_images.push_back(std::move(image));
            }
        }

        ordered_json suite_json;
        suite_json["name"] = suite.name;
        suite_json["scenes"] = suite.scenes;
        suite_json["noise_eps"] = config.scene_gen.noise_eps;
        std::string point_ar = "-", point_miou = "-", auto_ap = "-", auto_ar = "-",
                    auto_f1 = "-", auto_miou = "-";
        if (suite.run_point && !point_gts.empty()) {
            const auto r = spelke::eval_point_prompted(point_preds, point_gts, config.thresholds);
            suite_json["point"] = {{"average_recall", r.average_recall},
                                   {"mean_iou", r.mean_iou}};
            point_ar = format_double(r.average_recall);
            point_miou = format_double(r.mean_iou);
        }
        if (suite.run_auto) {
            const auto r = spelke::eval_auto_pooled(auto_images, config.thresholds);
            suite_json["auto"] = {{"average_precision", r.average_precision.value_or(0.0)},
                                  {"average_recall", r.average_recall},
                                  {"f1", r.f1.value_or(0.0)},
                                  {"mean_iou", r.mean_iou}};
            auto_ap = format_double(r.average_precision.value_or(0.0));
            auto_ar = format_double(r.average_recall);
            auto_f1 = format_double(r.f1.value_or(0.0));
            auto_miou = format_double(r.mean_iou);
        }
        report["suites"].push_back(std::move(suite_json));

        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-16s %-7u %-9s %-11s %-9s %-9s %-9s %-9s\n",
                      suite.name.c_str(), suite.scenes, point_ar.c_str(), point_miou.c_str(),
                      auto_ap.c_str(), auto_ar.c_str(), auto_f1.c_str(), auto_miou.c_str());
        table += buf;
    }

    write_json_file(fs::path(out_dir) / "report.json", report);
    std::ofstream text(fs::path(out_dir) / "report.txt");
    text << table;
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual probing engine for motion-defined segment discovery"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::uint32_t> jobs_flag;
    app.add_option("--config", config_path, "JSON configuration file")->envname("SPELKE_PROBE_CONFIG");
    app.add_option("--seed", seed_flag, "RNG seed (drawn and printed when omitted)");
    app.add_option("--jobs", jobs_flag, "worker count (results are independent of it)")
        ->envname("SPELKE_PROBE_JOBS");

    std::string out_dir = "out";
    std::string scene_path, pred_dir, gt_dir, eval_mode = "auto", mode_flag, thresholds_flag;
    std::uint32_t x = 0, y = 0, count_flag = 0;
    bool png_flag = false;

    // Let --seed / --jobs / --config appear after the subcommand name too.
    app.fallthrough();

    auto* synth = app.add_subcommand("synth-gen", "generate a synthetic benchmark suite");
    synth->fallthrough();
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--count", count_flag, "number of scenes (overrides config)");

    auto* afford = app.add_subcommand("affordance", "compute the motion affordance map");
    afford->fallthrough();
    afford->add_option("--scene", scene_path, "scene JSON file")->required();
    afford->add_option("--out", out_dir, "output directory")->required();
    afford->add_flag("--png", png_flag, "also write PNG renderings");

    auto* seg_point = app.add_subcommand("segment-point", "point-prompted segment extraction");
    seg_point->fallthrough();
    seg_point->add_option("--scene", scene_path, "scene JSON file")->required();
    seg_point->add_option("--x", x, "prompt column")->required();
    seg_point->add_option("--y", y, "prompt row")->required();
    seg_point->add_option("--out", out_dir, "output directory")->required();
    seg_point->add_option("--mode", mode_flag, "decode mode: par or seq");
    seg_point->add_flag("--png", png_flag, "also write PNG renderings");

    auto* seg_auto = app.add_subcommand("segment-auto", "discover every segment in a scene");
    seg_auto->fallthrough();
    seg_auto->add_option("--scene", scene_path, "scene JSON file")->required();
    seg_auto->add_option("--out", out_dir, "output directory")->required();
    seg_auto->add_flag("--png", png_flag, "also write PNG renderings");

    auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
    eval->fallthrough();
    eval->add_option("--mode", eval_mode, "point or auto")->required();
    eval->add_option("--pred", pred_dir, "prediction directory")->required();
    eval->add_option("--gt", gt_dir, "ground-truth directory")->required();
    eval->add_option("--thresholds", thresholds_flag, "IoU thresholds as a:b:step");
    eval->add_option("--out", out_dir, "output directory")->required();

    auto* bench = app.add_subcommand("bench-run", "generate suites, probe, and report metrics");
    bench->fallthrough();
    bench->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        RunConfig config = spelke::cli::load_config(config_path);
        if (jobs_flag) config.jobs = *jobs_flag;
        if (png_flag) config.png = true;
        if (count_flag > 0) config.scene_count = count_flag;
        if (!mode_flag.empty()) {
            if (mode_flag != "par" && mode_flag != "seq")
                throw spelke::validation_error("--mode must be par or seq");
            config.mode = mode_flag == "par" ? spelke::DecodeMode::parallel
                                             : spelke::DecodeMode::sequential;
        }
        if (!thresholds_flag.empty())
            config.thresholds = spelke::cli::parse_thresholds(thresholds_flag);

        if (synth->parsed()) return cmd_synth_gen(config, resolve_seed(seed_flag), out_dir);
        if (afford->parsed()) return cmd_affordance(config, scene_path, out_dir);
        if (seg_point->parsed())
            return cmd_segment_point(config, scene_path, x, y, resolve_seed(seed_flag), out_dir);
        if (seg_auto->parsed())
            return cmd_segment_auto(config, scene_path, resolve_seed(seed_flag), out_dir);
        if (eval->parsed()) return cmd_eval(config, eval_mode, pred_dir, gt_dir, out_dir);
        if (bench->parsed())
            return cmd_bench_run(config, config_path, resolve_seed(seed_flag), out_dir);
        return kExitValidation;
    } catch (const spelke::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const spelke::degenerate_error& e) {
        std::cerr << "degenerate result: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const spelke::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const spelke::model_contract_error& e) {
        std::cerr << "model contract error: " << e.what() << "\n";
        return kExitModelContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
