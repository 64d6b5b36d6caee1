#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spelke/context.hpp"
#include "spelke/fields.hpp"
#include "spelke/model.hpp"
#include "spelke/probing.hpp"
#include "spelke/rng.hpp"
#include "spelke/scene_io.hpp"
#include "spelke/tensor_io.hpp"

namespace spelke {

// A single exported model unit: a context descriptor plus either the full
// per-location distribution field (parallel-mode queries) or one sampled
// flow field (a replayed sequential rollout).
struct DumpRecord {
    enum class Kind { distribution_field, flow_field };
    std::string id;
    Kind kind = Kind::distribution_field;
    ConditioningContext context;
    std::uint64_t seed = 0;  // flow-field records: the rollout seed
    std::string file;        // payload path relative to the dump directory
};

struct DumpManifest {
    GridShape grid;
    std::uint32_t rgb_content_size = 0;
    double max_magnitude = 8.0;
    std::uint32_t bins_per_axis = 17;
    std::vector<DumpRecord> records;
};

namespace detail {

inline ordered_json context_to_json(const ConditioningContext& ctx) {
    ordered_json j;
    j["camera"] = ctx.camera == CameraPose::static_camera ? "static" : "unspecified";
    j["pokes"] = ordered_json::array();
    for (const auto& p : ctx.pokes) j["pokes"].push_back({p.location, p.token});
    j["decoded"] = ordered_json::array();
    for (const auto& p : ctx.decoded) j["decoded"].push_back({p.location, p.token});
    return j;
}

inline ConditioningContext context_from_json(const ordered_json& j) {
    ConditioningContext ctx;
    ctx.camera = j.at("camera").get<std::string>() == "static" ? CameraPose::static_camera
                                                               : CameraPose::unspecified;
    for (const auto& p : j.at("pokes"))
        ctx.pokes.push_back({p[0].get<Location>(), p[1].get<Token>()});
    for (const auto& p : j.at("decoded"))
        ctx.decoded.push_back({p[0].get<Location>(), p[1].get<Token>()});
    return ctx;
}

}  // namespace detail

inline void write_dump_manifest(const std::filesystem::path& dir, const DumpManifest& manifest) {
    ordered_json j;
    j["grid"] = {{"height", manifest.grid.height}, {"width", manifest.grid.width}};
    j["vocab"] = {{"rgb_content_size", manifest.rgb_content_size}};
    j["codebook"] = {{"max_magnitude", manifest.max_magnitude},
                     {"bins_per_axis", manifest.bins_per_axis}};
    j["contexts"] = ordered_json::array();
    for (const auto& rec : manifest.records) {
        ordered_json r;
        r["id"] = rec.id;
        r["kind"] = rec.kind == DumpRecord::Kind::distribution_field ? "distribution_field"
                                                                     : "flow_field";
        r["context"] = detail::context_to_json(rec.context);
        if (rec.kind == DumpRecord::Kind::flow_field) r["seed"] = rec.seed;
        r["file"] = rec.file;
        j["contexts"].push_back(std::move(r));
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw io_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << "\n";
}

inline DumpManifest read_dump_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw io_error("missing manifest.json in " + dir.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("cannot parse dump manifest: " + std::string(e.what()));
    }
    DumpManifest manifest;
    try {
        manifest.grid = GridShape(j.at("grid").at("height").get<std::uint32_t>(),
                                  j.at("grid").at("width").get<std::uint32_t>());
        manifest.rgb_content_size = j.at("vocab").at("rgb_content_size").get<std::uint32_t>();
        manifest.max_magnitude = j.at("codebook").at("max_magnitude").get<double>();
        manifest.bins_per_axis = j.at("codebook").at("bins_per_axis").get<std::uint32_t>();
        for (const auto& r : j.at("contexts")) {
            DumpRecord rec;
            rec.id = r.at("id").get<std::string>();
            rec.kind = r.at("kind").get<std::string>() == "flow_field"
                           ? DumpRecord::Kind::flow_field
                           : DumpRecord::Kind::distribution_field;
            rec.context = detail::context_from_json(r.at("context"));
            rec.seed = r.value("seed", std::uint64_t{0});
            rec.file = r.at("file").get<std::string>();
            manifest.records.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error("malformed dump manifest: " + std::string(e.what()));
    }
    return manifest;
}

// A replayed sequential rollout loaded from a dump.
struct StoredRollout {
    std::string id;
    ConditioningContext context;
    std::uint64_t seed = 0;
    FlowField field;
};

// Model backend answering queries from stored distribution fields.
// Supports parallel-mode queries for the stored contexts and exposes
// stored rollouts; it cannot answer grown contexts, so sequential decode
// against it fails with an unsupported-context error.
class FileModel final : public WorldModel {
 public:
    FileModel(const std::filesystem::path& dir) : dir_(dir) {
        manifest_ = read_dump_manifest(dir);
        layout_ = VocabularyLayout(manifest_.grid.locations(), manifest_.rgb_content_size,
                                   manifest_.bins_per_axis * manifest_.bins_per_axis);
        codebook_ = FlowCodebook(manifest_.max_magnitude, manifest_.bins_per_axis,
                                 layout_.flow_content_begin());
        const std::uint32_t f = layout_.flow_content_size;
        for (const auto& rec : manifest_.records) {
            const Tensor tensor = read_tensor(dir / rec.file);
            if (rec.kind == DumpRecord::Kind::distribution_field) {
                if (tensor.shape !=
                    std::vector<std::uint32_t>{manifest_.grid.height, manifest_.grid.width, f})
                    throw model_contract_error("record " + rec.id +
                                               ": distribution field shape mismatch");
                DistributionField field;
                field.grid = manifest_.grid;
                field.distributions.resize(manifest_.grid.locations());
                for (Location i = 0; i < manifest_.grid.locations(); ++i) {
                    auto& dist = field.distributions[i];
                    dist.probabilities.resize(f);
                    double sum = 0.0;
                    for (std::uint32_t jx = 0; jx < f; ++jx) {
                        const double p = tensor.data[static_cast<std::size_t>(i) * f + jx];
                        if (!(p >= 0.0))
                            throw model_contract_error("record " + rec.id +
                                                       ": negative probability");
                        dist.probabilities[jx] = p;
                        sum += p;
                    }
                    if (std::abs(sum - 1.0) > 1e-6)
                        throw model_contract_error(
                            "record " + rec.id + ": distribution at location " +
                            std::to_string(i) + " sums to " + std::to_string(sum));
                }
                contexts_.push_back(rec.context);
                fields_.push_back(std::move(field));
            } else {
                if (tensor.shape !=
                    std::vector<std::uint32_t>{manifest_.grid.height, manifest_.grid.width, 2})
                    throw model_contract_error("record " + rec.id + ": flow field shape mismatch");
                StoredRollout rollout;
                rollout.id = rec.id;
                rollout.context = rec.context;
                rollout.seed = rec.seed;
                rollout.field.grid = manifest_.grid;
                rollout.field.vectors.resize(manifest_.grid.locations());
                for (Location i = 0; i < manifest_.grid.locations(); ++i)
                    rollout.field.vectors[i] = {tensor.data[2 * static_cast<std::size_t>(i)],
                                                tensor.data[2 * static_cast<std::size_t>(i) + 1]};
                rollouts_.push_back(std::move(rollout));
            }
        }
    }

    GridShape grid() const override { return manifest_.grid; }
    VocabularyLayout layout() const override { return layout_; }
    FlowCodebook codebook() const override { return codebook_; }
    const DumpManifest& manifest() const { return manifest_; }
    const std::vector<StoredRollout>& stored_rollouts() const { return rollouts_; }

    CategoricalFlowDistribution query_distribution(const ConditioningContext& ctx,
                                                   Location loc) const override {
        if (!manifest_.grid.contains(loc)) throw validation_error("query location out of grid");
        return find_field(ctx).distributions[loc];
    }

    DistributionField query_distribution_field(const ConditioningContext& ctx) const override {
        return find_field(ctx);
    }

 private:
    const DistributionField& find_field(const ConditioningContext& ctx) const {
        for (std::size_t k = 0; k < contexts_.size(); ++k)
            if (contexts_[k] == ctx) return fields_[k];
        throw model_contract_error("context not present in dump set under " + dir_.string());
    }

    std::filesystem::path dir_;
    DumpManifest manifest_;
    VocabularyLayout layout_;
    FlowCodebook codebook_;
    std::vector<ConditioningContext> contexts_;
    std::vector<DistributionField> fields_;
    std::vector<StoredRollout> rollouts_;
};

// Exports a model's responses for a poke list so an external backend (or
// a later run) can replay them. Also the round-trip fixture for the
// format itself.
inline DumpManifest export_dump(const std::filesystem::path& dir, const WorldModel& model,
                                const std::vector<Poke>& pokes,
                                std::uint32_t rollouts_per_poke, std::uint64_t seed,
                                const Epigraphy& epi) {
    std::filesystem::create_directories(dir);
    DumpManifest manifest;
    manifest.grid = model.grid();
    manifest.rgb_content_size = model.layout().rgb_content_size;
    manifest.max_magnitude = model.codebook().max_magnitude;
    manifest.bins_per_axis = model.codebook().bins_per_axis;
    std::uint32_t counter = 0;
    for (const auto& poke : pokes) {
        const ConditioningContext ctx = poke_context(poke);
        DumpRecord rec;
        rec.id = "dist_" + std::to_string(counter);
        rec.kind = DumpRecord::Kind::distribution_field;
        rec.context = ctx;
        rec.file = rec.id + ".bin";
        write_tensor(dir / rec.file,
                     tensor_from_distribution_field(model.query_distribution_field(ctx)));
        manifest.records.push_back(rec);
        for (std::uint32_t t = 0; t < rollouts_per_poke; ++t) {
            const std::uint64_t rollout_seed = derive_seed(seed, {counter, t});
            DumpRecord roll;
            roll.id = "roll_" + std::to_string(counter) + "_" + std::to_string(t);
            roll.kind = DumpRecord::Kind::flow_field;
            roll.context = ctx;
            roll.seed = rollout_seed;
            roll.file = roll.id + ".bin";
            const FlowField field = decode_flow_sequential(model, poke, rollout_seed, epi);
            write_tensor(dir / roll.file, tensor_from_vector_map(field.grid, field.vectors));
            manifest.records.push_back(roll);
        }
        ++counter;
    }
    write_dump_manifest(dir, manifest);
    return manifest;
}

}  // namespace spelke
