#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "spelke/oracle.hpp"
#include "spelke/rng.hpp"
#include "spelke/scene_gen.hpp"

using namespace spelke;

namespace {

std::vector<Location> rect_cells(const GridShape& grid, std::uint32_t r0, std::uint32_t c0,
                                 std::uint32_t h, std::uint32_t w) {
    std::vector<Location> cells;
    for (std::uint32_t r = r0; r < r0 + h; ++r)
        for (std::uint32_t c = c0; c < c0 + w; ++c) cells.push_back(grid.at(r, c));
    return cells;
}

SyntheticScene two_rigid_groups(double eps = 0.0) {
    SyntheticScene scene;
    scene.grid = GridShape(8, 8);
    scene.groups.push_back({rect_cells(scene.grid, 1, 1, 2, 3), 0.7, {}});
    scene.groups.push_back({rect_cells(scene.grid, 5, 4, 2, 3), 0.5, {}});
    scene.noise_eps = eps;
    return scene;
}

// Group on rows 2-3, cols 2-5; the "part" branch moves only cols 2-3.
SyntheticScene articulated_scene(double eps = 0.0) {
    SyntheticScene scene;
    scene.grid = GridShape(8, 8);
    SceneGroup group;
    group.cells = rect_cells(scene.grid, 2, 2, 2, 4);
    group.mobility = 0.8;
    ArticulationMode whole{0.5, group.cells};
    ArticulationMode part{0.5, rect_cells(scene.grid, 2, 2, 2, 2)};
    group.articulations = {whole, part};
    scene.groups.push_back(std::move(group));
    scene.noise_eps = eps;
    return scene;
}

bool is_point_mass(const CategoricalFlowDistribution& dist, std::uint32_t offset) {
    for (std::uint32_t j = 0; j < dist.probabilities.size(); ++j) {
        const double expect = j == offset ? 1.0 : 0.0;
        if (std::abs(dist.probabilities[j] - expect) > 1e-12) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("scene validation catches structural defects") {
    SyntheticScene scene = two_rigid_groups();
    CHECK_NOTHROW(scene.validate());

    SECTION("overlapping groups") {
        scene.groups[1].cells = scene.groups[0].cells;
        CHECK_THROWS_AS(scene.validate(), validation_error);
    }
    SECTION("articulation outside group") {
        scene.groups[0].articulations = {{1.0, rect_cells(scene.grid, 6, 6, 1, 1)}};
        CHECK_THROWS_AS(scene.validate(), validation_error);
    }
    SECTION("articulation probabilities must sum to one") {
        scene.groups[0].articulations = {{0.5, scene.groups[0].cells}};
        CHECK_THROWS_AS(scene.validate(), validation_error);
    }
    SECTION("support cycles are rejected") {
        scene.support_edges = {{0, 1}, {1, 0}};
        CHECK_THROWS_AS(scene.validate(), validation_error);
    }
    SECTION("noise_eps bounds") {
        scene.noise_eps = 1.0;
        CHECK_THROWS_AS(scene.validate(), validation_error);
    }
}

TEST_CASE("rigid poke forces co-movement, background stays static") {
    const OracleModel model(two_rigid_groups(), 0, 2.0, 5);
    const FlowCodebook cb = model.codebook();
    const Poke poke = make_poke(model.scene().groups[0].cells[0], {1.0, 0.0}, cb);
    const ConditioningContext ctx = poke_context(poke);
    const std::uint32_t poke_offset = model.layout().flow_offset(poke.token);
    const std::uint32_t zero_offset = model.layout().flow_offset(zero_token(cb));

    // other location in the poked group -> point mass on the poke token
    CHECK(is_point_mass(model.query_distribution(ctx, model.scene().groups[0].cells[5]),
                        poke_offset));
    // background location -> point mass on the zero token
    CHECK(is_point_mass(model.query_distribution(ctx, model.scene().grid.at(0, 0)), zero_offset));
    // the other rigid group does not react to this poke
    CHECK(is_point_mass(model.query_distribution(ctx, model.scene().groups[1].cells[0]),
                        zero_offset));
}

TEST_CASE("single-mode rigid scene is a point mass everywhere") {
    const OracleModel model(two_rigid_groups(), 0, 2.0, 5);
    const Poke poke = make_poke(model.scene().groups[1].cells[2], {0.0, -1.0}, model.codebook());
    const auto field = model.query_distribution_field(poke_context(poke));
    const auto modes = model.enumerate_modes(poke_context(poke).pokes);
    REQUIRE(modes.size() == 1);
    for (Location i = 0; i < model.grid().locations(); ++i)
        CHECK(is_point_mass(field.distributions[i], modes[0].field[i]));
}

TEST_CASE("articulated Bayes update eliminates the inconsistent mode") {
    const OracleModel model(articulated_scene(), 0, 2.0, 5);
    const FlowCodebook cb = model.codebook();
    const GridShape grid = model.grid();

    const Location poked = grid.at(2, 2);       // inside the part branch
    const Location observed = grid.at(2, 4);    // outside the part branch
    const Location queried = grid.at(3, 5);     // outside the part branch
    const Poke poke = make_poke(poked, {1.0, 0.0}, cb);
    const Token zero = zero_token(cb);

    ConditioningContext ctx = poke_context(poke);
    ctx.decoded.push_back({observed, zero});

    // Brute-force route: enumerate both branch fields by hand, apply Bayes
    // on the single observation, and mix.
    const std::uint32_t poke_offset = model.layout().flow_offset(poke.token);
    const std::uint32_t zero_offset = model.layout().flow_offset(zero);
    const auto part = rect_cells(grid, 2, 2, 2, 2);
    const auto whole = rect_cells(grid, 2, 2, 2, 4);
    std::vector<std::vector<std::uint32_t>> fields(2);
    fields[0].assign(grid.locations(), zero_offset);  // whole moves
    for (Location c : whole) fields[0][c] = poke_offset;
    fields[1].assign(grid.locations(), zero_offset);  // part moves
    for (Location c : part) fields[1][c] = poke_offset;
    double prior[2] = {0.5, 0.5};
    double like[2];
    for (int m = 0; m < 2; ++m)
        like[m] = fields[m][observed] == zero_offset ? prior[m] : 0.0;
    const double total = like[0] + like[1];
    REQUIRE(total > 0.0);

    const auto dist = model.query_distribution(ctx, queried);
    for (std::uint32_t j = 0; j < dist.probabilities.size(); ++j) {
        double expect = 0.0;
        for (int m = 0; m < 2; ++m)
            if (fields[m][queried] == j) expect += like[m] / total;
        CHECK(dist.probabilities[j] == Catch::Approx(expect).margin(1e-12));
    }
    // The observation killed the whole-group mode: the queried location is
    // a point mass on zero.
    CHECK(is_point_mass(dist, zero_offset));
}

TEST_CASE("poking outside the part branch admits only the whole-group mode") {
    const OracleModel model(articulated_scene(), 0, 2.0, 5);
    const Location poked = model.grid().at(2, 5);  // not in the part branch
    const Poke poke = make_poke(poked, {0.0, 1.0}, model.codebook());
    const auto modes = model.enumerate_modes(poke_context(poke).pokes);
    REQUIRE(modes.size() == 1);
    CHECK(modes[0].prior == Catch::Approx(1.0));
    const std::uint32_t poke_offset = model.layout().flow_offset(poke.token);
    for (Location c : model.scene().groups[0].cells) CHECK(modes[0].field[c] == poke_offset);
}

TEST_CASE("support closure moves together and nowhere else") {
    SyntheticScene scene;
    scene.grid = GridShape(10, 10);
    scene.groups.push_back({rect_cells(scene.grid, 7, 1, 2, 3), 0.5, {}});  // A
    scene.groups.push_back({rect_cells(scene.grid, 5, 1, 2, 3), 0.5, {}});  // B on A
    scene.groups.push_back({rect_cells(scene.grid, 3, 1, 2, 3), 0.5, {}});  // C on B
    scene.groups.push_back({rect_cells(scene.grid, 1, 6, 2, 3), 0.5, {}});  // unrelated D
    scene.support_edges = {{0, 1}, {1, 2}};
    const OracleModel model(scene, 0, 2.0, 5);
    const std::uint32_t zero_offset = model.layout().flow_offset(zero_token(model.codebook()));

    const auto motion_cells = [&](std::uint32_t group) {
        const Poke poke = make_poke(scene.groups[group].cells[0], {1.0, 0.0}, model.codebook());
        const auto field = model.query_distribution_field(poke_context(poke));
        std::vector<Location> moving;
        for (Location i = 0; i < scene.grid.locations(); ++i)
            if (!is_point_mass(field.distributions[i], zero_offset)) moving.push_back(i);
        return moving;
    };

    const auto closure_cells = [&](std::uint32_t group) {
        const auto mask = scene.closure_mask(group);
        std::vector<Location> cells;
        for (Location i = 0; i < scene.grid.locations(); ++i)
            if (mask.contains(i)) cells.push_back(i);
        return cells;
    };

    CHECK(motion_cells(0) == closure_cells(0));  // A + B + C
    CHECK(motion_cells(1) == closure_cells(1));  // B + C
    CHECK(motion_cells(2) == closure_cells(2));  // C alone
    CHECK(motion_cells(3) == closure_cells(3));  // D alone
    CHECK(closure_cells(0).size() == 18);
}

TEST_CASE("poke on background yields an all-static field") {
    const OracleModel model(two_rigid_groups(), 0, 2.0, 5);
    const Poke poke = make_poke(model.grid().at(0, 7), {1.0, 0.0}, model.codebook());
    const auto field = model.query_distribution_field(poke_context(poke));
    const std::uint32_t zero_offset = model.layout().flow_offset(zero_token(model.codebook()));
    for (Location i = 0; i < model.grid().locations(); ++i)
        CHECK(is_point_mass(field.distributions[i], zero_offset));
}

TEST_CASE("observations inconsistent with every mode fall back to noise") {
    const OracleModel model(two_rigid_groups(), 0, 2.0, 5);
    const Poke poke = make_poke(model.scene().groups[0].cells[0], {1.0, 0.0}, model.codebook());
    ConditioningContext ctx = poke_context(poke);
    // Claim a background location moved: impossible with noise_eps = 0.
    ctx.decoded.push_back({model.grid().at(0, 0), poke.token});
    const auto dist = model.query_distribution(ctx, model.grid().at(7, 7));
    const double uniform = 1.0 / model.layout().flow_content_size;
    for (double p : dist.probabilities) CHECK(p == Catch::Approx(uniform));
}

TEST_CASE("gt_affordance closed form") {
    const double tau = 0.0;

    SECTION("noiseless: mobility is read off on-group, zero off-group") {
        const OracleModel model(two_rigid_groups(0.0), 0, 2.0, 5);
        const auto epi = analytic_epigraphy(model.codebook());
        const auto aff = model.gt_affordance(epi, tau);
        CHECK(aff.values[model.grid().at(0, 0)] == 0.0);
        CHECK(aff.values[model.scene().groups[0].cells[0]] == Catch::Approx(0.7));
        CHECK(aff.values[model.scene().groups[1].cells[0]] == Catch::Approx(0.5));
    }

    SECTION("uniform noise adds eps * |F_motion| / |F| everywhere") {
        const OracleModel model(two_rigid_groups(0.1), 0, 2.0, 5);
        const auto epi = analytic_epigraphy(model.codebook());
        const auto aff = model.gt_affordance(epi, tau);
        const double noise = 0.1 * 24.0 / 25.0;
        CHECK(aff.values[model.grid().at(0, 0)] == Catch::Approx(noise));
        // verified independently by summing the oracle's unconditioned
        // distribution over the motion token set
        const auto dist = model.query_distribution(ConditioningContext{}, model.grid().at(0, 0));
        double summed = 0.0;
        for (Token t : motion_token_set(epi, tau))
            summed += dist.probabilities[model.layout().flow_offset(t)];
        CHECK(summed == Catch::Approx(noise));
    }

    SECTION("support raises the carried group's motion prior") {
        SyntheticScene scene;
        scene.grid = GridShape(8, 8);
        scene.groups.push_back({rect_cells(scene.grid, 5, 1, 2, 2), 0.3, {}});
        scene.groups.push_back({rect_cells(scene.grid, 3, 1, 2, 2), 0.2, {}});
        scene.support_edges = {{0, 1}};  // poking/moving A carries B
        const OracleModel model(scene, 0, 2.0, 5);
        const auto epi = analytic_epigraphy(model.codebook());
        const auto aff = model.gt_affordance(epi, tau);
        CHECK(aff.values[scene.groups[0].cells[0]] == Catch::Approx(0.3));
        CHECK(aff.values[scene.groups[1].cells[0]] ==
              Catch::Approx(1.0 - (1.0 - 0.2) * (1.0 - 0.3)));
    }
}

TEST_CASE("oracle distributions always normalize", "[property]") {
    Rng rng(2024);
    SceneGenConfig config;
    config.grid = GridShape(12, 12);
    config.group_count_min = 1;
    config.group_count_max = 3;
    config.group_size_min = 2;
    config.group_size_max = 4;
    config.placement_margin = 1;
    config.articulation_prob = 0.5;
    config.support_stack_prob = 0.3;

    for (int trial = 0; trial < 30; ++trial) {
        config.noise_eps = trial % 3 == 0 ? 0.0 : 0.1 * rng.next_double();
        const auto generated = generate_scene(config, rng.next_u64());
        const OracleModel model(generated.scene, 0, 2.0, 5);
        const Location poke_loc =
            static_cast<Location>(rng.next_below(model.grid().locations()));
        const Token token =
            model.codebook().token_base +
            static_cast<Token>(rng.next_below(model.codebook().vocab_size()));
        ConditioningContext ctx;
        ctx.pokes.push_back({poke_loc, token});
        for (int d = 0; d < 4; ++d) {
            Location loc = static_cast<Location>(rng.next_below(model.grid().locations()));
            bool used = loc == poke_loc;
            for (const auto& pair : ctx.decoded) used = used || pair.location == loc;
            if (used) continue;
            ctx.decoded.push_back(
                {loc, model.codebook().token_base +
                          static_cast<Token>(rng.next_below(model.codebook().vocab_size()))});
        }
        const Location query = static_cast<Location>(rng.next_below(model.grid().locations()));
        const auto dist = model.query_distribution(ctx, query);
        CHECK_NOTHROW(dist.validate(1e-9));
        const auto unconditioned =
            model.query_distribution(ConditioningContext{}, query);
        CHECK_NOTHROW(unconditioned.validate(1e-9));
    }
}

TEST_CASE("appending an observation consistent with a mode never lowers its posterior") {
    const OracleModel model(articulated_scene(), 0, 2.0, 5);
    const Poke poke = make_poke(model.grid().at(2, 2), {1.0, 0.0}, model.codebook());
    const auto modes = model.enumerate_modes(poke_context(poke).pokes);
    REQUIRE(modes.size() == 2);

    for (std::size_t target = 0; target < modes.size(); ++target) {
        std::vector<DecodedPair> decoded;
        double prev = modes[target].prior;
        for (Location loc = 0; loc < model.grid().locations(); ++loc) {
            if (loc == poke.location) continue;
            decoded.push_back({loc, model.layout().flow_content_begin() +
                                        modes[target].field[loc]});
            const auto post = model.posterior_weights(modes, decoded);
            REQUIRE_FALSE(post.empty());
            CHECK(post[target] >= prev - 1e-12);
            prev = post[target];
            if (decoded.size() >= 6) break;
        }
    }
}

TEST_CASE("incremental session matches stateless recomputation") {
    SceneGenConfig config;
    config.grid = GridShape(10, 10);
    config.group_count_min = 2;
    config.group_count_max = 2;
    config.group_size_min = 3;
    config.group_size_max = 4;
    config.placement_margin = 1;
    config.articulation_prob = 1.0;
    config.noise_eps = 0.05;
    const auto generated = generate_scene(config, 99);
    const OracleModel model(generated.scene, 0, 2.0, 5);

    const Poke poke =
        make_poke(generated.scene.groups[0].cells[0], {1.0, 0.0}, model.codebook());
    auto session = model.open_session(poke_context(poke));
    ConditioningContext ctx = poke_context(poke);

    Rng rng(5);
    for (int step = 0; step < 40; ++step) {
        Location loc = static_cast<Location>(rng.next_below(model.grid().locations()));
        bool used = loc == poke.location;
        for (const auto& pair : ctx.decoded) used = used || pair.location == loc;
        if (used) continue;
        const auto from_session = session->query(loc);
        const auto stateless = model.query_distribution(ctx, loc);
        for (std::uint32_t j = 0; j < from_session.probabilities.size(); ++j)
            CHECK(from_session.probabilities[j] ==
                  Catch::Approx(stateless.probabilities[j]).margin(1e-12));
        const Token token = model.codebook().token_base +
                            static_cast<Token>(from_session.sample_offset(rng.next_double()));
        session->append(loc, token);
        ctx.decoded.push_back({loc, token});
    }
}

TEST_CASE("context rules are enforced") {
    const OracleModel model(two_rigid_groups(), 0, 2.0, 5);

    ConditioningContext moving_camera;
    moving_camera.camera = CameraPose::unspecified;
    CHECK_THROWS_AS(model.query_distribution(moving_camera, 0), validation_error);

    ConditioningContext observations_only;
    observations_only.decoded.push_back({0, zero_token(model.codebook())});
    CHECK_THROWS_AS(model.query_distribution(observations_only, 1), model_contract_error);

    ConditioningContext duplicate;
    duplicate.pokes.push_back({3, zero_token(model.codebook())});
    duplicate.decoded.push_back({3, zero_token(model.codebook())});
    CHECK_THROWS_AS(model.query_distribution(duplicate, 1), validation_error);
}
