// Copyright 2026 The SHA Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "sha/strategies.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>

using namespace sha;

namespace {

GraphInstance path4() {
    auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}}, 4);
    g.id = "path4";
    return g;
}

GraphInstance triangle2() {
    auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, 2);
    g.id = "tri2";
    return g;
}

TrainingConfig small_cfg(std::uint64_t seed = 3) {
    TrainingConfig cfg;
    cfg.max_iters = 120;
    cfg.shots = 200;
    cfg.seed = seed;
    return cfg;
}

void check_disjoint_cover(const Partition &p, std::size_t n, std::size_t m) {
    REQUIRE(p.size() == m);
    std::vector<int> seen(n, 0);
    for (std::size_t j = 0; j < m; ++j) {
        REQUIRE(std::is_sorted(p.blocks[j].begin(), p.blocks[j].end()));
        if (j > 0) {
            REQUIRE(p.blocks[j].size() <= p.blocks[j - 1].size());
        }
        REQUIRE(p.blocks[j].size() >= n / m);
        REQUIRE(p.blocks[j].size() <= n / m + 1);
        for (auto i : p.blocks[j]) {
            ++seen[i];
        }
    }
    REQUIRE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

} // namespace

TEST_CASE("strategy labels parse and round trip", "[strategies]") {
    for (const char *text : {"SVQE", "SHA:NW:4", "SHA:RD:2", "SHA:SQ:1", "LVQE", "LL",
                             "SHA_LVQE:NW:4", "SHA_LL:SQ:2", "QAOA", "QAOA:5", "LL:s2:p1:q2:r0.5"}) {
        INFO(text);
        CHECK(parse_strategy(text).label() == text);
    }
    CHECK(parse_strategy("SHA:NW:4").partition == PartitionStrategy::NODEWISE);
    CHECK(parse_strategy("QAOA").qaoa_p == 3);
    CHECK_THROWS_AS(parse_strategy("SHA"), std::invalid_argument);
    CHECK_THROWS_AS(parse_strategy("SHA:XX:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_strategy("SHA:NW:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_strategy("SVQE:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_strategy("LL:r2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_strategy("NOPE"), std::invalid_argument);
}

TEST_CASE("chronological partition examples", "[strategies]") {
    const auto p = partition_chronological(10, 3);
    CHECK(p.blocks == std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    CHECK(partition_chronological(4, 4).blocks ==
          std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {3}});
    CHECK_THROWS_AS(partition_chronological(3, 4), std::out_of_range);
    CHECK_THROWS_AS(partition_chronological(3, 0), std::out_of_range);
}

TEST_CASE("partition properties", "[strategies][property]") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        const std::size_t m = 1 + rng.below(n);
        check_disjoint_cover(partition_chronological(n, m), n, m);
        const auto r = partition_random(n, m, trial);
        check_disjoint_cover(r, n, m);
        CHECK(partition_random(n, m, trial).blocks == r.blocks);
    }
    // Different seeds give different shuffles (overwhelmingly likely for N = 100).
    CHECK(partition_random(100, 4, 1).blocks != partition_random(100, 4, 2).blocks);
}

TEST_CASE("nodewise partition on a path", "[strategies]") {
    const auto g = path4();
    const auto h = coloring_hamiltonian(g);
    const auto p2 = partition_nodewise(g, h, 2);
    CHECK(p2.blocks[0] == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(p2.blocks[1] == std::vector<std::size_t>{4, 5, 6, 7, 8, 9, 10, 11});
    const auto p4 = partition_nodewise(g, h, 4);
    REQUIRE(p4.size() == 4);
    CHECK(p4.blocks[0] == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(p4.blocks[3] == std::vector<std::size_t>{8, 9, 10, 11});
    // Every term is covered and the full prefix is the whole Hamiltonian.
    CHECK(prefix_indices(p4, 4).size() == h.size());
    CHECK_THROWS_AS(partition_nodewise(g, h, 5), std::out_of_range);
}

TEST_CASE("nodewise blocks cover every term on random graphs", "[strategies][property]") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto g = generate_graph(8, 0.5, s);
        if (g.edges.empty()) {
            continue;
        }
        const auto h = coloring_hamiltonian(g);
        for (std::size_t m = 1; m <= 8; ++m) {
            const auto p = partition_nodewise(g, h, m);
            REQUIRE(prefix_indices(p, m).size() == h.size());
            REQUIRE_NOTHROW(p.validate(h.size(), false));
        }
    }
}

TEST_CASE("SHA with one partition is SVQE", "[strategies]") {
    const auto g = path4();
    const auto cfg = small_cfg();
    const auto svqe = train(parse_strategy("SVQE"), g, ArchitectureId::A3, 1, cfg);
    const auto sha1 = train(parse_strategy("SHA:NW:1"), g, ArchitectureId::A3, 1, cfg);
    REQUIRE(sha1.stages.size() == 1);
    CHECK(sha1.final_params == svqe.final_params);
    CHECK(sha1.total_iterations == svqe.total_iterations);
    REQUIRE(sha1.metric_trace.size() == svqe.metric_trace.size());
    for (std::size_t i = 0; i < svqe.stages[0].result.trajectory.size(); ++i) {
        REQUIRE(sha1.stages[0].result.trajectory[i].value ==
                svqe.stages[0].result.trajectory[i].value);
    }
}

TEST_CASE("SHA stage schedule", "[strategies]") {
    const auto g = path4();
    const auto cfg = small_cfg();
    const auto rec = train(parse_strategy("SHA:NW:4"), g, ArchitectureId::A3, 1, cfg);
    REQUIRE(rec.stages.size() == 4);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(rec.stages[k].threshold == cfg.coarse_threshold);
        CHECK(rec.stages[k].max_iters == cfg.max_iters / 4);
        CHECK(rec.stages[k].result.iterations_used <= cfg.max_iters / 4);
        // warm start
        CHECK(rec.stages[k + 1].initial_params == rec.stages[k].result.best_params);
        CHECK(rec.stages[k].term_indices.size() <= rec.stages[k + 1].term_indices.size());
    }
    CHECK(rec.stages[3].threshold == cfg.fine_threshold);
    CHECK(rec.stages[3].max_iters == cfg.max_iters);
    CHECK(rec.stages[3].term_indices.size() == 12);
    CHECK(rec.stages[0].initial_params == Params(rec.circuit.param_count(), 0.0));
    std::size_t total = 0;
    for (const auto &s : rec.stages) {
        total += s.result.iterations_used;
    }
    CHECK(rec.total_iterations == total);
    CHECK(rec.metric_trace.size() == total);
}

TEST_CASE("per-stage iteration overrides", "[strategies]") {
    auto spec = parse_strategy("SHA:SQ:2");
    spec.per_stage_max_iters = {5, 9};
    const auto rec = train(spec, path4(), ArchitectureId::A1, 1, small_cfg());
    CHECK(rec.stages[0].result.iterations_used <= 5);
    CHECK(rec.stages[1].result.iterations_used <= 9);
    spec.per_stage_max_iters = {5};
    CHECK_THROWS_AS(train(spec, path4(), ArchitectureId::A1, 1, small_cfg()),
                    std::invalid_argument);
}

TEST_CASE("layerwise learning stages and freezing", "[strategies]") {
    const auto g = triangle2();
    const auto cfg = small_cfg();
    const auto rec = train(parse_strategy("LL"), g, ArchitectureId::A3, 3, cfg);
    // depths 1, 2, 3 then one window covering all layers
    REQUIRE(rec.stages.size() == 4);
    CHECK(rec.stages[0].n_layers == 1);
    CHECK(rec.stages[1].n_layers == 2);
    CHECK(rec.stages[2].n_layers == 3);
    CHECK(rec.stages[3].n_layers == 3);
    const std::size_t per = params_per_layer(ArchitectureId::A3, 3);
    CHECK(rec.stages[1].trainable.front() == per);
    CHECK(rec.stages[1].trainable.size() == per);
    CHECK(rec.stages[3].trainable.size() == 3 * per);
    CHECK(rec.stages[3].threshold == cfg.fine_threshold);
    // Frozen layer-1 parameters survive stage 2 unchanged.
    const auto &before = rec.stages[1].initial_params;
    const auto &after = rec.stages[2].initial_params;
    for (std::size_t i = 0; i < per; ++i) {
        CHECK(before[i] == after[i]);
    }
}

TEST_CASE("layerwise schedules", "[strategies]") {
    CHECK(detail::ll_depths({1, 1, 1, 1.0}, 3) == std::vector<std::size_t>{1, 2, 3});
    CHECK(detail::ll_depths({2, 3, 1, 1.0}, 6) == std::vector<std::size_t>{2, 5, 6});
    CHECK(detail::ll_depths({5, 1, 1, 1.0}, 3) == std::vector<std::size_t>{3});
    using W = std::vector<std::pair<std::size_t, std::size_t>>;
    CHECK(detail::ll_windows(1.0, 3) == W{{0, 3}});
    CHECK(detail::ll_windows(0.5, 4) == W{{0, 2}, {2, 4}});
    CHECK(detail::ll_windows(0.5, 3) == W{{0, 2}, {2, 3}});
    CHECK(detail::ll_windows(0.0, 3).empty());
}

TEST_CASE("Layer-VQE grows the circuit without changing the state", "[strategies]") {
    const auto g = triangle2();
    const auto rec = train(parse_strategy("LVQE"), g, ArchitectureId::A3, 2, small_cfg());
    // RY stage, +1, +2, final
    REQUIRE(rec.stages.size() == 4);
    CHECK(rec.warnings.empty());
    CHECK_FALSE(rec.stages[0].start_fidelity.has_value());
    for (std::size_t i = 1; i < 3; ++i) {
        REQUIRE(rec.stages[i].start_fidelity.has_value());
        CHECK(*rec.stages[i].start_fidelity == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(rec.stages[i].n_layers == rec.stages[i - 1].n_layers + 1);
    }
    CHECK(rec.stages[3].threshold == small_cfg().fine_threshold);

    const auto warned = train(parse_strategy("LVQE"), g, ArchitectureId::A12, 2, small_cfg());
    CHECK_FALSE(warned.warnings.empty());
}

TEST_CASE("hybrid stage counts", "[strategies]") {
    const auto g = path4();
    const std::size_t layers = 2;
    const std::size_t m = 2;
    const auto lvqe = train(parse_strategy("SHA_LVQE:NW:2"), g, ArchitectureId::A3, layers,
                            small_cfg());
    CHECK(lvqe.stages.size() == layers * m + 1);
    const auto ll = train(parse_strategy("SHA_LL:NW:2"), g, ArchitectureId::A3, layers,
                          small_cfg());
    CHECK(ll.stages.size() == layers * m + 1);
    CHECK_THROWS_AS(train_hybrid(StrategyKind::SHA, ArchitectureId::A3, 1,
                                 coloring_hamiltonian(g), partition_chronological(12, 2),
                                 small_cfg()),
                    std::invalid_argument);
}

TEST_CASE("QAOA starts from the constant-speed schedule", "[strategies]") {
    const auto rec = train(parse_strategy("QAOA:2"), triangle2(), ArchitectureId::A3, 1,
                           small_cfg());
    REQUIRE(rec.stages.size() == 1);
    CHECK(rec.stages[0].initial_params == constant_speed_init(2));
    CHECK(rec.architecture == "QAOA");
    CHECK(rec.final_params.size() == 4);
}

TEST_CASE("training is deterministic per seed", "[strategies]") {
    const auto g = path4();
    for (const char *s : {"SVQE", "SHA:RD:3", "LL", "SHA_LVQE:SQ:2"}) {
        INFO(s);
        const auto a = train(parse_strategy(s), g, ArchitectureId::A1, 2, small_cfg(9));
        const auto b = train(parse_strategy(s), g, ArchitectureId::A1, 2, small_cfg(9));
        CHECK(a.final_params == b.final_params);
        CHECK(a.total_iterations == b.total_iterations);
    }
    const auto a = train(parse_strategy("SVQE"), g, ArchitectureId::A1, 2, small_cfg(1));
    const auto b = train(parse_strategy("SVQE"), g, ArchitectureId::A1, 2, small_cfg(2));
    CHECK(a.final_params != b.final_params);
}

TEST_CASE("metric trace reflects exact accuracy", "[strategies]") {
    const auto g = path4();
    auto cfg = small_cfg();
    cfg.shots = 0;
    const auto rec = train(parse_strategy("SVQE"), g, ArchitectureId::A3, 1, cfg);
    REQUIRE(rec.metric_trace.size() == rec.total_iterations);
    // At zero parameters the state is |0..0>, which colors every node alike.
    CHECK(rec.metric_trace.front().accuracy == 0.0);
    CHECK_FALSE(rec.metric_trace.front().most_likely_correct);
    const auto final_state = run_circuit(rec.circuit, rec.final_params);
    CHECK(accuracy(final_state, g) >= 0.0);
    const auto no_metrics = train(parse_strategy("SVQE"), g, ArchitectureId::A3, 1, cfg, false);
    CHECK(no_metrics.metric_trace.empty());
}
