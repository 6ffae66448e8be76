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
#include "sha/problems.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace sha;

namespace {

// Symbolic oracle: expands sum_a prod_l (1 + s_l Z_{v,l})(1 + s_l Z_{w,l}) monomial by
// monomial (s_l = (-1)^{a_l}) and collects coefficients per Z support.
PauliSum expand_edge_sum(const GraphInstance &g) {
    PauliSum out{g.n_qubits(), {}};
    const std::size_t m = g.m_bits;
    for (const auto &[v, w] : g.edges) {
        for (std::size_t a = 0; a < g.k_colors; ++a) {
            // each factor l picks one of: 1, s Zv, s Zw, Zv Zw
            std::size_t combos = 1;
            for (std::size_t l = 0; l < m; ++l) {
                combos *= 4;
            }
            for (std::size_t c = 0; c < combos; ++c) {
                double coeff = 1.0;
                PauliOps ops;
                std::size_t code = c;
                for (std::size_t l = 0; l < m; ++l) {
                    const double s = ((a >> l) & 1U) ? -1.0 : 1.0;
                    switch (code % 4) {
                    case 1:
                        coeff *= s;
                        ops.emplace(g.qubit(v, l), Axis::Z);
                        break;
                    case 2:
                        coeff *= s;
                        ops.emplace(g.qubit(w, l), Axis::Z);
                        break;
                    case 3:
                        ops.emplace(g.qubit(v, l), Axis::Z);
                        ops.emplace(g.qubit(w, l), Axis::Z);
                        break;
                    default:
                        break;
                    }
                    code /= 4;
                }
                out.add(coeff, ops);
            }
        }
    }
    return simplify(out);
}

} // namespace

TEST_CASE("color_bits", "[problems]") {
    CHECK(color_bits(2) == 1);
    CHECK(color_bits(4) == 2);
    CHECK(color_bits(8) == 3);
    CHECK_THROWS_AS(color_bits(3), EncodingError);
    CHECK_THROWS_AS(color_bits(1), EncodingError);
    CHECK_THROWS_AS(make_graph(3, {{0, 1}}, 6), EncodingError);
}

TEST_CASE("edge normalization", "[problems]") {
    const auto g = make_graph(3, {{2, 0}, {0, 2}, {1, 0}});
    CHECK(g.edges == std::vector<Edge>{{0, 1}, {0, 2}});
    CHECK_THROWS_AS(make_graph(3, {{1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(make_graph(3, {{0, 3}}), std::out_of_range);
}

TEST_CASE("generate_graph", "[problems]") {
    const auto a = generate_graph(8, 0.5, 11);
    const auto b = generate_graph(8, 0.5, 11);
    CHECK(a.edges == b.edges);
    CHECK(generate_graph(6, 0.0, 1).edges.empty());
    CHECK(generate_graph(6, 1.0, 1).edges.size() == 15);
    CHECK_THROWS_AS(generate_graph(6, 1.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_graph(1, 0.5, 1), std::invalid_argument);
    // Edge density tracks p over many samples.
    std::size_t total = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        total += generate_graph(10, 0.3, s).edges.size();
    }
    const double density = static_cast<double>(total) / (200.0 * 45.0);
    CHECK(std::abs(density - 0.3) < 0.02);
}

TEST_CASE("coloring Hamiltonian matches the symbolic expansion", "[problems]") {
    for (std::size_t k : {2U, 4U, 8U}) {
        const auto g = make_graph(3, {{0, 1}, {1, 2}}, k);
        const auto h = simplify(coloring_hamiltonian(g));
        const auto oracle = expand_edge_sum(g);
        REQUIRE(h.size() == oracle.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
            CHECK(h.terms[i].ops == oracle.terms[i].ops);
            CHECK(std::abs(h.terms[i].coefficient - oracle.terms[i].coefficient) < 1e-12);
        }
    }
}

TEST_CASE("coloring Hamiltonian structure", "[problems]") {
    const auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}}, 4);
    const auto h = coloring_hamiltonian(g);
    CHECK(h.n_qubits == 8);
    CHECK(h.size() == 12);
    CHECK(h.diagonal());
    CHECK(term_edges(g, h) == std::vector<std::size_t>{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2});
    CHECK_THROWS_AS(term_edges(g, simplify(h)), DimensionError);
}

TEST_CASE("diagonal equals 4^m times conflicts", "[problems]") {
    const auto g = make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {0, 3}}, 4);
    const auto d = diagonal_values(coloring_hamiltonian(g));
    for (std::uint64_t b = 0; b < d.size(); ++b) {
        REQUIRE(d[b] == Catch::Approx(16.0 * static_cast<double>(conflicts(g, b))));
        REQUIRE((d[b] == 0.0) == is_proper(g, b));
    }
}

TEST_CASE("proper coloring counts", "[problems]") {
    SECTION("single edge, k = 4: 4 * 3") {
        CHECK(count_proper_colorings(make_graph(2, {{0, 1}}, 4)) == 12);
    }
    SECTION("triangle, k = 4: 4 * 3 * 2") {
        CHECK(count_proper_colorings(make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, 4)) == 24);
    }
    SECTION("K5 is not 4-colorable") {
        std::vector<Edge> e;
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = i + 1; j < 5; ++j) {
                e.emplace_back(i, j);
            }
        }
        CHECK(count_proper_colorings(make_graph(5, e, 4)) == 0);
    }
    SECTION("path of n nodes: k (k-1)^(n-1)") {
        CHECK(count_proper_colorings(make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 4)) ==
              4 * 81);
    }
    SECTION("annotate fills the ratio") {
        auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, 4);
        annotate_solutions(g);
        CHECK(g.solution_count == 24);
        CHECK(g.solution_ratio == Catch::Approx(24.0 / 64.0));
    }
}

TEST_CASE("is_proper overloads agree", "[problems]") {
    const auto g = make_graph(3, {{0, 1}, {1, 2}}, 4);
    for (std::uint64_t b = 0; b < 64; ++b) {
        REQUIRE(is_proper(g, b) == is_proper(g, index_to_bitstring(b, 6)));
        std::vector<std::size_t> colors{g.color_of(b, 0), g.color_of(b, 1), g.color_of(b, 2)};
        REQUIRE(encode_colors(g, colors) == b);
    }
    CHECK(is_proper(g, encode_colors(g, {0, 1, 0})));
    CHECK_FALSE(is_proper(g, encode_colors(g, {0, 0, 1})));
    CHECK_THROWS_AS(encode_colors(g, {0, 4, 0}), std::out_of_range);
    CHECK_THROWS_AS(is_proper(g, std::string_view("0101")), DimensionError);
}

TEST_CASE("graph traversal", "[problems]") {
    const auto g = make_graph(5, {{0, 3}, {3, 4}, {1, 2}});
    CHECK_FALSE(is_connected(g));
    CHECK(bfs_order(g) == std::vector<std::size_t>{0, 3, 4, 1, 2});
    CHECK(is_connected(make_graph(3, {{0, 1}, {1, 2}})));
}

TEST_CASE("fixture round trip", "[problems]") {
    auto g = generate_graph(6, 0.5, 3);
    annotate_solutions(g);
    std::stringstream ss;
    write_fixture(ss, g);
    const auto back = read_fixture(ss, "x");
    CHECK(back.id == "x");
    CHECK(back.n_nodes == g.n_nodes);
    CHECK(back.edges == g.edges);
    CHECK(back.k_colors == g.k_colors);
    CHECK(back.p_edge == g.p_edge);
    CHECK(back.seed == g.seed);
    CHECK(back.solution_count == g.solution_count);
    CHECK(back.solution_ratio == g.solution_ratio);

    std::istringstream missing("edge 0 1\n");
    CHECK_THROWS_AS(read_fixture(missing), ConfigError);
    std::istringstream bad("nodes=2 colors=3 p=0 seed=0\nsolutions=0 ratio=0\n");
    CHECK_THROWS_AS(read_fixture(bad), ConfigError);
}
