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
#include "sha/pauli.hpp"
#include "sha/problems.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace sha;

namespace {

PauliSum z_sum(std::size_t n, std::initializer_list<std::pair<double, std::vector<std::size_t>>> terms) {
    PauliSum s{n, {}};
    for (const auto &[c, qs] : terms) {
        PauliOps ops;
        for (auto q : qs) {
            ops.emplace(q, Axis::Z);
        }
        s.add(c, ops);
    }
    return s;
}

Statevector random_state(std::size_t n, Rng &rng) {
    std::vector<Complex> amps(std::size_t{1} << n);
    double norm = 0.0;
    for (auto &a : amps) {
        a = Complex{rng.uniform() - 0.5, rng.uniform() - 0.5};
        norm += std::norm(a);
    }
    for (auto &a : amps) {
        a /= std::sqrt(norm);
    }
    return Statevector::from_amplitudes(std::move(amps));
}

Statevector plus_state() {
    auto s = new_zero_state(1);
    apply_gate(s, Gate::fixed(GateKind::H, {0}));
    return s;
}

} // namespace

TEST_CASE("simplify", "[pauli]") {
    SECTION("like terms merge") {
        const auto s = simplify(z_sum(1, {{2.0, {0}}, {3.0, {0}}}));
        REQUIRE(s.size() == 1);
        CHECK(s.terms[0].coefficient == 5.0);
        CHECK(s.terms[0].ops == PauliOps{{0, Axis::Z}});
    }
    SECTION("cancellation drops the term") {
        CHECK(simplify(z_sum(1, {{1.0, {0}}, {-1.0, {0}}})).empty());
    }
    SECTION("order is canonical") {
        const auto a = simplify(z_sum(3, {{1.0, {2}}, {1.0, {0, 1}}, {1.0, {}}, {1.0, {0}}}));
        const auto b = simplify(z_sum(3, {{1.0, {0}}, {1.0, {}}, {1.0, {0, 1}}, {1.0, {2}}}));
        REQUIRE(a.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(a.terms[i].ops == b.terms[i].ops);
        }
        CHECK(a.terms[0].ops.empty());
    }
    SECTION("single-edge k=4 coloring Hamiltonian has 4 terms") {
        const auto g = make_graph(2, {{0, 1}}, 4);
        CHECK(simplify(coloring_hamiltonian(g)).size() == 4);
    }
}

TEST_CASE("out-of-range qubits are rejected", "[pauli]") {
    PauliSum s{2, {}};
    CHECK_THROWS_AS(s.add(1.0, {{2, Axis::Z}}), std::out_of_range);
}

TEST_CASE("expectation_exact", "[pauli]") {
    CHECK(expectation_exact(new_zero_state(1), z_sum(1, {{1.0, {0}}})) == 1.0);
    CHECK(std::abs(expectation_exact(plus_state(), z_sum(1, {{1.0, {0}}}))) < 1e-15);

    PauliSum x0{1, {}};
    x0.add(1.0, {{0, Axis::X}});
    CHECK(expectation_exact(plus_state(), x0) == Catch::Approx(1.0));

    // |+i> = S|+>: <Y> = 1
    auto plus_i = plus_state();
    apply_gate(plus_i, Gate::fixed(GateKind::RZ, {0}, std::numbers::pi / 2));
    PauliSum y0{1, {}};
    y0.add(1.0, {{0, Axis::Y}});
    CHECK(expectation_exact(plus_i, y0) == Catch::Approx(1.0));

    CHECK_THROWS_AS(expectation_exact(new_zero_state(2), z_sum(1, {{1.0, {0}}})), DimensionError);
}

TEST_CASE("uniform state energy equals mean diagonal of a coloring Hamiltonian", "[pauli]") {
    // 4 nodes, k = 4 -> 8 qubits. Oracle: brute-force mean of 16 * conflicts(b).
    const auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}, 4);
    auto s = new_zero_state(8);
    for (std::size_t q = 0; q < 8; ++q) {
        apply_gate(s, Gate::fixed(GateKind::H, {q}));
    }
    double mean = 0.0;
    for (std::uint64_t b = 0; b < 256; ++b) {
        mean += 16.0 * static_cast<double>(conflicts(g, b));
    }
    mean /= 256.0;
    CHECK(expectation_exact(s, coloring_hamiltonian(g)) == Catch::Approx(mean).epsilon(1e-12));
}

TEST_CASE("diagonal fast path agrees with the generic Pauli path", "[pauli][property]") {
    Rng rng(404);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.below(8);
        PauliSum h{n, {}};
        for (int t = 0; t < 6; ++t) {
            PauliOps ops;
            for (std::size_t q = 0; q < n; ++q) {
                if (rng.uniform() < 0.4) {
                    ops.emplace(q, Axis::Z);
                }
            }
            h.add(rng.uniform() * 4 - 2, ops);
        }
        const auto s = random_state(n, rng);
        double generic = 0.0;
        for (const auto &t : h.terms) {
            generic += t.coefficient * detail::pauli_expectation(s, t.ops);
        }
        REQUIRE(std::abs(expectation_exact(s, h) - generic) < 1e-10);
        const auto probs = exact_probabilities(s);
        REQUIRE(std::abs(expectation_from_diagonal(probs, diagonal_values(h)) - generic) < 1e-10);
    }
}

TEST_CASE("expectation_shots", "[pauli]") {
    SECTION("zero-variance state is exact") {
        CHECK(expectation_shots(new_zero_state(1), z_sum(1, {{1.0, {0}}}), 200, 5) == 1.0);
    }
    SECTION("|+> under Z0 within 5 sigma at 10^6 shots") {
        CHECK(std::abs(expectation_shots(plus_state(), z_sum(1, {{1.0, {0}}}), 1000000, 8)) <
              5e-3);
    }
    SECTION("deterministic per seed") {
        Rng rng(2);
        const auto s = random_state(3, rng);
        const auto h = z_sum(3, {{1.0, {0, 1}}, {0.5, {2}}});
        CHECK(expectation_shots(s, h, 200, 17) == expectation_shots(s, h, 200, 17));
    }
    SECTION("mean over 1000 seeds is within 3 standard errors (4-qubit diagonal)") {
        Rng rng(99);
        const auto s = random_state(4, rng);
        const auto h = z_sum(4, {{1.5, {0}}, {-0.7, {1, 2}}, {2.0, {0, 1, 2, 3}}, {0.3, {}}});
        const double exact = expectation_exact(s, h);
        const int n = 1000;
        double sum = 0.0;
        double sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double e = expectation_shots(s, h, 200, derive_seed(1234, i));
            sum += e;
            sum2 += e * e;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        const double se = std::sqrt(var / n);
        CHECK(std::abs(mean - exact) < 3 * se);
    }
    SECTION("non-diagonal sums are estimated per basis group") {
        Rng rng(6);
        const auto s = random_state(2, rng);
        PauliSum h{2, {}};
        h.add(1.0, {{0, Axis::X}});
        h.add(0.5, {{0, Axis::X}, {1, Axis::Y}});
        h.add(-0.8, {{1, Axis::Z}});
        h.add(0.2, {});
        CHECK(basis_groups(h).size() == 2);
        const double exact = expectation_exact(s, h);
        CHECK(std::abs(expectation_shots(s, h, 2000000, 3) - exact) < 5e-3);
    }
}

TEST_CASE("assemble_prefix", "[pauli]") {
    const auto h = z_sum(3, {{1.0, {0}}, {2.0, {1}}, {3.0, {2}}, {4.0, {0, 1}}});
    Partition singles{{{0}, {1}, {2}, {3}}, {}};
    SECTION("k = 1 of singleton blocks is the first term") {
        const auto p = assemble_prefix(h, singles, 1);
        REQUIRE(p.size() == 1);
        CHECK(p.terms[0].coefficient == 1.0);
    }
    SECTION("k = M reassembles the simplified sum") {
        const auto full = assemble_prefix(h, singles, 4);
        const auto ref = simplify(h);
        REQUIRE(full.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(full.terms[i].ops == ref.terms[i].ops);
            CHECK(std::abs(full.terms[i].coefficient - ref.terms[i].coefficient) < 1e-12);
        }
    }
    SECTION("overlapping blocks count a term once") {
        Partition overlap{{{0, 1}, {1, 2}, {3}}, {}};
        const auto p = assemble_prefix(h, overlap, 2);
        REQUIRE(p.size() == 3);
        CHECK(p.terms[2].coefficient == 3.0);
        CHECK(p.terms[1].coefficient == 2.0);
    }
    SECTION("k out of range") {
        CHECK_THROWS_AS(assemble_prefix(h, singles, 0), std::out_of_range);
        CHECK_THROWS_AS(assemble_prefix(h, singles, 5), std::out_of_range);
    }
    SECTION("prefix index sets grow monotonically") {
        for (std::size_t k = 1; k < singles.size(); ++k) {
            const auto a = prefix_indices(singles, k);
            const auto b = prefix_indices(singles, k + 1);
            CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        }
    }
}

TEST_CASE("partition validation", "[pauli]") {
    Partition p{{{0, 1}, {1, 2}}, {}};
    CHECK_NOTHROW(p.validate(3, false));
    CHECK_THROWS(p.validate(3, true));
    CHECK_THROWS(p.validate(4, false));
    CHECK_THROWS_AS(p.validate(2, false), std::out_of_range);
}

TEST_CASE("locality histogram", "[pauli]") {
    const auto g = make_graph(2, {{0, 1}}, 4);
    CHECK(locality_histogram(coloring_hamiltonian(g)) ==
          std::map<std::size_t, std::size_t>{{0, 1}, {2, 2}, {4, 1}});
    CHECK(locality_histogram(z_sum(2, {{1.0, {0}}, {1.0, {1}}})) ==
          std::map<std::size_t, std::size_t>{{1, 2}});
    CHECK(locality_histogram(PauliSum{3, {}}).empty());
}

TEST_CASE("text serialization", "[pauli]") {
    PauliSum h{3, {}};
    h.add(4.0, {{0, Axis::Z}, {2, Axis::Z}});
    h.add(-0.125, {});
    h.add(1e-3, {{1, Axis::X}, {2, Axis::Y}});
    const std::string text = to_string(h);
    CHECK(text == "4 Z0 Z2\n-0.125 I\n0.001 X1 Y2\n");
    std::istringstream in(text);
    const auto back = read_pauli_sum(in, 3);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.terms[i].coefficient == h.terms[i].coefficient);
        CHECK(back.terms[i].ops == h.terms[i].ops);
    }
    std::istringstream bad1("1.0 Z5\n");
    CHECK_THROWS_AS(read_pauli_sum(bad1, 3), ConfigError);
    std::istringstream bad2("abc Z0\n");
    CHECK_THROWS_AS(read_pauli_sum(bad2, 3), ConfigError);
    std::istringstream bad3("1 Z0 X0\n");
    CHECK_THROWS_AS(read_pauli_sum(bad3, 3), ConfigError);
}
