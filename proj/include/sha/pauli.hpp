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
/**
 * @file
 * Pauli strings, Hamiltonian sums, expectation values and partial assembly.
 */
#pragma once

#include "sha/errors.hpp"
#include "sha/rng.hpp"
#include "sha/simulator.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sha {

enum class Axis : std::uint8_t { X, Y, Z };

inline char axis_char(Axis a) { return a == Axis::X ? 'X' : (a == Axis::Y ? 'Y' : 'Z'); }

/// Qubit -> axis; absent qubits act as identity.
using PauliOps = std::map<std::size_t, Axis>;

struct PauliTerm {
    double coefficient{0.0};
    PauliOps ops;

    [[nodiscard]] std::size_t locality() const { return ops.size(); }

    [[nodiscard]] bool diagonal() const {
        return std::all_of(ops.begin(), ops.end(),
                           [](const auto &kv) { return kv.second == Axis::Z; });
    }

    /// Bit mask of the qubits the term acts on.
    [[nodiscard]] std::uint64_t mask() const {
        std::uint64_t m = 0;
        for (const auto &[q, a] : ops) {
            m |= std::uint64_t{1} << q;
        }
        return m;
    }
};

inline constexpr double kZeroCoefficient = 1e-12;

struct PauliSum {
    std::size_t n_qubits{0};
    std::vector<PauliTerm> terms;

    [[nodiscard]] std::size_t size() const { return terms.size(); }
    [[nodiscard]] bool empty() const { return terms.empty(); }

    [[nodiscard]] bool diagonal() const {
        return std::all_of(terms.begin(), terms.end(),
                           [](const PauliTerm &t) { return t.diagonal(); });
    }

    void add(double coefficient, PauliOps ops) {
        for (const auto &[q, a] : ops) {
            if (q >= n_qubits) {
                detail::fail_range("PauliSum: qubit " + std::to_string(q) + " >= n_qubits " +
                                   std::to_string(n_qubits));
            }
        }
        terms.push_back(PauliTerm{coefficient, std::move(ops)});
    }
};

/// Merges like terms, drops |c| < 1e-12 and sorts terms by their ops map.
inline PauliSum simplify(const PauliSum &sum) {
    std::map<PauliOps, double> merged;
    for (const auto &t : sum.terms) {
        merged[t.ops] += t.coefficient;
    }
    PauliSum out{sum.n_qubits, {}};
    for (auto &[ops, c] : merged) {
        if (std::abs(c) >= kZeroCoefficient) {
            out.terms.push_back(PauliTerm{c, ops});
        }
    }
    return out;
}

/// Simplified term count per locality; identity is locality 0.
inline std::map<std::size_t, std::size_t> locality_histogram(const PauliSum &sum) {
    std::map<std::size_t, std::size_t> hist;
    for (const auto &t : simplify(sum).terms) {
        ++hist[t.locality()];
    }
    return hist;
}

/// Diagonal of an all-Z sum in the computational basis.
inline std::vector<double> diagonal_values(const PauliSum &sum) {
    if (!sum.diagonal()) {
        throw std::invalid_argument("diagonal_values: sum has X or Y terms");
    }
    if (sum.n_qubits < 1 || sum.n_qubits > kMaxQubits) {
        throw ResourceError("diagonal_values: unsupported qubit count");
    }
    const std::size_t dim = std::size_t{1} << sum.n_qubits;
    std::vector<double> diag(dim, 0.0);
    for (const auto &t : sum.terms) {
        const std::uint64_t m = t.mask();
        for (std::size_t b = 0; b < dim; ++b) {
            diag[b] += (std::popcount(b & m) & 1U) ? -t.coefficient : t.coefficient;
        }
    }
    return diag;
}

namespace detail {

inline void check_dims(const Statevector &state, const PauliSum &sum) {
    if (state.n_qubits() != sum.n_qubits) {
        throw DimensionError("expectation: state has " + std::to_string(state.n_qubits()) +
                             " qubits, Hamiltonian has " + std::to_string(sum.n_qubits));
    }
}

/// <psi|P|psi> for one Pauli string P (coefficient ignored).
inline double pauli_expectation(const Statevector &state, const PauliOps &ops) {
    std::uint64_t xmask = 0;
    std::uint64_t zmask = 0;
    int n_y = 0;
    for (const auto &[q, a] : ops) {
        const std::uint64_t bit = std::uint64_t{1} << q;
        if (a != Axis::Z) {
            xmask |= bit;
        }
        if (a != Axis::X) {
            zmask |= bit;
        }
        if (a == Axis::Y) {
            ++n_y;
        }
    }
    // P|b> = i^{n_y} (-1)^{|b & zmask|} |b ^ xmask>
    static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex global = kIPow[n_y % 4];
    Complex acc{0.0, 0.0};
    for (std::size_t b = 0; b < state.dim(); ++b) {
        const Complex v = (std::popcount(b & zmask) & 1U) ? -state[b] : state[b];
        acc += std::conj(state[b ^ xmask]) * v;
    }
    return (global * acc).real();
}

} // namespace detail

inline double expectation_from_diagonal(std::span<const double> probs,
                                        std::span<const double> diag) {
    double e = 0.0;
    for (std::size_t b = 0; b < probs.size(); ++b) {
        e += probs[b] * diag[b];
    }
    return e;
}

/// <psi|H|psi>. All-Z sums take the diagonal path without basis rotation.
inline double expectation_exact(const Statevector &state, const PauliSum &sum) {
    detail::check_dims(state, sum);
    if (sum.diagonal()) {
        const auto probs = exact_probabilities(state);
        double e = 0.0;
        for (const auto &t : sum.terms) {
            const std::uint64_t m = t.mask();
            double z = 0.0;
            for (std::size_t b = 0; b < probs.size(); ++b) {
                z += (std::popcount(b & m) & 1U) ? -probs[b] : probs[b];
            }
            e += t.coefficient * z;
        }
        return e;
    }
    double e = 0.0;
    for (const auto &t : sum.terms) {
        e += t.coefficient * detail::pauli_expectation(state, t.ops);
    }
    return e;
}

/// Shot estimate of a diagonal observable plus the Z-basis histogram it was scored on.
struct ShotEstimate {
    double value{0.0};
    ShotHistogram histogram;
};

inline ShotEstimate estimate_diagonal(std::span<const double> probs, std::size_t n_qubits,
                                      std::span<const double> diag, std::uint64_t shots,
                                      std::uint64_t seed) {
    ShotEstimate out;
    out.histogram = sample_from_probabilities(probs, n_qubits, shots, seed);
    double acc = 0.0;
    for (const auto &[b, c] : out.histogram.counts) {
        acc += static_cast<double>(c) * diag[b];
    }
    out.value = acc / static_cast<double>(shots);
    return out;
}

/**
 * Groups terms so that all terms in a group agree on the axis of every qubit
 * they share (greedy, first fit, in term order).
 */
inline std::vector<std::vector<std::size_t>> basis_groups(const PauliSum &sum) {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<PauliOps> bases;
    for (std::size_t i = 0; i < sum.terms.size(); ++i) {
        const auto &ops = sum.terms[i].ops;
        bool placed = false;
        for (std::size_t g = 0; g < groups.size() && !placed; ++g) {
            bool ok = true;
            for (const auto &[q, a] : ops) {
                auto it = bases[g].find(q);
                if (it != bases[g].end() && it->second != a) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                groups[g].push_back(i);
                bases[g].insert(ops.begin(), ops.end());
                placed = true;
            }
        }
        if (!placed) {
            groups.push_back({i});
            bases.push_back(ops);
        }
    }
    return groups;
}

/**
 * Shot-based estimate of <psi|H|psi>.
 *
 * All-Z sums: one Z-basis histogram of `shots` samples scores every term.
 * Otherwise each basis group (see basis_groups) is rotated into the Z basis
 * (H for X, S^dagger then H for Y) and measured with its own `shots` samples;
 * group g uses sub-seed derive_seed(seed, g).
 */
inline double expectation_shots(const Statevector &state, const PauliSum &sum,
                                std::uint64_t shots, std::uint64_t seed) {
    detail::check_dims(state, sum);
    if (shots < 1) {
        throw std::invalid_argument("expectation_shots: shots must be >= 1");
    }
    if (sum.diagonal()) {
        const auto probs = exact_probabilities(state);
        const auto diag = diagonal_values(sum);
        return estimate_diagonal(probs, state.n_qubits(), diag, shots, seed).value;
    }
    double total = 0.0;
    const auto groups = basis_groups(sum);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        PauliOps basis;
        for (auto i : groups[g]) {
            basis.insert(sum.terms[i].ops.begin(), sum.terms[i].ops.end());
        }
        Statevector rotated = state;
        for (const auto &[q, a] : basis) {
            if (a == Axis::Y) {
                apply_gate(rotated, Gate::fixed(GateKind::RZ, {q}, -std::numbers::pi / 2));
            }
            if (a != Axis::Z) {
                apply_gate(rotated, Gate::fixed(GateKind::H, {q}));
            }
        }
        const auto hist = sample_shots(rotated, shots, derive_seed(seed, g));
        for (auto i : groups[g]) {
            const auto &t = sum.terms[i];
            const std::uint64_t m = t.mask();
            double acc = 0.0;
            for (const auto &[b, c] : hist.counts) {
                acc += (std::popcount(b & m) & 1U) ? -static_cast<double>(c)
                                                   : static_cast<double>(c);
            }
            total += t.coefficient * acc / static_cast<double>(shots);
        }
    }
    return total;
}

/// Ordered index blocks over the terms of a PauliSum (0-based term indices).
struct Partition {
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<std::string> labels;

    [[nodiscard]] std::size_t size() const { return blocks.size(); }

    /// Throws unless every index < n_terms and the union covers [0, n_terms).
    void validate(std::size_t n_terms, bool require_disjoint) const {
        std::vector<std::size_t> seen(n_terms, 0);
        for (const auto &block : blocks) {
            for (auto i : block) {
                if (i >= n_terms) {
                    detail::fail_range("partition: term index " + std::to_string(i) +
                                       " out of range");
                }
                ++seen[i];
            }
        }
        for (std::size_t i = 0; i < n_terms; ++i) {
            if (seen[i] == 0) {
                throw std::invalid_argument("partition: term " + std::to_string(i) +
                                            " not covered");
            }
            if (require_disjoint && seen[i] > 1) {
                throw std::invalid_argument("partition: term " + std::to_string(i) +
                                            " in several blocks");
            }
        }
    }
};

/// Sorted, de-duplicated term indices in the union of the first `k` blocks.
inline std::vector<std::size_t> prefix_indices(const Partition &partition, std::size_t k) {
    if (k < 1 || k > partition.size()) {
        detail::fail_range("assemble_prefix: k=" + std::to_string(k) + " not in [1, " +
                           std::to_string(partition.size()) + "]");
    }
    std::set<std::size_t> idx;
    for (std::size_t j = 0; j < k; ++j) {
        idx.insert(partition.blocks[j].begin(), partition.blocks[j].end());
    }
    return {idx.begin(), idx.end()};
}

/// Simplified sum of the terms indexed by the first `k` blocks; overlaps count once.
inline PauliSum assemble_prefix(const PauliSum &sum, const Partition &partition, std::size_t k) {
    PauliSum out{sum.n_qubits, {}};
    for (auto i : prefix_indices(partition, k)) {
        if (i >= sum.size()) {
            detail::fail_range("assemble_prefix: partition refers to term " + std::to_string(i));
        }
        out.terms.push_back(sum.terms[i]);
    }
    return simplify(out);
}

// Text form: one term per line, `<coeff> <axis><qubit> ...`, identity as `<coeff> I`.

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline void write_pauli_sum(std::ostream &os, const PauliSum &sum) {
    for (const auto &t : sum.terms) {
        os << format_double(t.coefficient);
        if (t.ops.empty()) {
            os << " I";
        }
        for (const auto &[q, a] : t.ops) {
            os << ' ' << axis_char(a) << q;
        }
        os << '\n';
    }
}

inline std::string to_string(const PauliSum &sum) {
    std::ostringstream os;
    write_pauli_sum(os, sum);
    return os.str();
}

inline PauliSum read_pauli_sum(std::istream &is, std::size_t n_qubits) {
    PauliSum sum{n_qubits, {}};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok[0] == '#') {
            continue;
        }
        const auto bad = [&](const std::string &why) {
            return ConfigError("pauli text line " + std::to_string(lineno) + ": " + why);
        };
        double coeff = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), coeff);
        if (ec != std::errc{} || p != tok.data() + tok.size()) {
            throw bad("bad coefficient '" + tok + "'");
        }
        PauliOps ops;
        while (ls >> tok) {
            if (tok == "I") {
                continue;
            }
            Axis a{};
            switch (tok[0]) {
            case 'X': a = Axis::X; break;
            case 'Y': a = Axis::Y; break;
            case 'Z': a = Axis::Z; break;
            default: throw bad("bad axis in '" + tok + "'");
            }
            std::size_t q = 0;
            auto [pq, eq] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), q);
            if (eq != std::errc{} || pq != tok.data() + tok.size() || tok.size() < 2) {
                throw bad("bad qubit in '" + tok + "'");
            }
            if (q >= n_qubits) {
                throw bad("qubit " + std::to_string(q) + " out of range");
            }
            if (!ops.emplace(q, a).second) {
                throw bad("qubit " + std::to_string(q) + " repeated");
            }
        }
        sum.terms.push_back(PauliTerm{coeff, std::move(ops)});
    }
    return sum;
}

} // namespace sha
