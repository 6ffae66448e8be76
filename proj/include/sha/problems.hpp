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
 * Graph-coloring instances, their Pauli-Z encoding and brute-force oracles.
 *
 * Node v's color occupies qubits v*m .. v*m+m-1 (bit l of the color on qubit
 * v*m+l), with m = log2(k). A basis index therefore decodes node v's color as
 * (index >> (v*m)) & (k-1).
 */
#pragma once

#include "sha/errors.hpp"
#include "sha/pauli.hpp"
#include "sha/rng.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sha {

using Edge = std::pair<std::size_t, std::size_t>;

struct GraphInstance {
    std::string id;
    std::size_t n_nodes{0};
    std::vector<Edge> edges; // u < v, sorted
    std::size_t k_colors{4};
    std::size_t m_bits{2};
    std::uint64_t seed{0};
    double p_edge{0.0};
    std::uint64_t solution_count{0};
    double solution_ratio{0.0};

    [[nodiscard]] std::size_t n_qubits() const { return n_nodes * m_bits; }

    /// k^n as a double (exact for every tractable instance).
    [[nodiscard]] double search_space() const {
        return std::pow(static_cast<double>(k_colors), static_cast<double>(n_nodes));
    }

    [[nodiscard]] std::size_t qubit(std::size_t node, std::size_t bit) const {
        return node * m_bits + bit;
    }

    [[nodiscard]] std::size_t color_of(std::uint64_t basis_index, std::size_t node) const {
        return static_cast<std::size_t>((basis_index >> (node * m_bits)) & (k_colors - 1));
    }
};

/// log2(k); throws EncodingError unless k is a power of two >= 2.
inline std::size_t color_bits(std::size_t k_colors) {
    if (k_colors < 2 || !std::has_single_bit(k_colors)) {
        throw EncodingError("color count " + std::to_string(k_colors) +
                            " is not a power of two >= 2");
    }
    return static_cast<std::size_t>(std::countr_zero(k_colors));
}

/// Sorts, orients (u < v) and de-duplicates edges; rejects loops and bad nodes.
inline std::vector<Edge> normalize_edges(std::vector<Edge> edges, std::size_t n_nodes) {
    for (auto &[u, v] : edges) {
        if (u == v) {
            throw std::invalid_argument("graph: self loop on node " + std::to_string(u));
        }
        if (u >= n_nodes || v >= n_nodes) {
            detail::fail_range("graph: edge endpoint out of range");
        }
        if (u > v) {
            std::swap(u, v);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

inline GraphInstance make_graph(std::size_t n_nodes, std::vector<Edge> edges,
                                std::size_t k_colors = 4) {
    GraphInstance g;
    g.n_nodes = n_nodes;
    g.k_colors = k_colors;
    g.m_bits = color_bits(k_colors);
    g.edges = normalize_edges(std::move(edges), n_nodes);
    return g;
}

/**
 * Gilbert G(n, p) sample: pairs (i, j), i < j, visited in lexicographic order,
 * each kept when the next Rng(seed).uniform() draw is < p. Connectivity is
 * not enforced.
 */
inline GraphInstance generate_graph(std::size_t n, double p, std::uint64_t seed,
                                    std::size_t k_colors = 4) {
    if (n < 2) {
        throw std::invalid_argument("generate_graph: need n >= 2");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("generate_graph: p must lie in [0, 1]");
    }
    Rng rng(seed);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) {
                edges.emplace_back(i, j);
            }
        }
    }
    GraphInstance g = make_graph(n, std::move(edges), k_colors);
    g.seed = seed;
    g.p_edge = p;
    return g;
}

inline std::vector<std::vector<std::size_t>> adjacency(const GraphInstance &g) {
    std::vector<std::vector<std::size_t>> adj(g.n_nodes);
    for (const auto &[u, v] : g.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto &a : adj) {
        std::sort(a.begin(), a.end());
    }
    return adj;
}

/// Breadth-first order from node 0, neighbours visited in increasing index.
/// Nodes unreachable from 0 are appended in increasing index.
inline std::vector<std::size_t> bfs_order(const GraphInstance &g) {
    std::vector<std::size_t> order;
    if (g.n_nodes == 0) {
        return order;
    }
    const auto adj = adjacency(g);
    std::vector<bool> seen(g.n_nodes, false);
    for (std::size_t root = 0; root < g.n_nodes; ++root) {
        if (seen[root]) {
            continue;
        }
        std::deque<std::size_t> queue{root};
        seen[root] = true;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            order.push_back(u);
            for (auto w : adj[u]) {
                if (!seen[w]) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    return order;
}

inline bool is_connected(const GraphInstance &g) {
    if (g.n_nodes == 0) {
        return false;
    }
    const auto adj = adjacency(g);
    std::vector<bool> seen(g.n_nodes, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (auto w : adj[u]) {
            if (!seen[w]) {
                seen[w] = true;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached == g.n_nodes;
}

/// Number of monochromatic edges of a basis state.
inline std::size_t conflicts(const GraphInstance &g, std::uint64_t basis_index) {
    std::size_t c = 0;
    for (const auto &[u, v] : g.edges) {
        if (g.color_of(basis_index, u) == g.color_of(basis_index, v)) {
            ++c;
        }
    }
    return c;
}

inline bool is_proper(const GraphInstance &g, std::uint64_t basis_index) {
    return std::none_of(g.edges.begin(), g.edges.end(), [&](const Edge &e) {
        return g.color_of(basis_index, e.first) == g.color_of(basis_index, e.second);
    });
}

/// Bitstring form; character q is qubit q.
inline bool is_proper(const GraphInstance &g, std::string_view bits) {
    if (bits.size() != g.n_qubits()) {
        throw DimensionError("is_proper: bitstring has " + std::to_string(bits.size()) +
                             " bits, instance needs " + std::to_string(g.n_qubits()));
    }
    return is_proper(g, bitstring_to_index(bits));
}

/// Basis index encoding a color list under the node-major packing.
inline std::uint64_t encode_colors(const GraphInstance &g, const std::vector<std::size_t> &colors) {
    if (colors.size() != g.n_nodes) {
        throw DimensionError("encode_colors: wrong number of nodes");
    }
    std::uint64_t index = 0;
    for (std::size_t v = 0; v < g.n_nodes; ++v) {
        if (colors[v] >= g.k_colors) {
            detail::fail_range("encode_colors: color out of range");
        }
        index |= static_cast<std::uint64_t>(colors[v]) << (v * g.m_bits);
    }
    return index;
}

inline constexpr std::uint64_t kMaxEnumeration = std::uint64_t{1} << 26;

/// Exhaustive count of assignments without a monochromatic edge.
inline std::uint64_t count_proper_colorings(const GraphInstance &g) {
    if (g.n_qubits() > 26) {
        throw ResourceError("count_proper_colorings: k^n exceeds 2^26");
    }
    const std::uint64_t space = std::uint64_t{1} << g.n_qubits();
    std::uint64_t count = 0;
    for (std::uint64_t b = 0; b < space; ++b) {
        if (is_proper(g, b)) {
            ++count;
        }
    }
    return count;
}

/// Fills solution_count and solution_ratio by brute force.
inline void annotate_solutions(GraphInstance &g) {
    g.solution_count = count_proper_colorings(g);
    g.solution_ratio = static_cast<double>(g.solution_count) / g.search_space();
}

/**
 * Pauli-Z encoding of the coloring constraint. Each edge (v, w) contributes
 *
 *   sum_{a in B^m} prod_l (1 + (-1)^{a_l} Z_{v,l}) (1 + (-1)^{a_l} Z_{w,l})
 *     = 2^m * prod_l (1 + Z_{v,l} Z_{w,l}),
 *
 * which is 4^m on a basis state where v and w share a color and 0 otherwise.
 * Terms are listed per edge (edges in sorted order), k terms per edge: the
 * monomial for bit subset S (S enumerated as masks 0 .. k-1) is
 * 2^m * prod_{l in S} Z_{v,l} Z_{w,l}. Mask 0 is the edge's identity term.
 * Nothing is merged across edges; call simplify() for the canonical form.
 */
inline PauliSum coloring_hamiltonian(const GraphInstance &g) {
    const std::size_t m = color_bits(g.k_colors);
    if (m != g.m_bits) {
        throw EncodingError("coloring_hamiltonian: m_bits inconsistent with k_colors");
    }
    PauliSum h{g.n_qubits(), {}};
    h.terms.reserve(g.edges.size() * g.k_colors);
    const double coeff = static_cast<double>(g.k_colors);
    for (const auto &[v, w] : g.edges) {
        for (std::size_t subset = 0; subset < g.k_colors; ++subset) {
            PauliOps ops;
            for (std::size_t l = 0; l < m; ++l) {
                if ((subset >> l) & 1U) {
                    ops.emplace(g.qubit(v, l), Axis::Z);
                    ops.emplace(g.qubit(w, l), Axis::Z);
                }
            }
            h.terms.push_back(PauliTerm{coeff, std::move(ops)});
        }
    }
    return h;
}

/// Edge index (into g.edges) that term `i` of coloring_hamiltonian(g) came from.
inline std::vector<std::size_t> term_edges(const GraphInstance &g, const PauliSum &h) {
    if (h.size() != g.edges.size() * g.k_colors || h.n_qubits != g.n_qubits()) {
        throw DimensionError("term_edges: Hamiltonian is not the per-edge coloring expansion "
                             "of this graph");
    }
    std::vector<std::size_t> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const std::size_t e = i / g.k_colors;
        const auto &[u, v] = g.edges[e];
        for (const auto &[q, a] : h.terms[i].ops) {
            const std::size_t node = q / g.m_bits;
            if (node != u && node != v) {
                throw DimensionError("term_edges: term " + std::to_string(i) +
                                     " does not belong to edge " + std::to_string(e));
            }
        }
        out[i] = e;
    }
    return out;
}

// Fixture text format:
//   nodes=<n> colors=<k> p=<p> seed=<s>
//   edge <u> <v>            (one per edge)
//   solutions=<s> ratio=<r>

inline void write_fixture(std::ostream &os, const GraphInstance &g) {
    os << "nodes=" << g.n_nodes << " colors=" << g.k_colors << " p=" << format_double(g.p_edge)
       << " seed=" << g.seed << '\n';
    for (const auto &[u, v] : g.edges) {
        os << "edge " << u << ' ' << v << '\n';
    }
    os << "solutions=" << g.solution_count << " ratio=" << format_double(g.solution_ratio)
       << '\n';
}

namespace detail {

template <typename T> T parse_number(std::string_view text, const std::string &what) {
    T value{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw ConfigError("fixture: bad value for " + what + ": '" + std::string(text) + "'");
    }
    return value;
}

/// Splits `key=value` tokens of one line.
inline std::vector<std::pair<std::string, std::string>> key_values(const std::string &line) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("fixture: expected key=value, got '" + tok + "'");
        }
        out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
    return out;
}

} // namespace detail

inline GraphInstance read_fixture(std::istream &is, std::string id = {}) {
    GraphInstance g;
    g.id = std::move(id);
    bool have_header = false;
    bool have_footer = false;
    std::vector<Edge> edges;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line.rfind("edge", 0) == 0) {
            std::istringstream ls(line.substr(4));
            std::size_t u = 0;
            std::size_t v = 0;
            if (!(ls >> u >> v)) {
                throw ConfigError("fixture: bad edge line '" + line + "'");
            }
            edges.emplace_back(u, v);
            continue;
        }
        for (const auto &[k, v] : detail::key_values(line)) {
            if (k == "nodes") {
                g.n_nodes = detail::parse_number<std::size_t>(v, k);
                have_header = true;
            } else if (k == "colors") {
                g.k_colors = detail::parse_number<std::size_t>(v, k);
            } else if (k == "p") {
                g.p_edge = detail::parse_number<double>(v, k);
            } else if (k == "seed") {
                g.seed = detail::parse_number<std::uint64_t>(v, k);
            } else if (k == "solutions") {
                g.solution_count = detail::parse_number<std::uint64_t>(v, k);
                have_footer = true;
            } else if (k == "ratio") {
                g.solution_ratio = detail::parse_number<double>(v, k);
            } else {
                throw ConfigError("fixture: unknown key '" + k + "'");
            }
        }
    }
    if (!have_header || !have_footer) {
        throw ConfigError("fixture: missing header or solutions line");
    }
    try {
        g.m_bits = color_bits(g.k_colors);
        g.edges = normalize_edges(std::move(edges), g.n_nodes);
    } catch (const std::exception &e) {
        throw ConfigError(std::string("fixture: ") + e.what());
    }
    return g;
}

inline GraphInstance load_fixture(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open fixture " + path.string());
    }
    return read_fixture(in, path.stem().string());
}

} // namespace sha
