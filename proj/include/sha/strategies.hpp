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
 * Training schedules: plain VQE, sequential Hamiltonian assembly (SHA) with
 * random / chronological / nodewise partitions, layerwise learning (LL),
 * Layer-VQE, QAOA, and the SHA+LL / SHA+Layer-VQE hybrids.
 *
 * Every schedule is a list of stages. A stage minimizes the energy of one
 * circuit under one (partial) Hamiltonian over a subset of the parameter
 * vector, warm-started from the previous stage's best parameters. Stages that
 * train a subset of terms or parameters stop at the coarse radius; the final
 * full stage uses the fine one.
 */
#pragma once

#include "sha/ansatz.hpp"
#include "sha/errors.hpp"
#include "sha/metrics.hpp"
#include "sha/optimize.hpp"
#include "sha/pauli.hpp"
#include "sha/problems.hpp"
#include "sha/rng.hpp"
#include "sha/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sha {

enum class StrategyKind { SVQE, SHA, LL, LVQE, QAOA, SHA_LL, SHA_LVQE };
enum class PartitionStrategy { RANDOM, CHRONOLOGICAL, NODEWISE };

inline std::string_view kind_name(StrategyKind k) {
    switch (k) {
    case StrategyKind::SVQE: return "SVQE";
    case StrategyKind::SHA: return "SHA";
    case StrategyKind::LL: return "LL";
    case StrategyKind::LVQE: return "LVQE";
    case StrategyKind::QAOA: return "QAOA";
    case StrategyKind::SHA_LL: return "SHA_LL";
    case StrategyKind::SHA_LVQE: return "SHA_LVQE";
    }
    return "?";
}

/// Short partition codes: RD (random), SQ (chronological), NW (nodewise).
inline std::string_view partition_code(PartitionStrategy p) {
    switch (p) {
    case PartitionStrategy::RANDOM: return "RD";
    case PartitionStrategy::CHRONOLOGICAL: return "SQ";
    case PartitionStrategy::NODEWISE: return "NW";
    }
    return "?";
}

constexpr bool uses_sha(StrategyKind k) {
    return k == StrategyKind::SHA || k == StrategyKind::SHA_LL || k == StrategyKind::SHA_LVQE;
}

/// Layerwise-learning hyperparameters: start depth s, layers added per step p,
/// trailing layers trained q, phase-2 window fraction r.
struct LayerwiseParams {
    std::size_t s{1};
    std::size_t p{1};
    std::size_t q{1};
    double r{1.0};
};

struct StrategySpec {
    StrategyKind kind{StrategyKind::SVQE};
    std::optional<PartitionStrategy> partition;
    std::size_t n_partitions{1};
    /// Optional per-stage iteration caps overriding the defaults; must match the stage count.
    std::vector<std::size_t> per_stage_max_iters;
    LayerwiseParams ll;
    std::size_t qaoa_p{3};

    void validate() const {
        if (uses_sha(kind) && (!partition || n_partitions < 1)) {
            throw std::invalid_argument(std::string(kind_name(kind)) +
                                        ": needs a partition strategy and M >= 1");
        }
        if (kind == StrategyKind::LL || kind == StrategyKind::SHA_LL) {
            if (ll.s < 1 || ll.p < 1 || ll.q < 1 || !(ll.r >= 0.0 && ll.r <= 1.0)) {
                throw std::invalid_argument("LL: need s, p, q >= 1 and 0 <= r <= 1");
            }
        }
        if (kind == StrategyKind::QAOA && qaoa_p < 1) {
            throw std::invalid_argument("QAOA: p must be >= 1");
        }
    }

    /// Canonical text form, e.g. `SVQE`, `SHA:NW:4`, `SHA_LVQE:SQ:2`, `QAOA:3`, `LL:1:1:1:1`.
    [[nodiscard]] std::string label() const {
        std::string out(kind_name(kind));
        if (uses_sha(kind)) {
            out += ':';
            out += partition_code(*partition);
            out += ':' + std::to_string(n_partitions);
        }
        if (kind == StrategyKind::QAOA && qaoa_p != 3) {
            out += ':' + std::to_string(qaoa_p);
        }
        if ((kind == StrategyKind::LL || kind == StrategyKind::SHA_LL) &&
            (ll.s != 1 || ll.p != 1 || ll.q != 1 || ll.r != 1.0)) {
            out += ":s" + std::to_string(ll.s) + ":p" + std::to_string(ll.p) + ":q" +
                   std::to_string(ll.q) + ":r" + format_double(ll.r);
        }
        return out;
    }
};

/**
 * Parses the label() syntax. Fields after the kind are ':'-separated:
 * SHA kinds take `<RD|SQ|NW>:<M>`; QAOA takes an optional depth; LL and
 * SHA_LL take optional `s<int>`, `p<int>`, `q<int>`, `r<real>` items.
 */
inline StrategySpec parse_strategy(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = text.find(':', start);
        parts.emplace_back(text.substr(start, colon - start));
        if (colon == std::string_view::npos) {
            break;
        }
        start = colon + 1;
    }
    const auto bad = [&](const std::string &why) {
        return std::invalid_argument("strategy '" + std::string(text) + "': " + why);
    };
    const auto to_size = [&](std::string_view s) {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) {
            throw bad("expected an integer, got '" + std::string(s) + "'");
        }
        return v;
    };
    StrategySpec spec;
    bool found = false;
    for (auto k : {StrategyKind::SVQE, StrategyKind::SHA, StrategyKind::LL, StrategyKind::LVQE,
                   StrategyKind::QAOA, StrategyKind::SHA_LL, StrategyKind::SHA_LVQE}) {
        if (parts[0] == kind_name(k)) {
            spec.kind = k;
            found = true;
        }
    }
    if (!found) {
        throw bad("unknown kind");
    }
    std::size_t next = 1;
    if (uses_sha(spec.kind)) {
        if (parts.size() < 3) {
            throw bad("expected <kind>:<RD|SQ|NW>:<M>");
        }
        if (parts[1] == "RD") {
            spec.partition = PartitionStrategy::RANDOM;
        } else if (parts[1] == "SQ") {
            spec.partition = PartitionStrategy::CHRONOLOGICAL;
        } else if (parts[1] == "NW") {
            spec.partition = PartitionStrategy::NODEWISE;
        } else {
            throw bad("unknown partition '" + parts[1] + "'");
        }
        spec.n_partitions = to_size(parts[2]);
        next = 3;
    }
    if (spec.kind == StrategyKind::QAOA && parts.size() > 1) {
        spec.qaoa_p = to_size(parts[1]);
        next = 2;
    }
    for (; next < parts.size(); ++next) {
        const std::string &item = parts[next];
        if (item.empty() || (spec.kind != StrategyKind::LL && spec.kind != StrategyKind::SHA_LL)) {
            throw bad("unexpected field '" + item + "'");
        }
        const std::string_view value = std::string_view(item).substr(1);
        switch (item[0]) {
        case 's': spec.ll.s = to_size(value); break;
        case 'p': spec.ll.p = to_size(value); break;
        case 'q': spec.ll.q = to_size(value); break;
        case 'r': {
            double r = 0.0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), r);
            if (ec != std::errc{} || p != value.data() + value.size()) {
                throw bad("bad r value");
            }
            spec.ll.r = r;
            break;
        }
        default: throw bad("unknown LL field '" + item + "'");
        }
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------- partitions

namespace detail {

/// Sizes of M near-equal blocks over N items, larger blocks first.
inline std::vector<std::size_t> block_sizes(std::size_t n, std::size_t m) {
    if (m < 1 || m > n) {
        fail_range("partition: M=" + std::to_string(m) + " not in [1, " + std::to_string(n) + "]");
    }
    std::vector<std::size_t> sizes(m, n / m);
    for (std::size_t j = 0; j < n % m; ++j) {
        ++sizes[j];
    }
    return sizes;
}

inline Partition split_sequence(const std::vector<std::size_t> &items, std::size_t m,
                                std::string_view code) {
    Partition out;
    std::size_t pos = 0;
    for (auto size : block_sizes(items.size(), m)) {
        std::vector<std::size_t> block(items.begin() + static_cast<std::ptrdiff_t>(pos),
                                       items.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(block.begin(), block.end());
        out.blocks.push_back(std::move(block));
        out.labels.push_back(std::string(code) + std::to_string(out.blocks.size()));
        pos += size;
    }
    return out;
}

} // namespace detail

/// Seeded Fisher-Yates shuffle of term indices split into M disjoint near-equal blocks.
inline Partition partition_random(std::size_t n_terms, std::size_t m, std::uint64_t seed) {
    detail::block_sizes(n_terms, m);
    std::vector<std::size_t> idx(n_terms);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n_terms; i > 1; --i) {
        std::swap(idx[i - 1], idx[rng.below(i)]);
    }
    return detail::split_sequence(idx, m, "RD");
}

/// Contiguous blocks in input order; the first N mod M blocks get one extra term.
inline Partition partition_chronological(std::size_t n_terms, std::size_t m) {
    std::vector<std::size_t> idx(n_terms);
    std::iota(idx.begin(), idx.end(), 0);
    return detail::split_sequence(idx, m, "SQ");
}

/**
 * Nodes in BFS order from node 0 are cut into M contiguous groups (larger
 * groups first); block j holds every term of every edge incident to a node
 * of group j. Blocks overlap on edges between groups.
 */
inline Partition partition_nodewise(const GraphInstance &g, const PauliSum &h, std::size_t m) {
    const auto edge_of = term_edges(g, h);
    const auto order = bfs_order(g);
    const auto sizes = detail::block_sizes(g.n_nodes, m);
    Partition out;
    std::size_t pos = 0;
    for (auto size : sizes) {
        std::vector<bool> in_group(g.n_nodes, false);
        std::string label = "nodes";
        for (std::size_t i = pos; i < pos + size; ++i) {
            in_group[order[i]] = true;
            label += (i == pos ? " " : ",") + std::to_string(order[i]);
        }
        pos += size;
        std::vector<std::size_t> block;
        for (std::size_t t = 0; t < h.size(); ++t) {
            const auto &[u, v] = g.edges[edge_of[t]];
            if (in_group[u] || in_group[v]) {
                block.push_back(t);
            }
        }
        out.blocks.push_back(std::move(block));
        out.labels.push_back(std::move(label));
    }
    return out;
}

// ---------------------------------------------------------------- training

struct TrainingConfig {
    /// Iteration cap of a full (final) stage; partial stages get a share of it.
    std::size_t max_iters{4000};
    /// 0 selects exact expectations.
    std::uint64_t shots{200};
    double coarse_threshold{0.8};
    double fine_threshold{1e-6};
    double initial_step{0.5};
    std::uint64_t seed{0};
};

struct IterationMetric {
    double accuracy{0.0};
    bool most_likely_correct{false};
};

/// Called once per objective evaluation with the exact output distribution
/// and, in shot mode, the histogram the energy was estimated from.
using MetricProbe = std::function<IterationMetric(std::span<const double>, const ShotHistogram *)>;

struct StageRecord {
    std::string label;
    OptimResult result;
    Params initial_params;
    std::vector<std::size_t> trainable;
    std::vector<std::size_t> term_indices; // indices into the input Hamiltonian
    std::size_t n_layers{0};
    double threshold{0.0};
    std::size_t max_iters{0};
    /// Fidelity between the previous stage's output and this stage's initial output,
    /// recorded whenever the circuit grew.
    std::optional<double> start_fidelity;
};

struct RunRecord {
    StrategySpec strategy;
    std::string graph_id;
    std::string architecture;
    std::uint64_t seed{0};
    std::vector<StageRecord> stages;
    Params final_params;
    std::size_t total_iterations{0};
    std::vector<IterationMetric> metric_trace;
    std::vector<std::string> warnings;
    Circuit circuit; // the full trained circuit
};

namespace detail {

class StageRunner {
  public:
    StageRunner(const PauliSum &h, const TrainingConfig &cfg, MetricProbe probe, RunRecord &rec)
        : h_(h), cfg_(cfg), probe_(std::move(probe)), rec_(rec) {}

    /// Minimizes the energy of `circuit` under the input terms `term_indices`
    /// over the slots `trainable`; `params` (the full vector) is updated in place.
    void run(const std::string &label, const Circuit &circuit,
             const std::vector<std::size_t> &term_indices, const std::vector<std::size_t> &trainable,
             Params &params, double threshold, std::size_t max_iters) {
        const std::size_t stage_index = rec_.stages.size();
        StageRecord st;
        st.label = label;
        st.initial_params = params;
        st.trainable = trainable;
        st.term_indices = term_indices;
        st.n_layers = circuit.n_layers();
        st.threshold = threshold;
        st.max_iters = max_iters;
        if (last_circuit_ && last_circuit_->n_layers() != circuit.n_layers()) {
            const auto before = run_circuit(*last_circuit_, prefix(params, *last_circuit_));
            const auto after = run_circuit(circuit, prefix(params, circuit));
            st.start_fidelity = fidelity(before, after);
        }

        PauliSum stage_h{h_.n_qubits, {}};
        for (auto i : term_indices) {
            stage_h.terms.push_back(h_.terms.at(i));
        }
        stage_h = simplify(stage_h);

        CircuitObjective objective(circuit, std::move(stage_h), cfg_.shots,
                                   SeedPolicy{SeedPolicy::Mode::Fresh,
                                              derive_seed(cfg_.seed, stage_index)});
        if (probe_) {
            objective.set_observer(
                [this](const Statevector &, std::span<const double> probs,
                       const ShotHistogram *hist) { rec_.metric_trace.push_back(probe_(probs, hist)); });
        }
        Params full(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(circuit.param_count()));
        const auto sub_objective = [&](std::span<const double> x) {
            for (std::size_t i = 0; i < trainable.size(); ++i) {
                full[trainable[i]] = x[i];
            }
            return objective(full);
        };
        Params x0;
        for (auto i : trainable) {
            x0.push_back(params.at(i));
        }
        OptimConfig oc;
        oc.max_iters = std::max<std::size_t>(max_iters, 1);
        oc.progress_threshold = threshold;
        oc.initial_step = cfg_.initial_step;
        oc.seed = derive_seed(cfg_.seed, stage_index);
        st.result = minimize(sub_objective, x0, oc);
        for (std::size_t i = 0; i < trainable.size(); ++i) {
            params[trainable[i]] = st.result.best_params[i];
        }
        rec_.total_iterations += st.result.iterations_used;
        rec_.stages.push_back(std::move(st));
        last_circuit_ = circuit;
    }

  private:
    static std::span<const double> prefix(const Params &p, const Circuit &c) {
        return std::span<const double>(p).first(c.param_count());
    }

    const PauliSum &h_;
    const TrainingConfig &cfg_;
    MetricProbe probe_;
    RunRecord &rec_;
    std::optional<Circuit> last_circuit_;
};

inline std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

/// Slots of layers [first, last) of `c`.
inline std::vector<std::size_t> layer_range_slots(const Circuit &c, std::size_t first,
                                                  std::size_t last) {
    std::vector<std::size_t> out;
    for (std::size_t l = first; l < last; ++l) {
        const auto [lo, hi] = c.layer_slots(l);
        for (std::size_t s = lo; s < hi; ++s) {
            out.push_back(s);
        }
    }
    return out;
}

inline std::size_t stage_cap(const StrategySpec &spec, const TrainingConfig &cfg,
                             std::size_t stage, std::size_t n_stages, bool final) {
    if (!spec.per_stage_max_iters.empty()) {
        if (spec.per_stage_max_iters.size() != n_stages) {
            throw std::invalid_argument("per_stage_max_iters: expected " +
                                        std::to_string(n_stages) + " entries");
        }
        return spec.per_stage_max_iters[stage];
    }
    return final ? cfg.max_iters : std::max<std::size_t>(cfg.max_iters / n_stages, 1);
}

/// Layerwise-learning phase-1 depths: s, s+p, s+2p, ... capped at L.
inline std::vector<std::size_t> ll_depths(const LayerwiseParams &ll, std::size_t n_layers) {
    std::vector<std::size_t> depths{std::min(ll.s, n_layers)};
    while (depths.back() < n_layers) {
        depths.push_back(std::min(depths.back() + ll.p, n_layers));
    }
    return depths;
}

/// Phase-2 windows [begin, end) of ceil(r*L) layers tiling the circuit.
inline std::vector<std::pair<std::size_t, std::size_t>> ll_windows(double r, std::size_t n_layers) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (r <= 0.0) {
        return out;
    }
    const auto w = static_cast<std::size_t>(std::ceil(r * static_cast<double>(n_layers) - 1e-9));
    for (std::size_t b = 0; b < n_layers; b += std::max<std::size_t>(w, 1)) {
        out.emplace_back(b, std::min(b + w, n_layers));
    }
    return out;
}

} // namespace detail

/// Probe computing exact accuracy and the modal-outcome flag for `g`.
inline MetricProbe coloring_probe(const GraphInstance &g) {
    auto mask = std::make_shared<std::vector<char>>(proper_mask(g));
    return [mask](std::span<const double> probs, const ShotHistogram *hist) {
        IterationMetric m;
        m.accuracy = accuracy(probs, *mask);
        const std::size_t mode = hist ? hist->mode() : most_likely_index(probs);
        m.most_likely_correct = (*mask)[mode] != 0;
        return m;
    };
}

inline Partition make_partition(PartitionStrategy strategy, std::size_t m, const GraphInstance &g,
                                const PauliSum &h, std::uint64_t seed) {
    switch (strategy) {
    case PartitionStrategy::RANDOM: return partition_random(h.size(), m, derive_seed(seed, 0x5AA7));
    case PartitionStrategy::CHRONOLOGICAL: return partition_chronological(h.size(), m);
    case PartitionStrategy::NODEWISE: return partition_nodewise(g, h, m);
    }
    throw std::invalid_argument("make_partition: unknown strategy");
}

/// Plain VQE: zero initial parameters, one fine-threshold run on the full Hamiltonian.
inline RunRecord train_svqe(const Circuit &circuit, const PauliSum &h, const TrainingConfig &cfg,
                            const MetricProbe &probe = {}) {
    RunRecord rec;
    rec.strategy.kind = StrategyKind::SVQE;
    rec.seed = cfg.seed;
    rec.circuit = circuit;
    Params params(circuit.param_count(), 0.0);
    detail::StageRunner runner(h, cfg, probe, rec);
    runner.run("full", circuit, detail::all_indices(h.size()),
               detail::all_indices(circuit.param_count()), params, cfg.fine_threshold,
               detail::stage_cap(rec.strategy, cfg, 0, 1, true));
    rec.final_params = params;
    return rec;
}

/**
 * SHA: stage k (k < M) trains every parameter against the terms of blocks
 * 1..k at the coarse threshold with cap max_iters/M; stage M uses the whole
 * Hamiltonian at the fine threshold with cap max_iters.
 */
inline RunRecord train_sha(const Circuit &circuit, const PauliSum &h, const Partition &partition,
                           const TrainingConfig &cfg, const MetricProbe &probe = {},
                           const StrategySpec *spec_in = nullptr) {
    partition.validate(h.size(), false);
    RunRecord rec;
    if (spec_in) {
        rec.strategy = *spec_in;
    } else {
        rec.strategy.kind = StrategyKind::SHA;
        rec.strategy.partition = PartitionStrategy::CHRONOLOGICAL;
        rec.strategy.n_partitions = partition.size();
    }
    rec.seed = cfg.seed;
    rec.circuit = circuit;
    Params params(circuit.param_count(), 0.0);
    detail::StageRunner runner(h, cfg, probe, rec);
    const std::size_t m = partition.size();
    const auto slots = detail::all_indices(circuit.param_count());
    for (std::size_t k = 1; k <= m; ++k) {
        const bool final = (k == m);
        runner.run(final ? "full" : "prefix " + std::to_string(k), circuit,
                   prefix_indices(partition, k), slots, params,
                   final ? cfg.fine_threshold : cfg.coarse_threshold,
                   detail::stage_cap(rec.strategy, cfg, k - 1, m, final));
    }
    rec.final_params = params;
    return rec;
}

namespace detail {

/// Shared body of LL and SHA+LL. With a partition, each phase-1 stage becomes
/// an SHA sweep over its blocks.
inline RunRecord layerwise(ArchitectureId arch, std::size_t n_layers, const PauliSum &h,
                           const StrategySpec &spec, const TrainingConfig &cfg,
                           const MetricProbe &probe, const Partition *partition) {
    const Circuit full = build_ansatz(arch, h.n_qubits, n_layers);
    RunRecord rec;
    rec.strategy = spec;
    rec.seed = cfg.seed;
    rec.circuit = full;
    rec.architecture = std::string(architecture_name(arch));
    Params params(full.param_count(), 0.0);
    StageRunner runner(h, cfg, probe, rec);

    const auto depths = ll_depths(spec.ll, n_layers);
    const auto windows = ll_windows(spec.ll.r, n_layers);
    const std::size_t inner = partition ? partition->size() : 1;
    const std::size_t n_stages = depths.size() * inner + windows.size();
    const auto all_terms = all_indices(h.size());
    std::size_t stage = 0;
    for (std::size_t d = 0; d < depths.size(); ++d) {
        const std::size_t depth = depths[d];
        const Circuit c = full.truncate(depth);
        const std::size_t first = d == 0 ? 0 : (depth > spec.ll.q ? depth - spec.ll.q : 0);
        const auto trainable = layer_range_slots(c, first, depth);
        for (std::size_t k = 1; k <= inner; ++k) {
            std::string label = "layers " + std::to_string(depth);
            if (partition) {
                label += " prefix " + std::to_string(k);
            }
            runner.run(label, c, partition ? prefix_indices(*partition, k) : all_terms, trainable,
                       params, cfg.coarse_threshold, stage_cap(spec, cfg, stage, n_stages, false));
            ++stage;
        }
    }
    for (const auto &[b, e] : windows) {
        runner.run("window " + std::to_string(b) + "-" + std::to_string(e), full, all_terms,
                   layer_range_slots(full, b, e), params, cfg.fine_threshold,
                   stage_cap(spec, cfg, stage, n_stages, true));
        ++stage;
    }
    rec.final_params = params;
    return rec;
}

/// Shared body of Layer-VQE and SHA+Layer-VQE.
inline RunRecord layer_vqe(ArchitectureId arch, std::size_t n_layers, const PauliSum &h,
                           const StrategySpec &spec, const TrainingConfig &cfg,
                           const MetricProbe &probe, const Partition *partition) {
    Circuit full(h.n_qubits);
    full.append_layer(ry_layer(h.n_qubits));
    for (std::size_t l = 0; l < n_layers; ++l) {
        full.append_layer(catalog_layer(arch, h.n_qubits));
    }
    RunRecord rec;
    rec.strategy = spec;
    rec.seed = cfg.seed;
    rec.circuit = full;
    rec.architecture = std::string(architecture_name(arch));
    if (!verify_identity_at_zero(catalog_layer(arch, h.n_qubits), h.n_qubits)) {
        rec.warnings.push_back(std::string(architecture_name(arch)) +
                               " layers are not the identity at zero; the state changes when a "
                               "layer is added");
    }
    Params params(full.param_count(), 0.0);
    StageRunner runner(h, cfg, probe, rec);
    const auto all_terms = all_indices(h.size());

    // Plain: [RY], +1, ..., +L, final. Hybrid: (RY + layer 1), +2, ..., +L, each an SHA sweep, then final.
    std::vector<std::size_t> depths;
    if (!partition) {
        depths.push_back(1);
    }
    for (std::size_t l = 1; l <= n_layers; ++l) {
        depths.push_back(1 + l);
    }
    const std::size_t inner = partition ? partition->size() : 1;
    const std::size_t n_stages = depths.size() * inner + 1;
    std::size_t stage = 0;
    for (auto depth : depths) {
        const Circuit c = full.truncate(depth);
        const auto trainable = all_indices(c.param_count());
        for (std::size_t k = 1; k <= inner; ++k) {
            std::string label = depth == 1 ? "ry" : "layers " + std::to_string(depth - 1);
            if (partition) {
                label += " prefix " + std::to_string(k);
            }
            runner.run(label, c, partition ? prefix_indices(*partition, k) : all_terms, trainable,
                       params, cfg.coarse_threshold, stage_cap(spec, cfg, stage, n_stages, false));
            ++stage;
        }
    }
    runner.run("full", full, all_terms, all_indices(full.param_count()), params,
               cfg.fine_threshold, stage_cap(spec, cfg, stage, n_stages, true));
    rec.final_params = params;
    return rec;
}

} // namespace detail

inline RunRecord train_ll(ArchitectureId arch, std::size_t n_layers, const PauliSum &h,
                          const LayerwiseParams &ll, const TrainingConfig &cfg,
                          const MetricProbe &probe = {}) {
    StrategySpec spec;
    spec.kind = StrategyKind::LL;
    spec.ll = ll;
    spec.validate();
    return detail::layerwise(arch, n_layers, h, spec, cfg, probe, nullptr);
}

inline RunRecord train_lvqe(ArchitectureId arch, std::size_t n_layers, const PauliSum &h,
                            const TrainingConfig &cfg, const MetricProbe &probe = {}) {
    StrategySpec spec;
    spec.kind = StrategyKind::LVQE;
    return detail::layer_vqe(arch, n_layers, h, spec, cfg, probe, nullptr);
}

/// QAOA at depth p from the constant-speed schedule; one fine-threshold run.
inline RunRecord train_qaoa(const PauliSum &h, std::size_t p, const TrainingConfig &cfg,
                            const MetricProbe &probe = {}) {
    RunRecord rec;
    rec.strategy.kind = StrategyKind::QAOA;
    rec.strategy.qaoa_p = p;
    rec.seed = cfg.seed;
    rec.architecture = "QAOA";
    rec.circuit = build_qaoa(h, p);
    Params params = constant_speed_init(p);
    detail::StageRunner runner(h, cfg, probe, rec);
    runner.run("full", rec.circuit, detail::all_indices(h.size()),
               detail::all_indices(rec.circuit.param_count()), params, cfg.fine_threshold,
               detail::stage_cap(rec.strategy, cfg, 0, 1, true));
    rec.final_params = params;
    return rec;
}

/// SHA+LL or SHA+Layer-VQE: every layer-growth stage becomes an SHA sweep over `partition`.
inline RunRecord train_hybrid(StrategyKind kind, ArchitectureId arch, std::size_t n_layers,
                              const PauliSum &h, const Partition &partition,
                              const TrainingConfig &cfg, const MetricProbe &probe = {},
                              const LayerwiseParams &ll = {}) {
    partition.validate(h.size(), false);
    StrategySpec spec;
    spec.kind = kind;
    spec.partition = PartitionStrategy::CHRONOLOGICAL;
    spec.n_partitions = partition.size();
    spec.ll = ll;
    if (kind == StrategyKind::SHA_LL) {
        return detail::layerwise(arch, n_layers, h, spec, cfg, probe, &partition);
    }
    if (kind == StrategyKind::SHA_LVQE) {
        return detail::layer_vqe(arch, n_layers, h, spec, cfg, probe, &partition);
    }
    throw std::invalid_argument("train_hybrid: kind must be SHA_LL or SHA_LVQE");
}

/**
 * Runs `spec` on a coloring instance. `arch` is ignored for QAOA. The
 * Hamiltonian is coloring_hamiltonian(g) in its per-edge term order.
 */
inline RunRecord train(const StrategySpec &spec, const GraphInstance &g, ArchitectureId arch,
                       std::size_t n_layers, const TrainingConfig &cfg, bool record_metrics = true) {
    spec.validate();
    const PauliSum h = coloring_hamiltonian(g);
    const MetricProbe probe = record_metrics ? coloring_probe(g) : MetricProbe{};
    std::optional<Partition> partition;
    if (uses_sha(spec.kind)) {
        partition = make_partition(*spec.partition, spec.n_partitions, g, h, cfg.seed);
    }
    RunRecord rec;
    switch (spec.kind) {
    case StrategyKind::SVQE:
        rec = train_svqe(build_ansatz(arch, g.n_qubits(), n_layers), h, cfg, probe);
        break;
    case StrategyKind::SHA:
        rec = train_sha(build_ansatz(arch, g.n_qubits(), n_layers), h, *partition, cfg, probe,
                        &spec);
        break;
    case StrategyKind::LL:
        rec = detail::layerwise(arch, n_layers, h, spec, cfg, probe, nullptr);
        break;
    case StrategyKind::LVQE:
        rec = detail::layer_vqe(arch, n_layers, h, spec, cfg, probe, nullptr);
        break;
    case StrategyKind::QAOA: rec = train_qaoa(h, spec.qaoa_p, cfg, probe); break;
    case StrategyKind::SHA_LL:
        rec = detail::layerwise(arch, n_layers, h, spec, cfg, probe, &*partition);
        break;
    case StrategyKind::SHA_LVQE:
        rec = detail::layer_vqe(arch, n_layers, h, spec, cfg, probe, &*partition);
        break;
    }
    rec.strategy = spec;
    rec.graph_id = g.id;
    rec.architecture = spec.kind == StrategyKind::QAOA ? "QAOA" : std::string(architecture_name(arch));
    return rec;
}

} // namespace sha
