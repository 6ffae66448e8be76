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
 * Solution-quality metrics for graph-coloring runs.
 */
#pragma once

#include "sha/errors.hpp"
#include "sha/problems.hpp"
#include "sha/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace sha {

/// proper[b] != 0 iff basis state b encodes a proper coloring.
inline std::vector<char> proper_mask(const GraphInstance &g) {
    if (g.n_qubits() > kMaxQubits) {
        throw ResourceError("proper_mask: instance too large");
    }
    std::vector<char> mask(std::size_t{1} << g.n_qubits());
    for (std::size_t b = 0; b < mask.size(); ++b) {
        mask[b] = is_proper(g, b) ? 1 : 0;
    }
    return mask;
}

/// Probability mass on proper colorings.
inline double accuracy(std::span<const double> probs, std::span<const char> proper) {
    if (probs.size() != proper.size()) {
        throw DimensionError("accuracy: distribution and instance sizes differ");
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < probs.size(); ++b) {
        if (proper[b]) {
            acc += probs[b];
        }
    }
    return acc;
}

inline double accuracy(const Statevector &state, const GraphInstance &g) {
    if (state.n_qubits() != g.n_qubits()) {
        throw DimensionError("accuracy: state and instance qubit counts differ");
    }
    const auto probs = exact_probabilities(state);
    return accuracy(probs, proper_mask(g));
}

/// Fraction of shots that are proper colorings.
inline double accuracy(const ShotHistogram &hist, const GraphInstance &g) {
    if (hist.n_qubits != g.n_qubits()) {
        throw DimensionError("accuracy: histogram and instance qubit counts differ");
    }
    if (hist.total_shots == 0) {
        return 0.0;
    }
    std::uint64_t good = 0;
    for (const auto &[b, c] : hist.counts) {
        if (is_proper(g, b)) {
            good += c;
        }
    }
    return static_cast<double>(good) / static_cast<double>(hist.total_shots);
}

/// Most likely outcome of an exact distribution; ties go to the lowest index.
inline std::size_t most_likely_index(std::span<const double> probs) {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

/// Number of trailing iterations ceil(fraction * T), at least 1.
inline std::size_t trailing_window(std::size_t total, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("most_likely_accuracy: fraction must lie in (0, 1]");
    }
    // The epsilon keeps products such as 0.02 * 50 from rounding up past an integer.
    const double w = std::ceil(fraction * static_cast<double>(total) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(w, 1.0)), 1, total);
}

/// Share of the trailing window whose modal outcome was a proper coloring.
inline double most_likely_accuracy(std::span<const char> modal_proper, double trailing_fraction) {
    if (modal_proper.empty()) {
        throw std::invalid_argument("most_likely_accuracy: empty trace");
    }
    const std::size_t w = trailing_window(modal_proper.size(), trailing_fraction);
    std::size_t hits = 0;
    for (std::size_t i = modal_proper.size() - w; i < modal_proper.size(); ++i) {
        hits += modal_proper[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(w);
}

inline double most_likely_accuracy(std::span<const ShotHistogram> trace, const GraphInstance &g,
                                   double trailing_fraction) {
    std::vector<char> flags;
    flags.reserve(trace.size());
    for (const auto &h : trace) {
        flags.push_back(is_proper(g, h.mode()) ? 1 : 0);
    }
    return most_likely_accuracy(flags, trailing_fraction);
}

} // namespace sha
