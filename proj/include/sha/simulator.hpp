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
 * Dense statevector simulation.
 *
 * Qubit q is bit q of the basis-state index (little-endian). Gates are applied
 * with strided in-place updates; no 2^n x 2^n matrix is ever formed.
 */
#pragma once

#include "sha/circuit.hpp"
#include "sha/errors.hpp"
#include "sha/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sha {

using Complex = std::complex<double>;
using Params = std::vector<double>;

inline constexpr std::size_t kMaxQubits = 24;

class Statevector {
  public:
    Statevector() = default;

    /// |0...0> on `n_qubits` qubits.
    explicit Statevector(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw ResourceError("statevector: n_qubits must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(n_qubits));
        }
        amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        amps_[0] = 1.0;
    }

    /// Takes ownership of explicit amplitudes; the length must be a power of two.
    static Statevector from_amplitudes(std::vector<Complex> amps) {
        std::size_t n = 0;
        while ((std::size_t{1} << n) < amps.size()) {
            ++n;
        }
        if (amps.empty() || (std::size_t{1} << n) != amps.size()) {
            throw DimensionError("statevector: amplitude count is not a power of two");
        }
        if (n == 0) {
            throw DimensionError("statevector: need at least one qubit");
        }
        Statevector s(n);
        s.amps_ = std::move(amps);
        return s;
    }

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amps_; }
    [[nodiscard]] std::span<Complex> amplitudes() { return amps_; }
    Complex operator[](std::size_t i) const { return amps_[i]; }

    [[nodiscard]] double norm_squared() const {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

  private:
    std::size_t n_qubits_{0};
    std::vector<Complex> amps_;
};

inline Statevector new_zero_state(std::size_t n_qubits) { return Statevector(n_qubits); }

/// |<a|b>|^2
inline double fidelity(const Statevector &a, const Statevector &b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("fidelity: dimension mismatch");
    }
    Complex overlap{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        overlap += std::conj(a[i]) * b[i];
    }
    return std::norm(overlap);
}

namespace kernels {

struct Mat2 {
    Complex m00, m01, m10, m11;
};

/// Applies `m` to `target`, restricted to indices whose `ctrl_mask` bits are all set.
inline void apply_mat2(std::span<Complex> amps, std::size_t target, const Mat2 &m,
                       std::size_t ctrl_mask = 0) {
    const std::size_t stride = std::size_t{1} << target;
    const std::size_t dim = amps.size();
    for (std::size_t hi = 0; hi < dim; hi += 2 * stride) {
        for (std::size_t lo = 0; lo < stride; ++lo) {
            const std::size_t i0 = hi + lo;
            if ((i0 & ctrl_mask) != ctrl_mask) {
                continue;
            }
            const std::size_t i1 = i0 | stride;
            const Complex a0 = amps[i0];
            const Complex a1 = amps[i1];
            amps[i0] = m.m00 * a0 + m.m01 * a1;
            amps[i1] = m.m10 * a0 + m.m11 * a1;
        }
    }
}

/// exp(-i theta/2 * Z_mask): amplitude b gets e^{-i theta/2 * z(b)}, z = (-1)^{|b & mask|}.
inline void apply_z_phase(std::span<Complex> amps, std::size_t mask, double theta) {
    const Complex even = std::polar(1.0, -0.5 * theta);
    const Complex odd = std::conj(even);
    for (std::size_t b = 0; b < amps.size(); ++b) {
        amps[b] *= (std::popcount(b & mask) & 1U) ? odd : even;
    }
}

inline Mat2 rx(double t) {
    const double c = std::cos(t / 2);
    const double s = std::sin(t / 2);
    return {c, Complex{0, -s}, Complex{0, -s}, c};
}
inline Mat2 ry(double t) {
    const double c = std::cos(t / 2);
    const double s = std::sin(t / 2);
    return {c, -s, s, c};
}
inline Mat2 rz(double t) {
    return {std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2)};
}
inline Mat2 hadamard() {
    const double r = std::numbers::sqrt2 / 2;
    return {r, r, r, -r};
}
inline Mat2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }

} // namespace kernels

/**
 * Applies `gate` in place. For slot-parameterized gates `param` is the value
 * of the slot and the applied angle is `gate.scale * param`; for all other
 * gates `param` must be empty.
 */
inline void apply_gate(Statevector &state, const Gate &gate,
                       std::optional<double> param = std::nullopt) {
    gate.validate(state.n_qubits());
    if (gate.parameterized() != param.has_value()) {
        throw std::invalid_argument(std::string(gate_name(gate.kind)) +
                                    (param ? ": unexpected angle for fixed gate"
                                           : ": missing angle for parameterized gate"));
    }
    const double theta =
        param ? gate.scale * *param : gate.fixed_angle.value_or(0.0);
    auto amps = state.amplitudes();
    const auto &q = gate.qubits;
    using namespace kernels;
    switch (gate.kind) {
    case GateKind::RX: apply_mat2(amps, q[0], rx(theta)); break;
    case GateKind::RY: apply_mat2(amps, q[0], ry(theta)); break;
    case GateKind::RZ: apply_z_phase(amps, std::size_t{1} << q[0], theta); break;
    case GateKind::H: apply_mat2(amps, q[0], hadamard()); break;
    case GateKind::X: apply_mat2(amps, q[0], pauli_x()); break;
    case GateKind::CNOT: apply_mat2(amps, q[1], pauli_x(), std::size_t{1} << q[0]); break;
    case GateKind::CRZ: apply_mat2(amps, q[1], rz(theta), std::size_t{1} << q[0]); break;
    case GateKind::CRX: apply_mat2(amps, q[1], rx(theta), std::size_t{1} << q[0]); break;
    case GateKind::RZZ:
    case GateKind::MULTI_Z_PHASE: {
        std::size_t mask = 0;
        for (auto qi : q) {
            mask |= std::size_t{1} << qi;
        }
        apply_z_phase(amps, mask, theta);
        break;
    }
    }
}

/// Applies every gate of `circuit` in program order to `state`.
inline void run_circuit_inplace(const Circuit &circuit, std::span<const double> params,
                                Statevector &state) {
    if (params.size() != circuit.param_count()) {
        throw DimensionError("run_circuit: expected " + std::to_string(circuit.param_count()) +
                             " parameters, got " + std::to_string(params.size()));
    }
    if (state.n_qubits() != circuit.n_qubits()) {
        throw DimensionError("run_circuit: circuit has " + std::to_string(circuit.n_qubits()) +
                             " qubits, state has " + std::to_string(state.n_qubits()));
    }
    for (const auto &layer : circuit.layers()) {
        for (const auto &g : layer.gates) {
            apply_gate(state, g, g.slot ? std::optional<double>(params[*g.slot]) : std::nullopt);
        }
    }
}

inline Statevector run_circuit(const Circuit &circuit, std::span<const double> params,
                               Statevector initial) {
    run_circuit_inplace(circuit, params, initial);
    return initial;
}

inline Statevector run_circuit(const Circuit &circuit, std::span<const double> params) {
    return run_circuit(circuit, params, Statevector(circuit.n_qubits()));
}

inline std::vector<double> exact_probabilities(const Statevector &state) {
    std::vector<double> p(state.dim());
    for (std::size_t i = 0; i < state.dim(); ++i) {
        p[i] = std::norm(state[i]);
    }
    return p;
}

/// Basis index -> bitstring with character q holding qubit q.
inline std::string index_to_bitstring(std::uint64_t index, std::size_t n_qubits) {
    std::string s(n_qubits, '0');
    for (std::size_t q = 0; q < n_qubits; ++q) {
        if ((index >> q) & 1U) {
            s[q] = '1';
        }
    }
    return s;
}

inline std::uint64_t bitstring_to_index(std::string_view bits) {
    std::uint64_t index = 0;
    for (std::size_t q = 0; q < bits.size(); ++q) {
        if (bits[q] == '1') {
            index |= std::uint64_t{1} << q;
        } else if (bits[q] != '0') {
            throw std::invalid_argument("bitstring: unexpected character");
        }
    }
    return index;
}

struct ShotHistogram {
    std::size_t n_qubits{0};
    std::map<std::uint64_t, std::uint64_t> counts; // basis index -> count
    std::uint64_t total_shots{0};

    [[nodiscard]] std::uint64_t count(std::uint64_t index) const {
        auto it = counts.find(index);
        return it == counts.end() ? 0 : it->second;
    }

    /// Most frequent outcome; ties go to the lowest basis index.
    [[nodiscard]] std::uint64_t mode() const {
        std::uint64_t best = 0;
        std::uint64_t best_count = 0;
        for (const auto &[index, c] : counts) {
            if (c > best_count) {
                best = index;
                best_count = c;
            }
        }
        return best;
    }

    /// Same data keyed by bitstring (character q = qubit q).
    [[nodiscard]] std::map<std::string, std::uint64_t> by_bitstring() const {
        std::map<std::string, std::uint64_t> out;
        for (const auto &[index, c] : counts) {
            out.emplace(index_to_bitstring(index, n_qubits), c);
        }
        return out;
    }
};

/**
 * Draws `shots` samples from the Born distribution of `probs`.
 *
 * Algorithm: u_k = top 53 bits of the k-th std::mt19937_64(seed) output
 * scaled to [0,1); outcome = first index whose cumulative probability exceeds
 * u_k * (total probability).
 */
inline ShotHistogram sample_from_probabilities(std::span<const double> probs, std::size_t n_qubits,
                                               std::uint64_t shots, std::uint64_t seed) {
    if (shots < 1) {
        throw std::invalid_argument("sample_shots: shots must be >= 1");
    }
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    Rng rng(seed);
    ShotHistogram hist;
    hist.n_qubits = n_qubits;
    hist.total_shots = shots;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double x = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        if (it == cdf.end()) {
            it = std::prev(cdf.end());
        }
        ++hist.counts[static_cast<std::uint64_t>(it - cdf.begin())];
    }
    return hist;
}

inline ShotHistogram sample_shots(const Statevector &state, std::uint64_t shots,
                                  std::uint64_t seed) {
    const auto probs = exact_probabilities(state);
    return sample_from_probabilities(probs, state.n_qubits(), shots, seed);
}

} // namespace sha
