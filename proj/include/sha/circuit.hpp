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
 * Gate and layered circuit programs with symbolic parameter slots.
 */
#pragma once

#include "sha/errors.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sha {

enum class GateKind { RX, RY, RZ, H, X, CNOT, CRZ, CRX, RZZ, MULTI_Z_PHASE };

inline std::string_view gate_name(GateKind kind) {
    switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CRZ: return "CRZ";
    case GateKind::CRX: return "CRX";
    case GateKind::RZZ: return "RZZ";
    case GateKind::MULTI_Z_PHASE: return "MZ";
    }
    return "?";
}

constexpr bool is_rotation(GateKind kind) {
    return kind != GateKind::H && kind != GateKind::X && kind != GateKind::CNOT;
}

/// Number of qubits a gate kind acts on; 0 means "any number >= 1".
constexpr std::size_t gate_arity(GateKind kind) {
    switch (kind) {
    case GateKind::CNOT:
    case GateKind::CRZ:
    case GateKind::CRX:
    case GateKind::RZZ: return 2;
    case GateKind::MULTI_Z_PHASE: return 0;
    default: return 1;
    }
}

/**
 * One gate of a circuit program.
 *
 * Rotations are exp(-i*angle/2 * G) with G the Pauli generator (X, Y, Z, ZZ,
 * or a Z-string for MULTI_Z_PHASE). Controlled gates list the control first.
 * A rotation takes its angle either from a fixed value or from parameter
 * slot `slot`, in which case the applied angle is `scale * params[slot]`.
 */
struct Gate {
    GateKind kind{GateKind::H};
    std::vector<std::size_t> qubits;
    std::optional<std::size_t> slot;
    std::optional<double> fixed_angle;
    double scale{1.0};

    static Gate fixed(GateKind kind, std::vector<std::size_t> qubits,
                      std::optional<double> angle = std::nullopt) {
        return Gate{kind, std::move(qubits), std::nullopt, angle, 1.0};
    }
    static Gate param(GateKind kind, std::vector<std::size_t> qubits, std::size_t slot,
                      double scale = 1.0) {
        return Gate{kind, std::move(qubits), slot, std::nullopt, scale};
    }

    [[nodiscard]] bool parameterized() const { return slot.has_value(); }

    /// Throws if the gate is malformed for an `n_qubits` register.
    void validate(std::size_t n_qubits) const {
        const std::size_t arity = gate_arity(kind);
        if ((arity != 0 && qubits.size() != arity) || qubits.empty()) {
            throw std::invalid_argument(std::string(gate_name(kind)) + ": wrong number of qubits");
        }
        for (std::size_t i = 0; i < qubits.size(); ++i) {
            if (qubits[i] >= n_qubits) {
                detail::fail_range(std::string(gate_name(kind)) + ": qubit index " +
                                   std::to_string(qubits[i]) + " out of range");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (qubits[i] == qubits[j]) {
                    throw std::invalid_argument(std::string(gate_name(kind)) +
                                                ": repeated qubit index");
                }
            }
        }
        if (is_rotation(kind)) {
            if (slot.has_value() == fixed_angle.has_value()) {
                throw std::invalid_argument(std::string(gate_name(kind)) +
                                            ": rotation needs exactly one angle source");
            }
        } else if (slot || fixed_angle) {
            throw std::invalid_argument(std::string(gate_name(kind)) + " takes no angle");
        }
    }
};

struct Layer {
    std::vector<Gate> gates;
    bool identity_at_zero{true};
};

/**
 * Layered gate program. Slots of layer i come before those of layer i+1 for
 * everything built by the ansatz catalog, which is what truncate() relies on.
 */
class Circuit {
  public:
    Circuit() = default;
    explicit Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) {}

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::size_t param_count() const { return param_count_; }
    [[nodiscard]] const std::vector<Layer> &layers() const { return layers_; }
    [[nodiscard]] std::size_t n_layers() const { return layers_.size(); }

    /// Appends a layer whose slots are numbered locally from 0; they are
    /// shifted to follow the circuit's current parameters. Returns the offset.
    std::size_t append_layer(Layer layer) {
        const std::size_t offset = param_count_;
        std::size_t local = 0;
        for (auto &g : layer.gates) {
            g.validate(n_qubits_);
            if (g.slot) {
                local = std::max(local, *g.slot + 1);
                *g.slot += offset;
            }
        }
        param_count_ += local;
        layers_.push_back(std::move(layer));
        return offset;
    }

    /// Appends a layer whose slots already index the global parameter vector.
    void append_layer_global(Layer layer) {
        for (const auto &g : layer.gates) {
            g.validate(n_qubits_);
            if (g.slot) {
                param_count_ = std::max(param_count_, *g.slot + 1);
            }
        }
        layers_.push_back(std::move(layer));
    }

    /// Circuit made of the first `n` layers.
    [[nodiscard]] Circuit truncate(std::size_t n) const {
        if (n > layers_.size()) {
            detail::fail_range("truncate: only " + std::to_string(layers_.size()) + " layers");
        }
        Circuit out(n_qubits_);
        for (std::size_t i = 0; i < n; ++i) {
            out.append_layer_global(layers_[i]);
        }
        return out;
    }

    /// Parameter range [begin, end) owned by layer `i` (empty for fixed layers).
    [[nodiscard]] std::pair<std::size_t, std::size_t> layer_slots(std::size_t i) const {
        std::size_t lo = SIZE_MAX;
        std::size_t hi = 0;
        for (const auto &g : layers_.at(i).gates) {
            if (g.slot) {
                lo = std::min(lo, *g.slot);
                hi = std::max(hi, *g.slot + 1);
            }
        }
        return lo == SIZE_MAX ? std::pair<std::size_t, std::size_t>{0, 0}
                              : std::pair<std::size_t, std::size_t>{lo, hi};
    }

    /// How many gates read each slot.
    [[nodiscard]] std::vector<std::size_t> slot_uses() const {
        std::vector<std::size_t> uses(param_count_, 0);
        for (const auto &layer : layers_) {
            for (const auto &g : layer.gates) {
                if (g.slot) {
                    ++uses[*g.slot];
                }
            }
        }
        return uses;
    }

    [[nodiscard]] bool all_layers_identity_at_zero() const {
        for (const auto &l : layers_) {
            if (!l.identity_at_zero) {
                return false;
            }
        }
        return true;
    }

  private:
    std::size_t n_qubits_{0};
    std::size_t param_count_{0};
    std::vector<Layer> layers_;
};

/// One gate per line, e.g. `RX q0 slot3`, `CRZ q0 q1 slot7`, `H q2`, `RX q1 2*slot0`.
inline std::string to_string(const Circuit &circuit) {
    std::ostringstream os;
    for (std::size_t li = 0; li < circuit.n_layers(); ++li) {
        const auto &layer = circuit.layers()[li];
        os << "# layer " << li << (layer.identity_at_zero ? "" : " (not identity at zero)")
           << '\n';
        for (const auto &g : layer.gates) {
            os << gate_name(g.kind);
            for (auto q : g.qubits) {
                os << " q" << q;
            }
            if (g.slot) {
                os << ' ';
                if (g.scale != 1.0) {
                    os << g.scale << '*';
                }
                os << "slot" << *g.slot;
            } else if (g.fixed_angle) {
                os << ' ' << *g.fixed_angle;
            }
            os << '\n';
        }
    }
    return os.str();
}

} // namespace sha
