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
 * Layered ansatz catalog and the QAOA circuit.
 *
 * Catalog interpretation of the circuit ids 1, 3, 8, 12, 13, 16, 18 of the
 * usual expressibility survey, extended to any qubit count. Per layer:
 *
 *  | id  | gates                                                   | params  |
 *  |-----|---------------------------------------------------------|---------|
 *  | A1  | RX, RZ on every qubit                                   | 2n      |
 *  | A3  | A1 + CRZ ladder (q, q+1)                                | 3n - 1  |
 *  | A8  | A1 + CRX ladder (q, q+1)                                | 3n - 1  |
 *  | A12 | RY, RZ on every qubit + fixed CNOT ring (q, q+1 mod n)  | 2n      |
 *  | A13 | RY all, CRZ ring (q, q+1), RY all, CRZ ring (q, q-1)    | 4n      |
 *  | A16 | A1 + CRZ on even pairs (0,1),(2,3).. then odd (1,2)..   | 3n - 1  |
 *  | A18 | A1 + CRX ring (q, q+1 mod n)                            | 3n      |
 *
 * Every layer except A12's is the identity when its parameters are zero.
 * Entangling architectures need n >= 2.
 */
#pragma once

#include "sha/circuit.hpp"
#include "sha/errors.hpp"
#include "sha/pauli.hpp"
#include "sha/rng.hpp"
#include "sha/simulator.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sha {

enum class ArchitectureId { A1, A3, A8, A12, A13, A16, A18, QAOA };

inline constexpr std::array<ArchitectureId, 7> kCatalog = {
    ArchitectureId::A1,  ArchitectureId::A3,  ArchitectureId::A8, ArchitectureId::A12,
    ArchitectureId::A13, ArchitectureId::A16, ArchitectureId::A18};

inline std::string_view architecture_name(ArchitectureId id) {
    switch (id) {
    case ArchitectureId::A1: return "A1";
    case ArchitectureId::A3: return "A3";
    case ArchitectureId::A8: return "A8";
    case ArchitectureId::A12: return "A12";
    case ArchitectureId::A13: return "A13";
    case ArchitectureId::A16: return "A16";
    case ArchitectureId::A18: return "A18";
    case ArchitectureId::QAOA: return "QAOA";
    }
    return "?";
}

inline ArchitectureId parse_architecture(std::string_view name) {
    for (auto id : kCatalog) {
        if (architecture_name(id) == name) {
            return id;
        }
    }
    if (name == "QAOA") {
        return ArchitectureId::QAOA;
    }
    throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

/// Parameters per layer of a catalog architecture on n qubits.
inline std::size_t params_per_layer(ArchitectureId id, std::size_t n) {
    switch (id) {
    case ArchitectureId::A1:
    case ArchitectureId::A12: return 2 * n;
    case ArchitectureId::A3:
    case ArchitectureId::A8:
    case ArchitectureId::A16: return 3 * n - 1;
    case ArchitectureId::A13: return 4 * n;
    case ArchitectureId::A18: return 3 * n;
    case ArchitectureId::QAOA: break;
    }
    throw std::invalid_argument("params_per_layer: QAOA has no fixed layer size");
}

namespace detail {

struct LayerBuilder {
    std::size_t n;
    Layer layer;
    std::size_t next_slot = 0;

    void rot(GateKind kind) {
        for (std::size_t q = 0; q < n; ++q) {
            layer.gates.push_back(Gate::param(kind, {q}, next_slot++));
        }
    }
    void ctrl(GateKind kind, std::size_t c, std::size_t t) {
        layer.gates.push_back(Gate::param(kind, {c, t}, next_slot++));
    }
    void ladder(GateKind kind) {
        for (std::size_t q = 0; q + 1 < n; ++q) {
            ctrl(kind, q, q + 1);
        }
    }
    void ring(GateKind kind, bool forward) {
        for (std::size_t q = 0; q < n; ++q) {
            ctrl(kind, q, forward ? (q + 1) % n : (q + n - 1) % n);
        }
    }
};

} // namespace detail

/// One layer of a catalog architecture; slots numbered locally from 0.
inline Layer catalog_layer(ArchitectureId id, std::size_t n) {
    if (id == ArchitectureId::QAOA) {
        throw std::invalid_argument("catalog_layer: use build_qaoa for QAOA");
    }
    if (n < 1 || (id != ArchitectureId::A1 && n < 2)) {
        throw std::invalid_argument(std::string(architecture_name(id)) +
                                    ": needs at least 2 qubits");
    }
    detail::LayerBuilder b{n, {}};
    switch (id) {
    case ArchitectureId::A1:
        b.rot(GateKind::RX);
        b.rot(GateKind::RZ);
        break;
    case ArchitectureId::A3:
        b.rot(GateKind::RX);
        b.rot(GateKind::RZ);
        b.ladder(GateKind::CRZ);
        break;
    case ArchitectureId::A8:
        b.rot(GateKind::RX);
        b.rot(GateKind::RZ);
        b.ladder(GateKind::CRX);
        break;
    case ArchitectureId::A12:
        b.rot(GateKind::RY);
        b.rot(GateKind::RZ);
        for (std::size_t q = 0; q < n; ++q) {
            b.layer.gates.push_back(Gate::fixed(GateKind::CNOT, {q, (q + 1) % n}));
        }
        b.layer.identity_at_zero = false;
        break;
    case ArchitectureId::A13:
        b.rot(GateKind::RY);
        b.ring(GateKind::CRZ, true);
        b.rot(GateKind::RY);
        b.ring(GateKind::CRZ, false);
        break;
    case ArchitectureId::A16:
        b.rot(GateKind::RX);
        b.rot(GateKind::RZ);
        for (std::size_t q = 0; q + 1 < n; q += 2) {
            b.ctrl(GateKind::CRZ, q, q + 1);
        }
        for (std::size_t q = 1; q + 1 < n; q += 2) {
            b.ctrl(GateKind::CRZ, q, q + 1);
        }
        break;
    case ArchitectureId::A18:
        b.rot(GateKind::RX);
        b.rot(GateKind::RZ);
        b.ring(GateKind::CRX, true);
        break;
    case ArchitectureId::QAOA: break;
    }
    return std::move(b.layer);
}

/// Parameterized RY on every qubit (the Layer-VQE input layer).
inline Layer ry_layer(std::size_t n) {
    detail::LayerBuilder b{n, {}};
    b.rot(GateKind::RY);
    return std::move(b.layer);
}

inline Circuit build_ansatz(ArchitectureId id, std::size_t n_qubits, std::size_t n_layers) {
    if (n_layers < 1) {
        throw std::invalid_argument("build_ansatz: need at least one layer");
    }
    Circuit c(n_qubits);
    for (std::size_t i = 0; i < n_layers; ++i) {
        c.append_layer(catalog_layer(id, n_qubits));
    }
    return c;
}

/**
 * QAOA circuit H^{(x)n}, then p rounds of U_C(gamma_i) = exp(-i gamma_i H_C)
 * and U_M(beta_i) = exp(-i beta_i H_M) with H_M = -sum_q X_q.
 *
 * Parameter vector layout: (beta_1..beta_p, gamma_1..gamma_p). Each
 * non-identity cost term c*Z_S becomes MULTI_Z_PHASE on S reading gamma_i
 * with scale 2c; the mixer is RX on every qubit reading beta_i with scale -2.
 * Identity terms only add a global phase and are skipped.
 */
inline Circuit build_qaoa(const PauliSum &h_cost, std::size_t p) {
    if (p < 1) {
        throw std::invalid_argument("build_qaoa: p must be >= 1");
    }
    if (!h_cost.diagonal()) {
        throw std::invalid_argument("build_qaoa: cost Hamiltonian must be diagonal");
    }
    const PauliSum h = simplify(h_cost);
    const std::size_t n = h_cost.n_qubits;
    Circuit c(n);
    Layer wall{{}, false};
    for (std::size_t q = 0; q < n; ++q) {
        wall.gates.push_back(Gate::fixed(GateKind::H, {q}));
    }
    c.append_layer_global(std::move(wall));
    for (std::size_t i = 0; i < p; ++i) {
        Layer cost;
        for (const auto &t : h.terms) {
            if (t.ops.empty()) {
                continue;
            }
            std::vector<std::size_t> qs;
            for (const auto &[q, a] : t.ops) {
                qs.push_back(q);
            }
            cost.gates.push_back(
                Gate::param(GateKind::MULTI_Z_PHASE, std::move(qs), p + i, 2.0 * t.coefficient));
        }
        c.append_layer_global(std::move(cost));
        Layer mixer;
        for (std::size_t q = 0; q < n; ++q) {
            mixer.gates.push_back(Gate::param(GateKind::RX, {q}, i, -2.0));
        }
        c.append_layer_global(std::move(mixer));
    }
    return c;
}

/// beta_i = 1 - i/p, gamma_i = i/p for i = 1..p, laid out as (beta..., gamma...).
inline Params constant_speed_init(std::size_t p) {
    if (p < 1) {
        throw std::invalid_argument("constant_speed_init: p must be >= 1");
    }
    Params x(2 * p);
    const double pd = static_cast<double>(p);
    for (std::size_t i = 1; i <= p; ++i) {
        const double id = static_cast<double>(i);
        x[i - 1] = 1.0 - id / pd;
        x[p + i - 1] = id / pd;
    }
    return x;
}

inline constexpr double kIdentityTolerance = 1e-10;

/**
 * True if the circuit at all-zero parameters maps every probe basis state to
 * itself (phase included) within 1e-10. Up to 6 qubits every basis state is
 * probed, which decides the question exactly; beyond that |0..0>, |1..1> and
 * 64 seeded random basis states are probed.
 */
inline bool verify_identity_at_zero(const Circuit &circuit) {
    const std::size_t n = circuit.n_qubits();
    const std::size_t dim = std::size_t{1} << n;
    std::vector<std::size_t> probes;
    if (n <= 6) {
        for (std::size_t b = 0; b < dim; ++b) {
            probes.push_back(b);
        }
    } else {
        probes = {0, dim - 1};
        Rng rng(0x1D0A73E0ULL);
        for (int i = 0; i < 64; ++i) {
            probes.push_back(static_cast<std::size_t>(rng.below(dim)));
        }
    }
    const Params zeros(circuit.param_count(), 0.0);
    for (auto b : probes) {
        std::vector<Complex> amps(dim, Complex{0.0, 0.0});
        amps[b] = 1.0;
        const auto out = run_circuit(circuit, zeros, Statevector::from_amplitudes(std::move(amps)));
        for (std::size_t i = 0; i < dim; ++i) {
            const Complex expected = (i == b) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
            if (std::abs(out[i] - expected) > kIdentityTolerance) {
                return false;
            }
        }
    }
    return true;
}

/// verify_identity_at_zero on a single layer placed on `n_qubits` qubits.
inline bool verify_identity_at_zero(const Layer &layer, std::size_t n_qubits) {
    Circuit c(n_qubits);
    c.append_layer(layer);
    return verify_identity_at_zero(c);
}

} // namespace sha
