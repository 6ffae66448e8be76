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
 * Derivative-free minimization (COBYLA-style linear trust region),
 * circuit objectives, and parameter-shift gradients.
 */
#pragma once

#include "sha/circuit.hpp"
#include "sha/errors.hpp"
#include "sha/pauli.hpp"
#include "sha/rng.hpp"
#include "sha/simulator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sha {

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct OptimConfig {
    std::size_t max_iters{4000};
    /// Final trust radius; the run stops once the radius would drop below it.
    double progress_threshold{1e-6};
    double initial_step{0.5};
    /// Master seed for anything stochastic driven by the caller (objective shot seeds).
    std::uint64_t seed{0};

    void validate() const {
        if (max_iters < 1) {
            throw std::invalid_argument("OptimConfig: max_iters must be >= 1");
        }
        if (!(progress_threshold >= 0.0)) {
            throw std::invalid_argument("OptimConfig: progress_threshold must be >= 0");
        }
        if (!(initial_step > 0.0)) {
            throw std::invalid_argument("OptimConfig: initial_step must be > 0");
        }
    }
};

struct TrajectoryPoint {
    std::size_t iteration;
    double value;
};

struct OptimResult {
    Params best_params;
    double best_value{std::numeric_limits<double>::infinity()};
    std::size_t iterations_used{0};
    std::vector<TrajectoryPoint> trajectory;
    double final_radius{0.0};
};

/**
 * Minimizes `objective` from `x0` with Powell's COBYLA scheme restricted to
 * the unconstrained case.
 *
 * A simplex of n+1 points is kept with the best point as pivot. Each step
 * either moves to the edge of the trust region of radius rho along the
 * negative gradient of the linear interpolant, or, when the simplex has
 * degenerated, spends an evaluation restoring its geometry. The radius is
 * halved whenever a step fails to achieve a tenth of its predicted
 * reduction on a well-shaped simplex; the run ends when rho would fall below
 * the final radius min(progress_threshold, initial_step) or after max_iters
 * objective evaluations. One iteration is one objective evaluation.
 */
inline OptimResult minimize(const ObjectiveFn &objective, std::span<const double> x0,
                            const OptimConfig &cfg) {
    cfg.validate();
    const std::size_t n = x0.size();
    OptimResult res;
    res.best_params.assign(x0.begin(), x0.end());

    Params scratch(n);
    const auto eval = [&](const Eigen::VectorXd &x) {
        for (std::size_t i = 0; i < n; ++i) {
            scratch[i] = x[static_cast<Eigen::Index>(i)];
        }
        const double f = objective(scratch);
        res.trajectory.push_back({res.iterations_used, f});
        ++res.iterations_used;
        if (f < res.best_value) {
            res.best_value = f;
            res.best_params = scratch;
        }
        return f;
    };
    const auto exhausted = [&] { return res.iterations_used >= cfg.max_iters; };

    Eigen::VectorXd base(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        base[static_cast<Eigen::Index>(i)] = x0[i];
    }
    double f_base = eval(base);
    if (n == 0) {
        return res;
    }

    constexpr double kAlpha = 0.25; // minimum acceptable simplex height, in units of rho
    constexpr double kBeta = 2.1;   // maximum acceptable edge length, in units of rho
    constexpr double kGamma = 0.5;  // length of a geometry step, in units of rho
    constexpr double kDelta = 1.1;

    const double rho_end = std::min(cfg.progress_threshold, cfg.initial_step);
    double rho = cfg.initial_step;
    const auto N = static_cast<Eigen::Index>(n);

    // Columns of `sim` are vertex offsets from `base`; `simi` is its inverse.
    Eigen::MatrixXd sim = Eigen::MatrixXd::Identity(N, N) * rho;
    Eigen::MatrixXd simi = Eigen::MatrixXd::Identity(N, N) / rho;
    Eigen::VectorXd fval(N);
    for (Eigen::Index j = 0; j < N; ++j) {
        if (exhausted()) {
            res.final_radius = rho;
            return res;
        }
        fval[j] = eval(base + sim.col(j));
    }

    bool geometry_done = false;
    Eigen::VectorXd vsig(N);
    Eigen::VectorXd veta(N);
    Eigen::VectorXd dx(N);
    while (true) {
        // Move the best vertex into the pivot position.
        Eigen::Index nbest = -1;
        double fmin = f_base;
        for (Eigen::Index j = 0; j < N; ++j) {
            if (fval[j] < fmin) {
                fmin = fval[j];
                nbest = j;
            }
        }
        if (nbest >= 0) {
            std::swap(fval[nbest], f_base);
            const Eigen::VectorXd shift = sim.col(nbest);
            base += shift;
            sim.col(nbest).setZero();
            sim.colwise() -= shift;
            simi.row(nbest) = -simi.colwise().sum();
        }
        if ((simi * sim - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() > 1e-8) {
            simi = sim.inverse();
        }
        if (exhausted()) {
            break;
        }

        const double parsig = kAlpha * rho;
        const double pareta = kBeta * rho;
        bool acceptable = true;
        for (Eigen::Index j = 0; j < N; ++j) {
            vsig[j] = 1.0 / simi.row(j).norm();
            veta[j] = sim.col(j).norm();
            if (vsig[j] < parsig || veta[j] > pareta) {
                acceptable = false;
            }
        }
        const Eigen::VectorXd grad = simi.transpose() * (fval.array() - f_base).matrix();

        double predicted = 0.0;
        bool short_step = false;
        if (!geometry_done && !acceptable) {
            Eigen::Index jdrop = -1;
            double worst = pareta;
            for (Eigen::Index j = 0; j < N; ++j) {
                if (veta[j] > worst) {
                    jdrop = j;
                    worst = veta[j];
                }
            }
            if (jdrop < 0) {
                double thinnest = parsig;
                for (Eigen::Index j = 0; j < N; ++j) {
                    if (vsig[j] < thinnest) {
                        jdrop = j;
                        thinnest = vsig[j];
                    }
                }
            }
            dx = (kGamma * rho * vsig[jdrop]) * simi.row(jdrop).transpose();
            if (grad.dot(dx) > 0.0) {
                dx = -dx;
            }
            predicted = -grad.dot(dx);
        } else {
            const double gnorm = grad.norm();
            if (!(gnorm > 0.0) || !std::isfinite(gnorm)) {
                short_step = true;
            } else {
                dx = grad * (-rho / gnorm);
                predicted = rho * gnorm;
            }
        }
        geometry_done = true;

        if (!short_step) {
            if (exhausted()) {
                break;
            }
            const double f_new = eval(base + dx);
            const double reduction = f_base - f_new;

            // Pick the vertex that the new point replaces.
            double ratio = reduction <= 0.0 ? 1.0 : 0.0;
            Eigen::Index jdrop = -1;
            Eigen::VectorXd sigbar(N);
            for (Eigen::Index j = 0; j < N; ++j) {
                const double t = std::abs(simi.row(j).dot(dx));
                if (t > ratio) {
                    jdrop = j;
                    ratio = t;
                }
                sigbar[j] = t * vsig[j];
            }
            double edgmax = kDelta * rho;
            Eigen::Index far = -1;
            for (Eigen::Index j = 0; j < N; ++j) {
                if (sigbar[j] >= parsig || sigbar[j] >= vsig[j]) {
                    const double t = reduction > 0.0 ? (dx - sim.col(j)).norm() : veta[j];
                    if (t > edgmax) {
                        far = j;
                        edgmax = t;
                    }
                }
            }
            if (far >= 0) {
                jdrop = far;
            }
            if (jdrop >= 0) {
                const double pivot = simi.row(jdrop).dot(dx);
                if (std::abs(pivot) > 1e-14) {
                    sim.col(jdrop) = dx;
                    simi.row(jdrop) /= pivot;
                    for (Eigen::Index j = 0; j < N; ++j) {
                        if (j != jdrop) {
                            simi.row(j) -= simi.row(j).dot(dx) * simi.row(jdrop);
                        }
                    }
                    fval[jdrop] = f_new;
                }
            }
            if (reduction > 0.0 && reduction >= 0.1 * predicted) {
                continue;
            }
        }

        if (!acceptable) {
            geometry_done = false;
            continue;
        }
        if (rho > rho_end) {
            rho *= 0.5;
            if (rho <= 1.5 * rho_end) {
                rho = rho_end;
            }
            continue;
        }
        break;
    }
    res.final_radius = rho;
    return res;
}

/// How shot seeds are chosen across successive objective calls.
struct SeedPolicy {
    enum class Mode { Fixed, Fresh };
    Mode mode{Mode::Fresh};
    std::uint64_t master{0};

    /// Seed for call number `call` (0-based). Fresh: derive_seed(master, call).
    [[nodiscard]] std::uint64_t seed_for(std::uint64_t call) const {
        return mode == Mode::Fixed ? master : derive_seed(master, call);
    }
};

/**
 * Energy of a circuit's output state from |0...0>. `shots == 0` selects the
 * exact expectation; otherwise a shot estimate with seeds per `policy`.
 *
 * Keeps the most recent state (and Z-basis histogram, for diagonal
 * Hamiltonians in shot mode) so callers can derive per-iteration metrics via
 * the observer hook.
 */
class CircuitObjective {
  public:
    using Observer = std::function<void(const Statevector &, std::span<const double> probs,
                                        const ShotHistogram *)>;

    CircuitObjective(Circuit circuit, PauliSum h, std::uint64_t shots, SeedPolicy policy)
        : circuit_(std::move(circuit)), h_(std::move(h)), shots_(shots), policy_(policy) {
        if (circuit_.n_qubits() != h_.n_qubits) {
            throw DimensionError("objective: circuit has " + std::to_string(circuit_.n_qubits()) +
                                 " qubits, Hamiltonian has " + std::to_string(h_.n_qubits));
        }
        if (h_.diagonal()) {
            diag_ = diagonal_values(h_);
        }
    }

    double operator()(std::span<const double> params) {
        state_ = run_circuit(circuit_, params);
        const std::uint64_t call = calls_++;
        const auto probs = exact_probabilities(state_);
        double value = 0.0;
        const ShotHistogram *hist = nullptr;
        if (diag_) {
            if (shots_ == 0) {
                value = expectation_from_diagonal(probs, *diag_);
            } else {
                last_hist_ = estimate_diagonal(probs, state_.n_qubits(), *diag_, shots_,
                                               policy_.seed_for(call))
                                 .histogram;
                double acc = 0.0;
                for (const auto &[b, c] : last_hist_.counts) {
                    acc += static_cast<double>(c) * (*diag_)[b];
                }
                value = acc / static_cast<double>(shots_);
                hist = &last_hist_;
            }
        } else {
            value = shots_ == 0 ? expectation_exact(state_, h_)
                                : expectation_shots(state_, h_, shots_, policy_.seed_for(call));
        }
        if (observer_) {
            observer_(state_, probs, hist);
        }
        return value;
    }

    void set_observer(Observer obs) { observer_ = std::move(obs); }
    [[nodiscard]] const Statevector &last_state() const { return state_; }
    [[nodiscard]] std::uint64_t calls() const { return calls_; }
    [[nodiscard]] const Circuit &circuit() const { return circuit_; }
    [[nodiscard]] const PauliSum &hamiltonian() const { return h_; }

  private:
    Circuit circuit_;
    PauliSum h_;
    std::uint64_t shots_;
    SeedPolicy policy_;
    std::optional<std::vector<double>> diag_;
    Statevector state_;
    ShotHistogram last_hist_;
    std::uint64_t calls_{0};
    Observer observer_;
};

inline ObjectiveFn make_objective(const Circuit &circuit, const PauliSum &h, std::uint64_t shots,
                                  SeedPolicy policy) {
    auto obj = std::make_shared<CircuitObjective>(circuit, h, shots, policy);
    return [obj](std::span<const double> x) { return (*obj)(x); };
}

/// True if slot `slot` is read by exactly one Pauli rotation with unit scale.
inline bool shift_compatible(const Circuit &circuit, std::size_t slot) {
    std::size_t uses = 0;
    bool ok = true;
    for (const auto &layer : circuit.layers()) {
        for (const auto &g : layer.gates) {
            if (g.slot && *g.slot == slot) {
                ++uses;
                const bool pauli_rotation =
                    g.kind == GateKind::RX || g.kind == GateKind::RY || g.kind == GateKind::RZ ||
                    g.kind == GateKind::RZZ || g.kind == GateKind::MULTI_Z_PHASE;
                ok = ok && pauli_rotation && g.scale == 1.0;
            }
        }
    }
    return ok && uses == 1;
}

/**
 * Exact gradient of <H> by the two-term shift rule. Rotations are
 * exp(-i theta/2 P) with P^2 = 1, so
 * dE/dtheta_i = (E(theta_i + pi/2) - E(theta_i - pi/2)) / 2.
 * `mask` selects slots (empty = all); unselected components are 0.
 * Throws if a selected slot is not a single Pauli rotation (e.g. CRZ).
 */
inline Params parameter_shift_gradient(const Circuit &circuit, const PauliSum &h,
                                       std::span<const double> params,
                                       const std::vector<bool> &mask = {}) {
    if (params.size() != circuit.param_count()) {
        throw DimensionError("parameter_shift_gradient: parameter count mismatch");
    }
    if (!mask.empty() && mask.size() != params.size()) {
        throw DimensionError("parameter_shift_gradient: mask size mismatch");
    }
    Params grad(params.size(), 0.0);
    Params shifted(params.begin(), params.end());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!mask.empty() && !mask[i]) {
            continue;
        }
        if (!shift_compatible(circuit, i)) {
            throw std::invalid_argument("parameter_shift_gradient: slot " + std::to_string(i) +
                                        " is not a single Pauli rotation");
        }
        shifted[i] = params[i] + std::numbers::pi / 2;
        const double plus = expectation_exact(run_circuit(circuit, shifted), h);
        shifted[i] = params[i] - std::numbers::pi / 2;
        const double minus = expectation_exact(run_circuit(circuit, shifted), h);
        shifted[i] = params[i];
        grad[i] = 0.5 * (plus - minus);
    }
    return grad;
}

} // namespace sha
