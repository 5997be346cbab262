// Copyright 2026 The dcs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DCS_CHANNEL_HPP
#define DCS_CHANNEL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcs/common.hpp"
#include "dcs/pauli.hpp"
#include "dcs/stab.hpp"

namespace dcs {

enum class Frame { Primal, Dual };

/// How boundary-crossing channel elements are filtered under OBC.
///   PrimalSupport: a site is admissible in both frames iff the primal element fits in [1, 2N].
///   OwnSupport: each frame filters by the support of its own element.
enum class BoundaryConvention { PrimalSupport, OwnSupport };

/// Odd-site channel realization. Kraus is the measure-then-correct form, kept for A/B testing.
enum class OddRealization { Unitary, Kraus };

struct TrajectoryConfig {
    size_t n_qubits = 6;
    Boundary boundary = Boundary::PBC;
    double lambda = 0.0;
    uint64_t steps = 0;
    uint64_t burn_in = 0;
    uint64_t seed = 1;
    /// Observation cadence in elementary steps; 0 means one sweep (n_qubits steps).
    uint64_t observe_every = 0;
    BoundaryConvention convention = BoundaryConvention::PrimalSupport;
    OddRealization odd = OddRealization::Unitary;

    uint64_t cadence() const {
        return observe_every ? observe_every : n_qubits;
    }

    void validate() const {
        if (n_qubits < 2 || n_qubits % 2) {
            throw ParityError("trajectory needs an even qubit count >= 2, got " + std::to_string(n_qubits));
        }
        if (!(lambda >= 0.0 && lambda <= 1.0)) {
            throw RangeError("lambda must lie in [0, 1]");
        }
    }
};

/// Precomputed Pauli factors for every site of a chain, so the hot loop never builds operators.
class ChannelTable {
   public:
    ChannelTable(size_t n, Boundary boundary, BoundaryConvention conv = BoundaryConvention::PrimalSupport)
        : n_(n), boundary_(boundary), conv_(conv) {
        if (n < 2 || n % 2) {
            throw ParityError("channel needs an even qubit count >= 2, got " + std::to_string(n));
        }
        zxz_.resize(n + 1);
        zyz_.resize(n + 1);
        x_.resize(n + 1);
        y_.resize(n + 1);
        zxz_next_.resize(n + 1);
        x_next_.resize(n + 1);
        for (size_t j = 1; j <= n; j++) {
            zxz_[j] = dressed(j, 'X');
            zyz_[j] = dressed(j, 'Y');
            x_[j] = single(n, 'X', j);
            y_[j] = single(n, 'Y', j);
            size_t nxt = j % n + 1;
            x_next_[j] = single(n, 'X', nxt);
            zxz_next_[j] = dressed(nxt, 'X');
        }
        for (Frame f : {Frame::Primal, Frame::Dual}) {
            auto &list = f == Frame::Primal ? admissible_primal_ : admissible_dual_;
            for (size_t j = 1; j <= n; j++) {
                if (admissible(j, f)) {
                    list.push_back(j);
                }
            }
        }
    }

    size_t n_qubits() const {
        return n_;
    }
    Boundary boundary() const {
        return boundary_;
    }

    /// Z_{j-1} P_j Z_{j+1}, wrapping around the ring.
    const PauliOperator &zxz(size_t j) const {
        return zxz_[j];
    }
    const PauliOperator &zyz(size_t j) const {
        return zyz_[j];
    }
    const PauliOperator &x(size_t j) const {
        return x_[j];
    }
    const PauliOperator &y(size_t j) const {
        return y_[j];
    }
    /// X_{j+1} and its dual image Z_j X_{j+1} Z_{j+2}.
    const PauliOperator &x_next(size_t j) const {
        return x_next_[j];
    }
    const PauliOperator &zxz_next(size_t j) const {
        return zxz_next_[j];
    }

    bool admissible(size_t site, Frame frame) const {
        if (boundary_ == Boundary::PBC) {
            return site >= 1 && site <= n_;
        }
        // Primal elements touch {j-1, j, j+1}; that fits iff 2 <= j <= 2N-1.
        bool primal_fits = site >= 2 && site + 1 <= n_;
        if (frame == Frame::Primal || conv_ == BoundaryConvention::PrimalSupport) {
            return primal_fits;
        }
        // Dual even elements touch {j, j+1, j+2}; dual odd elements touch {j} only.
        if (site % 2 == 0) {
            return site + 2 <= n_;
        }
        return site >= 1 && site <= n_;
    }

    const std::vector<size_t> &admissible_sites(Frame frame) const {
        return frame == Frame::Primal ? admissible_primal_ : admissible_dual_;
    }

   private:
    size_t n_;
    Boundary boundary_;
    BoundaryConvention conv_;
    std::vector<PauliOperator> zxz_, zyz_, x_, y_, zxz_next_, x_next_;
    std::vector<size_t> admissible_primal_, admissible_dual_;

    PauliOperator dressed(size_t j, char mid) const {
        size_t prev = (j + n_ - 2) % n_ + 1;
        size_t next = j % n_ + 1;
        PauliOperator p = single(n_, mid, j);
        if (prev != next) {
            p = multiply(single(n_, 'Z', prev), p);
            p = multiply(p, single(n_, 'Z', next));
        }
        return p;
    }
};

/// One elementary channel update at 1-based `site`.
///
/// Primal even j: measure Z_{j-1} X_j Z_{j+1}, on -1 apply X_{j+1}.
/// Primal odd j: apply Z_{j-1} X_j Z_{j+1} or Z_{j-1} Y_j Z_{j+1} with probability 1/2 each.
/// Dual: the same with X_k and Z_{k-1} X_k Z_{k+1} exchanged. Inadmissible OBC sites are identity.
inline void step_site(StabilizerState &state, const ChannelTable &table, size_t site, Frame frame, Rng &rng,
                      OddRealization odd = OddRealization::Unitary) {
    size_t n = table.n_qubits();
    check_site(site, n);
    if (!table.admissible(site, frame)) {
        return;
    }
    bool primal = frame == Frame::Primal;
    if (site % 2 == 0) {
        const PauliOperator &check = primal ? table.zxz(site) : table.x(site);
        MeasureResult r = state.measure(check, &rng);
        if (r.outcome < 0) {
            state.apply_pauli(primal ? table.x_next(site) : table.zxz_next(site));
        }
        return;
    }
    if (odd == OddRealization::Kraus) {
        state.measure(single(n, 'Z', site), &rng);
        state.apply_pauli(primal ? table.zxz(site) : table.x(site));
        return;
    }
    if (coin(rng)) {
        state.apply_pauli(primal ? table.zyz(site) : table.y(site));
    } else {
        state.apply_pauli(primal ? table.zxz(site) : table.x(site));
    }
}

/// Convenience overload that builds the site table; avoid in hot loops.
inline void step_site(StabilizerState &state, size_t site, Frame frame, Boundary boundary, Rng &rng,
                      OddRealization odd = OddRealization::Unitary) {
    ChannelTable table(state.n_qubits(), boundary);
    step_site(state, table, site, frame, rng, odd);
}

/// Draws the frame (dual with probability lambda), then a uniform admissible site, then steps.
inline Frame step_lambda(StabilizerState &state, const ChannelTable &table, double lambda, Rng &rng,
                         OddRealization odd = OddRealization::Unitary) {
    Frame frame = uniform_unit(rng) < lambda ? Frame::Dual : Frame::Primal;
    const auto &sites = table.admissible_sites(frame);
    size_t site = sites[uniform_below(rng, sites.size())];
    step_site(state, table, site, frame, rng, odd);
    return frame;
}

enum class InitialKind { Plus, Decorated, Custom };

struct Initial {
    InitialKind kind = InitialKind::Plus;
    std::optional<StabilizerState> custom;
};

using Observer = std::function<double(const StabilizerState &)>;

struct Observation {
    uint64_t t;
    std::vector<double> values;
};

inline StabilizerState make_initial(const TrajectoryConfig &config, const Initial &initial, Rng &rng) {
    switch (initial.kind) {
        case InitialKind::Plus:
            return plus_state(config.n_qubits);
        case InitialKind::Decorated:
            return sample_decorated_state(config.n_qubits, config.boundary, rng);
        default:
            if (!initial.custom || initial.custom->n_qubits() != config.n_qubits) {
                throw DimensionError("custom initial state missing or of the wrong size");
            }
            return *initial.custom;
    }
}

/// Runs burn_in + steps elementary updates of trajectory `index` and calls `visit(t, state)` at
/// t = burn_in, burn_in + cadence, ... Deterministic in (config.seed, index).
template <class Visit>
void for_each_observation(const TrajectoryConfig &config, const Initial &initial, uint64_t index, Visit &&visit,
                          StabilizerState *final_state = nullptr) {
    config.validate();
    Rng rng = stream_rng(config.seed, index);
    ChannelTable table(config.n_qubits, config.boundary, config.convention);
    StabilizerState st = make_initial(config, initial, rng);
    for (uint64_t t = 0; t < config.burn_in; t++) {
        step_lambda(st, table, config.lambda, rng, config.odd);
    }
    visit(config.burn_in, static_cast<const StabilizerState &>(st));
    uint64_t every = config.cadence();
    for (uint64_t s = 1; s <= config.steps; s++) {
        step_lambda(st, table, config.lambda, rng, config.odd);
        if (s % every == 0) {
            visit(config.burn_in + s, static_cast<const StabilizerState &>(st));
        }
    }
    if (final_state) {
        *final_state = std::move(st);
    }
}

inline std::vector<Observation> run_trajectory(const TrajectoryConfig &config, const Initial &initial,
                                               const std::vector<Observer> &observers, uint64_t index = 0,
                                               StabilizerState *final_state = nullptr) {
    std::vector<Observation> out;
    for_each_observation(
        config, initial, index,
        [&](uint64_t t, const StabilizerState &st) {
            Observation o{t, {}};
            o.values.reserve(observers.size());
            for (const auto &f : observers) {
                o.values.push_back(f(st));
            }
            out.push_back(std::move(o));
        },
        final_state);
    return out;
}

}  // namespace dcs

#endif
