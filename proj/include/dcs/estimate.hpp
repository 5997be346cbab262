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

#ifndef DCS_ESTIMATE_HPP
#define DCS_ESTIMATE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dcs/channel.hpp"
#include "dcs/common.hpp"
#include "dcs/fit.hpp"
#include "dcs/pauli.hpp"
#include "dcs/stab.hpp"

namespace dcs {

/// One estimated quantity with its parameters. Serialized as a CSV row by io.hpp.
struct EstimateResult {
    std::string quantity;
    size_t n_qubits = 0;
    Boundary boundary = Boundary::PBC;
    double lambda = 0;
    size_t n = 0;
    size_t m = 0;
    uint64_t t = 0;
    double mean = 0;
    double std_error = 0;
    uint64_t n_samples = 0;
    uint64_t seed = 0;
};

/// Running sum with Neumaier compensation, plus the sum of squares for the sample variance.
class Accumulator {
   public:
    void add(double x) {
        kahan(sum_, comp_, x);
        kahan(sq_, sq_comp_, x * x);
        n_++;
    }

    /// Associative merge; merging in a fixed order gives thread-count independent results.
    void merge(const Accumulator &o) {
        kahan(sum_, comp_, o.sum_);
        kahan(sum_, comp_, o.comp_);
        kahan(sq_, sq_comp_, o.sq_);
        kahan(sq_, sq_comp_, o.sq_comp_);
        n_ += o.n_;
    }

    uint64_t count() const {
        return n_;
    }
    double sum() const {
        return sum_ + comp_;
    }
    double mean() const {
        return n_ ? sum() / n_ : 0.0;
    }
    double variance() const {
        if (n_ < 2) {
            return 0.0;
        }
        double mu = mean();
        double v = ((sq_ + sq_comp_) - n_ * mu * mu) / (n_ - 1);
        return std::max(v, 0.0);
    }
    double std_error() const {
        return n_ ? std::sqrt(variance() / n_) : 0.0;
    }

   private:
    double sum_ = 0, comp_ = 0, sq_ = 0, sq_comp_ = 0;
    uint64_t n_ = 0;

    static void kahan(double &s, double &c, double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x)) {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
};

inline unsigned default_threads() {
    unsigned h = std::thread::hardware_concurrency();
    return h ? h : 1;
}

/// Calls f(i) for i in [0, count) on up to `threads` workers. The first exception is rethrown.
template <class F>
void parallel_for(size_t count, unsigned threads, F &&f) {
    if (threads == 0) {
        threads = default_threads();
    }
    threads = (unsigned)std::min<size_t>(threads, count);
    if (threads <= 1) {
        for (size_t i = 0; i < count; i++) {
            f(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; w++) {
        pool.emplace_back([&]() {
            for (size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

/// An ensemble of independent trajectories: index k uses stream_rng(traj.seed, k).
struct EnsembleConfig {
    TrajectoryConfig traj;
    size_t trajectories = 100;
    Initial initial;
    unsigned threads = 0;
};

struct SeriesPoint {
    uint64_t t;
    std::vector<Accumulator> values;
};

/// Ensemble averages of each observer at every observation time.
inline std::vector<SeriesPoint> ensemble_series(const EnsembleConfig &ens, const std::vector<Observer> &observers) {
    ens.traj.validate();
    std::vector<std::vector<Observation>> per(ens.trajectories);
    parallel_for(ens.trajectories, ens.threads,
                 [&](size_t k) { per[k] = run_trajectory(ens.traj, ens.initial, observers, k); });
    std::vector<SeriesPoint> out;
    if (per.empty()) {
        return out;
    }
    for (const auto &o : per[0]) {
        out.push_back({o.t, std::vector<Accumulator>(observers.size())});
    }
    for (const auto &traj : per) {
        for (size_t i = 0; i < traj.size(); i++) {
            for (size_t j = 0; j < observers.size(); j++) {
                out[i].values[j].add(traj[i].values[j]);
            }
        }
    }
    return out;
}

inline Observer expectation_observer(PauliOperator p) {
    return [p = std::move(p)](const StabilizerState &st) { return (double)st.expectation(p); };
}

inline std::string renyi1_name(StringKind kind) {
    switch (kind) {
        case StringKind::Strong:
            return "C_I_S";
        case StringKind::Weak:
            return "C_I_W";
        case StringKind::TrivialStrong:
            return "trivial_C_I_S";
        default:
            return "trivial_C_I_W";
    }
}

inline EstimateResult make_result(const std::string &q, const TrajectoryConfig &c, size_t n, size_t m, uint64_t t,
                                  double mean, double err, uint64_t samples) {
    return {q, c.n_qubits, c.boundary, c.lambda, n, m, t, mean, err, samples, c.seed};
}

/// Rényi-1 string correlator for each m, pooled over trajectories and all observation times.
inline std::vector<EstimateResult> string_curve(const EnsembleConfig &ens, StringKind kind, size_t n,
                                                const std::vector<size_t> &m_list) {
    bool pbc = ens.traj.boundary == Boundary::PBC;
    std::vector<Observer> obs;
    for (size_t m : m_list) {
        obs.push_back(expectation_observer(string_operator(kind, n, m, ens.traj.n_qubits, pbc)));
    }
    auto series = ensemble_series(ens, obs);
    std::vector<EstimateResult> out;
    for (size_t j = 0; j < m_list.size(); j++) {
        Accumulator acc;
        for (const auto &p : series) {
            acc.merge(p.values[j]);
        }
        out.push_back(make_result(renyi1_name(kind), ens.traj, n, m_list[j], ens.traj.burn_in, acc.mean(),
                                  acc.std_error(), acc.count()));
    }
    return out;
}

/// A_I = <Z_n Z_m> - <Z_n><Z_m> for even n, m, pooled like string_curve. The error bar is that of <Z_n Z_m>.
inline EstimateResult connected_zz(const EnsembleConfig &ens, size_t n, size_t m) {
    size_t nq = ens.traj.n_qubits;
    if (n % 2 || m % 2) {
        throw ParityError("A_I needs even n and m");
    }
    check_site(n, nq);
    check_site(m, nq);
    if (n == m) {
        throw RangeError("A_I needs n != m");
    }
    std::vector<Observer> obs{expectation_observer(product(nq, "ZZ", {n, m})),
                              expectation_observer(single(nq, 'Z', n)), expectation_observer(single(nq, 'Z', m))};
    auto series = ensemble_series(ens, obs);
    Accumulator zz, zn, zm;
    for (const auto &p : series) {
        zz.merge(p.values[0]);
        zn.merge(p.values[1]);
        zm.merge(p.values[2]);
    }
    double a = zz.mean() - zn.mean() * zm.mean();
    return make_result("A_I", ens.traj, n, m, ens.traj.burn_in, a, zz.std_error(), zz.count());
}

struct MixingResult {
    uint64_t t = 0;
    double mean = 0;
    double std_error = 0;
    uint64_t samples = 0;
};

/// First observation step at which the ensemble mean of the strong string reaches eta, from |+>^n at lambda = 0.
/// All trajectories advance together one cadence at a time, so the run stops as soon as the threshold is met.
inline MixingResult mixing_time(const EnsembleConfig &ens, size_t n, size_t m, double eta) {
    const TrajectoryConfig &c = ens.traj;
    c.validate();
    if (c.lambda != 0.0) {
        throw RangeError("mixing_time is defined at lambda = 0");
    }
    if (!(eta > 0.0 && eta < 1.0)) {
        throw RangeError("eta must lie in (0, 1)");
    }
    if (ens.trajectories == 0) {
        throw RangeError("mixing_time needs at least one trajectory");
    }
    PauliOperator str = string_operator(StringKind::Strong, n, m, c.n_qubits, c.boundary == Boundary::PBC);
    ChannelTable table(c.n_qubits, c.boundary, c.convention);
    size_t T = ens.trajectories;
    std::vector<StabilizerState> states(T, plus_state(c.n_qubits));
    std::vector<Rng> rngs;
    rngs.reserve(T);
    for (size_t k = 0; k < T; k++) {
        rngs.push_back(stream_rng(c.seed, k));
    }
    std::vector<int> values(T, 0);
    uint64_t every = c.cadence();
    MixingResult last;
    for (uint64_t t = every; t <= c.steps; t += every) {
        parallel_for(T, ens.threads, [&](size_t k) {
            for (uint64_t s = 0; s < every; s++) {
                step_lambda(states[k], table, 0.0, rngs[k], c.odd);
            }
            values[k] = states[k].expectation(str);
        });
        Accumulator acc;
        for (int v : values) {
            acc.add(v);
        }
        last = {t, acc.mean(), acc.std_error(), acc.count()};
        if (last.mean >= eta) {
            return last;
        }
    }
    throw SaturationError("C_I_S did not reach eta = " + std::to_string(eta) + " within " + std::to_string(c.steps) +
                              " steps (last value " + std::to_string(last.mean) + ")",
                          last.mean, last.t);
}

struct DecayResult {
    double tau = 0;
    LinearFit fit;
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Fits ln(mean) against t over points with lo <= mean <= hi; tau = -1/slope.
inline DecayResult fit_decay(const std::vector<double> &t, const std::vector<double> &mean,
                             const std::vector<double> &err, double lo, double hi) {
    DecayResult r;
    std::vector<double> x, y;
    for (size_t i = 0; i < t.size(); i++) {
        if (mean[i] > 0 && mean[i] >= lo && mean[i] <= hi) {
            x.push_back(t[i]);
            y.push_back(std::log(mean[i]));
            r.t.push_back(t[i]);
            r.mean.push_back(mean[i]);
            r.std_error.push_back(i < err.size() ? err[i] : 0.0);
        }
    }
    if (x.size() < 3) {
        throw FitError("fewer than 3 usable points in the fit window");
    }
    r.fit = linear_fit(x, y);
    if (!(r.fit.slope < 0) || r.fit.slope > -2 * r.fit.slope_err) {
        throw FitError("no decay detected");
    }
    r.tau = -1.0 / r.fit.slope;
    return r;
}

/// Decay time of C_I_S from the decorated ensemble. The initial state of `ens` is overridden.
inline DecayResult decay_time(const EnsembleConfig &ens, size_t n, size_t m, double lo, double hi) {
    EnsembleConfig e = ens;
    e.initial = Initial{InitialKind::Decorated, std::nullopt};
    PauliOperator str = string_operator(StringKind::Strong, n, m, e.traj.n_qubits, e.traj.boundary == Boundary::PBC);
    auto series = ensemble_series(e, {expectation_observer(str)});
    std::vector<double> t, mean, err;
    for (const auto &p : series) {
        t.push_back((double)p.t);
        mean.push_back(p.values[0].mean());
        err.push_back(p.values[0].std_error());
    }
    return fit_decay(t, mean, err, lo, hi);
}

// ---- two-copy (Rényi-2) estimators ----

enum class TwoCopyQuantity { Purity, A_II, B_II, C_II_S, C_II_W, TrivialC_II_S, TrivialC_II_W };

inline const char *two_copy_name(TwoCopyQuantity q) {
    switch (q) {
        case TwoCopyQuantity::Purity:
            return "purity";
        case TwoCopyQuantity::A_II:
            return "A_II";
        case TwoCopyQuantity::B_II:
            return "B_II";
        case TwoCopyQuantity::C_II_S:
            return "C_II_S";
        case TwoCopyQuantity::C_II_W:
            return "C_II_W";
        case TwoCopyQuantity::TrivialC_II_S:
            return "trivial_C_II_S";
        default:
            return "trivial_C_II_W";
    }
}

inline TwoCopyQuantity parse_two_copy_quantity(std::string_view s) {
    for (auto q : {TwoCopyQuantity::Purity, TwoCopyQuantity::A_II, TwoCopyQuantity::B_II, TwoCopyQuantity::C_II_S,
                   TwoCopyQuantity::C_II_W, TwoCopyQuantity::TrivialC_II_S, TwoCopyQuantity::TrivialC_II_W}) {
        if (s == two_copy_name(q)) {
            return q;
        }
    }
    throw std::invalid_argument("unknown two-copy quantity '" + std::string(s) + "'");
}

struct TwoCopyRequest {
    TwoCopyQuantity quantity;
    size_t n = 0;
    size_t m = 0;
};

/// Two independent chains A and B (trajectory indices 2k and 2k+1 of traj.seed), sampled in lockstep after
/// burn_in every cadence; sample i of A is paired with sample i of B.
struct TwoCopyConfig {
    TrajectoryConfig traj;
    size_t trajectories = 1;
    Initial initial;
    unsigned threads = 0;
    /// Refuse runs with 2^N above this unless `force` is set: the purity is 2^-N at best.
    double max_inverse_purity = 128;
    bool force = false;
    size_t jackknife_blocks = 100;
};

namespace detail {

/// A Rényi-2 quantity as f(column means) over sandwich columns; column 0 is always the purity.
struct TwoCopyPlan {
    std::vector<std::pair<PauliOperator, PauliOperator>> columns;  // (A, B^T)
    std::vector<std::vector<size_t>> uses;                         // per request: column indices

    size_t column(const PauliOperator &a, const PauliOperator &b) {
        for (size_t i = 0; i < columns.size(); i++) {
            if (columns[i].first == a && columns[i].second == b) {
                return i;
            }
        }
        columns.emplace_back(a, b);
        return columns.size() - 1;
    }
};

inline double two_copy_value(TwoCopyQuantity q, const std::vector<double> &mu, const std::vector<size_t> &use) {
    double d = mu[0];
    switch (q) {
        case TwoCopyQuantity::Purity:
            return d;
        case TwoCopyQuantity::A_II:
        case TwoCopyQuantity::B_II:
            return mu[use[0]] / d - mu[use[1]] * mu[use[2]] / (d * d);
        default:
            return mu[use[0]] / d;
    }
}

}  // namespace detail

/// Rényi-2 estimates <<A (x) B>> = Tr(rho A rho B^T) / Tr(rho^2) for every request, from the same sample pairs.
/// Means are plug-in ratios of pair averages; errors come from a block jackknife over consecutive pairs.
inline std::vector<EstimateResult> two_copy(const TwoCopyConfig &cfg, const std::vector<TwoCopyRequest> &requests) {
    const TrajectoryConfig &c = cfg.traj;
    c.validate();
    size_t nq = c.n_qubits;
    size_t N = nq / 2;
    if (std::ldexp(1.0, (int)N) > cfg.max_inverse_purity && !cfg.force) {
        throw BudgetError("two-copy estimate at 2N = " + std::to_string(nq) + " needs ~2^" + std::to_string(N) +
                          " samples per unit accuracy; pass force to run anyway");
    }
    bool pbc = c.boundary == Boundary::PBC;
    detail::TwoCopyPlan plan;
    PauliOperator id(nq);
    plan.column(id, id);
    for (const auto &r : requests) {
        std::vector<size_t> use;
        auto zz = [&]() {
            if (r.n % 2 || r.m % 2) {
                throw ParityError(std::string(two_copy_name(r.quantity)) + " needs even n and m");
            }
            check_site(r.n, nq);
            check_site(r.m, nq);
            if (r.n == r.m) {
                throw RangeError("connected correlator needs n != m");
            }
        };
        switch (r.quantity) {
            case TwoCopyQuantity::Purity:
                break;
            case TwoCopyQuantity::A_II: {
                zz();
                PauliOperator zn = single(nq, 'Z', r.n), zm = single(nq, 'Z', r.m);
                use = {plan.column(multiply(zn, zm), id), plan.column(zn, id), plan.column(zm, id)};
                break;
            }
            case TwoCopyQuantity::B_II: {
                zz();
                PauliOperator zn = single(nq, 'Z', r.n), zm = single(nq, 'Z', r.m);
                PauliOperator znzm = multiply(zn, zm);
                use = {plan.column(znzm, transpose(znzm)), plan.column(zn, transpose(zn)),
                       plan.column(zm, transpose(zm))};
                break;
            }
            case TwoCopyQuantity::C_II_S:
            case TwoCopyQuantity::TrivialC_II_S: {
                auto kind = r.quantity == TwoCopyQuantity::C_II_S ? StringKind::Strong : StringKind::TrivialStrong;
                use = {plan.column(string_operator(kind, r.n, r.m, nq, pbc), id)};
                break;
            }
            default: {
                auto kind = r.quantity == TwoCopyQuantity::C_II_W ? StringKind::Weak : StringKind::TrivialWeak;
                PauliOperator w = string_operator(kind, r.n, r.m, nq, pbc);
                use = {plan.column(w, transpose(w))};
            }
        }
        plan.uses.push_back(use);
    }

    size_t C = plan.columns.size();
    std::vector<std::vector<double>> per(cfg.trajectories);  // per trajectory: pairs x C, flattened
    parallel_for(cfg.trajectories, cfg.threads, [&](size_t k) {
        Rng ra = stream_rng(c.seed, 2 * k), rb = stream_rng(c.seed, 2 * k + 1);
        ChannelTable table(nq, c.boundary, c.convention);
        StabilizerState a = make_initial(c, cfg.initial, ra);
        StabilizerState b = make_initial(c, cfg.initial, rb);
        auto advance = [&](uint64_t steps) {
            for (uint64_t s = 0; s < steps; s++) {
                step_lambda(a, table, c.lambda, ra, c.odd);
                step_lambda(b, table, c.lambda, rb, c.odd);
            }
        };
        auto record = [&]() {
            for (const auto &col : plan.columns) {
                per[k].push_back(sandwich(a, col.first, col.second, b).to_complex().real());
            }
        };
        advance(c.burn_in);
        record();
        uint64_t every = c.cadence();
        for (uint64_t s = every; s <= c.steps; s += every) {
            advance(every);
            record();
        }
    });

    std::vector<double> rows;
    for (auto &v : per) {
        rows.insert(rows.end(), v.begin(), v.end());
        v.clear();
        v.shrink_to_fit();
    }
    size_t P = rows.size() / C;
    if (P < 2) {
        throw RangeError("two-copy estimate needs at least 2 sample pairs");
    }
    std::vector<Accumulator> total(C);
    size_t B = std::min(cfg.jackknife_blocks, P);
    B = std::max<size_t>(B, 2);
    std::vector<std::vector<Accumulator>> block(B, std::vector<Accumulator>(C));
    for (size_t p = 0; p < P; p++) {
        size_t bi = p * B / P;
        for (size_t j = 0; j < C; j++) {
            total[j].add(rows[p * C + j]);
            block[bi][j].add(rows[p * C + j]);
        }
    }
    std::vector<double> mu(C);
    for (size_t j = 0; j < C; j++) {
        mu[j] = total[j].mean();
    }
    if (mu[0] - 2 * total[0].std_error() <= 0) {
        throw IllConditionedError("purity estimate " + std::to_string(mu[0]) + " is within 2 sigma of zero");
    }
    // Leave-one-block-out means.
    std::vector<std::vector<double>> loo(B, std::vector<double>(C));
    for (size_t b = 0; b < B; b++) {
        for (size_t j = 0; j < C; j++) {
            double rest = total[j].sum() - block[b][j].sum();
            loo[b][j] = rest / (double)(total[j].count() - block[b][j].count());
        }
    }
    std::vector<EstimateResult> out;
    for (size_t r = 0; r < requests.size(); r++) {
        auto q = requests[r].quantity;
        double theta = detail::two_copy_value(q, mu, plan.uses[r]);
        double avg = 0;
        std::vector<double> th(B);
        for (size_t b = 0; b < B; b++) {
            th[b] = detail::two_copy_value(q, loo[b], plan.uses[r]);
            avg += th[b];
        }
        avg /= B;
        double var = 0;
        for (double x : th) {
            var += (x - avg) * (x - avg);
        }
        double err = std::sqrt(var * (B - 1) / B);
        out.push_back(make_result(two_copy_name(q), c, requests[r].n, requests[r].m, c.burn_in, theta, err, P));
    }
    return out;
}

inline EstimateResult two_copy(const TwoCopyConfig &cfg, TwoCopyQuantity q, size_t n = 0, size_t m = 0) {
    return two_copy(cfg, std::vector<TwoCopyRequest>{{q, n, m}}).front();
}

// ---- defect record ----

/// X: the raw <X_i> on even sites. DomainWall: <Z_{i-1} X_i Z_{i+1}>, which is +1 everywhere on ρ_C samples.
enum class DefectBasis { X, DomainWall };

struct DefectFrame {
    uint64_t t;
    std::vector<int> values;  // one per even site 2, 4, ..., 2N
    double density;           // count(-1) / 2N
};

inline std::vector<PauliOperator> defect_operators(size_t nq, Boundary boundary, DefectBasis basis) {
    std::vector<PauliOperator> ops;
    for (size_t i = 2; i <= nq; i += 2) {
        if (basis == DefectBasis::X) {
            ops.push_back(single(nq, 'X', i));
        } else if (i < nq || boundary == Boundary::PBC) {
            ops.push_back(product(nq, "ZXZ", {i - 1, i, i % nq + 1}));
        } else {
            ops.push_back(product(nq, "ZX", {i - 1, i}));
        }
    }
    return ops;
}

inline std::vector<DefectFrame> defect_record(const TrajectoryConfig &config, const Initial &initial,
                                              DefectBasis basis = DefectBasis::X, uint64_t index = 0) {
    auto ops = defect_operators(config.n_qubits, config.boundary, basis);
    std::vector<DefectFrame> out;
    for_each_observation(config, initial, index, [&](uint64_t t, const StabilizerState &st) {
        DefectFrame f{t, {}, 0.0};
        size_t count = 0;
        for (const auto &p : ops) {
            int v = st.expectation(p);
            f.values.push_back(v);
            count += v < 0;
        }
        f.density = (double)count / (double)config.n_qubits;
        out.push_back(std::move(f));
    });
    return out;
}

}  // namespace dcs

#endif
