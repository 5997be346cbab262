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

#include "dcs/estimate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace dcs {
namespace {

EnsembleConfig ensemble(size_t nq, Boundary b, double lambda, uint64_t steps, uint64_t burn_in, size_t T,
                        InitialKind init = InitialKind::Plus, uint64_t seed = 1) {
    EnsembleConfig e;
    e.traj.n_qubits = nq;
    e.traj.boundary = b;
    e.traj.lambda = lambda;
    e.traj.steps = steps;
    e.traj.burn_in = burn_in;
    e.traj.seed = seed;
    e.trajectories = T;
    e.initial.kind = init;
    e.threads = 1;
    return e;
}

TEST(Accumulator, MeanVarianceAndMerge) {
    Accumulator a, b, all;
    for (int i = 0; i < 100; i++) {
        double x = std::sin(i);
        (i < 40 ? a : b).add(x);
        all.add(x);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), 100u);
    EXPECT_NEAR(a.mean(), all.mean(), 1e-15);
    EXPECT_NEAR(a.variance(), all.variance(), 1e-14);
    // Compensation: 1 + many tiny terms.
    Accumulator c;
    c.add(1.0);
    for (int i = 0; i < 1000000; i++) {
        c.add(1e-16);
    }
    EXPECT_NEAR(c.sum(), 1.0 + 1e-10, 1e-15);
}

TEST(ParallelFor, CoversAllIndicesAndRethrows) {
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), 4, [&](size_t i) { hit[i]++; });
    EXPECT_EQ(std::accumulate(hit.begin(), hit.end(), 0), 1000);
    EXPECT_THROW(parallel_for(10, 3, [](size_t i) {
                     if (i == 7) throw RangeError("x");
                 }),
                 RangeError);
}

TEST(StringCurve, ThreadCountIndependent) {
    auto e = ensemble(10, Boundary::PBC, 0.3, 100, 50, 16);
    auto a = string_curve(e, StringKind::Strong, 1, {3, 5, 7});
    e.threads = 3;
    auto b = string_curve(e, StringKind::Strong, 1, {3, 5, 7});
    for (size_t i = 0; i < a.size(); i++) {
        EXPECT_EQ(a[i].mean, b[i].mean);
        EXPECT_EQ(a[i].std_error, b[i].std_error);
    }
}

TEST(StringCurve, PinnedAtOneForLambdaZero) {
    auto e = ensemble(20, Boundary::PBC, 0.0, 400, 200, 10, InitialKind::Decorated);
    for (const auto &r : string_curve(e, StringKind::Strong, 1, {5, 9, 13, 19})) {
        EXPECT_EQ(r.mean, 1.0);
        EXPECT_EQ(r.quantity, "C_I_S");
        EXPECT_LE(std::abs(r.mean), 1.0);
    }
}

TEST(StringCurve, VanishesForLambdaOne) {
    auto e = ensemble(20, Boundary::PBC, 1.0, 2000, 400, 20);
    for (const auto &r : string_curve(e, StringKind::Strong, 1, {5, 9})) {
        EXPECT_LE(std::abs(r.mean), 3 * r.std_error + 1e-12);
    }
}

TEST(StringCurve, ZeroAtTimeZeroFromPlus) {
    auto e = ensemble(12, Boundary::OBC, 0.0, 0, 0, 5);
    auto r = string_curve(e, StringKind::Strong, 3, {7});
    EXPECT_EQ(r[0].mean, 0.0);
    EXPECT_EQ(r[0].n_samples, 5u);
    EXPECT_THROW(string_curve(e, StringKind::Strong, 2, {7}), ParityError);
}

TEST(MixingTime, TinyEtaGivesFirstObservation) {
    auto e = ensemble(20, Boundary::OBC, 0.0, 20000, 0, 200);
    auto r = mixing_time(e, 5, 9, 1e-9);
    EXPECT_EQ(r.t, e.traj.cadence());
}

TEST(MixingTime, NonDecreasingInStringLength) {
    auto e = ensemble(40, Boundary::OBC, 0.0, 200000, 0, 200, InitialKind::Plus, 5);
    uint64_t prev = 0;
    for (size_t len : {8, 16, 28}) {
        size_t n = 2 * (20 / 2) - 21 + 10;  // keep the string inside the chain
        auto r = mixing_time(e, n, n + len, 0.9);
        EXPECT_GE(r.t + 2 * e.traj.cadence(), prev) << "len " << len;
        prev = r.t;
    }
}

TEST(MixingTime, SaturationAndPreconditions) {
    auto e = ensemble(40, Boundary::OBC, 0.0, 80, 0, 10);
    try {
        mixing_time(e, 5, 33, 0.95);
        FAIL() << "expected saturation";
    } catch (const SaturationError &err) {
        EXPECT_EQ(err.last_step, 80u);
        EXPECT_LT(err.last_value, 0.95);
    }
    e.traj.lambda = 0.1;
    EXPECT_THROW(mixing_time(e, 5, 9, 0.5), RangeError);
    e.traj.lambda = 0.0;
    EXPECT_THROW(mixing_time(e, 5, 9, 1.5), RangeError);
}

TEST(MixingTime, MatchesRunTrajectory) {
    // The lockstep driver uses the same streams as run_trajectory.
    auto e = ensemble(16, Boundary::OBC, 0.0, 4000, 0, 30);
    auto r = mixing_time(e, 3, 11, 0.5);
    PauliOperator str = string_operator(StringKind::Strong, 3, 11, 16);
    EnsembleConfig e2 = e;
    e2.traj.steps = r.t;
    auto series = ensemble_series(e2, {expectation_observer(str)});
    EXPECT_DOUBLE_EQ(series.back().values[0].mean(), r.mean);
    EXPECT_LT(series[series.size() - 2].values[0].mean(), 0.5);
}

TEST(DecayTime, RecoversSyntheticExponential) {
    std::vector<double> t, y;
    for (int i = 0; i < 50; i++) {
        t.push_back(10.0 * i);
        y.push_back(std::exp(-t.back() / 137.0));
    }
    auto r = fit_decay(t, y, {}, 0.01, 1.0);
    EXPECT_NEAR(r.tau, 137.0, 1.37);
    EXPECT_THROW(fit_decay({0, 1}, {1, 0.5}, {}, 0.0, 1.0), FitError);
    EXPECT_THROW(fit_decay({0, 1, 2, 3}, {1, 1, 1, 1}, {}, 0.0, 1.0), FitError);
}

TEST(DecayTime, NoDecayAtLambdaZero) {
    auto e = ensemble(12, Boundary::PBC, 0.0, 600, 0, 20);
    try {
        decay_time(e, 1, 7, 0.05, 1.0);
        FAIL() << "expected FitError";
    } catch (const FitError &err) {
        EXPECT_NE(std::string(err.what()).find("no decay"), std::string::npos);
    }
}

TEST(DecayTime, DecaysForPositiveLambda) {
    auto e = ensemble(20, Boundary::PBC, 0.05, 600, 0, 400);
    e.traj.observe_every = 5;
    auto r = decay_time(e, 1, 11, 0.1, 0.9);
    EXPECT_GT(r.tau, 0.0);
    EXPECT_GE(r.t.size(), 3u);
}

TwoCopyConfig two_copy_cfg(size_t nq, double lambda, uint64_t steps, uint64_t burn_in, size_t T,
                           InitialKind init = InitialKind::Plus, uint64_t seed = 3) {
    TwoCopyConfig c;
    c.traj.n_qubits = nq;
    c.traj.lambda = lambda;
    c.traj.steps = steps;
    c.traj.burn_in = burn_in;
    c.traj.seed = seed;
    c.trajectories = T;
    c.initial.kind = init;
    c.threads = 1;
    return c;
}

TEST(TwoCopy, PurityOfClusterStateSamples) {
    auto c = two_copy_cfg(6, 0.0, 6 * 2000, 60, 10, InitialKind::Decorated);
    auto r = two_copy(c, TwoCopyQuantity::Purity);
    EXPECT_NEAR(r.mean, 0.125, 3 * r.std_error);
    EXPECT_GT(r.n_samples, 10000u);
}

TEST(TwoCopy, StringsAtLambdaZero) {
    auto c = two_copy_cfg(8, 0.0, 8 * 3000, 80, 4, InitialKind::Decorated);
    auto rs = two_copy(c, {{TwoCopyQuantity::C_II_S, 1, 5},
                           {TwoCopyQuantity::C_II_W, 2, 6},
                           {TwoCopyQuantity::TrivialC_II_S, 1, 5},
                           {TwoCopyQuantity::B_II, 2, 6},
                           {TwoCopyQuantity::A_II, 2, 6}});
    EXPECT_NEAR(rs[0].mean, 1.0, 1e-12);
    // These two are ratios of different pair events, so they hold only within error.
    EXPECT_NEAR(rs[1].mean, 1.0, 3 * rs[1].std_error);
    EXPECT_NEAR(rs[2].mean, 0.0, 3 * rs[2].std_error);
    EXPECT_NEAR(rs[3].mean, 0.0, 3 * rs[3].std_error + 1e-12);
    EXPECT_EQ(rs[4].mean, 0.0);
}

TEST(TwoCopy, DualityExchangesStringKinds) {
    auto a = two_copy_cfg(6, 0.3, 6 * 3000, 120, 8);
    auto b = two_copy_cfg(6, 0.7, 6 * 3000, 120, 8, InitialKind::Plus, 4);
    auto ra = two_copy(a, TwoCopyQuantity::C_II_S, 1, 5);
    auto rb = two_copy(b, TwoCopyQuantity::TrivialC_II_S, 1, 5);
    double sigma = std::hypot(ra.std_error, rb.std_error);
    EXPECT_NEAR(ra.mean, rb.mean, 4 * sigma) << ra.mean << " vs " << rb.mean;
}

TEST(TwoCopy, Guards) {
    auto c = two_copy_cfg(20, 0.0, 20, 0, 2);
    EXPECT_THROW(two_copy(c, TwoCopyQuantity::Purity), BudgetError);
    // Almost-orthogonal samples: the purity estimate is consistent with zero.
    c = two_copy_cfg(14, 0.5, 14 * 2, 500, 1);
    EXPECT_THROW(two_copy(c, TwoCopyQuantity::Purity), IllConditionedError);
    c = two_copy_cfg(6, 0.0, 60, 0, 2);
    EXPECT_THROW(two_copy(c, TwoCopyQuantity::B_II, 1, 3), ParityError);
    EXPECT_THROW(two_copy(c, TwoCopyQuantity::C_II_S, 2, 4), ParityError);
    EXPECT_EQ(parse_two_copy_quantity("trivial_C_II_W"), TwoCopyQuantity::TrivialC_II_W);
    EXPECT_THROW(parse_two_copy_quantity("bogus"), std::invalid_argument);
}

TEST(Defects, DomainWallBasisIsEmptyAtLambdaZero) {
    TrajectoryConfig c;
    c.n_qubits = 12;
    c.steps = 2000;
    c.seed = 9;
    auto rec = defect_record(c, Initial{InitialKind::Decorated, std::nullopt}, DefectBasis::DomainWall);
    for (const auto &f : rec) {
        EXPECT_EQ(f.density, 0.0);
    }
}

TEST(Defects, HandTracedPairCreationAndHop) {
    // 2N = 6 from |+>: a primal odd update on site 3 flips X_2 and X_4; a dual even update on
    // site 4 then finds X_4 = -1 and applies Z_4 X_5 Z_6, moving that defect to site 6.
    size_t n = 6;
    ChannelTable table(n, Boundary::PBC);
    StabilizerState st = plus_state(n);
    Rng rng(1);
    step_site(st, table, 3, Frame::Primal, rng);
    auto ops = defect_operators(n, Boundary::PBC, DefectBasis::X);
    std::vector<int> v;
    for (const auto &p : ops) v.push_back(st.expectation(p));
    EXPECT_EQ(v, (std::vector<int>{-1, -1, 1}));
    step_site(st, table, 4, Frame::Dual, rng);
    v.clear();
    for (const auto &p : ops) v.push_back(st.expectation(p));
    EXPECT_EQ(v, (std::vector<int>{-1, 1, -1}));
}

TEST(Defects, NonzeroLateDensityNearDualPoint) {
    TrajectoryConfig c;
    c.n_qubits = 100;
    c.lambda = 0.99;
    c.steps = 100 * 400;
    c.seed = 2;
    auto rec = defect_record(c, {}, DefectBasis::X);
    Accumulator late;
    for (size_t i = rec.size() / 2; i < rec.size(); i++) {
        late.add(rec[i].density);
    }
    EXPECT_GT(late.mean(), 0.0);
    EXPECT_EQ(rec.front().density, 0.0);
}

}  // namespace
}  // namespace dcs
