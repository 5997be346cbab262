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

// Closed forms for the population sector of the dual model, viewed as non-Hermitian free fermions,
// plus the finite classical chain they describe.

#ifndef DCS_FREEFERMION_HPP
#define DCS_FREEFERMION_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "dcs/common.hpp"

namespace dcs::freefermion {

/// N counts even sites. lambda and gamma_zz are alternative couplings; hopping weights sum to 1.
struct FermionParams {
    size_t N = 2;
    double lambda = 0.0;
    double eta_right = 1.0;
    double eta_left = 0.0;
    double gamma_zz = 0.0;

    void validate() const {
        if (N < 2) {
            throw RangeError("free-fermion chain needs N >= 2");
        }
        if (lambda < 0 || gamma_zz < 0 || eta_right < 0 || eta_left < 0) {
            throw RangeError("couplings and hopping weights must be non-negative");
        }
        if (std::abs(eta_right + eta_left - 1.0) > 1e-12) {
            throw RangeError("hopping weights must sum to 1");
        }
        if (lambda > 0 && gamma_zz > 0) {
            throw RangeError("select either lambda or gamma_zz, not both");
        }
    }
};

/// E_{k,+} = -i (eta_r - eta_l)(1 - lambda) sin k + (1 + lambda - cos k + lambda cos k).
inline std::complex<double> dispersion(double k, const FermionParams &p) {
    return {1.0 + p.lambda - std::cos(k) + p.lambda * std::cos(k),
            -(p.eta_right - p.eta_left) * (1.0 - p.lambda) * std::sin(k)};
}

/// 1 - cos(pi/N) + lambda (2 + cos(pi/N)).
inline double lindblad_gap(double lambda, size_t N) {
    if (N < 2) {
        throw RangeError("lindblad_gap needs N >= 2");
    }
    double c = std::cos(std::numbers::pi / (double)N);
    return 1.0 - c + lambda * (2.0 + c);
}

/// The antiperiodic grid k = +-(2m-1) pi / N, m = 1..N/2. Odd N is rejected.
inline std::vector<double> momenta(size_t N) {
    if (N < 2 || N % 2) {
        throw ParityError("momentum grid needs an even number of sites, got " + std::to_string(N));
    }
    std::vector<double> k;
    for (size_t m = 1; m <= N / 2; m++) {
        double v = (double)(2 * m - 1) * std::numbers::pi / (double)N;
        k.push_back(v);
        k.push_back(-v);
    }
    return k;
}

enum class PairingMethod { ClosedForm, MomentumSum };

/// Steady-state pairing coefficient C_{jl} of exp(sum C_{jl}/2 f_j^+ f_l^+)|vac).
/// The momentum sum evaluates (1/N) sum_k i lambda cot(k/2) e^{ik(j-l)} on the antiperiodic grid.
inline double pairing_coeff(size_t j, size_t l, double lambda, size_t N, PairingMethod method) {
    if (j < 1 || l < 1 || j > N || l > N) {
        throw RangeError("pairing indices must lie in [1, N]");
    }
    if (method == PairingMethod::ClosedForm) {
        if (j == l) {
            return 0.0;
        }
        return j < l ? lambda : -lambda;
    }
    std::complex<double> s = 0;
    for (double k : momenta(N)) {
        s += std::complex<double>(0, lambda) / std::tan(k / 2) * std::exp(std::complex<double>(0, k * ((double)j - (double)l)));
    }
    return s.real() / (double)N;
}

/// (rho|(f_n^+ - f_n)(f_m + f_m^+)|rho) / (rho|rho) on the steady state.
inline double fermion_two_point(size_t n, size_t m, double lambda) {
    if (n < 1 || m < 1) {
        throw RangeError("fermion sites are 1-based");
    }
    if (n > m) {
        return 0.0;
    }
    if (n == m) {
        return (lambda - 1.0) / (lambda + 1.0);
    }
    return 4.0 * lambda / ((1.0 + lambda) * (1.0 + lambda)) *
           std::pow((1.0 - lambda) / (1.0 + lambda), (double)(m - n - 1));
}

enum class AnalyticQuantity { C2S, B2 };
enum class Coupling { Lambda, GammaZZ };

inline AnalyticQuantity parse_analytic_quantity(std::string_view s) {
    if (s == "C2S") {
        return AnalyticQuantity::C2S;
    }
    if (s == "B2") {
        return AnalyticQuantity::B2;
    }
    throw std::invalid_argument("unknown analytic quantity '" + std::string(s) + "'");
}

inline Coupling parse_coupling(std::string_view s) {
    if (s == "lambda") {
        return Coupling::Lambda;
    }
    if (s == "gamma_zz") {
        return Coupling::GammaZZ;
    }
    throw std::invalid_argument("unknown coupling '" + std::string(s) + "'");
}

/// Large-chain closed forms of the Rényi-2 strong string (length counts enclosed even sites) and B_II.
inline double analytic_correlator(AnalyticQuantity q, Coupling c, double value, size_t length = 0) {
    if (value < 0) {
        throw RangeError("coupling must be non-negative");
    }
    if (q == AnalyticQuantity::C2S) {
        double base = c == Coupling::Lambda ? (1.0 - value) / (1.0 + value) : 1.0 / (1.0 + 2.0 * value);
        return std::pow(base, (double)length);
    }
    if (c == Coupling::Lambda) {
        return 4.0 * value / ((1.0 + value) * (1.0 + value));
    }
    return 1.0 - 1.0 / ((1.0 + 2.0 * value) * (1.0 + 2.0 * value));
}

/// Largest spread of C2S(lambda = u / 2N, length = N) across the sizes, over the grid of u.
inline double collapse_spread(const std::vector<size_t> &sizes, const std::vector<double> &u_grid) {
    double worst = 0;
    for (double u : u_grid) {
        double lo = 1e300, hi = -1e300;
        for (size_t N : sizes) {
            double v = analytic_correlator(AnalyticQuantity::C2S, Coupling::Lambda, u / (2.0 * (double)N), N);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

// ---------------------------------------------------------------- finite classical chain

/// Probability-conserving generator on occupation configurations of N even sites (bit i = site i+1).
/// A particle hops right (rate eta_right) or left (eta_left) onto an empty site, or annihilates with an
/// occupied neighbour in that direction. gamma_zz flips both sites of every bond. OBC has N-1 bonds.
inline Eigen::MatrixXd population_generator(const FermionParams &p, Boundary b) {
    p.validate();
    if (p.lambda != 0) {
        throw RangeError("population_generator covers the lambda = 0 chain with optional gamma_zz");
    }
    if (p.N > 16) {
        throw SizeCapError("population_generator is capped at N = 16");
    }
    const size_t N = p.N;
    const size_t P = size_t{1} << N;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero((Eigen::Index)P, (Eigen::Index)P);
    auto add = [&](size_t from, size_t to, double rate) {
        if (rate == 0) {
            return;
        }
        g((Eigen::Index)to, (Eigen::Index)from) += rate;
        g((Eigen::Index)from, (Eigen::Index)from) -= rate;
    };
    auto neighbour = [&](size_t i, int dir, size_t &out) {
        if (dir > 0) {
            if (i + 1 == N) {
                if (b == Boundary::OBC) {
                    return false;
                }
                out = 0;
                return true;
            }
            out = i + 1;
            return true;
        }
        if (i == 0) {
            if (b == Boundary::OBC) {
                return false;
            }
            out = N - 1;
            return true;
        }
        out = i - 1;
        return true;
    };
    for (size_t c = 0; c < P; c++) {
        for (size_t i = 0; i < N; i++) {
            if ((c >> i) & 1) {
                for (auto [dir, rate] : {std::pair{+1, p.eta_right}, std::pair{-1, p.eta_left}}) {
                    size_t r;
                    if (neighbour(i, dir, r)) {
                        add(c, (c & ~(size_t{1} << i)) ^ (size_t{1} << r), rate);
                    }
                }
            }
            size_t r;
            if (neighbour(i, +1, r)) {
                add(c, c ^ (size_t{1} << i) ^ (size_t{1} << r), p.gamma_zz);
            }
        }
    }
    return g;
}

/// Stationary distribution reached from the empty chain: the null vector on even-parity configurations.
inline Eigen::VectorXd population_steady_state(const Eigen::MatrixXd &g) {
    const Eigen::Index P = g.rows();
    std::vector<Eigen::Index> even;
    for (Eigen::Index c = 0; c < P; c++) {
        if (std::popcount((uint64_t)c) % 2 == 0) {
            even.push_back(c);
        }
    }
    Eigen::MatrixXd a((Eigen::Index)even.size(), (Eigen::Index)even.size());
    for (size_t r = 0; r < even.size(); r++) {
        for (size_t c = 0; c < even.size(); c++) {
            a((Eigen::Index)r, (Eigen::Index)c) = g(even[r], even[c]);
        }
    }
    // Replace one balance equation by the normalization.
    a.row(0).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows());
    rhs(0) = 1.0;
    Eigen::VectorXd x = a.fullPivLu().solve(rhs);
    if ((a * x - rhs).norm() > 1e-9) {
        throw Error("population steady state is not unique");
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(P);
    for (size_t r = 0; r < even.size(); r++) {
        p(even[r]) = x((Eigen::Index)r);
    }
    return p;
}

/// Rényi-2 strong string on a population state: sum p^2 prod_{i in [lo, hi)} x_i / sum p^2.
/// Sites are 0-based even-site indices; x_i = -1 on occupied sites.
inline double population_c2s(const Eigen::VectorXd &p, size_t lo, size_t hi) {
    double num = 0, den = 0;
    uint64_t mask = 0;
    for (size_t i = lo; i < hi; i++) {
        mask |= uint64_t{1} << i;
    }
    for (Eigen::Index c = 0; c < p.size(); c++) {
        double w = p(c) * p(c);
        den += w;
        num += (std::popcount((uint64_t)c & mask) & 1) ? -w : w;
    }
    return num / den;
}

/// B_II on a population state: sum p(x) p(x with sites a and b flipped) / sum p^2, minus single-site terms.
inline double population_b2(const Eigen::VectorXd &p, size_t a, size_t b) {
    auto pair = [&](uint64_t flip) {
        double num = 0, den = 0;
        for (Eigen::Index c = 0; c < p.size(); c++) {
            den += p(c) * p(c);
            num += p(c) * p((Eigen::Index)((uint64_t)c ^ flip));
        }
        return num / den;
    };
    uint64_t fa = uint64_t{1} << a, fb = uint64_t{1} << b;
    return pair(fa | fb) - pair(fa) * pair(fb);
}

/// Smallest nonzero |Re| among the eigenvalues of a generator.
inline double generator_gap(const Eigen::MatrixXd &g, double tol = 1e-9) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g, false);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); k++) {
        double r = std::abs(es.eigenvalues()(k).real());
        if (std::abs(es.eigenvalues()(k)) > tol) {
            best = std::min(best, r);
        }
    }
    return best;
}

}  // namespace dcs::freefermion

#endif
