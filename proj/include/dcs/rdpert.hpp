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

// Reaction-diffusion generators on the vacuum plus two-particle sector and first-order
// perturbation theory for the dual-frame string order.

#ifndef DCS_RDPERT_HPP
#define DCS_RDPERT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dcs/common.hpp"

namespace dcs::rdpert {

/// States [vac, (1,2), (1,3), ..., (N-1,N)]; pairs are 1-based even-site indices with i < j.
struct PairSectorIndex {
    size_t N = 2;

    explicit PairSectorIndex(size_t n) : N(n) {
        if (N < 2) {
            throw RangeError("pair sector needs N >= 2");
        }
    }
    size_t size() const {
        return 1 + N * (N - 1) / 2;
    }
    /// Index of the unordered pair {i, j}; i != j.
    size_t index(size_t i, size_t j) const {
        if (i > j) {
            std::swap(i, j);
        }
        if (i < 1 || j > N || i == j) {
            throw RangeError("invalid pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        // Pairs with first element < i come first.
        size_t before = (i - 1) * N - (i - 1) * i / 2;
        return 1 + before + (j - i - 1);
    }
    std::pair<size_t, size_t> pair(size_t k) const {
        if (k == 0 || k >= size()) {
            throw RangeError("index " + std::to_string(k) + " is not a pair state");
        }
        for (size_t i = 1; i < N; i++) {
            size_t row = N - i;
            if (k <= row) {
                return {i, i + k};
            }
            k -= row;
        }
        throw RangeError("unreachable");
    }
};

/// Column-stochastic rate matrix over a PairSectorIndex: off-diagonals >= 0, columns sum to 0.
struct ClassicalGenerator {
    Eigen::MatrixXd matrix;
    Boundary boundary = Boundary::PBC;

    void add(size_t from, size_t to, double rate) {
        matrix((Eigen::Index)to, (Eigen::Index)from) += rate;
        matrix((Eigen::Index)from, (Eigen::Index)from) -= rate;
    }
    void validate(double tol = 1e-12) const {
        for (Eigen::Index c = 0; c < matrix.cols(); c++) {
            if (std::abs(matrix.col(c).sum()) > tol) {
                throw Error("generator column " + std::to_string(c) + " does not sum to 0");
            }
            for (Eigen::Index r = 0; r < matrix.rows(); r++) {
                if (r != c && matrix(r, c) < -tol) {
                    throw Error("generator has a negative off-diagonal rate");
                }
            }
        }
    }
};

/// Right hopping with pair annihilation. A hop onto the partner annihilates to vac; under PBC a hop
/// past site N wraps to site 1 and the pair is re-sorted; under OBC a particle on site N is stuck.
inline ClassicalGenerator build_p0(size_t N, Boundary b) {
    PairSectorIndex idx(N);
    ClassicalGenerator g{Eigen::MatrixXd::Zero((Eigen::Index)idx.size(), (Eigen::Index)idx.size()), b};
    for (size_t k = 1; k < idx.size(); k++) {
        auto [i, j] = idx.pair(k);
        for (auto [mover, partner] : {std::pair{i, j}, std::pair{j, i}}) {
            size_t to = mover + 1;
            if (to > N) {
                if (b == Boundary::OBC) {
                    continue;
                }
                to = 1;
            }
            g.add(k, to == partner ? 0 : idx.index(to, partner), 1.0);
        }
    }
    return g;
}

/// Pair creation from vac. Keys are site sets; every key must name exactly two distinct sites.
struct PairPerturbation {
    std::map<std::vector<size_t>, double> rates;

    /// Rate-1 creation on every bond (k, k+1); PBC adds (N, 1).
    static PairPerturbation adjacent_pair(size_t N, Boundary b) {
        PairPerturbation p;
        for (size_t k = 1; k < N; k++) {
            p.rates[{k, k + 1}] = 1.0;
        }
        if (b == Boundary::PBC && N > 2) {
            p.rates[{1, N}] = 1.0;
        }
        return p;
    }
};

/// Creation vac -> |i,j) and the reverse annihilation, each at the given rate.
inline ClassicalGenerator build_pp(size_t N, Boundary b, const PairPerturbation &pert) {
    PairSectorIndex idx(N);
    ClassicalGenerator g{Eigen::MatrixXd::Zero((Eigen::Index)idx.size(), (Eigen::Index)idx.size()), b};
    for (const auto &[sites, rate] : pert.rates) {
        if (sites.size() != 2 || sites[0] == sites[1]) {
            throw DimensionError("perturbation term on " + std::to_string(sites.size()) +
                                 " sites leaves the vacuum plus pair sector");
        }
        if (rate < 0) {
            throw RangeError("perturbation rates must be non-negative");
        }
        size_t k = idx.index(sites[0], sites[1]);
        g.add(0, k, rate);
        g.add(k, 0, rate);
    }
    return g;
}

/// First-order steady state: c(lambda) = vac + lambda R1, normalized so the components sum to 1.
struct FirstOrder {
    PairSectorIndex index{2};
    Eigen::VectorXd r1;

    Eigen::VectorXd coefficients(double lambda) const {
        Eigen::VectorXd c = lambda * r1;
        c(0) += 1.0;
        return c / c.sum();
    }
};

/// R1 = -P0^+ Pp |vac), with P0^+ the group inverse of P0. Every column of P0 sums to zero, so its range
/// is the zero-sum subspace and R1 is the unique zero-sum solution of P0 R1 = -Pp |vac).
inline FirstOrder first_order_steady(size_t N, Boundary b, const PairPerturbation &pert) {
    ClassicalGenerator p0 = build_p0(N, b), pp = build_pp(N, b, pert);
    PairSectorIndex idx(N);
    Eigen::VectorXd src = pp.matrix.col(0);
    const Eigen::Index d = p0.matrix.rows();
    Eigen::MatrixXd a(d + 1, d);
    a.topRows(d) = p0.matrix;
    a.row(d).setOnes();
    Eigen::VectorXd rhs(d + 1);
    rhs.head(d) = -src;
    rhs(d) = 0.0;
    Eigen::VectorXd r1 = a.completeOrthogonalDecomposition().solve(rhs);
    double res = (a * r1 - rhs).norm();
    if (!(res <= 1e-8)) {
        throw Error("pseudoinverse residual " + std::to_string(res) + " exceeds 1e-8");
    }
    return {idx, r1};
}

namespace detail {

inline void check_odd(size_t n, size_t m) {
    if (n % 2 == 0 || m % 2 == 0) {
        throw ParityError("string endpoints must be odd sites, got (" + std::to_string(n) + ", " +
                          std::to_string(m) + ")");
    }
    if (n >= m) {
        throw RangeError("string needs n < m");
    }
}

/// Pairs with exactly one particle between the odd endpoints n and m.
inline bool straddles(size_t i, size_t j, size_t n, size_t m) {
    size_t a = 2 * i, b = 2 * j;
    return (n < a && a < m && m < b) || (a < n && n < b && b < m);
}

}  // namespace detail

/// Dual-frame trivial string 1 - 2 sum over straddling pairs of c_{ij}.
inline double string_first_order(const Eigen::VectorXd &c, const PairSectorIndex &idx, size_t n, size_t m) {
    detail::check_odd(n, m);
    if ((size_t)c.size() != idx.size()) {
        throw DimensionError("coefficient vector does not match the pair sector");
    }
    double s = 0;
    for (size_t k = 1; k < idx.size(); k++) {
        auto [i, j] = idx.pair(k);
        if (detail::straddles(i, j, n, m)) {
            s += c((Eigen::Index)k);
        }
    }
    return 1.0 - 2.0 * s;
}

/// d/d lambda of the string at lambda = 0.
inline double string_derivative(const FirstOrder &fo, size_t n, size_t m) {
    detail::check_odd(n, m);
    double s = 0;
    for (size_t k = 1; k < fo.index.size(); k++) {
        auto [i, j] = fo.index.pair(k);
        if (detail::straddles(i, j, n, m)) {
            s += fo.r1((Eigen::Index)k);
        }
    }
    return -2.0 * s;
}

}  // namespace dcs::rdpert

#endif
