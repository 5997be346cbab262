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

// Small-chain exact solver: dense density matrices, jump operators, the vectorized
// Lindbladian, steady spaces per symmetry sector, correlators and time evolution.
//
// Basis conventions: site s (1-based) is bit s-1 of a computational basis index. A density
// matrix is vectorized ket-major, |rho>> = sum rho_ij |i>|j>, index i*D + j.

#ifndef DCS_EXACT_HPP
#define DCS_EXACT_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dcs/common.hpp"
#include "dcs/pauli.hpp"

namespace dcs::exact {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Largest chain for dense density matrices (2^12 squared complex entries = 256 MB).
inline constexpr size_t kMaxDensityQubits = 12;
/// Largest chain for an assembled superoperator.
inline constexpr size_t kMaxSuperQubits = 8;
/// Largest chain for kernels, spectra and time evolution of an assembled superoperator.
inline constexpr size_t kMaxSolveQubits = 6;

enum class OperatorKind { Density, Operator };

/// A dense 2^n x 2^n matrix with a kind tag.
struct DenseOperator {
    OperatorKind kind = OperatorKind::Operator;
    size_t n_qubits = 0;
    Matrix data;
};

// ---------------------------------------------------------------- Pauli sums

struct PauliTerm {
    cplx coef;
    PauliOperator op;
};
using PauliSum = std::vector<PauliTerm>;

namespace detail {

inline cplx ipow(int k) {
    static const cplx t[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return t[((k % 4) + 4) % 4];
}

inline uint64_t xbits(const PauliOperator &p) {
    return p.x_mask.empty() ? 0 : p.x_mask[0];
}
inline uint64_t zbits(const PauliOperator &p) {
    return p.z_mask.empty() ? 0 : p.z_mask[0];
}

/// P|b> = phase(b) |b ^ x>.
struct PauliAction {
    uint64_t x = 0;
    uint64_t z = 0;
    cplx global = 1.0;

    explicit PauliAction(const PauliOperator &p) : x(xbits(p)), z(zbits(p)), global(ipow(p.phase_exp)) {
    }
    cplx phase(uint64_t b) const {
        return (std::popcount(b & z) & 1) ? -global : global;
    }
};

/// Same operator with phase_exp 0 and the phase moved into the coefficient.
inline PauliTerm normalized(const PauliTerm &t) {
    PauliTerm r{t.coef * ipow(t.op.phase_exp), t.op};
    r.op.phase_exp = 0;
    return r;
}

inline void check_qubits(size_t n, size_t cap, const char *what) {
    if (n == 0 || n % 2) {
        throw ParityError(std::string(what) + " needs an even qubit count, got " + std::to_string(n));
    }
    if (n > cap) {
        throw SizeCapError(std::string(what) + " is capped at " + std::to_string(cap) + " qubits, got " +
                           std::to_string(n));
    }
}

}  // namespace detail

/// Merges equal Pauli strings and drops vanishing coefficients. Output terms have phase_exp 0.
inline PauliSum simplify(const PauliSum &s, double eps = 1e-15) {
    PauliSum out;
    for (const auto &t : s) {
        PauliTerm u = detail::normalized(t);
        bool merged = false;
        for (auto &o : out) {
            if (o.op.same_masks(u.op)) {
                o.coef += u.coef;
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.push_back(u);
        }
    }
    std::erase_if(out, [&](const PauliTerm &t) { return std::abs(t.coef) <= eps; });
    return out;
}

inline PauliSum multiply(const PauliSum &a, const PauliSum &b) {
    PauliSum r;
    for (const auto &s : a) {
        for (const auto &t : b) {
            r.push_back({s.coef * t.coef, dcs::multiply(s.op, t.op)});
        }
    }
    return simplify(r);
}

inline PauliSum adjoint(const PauliSum &a) {
    PauliSum r;
    for (const auto &t : a) {
        r.push_back({std::conj(t.coef), dcs::adjoint(t.op)});
    }
    return simplify(r);
}

inline Matrix to_dense(const PauliOperator &p) {
    size_t D = size_t{1} << p.n_qubits;
    Matrix m = Matrix::Zero(D, D);
    detail::PauliAction a(p);
    for (uint64_t b = 0; b < D; b++) {
        m(b ^ a.x, b) += a.phase(b);
    }
    return m;
}

inline Matrix to_dense(const PauliSum &s, size_t n_qubits) {
    size_t D = size_t{1} << n_qubits;
    Matrix m = Matrix::Zero(D, D);
    for (const auto &t : s) {
        detail::PauliAction a(t.op);
        for (uint64_t b = 0; b < D; b++) {
            m(b ^ a.x, b) += t.coef * a.phase(b);
        }
    }
    return m;
}

/// out += coef * P rho Q^dagger, in O(D^2).
inline void add_sandwich(Matrix &out, cplx coef, const PauliOperator &p, const Matrix &rho, const PauliOperator &q) {
    detail::PauliAction a(p), b(q);
    const uint64_t D = (uint64_t)rho.rows();
    std::vector<cplx> qc(D);
    for (uint64_t c = 0; c < D; c++) {
        qc[c] = std::conj(b.phase(c));
    }
    for (uint64_t c = 0; c < D; c++) {
        cplx cc = coef * qc[c];
        uint64_t col = c ^ b.x;
        for (uint64_t r = 0; r < D; r++) {
            out(r ^ a.x, col) += a.phase(r) * cc * rho(r, c);
        }
    }
}

/// Tr(rho P) in O(D).
inline cplx expectation(const Matrix &rho, const PauliOperator &p) {
    detail::PauliAction a(p);
    cplx s = 0;
    for (uint64_t b = 0; b < (uint64_t)rho.rows(); b++) {
        s += rho(b, b ^ a.x) * a.phase(b);
    }
    return s;
}

// ---------------------------------------------------------------- jump operators

enum class JumpKind { L0, L1, L2, L0Dual, L1Dual, L2Dual, Lx, Lmp, Lxx, Lzz, XBoundary, Pauli };

inline const char *jump_kind_name(JumpKind k) {
    switch (k) {
        case JumpKind::L0:
            return "L0";
        case JumpKind::L1:
            return "L1";
        case JumpKind::L2:
            return "L2";
        case JumpKind::L0Dual:
            return "L0_dual";
        case JumpKind::L1Dual:
            return "L1_dual";
        case JumpKind::L2Dual:
            return "L2_dual";
        case JumpKind::Lx:
            return "Lx";
        case JumpKind::Lmp:
            return "Lmp";
        case JumpKind::Lxx:
            return "Lxx";
        case JumpKind::Lzz:
            return "Lzz";
        case JumpKind::XBoundary:
            return "X_boundary";
        default:
            return "pauli";
    }
}

inline JumpKind parse_jump_kind(std::string_view s) {
    for (auto k : {JumpKind::L0, JumpKind::L1, JumpKind::L2, JumpKind::L0Dual, JumpKind::L1Dual, JumpKind::L2Dual,
                   JumpKind::Lx, JumpKind::Lmp, JumpKind::Lxx, JumpKind::Lzz, JumpKind::XBoundary, JumpKind::Pauli}) {
        if (s == jump_kind_name(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown jump kind '" + std::string(s) + "'");
}

/// One dissipator rate * D[L]. For kind Pauli, `pauli` holds the operator text (e.g. "X@1 Z@2").
struct JumpSpec {
    JumpKind kind = JumpKind::L1;
    size_t site = 1;
    double rate = 1.0;
    std::string pauli;
};

struct HamiltonianTerm {
    double coef = 0.0;
    PauliOperator op;
};

/// Which odd sites carry the L2 family under OBC.
enum class L2Range { Discard, Literal };

struct LindbladModel {
    size_t n_qubits = 0;
    Boundary boundary = Boundary::PBC;
    std::vector<JumpSpec> terms;
    std::vector<HamiltonianTerm> hamiltonian;
};

namespace detail {

/// Builds a Pauli string from (letter, unwrapped site) pairs; wraps under PBC, rejects out-of-range under OBC.
inline PauliOperator placed(size_t n, Boundary b, std::initializer_list<std::pair<char, long>> parts,
                            const JumpSpec &spec) {
    PauliOperator p(n);
    for (auto [letter, site] : parts) {
        long s = site;
        if (s < 1 || s > (long)n) {
            if (b == Boundary::OBC) {
                throw DiscardedTermError(std::string(jump_kind_name(spec.kind)) + " at site " +
                                         std::to_string(spec.site) + " leaves the open chain and is discarded");
            }
            s = ((s - 1) % (long)n + (long)n) % (long)n + 1;
        }
        p = dcs::multiply(p, single(n, letter, (size_t)s));
    }
    return p;
}

inline void require_parity(const JumpSpec &s, bool odd) {
    if ((s.site % 2 == 1) != odd) {
        throw ParityError(std::string(jump_kind_name(s.kind)) + " needs an " + (odd ? "odd" : "even") +
                          " site, got " + std::to_string(s.site));
    }
}

}  // namespace detail

/// The jump operator L of a term as a Pauli sum (the rate is not included).
inline PauliSum jump_operator(const JumpSpec &spec, size_t n, Boundary b) {
    if (n < 4 || n % 2) {
        throw ParityError("jump operators need an even chain of at least 4 qubits, got " + std::to_string(n));
    }
    if (spec.kind != JumpKind::Pauli && (spec.site < 1 || spec.site > n)) {
        throw RangeError(std::string(jump_kind_name(spec.kind)) + " site " + std::to_string(spec.site) +
                         " outside [1, " + std::to_string(n) + "]");
    }
    long j = (long)spec.site;
    auto P = [&](std::initializer_list<std::pair<char, long>> parts) {
        return detail::placed(n, b, parts, spec);
    };
    switch (spec.kind) {
        case JumpKind::L0: {
            detail::require_parity(spec, false);
            PauliOperator x = P({{'X', j + 1}});
            PauliOperator zxz = P({{'Z', j - 1}, {'X', j}, {'Z', j + 1}});
            return simplify({{0.5, x}, {-0.5, dcs::multiply(x, zxz)}});
        }
        case JumpKind::L1:
        case JumpKind::L1Dual:
            detail::require_parity(spec, true);
            return {{1.0, P({{'Z', j}})}};
        case JumpKind::L2:
            detail::require_parity(spec, true);
            return {{1.0, P({{'Z', j - 1}, {'X', j}, {'Z', j + 1}})}};
        case JumpKind::L0Dual: {
            detail::require_parity(spec, false);
            PauliOperator zxz = P({{'Z', j}, {'X', j + 1}, {'Z', j + 2}});
            PauliOperator x = P({{'X', j}});
            return simplify({{0.5, zxz}, {-0.5, dcs::multiply(zxz, x)}});
        }
        case JumpKind::L2Dual:
        case JumpKind::Lx:
            detail::require_parity(spec, true);
            return {{1.0, P({{'X', j}})}};
        case JumpKind::Lmp: {
            // |-><+| = (Z - XZ)/2 on sites j and j+2.
            detail::require_parity(spec, false);
            PauliSum a = {{0.5, P({{'Z', j}})}, {-0.5, P({{'X', j}, {'Z', j}})}};
            PauliSum c = {{0.5, P({{'Z', j + 2}})}, {-0.5, P({{'X', j + 2}, {'Z', j + 2}})}};
            return multiply(a, c);
        }
        case JumpKind::Lxx:
            return {{1.0, P({{'X', j}, {'X', j + 1}})}};
        case JumpKind::Lzz:
            detail::require_parity(spec, false);
            return {{1.0, P({{'Z', j}, {'Z', j + 2}})}};
        case JumpKind::XBoundary:
            return {{1.0, P({{'X', j}})}};
        default:
            return {{1.0, PauliOperator::parse(spec.pauli, n)}};
    }
}

inline DenseOperator jump_matrix(JumpKind kind, size_t site, size_t n, Boundary b) {
    detail::check_qubits(n, kMaxDensityQubits, "jump_matrix");
    JumpSpec s{kind, site, 1.0, {}};
    return {OperatorKind::Operator, n, to_dense(jump_operator(s, n, b), n)};
}

/// Parity of the sites a family lives on; true for odd.
inline bool family_on_odd_sites(JumpKind k) {
    switch (k) {
        case JumpKind::L0:
        case JumpKind::L0Dual:
        case JumpKind::Lmp:
        case JumpKind::Lzz:
            return false;
        default:
            return true;
    }
}

/// Sites carrying the family `kind`. OBC drops terms whose support leaves the chain. Dual kinds use the
/// sites of their primal partner so that U_CZ maps the primal model onto the dual one term by term.
inline std::vector<size_t> family_sites(JumpKind kind, size_t n, Boundary b, L2Range range = L2Range::Discard) {
    JumpKind probe = kind;
    if (kind == JumpKind::L0Dual) {
        probe = JumpKind::L0;
    } else if (kind == JumpKind::L2Dual) {
        probe = JumpKind::L2;
    } else if (kind == JumpKind::L1Dual) {
        probe = JumpKind::L1;
    }
    std::vector<size_t> out;
    bool odd = family_on_odd_sites(probe);
    for (size_t s = odd ? 1 : 2; s <= n; s += 2) {
        if (probe == JumpKind::L2 && b == Boundary::OBC && range == L2Range::Literal && s + 1 >= n) {
            continue;
        }
        try {
            jump_operator({probe, s, 1.0, {}}, n, b);
            out.push_back(s);
        } catch (const DiscardedTermError &) {
        }
    }
    return out;
}

inline void add_family(LindbladModel &m, JumpKind kind, double rate, L2Range range = L2Range::Discard) {
    if (rate == 0.0) {
        return;
    }
    for (size_t s : family_sites(kind, m.n_qubits, m.boundary, range)) {
        m.terms.push_back({kind, s, rate, {}});
    }
}

/// sum_k (1 - l_k) D[L_k] + l_k D[L~_k], with k running over the three jump families.
inline LindbladModel general_model(size_t n, Boundary b, double l0, double l1, double l2,
                                   L2Range range = L2Range::Discard) {
    LindbladModel m{n, b, {}, {}};
    const std::tuple<JumpKind, JumpKind, double> fam[] = {
        {JumpKind::L0, JumpKind::L0Dual, l0}, {JumpKind::L1, JumpKind::L1Dual, l1}, {JumpKind::L2, JumpKind::L2Dual, l2}};
    for (auto [primal, dual, l] : fam) {
        if (l < 0 || l > 1) {
            throw RangeError("interpolation weight must lie in [0, 1], got " + std::to_string(l));
        }
        add_family(m, primal, 1.0 - l, range);
        add_family(m, dual, l, range);
    }
    return m;
}

inline LindbladModel parent_model(size_t n, Boundary b, L2Range range = L2Range::Discard) {
    return general_model(n, b, 0, 0, 0, range);
}

inline LindbladModel dual_model(size_t n, Boundary b) {
    return general_model(n, b, 1, 1, 1);
}

inline LindbladModel lambda_model(size_t n, Boundary b, double lambda) {
    return general_model(n, b, lambda, lambda, lambda);
}

/// Parent model plus gamma * sum D[Z_j Z_{j+2}] over even j.
inline LindbladModel gamma_zz_model(size_t n, Boundary b, double gamma) {
    LindbladModel m = parent_model(n, b);
    add_family(m, JumpKind::Lzz, gamma);
    return m;
}

/// sum over odd j and sigma in {X, Y, Z} of D[sigma_j / 2]; its fixed point replaces odd sites by 1/2.
inline LindbladModel trace_model(size_t n, Boundary b) {
    LindbladModel m{n, b, {}, {}};
    for (size_t s = 1; s <= n; s += 2) {
        for (char c : {'X', 'Y', 'Z'}) {
            m.terms.push_back({JumpKind::Pauli, s, 0.25, std::string(1, c) + "@" + std::to_string(s)});
        }
    }
    return m;
}

inline void validate(const LindbladModel &m) {
    if (m.n_qubits < 4 || m.n_qubits % 2) {
        throw ParityError("model needs an even chain of at least 4 qubits, got " + std::to_string(m.n_qubits));
    }
    for (const auto &t : m.terms) {
        if (!(t.rate >= 0)) {
            throw RangeError(std::string("negative rate on ") + jump_kind_name(t.kind) + " at site " +
                             std::to_string(t.site));
        }
        jump_operator(t, m.n_qubits, m.boundary);
    }
    for (const auto &h : m.hamiltonian) {
        if (h.op.n_qubits != m.n_qubits) {
            throw DimensionError("Hamiltonian term size does not match the model");
        }
        if (!h.op.is_hermitian()) {
            throw NotHermitianError("Hamiltonian term " + h.op.str() + " is not Hermitian");
        }
    }
}

// ---------------------------------------------------------------- Lindbladian as sandwich terms

/// rho -> coef * P rho Q^dagger.
struct SandwichTerm {
    cplx coef;
    PauliOperator p;
    PauliOperator q;
};

/// The Lindbladian written as a sum of Pauli sandwiches, with equal (P, Q) pairs merged.
inline std::vector<SandwichTerm> sandwich_terms(const LindbladModel &m) {
    validate(m);
    size_t n = m.n_qubits;
    PauliOperator id(n);
    std::vector<SandwichTerm> raw;
    for (const auto &h : m.hamiltonian) {
        raw.push_back({cplx(0, -h.coef), h.op, id});
        raw.push_back({cplx(0, h.coef), id, dcs::adjoint(h.op)});
    }
    for (const auto &t : m.terms) {
        if (t.rate == 0) {
            continue;
        }
        PauliSum L = simplify(jump_operator(t, n, m.boundary));
        for (const auto &a : L) {
            for (const auto &b : L) {
                raw.push_back({t.rate * a.coef * std::conj(b.coef), a.op, b.op});
            }
        }
        for (const auto &d : multiply(adjoint(L), L)) {
            raw.push_back({-0.5 * t.rate * d.coef, d.op, id});
            raw.push_back({-0.5 * t.rate * d.coef, id, dcs::adjoint(d.op)});
        }
    }
    std::vector<SandwichTerm> out;
    std::map<std::pair<std::pair<uint64_t, uint64_t>, std::pair<uint64_t, uint64_t>>, size_t> where;
    for (auto &r : raw) {
        cplx c = r.coef * detail::ipow(r.p.phase_exp) * std::conj(detail::ipow(r.q.phase_exp));
        r.p.phase_exp = 0;
        r.q.phase_exp = 0;
        auto key = std::make_pair(std::make_pair(detail::xbits(r.p), detail::zbits(r.p)),
                                  std::make_pair(detail::xbits(r.q), detail::zbits(r.q)));
        auto it = where.find(key);
        if (it == where.end()) {
            where[key] = out.size();
            out.push_back({c, r.p, r.q});
        } else {
            out[it->second].coef += c;
        }
    }
    std::erase_if(out, [](const SandwichTerm &t) { return std::abs(t.coef) < 1e-15; });
    return out;
}

/// L(rho) without assembling the superoperator.
inline Matrix apply_lindbladian(const std::vector<SandwichTerm> &terms, const Matrix &rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto &t : terms) {
        add_sandwich(out, t.coef, t.p, rho, t.q);
    }
    return out;
}

inline Matrix apply_lindbladian(const LindbladModel &m, const Matrix &rho) {
    if ((size_t)rho.rows() != (size_t{1} << m.n_qubits)) {
        throw DimensionError("density size does not match the model");
    }
    return apply_lindbladian(sandwich_terms(m), rho);
}

// ---------------------------------------------------------------- vectorization

inline Vector vectorize(const Matrix &rho) {
    const Eigen::Index D = rho.rows();
    Vector v(D * D);
    for (Eigen::Index i = 0; i < D; i++) {
        for (Eigen::Index j = 0; j < D; j++) {
            v(i * D + j) = rho(i, j);
        }
    }
    return v;
}

inline Matrix unvectorize(const Vector &v) {
    const auto D = (Eigen::Index)std::llround(std::sqrt((double)v.size()));
    if (D * D != v.size()) {
        throw DimensionError("vector length is not a square");
    }
    Matrix m(D, D);
    for (Eigen::Index i = 0; i < D; i++) {
        for (Eigen::Index j = 0; j < D; j++) {
            m(i, j) = v(i * D + j);
        }
    }
    return m;
}

/// Maps a ket-major index (ket bits s_1..s_n, bra bits s'_1..s'_n) to the interleaved index where
/// ket qubit q sits at bit 2q and bra qubit q at bit 2q+1.
inline std::vector<uint64_t> interleave_permutation(size_t n) {
    detail::check_qubits(n, kMaxSuperQubits, "interleave_permutation");
    const uint64_t D = uint64_t{1} << n;
    std::vector<uint64_t> perm(D * D);
    for (uint64_t i = 0; i < D; i++) {
        for (uint64_t j = 0; j < D; j++) {
            uint64_t r = 0;
            for (size_t q = 0; q < n; q++) {
                r |= ((i >> q) & 1) << (2 * q);
                r |= ((j >> q) & 1) << (2 * q + 1);
            }
            perm[i * D + j] = r;
        }
    }
    return perm;
}

struct Superoperator {
    size_t n_qubits = 0;
    SparseMatrix matrix;
    /// True when every sandwich term commutes with S (x) 1, 1 (x) S and W (x) W.
    bool symmetric = false;
};

namespace detail {

inline bool term_is_symmetric(const SandwichTerm &t, const PauliOperator &s, const PauliOperator &w) {
    return dcs::commutes(t.p, s) && dcs::commutes(t.q, s) && (dcs::commutes(t.p, w) == dcs::commutes(t.q, w));
}

}  // namespace detail

/// Sparse vectorized Lindbladian, ket-major ordering.
inline Superoperator build_superoperator(const LindbladModel &m) {
    detail::check_qubits(m.n_qubits, kMaxSuperQubits, "build_superoperator");
    auto terms = sandwich_terms(m);
    const size_t n = m.n_qubits;
    const uint64_t D = uint64_t{1} << n;
    PauliOperator s = symmetry_operator(SymmetryKind::S, n), w = symmetry_operator(SymmetryKind::W, n);
    Superoperator out{n, SparseMatrix((Eigen::Index)(D * D), (Eigen::Index)(D * D)), true};
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(terms.size() * D * D);
    for (const auto &t : terms) {
        out.symmetric = out.symmetric && detail::term_is_symmetric(t, s, w);
        detail::PauliAction a(t.p), b(t.q);
        for (uint64_t i = 0; i < D; i++) {
            cplx pi = t.coef * a.phase(i);
            for (uint64_t j = 0; j < D; j++) {
                trip.emplace_back((Eigen::Index)((i ^ a.x) * D + (j ^ b.x)), (Eigen::Index)(i * D + j),
                                  pi * std::conj(b.phase(j)));
            }
        }
    }
    out.matrix.setFromTriplets(trip.begin(), trip.end());
    out.matrix.prune(cplx(0.0), 1e-300);
    return out;
}

// ---------------------------------------------------------------- symmetry sectors

/// Eigenvalues of S (x) 1, 1 (x) S and W (x) W on a vectorized operator.
struct Charges {
    int s_ket = 1;
    int s_bra = 1;
    int w = 1;
    bool operator==(const Charges &) const = default;
    auto operator<=>(const Charges &) const = default;
};

inline std::string charges_str(const Charges &c) {
    auto s = [](int v) { return v > 0 ? std::string("+1") : std::string("-1"); };
    return "(" + s(c.s_ket) + "," + s(c.s_bra) + "," + s(c.w) + ")";
}

inline std::vector<Charges> all_sectors() {
    std::vector<Charges> out;
    for (int a : {1, -1}) {
        for (int b : {1, -1}) {
            for (int c : {1, -1}) {
                out.push_back({a, b, c});
            }
        }
    }
    return out;
}

namespace detail {

inline uint64_t mask_of(const PauliOperator &p) {
    return xbits(p);
}

/// Orthonormal basis (as sparse columns) of the sector with the given charges.
inline SparseMatrix sector_basis(size_t n, const Charges &ch) {
    const uint64_t D = uint64_t{1} << n;
    const uint64_t sm = mask_of(symmetry_operator(SymmetryKind::S, n));
    const uint64_t wm = mask_of(symmetry_operator(SymmetryKind::W, n));
    const double norm = 1.0 / std::sqrt(8.0);
    std::vector<Eigen::Triplet<cplx>> trip;
    Eigen::Index col = 0;
    for (uint64_t i = 0; i < D; i++) {
        for (uint64_t j = 0; j < D; j++) {
            uint64_t self = i * D + j;
            bool rep = true;
            uint64_t img[8];
            int sign[8];
            for (int g = 0; g < 8; g++) {
                uint64_t a = i, c = j;
                int sg = 1;
                if (g & 1) {
                    a ^= sm;
                    sg *= ch.s_ket;
                }
                if (g & 2) {
                    c ^= sm;
                    sg *= ch.s_bra;
                }
                if (g & 4) {
                    a ^= wm;
                    c ^= wm;
                    sg *= ch.w;
                }
                img[g] = a * D + c;
                sign[g] = sg;
                if (img[g] < self) {
                    rep = false;
                    break;
                }
            }
            if (!rep) {
                continue;
            }
            for (int g = 0; g < 8; g++) {
                trip.emplace_back((Eigen::Index)img[g], col, cplx(sign[g] * norm));
            }
            col++;
        }
    }
    SparseMatrix v((Eigen::Index)(D * D), col);
    v.setFromTriplets(trip.begin(), trip.end());
    return v;
}

}  // namespace detail

/// The (s_ket, s_bra, w) triple of a vectorized operator, or nullopt if it is not a joint eigenvector.
inline std::optional<Charges> charge_sector(const Vector &v, size_t n, double tol = 1e-9) {
    const uint64_t D = uint64_t{1} << n;
    if ((uint64_t)v.size() != D * D) {
        throw DimensionError("vector length does not match 4^n");
    }
    const uint64_t sm = detail::mask_of(symmetry_operator(SymmetryKind::S, n));
    const uint64_t wm = detail::mask_of(symmetry_operator(SymmetryKind::W, n));
    double nv = v.norm();
    if (nv == 0) {
        return std::nullopt;
    }
    auto eig = [&](uint64_t ka, uint64_t kb) -> int {
        // <v, g v> / |v|^2 must be +-1 with g v = +-v.
        cplx ov = 0;
        for (uint64_t i = 0; i < D; i++) {
            for (uint64_t j = 0; j < D; j++) {
                ov += std::conj(v(i * D + j)) * v((i ^ ka) * D + (j ^ kb));
            }
        }
        double r = ov.real() / (nv * nv);
        int s = r > 0 ? 1 : -1;
        double dev = 0;
        for (uint64_t i = 0; i < D; i++) {
            for (uint64_t j = 0; j < D; j++) {
                dev += std::norm(v((i ^ ka) * D + (j ^ kb)) - (double)s * v(i * D + j));
            }
        }
        return std::sqrt(dev) <= tol * nv ? s : 0;
    };
    Charges c{eig(sm, 0), eig(0, sm), eig(wm, wm)};
    if (c.s_ket == 0 || c.s_bra == 0 || c.w == 0) {
        return std::nullopt;
    }
    return c;
}

inline std::optional<Charges> charge_sector(const Matrix &rho, double tol = 1e-9) {
    size_t n = (size_t)std::countr_zero((uint64_t)rho.rows());
    return charge_sector(vectorize(rho), n, tol);
}

// ---------------------------------------------------------------- kernels and spectra

struct SteadySpace {
    std::vector<Vector> right;
    std::vector<Vector> left;
    std::vector<Charges> right_charges;
    std::vector<Charges> left_charges;
    /// Smallest singular value above the threshold, over all sectors.
    double gap = 0.0;

    size_t dimension() const {
        return right.size();
    }
};

namespace detail {

inline void require_solvable(const Superoperator &s) {
    if (s.n_qubits > kMaxSolveQubits) {
        throw SizeCapError("dense kernel and spectrum work is capped at " + std::to_string(kMaxSolveQubits) +
                           " qubits, got " + std::to_string(s.n_qubits));
    }
    if (!s.symmetric) {
        throw Error("superoperator does not commute with the symmetry involutions; sector blocks unavailable");
    }
}

inline Matrix sector_block(const Superoperator &s, const SparseMatrix &v) {
    SparseMatrix lv = s.matrix * v;
    SparseMatrix b = SparseMatrix(v.adjoint()) * lv;
    return Matrix(b);
}

}  // namespace detail

/// Right and left kernels, found per symmetry sector by a dense SVD of each block.
/// Singular values below tol count as zero. Any singular value in [tol, 10 tol) is an ambiguous gap.
inline SteadySpace steady_space(const Superoperator &s, double tol = 1e-8) {
    detail::require_solvable(s);
    SteadySpace out;
    out.gap = std::numeric_limits<double>::infinity();
    for (const Charges &ch : all_sectors()) {
        SparseMatrix v = detail::sector_basis(s.n_qubits, ch);
        Matrix b = detail::sector_block(s, v);
        Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto &sv = svd.singularValues();
        for (Eigen::Index k = 0; k < sv.size(); k++) {
            if (sv(k) < tol) {
                out.right.push_back(v * svd.matrixV().col(k));
                out.left.push_back(v * svd.matrixU().col(k));
                out.right_charges.push_back(ch);
                out.left_charges.push_back(ch);
            } else {
                if (sv(k) < 10 * tol) {
                    throw AmbiguousKernelError("singular value " + std::to_string(sv(k)) + " in sector " +
                                               charges_str(ch) + " lies within 10x of the kernel threshold");
                }
                out.gap = std::min(out.gap, sv(k));
            }
        }
    }
    return out;
}

/// All eigenvalues, computed per symmetry sector.
inline std::vector<std::pair<Charges, cplx>> spectrum(const Superoperator &s) {
    detail::require_solvable(s);
    std::vector<std::pair<Charges, cplx>> out;
    for (const Charges &ch : all_sectors()) {
        Matrix b = detail::sector_block(s, detail::sector_basis(s.n_qubits, ch));
        Eigen::ComplexEigenSolver<Matrix> es(b, false);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); k++) {
            out.emplace_back(ch, es.eigenvalues()(k));
        }
    }
    return out;
}

/// Rescales a right-kernel vector to a unit-trace density matrix (Hermitian part).
inline Matrix steady_density(const Vector &v) {
    Matrix m = unvectorize(v);
    cplx tr = m.trace();
    if (std::abs(tr) < 1e-12) {
        throw RangeError("kernel vector is traceless and has no density normalization");
    }
    m /= tr;
    return 0.5 * (m + m.adjoint());
}

/// The unique steady state in the (+1,+1,+1) sector. Throws if that sector's kernel is not one-dimensional.
inline Matrix unique_symmetric_steady_state(const Superoperator &s, double tol = 1e-8) {
    SteadySpace sp = steady_space(s, tol);
    std::vector<Vector> hits;
    for (size_t k = 0; k < sp.right.size(); k++) {
        if (sp.right_charges[k] == Charges{1, 1, 1}) {
            hits.push_back(sp.right[k]);
        }
    }
    if (hits.size() != 1) {
        throw Error("expected one steady state in the symmetric sector, found " + std::to_string(hits.size()));
    }
    return steady_density(hits[0]);
}

inline Matrix unique_symmetric_steady_state(const LindbladModel &m, double tol = 1e-8) {
    return unique_symmetric_steady_state(build_superoperator(m), tol);
}

/// a + c b, for analytic continuation of rates (c may be negative).
inline Superoperator combine(const Superoperator &a, const Superoperator &b, double c) {
    if (a.n_qubits != b.n_qubits) {
        throw DimensionError("superoperator sizes differ");
    }
    return {a.n_qubits, SparseMatrix(a.matrix + c * b.matrix), a.symmetric && b.symmetric};
}

// ---------------------------------------------------------------- states

enum class StateKind { RhoC, RhoMinus, RhoTilde, Edge, EdgePrime };

inline StateKind parse_state_kind(std::string_view s) {
    if (s == "rho_C") {
        return StateKind::RhoC;
    }
    if (s == "rho_minus") {
        return StateKind::RhoMinus;
    }
    if (s == "rho_tilde") {
        return StateKind::RhoTilde;
    }
    if (s == "edge") {
        return StateKind::Edge;
    }
    if (s == "edge_prime") {
        return StateKind::EdgePrime;
    }
    throw std::invalid_argument("unknown state kind '" + std::string(s) + "'");
}

/// Diagonal phase of the ring circuit prod_j CZ_{j,j+1}.
inline std::vector<double> ucz_phases(size_t n) {
    const uint64_t D = uint64_t{1} << n;
    std::vector<double> u(D);
    for (uint64_t b = 0; b < D; b++) {
        uint64_t rot = ((b >> 1) | ((b & 1) << (n - 1))) & (D - 1);
        u[b] = (std::popcount(b & rot) & 1) ? -1.0 : 1.0;
    }
    return u;
}

/// U_CZ rho U_CZ^dagger.
inline Matrix conjugate_ucz(const Matrix &rho) {
    size_t n = (size_t)std::countr_zero((uint64_t)rho.rows());
    auto u = ucz_phases(n);
    Matrix out = rho;
    for (Eigen::Index i = 0; i < rho.rows(); i++) {
        for (Eigen::Index j = 0; j < rho.cols(); j++) {
            out(i, j) *= u[i] * u[j];
        }
    }
    return out;
}

/// Applies a Hadamard on every even site, on both sides of rho.
inline Matrix hadamard_even(const Matrix &rho) {
    size_t n = (size_t)std::countr_zero((uint64_t)rho.rows());
    Matrix m = rho;
    const double r = 1.0 / std::sqrt(2.0);
    const Eigen::Index D = m.rows();
    for (size_t q = 1; q < n; q += 2) {
        const Eigen::Index bit = Eigen::Index{1} << q;
        for (Eigen::Index i = 0; i < D; i++) {
            if (i & bit) {
                continue;
            }
            Eigen::RowVectorXcd a = m.row(i), b = m.row(i | bit);
            m.row(i) = r * (a + b);
            m.row(i | bit) = r * (a - b);
        }
        for (Eigen::Index j = 0; j < D; j++) {
            if (j & bit) {
                continue;
            }
            Vector a = m.col(j), b = m.col(j | bit);
            m.col(j) = r * (a + b);
            m.col(j | bit) = r * (a - b);
        }
    }
    return m;
}

/// MPDO tensor on odd sites: A^{z,z'} = delta_{zz'} (1 + zZ)/2, acting on the bond.
inline Eigen::Matrix2cd mpdo_a(int z, int zp) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    if (z == zp) {
        m(0, 0) = (1.0 + z) / 2;
        m(1, 1) = (1.0 - z) / 2;
    }
    return m;
}

/// MPDO tensor on even sites: B^{x,x'} = delta_{xx'} X^{(1-x)/2}.
inline Eigen::Matrix2cd mpdo_b(int x, int xp) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    if (x == xp) {
        if (x == 1) {
            m(0, 0) = m(1, 1) = 1;
        } else {
            m(0, 1) = m(1, 0) = 1;
        }
    }
    return m;
}

/// Edge state <v_a| A B A B ... A B |v_b> / 2^N: diagonal in Z on odd sites and X on even sites.
inline Matrix edge_state(int alpha, int beta, size_t n) {
    const size_t N = n / 2;
    const uint64_t D = uint64_t{1} << n;
    Matrix diag = Matrix::Zero((Eigen::Index)D, (Eigen::Index)D);
    for (uint64_t b = 0; b < D; b++) {
        Eigen::RowVector2cd v = Eigen::RowVector2cd::Zero();
        v(alpha) = 1;
        for (size_t k = 0; k < N; k++) {
            int z = ((b >> (2 * k)) & 1) ? -1 : 1;
            int x = ((b >> (2 * k + 1)) & 1) ? -1 : 1;
            v = v * mpdo_a(z, z) * mpdo_b(x, x);
        }
        diag((Eigen::Index)b, (Eigen::Index)b) = v(beta) / std::ldexp(1.0, (int)N);
    }
    return hadamard_even(diag);
}

/// Dense density matrix of a named state. `alpha`, `beta` select the edge label for edge kinds.
inline DenseOperator build_state(StateKind kind, size_t n, Boundary b, int alpha = 0, int beta = 0) {
    detail::check_qubits(n, kMaxDensityQubits, "build_state");
    if (n < 4) {
        throw RangeError("states need at least 4 qubits");
    }
    const uint64_t D = uint64_t{1} << n;
    const size_t N = n / 2;
    if (kind == StateKind::Edge || kind == StateKind::EdgePrime) {
        if (b != Boundary::OBC) {
            throw RangeError("edge states exist only under OBC");
        }
        if ((alpha != 0 && alpha != 1) || (beta != 0 && beta != 1)) {
            throw RangeError("edge labels must be 0 or 1");
        }
        Matrix e = edge_state(alpha, beta, n);
        if (kind == StateKind::EdgePrime) {
            Matrix z = Matrix::Zero(e.rows(), e.cols());
            add_sandwich(z, 1.0, single(n, 'Z', n), e, PauliOperator(n));
            e = std::move(z);
        }
        return {OperatorKind::Operator, n, e};
    }
    const uint64_t odd = [&] {
        uint64_t m = 0;
        for (size_t q = 0; q < n; q += 2) {
            m |= uint64_t{1} << q;
        }
        return m;
    }();
    Matrix tilde = Matrix::Zero((Eigen::Index)D, (Eigen::Index)D);
    const double w = std::ldexp(1.0, -(int)n);
    for (uint64_t i = 0; i < D; i++) {
        for (uint64_t j = 0; j < D; j++) {
            if ((i & odd) == (j & odd)) {
                tilde((Eigen::Index)i, (Eigen::Index)j) = w;
            }
        }
    }
    if (kind == StateKind::RhoTilde) {
        return {OperatorKind::Density, n, tilde};
    }
    Matrix rc = conjugate_ucz(tilde);
    if (kind == StateKind::RhoC) {
        return {OperatorKind::Density, n, rc};
    }
    Matrix rm = Matrix::Zero(rc.rows(), rc.cols());
    for (size_t s = 2; s <= n; s += 2) {
        PauliOperator z = single(n, 'Z', s);
        add_sandwich(rm, 1.0 / (double)N, z, rc, z);
    }
    return {OperatorKind::Density, n, rm};
}

// ---------------------------------------------------------------- correlators

enum class Correlator { C_I_S, TrivialC_I_S, A_I, C_II_S, C_II_W, A_II, B_II, TrivialC_II_S, TrivialC_II_W };

inline const char *correlator_name(Correlator c) {
    switch (c) {
        case Correlator::C_I_S:
            return "C_I_S";
        case Correlator::TrivialC_I_S:
            return "trivial_C_I_S";
        case Correlator::A_I:
            return "A_I";
        case Correlator::C_II_S:
            return "C_II_S";
        case Correlator::C_II_W:
            return "C_II_W";
        case Correlator::A_II:
            return "A_II";
        case Correlator::B_II:
            return "B_II";
        case Correlator::TrivialC_II_S:
            return "trivial_C_II_S";
        default:
            return "trivial_C_II_W";
    }
}

inline std::vector<Correlator> all_correlators() {
    return {Correlator::C_I_S,  Correlator::TrivialC_I_S, Correlator::A_I,
            Correlator::C_II_S, Correlator::C_II_W,       Correlator::A_II,
            Correlator::B_II,   Correlator::TrivialC_II_S, Correlator::TrivialC_II_W};
}

inline Correlator parse_correlator(std::string_view s) {
    for (auto c : all_correlators()) {
        if (s == correlator_name(c)) {
            return c;
        }
    }
    throw std::invalid_argument("unknown correlator '" + std::string(s) + "'");
}

/// True when the quantity takes even endpoints (Z-Z correlators and weak strings).
inline bool correlator_needs_even(Correlator c) {
    switch (c) {
        case Correlator::A_I:
        case Correlator::A_II:
        case Correlator::B_II:
        case Correlator::C_II_W:
        case Correlator::TrivialC_II_W:
            return true;
        default:
            return false;
    }
}

/// Tr(rho^dagger A rho B^T) / Tr(rho^dagger rho).
inline double renyi2(const Matrix &rho, const PauliOperator &a, const PauliOperator &b) {
    double den = rho.squaredNorm();
    if (den < 1e-300) {
        throw IllConditionedError("zero purity");
    }
    Matrix m = Matrix::Zero(rho.rows(), rho.cols());
    add_sandwich(m, 1.0, a, rho, dcs::adjoint(dcs::transpose(b)));
    cplx num = (rho.conjugate().array() * m.array()).sum();
    return num.real() / den;
}

/// Value of a correlator on rho. Rényi-1 quantities divide by Tr(rho).
inline double correlator(const Matrix &rho, Correlator q, size_t n, size_t m, Boundary b = Boundary::OBC) {
    size_t nq = (size_t)std::countr_zero((uint64_t)rho.rows());
    bool pbc = b == Boundary::PBC;
    PauliOperator id(nq);
    if (correlator_needs_even(q) && (n % 2 || m % 2)) {
        throw ParityError(std::string(correlator_name(q)) + " needs even n and m");
    }
    auto tr1 = [&](const PauliOperator &p) {
        cplx t = rho.trace();
        if (std::abs(t) < 1e-14) {
            throw IllConditionedError("zero trace");
        }
        return (expectation(rho, p) / t).real();
    };
    auto zz = [&]() {
        check_site(n, nq);
        check_site(m, nq);
        if (n == m) {
            throw RangeError("connected correlator needs n != m");
        }
        return std::make_tuple(single(nq, 'Z', n), single(nq, 'Z', m), dcs::multiply(single(nq, 'Z', n), single(nq, 'Z', m)));
    };
    switch (q) {
        case Correlator::C_I_S:
            return tr1(string_operator(StringKind::Strong, n, m, nq, pbc));
        case Correlator::TrivialC_I_S:
            return tr1(string_operator(StringKind::TrivialStrong, n, m, nq, pbc));
        case Correlator::A_I: {
            auto [zn, zm, znm] = zz();
            return tr1(znm) - tr1(zn) * tr1(zm);
        }
        case Correlator::A_II: {
            auto [zn, zm, znm] = zz();
            return renyi2(rho, znm, id) - renyi2(rho, zn, id) * renyi2(rho, zm, id);
        }
        case Correlator::B_II: {
            auto [zn, zm, znm] = zz();
            return renyi2(rho, znm, znm) - renyi2(rho, zn, zn) * renyi2(rho, zm, zm);
        }
        case Correlator::C_II_S:
            return renyi2(rho, string_operator(StringKind::Strong, n, m, nq, pbc), id);
        case Correlator::TrivialC_II_S:
            return renyi2(rho, string_operator(StringKind::TrivialStrong, n, m, nq, pbc), id);
        case Correlator::C_II_W: {
            PauliOperator w = string_operator(StringKind::Weak, n, m, nq, pbc);
            return renyi2(rho, w, w);
        }
        default: {
            PauliOperator w = string_operator(StringKind::TrivialWeak, n, m, nq, pbc);
            return renyi2(rho, w, w);
        }
    }
}

// ---------------------------------------------------------------- channels and evolution

/// Replaces every odd site by the maximally mixed state.
inline Matrix trace_channel(const Matrix &rho) {
    size_t n = (size_t)std::countr_zero((uint64_t)rho.rows());
    Matrix cur = rho;
    for (size_t s = 1; s <= n; s += 2) {
        Matrix next = Matrix::Zero(cur.rows(), cur.cols());
        add_sandwich(next, 0.25, PauliOperator(n), cur, PauliOperator(n));
        for (char c : {'X', 'Y', 'Z'}) {
            PauliOperator p = single(n, c, s);
            add_sandwich(next, 0.25, p, cur, p);
        }
        cur = std::move(next);
    }
    return cur;
}

inline double trace_norm(const Matrix &a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline double one_norm(const SparseMatrix &m) {
    double best = 0;
    for (Eigen::Index k = 0; k < m.outerSize(); k++) {
        double s = 0;
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            s += std::abs(it.value());
        }
        best = std::max(best, s);
    }
    return best;
}

/// e^{L t} rho. The time is split into steps of one-norm at most 1 and each step sums the Taylor series
/// of the exponential applied to the vector until the terms drop below double precision.
inline Matrix evolve(const Superoperator &s, const Matrix &rho, double t) {
    if (s.n_qubits > kMaxSolveQubits) {
        throw SizeCapError("evolve is capped at " + std::to_string(kMaxSolveQubits) + " qubits");
    }
    if (t < 0) {
        throw RangeError("evolution time must be non-negative");
    }
    Vector v = vectorize(rho);
    if (v.size() != s.matrix.cols()) {
        throw DimensionError("density size does not match the superoperator");
    }
    double nrm = one_norm(s.matrix) * t;
    size_t steps = std::max<size_t>(1, (size_t)std::ceil(nrm));
    double h = t / (double)steps;
    for (size_t k = 0; k < steps; k++) {
        Vector term = v, acc = v;
        for (int j = 1; j < 200; j++) {
            term = (s.matrix * term) * (h / j);
            acc += term;
            if (term.norm() <= 1e-17 * acc.norm()) {
                break;
            }
        }
        v = acc;
    }
    return unvectorize(v);
}

// ---------------------------------------------------------------- population block

/// Generator on X-basis populations of the even sites with every odd site maximally mixed.
/// Index bit i is set when even site 2(i+1) holds x = -1. Requires a model that keeps this family
/// invariant (dual-frame models).
inline Eigen::MatrixXd population_block(const LindbladModel &m, double tol = 1e-10) {
    detail::check_qubits(m.n_qubits, 10, "population_block");
    auto terms = sandwich_terms(m);
    const size_t n = m.n_qubits, N = n / 2;
    const uint64_t D = uint64_t{1} << n;
    auto index_of = [&](uint64_t odd_cfg, uint64_t even_cfg) {
        uint64_t b = 0;
        for (size_t k = 0; k < N; k++) {
            b |= ((odd_cfg >> k) & 1) << (2 * k);
            b |= ((even_cfg >> k) & 1) << (2 * k + 1);
        }
        return b;
    };
    const uint64_t P = uint64_t{1} << N;
    Eigen::MatrixXd g(P, P);
    for (uint64_t k = 0; k < P; k++) {
        Matrix mixed = Matrix::Zero((Eigen::Index)D, (Eigen::Index)D);
        for (uint64_t o = 0; o < P; o++) {
            uint64_t b = index_of(o, k);
            mixed((Eigen::Index)b, (Eigen::Index)b) = 1.0 / (double)P;
        }
        Matrix out = hadamard_even(apply_lindbladian(terms, hadamard_even(mixed)));
        Matrix back = Matrix::Zero(out.rows(), out.cols());
        double leak = out.squaredNorm();
        for (uint64_t k2 = 0; k2 < P; k2++) {
            cplx pop = 0;
            for (uint64_t o = 0; o < P; o++) {
                uint64_t b = index_of(o, k2);
                pop += out((Eigen::Index)b, (Eigen::Index)b);
            }
            g((Eigen::Index)k2, (Eigen::Index)k) = pop.real();
            leak -= std::norm(pop) / (double)P;
        }
        if (leak > tol) {
            throw Error("model does not preserve the population family");
        }
    }
    return g;
}

}  // namespace dcs::exact

#endif
