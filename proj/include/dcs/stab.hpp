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

#ifndef DCS_STAB_HPP
#define DCS_STAB_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcs/common.hpp"
#include "dcs/pauli.hpp"

namespace dcs {

/// Exact value i^phase * 2^-log2_den, or zero.
struct PhasedDyadic {
    bool zero = true;
    uint8_t phase = 0;
    uint32_t log2_den = 0;

    static PhasedDyadic make_zero() {
        return {};
    }
    static PhasedDyadic make(uint8_t phase, uint32_t log2_den) {
        return {false, (uint8_t)(phase & 3), log2_den};
    }

    std::complex<double> to_complex() const {
        if (zero) {
            return {0, 0};
        }
        double mag = std::ldexp(1.0, -(int)log2_den);
        static const std::complex<double> unit[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return unit[phase] * mag;
    }

    bool operator==(const PhasedDyadic &o) const {
        if (zero || o.zero) {
            return zero == o.zero;
        }
        return phase == o.phase && log2_den == o.log2_den;
    }

    std::string str() const {
        if (zero) {
            return "0";
        }
        static const char *unit[4] = {"1", "i", "-1", "-i"};
        return std::string(unit[phase]) + "/2^" + std::to_string(log2_den);
    }
};

struct MeasureResult {
    int outcome;
    bool was_random;
};

/// Stabilizer tableau over bit-packed rows.
///
/// Rows [0, n) are stabilizers, rows [n, 2n) the paired destabilizers. Each row stores x and z words
/// plus a sign bit in letter form (so a row reading "Y" with sign 0 means +Y).
class StabilizerState {
   public:
    StabilizerState() = default;

    /// |0...0>: stabilizers Z_q, destabilizers X_q.
    explicit StabilizerState(size_t n) : n_(n), w_(words_for(n)), x_(2 * n * w_, 0), z_(2 * n * w_, 0), s_(2 * n, 0) {
        for (size_t q = 0; q < n; q++) {
            set_bit(zr(q), q);
            set_bit(xr(n + q), q);
        }
    }

    size_t n_qubits() const {
        return n_;
    }
    size_t words() const {
        return w_;
    }

    uint64_t *xr(size_t r) {
        return &x_[r * w_];
    }
    uint64_t *zr(size_t r) {
        return &z_[r * w_];
    }
    const uint64_t *xr(size_t r) const {
        return &x_[r * w_];
    }
    const uint64_t *zr(size_t r) const {
        return &z_[r * w_];
    }
    bool sign_bit(size_t r) const {
        return s_[r];
    }

    /// Row r as a Hermitian PauliOperator (destabilizer signs are meaningless).
    PauliOperator row(size_t r) const {
        PauliOperator p(n_);
        std::copy(xr(r), xr(r) + w_, p.x_mask.begin());
        std::copy(zr(r), zr(r) + w_, p.z_mask.begin());
        p.phase_exp = (uint8_t)((2 * s_[r] + p.y_count()) & 3);
        return p;
    }
    PauliOperator stabilizer(size_t k) const {
        return row(k);
    }
    PauliOperator destabilizer(size_t k) const {
        return row(n_ + k);
    }

    bool operator==(const StabilizerState &o) const {
        return n_ == o.n_ && x_ == o.x_ && z_ == o.z_ && s_ == o.s_;
    }

    // ---- Clifford gates on 0-based qubits ----

    void x_gate(size_t q) {
        for (size_t r = 0; r < 2 * n_; r++) {
            s_[r] ^= get_bit(zr(r), q);
        }
    }
    void z_gate(size_t q) {
        for (size_t r = 0; r < 2 * n_; r++) {
            s_[r] ^= get_bit(xr(r), q);
        }
    }
    void y_gate(size_t q) {
        for (size_t r = 0; r < 2 * n_; r++) {
            s_[r] ^= get_bit(xr(r), q) ^ get_bit(zr(r), q);
        }
    }
    void h_gate(size_t q) {
        for (size_t r = 0; r < 2 * n_; r++) {
            bool xb = get_bit(xr(r), q), zb = get_bit(zr(r), q);
            s_[r] ^= xb & zb;
            put_bit(xr(r), q, zb);
            put_bit(zr(r), q, xb);
        }
    }
    void s_gate(size_t q) {
        for (size_t r = 0; r < 2 * n_; r++) {
            bool xb = get_bit(xr(r), q), zb = get_bit(zr(r), q);
            s_[r] ^= xb & zb;
            put_bit(zr(r), q, zb ^ xb);
        }
    }
    void cz_gate(size_t a, size_t b) {
        if (a == b) {
            throw RangeError("CZ needs distinct qubits");
        }
        for (size_t r = 0; r < 2 * n_; r++) {
            bool xa = get_bit(xr(r), a), za = get_bit(zr(r), a);
            bool xb = get_bit(xr(r), b), zb = get_bit(zr(r), b);
            s_[r] ^= xa & xb & (za ^ zb);
            put_bit(zr(r), a, za ^ xb);
            put_bit(zr(r), b, zb ^ xa);
        }
    }

    /// prod_{j=1}^{n} CZ_{j,j+1} with j+n = j. The ring closes for both boundary conditions.
    void u_cz() {
        if (n_ < 2) {
            return;
        }
        if (n_ == 2) {
            cz_gate(0, 1);
            cz_gate(1, 0);
            return;
        }
        for (size_t q = 0; q < n_; q++) {
            cz_gate(q, (q + 1) % n_);
        }
    }

    /// Conjugate by a Pauli: flips the sign of every row anticommuting with p.
    void apply_pauli(const PauliOperator &p) {
        check_size(p);
        WordRange ws = active_words(p);
        for (size_t r = 0; r < 2 * n_; r++) {
            s_[r] ^= anticommutes_row(r, p, ws);
        }
    }

    // ---- measurement ----

    /// Measure Hermitian p. With `forced` set, a random outcome is replaced by *forced (postselection).
    MeasureResult measure(const PauliOperator &p, Rng *rng, std::optional<int> forced = std::nullopt) {
        check_size(p);
        if (!p.is_hermitian()) {
            throw NotHermitianError("measure needs a Hermitian Pauli, got " + p.str());
        }
        WordRange ws = active_words(p);
        size_t pivot = n_;
        for (size_t r = 0; r < n_; r++) {
            if (anticommutes_row(r, p, ws)) {
                pivot = r;
                break;
            }
        }
        if (pivot == n_) {
            return {deterministic_sign(p, ws), false};
        }
        for (size_t r = 0; r < 2 * n_; r++) {
            if (r != pivot && anticommutes_row(r, p, ws)) {
                rowmul(r, pivot);
            }
        }
        size_t d = n_ + pivot;
        std::copy(xr(pivot), xr(pivot) + w_, xr(d));
        std::copy(zr(pivot), zr(pivot) + w_, zr(d));
        s_[d] = s_[pivot];
        int outcome;
        if (forced.has_value()) {
            outcome = *forced;
        } else {
            outcome = coin(*rng) ? -1 : +1;
        }
        std::copy(p.x_mask.begin(), p.x_mask.end(), xr(pivot));
        std::copy(p.z_mask.begin(), p.z_mask.end(), zr(pivot));
        s_[pivot] = (p.sign() < 0) ^ (outcome < 0);
        return {outcome, true};
    }

    /// +1/-1 if +-p is in the stabilizer group, else 0.
    int expectation(const PauliOperator &p) const {
        check_size(p);
        if (!p.is_hermitian()) {
            throw NotHermitianError("expectation needs a Hermitian Pauli, got " + p.str());
        }
        WordRange ws = active_words(p);
        for (size_t r = 0; r < n_; r++) {
            if (anticommutes_row(r, p, ws)) {
                return 0;
            }
        }
        return deterministic_sign(p, ws);
    }

    /// <psi|q|psi> as a power of i for any (possibly non-Hermitian) Pauli q, or nullopt when it vanishes.
    std::optional<uint8_t> expectation_phase(const PauliOperator &q) const {
        check_size(q);
        WordRange ws = active_words(q);
        for (size_t r = 0; r < n_; r++) {
            if (anticommutes_row(r, q, ws)) {
                return std::nullopt;
            }
        }
        // q = i^(q.phase - g.phase) * g where g is the stabilizer-group element with q's masks.
        uint8_t g_phase = group_element_phase(q, ws);
        return (uint8_t)((q.phase_exp + 4 - g_phase) & 3);
    }

    // ---- debugging ----

    /// Checks commutation, pairing and Hermiticity of the rows. Returns an empty string when valid.
    std::string validate() const {
        for (size_t a = 0; a < 2 * n_; a++) {
            for (size_t b = a + 1; b < 2 * n_; b++) {
                bool anti = rows_anticommute(a, b);
                bool paired = (b == a + n_) && a < n_;
                bool both_destab = a >= n_;
                if (both_destab) {
                    continue;
                }
                if (anti != paired) {
                    return "rows " + std::to_string(a) + " and " + std::to_string(b) +
                           (anti ? " anticommute" : " commute") + " but should not";
                }
            }
        }
        // Rank of stabilizers over GF(2).
        std::vector<std::vector<uint64_t>> m;
        for (size_t r = 0; r < n_; r++) {
            std::vector<uint64_t> v(2 * w_);
            std::copy(xr(r), xr(r) + w_, v.begin());
            std::copy(zr(r), zr(r) + w_, v.begin() + w_);
            m.push_back(v);
        }
        size_t rank = 0;
        for (size_t col = 0; col < 2 * n_ && rank < n_; col++) {
            size_t word = col < n_ ? col / 64 : w_ + (col - n_) / 64;
            size_t bit = col < n_ ? col % 64 : (col - n_) % 64;
            size_t piv = rank;
            while (piv < n_ && !((m[piv][word] >> bit) & 1)) {
                piv++;
            }
            if (piv == n_) {
                continue;
            }
            std::swap(m[piv], m[rank]);
            for (size_t r = 0; r < n_; r++) {
                if (r != rank && ((m[r][word] >> bit) & 1)) {
                    for (size_t k = 0; k < 2 * w_; k++) {
                        m[r][k] ^= m[rank][k];
                    }
                }
            }
            rank++;
        }
        if (rank != n_) {
            return "stabilizers have rank " + std::to_string(rank) + " < " + std::to_string(n_);
        }
        return "";
    }

    /// One signed row per line, dense letters with '_' for identity: stabilizers then destabilizers.
    std::string to_text() const {
        std::ostringstream out;
        for (size_t r = 0; r < 2 * n_; r++) {
            out << (s_[r] ? '-' : '+');
            for (size_t q = 0; q < n_; q++) {
                bool xb = get_bit(xr(r), q), zb = get_bit(zr(r), q);
                out << (xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : '_'));
            }
            out << '\n';
        }
        return out.str();
    }

    static StabilizerState from_text(const std::string &text) {
        std::istringstream in(text);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) {
                lines.push_back(line);
            }
        }
        if (lines.empty() || lines.size() % 2) {
            throw std::invalid_argument("tableau text needs 2n rows");
        }
        size_t n = lines.size() / 2;
        StabilizerState st(n);
        for (size_t r = 0; r < 2 * n; r++) {
            const std::string &l = lines[r];
            if (l.size() != n + 1 || (l[0] != '+' && l[0] != '-')) {
                throw std::invalid_argument("bad tableau row '" + l + "'");
            }
            std::fill(st.xr(r), st.xr(r) + st.w_, 0);
            std::fill(st.zr(r), st.zr(r) + st.w_, 0);
            st.s_[r] = l[0] == '-';
            for (size_t q = 0; q < n; q++) {
                char c = l[q + 1];
                put_bit(st.xr(r), q, c == 'X' || c == 'Y');
                put_bit(st.zr(r), q, c == 'Z' || c == 'Y');
            }
        }
        return st;
    }

    /// Overwrite stabilizer/destabilizer rows directly. Used by state factories.
    void set_row(size_t r, const PauliOperator &p) {
        check_size(p);
        std::copy(p.x_mask.begin(), p.x_mask.end(), xr(r));
        std::copy(p.z_mask.begin(), p.z_mask.end(), zr(r));
        s_[r] = p.sign() < 0;
    }

   private:
    size_t n_ = 0;
    size_t w_ = 0;
    std::vector<uint64_t> x_;
    std::vector<uint64_t> z_;
    std::vector<uint8_t> s_;

    static bool get_bit(const uint64_t *w, size_t q) {
        return (w[q >> 6] >> (q & 63)) & 1;
    }
    static void set_bit(uint64_t *w, size_t q) {
        w[q >> 6] |= uint64_t{1} << (q & 63);
    }
    static void put_bit(uint64_t *w, size_t q, bool v) {
        uint64_t bit = uint64_t{1} << (q & 63);
        w[q >> 6] = v ? (w[q >> 6] | bit) : (w[q >> 6] & ~bit);
    }

    void check_size(const PauliOperator &p) const {
        if (p.n_qubits != n_) {
            throw DimensionError("Pauli on " + std::to_string(p.n_qubits) + " qubits applied to a " +
                                 std::to_string(n_) + "-qubit state");
        }
    }

    /// Half-open range of words where p has support.
    struct WordRange {
        size_t lo, hi;
    };

    static WordRange active_words(const PauliOperator &p) {
        size_t lo = 0, hi = p.x_mask.size();
        while (lo < hi && !(p.x_mask[lo] | p.z_mask[lo])) {
            lo++;
        }
        while (hi > lo && !(p.x_mask[hi - 1] | p.z_mask[hi - 1])) {
            hi--;
        }
        return {lo, hi};
    }

    bool anticommutes_row(size_t r, const PauliOperator &p, WordRange ws) const {
        const uint64_t *x = xr(r), *z = zr(r);
        uint64_t acc = 0;
        for (size_t k = ws.lo; k < ws.hi; k++) {
            acc ^= (x[k] & p.z_mask[k]) ^ (z[k] & p.x_mask[k]);
        }
        return std::popcount(acc) & 1;
    }

    bool rows_anticommute(size_t a, size_t b) const {
        uint64_t acc = 0;
        for (size_t k = 0; k < w_; k++) {
            acc ^= (xr(a)[k] & zr(b)[k]) ^ (zr(a)[k] & xr(b)[k]);
        }
        return std::popcount(acc) & 1;
    }

    /// row h <- row h * row i. Signs are tracked only for stabilizer rows.
    void rowmul(size_t h, size_t i) {
        uint64_t *xh = xr(h), *zh = zr(h);
        const uint64_t *xi = xr(i), *zi = zr(i);
        if (h >= n_) {
            for (size_t k = 0; k < w_; k++) {
                xh[k] ^= xi[k];
                zh[k] ^= zi[k];
            }
            return;
        }
        uint32_t ph = 0;
        for (size_t k = 0; k < w_; k++) {
            ph += std::popcount(xh[k] & zh[k]);
            ph += std::popcount(xi[k] & zi[k]);
            ph += 2 * std::popcount(zh[k] & xi[k]);
            xh[k] ^= xi[k];
            zh[k] ^= zi[k];
            ph -= std::popcount(xh[k] & zh[k]);
        }
        ph += 2 * (s_[h] + s_[i]);
        s_[h] = (ph >> 1) & 1;
    }

    /// Phase (bare convention) of the stabilizer-group element whose masks equal q's.
    /// Assumes q commutes with every stabilizer.
    uint8_t group_element_phase(const PauliOperator &q, WordRange ws) const {
        std::vector<uint64_t> ax(w_, 0), az(w_, 0);
        uint32_t ph = 0;
        for (size_t k = 0; k < n_; k++) {
            if (!anticommutes_row(n_ + k, q, ws)) {
                continue;
            }
            const uint64_t *x = xr(k), *z = zr(k);
            for (size_t w = 0; w < w_; w++) {
                ph += std::popcount(x[w] & z[w]);
                ph += 2 * std::popcount(az[w] & x[w]);
                ax[w] ^= x[w];
                az[w] ^= z[w];
            }
            ph += 2 * s_[k];
        }
        return (uint8_t)(ph & 3);
    }

    int deterministic_sign(const PauliOperator &p, WordRange ws) const {
        uint8_t g = group_element_phase(p, ws);
        return ((p.phase_exp + 4 - g) & 3) == 0 ? +1 : -1;
    }
};

// ---- factories ----

inline StabilizerState plus_state(size_t n) {
    if (n < 1) {
        throw DimensionError("plus_state needs n >= 1");
    }
    StabilizerState st(n);
    for (size_t q = 0; q < n; q++) {
        st.h_gate(q);
    }
    return st;
}

inline StabilizerState zero_state(size_t n) {
    return StabilizerState(n);
}

/// A random decorated domain-wall configuration: odd site 2i-1 stabilized by z_i Z, even site 2i by
/// z_i z_{i+1} X. Under OBC the last even site keeps decoration +.
inline StabilizerState sample_decorated_state(size_t n, Boundary boundary, Rng &rng) {
    if (n == 0 || n % 2) {
        throw ParityError("decorated state needs an even qubit count, got " + std::to_string(n));
    }
    size_t N = n / 2;
    std::vector<int> zs(N);
    for (auto &z : zs) {
        z = coin(rng) ? -1 : +1;
    }
    StabilizerState st(n);
    for (size_t i = 0; i < N; i++) {
        size_t odd = 2 * i, even = 2 * i + 1;  // 0-based qubits of sites 2i+1, 2i+2
        PauliOperator zp(n), xp(n);
        zp.set(odd, false, true);
        xp.set(even, true, false);
        if (zs[i] < 0) {
            zp = zp.negated();
        }
        int dec = (i + 1 < N) ? zs[i] * zs[i + 1] : (boundary == Boundary::PBC ? zs[i] * zs[0] : +1);
        if (dec < 0) {
            xp = xp.negated();
        }
        st.set_row(odd, zp);
        st.set_row(even, xp);
        PauliOperator dx(n), dz(n);
        dx.set(odd, true, false);
        dz.set(even, false, true);
        st.set_row(n + odd, dx);
        st.set_row(n + even, dz);
    }
    return st;
}

/// True when a and b describe the same pure state.
inline bool same_state(const StabilizerState &a, const StabilizerState &b) {
    if (a.n_qubits() != b.n_qubits()) {
        return false;
    }
    for (size_t k = 0; k < a.n_qubits(); k++) {
        if (b.expectation(a.stabilizer(k)) != 1) {
            return false;
        }
    }
    return true;
}

namespace detail {

/// Solve M a = rhs over GF(2); M is rows x cols given as bit rows. Returns nullopt when inconsistent.
inline std::optional<std::vector<uint8_t>> solve_gf2(std::vector<std::vector<uint8_t>> m, std::vector<uint8_t> rhs) {
    size_t rows = m.size();
    size_t cols = rows ? m[0].size() : 0;
    std::vector<size_t> pivot_col;
    size_t rank = 0;
    for (size_t c = 0; c < cols && rank < rows; c++) {
        size_t p = rank;
        while (p < rows && !m[p][c]) {
            p++;
        }
        if (p == rows) {
            continue;
        }
        std::swap(m[p], m[rank]);
        std::swap(rhs[p], rhs[rank]);
        for (size_t r = 0; r < rows; r++) {
            if (r != rank && m[r][c]) {
                for (size_t k = c; k < cols; k++) {
                    m[r][k] ^= m[rank][k];
                }
                rhs[r] ^= rhs[rank];
            }
        }
        pivot_col.push_back(c);
        rank++;
    }
    for (size_t r = rank; r < rows; r++) {
        if (rhs[r]) {
            return std::nullopt;
        }
    }
    std::vector<uint8_t> a(cols, 0);
    for (size_t r = 0; r < rank; r++) {
        a[pivot_col[r]] = rhs[r];
    }
    return a;
}

}  // namespace detail

/// <u|A|v><v|B|u> for stabilizer states u, v and Hermitian Paulis A, B.
///
/// With u' = B|u> and P = B A the value is <u'|P|v><v|u'> = 2^-n sum_{h in G_v} <u'|P h|u'>. Postselecting a
/// copy of u' onto v's stabilizers gives |<v|u'>|^2 = 2^-k (or 0); the surviving terms of the sum form a
/// single coset h0 K, all with the same value, so the result is 2^-k <u'|P h0|u'>.
inline PhasedDyadic sandwich(const StabilizerState &u, const PauliOperator &A, const PauliOperator &B,
                             const StabilizerState &v) {
    size_t n = u.n_qubits();
    if (v.n_qubits() != n || A.n_qubits != n || B.n_qubits != n) {
        throw DimensionError("sandwich operands disagree on qubit count");
    }
    if (!A.is_hermitian() || !B.is_hermitian()) {
        throw NotHermitianError("sandwich needs Hermitian A and B");
    }
    StabilizerState ut = u;
    ut.apply_pauli(B);
    PauliOperator P = multiply(B, A);

    StabilizerState w = ut;
    uint32_t k = 0;
    for (size_t i = 0; i < n; i++) {
        MeasureResult r = w.measure(v.stabilizer(i), nullptr, +1);
        if (r.was_random) {
            k++;
        } else if (r.outcome < 0) {
            return PhasedDyadic::make_zero();
        }
    }

    // Find h0 = prod g_i^{a_i} with P h0 commuting with every stabilizer s_j of u'.
    std::vector<PauliOperator> g(n), s(n);
    for (size_t i = 0; i < n; i++) {
        g[i] = v.stabilizer(i);
        s[i] = ut.stabilizer(i);
    }
    std::vector<std::vector<uint8_t>> m(n, std::vector<uint8_t>(n));
    std::vector<uint8_t> rhs(n);
    for (size_t j = 0; j < n; j++) {
        rhs[j] = anticommutes(s[j], P);
        for (size_t i = 0; i < n; i++) {
            m[j][i] = anticommutes(s[j], g[i]);
        }
    }
    auto a = detail::solve_gf2(std::move(m), std::move(rhs));
    if (!a) {
        return PhasedDyadic::make_zero();
    }
    PauliOperator Q = P;
    for (size_t i = 0; i < n; i++) {
        if ((*a)[i]) {
            Q = multiply(Q, g[i]);
        }
    }
    auto e = ut.expectation_phase(Q);
    if (!e) {
        return PhasedDyadic::make_zero();
    }
    return PhasedDyadic::make(*e, k);
}

/// |<u|v>|^2.
inline double overlap_sq(const StabilizerState &u, const StabilizerState &v) {
    PauliOperator id(u.n_qubits());
    return sandwich(u, id, id, v).to_complex().real();
}

}  // namespace dcs

#endif
