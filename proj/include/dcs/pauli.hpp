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

#ifndef DCS_PAULI_HPP
#define DCS_PAULI_HPP

#include <bit>
#include <cstddef>
#include <ostream>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/common.hpp"

namespace dcs {

inline size_t words_for(size_t n_qubits) {
    return (n_qubits + 63) / 64;
}

/// A signed Pauli string i^phase_exp * prod_q X_q^x_q Z_q^z_q.
///
/// The phase is relative to the bare X/Z product, so Y = i*X*Z is stored as (x=1, z=1, phase_exp=1).
/// Qubit indices are 0-based; the 1-based site s used elsewhere is qubit s-1. Only this header converts.
struct PauliOperator {
    size_t n_qubits = 0;
    std::vector<uint64_t> x_mask;
    std::vector<uint64_t> z_mask;
    uint8_t phase_exp = 0;

    PauliOperator() = default;
    explicit PauliOperator(size_t n) : n_qubits(n), x_mask(words_for(n), 0), z_mask(words_for(n), 0) {
    }

    bool x(size_t q) const {
        return (x_mask[q >> 6] >> (q & 63)) & 1;
    }
    bool z(size_t q) const {
        return (z_mask[q >> 6] >> (q & 63)) & 1;
    }
    void set(size_t q, bool xb, bool zb) {
        uint64_t bit = uint64_t{1} << (q & 63);
        x_mask[q >> 6] = xb ? (x_mask[q >> 6] | bit) : (x_mask[q >> 6] & ~bit);
        z_mask[q >> 6] = zb ? (z_mask[q >> 6] | bit) : (z_mask[q >> 6] & ~bit);
    }

    /// Number of Y factors.
    size_t y_count() const {
        size_t c = 0;
        for (size_t k = 0; k < x_mask.size(); k++) {
            c += std::popcount(x_mask[k] & z_mask[k]);
        }
        return c;
    }

    size_t weight() const {
        size_t c = 0;
        for (size_t k = 0; k < x_mask.size(); k++) {
            c += std::popcount(x_mask[k] | z_mask[k]);
        }
        return c;
    }

    bool is_hermitian() const {
        return ((phase_exp + y_count()) & 1) == 0;
    }

    /// Phase relative to the letter form (X, Y, Z written out): 0 -> +, 1 -> +i, 2 -> -, 3 -> -i.
    uint8_t letter_phase() const {
        return (uint8_t)((phase_exp + 4 - (y_count() & 3)) & 3);
    }

    /// Sign of a Hermitian operator in letter form.
    int sign() const {
        return letter_phase() == 0 ? +1 : -1;
    }

    bool is_identity() const {
        for (size_t k = 0; k < x_mask.size(); k++) {
            if (x_mask[k] | z_mask[k]) {
                return false;
            }
        }
        return phase_exp == 0;
    }

    bool same_masks(const PauliOperator &o) const {
        return n_qubits == o.n_qubits && x_mask == o.x_mask && z_mask == o.z_mask;
    }

    bool operator==(const PauliOperator &o) const {
        return same_masks(o) && phase_exp == o.phase_exp;
    }
    bool operator!=(const PauliOperator &o) const {
        return !(*this == o);
    }

    /// 0-based qubits with non-identity factors.
    std::vector<size_t> support() const {
        std::vector<size_t> out;
        for (size_t k = 0; k < x_mask.size(); k++) {
            uint64_t m = x_mask[k] | z_mask[k];
            while (m) {
                out.push_back(k * 64 + std::countr_zero(m));
                m &= m - 1;
            }
        }
        return out;
    }

    PauliOperator negated() const {
        PauliOperator r = *this;
        r.phase_exp = (uint8_t)((r.phase_exp + 2) & 3);
        return r;
    }

    /// Text form "+X@1 Z@3", "-i Y@2", "+I". Sites are 1-based.
    std::string str() const {
        static const char *prefix[4] = {"+", "+i", "-", "-i"};
        std::ostringstream out;
        out << prefix[letter_phase()];
        bool any = false;
        for (size_t q = 0; q < n_qubits; q++) {
            bool xb = x(q), zb = z(q);
            if (!xb && !zb) {
                continue;
            }
            out << (any ? " " : (letter_phase() & 1 ? " " : "")) << (xb ? (zb ? 'Y' : 'X') : 'Z') << '@' << (q + 1);
            any = true;
        }
        if (!any) {
            out << (letter_phase() & 1 ? " I" : "I");
        }
        return out.str();
    }

    static PauliOperator parse(std::string_view text, size_t n_qubits);
};

inline std::ostream &operator<<(std::ostream &os, const PauliOperator &p) {
    return os << p.str();
}

inline void check_same_size(const PauliOperator &a, const PauliOperator &b) {
    if (a.n_qubits != b.n_qubits) {
        throw DimensionError(
            "Pauli size mismatch: " + std::to_string(a.n_qubits) + " vs " + std::to_string(b.n_qubits));
    }
}

/// Product a*b with exact phase tracking.
inline PauliOperator multiply(const PauliOperator &a, const PauliOperator &b) {
    check_same_size(a, b);
    PauliOperator r(a.n_qubits);
    size_t swaps = 0;
    for (size_t k = 0; k < a.x_mask.size(); k++) {
        // Moving b's X factors left past a's Z factors costs a sign each.
        swaps += std::popcount(a.z_mask[k] & b.x_mask[k]);
        r.x_mask[k] = a.x_mask[k] ^ b.x_mask[k];
        r.z_mask[k] = a.z_mask[k] ^ b.z_mask[k];
    }
    r.phase_exp = (uint8_t)((a.phase_exp + b.phase_exp + 2 * (swaps & 1)) & 3);
    return r;
}

/// Symplectic form <a,b> mod 2.
inline bool anticommutes(const PauliOperator &a, const PauliOperator &b) {
    check_same_size(a, b);
    uint64_t acc = 0;
    for (size_t k = 0; k < a.x_mask.size(); k++) {
        acc ^= (a.x_mask[k] & b.z_mask[k]) ^ (a.z_mask[k] & b.x_mask[k]);
    }
    return std::popcount(acc) & 1;
}

inline bool commutes(const PauliOperator &a, const PauliOperator &b) {
    return !anticommutes(a, b);
}

/// Transpose in the computational basis: Y^T = -Y, X and Z are symmetric.
inline PauliOperator transpose(const PauliOperator &p) {
    PauliOperator r = p;
    if (p.y_count() & 1) {
        r.phase_exp = (uint8_t)((r.phase_exp + 2) & 3);
    }
    return r;
}

inline PauliOperator adjoint(const PauliOperator &p) {
    // (i^k X^x Z^z)^dag = i^-k Z^z X^x = i^-k (-1)^{|x&z|} X^x Z^z.
    PauliOperator r = p;
    r.phase_exp = (uint8_t)((4 - p.phase_exp + 2 * (p.y_count() & 1)) & 3);
    return r;
}

inline void check_site(size_t site, size_t n_qubits) {
    if (site < 1 || site > n_qubits) {
        throw RangeError("site " + std::to_string(site) + " outside [1, " + std::to_string(n_qubits) + "]");
    }
}

/// Single-qubit Pauli `letter` at 1-based `site`.
inline PauliOperator single(size_t n_qubits, char letter, size_t site) {
    check_site(site, n_qubits);
    PauliOperator p(n_qubits);
    size_t q = site - 1;
    switch (letter) {
        case 'I':
            break;
        case 'X':
            p.set(q, true, false);
            break;
        case 'Z':
            p.set(q, false, true);
            break;
        case 'Y':
            p.set(q, true, true);
            p.phase_exp = 1;
            break;
        default:
            throw std::invalid_argument(std::string("bad Pauli letter ") + letter);
    }
    return p;
}

/// Product of single-qubit letters at 1-based sites, e.g. letters "ZXZ" at sites {1,2,3}.
inline PauliOperator product(size_t n_qubits, std::string_view letters, const std::vector<size_t> &sites) {
    if (letters.size() != sites.size()) {
        throw std::invalid_argument("letters/sites length mismatch");
    }
    PauliOperator r(n_qubits);
    for (size_t k = 0; k < sites.size(); k++) {
        r = multiply(r, single(n_qubits, letters[k], sites[k]));
    }
    return r;
}

inline PauliOperator PauliOperator::parse(std::string_view text, size_t n_qubits) {
    PauliOperator r(n_qubits);
    size_t pos = 0;
    auto skip_ws = [&]() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '*')) {
            pos++;
        }
    };
    uint8_t phase = 0;
    skip_ws();
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        phase = text[pos] == '-' ? 2 : 0;
        pos++;
    }
    skip_ws();
    if (pos < text.size() && text[pos] == 'i') {
        phase = (uint8_t)((phase + 1) & 3);
        pos++;
    }
    while (true) {
        skip_ws();
        if (pos >= text.size()) {
            break;
        }
        char letter = text[pos++];
        if (letter == 'I' && (pos >= text.size() || text[pos] != '@')) {
            continue;
        }
        if (pos >= text.size() || text[pos] != '@') {
            throw std::invalid_argument("expected '@' in Pauli text '" + std::string(text) + "'");
        }
        pos++;
        size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            pos++;
        }
        if (start == pos) {
            throw std::invalid_argument("expected site number in Pauli text '" + std::string(text) + "'");
        }
        size_t site = std::stoul(std::string(text.substr(start, pos - start)));
        r = multiply(r, single(n_qubits, letter, site));
    }
    // Letter-form phase on top of whatever the Y factors contributed.
    r.phase_exp = (uint8_t)((r.phase_exp + phase) & 3);
    return r;
}

enum class SymmetryKind { S, W };

/// S = prod of X on even sites, W = prod of X on odd sites (1-based labels).
inline PauliOperator symmetry_operator(SymmetryKind kind, size_t n_qubits) {
    if (n_qubits == 0 || n_qubits % 2) {
        throw ParityError("symmetry operators need an even qubit count, got " + std::to_string(n_qubits));
    }
    PauliOperator p(n_qubits);
    for (size_t site = (kind == SymmetryKind::S ? 2 : 1); site <= n_qubits; site += 2) {
        p.set(site - 1, true, false);
    }
    return p;
}

enum class StringKind { Strong, Weak, TrivialStrong, TrivialWeak };

inline StringKind parse_string_kind(std::string_view s) {
    if (s == "strong") {
        return StringKind::Strong;
    }
    if (s == "weak") {
        return StringKind::Weak;
    }
    if (s == "trivial_strong") {
        return StringKind::TrivialStrong;
    }
    if (s == "trivial_weak") {
        return StringKind::TrivialWeak;
    }
    throw std::invalid_argument("unknown string kind '" + std::string(s) + "'");
}

inline const char *string_kind_name(StringKind k) {
    switch (k) {
        case StringKind::Strong:
            return "strong";
        case StringKind::Weak:
            return "weak";
        case StringKind::TrivialStrong:
            return "trivial_strong";
        default:
            return "trivial_weak";
    }
}

/// Z_n (prod X on sites strictly between, same parity as n+1) Z_m, or without the Z ends for trivial kinds.
///
/// Strong kinds need odd endpoints, weak kinds even ones. With `pbc` set, sites past n_qubits wrap.
inline PauliOperator string_operator(StringKind kind, size_t n, size_t m, size_t n_qubits, bool pbc = false) {
    bool want_odd = kind == StringKind::Strong || kind == StringKind::TrivialStrong;
    if ((n % 2 == 1) != want_odd || (m % 2 == 1) != want_odd) {
        throw ParityError(std::string(string_kind_name(kind)) + " string needs " + (want_odd ? "odd" : "even") +
                          " endpoints, got (" + std::to_string(n) + ", " + std::to_string(m) + ")");
    }
    if (n < 1 || n >= m) {
        throw RangeError("string needs 1 <= n < m, got (" + std::to_string(n) + ", " + std::to_string(m) + ")");
    }
    if (m > n_qubits && (!pbc || m - n >= n_qubits)) {
        throw RangeError("string (" + std::to_string(n) + ", " + std::to_string(m) + ") leaves [1, " +
                         std::to_string(n_qubits) + "]");
    }
    auto wrap = [&](size_t s) {
        return ((s - 1) % n_qubits) + 1;
    };
    PauliOperator p(n_qubits);
    for (size_t s = n + 1; s < m; s += 2) {
        p.set(wrap(s) - 1, true, false);
    }
    if (kind == StringKind::Strong || kind == StringKind::Weak) {
        p = multiply(single(n_qubits, 'Z', wrap(n)), p);
        p = multiply(p, single(n_qubits, 'Z', wrap(m)));
    }
    return p;
}

}  // namespace dcs

#endif
