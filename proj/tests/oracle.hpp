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

// Brute-force statevector reference, written without the library's Pauli or tableau code.

#ifndef DCS_TESTS_ORACLE_HPP
#define DCS_TESTS_ORACLE_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

struct State {
    size_t n;
    std::vector<cd> amp;

    explicit State(size_t n_) : n(n_), amp(size_t{1} << n_, 0.0) {
        amp[0] = 1.0;
    }

    void h(size_t q) {
        const double r = 1.0 / std::sqrt(2.0);
        for (size_t i = 0; i < amp.size(); i++) {
            if (!((i >> q) & 1)) {
                size_t j = i | (size_t{1} << q);
                cd a = amp[i], b = amp[j];
                amp[i] = r * (a + b);
                amp[j] = r * (a - b);
            }
        }
    }
    void s(size_t q) {
        for (size_t i = 0; i < amp.size(); i++) {
            if ((i >> q) & 1) {
                amp[i] *= cd(0, 1);
            }
        }
    }
    void cz(size_t a, size_t b) {
        for (size_t i = 0; i < amp.size(); i++) {
            if (((i >> a) & 1) && ((i >> b) & 1)) {
                amp[i] = -amp[i];
            }
        }
    }
};

/// Applies a Pauli string given as letters per qubit ('I','X','Y','Z') times a global phase.
inline std::vector<cd> apply(const std::string &letters, cd phase, const std::vector<cd> &v) {
    std::vector<cd> out(v.size(), 0.0);
    for (size_t i = 0; i < v.size(); i++) {
        size_t j = i;
        cd c = phase;
        for (size_t q = 0; q < letters.size(); q++) {
            bool bit = (i >> q) & 1;
            switch (letters[q]) {
                case 'X':
                    j ^= size_t{1} << q;
                    break;
                case 'Z':
                    if (bit) c = -c;
                    break;
                case 'Y':
                    // Y|0> = i|1>, Y|1> = -i|0>
                    j ^= size_t{1} << q;
                    c *= bit ? cd(0, -1) : cd(0, 1);
                    break;
                default:
                    break;
            }
        }
        out[j] += c * v[i];
    }
    return out;
}

inline cd inner(const std::vector<cd> &a, const std::vector<cd> &b) {
    cd s = 0;
    for (size_t i = 0; i < a.size(); i++) {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}

}  // namespace oracle

#endif
