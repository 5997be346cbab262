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

#ifndef DCS_COMMON_HPP
#define DCS_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dcs {

enum class Boundary { PBC, OBC };

inline const char *boundary_name(Boundary b) {
    return b == Boundary::PBC ? "PBC" : "OBC";
}

inline Boundary parse_boundary(std::string_view s) {
    if (s == "PBC" || s == "pbc") {
        return Boundary::PBC;
    }
    if (s == "OBC" || s == "obc") {
        return Boundary::OBC;
    }
    throw std::invalid_argument("unknown boundary '" + std::string(s) + "'");
}

/// Base class for every domain error raised by the library. The CLI maps these to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};
struct ParityError : Error {
    using Error::Error;
};
struct RangeError : Error {
    using Error::Error;
};
struct NotHermitianError : Error {
    using Error::Error;
};
struct SizeCapError : Error {
    using Error::Error;
};
struct DiscardedTermError : Error {
    using Error::Error;
};
struct AmbiguousKernelError : Error {
    using Error::Error;
};
struct IllConditionedError : Error {
    using Error::Error;
};
struct BudgetError : Error {
    using Error::Error;
};
struct FitError : Error {
    using Error::Error;
};

/// Thrown when a threshold is not crossed within the step budget. Carries the last observed value.
struct SaturationError : Error {
    double last_value;
    uint64_t last_step;
    SaturationError(const std::string &msg, double value, uint64_t step)
        : Error(msg), last_value(value), last_step(step) {
    }
};

using Rng = std::mt19937_64;

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Rng for trajectory `index` of a run seeded with `seed`. Independent of thread count.
inline Rng stream_rng(uint64_t seed, uint64_t index) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x5851F42D4C957F2DULL)));
}

/// Uniform integer in [0, n). Multiply-shift, deterministic across platforms.
inline uint64_t uniform_below(Rng &rng, uint64_t n) {
    return (uint64_t)(((unsigned __int128)rng() * n) >> 64);
}

/// Uniform double in [0, 1).
inline double uniform_unit(Rng &rng) {
    return (double)(rng() >> 11) * 0x1.0p-53;
}

inline bool coin(Rng &rng) {
    return (rng() >> 63) != 0;
}

}  // namespace dcs

#endif
