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

#ifndef DCS_FIT_HPP
#define DCS_FIT_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "dcs/common.hpp"

namespace dcs {

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double slope_err = 0;
    double intercept_err = 0;
    double r2 = 0;
    size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x. Standard errors assume homoscedastic residuals.
inline LinearFit linear_fit(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size()) {
        throw DimensionError("fit needs equal-length x and y");
    }
    size_t n = x.size();
    if (n < 2) {
        throw FitError("fit needs at least 2 points, got " + std::to_string(n));
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; i++) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; i++) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) {
        throw FitError("fit needs at least two distinct x values");
    }
    LinearFit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (size_t i = 0; i < n; i++) {
        double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    if (n > 2) {
        double s2 = sse / (n - 2);
        f.slope_err = std::sqrt(s2 / sxx);
        f.intercept_err = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

/// Fit log(y) = a + b log(x); the slope is the power-law exponent.
inline LinearFit loglog_fit(const std::vector<double> &x, const std::vector<double> &y) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); i++) {
        if (!(x[i] > 0) || !(y[i] > 0)) {
            throw FitError("log-log fit needs positive data");
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return linear_fit(lx, ly);
}

}  // namespace dcs

#endif
