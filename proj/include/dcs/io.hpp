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

// CSV tables, run manifests and the flat model-config format.
//
// CSV: header row, comma separated, no quoting, '.' decimal independent of locale.
// Model config: `#` comments; header lines `qubits <n>`, `boundary <pbc|obc>`, `convention <discard|literal>`;
// then one term per line, `kind site rate`. A site of `*` expands to the whole family, and `pauli` terms
// put a Pauli string such as `X@1*Z@3` in the site column. `H <pauli> <coef>` adds a Hamiltonian term.

#ifndef DCS_IO_HPP
#define DCS_IO_HPP

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "dcs/common.hpp"
#include "dcs/estimate.hpp"
#include "dcs/exact.hpp"
#include "json.hpp"

namespace dcs::io {

inline constexpr const char *kToolVersion = "0.1.0";

/// Shortest round-trip decimal form, independent of the C locale.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) {
        throw Error("cannot format a double");
    }
    return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
    double v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != header.size()) {
            throw DimensionError("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                                 std::to_string(header.size()));
        }
        for (const auto &f : row) {
            if (f.find_first_of(",\n\r\"") != std::string::npos) {
                throw std::invalid_argument("CSV field '" + f + "' needs quoting, which this format forbids");
            }
        }
        rows.push_back(std::move(row));
    }
    size_t column(std::string_view name) const {
        for (size_t i = 0; i < header.size(); i++) {
            if (header[i] == name) {
                return i;
            }
        }
        throw std::invalid_argument("missing CSV column '" + std::string(name) + "'");
    }
};

inline void write_csv(std::ostream &os, const CsvTable &t) {
    auto line = [&](const std::vector<std::string> &r) {
        for (size_t i = 0; i < r.size(); i++) {
            os << (i ? "," : "") << r[i];
        }
        os << '\n';
    };
    line(t.header);
    for (const auto &r : t.rows) {
        line(r);
    }
}

inline void write_csv(const std::filesystem::path &path, const CsvTable &t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    write_csv(f, t);
    if (!f) {
        throw Error("write to " + path.string() + " failed");
    }
}

inline CsvTable read_csv(std::istream &is) {
    CsvTable t;
    std::string line;
    auto split = [](const std::string &l) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(l);
        while (std::getline(ss, cur, ',')) {
            out.push_back(cur);
        }
        if (!l.empty() && l.back() == ',') {
            out.emplace_back();
        }
        return out;
    };
    if (!std::getline(is, line)) {
        throw std::invalid_argument("empty CSV");
    }
    t.header = split(line);
    while (std::getline(is, line)) {
        if (!line.empty()) {
            t.add_row(split(line));
        }
    }
    return t;
}

inline const std::vector<std::string> &estimate_header() {
    static const std::vector<std::string> h{"quantity", "n_qubits", "boundary", "lambda", "n",        "m",
                                            "t",        "mean",     "stderr",   "n_samples", "seed"};
    return h;
}

inline std::vector<std::string> estimate_row(const EstimateResult &r) {
    return {r.quantity,
            std::to_string(r.n_qubits),
            boundary_name(r.boundary),
            format_double(r.lambda),
            std::to_string(r.n),
            std::to_string(r.m),
            std::to_string(r.t),
            format_double(r.mean),
            format_double(r.std_error),
            std::to_string(r.n_samples),
            std::to_string(r.seed)};
}

inline CsvTable estimate_table(const std::vector<EstimateResult> &rs) {
    CsvTable t{estimate_header(), {}};
    for (const auto &r : rs) {
        t.add_row(estimate_row(r));
    }
    return t;
}

/// Record written next to every CSV. `status` is "ok" or "failed"; a failed run carries the error text.
struct Manifest {
    std::string subcommand;
    nlohmann::json parameters = nlohmann::json::object();
    uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_clock_s = 0;
    std::string status = "ok";
    std::string error;

    nlohmann::json to_json() const {
        nlohmann::json j{{"subcommand", subcommand}, {"parameters", parameters}, {"seed", seed},
                         {"tool_version", kToolVersion}, {"outputs", outputs}, {"wall_clock_s", wall_clock_s},
                         {"status", status}};
        if (!error.empty()) {
            j["error"] = error;
        }
        return j;
    }
};

inline void write_manifest(const std::filesystem::path &path, const Manifest &m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    f << m.to_json().dump(2) << '\n';
}

struct ModelConfig {
    exact::LindbladModel model;
    exact::L2Range l2_range = exact::L2Range::Discard;
};

/// Parses the flat model-config format (see the file comment). Header keys must precede the terms.
inline ModelConfig parse_model_config(std::istream &is) {
    ModelConfig c;
    bool have_qubits = false, in_terms = false;
    std::string line;
    size_t lineno = 0;
    auto fail = [&](const std::string &msg) {
        throw std::invalid_argument("model config line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(is, line)) {
        lineno++;
        if (auto h = line.find('#'); h != std::string::npos) {
            line.resize(h);
        }
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string w; ss >> w;) {
            tok.push_back(w);
        }
        if (tok.empty()) {
            continue;
        }
        const std::string &key = tok[0];
        if (key == "qubits" || key == "boundary" || key == "convention") {
            if (in_terms) {
                fail("header key '" + key + "' after the first term");
            }
            if (tok.size() != 2) {
                fail("expected '" + key + " <value>'");
            }
            if (key == "qubits") {
                c.model.n_qubits = std::stoul(tok[1]);
                have_qubits = true;
            } else if (key == "boundary") {
                c.model.boundary = parse_boundary(tok[1]);
            } else if (tok[1] == "discard") {
                c.l2_range = exact::L2Range::Discard;
            } else if (tok[1] == "literal") {
                c.l2_range = exact::L2Range::Literal;
            } else {
                fail("convention must be discard or literal");
            }
            continue;
        }
        if (!have_qubits) {
            fail("'qubits' must come before the terms");
        }
        in_terms = true;
        if (tok.size() != 3) {
            fail("expected 'kind site rate'");
        }
        double rate = parse_double(tok[2]);
        size_t n = c.model.n_qubits;
        if (key == "H") {
            c.model.hamiltonian.push_back({rate, PauliOperator::parse(tok[1], n)});
            continue;
        }
        exact::JumpKind kind = exact::parse_jump_kind(key);
        if (kind == exact::JumpKind::Pauli) {
            PauliOperator::parse(tok[1], n);
            c.model.terms.push_back({kind, 1, rate, tok[1]});
        } else if (tok[1] == "*") {
            exact::add_family(c.model, kind, rate, c.l2_range);
        } else {
            c.model.terms.push_back({kind, std::stoul(tok[1]), rate, {}});
        }
    }
    if (!have_qubits) {
        throw std::invalid_argument("model config has no 'qubits' line");
    }
    exact::validate(c.model);
    return c;
}

inline ModelConfig load_model_config(const std::filesystem::path &path) {
    std::ifstream f(path);
    if (!f) {
        throw std::invalid_argument("cannot open model config " + path.string());
    }
    return parse_model_config(f);
}

}  // namespace dcs::io

#endif
