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

// Command-line front end. Every run writes <out>.csv (or .json) plus <out>.manifest.json.
// Exit codes: 0 ok, 1 domain error, 2 usage error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcs/dcs.hpp"

namespace fs = std::filesystem;
using namespace dcs;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Output location shared by all subcommands.
struct OutputOptions {
    std::string dir;
    std::string name;

    fs::path path(const std::string &ext) const {
        return fs::path(dir) / (name + ext);
    }
};

/// A subcommand body fills the manifest and writes its outputs through the context.
struct RunContext {
    OutputOptions out;
    io::Manifest manifest;

    void write_csv(const io::CsvTable &t, const std::string &suffix = "") {
        fs::path p = out.path(suffix + ".csv");
        io::write_csv(p, t);
        manifest.outputs.push_back(p.string());
    }
    void write_json(const json &j, const std::string &suffix = "") {
        fs::path p = out.path(suffix + ".json");
        std::ofstream f(p, std::ios::binary);
        if (!f) {
            throw Error("cannot open " + p.string() + " for writing");
        }
        f << j.dump(2) << '\n';
        manifest.outputs.push_back(p.string());
    }
};

int run(const std::string &sub, const OutputOptions &out, const std::function<void(RunContext &)> &body) {
    RunContext ctx{out, {}};
    ctx.manifest.subcommand = sub;
    auto t0 = std::chrono::steady_clock::now();
    int code = kExitOk;
    try {
        fs::create_directories(out.dir);
        body(ctx);
    } catch (const Error &e) {
        ctx.manifest.status = "failed";
        ctx.manifest.error = e.what();
        code = kExitDomain;
    } catch (const std::invalid_argument &e) {
        ctx.manifest.status = "failed";
        ctx.manifest.error = e.what();
        code = kExitUsage;
    } catch (const std::exception &e) {
        ctx.manifest.status = "failed";
        ctx.manifest.error = e.what();
        code = kExitDomain;
    }
    ctx.manifest.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        io::write_manifest(out.path(".manifest.json"), ctx.manifest);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    if (code != kExitOk) {
        std::cerr << "error: " << ctx.manifest.error << '\n';
    } else {
        for (const auto &p : ctx.manifest.outputs) {
            std::cout << p << '\n';
        }
    }
    return code;
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) {
        if (!cur.empty()) {
            out.push_back(cur);
        }
    }
    return out;
}

/// Trajectory flags shared by the Monte Carlo subcommands.
struct TrajectoryFlags {
    size_t qubits = 14;
    std::string boundary = "pbc";
    size_t trajectories = 100;
    uint64_t steps = 0;
    uint64_t burn_in = 0;
    uint64_t observe_every = 0;
    uint64_t seed = 1;
    unsigned threads = 0;
    std::string initial = "plus";
    std::string convention = "primal_support";

    void add(CLI::App *app) {
        app->add_option("--qubits", qubits, "Chain length 2N");
        app->add_option("--boundary", boundary, "pbc or obc")->check(CLI::IsMember({"pbc", "obc", "PBC", "OBC"}));
        app->add_option("--trajectories", trajectories, "Independent trajectories");
        app->add_option("--steps", steps, "Elementary steps after burn-in (default 200 sweeps)");
        app->add_option("--burn-in", burn_in, "Elementary steps before the first observation (default 50 sweeps)");
        app->add_option("--observe-every", observe_every, "Observation cadence in steps (default one sweep)");
        app->add_option("--seed", seed, "Base seed; trajectory k uses stream k");
        app->add_option("--threads", threads, "Worker threads (0 = hardware)");
        app->add_option("--initial", initial, "plus or decorated")->check(CLI::IsMember({"plus", "decorated"}));
        app->add_option("--convention", convention, "OBC admissibility convention")
            ->check(CLI::IsMember({"primal_support", "own_support"}));
    }
    TrajectoryConfig config(double lambda) const {
        TrajectoryConfig c;
        c.n_qubits = qubits;
        c.boundary = parse_boundary(boundary);
        c.lambda = lambda;
        c.steps = steps ? steps : 200 * qubits;
        c.burn_in = burn_in ? burn_in : 50 * qubits;
        c.observe_every = observe_every;
        c.seed = seed;
        c.convention = convention == "own_support" ? BoundaryConvention::OwnSupport : BoundaryConvention::PrimalSupport;
        return c;
    }
    Initial init() const {
        return Initial{initial == "decorated" ? InitialKind::Decorated : InitialKind::Plus, std::nullopt};
    }
    json to_json() const {
        TrajectoryConfig c = config(0.0);
        return {{"qubits", qubits},   {"boundary", boundary},  {"trajectories", trajectories},
                {"steps", c.steps},   {"burn_in", c.burn_in},  {"observe_every", c.cadence()},
                {"initial", initial}, {"convention", convention}, {"threads", threads}};
    }
};

// ---------------------------------------------------------------- mix-time

struct MixTimeFlags {
    std::vector<size_t> qubits{60, 80, 100, 120, 140, 160, 180, 200};
    double eta = 0.95;
    size_t string_len = 28;
    size_t samples = 1000;
    uint64_t seed = 1;
    unsigned threads = 0;
    uint64_t max_steps = 100000000;
    std::string boundary = "obc";
};

void cmd_mix_time(RunContext &ctx, const MixTimeFlags &f) {
    if (f.string_len % 2) {
        throw UsageError("--string-len must be even so both endpoints are odd sites");
    }
    ctx.manifest.seed = f.seed;
    ctx.manifest.parameters = {{"qubits", f.qubits},       {"eta", f.eta},         {"string_len", f.string_len},
                               {"samples", f.samples},     {"max_steps", f.max_steps}, {"boundary", f.boundary},
                               {"threads", f.threads}};
    io::CsvTable t{{"n_qubits", "boundary", "n", "m", "eta", "t_mix", "mean", "stderr", "n_samples", "seed", "status"},
                   {}};
    std::vector<double> xs, ys;
    std::string first_error;
    for (size_t nq : f.qubits) {
        size_t N = nq / 2;
        if (2 * (N / 2) < 22) {
            throw UsageError("2N = " + std::to_string(nq) + " is too small for n = 2 floor(N/2) - 21");
        }
        size_t n = 2 * (N / 2) - 21, m = n + f.string_len;
        EnsembleConfig e;
        e.traj.n_qubits = nq;
        e.traj.boundary = parse_boundary(f.boundary);
        e.traj.steps = f.max_steps;
        e.traj.seed = f.seed;
        e.trajectories = f.samples;
        e.threads = f.threads;
        std::vector<std::string> row{std::to_string(nq), boundary_name(e.traj.boundary), std::to_string(n),
                                     std::to_string(m),  io::format_double(f.eta)};
        try {
            MixingResult r = mixing_time(e, n, m, f.eta);
            row.insert(row.end(), {std::to_string(r.t), io::format_double(r.mean), io::format_double(r.std_error),
                                   std::to_string(r.samples), std::to_string(f.seed), "ok"});
            xs.push_back((double)N);
            ys.push_back((double)r.t);
        } catch (const SaturationError &e) {
            row.insert(row.end(), {"", io::format_double(e.last_value), "", std::to_string(f.samples),
                                   std::to_string(f.seed), "saturated"});
            if (first_error.empty()) {
                first_error = e.what();
            }
        }
        t.add_row(row);
    }
    ctx.write_csv(t);
    if (xs.size() >= 2) {
        LinearFit fit = loglog_fit(xs, ys);
        io::CsvTable ft{{"slope", "slope_err", "intercept", "r2", "points"}, {}};
        ft.add_row({io::format_double(fit.slope), io::format_double(fit.slope_err), io::format_double(fit.intercept),
                    io::format_double(fit.r2), std::to_string(fit.points)});
        ctx.write_csv(ft, "_fit");
        ctx.manifest.parameters["fitted_slope"] = fit.slope;
    }
    if (!first_error.empty()) {
        throw Error(first_error);
    }
}

// ---------------------------------------------------------------- string-scan

struct StringScanFlags {
    TrajectoryFlags traj;
    std::vector<double> lambdas{0.0};
    std::string kind = "strong";
    size_t n = 1;
    std::vector<size_t> m_list;
};

void cmd_string_scan(RunContext &ctx, const StringScanFlags &f) {
    if (f.m_list.empty()) {
        throw UsageError("--m-list must name at least one endpoint");
    }
    StringKind kind = parse_string_kind(f.kind);
    ctx.manifest.seed = f.traj.seed;
    ctx.manifest.parameters = f.traj.to_json();
    ctx.manifest.parameters.update(
        json{{"lambda_list", f.lambdas}, {"kind", f.kind}, {"n", f.n}, {"m_list", f.m_list}});
    std::vector<EstimateResult> all;
    json fits = json::object();
    for (double l : f.lambdas) {
        EnsembleConfig e{f.traj.config(l), f.traj.trajectories, f.traj.init(), f.traj.threads};
        auto rs = string_curve(e, kind, f.n, f.m_list);
        std::vector<double> x, y;
        for (const auto &r : rs) {
            if (r.mean > 0) {
                x.push_back((double)r.m - (double)r.n);
                y.push_back(std::log(r.mean));
            }
        }
        if (x.size() >= 3) {
            LinearFit fit = linear_fit(x, y);
            fits[io::format_double(l)] = {{"log_slope", fit.slope}, {"r2", fit.r2}, {"points", fit.points}};
        }
        all.insert(all.end(), rs.begin(), rs.end());
    }
    ctx.write_csv(io::estimate_table(all));
    ctx.manifest.parameters["log_linear_fits"] = fits;
}

// ---------------------------------------------------------------- two-copy

struct TwoCopyFlags {
    TrajectoryFlags traj;
    double lambda = 0.0;
    std::vector<std::string> quantities{"purity"};
    size_t n = 0;
    std::vector<size_t> m_list;
    bool force = false;
    size_t jackknife_blocks = 100;
};

void cmd_two_copy(RunContext &ctx, const TwoCopyFlags &f) {
    ctx.manifest.seed = f.traj.seed;
    ctx.manifest.parameters = f.traj.to_json();
    ctx.manifest.parameters.update(json{{"lambda", f.lambda},
                                        {"quantity", f.quantities},
                                        {"n", f.n},
                                        {"m_list", f.m_list},
                                        {"force", f.force},
                                        {"jackknife_blocks", f.jackknife_blocks}});
    std::vector<TwoCopyRequest> reqs;
    for (const auto &q : f.quantities) {
        TwoCopyQuantity tq = parse_two_copy_quantity(q);
        if (tq == TwoCopyQuantity::Purity) {
            reqs.push_back({tq, 0, 0});
            continue;
        }
        if (f.m_list.empty() || f.n == 0) {
            throw UsageError(q + " needs --n and --m-list");
        }
        for (size_t m : f.m_list) {
            reqs.push_back({tq, f.n, m});
        }
    }
    TwoCopyConfig c;
    c.traj = f.traj.config(f.lambda);
    c.trajectories = f.traj.trajectories;
    c.initial = f.traj.init();
    c.threads = f.traj.threads;
    c.force = f.force;
    c.jackknife_blocks = f.jackknife_blocks;
    ctx.write_csv(io::estimate_table(two_copy(c, reqs)));
}

// ---------------------------------------------------------------- ed

struct EdFlags {
    std::string model_config;
    std::string model = "parent";
    size_t qubits = 6;
    std::string boundary;
    double lambda = 0.0;
    double gamma = 0.0;
    std::string sector;
    std::string report = "steady";
    double tol = 1e-8;
    std::vector<std::string> pairs;
};

std::optional<exact::Charges> parse_sector(const std::string &s) {
    if (s.empty()) {
        return std::nullopt;
    }
    auto parts = split_list(s);
    if (parts.size() != 3) {
        throw UsageError("--sector expects three signs, e.g. +,+,-");
    }
    auto sign = [](const std::string &p) {
        if (p == "+" || p == "+1" || p == "1") {
            return 1;
        }
        if (p == "-" || p == "-1") {
            return -1;
        }
        throw UsageError("bad sector sign '" + p + "'");
    };
    return exact::Charges{sign(parts[0]), sign(parts[1]), sign(parts[2])};
}

exact::LindbladModel ed_model(const EdFlags &f) {
    exact::LindbladModel m;
    if (!f.model_config.empty()) {
        m = io::load_model_config(f.model_config).model;
        if (!f.boundary.empty() && parse_boundary(f.boundary) != m.boundary) {
            throw UsageError("--boundary disagrees with the model config");
        }
        return m;
    }
    Boundary b = f.boundary.empty() ? Boundary::PBC : parse_boundary(f.boundary);
    if (f.model == "parent") {
        m = exact::parent_model(f.qubits, b);
    } else if (f.model == "dual") {
        m = exact::dual_model(f.qubits, b);
    } else if (f.model == "lambda") {
        m = exact::lambda_model(f.qubits, b, f.lambda);
    } else if (f.model == "gamma_zz") {
        m = exact::gamma_zz_model(f.qubits, b, f.gamma);
    } else if (f.model == "trace") {
        m = exact::trace_model(f.qubits, b);
    } else {
        throw UsageError("unknown model '" + f.model + "'");
    }
    exact::validate(m);
    return m;
}

/// Every (n, m) with n < m whose parities suit the correlator.
std::vector<std::pair<size_t, size_t>> default_pairs(exact::Correlator q, size_t nq) {
    std::vector<std::pair<size_t, size_t>> out;
    size_t start = exact::correlator_needs_even(q) ? 2 : 1;
    for (size_t n = start; n <= nq; n += 2) {
        for (size_t m = n + 2; m <= nq; m += 2) {
            out.emplace_back(n, m);
        }
    }
    return out;
}

void cmd_ed(RunContext &ctx, const EdFlags &f) {
    exact::LindbladModel model = ed_model(f);
    auto sector = parse_sector(f.sector);
    ctx.manifest.parameters = {{"model_config", f.model_config},
                               {"model", f.model_config.empty() ? f.model : "config"},
                               {"qubits", model.n_qubits},
                               {"boundary", boundary_name(model.boundary)},
                               {"lambda", f.lambda},
                               {"gamma_zz", f.gamma},
                               {"sector", f.sector},
                               {"report", f.report},
                               {"tol", f.tol}};
    exact::Superoperator s = exact::build_superoperator(model);
    auto keep = [&](const exact::Charges &c) { return !sector || c == *sector; };

    if (f.report == "spectrum") {
        json j = json::array();
        for (const auto &[c, ev] : exact::spectrum(s)) {
            if (keep(c)) {
                j.push_back({{"sector", exact::charges_str(c)}, {"re", ev.real()}, {"im", ev.imag()}});
            }
        }
        ctx.write_json(j);
        return;
    }
    exact::SteadySpace sp = exact::steady_space(s, f.tol);
    ctx.manifest.parameters["steady_dimension"] = sp.right.size();
    ctx.manifest.parameters["conserved_dimension"] = sp.left.size();
    if (f.report == "steady" || f.report == "conserved") {
        bool right = f.report == "steady";
        const auto &vecs = right ? sp.right : sp.left;
        const auto &charges = right ? sp.right_charges : sp.left_charges;
        io::CsvTable t{{"index", "s_ket", "s_bra", "w", "trace", "hermitian_residual"}, {}};
        for (size_t i = 0; i < vecs.size(); i++) {
            if (!keep(charges[i])) {
                continue;
            }
            exact::Matrix r = exact::unvectorize(vecs[i]);
            std::complex<double> tr = r.trace();
            // Report the Hermitian part's distance after removing the global phase of the kernel vector.
            Eigen::Index ir, ic;
            r.cwiseAbs().maxCoeff(&ir, &ic);
            std::complex<double> ph = r(ir, ir) != 0.0 ? r(ir, ir) / std::abs(r(ir, ir)) : std::complex<double>(1.0);
            exact::Matrix g = r / ph;
            double herm = (g - g.adjoint()).norm() / std::max(g.norm(), 1e-300);
            t.add_row({std::to_string(i), std::to_string(charges[i].s_ket), std::to_string(charges[i].s_bra),
                       std::to_string(charges[i].w), io::format_double(std::abs(tr)), io::format_double(herm)});
        }
        ctx.write_csv(t);
        return;
    }
    if (f.report != "correlators") {
        throw UsageError("unknown report '" + f.report + "'");
    }
    exact::Matrix rho;
    exact::Charges want = sector.value_or(exact::Charges{1, 1, 1});
    std::vector<size_t> hits;
    for (size_t i = 0; i < sp.right.size(); i++) {
        if (sp.right_charges[i] == want) {
            hits.push_back(i);
        }
    }
    if (hits.size() != 1) {
        throw AmbiguousKernelError("sector " + exact::charges_str(want) + " holds " + std::to_string(hits.size()) +
                                   " steady states; correlators need exactly one");
    }
    rho = exact::steady_density(sp.right[hits[0]]);
    std::vector<std::pair<size_t, size_t>> explicit_pairs;
    for (const auto &p : f.pairs) {
        auto c = p.find(':');
        if (c == std::string::npos) {
            throw UsageError("--pairs expects n:m entries");
        }
        explicit_pairs.emplace_back(std::stoul(p.substr(0, c)), std::stoul(p.substr(c + 1)));
    }
    std::vector<EstimateResult> rows;
    for (exact::Correlator q : exact::all_correlators()) {
        auto pairs = explicit_pairs.empty() ? default_pairs(q, model.n_qubits) : explicit_pairs;
        size_t parity = exact::correlator_needs_even(q) ? 0 : 1;
        for (auto [n, m] : pairs) {
            if (n % 2 != parity || m % 2 != parity) {
                continue;
            }
            double v = exact::correlator(rho, q, n, m, model.boundary);
            rows.push_back({exact::correlator_name(q), model.n_qubits, model.boundary, f.lambda, n, m, 0, v, 0.0, 1, 0});
        }
    }
    ctx.write_csv(io::estimate_table(rows));
}

// ---------------------------------------------------------------- analytic

struct AnalyticFlags {
    std::string quantity = "gap";
    std::string coupling = "lambda";
    std::vector<double> grid{0.0};
    std::vector<size_t> sizes{8, 16, 32, 64, 128, 256};
    std::vector<size_t> lengths{1, 2, 4, 8};
    double lambda = 0.0;
};

void cmd_analytic(RunContext &ctx, const AnalyticFlags &f) {
    using namespace freefermion;
    ctx.manifest.parameters = {{"quantity", f.quantity}, {"coupling", f.coupling}, {"grid", f.grid},
                               {"sizes", f.sizes},       {"lengths", f.lengths},   {"lambda", f.lambda}};
    if (f.quantity == "gap") {
        io::CsvTable t{{"N", "lambda", "gap"}, {}};
        std::vector<double> x, y;
        for (size_t N : f.sizes) {
            for (double l : f.grid) {
                t.add_row({std::to_string(N), io::format_double(l), io::format_double(lindblad_gap(l, N))});
            }
            x.push_back((double)N);
            y.push_back(lindblad_gap(f.grid.front(), N));
        }
        ctx.write_csv(t);
        if (x.size() >= 2) {
            ctx.manifest.parameters["loglog_slope"] = loglog_fit(x, y).slope;
        }
        return;
    }
    if (f.quantity == "collapse") {
        io::CsvTable t{{"u", "N", "C2S"}, {}};
        for (double u : f.grid) {
            for (size_t N : f.sizes) {
                double v = analytic_correlator(AnalyticQuantity::C2S, Coupling::Lambda, u / (2.0 * (double)N), N);
                t.add_row({io::format_double(u), std::to_string(N), io::format_double(v)});
            }
        }
        ctx.write_csv(t);
        ctx.manifest.parameters["spread"] = collapse_spread(f.sizes, f.grid);
        return;
    }
    Coupling c = parse_coupling(f.coupling);
    AnalyticQuantity q = parse_analytic_quantity(f.quantity);
    io::CsvTable t{{"quantity", "coupling", "value", "length", "result"}, {}};
    for (double v : f.grid) {
        if (q == AnalyticQuantity::B2) {
            t.add_row({f.quantity, f.coupling, io::format_double(v), "0",
                       io::format_double(analytic_correlator(q, c, v))});
            continue;
        }
        for (size_t len : f.lengths) {
            t.add_row({f.quantity, f.coupling, io::format_double(v), std::to_string(len),
                       io::format_double(analytic_correlator(q, c, v, len))});
        }
    }
    ctx.write_csv(t);
}

// ---------------------------------------------------------------- rd

struct RdFlags {
    size_t sites = 3;
    std::string boundary = "pbc";
    std::string pert = "adjacent";
    std::vector<std::string> strings;
    double lambda = 1e-3;
    bool ed_check = false;
};

rdpert::PairPerturbation load_pert(const std::string &spec, size_t N, Boundary b) {
    if (spec == "adjacent") {
        return rdpert::PairPerturbation::adjacent_pair(N, b);
    }
    std::ifstream f(spec);
    if (!f) {
        throw UsageError("--pert is neither 'adjacent' nor a readable file: " + spec);
    }
    rdpert::PairPerturbation p;
    std::string line;
    while (std::getline(f, line)) {
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
        if (tok.size() < 2) {
            throw UsageError("perturbation lines are 'site site ... rate'");
        }
        std::vector<size_t> sites;
        for (size_t i = 0; i + 1 < tok.size(); i++) {
            sites.push_back(std::stoul(tok[i]));
        }
        p.rates[sites] = io::parse_double(tok.back());
    }
    return p;
}

void cmd_rd(RunContext &ctx, const RdFlags &f) {
    Boundary b = parse_boundary(f.boundary);
    ctx.manifest.parameters = {{"sites", f.sites}, {"boundary", f.boundary}, {"pert", f.pert},
                               {"string", f.strings}, {"lambda", f.lambda}, {"ed_check", f.ed_check}};
    rdpert::FirstOrder fo = rdpert::first_order_steady(f.sites, b, load_pert(f.pert, f.sites, b));
    std::vector<std::pair<size_t, size_t>> strs;
    for (const auto &s : f.strings) {
        auto c = s.find(':');
        if (c == std::string::npos) {
            throw UsageError("--string expects n:m entries");
        }
        strs.emplace_back(std::stoul(s.substr(0, c)), std::stoul(s.substr(c + 1)));
    }
    if (strs.empty()) {
        for (size_t n = 1; n <= 2 * f.sites; n += 2) {
            for (size_t m = n + 2; m <= 2 * f.sites; m += 2) {
                strs.emplace_back(n, m);
            }
        }
    }
    std::optional<exact::Matrix> plus, minus;
    if (f.ed_check) {
        if (f.pert != "adjacent") {
            throw UsageError("--ed-check supports the adjacent perturbation only");
        }
        size_t n = 2 * f.sites;
        exact::Superoperator l0 = exact::build_superoperator(exact::dual_model(n, b));
        exact::LindbladModel pm{n, b, {}, {}};
        exact::add_family(pm, exact::JumpKind::Lzz, 1.0);
        exact::Superoperator lp = exact::build_superoperator(pm);
        plus = exact::unique_symmetric_steady_state(exact::combine(l0, lp, f.lambda));
        minus = exact::unique_symmetric_steady_state(exact::combine(l0, lp, -f.lambda));
    }
    std::vector<std::string> header{"n", "m", "derivative", "first_order_value", "lambda"};
    if (f.ed_check) {
        header.push_back("ed_central_difference");
    }
    io::CsvTable t{header, {}};
    for (auto [n, m] : strs) {
        std::vector<std::string> row{std::to_string(n), std::to_string(m),
                                     io::format_double(rdpert::string_derivative(fo, n, m)),
                                     io::format_double(rdpert::string_first_order(fo.coefficients(f.lambda), fo.index, n, m)),
                                     io::format_double(f.lambda)};
        if (f.ed_check) {
            auto c = [&](const exact::Matrix &r) {
                return exact::correlator(r, exact::Correlator::TrivialC_I_S, n, m, b);
            };
            row.push_back(io::format_double((c(*plus) - c(*minus)) / (2 * f.lambda)));
        }
        t.add_row(row);
    }
    ctx.write_csv(t);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Decohered cluster state toolkit: Clifford channel estimators, exact solver, closed forms"};
    app.require_subcommand(1);
    app.fallthrough();
    OutputOptions out;
    const char *env = std::getenv("DCS_OUTPUT_DIR");
    out.dir = env && *env ? env : ".";
    app.add_option("--out-dir", out.dir, "Output directory (default $DCS_OUTPUT_DIR or .)");
    app.add_option("--name", out.name, "Output base name (default: the subcommand)");

    std::function<int()> action;

    MixTimeFlags mt;
    auto *mix = app.add_subcommand("mix-time", "Mixing time of the strong string across a size sweep");
    mix->add_option("--qubits", mt.qubits, "Chain lengths 2N")->delimiter(',');
    mix->add_option("--eta", mt.eta, "Threshold on C_I_S");
    mix->add_option("--string-len", mt.string_len, "m - n");
    mix->add_option("--samples", mt.samples, "Trajectories per size");
    mix->add_option("--seed", mt.seed, "Base seed");
    mix->add_option("--threads", mt.threads, "Worker threads (0 = hardware)");
    mix->add_option("--max-steps", mt.max_steps, "Give up after this many elementary steps");
    mix->add_option("--boundary", mt.boundary, "pbc or obc")->check(CLI::IsMember({"pbc", "obc", "PBC", "OBC"}));
    mix->callback([&] { action = [&] { return run("mix-time", out, [&](RunContext &c) { cmd_mix_time(c, mt); }); }; });

    StringScanFlags ss;
    auto *scan = app.add_subcommand("string-scan", "Steady-regime Renyi-1 string curves per lambda");
    ss.traj.add(scan);
    scan->add_option("--lambda-list", ss.lambdas, "Interpolation weights")->delimiter(',');
    scan->add_option("--kind", ss.kind, "strong, weak, trivial_strong, trivial_weak");
    scan->add_option("--n", ss.n, "Left endpoint");
    scan->add_option("--m-list", ss.m_list, "Right endpoints")->delimiter(',')->required();
    scan->callback(
        [&] { action = [&] { return run("string-scan", out, [&](RunContext &c) { cmd_string_scan(c, ss); }); }; });

    TwoCopyFlags tc;
    auto *two = app.add_subcommand("two-copy", "Renyi-2 estimators from pairs of independent trajectories");
    tc.traj.add(two);
    two->add_option("--lambda", tc.lambda, "Interpolation weight");
    two->add_option("--quantity", tc.quantities, "purity, A_II, B_II, C_II_S, C_II_W, trivial_C_II_S, trivial_C_II_W")
        ->delimiter(',');
    two->add_option("--n", tc.n, "Left endpoint");
    two->add_option("--m-list", tc.m_list, "Right endpoints")->delimiter(',');
    two->add_flag("--force", tc.force, "Run even when 2^N exceeds the sample-budget guard");
    two->add_option("--jackknife-blocks", tc.jackknife_blocks, "Blocks for the jackknife error");
    two->callback([&] { action = [&] { return run("two-copy", out, [&](RunContext &c) { cmd_two_copy(c, tc); }); }; });

    EdFlags ed;
    auto *edc = app.add_subcommand("ed", "Exact steady states, conserved operators, correlators and spectra");
    edc->add_option("--model-config", ed.model_config, "Flat model file; overrides --model");
    edc->add_option("--model", ed.model, "parent, dual, lambda, gamma_zz or trace");
    edc->add_option("--qubits", ed.qubits, "Chain length 2N");
    edc->add_option("--boundary", ed.boundary, "pbc or obc")->check(CLI::IsMember({"pbc", "obc", "PBC", "OBC"}));
    edc->add_option("--lambda", ed.lambda, "Interpolation weight for --model lambda");
    edc->add_option("--gamma-zz", ed.gamma, "Lzz rate for --model gamma_zz");
    edc->add_option("--sector", ed.sector, "Charges s_ket,s_bra,w as signs, e.g. +,+,+");
    edc->add_option("--report", ed.report, "What to compute")->check(CLI::IsMember({"steady", "conserved", "correlators", "spectrum"}));
    edc->add_option("--tol", ed.tol, "Kernel tolerance on singular values");
    edc->add_option("--pairs", ed.pairs, "Endpoint pairs n:m for correlators")->delimiter(',');
    edc->callback([&] { action = [&] { return run("ed", out, [&](RunContext &c) { cmd_ed(c, ed); }); }; });

    AnalyticFlags an;
    auto *ana = app.add_subcommand("analytic", "Free-fermion closed forms on a grid");
    ana->add_option("--quantity", an.quantity, "gap, C2S, B2 or collapse");
    ana->add_option("--coupling", an.coupling, "lambda or gamma_zz");
    ana->add_option("--grid", an.grid, "Coupling values (lambda for gap, u for collapse)")->delimiter(',');
    ana->add_option("--sizes", an.sizes, "Chain sizes N")->delimiter(',');
    ana->add_option("--lengths", an.lengths, "String lengths in enclosed even sites")->delimiter(',');
    ana->callback([&] { action = [&] { return run("analytic", out, [&](RunContext &c) { cmd_analytic(c, an); }); }; });

    RdFlags rd;
    auto *rdc = app.add_subcommand("rd", "First-order reaction-diffusion string order");
    rdc->add_option("--sites", rd.sites, "Number of even sites N");
    rdc->add_option("--boundary", rd.boundary, "pbc or obc")->check(CLI::IsMember({"pbc", "obc", "PBC", "OBC"}));
    rdc->add_option("--pert", rd.pert, "'adjacent' or a file of 'i j rate' lines");
    rdc->add_option("--string", rd.strings, "Odd endpoint pairs n:m")->delimiter(',');
    rdc->add_option("--lambda", rd.lambda, "Coupling for the first-order value and the ED difference");
    rdc->add_flag("--ed-check", rd.ed_check, "Add the ED central difference (2N <= 6)");
    rdc->callback([&] { action = [&] { return run("rd", out, [&](RunContext &c) { cmd_rd(c, rd); }); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    std::string sub = app.get_subcommands().front()->get_name();
    if (out.name.empty()) {
        out.name = sub;
    }
    return action();
}
