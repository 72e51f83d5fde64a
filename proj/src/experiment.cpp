#include "bsde/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

#include <json.hpp>

#include "bsde/assumption_checks.hpp"
#include "bsde/estimates.hpp"
#include "bsde/fixtures.hpp"
#include "bsde/solver.hpp"
#include "bsde/version.hpp"

namespace bsde {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing and normalization
// ---------------------------------------------------------------------------

std::vector<std::string> known_checks() {
    return {"assumptions", "envelope", "residual", "power_expansion", "apriori"};
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "fixture",       "horizon",          "scheme",
        "steps",         "paths",            "seed",
        "workers",       "degree",           "picard_tol",
        "picard_max_iters", "picard_min_iters", "contraction_threshold",
        "init_z",        "p",                "beta",
        "levels",        "checks",           "residual_tol",
        "violation_cap", "constant_cap",     "out_dir"};
    return keys;
}

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

double require_number(const json& v, const std::string& key) {
    if (!v.is_number()) bad("'" + key + "' must be a number");
    return v.get<double>();
}

int require_int(const json& v, const std::string& key, long lo, long hi) {
    if (!v.is_number_integer()) bad("'" + key + "' must be an integer");
    long n = v.get<long>();
    if (n < lo || n > hi)
        bad("'" + key + "' out of range [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "]");
    return static_cast<int>(n);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("config must be a JSON object");

    for (const auto& item : j.items())
        if (!known_keys().count(item.key())) bad("unknown config key '" + item.key() + "'");

    ExperimentConfig cfg;
    if (!j.contains("fixture") || !j["fixture"].is_string())
        bad("config needs a 'fixture' string");
    cfg.fixture = j["fixture"].get<std::string>();
    auto names = fixture_names();
    if (std::find(names.begin(), names.end(), cfg.fixture) == names.end())
        bad("unknown fixture '" + cfg.fixture + "'");

    if (j.contains("horizon") && !j["horizon"].is_null()) {
        const json& h = j["horizon"];
        if (h.is_string()) {
            if (h.get<std::string>() != "inf")
                bad("'horizon' must be a positive number or \"inf\"");
            cfg.horizon_set = true;
            cfg.horizon_infinite = true;
        } else {
            double T = require_number(h, "horizon");
            if (!(T > 0.0)) bad("'horizon' must be positive");
            cfg.horizon_set = true;
            cfg.horizon = T;
        }
    }
    if (j.contains("scheme")) {
        if (!j["scheme"].is_string()) bad("'scheme' must be a string");
        cfg.scheme = j["scheme"].get<std::string>();
        if (cfg.scheme != "default" && cfg.scheme != "uniform" && cfg.scheme != "mapped")
            bad("'scheme' must be default, uniform, or mapped");
    }
    if (j.contains("steps")) cfg.steps = require_int(j["steps"], "steps", 2, 1 << 20);
    if (j.contains("paths")) cfg.paths = require_int(j["paths"], "paths", 8, 1 << 24);
    if (j.contains("seed")) {
        if (j["seed"].is_number_unsigned()) {
            cfg.seed = j["seed"].get<std::uint64_t>();
        } else if (j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0) {
            cfg.seed = static_cast<std::uint64_t>(j["seed"].get<long long>());
        } else {
            bad("'seed' must be a nonnegative integer");
        }
    }
    if (j.contains("workers")) cfg.workers = require_int(j["workers"], "workers", 1, 256);
    if (j.contains("degree")) cfg.degree = require_int(j["degree"], "degree", 0, 10);

    if (j.contains("picard_tol")) {
        cfg.picard_tol = require_number(j["picard_tol"], "picard_tol");
        if (!(cfg.picard_tol > 0.0)) bad("'picard_tol' must be positive");
    }
    if (j.contains("picard_max_iters"))
        cfg.picard_max_iters = require_int(j["picard_max_iters"], "picard_max_iters", 1, 10000);
    if (j.contains("picard_min_iters"))
        cfg.picard_min_iters = require_int(j["picard_min_iters"], "picard_min_iters", 0, 10000);
    if (cfg.picard_min_iters > cfg.picard_max_iters)
        bad("'picard_min_iters' exceeds 'picard_max_iters'");
    if (j.contains("contraction_threshold")) {
        cfg.contraction_threshold =
            require_number(j["contraction_threshold"], "contraction_threshold");
        if (!(cfg.contraction_threshold > 0.0)) bad("'contraction_threshold' must be positive");
    }
    if (j.contains("init_z")) {
        cfg.init_z = require_number(j["init_z"], "init_z");
        if (!std::isfinite(cfg.init_z)) bad("'init_z' must be finite");
    }

    if (j.contains("p")) {
        cfg.p = require_number(j["p"], "p");
        if (!(cfg.p >= 1.0)) bad("'p' must be at least 1");
    }
    if (j.contains("beta") && !j["beta"].is_null()) {
        cfg.beta = require_number(j["beta"], "beta");
        if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) bad("'beta' must lie in (0, 1)");
        cfg.beta_set = true;
    }
    if (j.contains("levels")) {
        if (!j["levels"].is_array() || j["levels"].empty())
            bad("'levels' must be a nonempty array");
        cfg.levels.clear();
        for (const json& v : j["levels"]) {
            double lv = require_number(v, "levels");
            if (!(lv > 0.0)) bad("'levels' entries must be positive");
            if (!cfg.levels.empty() && lv <= cfg.levels.back())
                bad("'levels' must be strictly increasing");
            cfg.levels.push_back(lv);
        }
    }
    if (j.contains("checks")) {
        if (!j["checks"].is_array()) bad("'checks' must be an array");
        cfg.checks.clear();
        auto known = known_checks();
        for (const json& v : j["checks"]) {
            if (!v.is_string()) bad("'checks' entries must be strings");
            std::string name = v.get<std::string>();
            if (std::find(known.begin(), known.end(), name) == known.end())
                bad("unknown check '" + name + "'");
            if (std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end())
                bad("duplicate check '" + name + "'");
            cfg.checks.push_back(name);
        }
    }
    if (j.contains("residual_tol")) {
        cfg.residual_tol = require_number(j["residual_tol"], "residual_tol");
        if (!(cfg.residual_tol > 0.0)) bad("'residual_tol' must be positive");
    }
    if (j.contains("violation_cap")) {
        cfg.violation_cap = require_number(j["violation_cap"], "violation_cap");
        if (!(cfg.violation_cap > 0.0 && cfg.violation_cap <= 1.0))
            bad("'violation_cap' must lie in (0, 1]");
    }
    if (j.contains("constant_cap")) {
        cfg.constant_cap = require_number(j["constant_cap"], "constant_cap");
        if (!(cfg.constant_cap > 0.0)) bad("'constant_cap' must be positive");
    }
    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) bad("'out_dir' must be a string");
        cfg.out_dir = j["out_dir"].get<std::string>();
    }

    bool wants_apriori =
        std::find(cfg.checks.begin(), cfg.checks.end(), "apriori") != cfg.checks.end();
    if (wants_apriori && !(cfg.p > 1.0)) bad("the apriori checks need p > 1");
    bool needs_envelope =
        wants_apriori ||
        std::find(cfg.checks.begin(), cfg.checks.end(), "envelope") != cfg.checks.end();
    if (needs_envelope) {
        try {
            fixture_assumption_a(cfg.fixture);
        } catch (const std::invalid_argument& e) {
            bad(e.what());
        }
    }
    return cfg;
}

static json normalized(const ExperimentConfig& cfg) {
    json j;
    j["fixture"] = cfg.fixture;
    if (!cfg.horizon_set)
        j["horizon"] = nullptr;
    else if (cfg.horizon_infinite)
        j["horizon"] = "inf";
    else
        j["horizon"] = cfg.horizon;
    j["scheme"] = cfg.scheme;
    j["steps"] = cfg.steps;
    j["paths"] = cfg.paths;
    j["seed"] = cfg.seed;
    j["degree"] = cfg.degree;
    j["picard_tol"] = cfg.picard_tol;
    j["picard_max_iters"] = cfg.picard_max_iters;
    j["picard_min_iters"] = cfg.picard_min_iters;
    j["contraction_threshold"] = cfg.contraction_threshold;
    j["init_z"] = cfg.init_z;
    j["p"] = cfg.p;
    j["beta"] = cfg.beta_set ? json(cfg.beta) : json(nullptr);
    j["levels"] = cfg.levels;
    j["checks"] = cfg.checks;
    j["residual_tol"] = cfg.residual_tol;
    j["violation_cap"] = cfg.violation_cap;
    j["constant_cap"] = cfg.constant_cap;
    return j;
}

std::string normalized_json(const ExperimentConfig& cfg) {
    return normalized(cfg).dump(2) + "\n";
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
    std::string text = normalized_json(cfg);
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Run pipeline
// ---------------------------------------------------------------------------

namespace {

struct EstimateRow {
    std::string check;
    double p, r, t, lhs, rhs, ratio, fitted;
    bool pass;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json assumption_json(const AssumptionReport& rep, int steps) {
    json rows = json::array();
    for (const CheckResult& c : rep.checks)
        rows.push_back({{"assumption", c.assumption},
                        {"claimed", c.claimed},
                        {"pass", c.pass},
                        {"samples", c.samples},
                        {"worst_margin", c.worst_margin},
                        {"witness", c.witness}});
    return json{{"generator", rep.generator},
                {"grid_steps", steps},
                {"rows", rows},
                {"all_claimed_hold", rep.all_claimed_hold()}};
}

const char* kind_name(BoundKind k) {
    switch (k) {
        case BoundKind::ControlEnergy: return "z_energy";
        case BoundKind::StateSup: return "y_sup";
        default: return "apriori";
    }
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    Fixture fx = fixture(cfg.fixture);
    const Generator& g = fx.generator;

    Horizon hz = fx.default_horizon;
    if (cfg.horizon_set)
        hz = cfg.horizon_infinite ? Horizon::unbounded() : Horizon::finite(cfg.horizon);
    GridScheme sch = fx.default_scheme;
    if (cfg.scheme == "uniform") sch = GridScheme::Uniform;
    if (cfg.scheme == "mapped") sch = GridScheme::MappedExponential;
    if (hz.infinite && sch == GridScheme::Uniform)
        throw ConfigError("an unbounded horizon needs the mapped scheme");

    TimeGrid grid = build_grid(hz, cfg.steps, sch, &g.coeffs);
    int N = grid.steps();
    BrownianEnsemble ens = sample_brownian(grid, g.dims.d, cfg.paths, cfg.seed, cfg.workers);
    RegressionEngine reg(ens, cfg.degree);
    Mat xi = terminal_values(fx.terminal, ens);

    PicardConfig pc;
    pc.tol = cfg.picard_tol;
    pc.max_iters = cfg.picard_max_iters;
    pc.min_iters = cfg.picard_min_iters;
    pc.contraction_threshold = cfg.contraction_threshold;
    pc.init_z = cfg.init_z;

    // --- solve ---------------------------------------------------------
    BackwardSolution sol;
    std::string run_file;
    json run_json;
    std::vector<std::pair<std::string, bool>> checks;
    if (cfg.beta_set) {
        LadderConfig lc;
        lc.picard = pc;
        lc.levels = cfg.levels;
        lc.beta = cfg.beta;
        LadderReport lr;
        try {
            lr = solve_l1(g, xi, ens, reg, lc);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        sol = std::move(lr.sol);
        run_file = "ladder.json";
        run_json = json{{"beta", lr.beta},
                        {"levels", lr.levels},
                        {"beta_distances", lr.beta_distances},
                        {"classd_distances", lr.classd_distances}};
        bool finite = true;
        for (double d : lr.beta_distances) finite = finite && std::isfinite(d);
        for (double d : lr.classd_distances) finite = finite && std::isfinite(d);
        checks.emplace_back("ladder_finite", finite);
    } else {
        PicardResult pr = picard_solve(g, xi, ens, reg, pc);
        sol = std::move(pr.sol);
        run_file = "picard.json";
        json intervals = json::array();
        bool conv = true;
        for (const IntervalReport& ir : pr.intervals) {
            conv = conv && ir.converged;
            intervals.push_back({{"lo", ir.lo},
                                 {"hi", ir.hi},
                                 {"iterations", ir.iterations},
                                 {"converged", ir.converged},
                                 {"distances", ir.distances},
                                 {"ratios", ir.ratios}});
        }
        run_json = json{{"breakpoints", pr.breakpoints}, {"intervals", intervals}};
        checks.emplace_back("converged", conv);
    }

    // --- requested checks (all computed before any file is written) -----
    std::vector<EstimateRow> rows;
    json assumptions;
    bool have_assumptions = false;
    for (const std::string& name : cfg.checks) {
        if (name == "assumptions") {
            SamplerConfig scfg;
            scfg.seed = cfg.seed;
            scfg.samples = 1024;
            scfg.context_paths = 16;
            AssumptionReport rep = report_assumptions(g, grid, scfg);
            assumptions = assumption_json(rep, N);
            have_assumptions = true;
            checks.emplace_back("assumptions", rep.all_claimed_hold());
        } else if (name == "envelope") {
            SamplerConfig scfg;
            scfg.seed = cfg.seed;
            scfg.samples = 1024;
            scfg.context_paths = 16;
            CheckResult res = check_assumption_a(g, fixture_assumption_a(cfg.fixture),
                                                 grid, scfg);
            rows.push_back({"envelope", cfg.p, 0.0, grid.horizon(), res.worst_margin,
                            0.0, res.worst_margin, res.worst_margin, res.pass});
            checks.emplace_back("envelope", res.pass);
        } else if (name == "residual") {
            ResidualReport rr = residual_check(g, sol, ens);
            bool pass = rr.max_value <= cfg.residual_tol;
            for (std::size_t i = 0; i < rr.nodes.size(); ++i)
                rows.push_back({"residual", cfg.p, grid.node(rr.nodes[i]),
                                grid.node(rr.nodes[i]), rr.values[i], cfg.residual_tol,
                                rr.values[i] / cfg.residual_tol, rr.max_value,
                                rr.values[i] <= cfg.residual_tol});
            checks.emplace_back("residual", pass);
        } else if (name == "power_expansion") {
            PthPowerReport rep = check_pth_power_inequality(g, sol, ens, cfg.p, {},
                                                            -1.0, cfg.degree);
            bool pass = rep.max_violation_rate <= cfg.violation_cap;
            for (std::size_t i = 0; i < rep.r_nodes.size(); ++i)
                rows.push_back({"power_expansion", cfg.p, grid.node(rep.r_nodes[i]),
                                grid.horizon(), rep.violation_rates[i], cfg.violation_cap,
                                rep.violation_rates[i] / cfg.violation_cap,
                                rep.max_violation_rate,
                                rep.violation_rates[i] <= cfg.violation_cap});
            checks.emplace_back("power_expansion", pass);
        } else if (name == "apriori") {
            AssumptionA env = fixture_assumption_a(cfg.fixture);
            WeightedBoundConfig wcfg;
            wcfg.p = cfg.p;
            wcfg.degree = cfg.degree;
            bool pass = true;
            for (auto* fn :
                 {&check_z_energy_bound, &check_y_sup_bound, &check_apriori_bound}) {
                WeightedBoundReport rep = (*fn)(env, sol, ens, wcfg);
                for (std::size_t i = 0; i < rep.fitted.size(); ++i) {
                    bool ok = std::isfinite(rep.fitted[i]) &&
                              rep.fitted[i] <= cfg.constant_cap;
                    pass = pass && ok;
                    rows.push_back({kind_name(rep.kind), cfg.p,
                                    grid.node(rep.pair_r[i]), grid.node(rep.pair_b[i]),
                                    rep.lhs_at_max[i], rep.rhs_at_max[i], rep.fitted[i],
                                    rep.fitted_constant, ok});
                }
            }
            checks.emplace_back("apriori", pass);
        }
    }

    // --- solution summary ------------------------------------------------
    // mean_y is the signed path mean for scalar states and the path mean of
    // |y| for systems; the control column is always the path mean of |z|.
    std::string csv = "t,mean_y,std_y,mean_abs_z\n";
    double y0_mean = 0.0;
    int M = ens.paths();
    for (int i = 0; i <= N; ++i) {
        Eigen::VectorXd stat(M);
        if (g.dims.k == 1)
            stat = sol.y.step(i).row(0).transpose();
        else
            stat = sol.y.step(i).colwise().norm().transpose();
        double mean = stat.mean();
        double sd = std::sqrt((stat.array() - mean).square().sum() / M);
        double zmean = std::numeric_limits<double>::quiet_NaN();
        if (i < N) {
            zmean = 0.0;
            for (int m = 0; m < M; ++m) zmean += sol.z.step(i).col(m).norm();
            zmean /= M;
        }
        if (i == 0) y0_mean = mean;
        csv += fmt(grid.node(i)) + "," + fmt(mean) + "," + fmt(sd) + "," + fmt(zmean) + "\n";
    }

    std::string est_csv = "check,p,r,t,lhs,rhs,ratio,fitted_constant,pass\n";
    for (const EstimateRow& row : rows)
        est_csv += row.check + "," + fmt(row.p) + "," + fmt(row.r) + "," + fmt(row.t) +
                   "," + fmt(row.lhs) + "," + fmt(row.rhs) + "," + fmt(row.ratio) + "," +
                   fmt(row.fitted) + "," + (row.pass ? "1" : "0") + "\n";

    // --- write artifacts --------------------------------------------------
    std::filesystem::path dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
    std::filesystem::create_directories(dir);
    RunArtifacts art;
    std::vector<std::string> basenames;
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        art.files.push_back((dir / name).string());
        basenames.push_back(name);
    };
    emit("solution.csv", csv);
    emit(run_file, run_json.dump(2) + "\n");
    if (!rows.empty()) emit("estimates.csv", est_csv);
    if (have_assumptions) emit("assumptions.json", assumptions.dump(2) + "\n");

    bool all_pass = true;
    json checks_json = json::array();
    for (const auto& [name, ok] : checks) {
        all_pass = all_pass && ok;
        checks_json.push_back({{"name", name}, {"pass", ok}});
    }
    json manifest{{"fixture", cfg.fixture},
                  {"seed", cfg.seed},
                  {"git_revision", git_revision},
                  {"config_hash", config_hash_hex(cfg)},
                  {"config", normalized(cfg)},
                  {"files", basenames},
                  {"checks", checks_json},
                  {"all_pass", all_pass}};
    emit("manifest.json", manifest.dump(2) + "\n");

    art.exit_code = all_pass ? 0 : 1;
    art.checks = std::move(checks);
    art.y0_mean = y0_mean;
    return art;
}

// ---------------------------------------------------------------------------
// Assumption report subcommand
// ---------------------------------------------------------------------------

int write_assumption_report(const std::string& name, const std::string& out_dir,
                            std::ostream& table, std::uint64_t seed) {
    Fixture fx;
    try {
        fx = fixture(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    TimeGrid grid = build_grid(fx.default_horizon, 16, fx.default_scheme,
                               &fx.generator.coeffs);
    SamplerConfig scfg;
    scfg.seed = seed;
    AssumptionReport rep = report_assumptions(fx.generator, grid, scfg);

    table << std::left << std::setw(28) << "assumption" << std::setw(9) << "claimed"
          << std::setw(7) << "pass" << std::setw(14) << "margin"
          << "witness\n";
    for (const CheckResult& c : rep.checks) {
        std::string status = c.claimed ? (c.pass ? "pass" : "FAIL") : "-";
        table << std::left << std::setw(28) << c.assumption << std::setw(9)
              << (c.claimed ? "yes" : "no") << std::setw(7) << status << std::setw(14)
              << fmt_short(c.worst_margin) << c.witness << "\n";
    }
    table << (rep.all_claimed_hold() ? "all claimed properties hold\n"
                                     : "some claimed property FAILED\n");

    std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    write_text(dir / "assumptions.json", assumption_json(rep, grid.steps()).dump(2) + "\n");
    return rep.all_claimed_hold() ? 0 : 1;
}

}  // namespace bsde
