// Command-line front end: loads a JSON config, runs the named experiment, and
// writes deterministic CSV artifacts. Exit codes: 0 pass, 1 error, 2 fail,
// 3 inconclusive.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chainsde/csv.hpp"
#include "chainsde/experiments.hpp"
#include "chainsde/proxy_density.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace chainsde;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- strict schema helpers -------------------------------------------------

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("config: '" + path + "' must be an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("config: unknown key '" + path + "." + item.key() + "'");
}

const json* find(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double need_num(const json& obj, const std::string& path, const std::string& key) {
    const json* v = find(obj, key);
    if (!v) throw ConfigError("config: missing required field '" + path + "." + key + "'");
    if (!v->is_number()) throw ConfigError("config: '" + path + "." + key + "' must be a number");
    return v->get<double>();
}

double get_num(const json& obj, const std::string& path, const std::string& key, double def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError("config: '" + path + "." + key + "' must be a number");
    return v->get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key, int def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_number_integer())
        throw ConfigError("config: '" + path + "." + key + "' must be an integer");
    return v->get<int>();
}

std::string get_str(const json& obj, const std::string& path, const std::string& key,
                    const std::string& def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError("config: '" + path + "." + key + "' must be a string");
    return v->get<std::string>();
}

std::vector<double> get_vec(const json& obj, const std::string& path, const std::string& key,
                            std::vector<double> def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError("config: '" + path + "." + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number())
            throw ConfigError("config: '" + path + "." + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

// ---- shared pieces ---------------------------------------------------------

struct RunContext {
    json config;
    fs::path out_dir;
    std::uint64_t seed = 0;
    int workers = 1;
};

LevyNoiseSpec noise_from(const json& obj, const std::string& path) {
    reject_unknown(obj, path,
                   {"alpha", "dimension", "family", "r0", "layered_beta", "tempering_rate",
                    "q_sup", "small_jump_policy"});
    LevyNoiseSpec spec;
    spec.alpha = need_num(obj, path, "alpha");
    spec.dimension = get_int(obj, path, "dimension", 1);
    const std::string family = get_str(obj, path, "family", "stable");
    const std::map<std::string, QFamily> families = {
        {"stable", QFamily::Stable},         {"truncated", QFamily::Truncated},
        {"layered", QFamily::Layered},       {"tempered", QFamily::Tempered},
        {"relativistic", QFamily::Relativistic}};
    const auto fit = families.find(family);
    if (fit == families.end())
        throw ConfigError("config: '" + path + ".family' must be one of stable, truncated, "
                          "layered, tempered, relativistic");
    spec.q_family = fit->second;
    spec.r0 = get_num(obj, path, "r0", spec.r0);
    spec.layered_beta = get_num(obj, path, "layered_beta", spec.layered_beta);
    spec.tempering_rate = get_num(obj, path, "tempering_rate", spec.tempering_rate);
    spec.q_sup = get_num(obj, path, "q_sup", spec.q_sup);
    const std::string policy = get_str(obj, path, "small_jump_policy", "gaussian");
    if (policy == "drop")
        spec.small_jump_policy = SmallJumpPolicy::Drop;
    else if (policy == "gaussian")
        spec.small_jump_policy = SmallJumpPolicy::GaussianMatch;
    else
        throw ConfigError("config: '" + path + ".small_jump_policy' must be drop or gaussian");
    spec.validate();
    return spec;
}

ChainModel flat_model(int levels, double alpha) {
    LevyNoiseSpec noise;
    noise.alpha = alpha;
    noise.dimension = 1;
    noise.small_jump_policy = SmallJumpPolicy::GaussianMatch;
    std::vector<int> dims(levels, 1);
    return ChainModel::noise_only({levels, dims}, noise);
}

void write_summary(const fs::path& dir, const std::map<std::string, std::string>& entries) {
    csv::Table table({"key", "value"});
    for (const auto& [k, v] : entries) table.add_row(std::vector<std::string>{k, v});
    table.write(dir / "summary.csv");
}

int status_exit(ExperimentStatus status) {
    switch (status) {
        case ExperimentStatus::Pass: return 0;
        case ExperimentStatus::Fail: return 2;
        default: return 3;
    }
}

std::map<std::string, std::string> report_entries(const ExperimentReport& rep) {
    std::map<std::string, std::string> out;
    out["status"] = rep.status == ExperimentStatus::Pass
                        ? "pass"
                        : (rep.status == ExperimentStatus::Fail ? "fail" : "inconclusive");
    for (const auto& [k, v] : rep.scalars) out[k] = csv::format(v);
    return out;
}

// ---- experiments -----------------------------------------------------------

int run_sample(const RunContext& ctx) {
    const json& root = ctx.config;
    const json* noise_cfg = find(root, "noise");
    if (!noise_cfg) throw ConfigError("config: missing required field '.noise'");
    const LevyNoiseSpec spec = noise_from(*noise_cfg, "noise");
    const int count = get_int(root, "", "count", 10000);
    const double dt = get_num(root, "", "dt", 1.0);
    const double cutoff = get_num(root, "", "cutoff", 0.05);
    if (count < 1 || !(dt > 0.0)) throw ConfigError("config: count and dt must be positive");

    const QModulatedSampler sampler(spec, cutoff);
    RngStream rng(ctx.seed, 0);
    std::vector<std::string> cols;
    for (int c = 0; c < spec.dimension; ++c) cols.push_back("z" + std::to_string(c + 1));
    csv::Table table(cols);
    for (int k = 0; k < count; ++k) {
        const Eigen::VectorXd z = sampler.sample(dt, rng);
        table.add_row(std::vector<double>(z.data(), z.data() + z.size()));
    }
    table.write(ctx.out_dir / "samples.csv");
    write_summary(ctx.out_dir, {{"status", "pass"}, {"count", std::to_string(count)}});
    return 0;
}

SimulationPlan plan_from(const json& obj, const std::string& path, const RunContext& ctx) {
    reject_unknown(obj, path,
                   {"levels", "alpha", "beta", "perturb_level", "through_level", "paths",
                    "horizon", "dt", "cutoff"});
    const int levels = get_int(obj, path, "levels", 2);
    const double alpha = need_num(obj, path, "alpha");
    SimulationPlan plan;
    plan.model = flat_model(levels, alpha);
    if (find(obj, "beta")) {
        const double beta = need_num(obj, path, "beta");
        const int i = get_int(obj, path, "perturb_level", levels);
        const int j = get_int(obj, path, "through_level", levels);
        if (i < 2 || j < i || j > levels)
            throw ConfigError("config: need 2 <= perturb_level <= through_level <= levels");
        const int i0 = i - 1, j0 = j - 1;
        plan.model.drift.components[i0] = [j0, beta](double, const Eigen::VectorXd& x) {
            Eigen::VectorXd v(1);
            const double s = x[j0] > 0 ? 1.0 : (x[j0] < 0 ? -1.0 : 0.0);
            v[0] = s * std::pow(std::abs(x[j0]), beta);
            return v;
        };
        plan.model.drift.depends[i0] = {j0};
        plan.model.drift.holder[i0] = beta;
    }
    plan.x0 = Eigen::VectorXd::Zero(plan.model.shape.total());
    plan.paths = get_int(obj, path, "paths", 1000);
    plan.horizon = get_num(obj, path, "horizon", 1.0);
    plan.dt = get_num(obj, path, "dt", 1e-3);
    plan.cutoff = get_num(obj, path, "cutoff", 0.05);
    plan.master_seed = ctx.seed;
    plan.validate();
    return plan;
}

int run_simulate(const RunContext& ctx) {
    const json* model_cfg = find(ctx.config, "model");
    if (!model_cfg) throw ConfigError("config: missing required field '.model'");
    const SimulationPlan plan = plan_from(*model_cfg, "model", ctx);
    const int N = plan.model.shape.total();
    std::vector<std::string> cols;
    for (int c = 0; c < N; ++c) cols.push_back("x" + std::to_string(c + 1));
    std::vector<std::vector<double>> terminal(plan.paths);
    simulate_chain_stream(
        plan,
        [&](int pid, const std::vector<double>&, const std::vector<Eigen::VectorXd>& states) {
            const Eigen::VectorXd& v = states.back();
            terminal[pid].assign(v.data(), v.data() + v.size());
        },
        ctx.workers);
    csv::Table table(cols);
    for (const auto& row : terminal) table.add_row(row);
    table.write(ctx.out_dir / "terminal.csv");
    write_summary(ctx.out_dir, {{"status", "pass"}, {"paths", std::to_string(plan.paths)}});
    return 0;
}

int run_density(const RunContext& ctx) {
    const json* cfg = find(ctx.config, "density");
    if (!cfg) throw ConfigError("config: missing required field '.density'");
    reject_unknown(*cfg, "density", {"levels", "alpha", "gap", "points", "half_width",
                                     "points_per_dim"});
    const int levels = get_int(*cfg, "density", "levels", 1);
    const double alpha = need_num(*cfg, "density", "alpha");
    const double gap = get_num(*cfg, "density", "gap", 1.0);
    const int points = get_int(*cfg, "density", "points", 101);
    const double half_width = get_num(*cfg, "density", "half_width", 5.0);
    const int per_dim = get_int(*cfg, "density", "points_per_dim", 257);
    if (levels < 1 || levels > 3) throw ConfigError("config: density.levels must be 1..3");

    const ChainModel model = flat_model(levels, alpha);
    const Eigen::VectorXd xi = Eigen::VectorXd::Zero(levels);
    const auto fctx = make_frozen_context(model, 0.0, xi, 0.0, gap);
    const ProxyDensity dens(fctx, per_dim);
    const auto sm = scale_matrix(model.shape, alpha, gap);
    const Eigen::VectorXd center = fctx.proxy_shift(xi);
    csv::Table table({"axis", "offset", "value"});
    for (int axis = 0; axis < levels; ++axis)
        for (int k = 0; k < points; ++k) {
            const double u = -half_width + 2.0 * half_width * k / (points - 1);
            Eigen::VectorXd y = center;
            y[axis] += sm.t_diag[axis] * u;
            table.add_row({static_cast<double>(axis + 1), u, dens(xi, y)});
        }
    table.write(ctx.out_dir / "density.csv");
    write_summary(ctx.out_dir,
                  {{"status", "pass"}, {"clipped_mass", csv::format(dens.clipped_mass())}});
    return 0;
}

int run_peano(const RunContext& ctx) {
    const json* cfg = find(ctx.config, "peano");
    if (!cfg) throw ConfigError("config: missing required field '.peano'");
    reject_unknown(*cfg, "peano",
                   {"levels", "i", "j", "alpha", "beta", "margin", "paths", "horizon", "dt",
                    "cutoff", "starts", "rho_grid"});
    PeanoConfig pc;
    pc.levels = get_int(*cfg, "peano", "levels", pc.levels);
    pc.i = get_int(*cfg, "peano", "i", pc.i);
    pc.j = get_int(*cfg, "peano", "j", pc.j);
    pc.alpha = need_num(*cfg, "peano", "alpha");
    pc.beta = need_num(*cfg, "peano", "beta");
    pc.margin = get_num(*cfg, "peano", "margin", pc.margin);
    pc.paths = get_int(*cfg, "peano", "paths", pc.paths);
    pc.horizon = get_num(*cfg, "peano", "horizon", pc.horizon);
    pc.dt = get_num(*cfg, "peano", "dt", pc.dt);
    pc.cutoff = get_num(*cfg, "peano", "cutoff", pc.cutoff);
    pc.starts = get_vec(*cfg, "peano", "starts", pc.starts);
    pc.rho_grid = get_vec(*cfg, "peano", "rho_grid", pc.rho_grid);
    pc.master_seed = ctx.seed;
    pc.workers = ctx.workers;

    const ExperimentReport rep = peano_experiment(pc);
    csv::Table table({"start", "rho", "survival", "wilson_lower"});
    for (double start : pc.starts) {
        const std::string tag = csv::format(start);
        const auto& surv = rep.series.at("survival_start_" + tag);
        const auto& low = rep.series.at("wilson_start_" + tag);
        for (std::size_t r = 0; r < pc.rho_grid.size(); ++r)
            table.add_row({start, pc.rho_grid[r], surv[r], low[r]});
    }
    table.write(ctx.out_dir / "survival.csv");
    write_summary(ctx.out_dir, report_entries(rep));
    return status_exit(rep.status);
}

int run_threshold_sweep(const RunContext& ctx) {
    const json* cfg = find(ctx.config, "sweep");
    std::vector<double> alphas = {1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0};
    int max_i = 6, max_j = 6;
    if (cfg) {
        reject_unknown(*cfg, "sweep", {"alphas", "max_i", "max_j"});
        alphas = get_vec(*cfg, "sweep", "alphas", alphas);
        max_i = get_int(*cfg, "sweep", "max_i", max_i);
        max_j = get_int(*cfg, "sweep", "max_j", max_j);
    }
    csv::Table table({"alpha", "i", "j", "direct", "dual"});
    for (double alpha : alphas)
        for (int i = 2; i <= max_i; ++i)
            for (int j = i; j <= max_j; ++j) {
                const auto f = threshold_forms(alpha, i, j);
                table.add_row({alpha, static_cast<double>(i), static_cast<double>(j), f.direct,
                               f.dual});
            }
    table.write(ctx.out_dir / "thresholds.csv");
    write_summary(ctx.out_dir, {{"status", "pass"},
                                {"rows", std::to_string(table.rows())}});
    return 0;
}

int run_krylov(const RunContext& ctx) {
    const json* cfg = find(ctx.config, "krylov");
    if (!cfg) throw ConfigError("config: missing required field '.krylov'");
    reject_unknown(*cfg, "krylov",
                   {"levels", "block_dim", "alpha", "p", "q", "widths", "paths", "dt", "cutoff"});
    KrylovConfig kc;
    kc.levels = get_int(*cfg, "krylov", "levels", kc.levels);
    kc.block_dim = get_int(*cfg, "krylov", "block_dim", kc.block_dim);
    kc.alpha = need_num(*cfg, "krylov", "alpha");
    kc.p = need_num(*cfg, "krylov", "p");
    kc.q = need_num(*cfg, "krylov", "q");
    kc.widths = get_vec(*cfg, "krylov", "widths", kc.widths);
    kc.paths = get_int(*cfg, "krylov", "paths", kc.paths);
    kc.dt = get_num(*cfg, "krylov", "dt", kc.dt);
    kc.cutoff = get_num(*cfg, "krylov", "cutoff", kc.cutoff);
    kc.master_seed = ctx.seed;
    kc.workers = ctx.workers;

    const ExperimentReport rep = krylov_diagnostic(kc);
    csv::Table table({"width", "ratio", "fitted_constant"});
    const auto& ratios = rep.series.at("ratios");
    const auto& fitted = rep.series.at("fitted_constant");
    for (std::size_t k = 0; k < kc.widths.size(); ++k)
        table.add_row({kc.widths[k], ratios[k], fitted[k]});
    table.write(ctx.out_dir / "krylov.csv");
    write_summary(ctx.out_dir, report_entries(rep));
    return status_exit(rep.status);
}

int run_scaling(const RunContext& ctx) {
    const json* cfg = find(ctx.config, "scaling");
    if (!cfg) throw ConfigError("config: missing required field '.scaling'");
    reject_unknown(*cfg, "scaling",
                   {"levels", "alpha", "gaps", "u_max", "u_points", "points_per_dim"});
    const int levels = get_int(*cfg, "scaling", "levels", 1);
    const double alpha = need_num(*cfg, "scaling", "alpha");
    const std::vector<double> gaps = get_vec(*cfg, "scaling", "gaps", {1.0, 0.3, 0.1});
    const double u_max = get_num(*cfg, "scaling", "u_max", 2.0);
    const int u_points = get_int(*cfg, "scaling", "u_points", 9);
    const int per_dim = get_int(*cfg, "scaling", "points_per_dim", 257);
    if (levels < 1 || levels > 3) throw ConfigError("config: scaling.levels must be 1..3");
    if (u_points < 2) throw ConfigError("config: scaling.u_points must be >= 2");

    const ChainModel model = flat_model(levels, alpha);
    const Eigen::VectorXd xi = Eigen::VectorXd::Zero(levels);
    std::vector<Eigen::VectorXd> probes;
    for (int axis = 0; axis < levels; ++axis)
        for (int k = 0; k < u_points; ++k) {
            Eigen::VectorXd u = Eigen::VectorXd::Zero(levels);
            u[axis] = -u_max + 2.0 * u_max * k / (u_points - 1);
            probes.push_back(u);
        }
    const auto rep = verify_scaling(model, 0.0, xi, 0.0, gaps, probes, per_dim);
    csv::Table table({"gap", "axis", "u", "value"});
    for (std::size_t g = 0; g < gaps.size(); ++g)
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const int axis = static_cast<int>(p) / u_points;
            table.add_row({gaps[g], static_cast<double>(axis + 1),
                           probes[p][axis], rep.profiles[g][p]});
        }
    table.write(ctx.out_dir / "scaling.csv");
    write_summary(ctx.out_dir, {{"status", "pass"},
                                {"max_deviation", csv::format(rep.max_deviation)}});
    return 0;
}

int run_flow_diagnostics(const RunContext& ctx) {
    const json* cfg = find(ctx.config, "flow");
    if (!cfg) throw ConfigError("config: missing required field '.flow'");
    reject_unknown(*cfg, "flow", {"alpha", "beta", "gaps", "grid_steps"});
    const double alpha = need_num(*cfg, "flow", "alpha");
    const double beta = get_num(*cfg, "flow", "beta", 0.5);
    const std::vector<double> gaps = get_vec(*cfg, "flow", "gaps", {1.0, 0.1, 0.01});
    const int grid = get_int(*cfg, "flow", "grid_steps", 2000);
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("config: flow.beta must lie in (0,1]");

    // two-level chain with the sign-power drift at the degenerate level
    DriftSpec drift;
    drift.shape = {2, {1, 1}};
    drift.components.push_back(
        [](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1).eval(); });
    drift.components.push_back([beta](double, const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        const double s = x[1] > 0 ? 1.0 : (x[1] < 0 ? -1.0 : 0.0);
        v[0] = s * std::pow(std::abs(x[1]), beta);
        return v;
    });
    drift.depends = {{}, {1}};
    drift.holder = {1.0, beta};
    const ChainMatrix matrix = ChainMatrix::canonical(drift.shape, 1.0);

    RngStream rng(ctx.seed, 0);
    csv::Table table({"gap", "shift_identity_residual", "corrected_identity_residual",
                      "bilip_lhs", "bilip_rhs", "jacobian_det"});
    double worst_identity = 0.0;
    for (double gap : gaps) {
        const double t = 0.2, s = t + gap;
        Eigen::VectorXd x(2), y(2);
        x << rng.normal(), rng.normal();
        y << rng.normal(), rng.normal();
        // first identification identity: freezing at (t, x) makes the shift
        // coincide with the forward flow
        const FlowSolution flow = solve_flow(drift, matrix, t, x, s, grid);
        const Eigen::VectorXd shift = frozen_shift(drift, matrix, flow, t, s, x, grid);
        const double res1 = (shift - flow.endpoint()).norm();
        // second identity, resolvent-corrected: y - m~^{s,y}(x) = R_{s,t}(theta_{t,s}(y) - x)
        const FlowSolution back = solve_flow(drift, matrix, s, y, t, grid);
        const Eigen::VectorXd shift_y = frozen_shift(drift, matrix, back, t, s, x, grid);
        const Eigen::VectorXd rst = resolvent(matrix, t, s) * (back.endpoint() - x);
        const double res2 = ((y - shift_y) - rst).norm();
        worst_identity = std::max(worst_identity, std::max(res1, res2));

        const auto bilip = approximate_lipschitz_diagnostic(drift, matrix, alpha, t, s, x, y, grid);
        const auto mdrift = mollify_drift(drift, alpha, gap, MollifySchedule::DeterminantLemma);
        const auto jac = flow_jacobian_det(mdrift, matrix, t, s, y, grid);
        table.add_row({gap, res1, res2, bilip.lhs, bilip.rhs, jac.det});
    }
    table.write(ctx.out_dir / "flow.csv");
    write_summary(ctx.out_dir, {{"status", "pass"},
                                {"worst_identity_residual", csv::format(worst_identity)}});
    return 0;
}

// ---- main ------------------------------------------------------------------

const std::map<std::string, int (*)(const RunContext&)> kExperiments = {
    {"sample", run_sample},
    {"simulate", run_simulate},
    {"density", run_density},
    {"peano", run_peano},
    {"threshold-sweep", run_threshold_sweep},
    {"krylov", run_krylov},
    {"scaling", run_scaling},
    {"flow-diagnostics", run_flow_diagnostics},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Degenerate stable-noise chain laboratory"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;

    std::vector<CLI::App*> subs;
    for (const auto& [name, fn] : kExperiments) {
        (void)fn;
        CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
        sub->fallthrough();  // let --config etc. appear after the subcommand
        subs.push_back(sub);
    }
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory for CSV artifacts");
    app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--workers", workers, "worker thread count override");

    CLI11_PARSE(app, argc, argv);

    try {
        RunContext ctx;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file: " + config_path);
            try {
                ctx.config = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config: invalid JSON: ") + e.what());
            }
        } else {
            ctx.config = json::object();
        }

        // experiment name from the subcommand or the config
        std::string experiment = get_str(ctx.config, "", "experiment", "");
        for (const auto* sub : subs)
            if (sub->parsed()) {
                if (!experiment.empty() && experiment != sub->get_name())
                    throw ConfigError("config: experiment '" + experiment +
                                      "' conflicts with subcommand '" + sub->get_name() + "'");
                experiment = sub->get_name();
            }
        if (experiment.empty())
            throw ConfigError("no experiment selected: pass a subcommand or set 'experiment'");
        const auto it = kExperiments.find(experiment);
        if (it == kExperiments.end())
            throw ConfigError("unknown experiment '" + experiment + "'");

        // validate shared top-level keys; experiment sections are validated by
        // their drivers
        reject_unknown(ctx.config, "",
                       {"experiment", "seed", "workers", "out", "noise", "model", "density",
                        "peano", "sweep", "krylov", "scaling", "flow", "count", "dt", "cutoff"});

        ctx.seed = seed_set ? seed
                            : static_cast<std::uint64_t>(get_num(ctx.config, "", "seed", 0.0));
        ctx.workers = workers > 0 ? workers : get_int(ctx.config, "", "workers", 0);
        if (ctx.workers <= 0) {
            if (const char* env = std::getenv("CHAINSDE_WORKERS")) ctx.workers = std::atoi(env);
            if (ctx.workers <= 0) ctx.workers = 1;
        }
        ctx.out_dir = out_dir;
        fs::create_directories(ctx.out_dir);

        return it->second(ctx);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
