#include "bspde/cli.hpp"

#include "bspde/comparison.hpp"
#include "bspde/config.hpp"
#include "bspde/penalty.hpp"
#include "bspde/risk.hpp"
#include "bspde/rng.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

namespace bspde {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitPrecondition = 4;
constexpr int kExitViolation = 5;

struct CliOptions {
    std::string config_path;
    std::string out_dir; // overrides config when nonempty
    int threads = 0;
    bool seed_set = false;
    std::uint64_t seed = 0;
    bool force_unchecked = false;
    std::string suite;
};

std::ofstream open_output(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    return out;
}

void apply_overrides(RunConfig& cfg, const CliOptions& cli) {
    if (!cli.out_dir.empty()) cfg.outputs.dir = cli.out_dir;
    if (cli.seed_set) cfg.seed = cli.seed;
}

SolveOptions solve_options(const CliOptions& cli) {
    SolveOptions opts;
    opts.threads = cli.threads;
    opts.force_unchecked = cli.force_unchecked;
    return opts;
}

const ProblemSpec& require_problem(const RunConfig& cfg) {
    if (!cfg.problem) throw ConfigError("config: this command requires a 'problem' section");
    return *cfg.problem;
}

bool tree_feasible(const ProblemSpec& spec, int num_steps) {
    const double dt = spec.horizon / num_steps;
    if (spec.levy.total_intensity() * dt > 0.5) return false;
    const std::int64_t branching = 2 * (static_cast<std::int64_t>(spec.levy.num_marks()) + 1);
    std::int64_t nodes = 1, level = 1;
    for (int k = 1; k <= num_steps; ++k) {
        if (level > NoiseTree::kMaxNodes / branching) return false;
        level *= branching;
        nodes += level;
        if (nodes > NoiseTree::kMaxNodes) return false;
    }
    return true;
}

void write_row_prefix(std::ofstream& out, double t, std::int64_t node, double prob) {
    out << format_g17(t) << ',' << node << ',' << format_g17(prob);
}

void write_solution_header(std::ofstream& out, int num_marks) {
    out << "t,node_id,path_prob,x,u,Z";
    for (int j = 1; j <= num_marks; ++j) out << ",r_" << j;
    out << '\n';
}

void write_level_rows(std::ofstream& out, const Grid& grid, double t, std::int64_t node,
                      double prob, const Field& u, const Field* z, const MarkField* r,
                      int num_marks) {
    for (int i = 0; i < grid.num_nodes; ++i) {
        write_row_prefix(out, t, node, prob);
        out << ',' << format_g17(grid.x(i)) << ',' << format_g17(u[i]) << ','
            << format_g17(z ? (*z)[i] : 0.0);
        for (int j = 0; j < num_marks; ++j)
            out << ',' << format_g17(r ? r->per_mark[j][i] : 0.0);
        out << '\n';
    }
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Void: return "void";
    }
    return "?";
}

void write_hypotheses(std::ofstream& out, const HypothesisReport& h) {
    out << "terminal_ordered: " << (h.terminal_ordered ? "true" : "false")
        << " (worst gap " << format_g17(h.terminal_worst_gap) << ")\n";
    out << "driver_dominated_along_sol1: " << (h.driver_dominated ? "true" : "false")
        << " (worst gap " << format_g17(h.driver_worst_gap) << ")\n";
    out << "ellipticity_problem2: " << (h.ellipticity.pass ? "pass" : "fail")
        << " (worst margin " << format_g17(h.ellipticity.worst_margin) << ")\n";
    out << "lipschitz_estimate_problem2: u " << format_g17(h.lipschitz.est_u) << ", v "
        << format_g17(h.lipschitz.est_v) << ", Z " << format_g17(h.lipschitz.est_Z);
    if (h.lipschitz.exact_u)
        out << " (structural: u " << format_g17(*h.lipschitz.exact_u) << ", v "
            << format_g17(*h.lipschitz.exact_v) << ", Z " << format_g17(*h.lipschitz.exact_Z)
            << ")";
    out << '\n';
    out << "jump_bound_problem2: " << (h.jump_bound.pass ? "pass" : "fail")
        << " (worst violation " << format_g17(h.jump_bound.worst_violation)
        << ", lambda worst ratio " << format_g17(h.jump_bound.lambda_report.worst_ratio) << ")\n";
}

int cmd_solve(const RunConfig& cfg, const CliOptions& cli) {
    const ProblemSpec& spec = require_problem(cfg);
    const SolveOptions opts = solve_options(cli);
    const int num_marks = spec.levy.num_marks();

    SolveMethod method = cfg.method;
    if (method == SolveMethod::Auto)
        method = tree_feasible(spec, cfg.scheme.num_steps) ? SolveMethod::Stochastic
                                                           : SolveMethod::Deterministic;

    auto csv = open_output(cfg.outputs.dir, "solution.csv");
    write_solution_header(csv, num_marks);
    auto summary = open_output(cfg.outputs.dir, "solution_summary.txt");
    summary << "command: solve\n";
    summary << "method: " << (method == SolveMethod::Stochastic ? "stochastic" : "deterministic")
            << '\n';
    summary << "steps: " << cfg.scheme.num_steps << '\n';
    summary << "theta: " << format_g17(cfg.scheme.theta) << '\n';

    const EllipticityReport ell = check_ellipticity_default(spec, cfg.scheme.num_steps);
    summary << "ellipticity: " << (ell.pass ? "pass" : "fail") << " (worst margin "
            << format_g17(ell.worst_margin) << ")\n";
    if (!ell.pass && cli.force_unchecked)
        summary << "warning: ellipticity failed; run forced, outputs unverified\n";

    if (method == SolveMethod::Stochastic) {
        const NoiseTree tree = NoiseTree::build(cfg.scheme.num_steps, spec.horizon, spec.levy);
        const SolutionBundle bundle = solve_stochastic(spec, tree, cfg.scheme, opts);
        if (cfg.outputs.full_bundle) {
            for (int k = 0; k <= tree.num_steps(); ++k) {
                const bool has_mart = k < tree.num_steps();
                for (std::int64_t n = 0; n < tree.level_size(k); ++n)
                    write_level_rows(csv, spec.grid, tree.time_at(k), n, tree.path_prob(k, n),
                                     bundle.u[k][n], has_mart ? &bundle.z[k][n] : nullptr,
                                     has_mart ? &bundle.r[k][n] : nullptr, num_marks);
            }
        } else {
            write_level_rows(csv, spec.grid, 0.0, 0, 1.0, bundle.u[0][0], &bundle.z[0][0],
                             &bundle.r[0][0], num_marks);
        }
        summary << "tree_nodes: " << tree.total_nodes() << '\n';
        summary << "u0_max_abs: " << format_g17(max_abs(bundle.u[0][0])) << '\n';
    } else {
        const std::vector<Field> traj = solve_deterministic(spec, cfg.scheme, opts);
        const double dt = spec.horizon / cfg.scheme.num_steps;
        if (cfg.outputs.full_bundle) {
            for (std::size_t k = 0; k < traj.size(); ++k)
                write_level_rows(csv, spec.grid, k * dt, 0, 1.0, traj[k], nullptr, nullptr,
                                 num_marks);
        } else {
            write_level_rows(csv, spec.grid, 0.0, 0, 1.0, traj[0], nullptr, nullptr, num_marks);
        }
        summary << "u0_max_abs: " << format_g17(max_abs(traj[0])) << '\n';
    }
    return kExitOk;
}

int cmd_compare(const RunConfig& cfg, const CliOptions& cli) {
    const ProblemSpec& spec1 = require_problem(cfg);
    if (!cfg.problem2) throw ConfigError("config: compare requires a 'problem2' section");
    const ProblemSpec& spec2 = *cfg.problem2;
    if (!tree_feasible(spec1, cfg.scheme.num_steps))
        throw ConfigError("compare: no feasible noise tree for these scheme parameters");

    const NoiseTree tree = NoiseTree::build(cfg.scheme.num_steps, spec1.horizon, spec1.levy);
    const ComparisonReport report =
        run_comparison(spec1, spec2, tree, cfg.scheme, solve_options(cli), cfg.seed);

    auto csv = open_output(cfg.outputs.dir, "comparison.csv");
    csv << "level,t,worst_positive_part,expected_defect\n";
    for (std::size_t k = 0; k < report.level_worst_positive_part.size(); ++k)
        csv << k << ',' << format_g17(tree.time_at(static_cast<int>(k))) << ','
            << format_g17(report.level_worst_positive_part[k]) << ','
            << format_g17(report.level_expected_defect[k]) << '\n';

    auto summary = open_output(cfg.outputs.dir, "comparison_summary.txt");
    summary << "command: compare\n";
    summary << "verdict: " << verdict_name(report.verdict) << '\n';
    summary << "tier: " << (report.monotone_tier ? "monotone" : "general") << '\n';
    summary << "tolerance: " << format_g17(report.tolerance) << '\n';
    summary << "scale: " << format_g17(report.scale) << '\n';
    summary << "worst_positive_part: " << format_g17(report.worst_positive_part) << '\n';
    summary << "expected_defect_t0: " << format_g17(report.defect_t0) << '\n';
    write_hypotheses(summary, report.hypotheses);

    switch (report.verdict) {
        case Verdict::Pass: return kExitOk;
        case Verdict::Void: return kExitPrecondition;
        case Verdict::Fail: return kExitViolation;
    }
    return kExitFailure;
}

int cmd_risk(const RunConfig& cfg, const CliOptions& cli) {
    const ProblemSpec& spec = require_problem(cfg);
    if (!cfg.risk) throw ConfigError("config: risk requires a 'risk' section");
    const RiskParams& rp = *cfg.risk;
    if (!tree_feasible(spec, cfg.scheme.num_steps))
        throw ConfigError("risk: no feasible noise tree for these scheme parameters");
    const NoiseTree tree = NoiseTree::build(cfg.scheme.num_steps, spec.horizon, spec.levy);
    const SolveOptions opts = solve_options(cli);

    auto summary = open_output(cfg.outputs.dir, "risk_summary.txt");
    summary << "command: risk\n";
    summary << "suite: " << cli.suite << '\n';

    if (cli.suite == "monotonicity") {
        const MonotonicityReport rep =
            test_monotonicity(spec, rp.phi1, rp.phi2, tree, cfg.scheme, opts);
        const Field rho1 = rho(spec, rp.phi1, tree, cfg.scheme, opts);
        const Field rho2 = rho(spec, rp.phi2, tree, cfg.scheme, opts);
        auto csv = open_output(cfg.outputs.dir, "risk.csv");
        csv << "x,rho_phi1,rho_phi2\n";
        for (int i = 0; i < spec.grid.num_nodes; ++i)
            csv << format_g17(spec.grid.x(i)) << ',' << format_g17(rho1[i]) << ','
                << format_g17(rho2[i]) << '\n';
        summary << "pass: " << (rep.pass ? "true" : "false") << '\n';
        summary << "worst_violation: " << format_g17(rep.worst_violation) << '\n';
        summary << "tolerance: " << format_g17(rep.tolerance) << '\n';
        write_hypotheses(summary, rep.comparison.hypotheses);
        if (rep.pass) return kExitOk;
        return rep.comparison.verdict == Verdict::Void ? kExitPrecondition : kExitViolation;
    }
    if (cli.suite == "convexity") {
        const ConvexityReport rep =
            test_convexity(spec, rp.phi1, rp.phi2, rp.lambdas, tree, cfg.scheme, opts);
        const Field rho1 = rho(spec, rp.phi1, tree, cfg.scheme, opts);
        const Field rho2 = rho(spec, rp.phi2, tree, cfg.scheme, opts);
        auto csv = open_output(cfg.outputs.dir, "risk.csv");
        csv << "x,rho_phi1,rho_phi2\n";
        for (int i = 0; i < spec.grid.num_nodes; ++i)
            csv << format_g17(spec.grid.x(i)) << ',' << format_g17(rho1[i]) << ','
                << format_g17(rho2[i]) << '\n';
        summary << "pass: " << (rep.pass ? "true" : "false") << '\n';
        summary << "tier: " << (rep.affine ? "affine-equality" : "concave") << '\n';
        summary << "tolerance: " << format_g17(rep.tolerance) << '\n';
        summary << "worst_violation: " << format_g17(rep.worst_violation) << '\n';
        summary << "worst_equality_gap: " << format_g17(rep.worst_equality_gap) << '\n';
        for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
            summary << "lambda " << format_g17(rep.lambdas[i]) << ": violation "
                    << format_g17(rep.per_lambda_violation[i]) << '\n';
        return rep.pass ? kExitOk : kExitViolation;
    }
    if (cli.suite == "translation") {
        const TranslationReport rep =
            test_translation(spec, rp.phi1, rp.shift, tree, cfg.scheme, opts);
        const Field base = rho(spec, rp.phi1, tree, cfg.scheme, opts);
        auto csv = open_output(cfg.outputs.dir, "risk.csv");
        csv << "x,rho_phi\n";
        for (int i = 0; i < spec.grid.num_nodes; ++i)
            csv << format_g17(spec.grid.x(i)) << ',' << format_g17(base[i]) << '\n';
        summary << "pass: " << (rep.pass ? "true" : "false") << '\n';
        summary << "shift: " << format_g17(rep.shift) << '\n';
        summary << "worst_gap: " << format_g17(rep.worst_gap) << '\n';
        summary << "tolerance: " << format_g17(rep.tolerance) << '\n';
        return rep.pass ? kExitOk : kExitViolation;
    }
    throw ConfigError("risk: unknown suite '" + cli.suite +
                      "' (expected monotonicity|convexity|translation)");
}

int cmd_check(const RunConfig& cfg, const CliOptions& cli) {
    const ProblemSpec& spec = require_problem(cfg);

    const EllipticityReport ell = check_ellipticity_default(spec, cfg.scheme.num_steps);
    const LipschitzEstimate lip = estimate_lipschitz(spec, cfg.check.n_samples, cfg.seed,
                                                     cfg.check.lipschitz_constant);
    const JumpBoundReport jump = check_jump_bound(spec, cfg.check.n_samples, cfg.seed);
    std::vector<double> ts;
    for (int k = 0; k <= cfg.scheme.num_steps; ++k)
        ts.push_back(spec.horizon * k / cfg.scheme.num_steps);
    const LambdaBoundReport lam = check_lambda_bound(spec.levy, spec.lambda, ts);

    auto csv = open_output(cfg.outputs.dir, "check.csv");
    csv << "check,result,value\n";
    csv << "ellipticity," << (ell.pass ? "pass" : "fail") << ','
        << format_g17(ell.worst_margin) << '\n';
    csv << "lipschitz_u,estimate," << format_g17(lip.est_u) << '\n';
    csv << "lipschitz_v,estimate," << format_g17(lip.est_v) << '\n';
    csv << "lipschitz_Z,estimate," << format_g17(lip.est_Z) << '\n';
    csv << "jump_bound," << (jump.pass ? "pass" : "fail") << ','
        << format_g17(jump.worst_violation) << '\n';
    csv << "lambda_bound," << (lam.pass ? "pass" : "fail") << ','
        << format_g17(lam.worst_ratio) << '\n';

    auto summary = open_output(cfg.outputs.dir, "check_summary.txt");
    summary << "command: check\n";
    summary << "ellipticity: " << (ell.pass ? "pass" : "fail") << " (worst margin "
            << format_g17(ell.worst_margin) << " at t " << format_g17(ell.worst_t) << ", x "
            << format_g17(ell.worst_x) << ")\n";
    summary << "lipschitz estimates (sampling falsifier, not a proof): u "
            << format_g17(lip.est_u) << ", v " << format_g17(lip.est_v) << ", Z "
            << format_g17(lip.est_Z) << '\n';
    if (lip.exact_u)
        summary << "lipschitz structural constants: u " << format_g17(*lip.exact_u) << ", v "
                << format_g17(*lip.exact_v) << ", Z " << format_g17(*lip.exact_Z) << '\n';
    if (lip.pass)
        summary << "lipschitz vs user constant: " << (*lip.pass ? "pass" : "fail") << '\n';
    summary << "jump bound: " << (jump.pass ? "pass" : "fail") << " (worst violation "
            << format_g17(jump.worst_violation) << ")\n";
    summary << "lambda bound: " << (lam.pass ? "pass" : "fail") << " (worst ratio "
            << format_g17(lam.worst_ratio) << ")\n";

    bool all_pass = ell.pass && jump.pass && lam.pass;
    if (lip.pass && !*lip.pass) all_pass = false;
    summary << "overall: " << (all_pass ? "pass" : "fail") << '\n';
    (void)cli;
    return all_pass ? kExitOk : kExitViolation;
}

int cmd_selftest(std::uint64_t seed) {
    int failures = 0;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::cout << "selftest: " << name << " ... " << (ok ? "ok" : "FAIL");
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << '\n';
        if (!ok) ++failures;
    };

    {
        // C1 smoothness: both branch formulas of the derivative agree at the knots.
        double worst = 0.0;
        for (int n : {1, 2, 3, 5, 8, 13, 64, 256, 1024}) {
            const double knee = 1.0 / n;
            worst = std::max(worst, std::fabs(n * knee * knee - (2.0 * knee - 1.0 / n)));
            worst = std::max(worst, std::fabs(penalty::f_prime(n, 0.0) - 0.0));
        }
        report("derivative continuity at the knots", worst <= 1e-12,
               "worst gap " + format_g17(worst));
    }
    {
        // Monotone convergence to the squared positive part, with rate x^+ / n.
        bool ok = true;
        double worst_rate = 0.0;
        for (int n = 1; n <= 1024 && ok; ++n) {
            for (int ix = 0; ix <= 600; ++ix) {
                const double x = -3.0 + 0.01 * ix;
                const double xp = x > 0.0 ? x : 0.0;
                const double fn = penalty::f(n, x);
                const double fn1 = penalty::f(n + 1, x);
                if (fn > fn1 + 1e-15 || fn > xp * xp + 1e-15) {
                    ok = false;
                    break;
                }
                const double excess = xp * xp - fn - xp / n;
                worst_rate = std::max(worst_rate, excess);
            }
        }
        report("monotone convergence with rate bound", ok && worst_rate <= 1e-15,
               "worst rate excess " + format_g17(worst_rate));
    }
    {
        CounterRng rng{seed};
        bool ok = true;
        double worst = 0.0;
        for (int s = 0; s < 100000; ++s) {
            const int n = static_cast<int>(rng.next_int(1, 1024));
            const double x = rng.next_in(-3.0, 3.0);
            const double y = rng.next_in(0.0, 3.0);
            const auto rb = penalty::ratio_bound(n, x, y);
            worst = std::max(worst, rb.lhs - rb.rhs);
            if (!rb.pass) {
                ok = false;
                break;
            }
        }
        report("ratio bound with constant 2 (100000 seeded triples)", ok,
               "worst lhs-rhs " + format_g17(worst));
    }
    {
        // Directional derivative of the integral functional vs finite differences.
        const Grid grid = make_grid(0.0, 1.0, 101);
        Field h = make_field(grid), h1 = make_field(grid);
        for (int i = 0; i < grid.num_nodes; ++i) {
            h[i] = grid.x(i) - 0.3;
            h1[i] = std::cos(grid.x(i));
        }
        bool ok = true;
        double worst = 0.0;
        for (int n : {1, 2, 7, 32}) {
            const double scale = std::max({1.0, max_abs(h), max_abs(h1)});
            const double eps = 1e-6 * scale;
            Field bumped = h;
            for (int i = 0; i < grid.num_nodes; ++i) bumped[i] += eps * h1[i];
            const double fd =
                (penalty::functional(grid, n, bumped) - penalty::functional(grid, n, h)) / eps;
            const double exact = penalty::functional_prime(grid, n, h, h1);
            const double rel = std::fabs(fd - exact) / std::max(1e-30, std::fabs(exact));
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-5;
        }
        report("functional derivative vs finite difference", ok,
               "worst relative error " + format_g17(worst));
    }
    {
        // Convexity: nonnegative curvature, nondecreasing derivative.
        bool ok = true;
        for (int n : {1, 3, 17, 200}) {
            double prev = penalty::f_prime(n, -4.0);
            for (int s = 0; s < 2000; ++s) {
                const double x = -4.0 + 8.0 * s / 1999.0;
                if (penalty::f_second(n, x) < 0.0) ok = false;
                const double fp = penalty::f_prime(n, x);
                if (fp < prev - 1e-15) ok = false;
                prev = fp;
            }
        }
        report("convexity of the penalty family", ok, "");
    }
    return failures == 0 ? kExitOk : kExitFailure;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Backward SPDE laboratory: solves jump-diffusion backward equations on a "
                 "noise tree and verifies comparison/risk-measure properties"};
    app.require_subcommand(1);

    CliOptions cli;
    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", cli.config_path, "JSON run configuration");
        if (need_config) opt->required();
        sub->add_option("--out", cli.out_dir, "output directory (overrides config)");
        sub->add_option("--threads", cli.threads, "worker threads, 0 = auto");
        sub->add_option("--seed", cli.seed, "seed for sampling-based checks")
            ->each([&](const std::string&) { cli.seed_set = true; });
        sub->add_flag("--force-unchecked", cli.force_unchecked,
                      "run even if the ellipticity check fails (outputs labeled unverified)");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one problem and write u(0,.)");
    add_common(solve, true);
    CLI::App* compare = app.add_subcommand("compare", "ordered-solutions experiment");
    add_common(compare, true);
    CLI::App* risk = app.add_subcommand("risk", "risk-measure axiom suites");
    add_common(risk, true);
    risk->add_option("--suite", cli.suite, "monotonicity|convexity|translation")->required();
    CLI::App* check = app.add_subcommand("check", "assumption validators");
    add_common(check, true);
    CLI::App* selftest = app.add_subcommand("selftest", "penalty-family property sweep");
    add_common(selftest, false);

    std::vector<const char*> argv;
    argv.push_back("bspde");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (selftest->parsed()) return cmd_selftest(cli.seed_set ? cli.seed : 0);
        RunConfig cfg = load_config(cli.config_path);
        apply_overrides(cfg, cli);
        if (solve->parsed()) return cmd_solve(cfg, cli);
        if (compare->parsed()) return cmd_compare(cfg, cli);
        if (risk->parsed()) return cmd_risk(cfg, cli);
        if (check->parsed()) return cmd_check(cfg, cli);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPrecondition;
    } catch (const DriverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace bspde
