#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bspde/comparison.hpp"
#include "bspde/config.hpp"
#include "bspde/penalty.hpp"
#include "bspde/risk.hpp"

namespace py = pybind11;
using namespace bspde;

namespace {

expr::Env env_from_kwargs(const py::kwargs& kw) {
    expr::Env env;
    for (auto item : kw) {
        const std::string key = py::cast<std::string>(item.first);
        const double value = py::cast<double>(item.second);
        if (key == "t") env.t = value;
        else if (key == "x") env.x = value;
        else if (key == "u") env.u = value;
        else if (key == "ux") env.ux = value;
        else if (key == "Z") env.Z = value;
        else if (key == "rint") env.rint = value;
        else throw py::key_error("unknown binding '" + key + "'");
    }
    return env;
}

py::dict comparison_to_dict(const ComparisonReport& r) {
    py::dict d;
    d["verdict"] = r.verdict == Verdict::Pass ? "pass" : (r.verdict == Verdict::Fail ? "fail" : "void");
    d["worst_positive_part"] = r.worst_positive_part;
    d["expected_defect_t0"] = r.defect_t0;
    d["tolerance"] = r.tolerance;
    d["monotone_tier"] = r.monotone_tier;
    d["scale"] = r.scale;
    d["level_worst_positive_part"] = r.level_worst_positive_part;
    d["level_expected_defect"] = r.level_expected_defect;
    d["terminal_ordered"] = r.hypotheses.terminal_ordered;
    d["driver_dominated"] = r.hypotheses.driver_dominated;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Backward SPDE laboratory: grids, penalty family, noise trees, solvers and "
              "comparison/risk experiments";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<DriverError>(m, "DriverError", PyExc_ArithmeticError);

    py::class_<Grid>(m, "Grid")
        .def_readonly("x_left", &Grid::x_left)
        .def_readonly("x_right", &Grid::x_right)
        .def_readonly("num_nodes", &Grid::num_nodes)
        .def_readonly("h", &Grid::h)
        .def("x", &Grid::x)
        .def("nodes", [](const Grid& g) {
            std::vector<double> xs(static_cast<std::size_t>(g.num_nodes));
            for (int i = 0; i < g.num_nodes; ++i) xs[i] = g.x(i);
            return xs;
        });
    m.def("make_grid", &make_grid, py::arg("x_left"), py::arg("x_right"), py::arg("num_nodes"));

    py::class_<CoefficientField>(m, "CoefficientField")
        .def_static("constant", &CoefficientField::constant)
        .def_static("from_expression", &CoefficientField::from_expression)
        .def("__call__", &CoefficientField::operator())
        .def_property_readonly("source", &CoefficientField::source);

    m.def("apply_diffusion", &apply_diffusion, py::arg("grid"), py::arg("a_diff"), py::arg("u"),
          py::arg("t"));
    m.def("gradient", &gradient);
    m.def("l2_inner", &l2_inner);
    m.def("positive_part_defect", &positive_part_defect);

    m.def("parse_expr", [](const std::string& src) { return expr::parse(src); });
    py::class_<expr::Expr>(m, "Expr")
        .def("__str__", [](const expr::Expr& e) { return expr::to_string(e); })
        .def("__call__",
             [](const expr::Expr& e, const py::kwargs& kw) {
                 return expr::eval(e, env_from_kwargs(kw));
             });
    m.def("eval_expr", [](const std::string& src, const py::kwargs& kw) {
        return expr::eval(expr::parse(src), env_from_kwargs(kw));
    });

    auto penalty_mod = m.def_submodule("penalty", "smooth approximations of the squared positive part");
    penalty_mod.def("psi", &penalty::psi);
    penalty_mod.def("f", &penalty::f);
    penalty_mod.def("f_prime", &penalty::f_prime);
    penalty_mod.def("f_second", &penalty::f_second);
    penalty_mod.def("functional", &penalty::functional);
    penalty_mod.def("functional_prime", &penalty::functional_prime);
    penalty_mod.def("functional_second", &penalty::functional_second);
    penalty_mod.def("ratio_bound", [](int n, double x, double y) {
        const auto rb = penalty::ratio_bound(n, x, y);
        return py::make_tuple(rb.lhs, rb.rhs, rb.pass);
    });

    py::class_<LevyModel>(m, "LevyModel")
        .def_readonly("marks", &LevyModel::marks)
        .def_readonly("intensities", &LevyModel::intensities)
        .def("total_intensity", &LevyModel::total_intensity);
    m.def("make_levy_model", &make_levy_model);

    py::class_<NoiseTree>(m, "NoiseTree")
        .def_static("build", &NoiseTree::build, py::arg("num_steps"), py::arg("horizon"),
                    py::arg("levy"))
        .def_property_readonly("num_steps", &NoiseTree::num_steps)
        .def_property_readonly("dt", &NoiseTree::dt)
        .def_property_readonly("branching", &NoiseTree::branching)
        .def("level_size", &NoiseTree::level_size)
        .def("total_nodes", &NoiseTree::total_nodes)
        .def("branch_prob", &NoiseTree::branch_prob)
        .def("path_prob", &NoiseTree::path_prob)
        .def("cond_expect",
             [](const NoiseTree& t, const std::vector<Field>& children) {
                 return t.cond_expect(std::span<const Field>(children.data(), children.size()));
             })
        .def("extract_brownian_integrand",
             [](const NoiseTree& t, const std::vector<Field>& children) {
                 return t.extract_brownian_integrand(
                     std::span<const Field>(children.data(), children.size()));
             })
        .def("extract_jump_amplitudes", [](const NoiseTree& t, const std::vector<Field>& children) {
            const MarkField r =
                t.extract_jump_amplitudes(std::span<const Field>(children.data(), children.size()));
            return r.per_mark;
        });

    py::class_<SchemeParams>(m, "SchemeParams")
        .def(py::init([](double theta, int num_steps) {
                 SchemeParams p;
                 p.theta = theta;
                 p.num_steps = num_steps;
                 return p;
             }),
             py::arg("theta") = 1.0, py::arg("num_steps") = 1)
        .def_readwrite("theta", &SchemeParams::theta)
        .def_readwrite("num_steps", &SchemeParams::num_steps);

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def_static("from_json", &problem_from_json_text)
        .def_property_readonly("grid", [](const ProblemSpec& s) { return s.grid; })
        .def_property_readonly("horizon", [](const ProblemSpec& s) { return s.horizon; })
        .def_property_readonly("phi", [](const ProblemSpec& s) { return s.phi; });

    m.def(
        "solve_deterministic",
        [](const ProblemSpec& spec, const SchemeParams& params, int threads) {
            SolveOptions opts;
            opts.threads = threads;
            return solve_deterministic(spec, params, opts);
        },
        py::arg("problem"), py::arg("scheme"), py::arg("threads") = 0);

    m.def(
        "solve_stochastic_root",
        [](const ProblemSpec& spec, const SchemeParams& params, int threads) {
            SolveOptions opts;
            opts.threads = threads;
            const NoiseTree tree = NoiseTree::build(params.num_steps, spec.horizon, spec.levy);
            const SolutionBundle bundle = solve_stochastic(spec, tree, params, opts);
            return py::make_tuple(bundle.u[0][0], bundle.z[0][0], bundle.r[0][0].per_mark);
        },
        py::arg("problem"), py::arg("scheme"), py::arg("threads") = 0,
        "solve on a fresh noise tree and return (u, Z, r) at the root");

    m.def(
        "run_comparison",
        [](const ProblemSpec& p1, const ProblemSpec& p2, const SchemeParams& params, int threads,
           std::uint64_t seed) {
            SolveOptions opts;
            opts.threads = threads;
            const NoiseTree tree = NoiseTree::build(params.num_steps, p1.horizon, p1.levy);
            return comparison_to_dict(run_comparison(p1, p2, tree, params, opts, seed));
        },
        py::arg("problem1"), py::arg("problem2"), py::arg("scheme"), py::arg("threads") = 0,
        py::arg("seed") = 0);

    m.def(
        "rho",
        [](const ProblemSpec& spec, const Field& phi, const SchemeParams& params, int threads) {
            SolveOptions opts;
            opts.threads = threads;
            const NoiseTree tree = NoiseTree::build(params.num_steps, spec.horizon, spec.levy);
            return rho(spec, phi, tree, params, opts);
        },
        py::arg("problem"), py::arg("phi"), py::arg("scheme"), py::arg("threads") = 0);
}
