#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"
#include "conelab/functionals.hpp"
#include "conelab/hopf_lax.hpp"
#include "conelab/hypercontractivity.hpp"
#include "conelab/quadrature.hpp"
#include "conelab/transport1d.hpp"
#include "runner.hpp"

namespace py = pybind11;
using namespace conelab;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Rule make_rule(const py::object& rule) {
  if (rule.is_none()) return RadialMethod{};
  return rule.cast<GridRule>();
}

py::dict deficit_dict(const DeficitReport& r) {
  py::dict d;
  d["p"] = r.p;
  d["entropy"] = r.entropy_lhs;
  d["gradient_energy"] = r.gradient_energy;
  d["rhs"] = r.rhs;
  d["deficit"] = r.deficit;
  d["normalization"] = r.normalization;
  d["pass"] = r.pass;
  return d;
}

HopfLaxMethod method_of(const std::string& s) { return hopf_lax_method_from_string(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted log-Sobolev constants, Hopf-Lax semigroups, hypercontractivity and 1D transport";

  static py::exception<Error> error(m, "ConelabError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr ptr) {
    try {
      if (ptr) std::rethrow_exception(ptr);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error)(py::str(e.what()));
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<Cone>(m, "Cone")
      .def_static("full_space", &Cone::full_space, py::arg("n"))
      .def_static("half_space", &Cone::half_space, py::arg("inward_normal"))
      .def_static("orthant", py::overload_cast<int>(&Cone::orthant), py::arg("n"))
      .def_static("orthant", py::overload_cast<int, std::vector<bool>>(&Cone::orthant), py::arg("n"),
                  py::arg("active_axes"))
      .def_static("polyhedral", &Cone::polyhedral, py::arg("n"), py::arg("inward_normals"))
      .def_property_readonly("dimension", &Cone::dimension)
      .def("contains", [](const Cone& c, const Point& x) { return c.contains(x); })
      .def("sample", [](const Cone& c, std::size_t count, std::uint64_t seed, double rmin,
                        double rmax) { return sample_cone(c, count, seed, rmin, rmax); },
           py::arg("count"), py::arg("seed"), py::arg("rmin") = 0.1, py::arg("rmax") = 10.0)
      .def("__repr__", &Cone::describe);

  py::class_<Weight>(m, "Weight")
      .def_static("constant", &Weight::constant, py::arg("cone"), py::arg("c") = 1.0)
      .def_static("monomial", &Weight::monomial, py::arg("cone"), py::arg("exponents"))
      .def_property_readonly("cone", &Weight::cone)
      .def_property_readonly("dimension", &Weight::dimension)
      .def_property_readonly("degree", &Weight::degree)
      .def_property_readonly("homogeneous_dimension", &Weight::homogeneous_dimension)
      .def("__call__", [](const Weight& w, const Point& x) { return w(x); })
      .def("gradient", [](const Weight& w, const Point& x) { return w.gradient(x); })
      .def("__repr__", &Weight::describe);

  py::class_<TestFunction>(m, "TestFunction")
      .def_static(
          "from_callable",
          [](int dim, std::function<double(const Point&)> f, std::optional<std::function<Point(const Point&)>> grad) {
            TestFunction u;
            u.dimension = dim;
            u.value = [f](PointView x) { return f(Point(x.begin(), x.end())); };
            if (grad) {
              u.gradient = [g = *grad](PointView x, std::span<double> out) {
                const Point v = g(Point(x.begin(), x.end()));
                std::copy(v.begin(), v.end(), out.begin());
              };
            }
            u.label = "python callable";
            return u;
          },
          py::arg("dimension"), py::arg("value"), py::arg("gradient") = py::none())
      .def_readonly("dimension", &TestFunction::dimension)
      .def_readonly("label", &TestFunction::label)
      .def("__call__", [](const TestFunction& u, const Point& x) { return u(x); });

  m.def("gaussian_extremal",
        [](const Weight& w, double p, double lambda, Point x0) { return GaussianExtremal(w, p, lambda, x0).test_function(); },
        py::arg("weight"), py::arg("p"), py::arg("lam") = 1.0, py::arg("x0") = Point{});
  m.def("gaussian_mixture", &gaussian_mixture, py::arg("centers"), py::arg("rates"), py::arg("coeffs"),
        py::arg("q") = 2.0);
  m.def("bump", &bump, py::arg("center"), py::arg("radius"), py::arg("c") = 1.0, py::arg("k") = 3);
  m.def("tilted_gaussian", &tilted_gaussian, py::arg("b"), py::arg("theta"), py::arg("q") = 2.0);
  m.def("log_mixture", &log_mixture, py::arg("centers"), py::arg("rates"), py::arg("coeffs"), py::arg("q") = 2.0);
  m.def("random_radial", &random_radial, py::arg("n"), py::arg("p"), py::arg("seed"));
  m.def("power_potential", &power_potential, py::arg("x0"), py::arg("b"), py::arg("q"), py::arg("sign"));
  m.def("dilated", &dilated, py::arg("u"), py::arg("t"), py::arg("m"), py::arg("p"));

  py::class_<GridRule>(m, "GridRule")
      .def(py::init<Cone, std::vector<double>, std::vector<double>, int>(), py::arg("cone"), py::arg("lo"),
           py::arg("hi"), py::arg("n_per_axis"))
      .def_property_readonly("size", &GridRule::size)
      .def("spacing", &GridRule::spacing)
      .def("nodes", [](const GridRule& r) {
        std::vector<Point> out;
        for (auto flat : r.inside()) out.push_back(r.node(flat));
        return out;
      });

  m.def("conjugate", &conjugate, py::arg("p"));
  m.def(
      "sharp_constant", [](double p, const Weight& w) { return sharp_constant(p, w).value; }, py::arg("p"),
      py::arg("weight"));
  m.def(
      "proof_constants",
      [](double p, const Weight& w) {
        const auto c = proof_constants(p, w);
        py::dict d;
        d["C1"] = c.C1;
        d["C2"] = c.C2;
        d["C3"] = c.C3;
        d["C4"] = c.C4;
        return d;
      },
      py::arg("p"), py::arg("weight"));
  m.def("ball_weight_mass", [](const Weight& w) { return ball_weight_mass(w); }, py::arg("weight"));
  m.def("sphere_weight_mass", &sphere_weight_mass, py::arg("weight"));

  // rule=None integrates radially; pass a GridRule otherwise.
  m.def(
      "entropy",
      [](const TestFunction& u, double p, const Weight& w, const py::object& rule) {
        return entropy(u, p, w, make_rule(rule));
      },
      py::arg("u"), py::arg("p"), py::arg("weight"), py::arg("rule") = py::none());
  m.def(
      "normalized",
      [](const TestFunction& u, double p, const Weight& w, const py::object& rule) {
        return normalized(u, p, w, make_rule(rule));
      },
      py::arg("u"), py::arg("p"), py::arg("weight"), py::arg("rule") = py::none());
  m.def(
      "deficit_p",
      [](const TestFunction& u, double p, const Weight& w, const py::object& rule) {
        return deficit_dict(deficit_p(u, p, w, make_rule(rule)));
      },
      py::arg("u"), py::arg("p"), py::arg("weight"), py::arg("rule") = py::none());
  m.def(
      "deficit_1", [](const Weight& w, double lambda) { return deficit_dict(deficit_1(w, lambda)); },
      py::arg("weight"), py::arg("lam") = 1.0);
  m.def(
      "perimeter_ball", [](const Weight& w, double lambda) { return perimeter_ball(w, lambda); },
      py::arg("weight"), py::arg("lam") = 1.0);

  m.def("set_threads", &set_hopf_lax_threads, py::arg("n"));
  m.def(
      "hopf_lax",
      [](const TestFunction& g, const GridRule& rule, double p, std::vector<double> times, const std::string& method) {
        const auto run = run_hopf_lax(sample_field(g, std::make_shared<const GridRule>(rule)), p, std::move(times),
                                      method_of(method));
        py::list slices;
        for (const auto& s : run.slices) slices.append(to_array(s.values));
        const auto mono = check_monotonicity(run);
        const auto res = hj_residual(run);
        py::dict d;
        d["times"] = run.times;
        d["slices"] = slices;
        d["monotone"] = mono.ok();
        d["hj_residual_median"] = res.median;
        d["boundary_argmin_ratio"] = run.boundary_argmin_ratio;
        return d;
      },
      py::arg("g"), py::arg("rule"), py::arg("p"), py::arg("times"), py::arg("method") = "pruned");
  m.def("power_family_rate", &power_family_rate, py::arg("b"), py::arg("p"), py::arg("t"), py::arg("sign"));
  m.def(
      "c_transform_involution",
      [](const TestFunction& g, double t, double p, const GridRule& rule) {
        return c_transform_involution(g, t, p, std::make_shared<const GridRule>(rule)).max_abs_deviation;
      },
      py::arg("g"), py::arg("t"), py::arg("p"), py::arg("rule"));

  m.def("hyper_extremal_g", &hyper_extremal_g, py::arg("p"), py::arg("beta"), py::arg("alpha"), py::arg("t"),
        py::arg("x0"), py::arg("C") = 0.0);
  m.def(
      "hyper_check",
      [](const TestFunction& g, double p, double alpha, double beta, double t, std::optional<Weight> w) {
        HyperConfig cfg;
        cfg.p = p;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.t_tilde = t;
        if (w) cfg.weight = *w;
        cfg.g = g;
        const auto r = hyper_check(cfg);
        py::dict d;
        d["lhs"] = r.lhs;
        d["rhs"] = r.rhs;
        d["ratio"] = r.ratio;
        d["pass"] = r.pass;
        py::list trace;
        for (const auto& tp : r.F_trace) trace.append(py::make_tuple(tp.t, tp.q, tp.F));
        d["F_trace"] = trace;
        return d;
      },
      py::arg("g"), py::arg("p"), py::arg("alpha"), py::arg("beta"), py::arg("t"), py::arg("weight") = py::none());

  m.def(
      "transport_chain",
      [](const TestFunction& u, double p, const Weight& w, double lo, double hi, int n) {
        const auto r = entropy_chain(u, p, w, Grid1D{lo, hi, n});
        py::dict d;
        d["I"] = r.I;
        d["final_bound"] = r.final_bound;
        d["rhs"] = r.rhs;
        d["am_gm_gap"] = r.am_gm_gap;
        d["jensen_gap"] = r.jensen_gap;
        d["byparts_gap"] = r.byparts_gap;
        d["holder_gap"] = r.holder_gap;
        d["log_concavity_gap"] = r.log_concavity_gap;
        d["ma_residual"] = r.ma_residual;
        d["pass"] = r.pass;
        return d;
      },
      py::arg("u"), py::arg("p"), py::arg("weight"), py::arg("lo") = -8.0, py::arg("hi") = 8.0, py::arg("n") = 4096);
  m.def(
      "brenier_map_1d",
      [](const TestFunction& u, double p, const Weight& w, double lo, double hi, int n) {
        const auto src =
            Density1D::make([u, p](double x) { return std::pow(std::abs(u(PointView(&x, 1))), p); }, w, {lo, hi, n});
        const auto map = brenier_map_1d(src, model_density(p, w, n));
        return py::make_tuple(to_array(src.nodes), to_array(map.T));
      },
      py::arg("u"), py::arg("p"), py::arg("weight"), py::arg("lo") = -8.0, py::arg("hi") = 8.0, py::arg("n") = 4096);

  // Configs and reports cross the boundary as JSON text; the Python
  // wrapper converts them to dicts.
  m.def("_run_experiment", [](const std::string& config, std::optional<std::uint64_t> seed) {
    cli::RunOptions opts;
    opts.seed = seed;
    return cli::run_experiment(cli::json::parse(config), opts).report.dump();
  });
  m.attr("__version__") = cli::version();
}
