#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lowdeg/bounds.hpp"
#include "lowdeg/detect.hpp"
#include "lowdeg/error.hpp"
#include "lowdeg/hermite.hpp"
#include "lowdeg/ldlr.hpp"
#include "lowdeg/models.hpp"
#include "lowdeg/oracles.hpp"
#include "lowdeg/parallel.hpp"

namespace py = pybind11;
using namespace lowdeg;

namespace {

// "rademacher", "gaussian_iid", "sparse_rademacher:1/4", "discrete_custom:-1@1/2,1@1/2"
PriorSpec prior_from(const std::string& text) {
  const auto colon = text.find(':');
  const PriorKind kind = parse_prior_kind(text.substr(0, colon));
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  switch (kind) {
    case PriorKind::sparse_rademacher:
      return PriorSpec::sparse_rademacher(parse_rational(rest));
    case PriorKind::discrete_custom: {
      std::vector<Atom> atoms;
      std::stringstream ss(rest);
      for (std::string item; std::getline(ss, item, ',');) {
        const auto at = item.find('@');
        if (at == std::string::npos) throw InvalidArgument("atom '" + item + "' is not value@probability");
        atoms.push_back({parse_rational(item.substr(0, at)), parse_rational(item.substr(at + 1))});
      }
      return PriorSpec::discrete_custom(std::move(atoms));
    }
    default:
      if (!rest.empty()) throw InvalidArgument("prior '" + std::string(to_string(kind)) + "' takes no parameters");
      return {kind, Rational(1), {}};
  }
}

ModeRequest mode_from(const std::string& s) {
  if (s == "auto") return ModeRequest::automatic;
  if (s == "exact") return ModeRequest::exact;
  if (s == "log") return ModeRequest::log_space;
  throw InvalidArgument("mode must be auto, exact or log");
}

ModelSpec model_from(unsigned p, std::uint64_t n, std::optional<std::string> lambda,
                     std::optional<std::string> lambda_hat, const std::string& prior) {
  if (lambda.has_value() == lambda_hat.has_value())
    throw InvalidArgument("give exactly one of lambda and lambda_hat");
  if (lambda_hat) {
    if (p != 2) throw InvalidArgument("lambda_hat is defined for p = 2 only");
    return ModelSpec::with_lambda_hat(n, parse_rational(*lambda_hat), prior_from(prior));
  }
  return ModelSpec::with_lambda(p, n, parse_rational(*lambda), prior_from(prior));
}

py::array_t<double> to_array(const Observation& Y) {
  std::vector<py::ssize_t> shape(Y.p, static_cast<py::ssize_t>(Y.n));
  py::array_t<double> out(shape);
  std::copy(Y.entries.begin(), Y.entries.end(), out.mutable_data());
  return out;
}

Observation from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() < 1) throw InvalidArgument("observation must have at least one axis");
  Observation Y;
  Y.p = static_cast<unsigned>(a.ndim());
  Y.n = static_cast<std::uint64_t>(a.shape(0));
  for (py::ssize_t k = 1; k < a.ndim(); ++k)
    if (a.shape(k) != a.shape(0)) throw InvalidArgument("observation must be a cubical tensor");
  Y.entries.assign(a.data(), a.data() + a.size());
  return Y;
}

std::vector<double> term_values(const std::vector<SignedLog>& terms) {
  std::vector<double> out;
  for (const auto& t : terms) out.push_back(t.sign == 0 ? 0.0 : t.sign * std::exp(t.log_mag));
  return out;
}

py::dict ldlr_dict(const LdlrResult& r) {
  py::dict d;
  d["p"] = r.p;
  d["mode"] = std::string(to_string(r.mode));
  d["log_norm_sq"] = r.log_norm_sq();
  d["norm_sq"] = r.norm_sq();
  d["cumulative_log"] = r.cumulative_log;
  std::vector<double> log_terms;
  for (const auto& t : r.terms) log_terms.push_back(t.log_mag);
  d["log_terms"] = log_terms;
  d["skipped"] = r.skipped;
  if (r.exact_total) {
    d["exact_norm_sq"] = to_string(*r.exact_total);
    std::vector<std::string> exact;
    for (const auto& t : *r.exact_terms) exact.push_back(to_string(t));
    d["exact_terms"] = exact;
  } else {
    d["exact_norm_sq"] = py::none();
  }
  return d;
}

}  // namespace

void bind_ldlr(py::module_& m) {
  m.def("ldlr_norm_sq",
        [](unsigned p, std::uint64_t n, unsigned D, std::optional<std::string> lambda,
           std::optional<std::string> lambda_hat, const std::string& prior, const std::string& mode) {
          return ldlr_dict(ldlr_norm_sq(model_from(p, n, lambda, lambda_hat, prior), D, mode_from(mode)));
        },
        py::arg("p"), py::arg("n"), py::arg("D"), py::arg("lambda_") = py::none(),
        py::arg("lambda_hat") = py::none(), py::arg("prior") = "rademacher", py::arg("mode") = "auto",
        "Squared norm of the degree-<=D likelihood ratio. Signals are decimal or rational strings.");

  m.def("lr_norm_sq",
        [](unsigned p, std::uint64_t n, std::optional<std::string> lambda,
           std::optional<std::string> lambda_hat, const std::string& prior) {
          const LrNormResult r = lr_norm_sq(model_from(p, n, lambda, lambda_hat, prior));
          py::dict d;
          d["value"] = r.value;
          d["log_value"] = r.log_value;
          d["overflow"] = r.overflow;
          return d;
        },
        py::arg("p"), py::arg("n"), py::arg("lambda_") = py::none(), py::arg("lambda_hat") = py::none(),
        py::arg("prior") = "rademacher");

  m.def("tensor_threshold_bounds", [](unsigned p, std::uint64_t n, unsigned D) {
    const ThresholdBounds b = tensor_threshold_bounds(p, n, D);
    return py::make_tuple(b.lambda_low, b.lambda_high);
  }, py::arg("p"), py::arg("n"), py::arg("D"));

  m.def("gaussian_heuristic", [](double lambda_hat, unsigned D) {
    return term_values(gaussian_heuristic_norm_sq(lambda_hat, D).terms);
  }, py::arg("lambda_hat"), py::arg("D"));

  m.def("degree_schedule", [](const std::string& spec, std::uint64_t n) {
    return DegreeSchedule::parse(spec)(n);
  }, py::arg("schedule"), py::arg("n"));

  m.def("scan",
        [](unsigned p, std::vector<std::uint64_t> n_grid, std::vector<std::string> signals,
           const std::string& schedule, bool lambda_hat, const std::string& prior,
           const std::string& mode, unsigned workers) {
          ScanConfig cfg;
          cfg.p = p;
          cfg.prior = prior_from(prior);
          cfg.n_grid = std::move(n_grid);
          cfg.schedule = DegreeSchedule::parse(schedule);
          for (const auto& s : signals) cfg.signals.push_back(parse_rational(s));
          cfg.signals_are_lambda_hat = lambda_hat;
          cfg.mode = mode_from(mode);
          cfg.workers = workers == 0 ? default_workers() : workers;
          ScanResult r;
          {
            py::gil_scoped_release release;
            r = scan(cfg);
          }
          py::dict classes;
          for (std::size_t i = 0; i < r.signals.size(); ++i)
            classes[py::str(signals[i])] = std::string(to_string(r.signals[i].classification));
          py::dict d;
          d["csv"] = scan_to_csv(cfg, r);
          d["classification"] = classes;
          d["failures"] = r.failures;
          return d;
        },
        py::arg("p"), py::arg("n_grid"), py::arg("signals"), py::arg("schedule") = "log",
        py::arg("lambda_hat") = true, py::arg("prior") = "rademacher", py::arg("mode") = "auto",
        py::arg("workers") = 0);
}

void bind_models(py::module_& m) {
  m.def("sample_null", [](unsigned p, std::uint64_t n, std::uint64_t seed) {
    return to_array(sample_null(p, n, seed, default_workers()));
  }, py::arg("p"), py::arg("n"), py::arg("seed"));

  m.def("sample_planted",
        [](unsigned p, std::uint64_t n, std::uint64_t seed, std::optional<std::string> lambda,
           std::optional<std::string> lambda_hat, const std::string& prior) {
          const PlantedSample s =
              sample_planted(model_from(p, n, lambda, lambda_hat, prior), seed, default_workers());
          return py::make_tuple(to_array(s.Y), py::array_t<double>(s.spike.size(), s.spike.data()));
        },
        py::arg("p"), py::arg("n"), py::arg("seed"), py::arg("lambda_") = py::none(),
        py::arg("lambda_hat") = py::none(), py::arg("prior") = "rademacher");

  m.def("symmetrize", [](py::array_t<double, py::array::c_style | py::array::forcecast> Y) {
    return Eigen::MatrixXd(symmetrize(from_array(Y)));
  }, py::arg("Y"));
}

void bind_detect(py::module_& m) {
  m.def("pca_threshold", &pca_threshold, py::arg("lambda_hat"));

  m.def("pca_test", [](py::array_t<double, py::array::c_style | py::array::forcecast> Y, double lambda_hat) {
    const PcaVerdict v = pca_test(from_array(Y), lambda_hat);
    return py::make_tuple(v.planted, v.lambda_max);
  }, py::arg("Y"), py::arg("lambda_hat"));

  m.def("trace_statistic", [](py::array_t<double, py::array::c_style | py::array::forcecast> Y) {
    return trace_statistic(from_array(Y));
  }, py::arg("Y"));
}

void bind_hermite(py::module_& m) {
  m.def("hermite_coeffs", [](unsigned k) {
    std::vector<py::int_> out;
    for (const auto& c : hermite_coeffs(k).coeffs) out.emplace_back(py::int_(py::str(to_string(c))));
    return out;
  }, py::arg("k"), "Integer coefficients of He_k, lowest degree first.");
  m.def("hermite_eval", &hermite_eval, py::arg("k"), py::arg("y"));
  m.def("hermite_eval_normalized", &hermite_eval_normalized, py::arg("k"), py::arg("y"));
}

void bind_bounds(py::module_& m) {
  m.def("subgaussian_moment_bound", &subgaussian_moment_bound, py::arg("sigma_sq"), py::arg("k"));
  m.def("paley_zygmund_bound", &paley_zygmund_bound, py::arg("EZ"), py::arg("EZ2"), py::arg("theta"));
  m.def("ldlr_lb_from_poly_test", [](double A, double B, unsigned k, unsigned d) {
    return ldlr_lb_from_poly_test(A, B, k, d).bound;
  }, py::arg("A"), py::arg("B"), py::arg("k"), py::arg("d"));
  m.def("oracle_suite_passes", [] {
    for (const auto& c : run_oracle_suite())
      if (!c.passed) return false;
    return true;
  });
}

PYBIND11_MODULE(_lowdeg, m) {
  m.doc() = "Low-degree likelihood ratio analysis for spiked Wigner and tensor models";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);
  py::register_exception<Unsupported>(m, "Unsupported", PyExc_NotImplementedError);

  bind_ldlr(m);
  bind_models(m);
  bind_detect(m);
  bind_hermite(m);
  bind_bounds(m);
}
