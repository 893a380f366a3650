#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <tuple>

#include "pardpp/dpp_model.hpp"
#include "pardpp/errors.hpp"
#include "pardpp/planar.hpp"
#include "pardpp/samplers.hpp"
#include "pardpp/validation.hpp"

namespace py = pybind11;
using namespace pardpp;

namespace {

// pybind11 holders cannot point to const; models are never mutated.
using Model = std::shared_ptr<DppModel>;

Model make_model(const Matrix& l, std::optional<int> k,
                 std::optional<std::vector<std::vector<int>>> blocks,
                 std::optional<std::vector<int>> quotas) {
  Constraint c;
  if (k && blocks) throw InvalidArgument("k and blocks are exclusive");
  if (k) c = Constraint::cardinality(*k);
  if (blocks) {
    if (!quotas) throw InvalidArgument("blocks need quotas");
    c = Constraint::partition(*blocks, *quotas);
  }
  return std::const_pointer_cast<DppModel>(DppModel::make(EnsembleMatrix(l), std::move(c)));
}

py::dict result_dict(const SampleResult& r) {
  py::dict d;
  d["sample"] = r.sample;
  d["adaptive_rounds"] = r.meter.adaptive_rounds;
  d["proposal_work"] = r.meter.proposal_work;
  d["max_width"] = r.meter.max_width;
  d["status"] = std::string(to_string(r.status));
  d["eps"] = r.eps;
  return d;
}

// Sets become tuples so they can key a Python dict.
py::dict to_dict(const ExactDistribution& d) {
  py::dict out;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    out[py::tuple(py::cast(d.support[i]))] = d.probabilities[i];
  }
  return out;
}

ExactDistribution from_dict(const py::dict& m) {
  ExactDistribution d;
  for (const auto& [s, p] : m) {
    d.support.push_back(normalized(s.cast<std::vector<int>>()));
    d.probabilities.push_back(p.cast<double>());
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_pardpp, m) {
  m.doc() = "Parallel sampling for determinantal point processes and planar matchings";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<DppModel, Model>(m, "Model")
      .def(py::init(&make_model), py::arg("matrix"), py::arg("k") = py::none(),
           py::arg("blocks") = py::none(), py::arg("quotas") = py::none())
      .def_property_readonly("ground_size", &DppModel::ground_size)
      .def_property_readonly("target_size", &DppModel::target_size)
      .def_property_readonly("matrix", [](const DppModel& d) { return d.ensemble().matrix(); })
      .def("kernel", [](const DppModel& d) { return d.kernel().matrix(); })
      .def(
          "count",
          [](const DppModel& d, std::vector<int> given) { return d.count(normalized(given)); },
          py::arg("given") = std::vector<int>{})
      .def(
          "marginal",
          [](const DppModel& d, int i, std::vector<int> given) {
            return marginal(d, i, given);
          },
          py::arg("i"), py::arg("given") = std::vector<int>{})
      .def("size_distribution", [](const DppModel& d) { return size_distribution(d); })
      .def("describe", &DppModel::describe)
      .def("__repr__", [](const DppModel& d) { return "<pardpp.Model " + d.describe() + ">"; });

  m.def(
      "load_model",
      [](const std::string& path) { return std::const_pointer_cast<DppModel>(load_model(path)); },
      py::arg("path"));

  m.def(
      "sample",
      [](const Model& model, const std::string& sampler, std::uint64_t seed, int samples,
         double eps, double c, int workers) {
        SamplerConfig config;
        config.seed = seed;
        config.eps = eps;
        config.c = c;
        config.workers = workers;
        config.validate();
        Sampler s(model, parse_sampler_kind(sampler), config);
        py::list out;
        for (int i = 0; i < samples; ++i) {
          SampleResult r;
          {
            py::gil_scoped_release release;
            r = s.draw(derive_key(seed, {static_cast<std::uint64_t>(i)}));
          }
          py::dict d = result_dict(r);
          d["sampler"] = std::string(to_string(s.resolved_kind()));
          out.append(d);
        }
        return out;
      },
      py::arg("model"), py::arg("sampler") = "auto", py::arg("seed") = 0,
      py::arg("samples") = 1, py::arg("eps") = 0.05, py::arg("c") = 0.1,
      py::arg("workers") = 1);

  m.def(
      "brute_force_distribution",
      [](const Model& model) { return to_dict(brute_force_distribution(*model)); },
      py::arg("model"));
  m.def(
      "empirical_distribution",
      [](const std::vector<std::vector<int>>& samples) {
        return to_dict(empirical_distribution(samples));
      },
      py::arg("samples"));
  m.def(
      "tv_distance",
      [](const py::dict& a, const py::dict& b) {
        return tv_distance(from_dict(a), from_dict(b));
      },
      py::arg("a"), py::arg("b"));
  m.def("statistical_tv_tolerance", &statistical_tv_tolerance, py::arg("support_size"),
        py::arg("samples"));
  m.def(
      "kl_divergence",
      [](const std::vector<double>& q, const std::vector<double>& p) {
        return kl_divergence(q, p);
      },
      py::arg("q"), py::arg("p"));
  m.def(
      "renyi_divergence",
      [](const std::vector<double>& q, const std::vector<double>& p, double lambda) {
        return renyi_divergence(q, p, lambda);
      },
      py::arg("q"), py::arg("p"), py::arg("lam"));
  m.def("duplicate_probability", &duplicate_probability, py::arg("k"), py::arg("l"),
        py::arg("t"));

  py::class_<PlanarGraph>(m, "PlanarGraph")
      .def(py::init<int, std::vector<GraphEdge>>(), py::arg("n"), py::arg("edges"))
      .def_static("grid", &PlanarGraph::grid, py::arg("rows"), py::arg("cols"))
      .def_static("path", &PlanarGraph::path, py::arg("n"))
      .def_static("cycle", &PlanarGraph::cycle, py::arg("n"))
      .def_property_readonly("n", &PlanarGraph::size)
      .def_property_readonly("edges", &PlanarGraph::edges)
      .def_property_readonly("rotation", &PlanarGraph::rotation);

  m.def("read_graph", &read_graph_file, py::arg("path"));
  m.def("count_matchings", &count_matchings, py::arg("graph"));
  m.def(
      "edge_marginal",
      [](const PlanarGraph& g, int v, const std::vector<GraphEdge>& matched) {
        return edge_marginal(g, v, matched);
      },
      py::arg("graph"), py::arg("v"), py::arg("matched") = std::vector<GraphEdge>{});
  m.def(
      "find_separator",
      [](const PlanarGraph& g) {
        const Separator s = find_separator(g);
        return std::make_tuple(s.separator, s.side1, s.side2);
      },
      py::arg("graph"));
  m.def(
      "sample_matching",
      [](const PlanarGraph& g, std::uint64_t seed, int samples) {
        MatchingSampler sampler(g);
        py::list out;
        for (int i = 0; i < samples; ++i) {
          const MatchingSample s = sampler.draw(derive_key(seed, {static_cast<std::uint64_t>(i)}));
          py::dict d;
          d["edges"] = s.edges;
          d["adaptive_rounds"] = s.meter.adaptive_rounds;
          d["proposal_work"] = s.meter.proposal_work;
          out.append(d);
        }
        return out;
      },
      py::arg("graph"), py::arg("seed") = 0, py::arg("samples") = 1);
}
