// Python bindings. Documents cross the boundary as JSON text so Python sees
// exactly what the command-line tool writes.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "roomgroup/bedmap.hpp"
#include "roomgroup/catalog.hpp"
#include "roomgroup/clustering.hpp"
#include "roomgroup/errors.hpp"
#include "roomgroup/linalg.hpp"
#include "roomgroup/metrics.hpp"
#include "roomgroup/pipeline.hpp"
#include "roomgroup/room_typing.hpp"
#include "roomgroup/synthgen.hpp"

namespace py = pybind11;
using namespace roomgroup;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) fail(ErrorKind::DimensionMismatch, "expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  auto view = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = view(i, j);
  return m;
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return out;
}

std::vector<std::string> default_ids(std::size_t n, std::vector<std::string> ids) {
  if (!ids.empty()) return ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

OverlapMatrix overlap(const Array& scores, std::vector<std::string> ids) {
  Matrix m = to_matrix(scores);
  ids = default_ids(m.rows(), std::move(ids));
  return OverlapMatrix(std::move(ids), std::move(m));
}

py::dict grouping_dict(const Grouping& g) {
  py::dict d;
  d["groups"] = g.groups;
  d["unassigned"] = g.unassigned;
  return d;
}

RuleTable rules_from(const std::string& rules_json) {
  return rules_json.empty() ? RuleTable::defaults() : parse_rules(rules_json);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Room grouping engine";

  // Message carries the failure class first: "SchemaViolation: ...".
  static PyObject* error_type = nullptr;
  error_type = py::exception<Error>(m, "RoomgroupError").ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(error_kind_name(e.kind())) + ": " + e.what();
      PyErr_SetString(error_type, msg.c_str());
    }
  });

  m.def(
      "classify_room_type",
      [](std::vector<std::string> scenes, std::vector<std::string> concepts,
         std::vector<std::string> objects, const std::string& rules_json) {
        const TagSet tags = canonicalize({std::move(scenes), std::move(concepts), std::move(objects)});
        return std::string(room_type_name(classify_room_type(tags, rules_from(rules_json))));
      },
      py::arg("scenes"), py::arg("concepts") = std::vector<std::string>{},
      py::arg("objects") = std::vector<std::string>{}, py::arg("rules_json") = "",
      "Room type name for one image's tags.");

  m.def("adjusted_rand_index", &adjusted_rand_index, py::arg("truth"), py::arg("pred"));
  m.def("normalized_ari", &normalized_ari, py::arg("truth"), py::arg("pred"));
  m.def(
      "v_measure",
      [](const LabelVector& truth, const LabelVector& pred) {
        const VMeasure v = v_measure(truth, pred);
        py::dict d;
        d["homogeneity"] = v.homogeneity;
        d["completeness"] = v.completeness;
        d["v_measure"] = v.v;
        return d;
      },
      py::arg("truth"), py::arg("pred"));

  m.def(
      "jacobi_eigen",
      [](const Array& s, double tol, std::size_t max_sweeps) {
        const auto e = jacobi_eigen(to_matrix(s), {tol, max_sweeps});
        Matrix column(e.values.size(), 1);
        for (std::size_t i = 0; i < e.values.size(); ++i) column(i, 0) = e.values[i];
        return py::make_tuple(to_array(column).attr("ravel")(), to_array(e.vectors));
      },
      py::arg("matrix"), py::arg("tol") = 1e-10, py::arg("max_sweeps") = 100,
      "Ascending eigenvalues and column eigenvectors of a symmetric matrix.");

  m.def(
      "normalized_laplacian",
      [](const Array& w, double eps) { return to_array(normalized_laplacian(overlap(w, {}), eps)); },
      py::arg("scores"), py::arg("eps") = 1e-12);

  m.def(
      "spectral_cluster",
      [](const Array& scores, std::size_t k, std::uint64_t seed, std::vector<std::string> ids) {
        SpectralParams params;
        params.k = k;
        params.seed = seed;
        return grouping_dict(spectral_cluster(overlap(scores, std::move(ids)), params));
      },
      py::arg("scores"), py::arg("k"), py::arg("seed") = 0,
      py::arg("ids") = std::vector<std::string>{});

  m.def(
      "remove_noise",
      [](const Array& scores, std::vector<std::vector<std::string>> groups, double tau,
         std::vector<std::string> ids) {
        Grouping g;
        g.groups = std::move(groups);
        return grouping_dict(remove_noise(g, overlap(scores, std::move(ids)), tau));
      },
      py::arg("scores"), py::arg("groups"), py::arg("tau") = 0.5,
      py::arg("ids") = std::vector<std::string>{});

  m.def(
      "generate_property",
      [](std::map<std::string, int> rooms, int images_min, int images_max, double noise,
         std::uint64_t seed) {
        SynthConfig cfg;
        cfg.rooms_per_type.clear();
        for (const auto& [name, count] : rooms) {
          const auto type = parse_room_type(canonical_label(name));
          cfg.rooms_per_type[type ? std::string(room_type_name(*type)) : name] = count;
        }
        cfg.images_min = images_min;
        cfg.images_max = images_max;
        cfg.score_noise_sigma = noise;
        cfg.seed = seed;
        const SyntheticProperty p = generate_property(cfg);
        return py::make_tuple(serialize_catalog(p.catalog), serialize_truth(p.truth));
      },
      py::arg("rooms"), py::arg("images_min") = 2, py::arg("images_max") = 5, py::arg("noise") = 0.0,
      py::arg("seed") = 0, "Returns (catalog_json, truth_json).");

  m.def(
      "run_pipeline",
      [](const std::string& catalog_json, const std::string& truth_json, const std::string& scores_csv,
         const std::string& predictor, double noise, std::uint64_t seed, double tau) {
        const PropertyCatalog catalog = parse_catalog(catalog_json);
        std::unique_ptr<ScorerBackend> backend;
        std::optional<GroundTruth> truth;
        if (!truth_json.empty()) truth = parse_truth(truth_json);
        if (!scores_csv.empty()) {
          backend = std::make_unique<PrecomputedScores>(parse_pair_scores(scores_csv));
        } else if (truth) {
          SynthConfig cfg;
          cfg.score_noise_sigma = noise;
          cfg.seed = seed;
          backend = std::make_unique<SyntheticOracle>(*truth, cfg);
        } else {
          fail(ErrorKind::ConfigError, "run_pipeline needs scores_csv or truth_json");
        }
        PipelineOptions options;
        options.seed = seed;
        options.tau = tau;
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(catalog, *backend, nullptr, options);
        }
        if (predictor == "oracle") {
          if (!truth) fail(ErrorKind::ConfigError, "the oracle predictor needs truth_json");
          OracleFromTruth oracle(bed_truth_for_groups(r.output, *truth));
          map_bedrooms(r.output, catalog, oracle, &r.diagnostics);
        } else if (predictor == "first-option") {
          FirstOption first;
          map_bedrooms(r.output, catalog, first, &r.diagnostics);
        } else if (predictor != "none") {
          fail(ErrorKind::ConfigError, "unknown predictor '" + predictor + "'");
        }
        std::vector<std::string> diagnostics;
        for (const auto& d : r.diagnostics.records()) diagnostics.push_back(to_json_line(d));
        return py::make_tuple(serialize_grouping(r.output), diagnostics);
      },
      py::arg("catalog_json"), py::arg("truth_json") = "", py::arg("scores_csv") = "",
      py::arg("predictor") = "first-option", py::arg("noise") = 0.0, py::arg("seed") = 0,
      py::arg("tau") = 0.5, "Returns (grouping_json, diagnostic_json_lines).");

  m.def(
      "evaluate",
      [](const std::vector<std::string>& predictions, const std::vector<std::string>& truths) {
        std::vector<GroupingOutput> preds;
        for (const auto& p : predictions) preds.push_back(parse_grouping(p));
        std::vector<GroundTruth> ts;
        for (const auto& t : truths) ts.push_back(parse_truth(t));
        return serialize_report(evaluate(preds, ts));
      },
      py::arg("predictions"), py::arg("truths"), "Metric report as JSON text.");
}
