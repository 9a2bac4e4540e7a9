#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ccprobe/errors.hpp"
#include "ccprobe/metrics.hpp"
#include "ccprobe/pipeline.hpp"
#include "ccprobe/prompt_engine.hpp"
#include "ccprobe/synthetic.hpp"

namespace py = pybind11;
using namespace ccprobe;

namespace {

RelationKind relation_arg(const std::string& name) {
  auto r = parse_relation(name);
  if (!r) throw PreconditionError("unknown relation: " + name);
  return *r;
}

Polarity polarity_arg(const std::string& name) {
  auto p = parse_polarity(name);
  if (!p) throw PreconditionError("unknown polarity: " + name);
  return *p;
}

Fact make_fact(const std::string& c1, const std::string& relation, const std::string& c2,
               const std::string& polarity) {
  return Fact{Concept(c1), relation_arg(relation), Concept(c2), polarity_arg(polarity)};
}

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ccprobe core bindings";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError");
  auto data_error = py::register_exception<DataError>(m, "DataError");
  py::register_exception<ParseError>(m, "ParseError", data_error);
  py::register_exception<IncompatibleVersionError>(m, "IncompatibleVersionError", data_error);
  auto backend_error = py::register_exception<BackendError>(m, "BackendError");
  py::register_exception<ScoringError>(m, "ScoringError", backend_error);
  py::register_exception<ProtocolError>(m, "ProtocolError", backend_error);
  py::register_exception<MockProtocolError>(m, "MockProtocolError", backend_error);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", PyExc_ArithmeticError);

  m.def("relations", [] {
    std::vector<std::string> out;
    for (auto r : kAllRelations) out.emplace_back(relation_name(r));
    return out;
  });

  m.def(
      "average_precision",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return average_precision(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "precision_recall_curve",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& p : precision_recall_curve(scores, labels)) {
          out.emplace_back(p.threshold, p.precision, p.recall);
        }
        return out;
      },
      py::arg("scores"), py::arg("labels"));

  py::class_<BackgroundScore>(m, "BackgroundScore")
      .def(py::init([](std::uint64_t pc, std::uint64_t pt, std::uint64_t nc, std::uint64_t nt) {
             if (pc > pt || nc > nt) throw PreconditionError("correct count exceeds total");
             return BackgroundScore{pc, pt, nc, nt};
           }),
           py::arg("positive_correct"), py::arg("positive_total"), py::arg("negative_correct"),
           py::arg("negative_total"))
      .def_readonly("positive_correct", &BackgroundScore::positive_correct)
      .def_readonly("positive_total", &BackgroundScore::positive_total)
      .def_readonly("negative_correct", &BackgroundScore::negative_correct)
      .def_readonly("negative_total", &BackgroundScore::negative_total)
      .def_property_readonly("positive_acc", &BackgroundScore::positive_acc)
      .def_property_readonly("negative_acc", &BackgroundScore::negative_acc)
      .def_property_readonly("s_b", &BackgroundScore::s_b)
      .def_property_readonly("s_b_fraction", &BackgroundScore::s_b_rational);

  m.def(
      "render_fact_question",
      [](const std::string& c1, const std::string& relation, const std::string& c2) {
        return render_fact_question(make_fact(c1, relation, c2, "positive"));
      },
      py::arg("c1"), py::arg("relation"), py::arg("c2"));

  m.def(
      "fact_prompts",
      [](const std::string& c1, const std::string& relation, const std::string& c2,
         const std::string& polarity) {
        std::vector<py::dict> out;
        for (const auto& v : enumerate_fact_variants(make_fact(c1, relation, c2, polarity))) {
          py::dict d;
          d["meta_prompt"] = v.meta_prompt_id;
          d["answer_pair"] = v.answer_pair_id;
          d["word"] = v.candidate_word;
          d["polarity"] = std::string(polarity_name(*v.candidate_polarity));
          d["prompt"] = v.prompt_text;
          out.push_back(std::move(d));
        }
        return out;
      },
      py::arg("c1"), py::arg("relation"), py::arg("c2"), py::arg("polarity") = "positive");

  m.def(
      "write_synthetic",
      [](const std::filesystem::path& dir, std::uint64_t seed, std::size_t anchors,
         std::uint64_t run_seed) {
        SynthOptions o;
        o.seed = seed;
        o.anchors = anchors;
        return write_synthetic(generate_synthetic(o), dir, run_seed).config;
      },
      py::arg("dir"), py::arg("seed") = 1, py::arg("anchors") = 100, py::arg("run_seed") = 1,
      "Writes a synthetic corpus and returns the path of its run config.");

  m.def(
      "run",
      [](const std::filesystem::path& config_path, const std::string& stages,
         std::optional<std::size_t> jobs) {
        auto config = load_config(config_path);
        config.stages = parse_stage_selection(stages);
        if (jobs) config.jobs = *jobs;
        RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = Pipeline(config).run();
        }
        return to_python(manifest.to_json());
      },
      py::arg("config"), py::arg("stages") = "all", py::arg("jobs") = py::none(),
      "Runs the selected stages and returns the run manifest.");
}
