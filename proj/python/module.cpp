#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chartfc/errors.hpp"
#include "chartfc/pipeline.hpp"
#include "chartfc/text.hpp"

namespace py = pybind11;
using namespace chartfc;

namespace {

RunConfig config_from_dict(const py::dict& d) {
  RunConfig cfg;
  for (const auto& item : d) {
    const std::string key = py::cast<std::string>(item.first);
    std::string value;
    if (py::isinstance<py::bool_>(item.second))
      value = py::cast<bool>(item.second) ? "true" : "false";
    else
      value = py::cast<std::string>(py::str(item.second));
    cfg.set(key, value);
  }
  return cfg;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["total"] = m.total;
  d["correct"] = m.correct;
  d["accuracy"] = m.accuracy;
  d["macro_f1"] = m.macro_f1;
  d["supports_f1"] = m.supports.f1;
  d["refutes_f1"] = m.refutes.f1;
  return d;
}

}  // namespace

PYBIND11_MODULE(chartfc, m) {
  m.doc() = "bar chart fact checking pipeline";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<Error>(m, "PipelineError", PyExc_RuntimeError);

  m.def("tokenize", [](const std::string& text) {
    const TokenizedText t = tokenize_lemmatize(text);
    return py::make_tuple(t.tokens, t.lemmas);
  }, py::arg("text"), "split text into lowercase tokens and their lemmas");

  m.def("levenshtein", [](const std::string& a, const std::string& b) {
    return levenshtein(a, b);
  }, py::arg("a"), py::arg("b"), "edit distance between two strings");

  m.def("generate", [](const std::string& seed_dir, const std::string& out_dir,
                       const py::dict& config) {
    const GenerateStats st = generate_dataset(seed_dir, out_dir, config_from_dict(config));
    py::dict d;
    d["written"] = st.written;
    d["rejected"] = st.rejected;
    d["style_seed"] = st.style_seed;
    d["split_seed"] = st.split_seed;
    return d;
  }, py::arg("seed_dir"), py::arg("out_dir"), py::arg("config") = py::dict(),
     "build a chart dataset from seed tables and claims");

  m.def("render", [](const std::string& dataset_dir) {
    return render_dataset(dataset_dir, "");
  }, py::arg("dataset_dir"), "re-render chart images from stored sidecars");

  m.def("read", [](const std::string& dataset_dir, const py::dict& config) {
    const RunConfig cfg = config_from_dict(config);
    return read_dataset(dataset_dir, reader_from_config(cfg), "");
  }, py::arg("dataset_dir"), py::arg("config") = py::dict(),
     "extract text regions from every chart in a dataset");

  m.def("seqgen", [](const std::string& dataset_dir, const std::string& template_name,
                     const py::dict& config) {
    const RunConfig cfg = config_from_dict(config);
    const SeqgenStats st =
        seqgen_dataset(dataset_dir, template_from_string(template_name),
                       reader_from_config(cfg));
    py::dict d;
    d["written"] = st.written;
    d["failed"] = st.failed;
    return d;
  }, py::arg("dataset_dir"), py::arg("template") = "tmp1",
     py::arg("config") = py::dict(), "serialize chart text to token sequences");

  m.def("encode", [](const std::string& dataset_dir, const std::string& template_name,
                     int max_len, int min_count, const py::dict& config) {
    const RunConfig cfg = config_from_dict(config);
    const EncodeStats st = encode_dataset(dataset_dir, template_name, max_len, min_count,
                                          reader_from_config(cfg));
    py::dict d;
    d["written"] = st.written;
    d["vocab_size"] = st.vocab_size;
    d["max_len"] = st.max_len;
    return d;
  }, py::arg("dataset_dir"), py::arg("template") = "tmp1", py::arg("max_len") = 256,
     py::arg("min_count") = 1, py::arg("config") = py::dict(),
     "encode claims and chart sequences as model inputs");

  m.def("train", [](const std::string& dataset_dir, const std::string& out_dir,
                    const py::dict& config) {
    const TrainArtifacts art = train_command(dataset_dir, out_dir, config_from_dict(config));
    py::dict d;
    d["checkpoint"] = art.checkpoint_path;
    d["baseline_valid_acc"] = art.result.baseline_valid_acc;
    d["best_epoch"] = art.result.best_epoch;
    d["best_valid_acc"] = art.result.best_valid_acc;
    py::list history;
    for (const EpochStats& e : art.result.history) {
      py::dict row;
      row["epoch"] = e.epoch;
      row["train_loss"] = e.train_loss;
      row["valid_acc"] = e.valid_acc;
      history.append(row);
    }
    d["history"] = history;
    return d;
  }, py::arg("dataset_dir"), py::arg("out_dir"), py::arg("config") = py::dict(),
     "train a verification model and store the best checkpoint");

  m.def("evaluate", [](const std::string& checkpoint, const std::string& dataset_dir,
                       const std::string& split) {
    return metrics_dict(eval_command(checkpoint, dataset_dir, split, ""));
  }, py::arg("checkpoint"), py::arg("dataset_dir"), py::arg("split") = "test",
     "evaluate a stored checkpoint on one dataset split");

  m.def("curve", [](const std::string& dataset_dir, const std::string& out_dir,
                    const py::dict& config) {
    const auto points = curve_command(dataset_dir, out_dir, config_from_dict(config));
    py::list out;
    for (const CurvePoint& p : points) {
      py::dict row;
      row["fraction"] = p.fraction;
      row["train_size"] = p.train_size;
      row["test_accuracy"] = p.test_accuracy;
      out.append(row);
    }
    return out;
  }, py::arg("dataset_dir"), py::arg("out_dir"), py::arg("config") = py::dict(),
     "test accuracy as a function of train subset size");
}
