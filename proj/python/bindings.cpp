// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <filesystem>
#include <utility>

#include "lgi/checkpoint.hpp"
#include "lgi/data_synth.hpp"
#include "lgi/errors.hpp"
#include "lgi/gradcheck_suite.hpp"
#include "lgi/grounding_head.hpp"
#include "lgi/losses.hpp"
#include "lgi/metrics.hpp"
#include "lgi/trainer.hpp"

namespace py = pybind11;

namespace lgi {
namespace {

using Pair = std::pair<double, double>;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Interval to_interval(const Pair& p) { return {p.first, p.second}; }
Pair to_pair(const Interval& i) { return {i.start, i.end}; }

std::vector<Interval> to_intervals(const std::vector<Pair>& pairs) {
  std::vector<Interval> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(to_interval(p));
  return out;
}

// nlohmann::json <-> Python objects through the json module keeps the
// bindings free of a hand-written converter.
py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& o) {
  if (o.is_none()) return nlohmann::json::object();
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Tensor matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeMismatch("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Tensor({rows, cols}, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

FeatureMatrix features(const Array& a) {
  if (a.ndim() != 2) throw ShapeMismatch("features must be [frames, d_v]");
  FeatureMatrix f;
  f.frames = static_cast<std::uint32_t>(a.shape(0));
  f.dims = static_cast<std::uint32_t>(a.shape(1));
  f.values.assign(a.data(), a.data() + a.size());
  return f;
}

Array features_array(const FeatureMatrix& f) {
  Array out({static_cast<py::ssize_t>(f.frames), static_cast<py::ssize_t>(f.dims)});
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

py::dict report_dict(const EvalReport& r) { return to_python(to_json(r)); }

py::dict sample_dict(const GroundingSample& s) {
  py::dict d;
  d["video_id"] = s.video_id;
  d["tokens"] = s.tokens;
  d["gt"] = to_pair(s.gt);
  d["features"] = features_array(s.features);
  return d;
}

class Model {
 public:
  Model(const py::object& config, std::uint64_t seed, std::vector<std::string> tokens)
      : config_(from_python(config).get<ModelConfig>()) {
    for (const auto& t : tokens) vocab_.add(t);
    config_.vocab_size = vocab_.size();
    params_ = ModelParams::init(config_, seed);
  }

  static Model load(const std::filesystem::path& path) {
    Checkpoint ck = load_checkpoint(path);
    return Model(ck.config.model, std::move(ck.vocab), std::move(ck.params));
  }

  py::dict predict(const std::string& query, const Array& raw) const {
    const auto tokens = tokenize(query);
    if (tokens.empty()) throw EmptyQuery("query has no tokens");
    const auto ids = vocab_.encode(tokens);
    const SampledVideo video = sample_segments(features(raw), config_.segments);
    NoGradGuard no_grad;
    const ForwardOutput out = forward(params_, config_, {ids, video.features, video.valid});
    py::dict d;
    d["interval"] = to_pair(canonicalize(out.prediction.start(), out.prediction.end()));
    d["raw"] = Pair{out.prediction.start(), out.prediction.end()};
    d["temporal_attention"] = to_array(out.prediction.attention);
    if (out.phrases.attn.defined()) d["query_attention"] = to_array(out.phrases.attn);
    return d;
  }

  py::dict config() const { return to_python(nlohmann::json(config_)); }
  std::size_t parameter_count() const { return param_count(params_.named()); }
  std::map<std::string, std::size_t> census() const { return param_census(params_); }

 private:
  Model(ModelConfig config, Vocabulary vocab, ModelParams params)
      : config_(config), vocab_(std::move(vocab)), params_(std::move(params)) {}

  ModelConfig config_;
  Vocabulary vocab_;
  ModelParams params_;
};

py::dict train_corpus(const std::filesystem::path& data, const py::object& config,
                      const std::optional<std::filesystem::path>& out) {
  const LoadedCorpus corpus = load_corpus(data);
  if (corpus.train.empty() || corpus.val.empty()) throw InvariantViolation("corpus split is empty");
  nlohmann::json j = from_python(config);
  j["vocab_size"] = corpus.vocab.size();
  j["d_v"] = corpus.train.front().features.dims;
  const TrainConfig cfg = j.get<TrainConfig>();
  const auto train_set = prepare(corpus.train, corpus.vocab, cfg.model.segments);
  const auto val_set = prepare(corpus.val, corpus.vocab, cfg.model.segments);
  TrainOptions options;
  if (out) {
    std::filesystem::create_directories(*out);
    options.checkpoint_path = *out / "checkpoint.bin";
    options.log_path = *out / "metrics.jsonl";
  }
  TrainResult result;
  {
    py::gil_scoped_release release;
    result = train(cfg, train_set, val_set, corpus.vocab, options);
  }
  py::list history;
  for (const auto& e : result.history) history.append(to_python(to_json(e)));
  py::dict d;
  d["best_epoch"] = result.best_epoch;
  d["best_val"] = report_dict(result.best_val);
  d["history"] = history;
  d["config"] = to_python(nlohmann::json(cfg));
  return d;
}

}  // namespace
}  // namespace lgi

PYBIND11_MODULE(lgi_grounding, m) {
  using namespace lgi;
  m.doc() = "Local-global video-text interaction model for temporal grounding";

  auto base = py::register_exception<Error>(m, "LgiError", PyExc_RuntimeError);
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", data.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("tokenize", [](const std::string& s) { return tokenize(s); });
  m.def("tiou", [](const Pair& a, const Pair& b) { return tiou(to_interval(a), to_interval(b)); });
  m.def("canonicalize", [](double s, double e) { return to_pair(canonicalize(s, e)); });
  m.def(
      "evaluate",
      [](const std::vector<Pair>& predictions, const std::vector<Pair>& truths,
         const std::vector<double>& thresholds) {
        const auto p = to_intervals(predictions);
        const auto t = to_intervals(truths);
        return report_dict(evaluate(p, t, thresholds));
      },
      py::arg("predictions"), py::arg("truths"), py::arg("thresholds") = kDefaultThresholds);
  m.def("fit_center_prior", [](const std::vector<Pair>& truths) {
    const auto t = to_intervals(truths);
    return to_pair(fit_center_prior(t));
  });

  m.def("loss_reg", [](const Pair& pred, const Pair& truth) {
    return loss_reg(Tensor({2, 1}, {pred.first, pred.second}), to_interval(truth)).item();
  });
  m.def("temporal_guide", [](const Pair& truth, std::size_t steps) {
    return temporal_guide(to_interval(truth), steps);
  });
  m.def("loss_tag", [](const std::vector<double>& attention, const std::vector<double>& guide) {
    return loss_tag(Tensor({1, attention.size()}, attention), guide).item();
  });
  m.def("loss_dqa", [](const Array& attn, double lambda) { return loss_dqa(matrix(attn), lambda).item(); },
        py::arg("attn"), py::arg("lambda_"));
  m.def("attention_overlap", [](const Array& attn) { return attention_overlap(matrix(attn)); });
  m.def("sample_segments", [](const Array& raw, std::size_t steps) {
    const SampledVideo v = sample_segments(features(raw), steps);
    return std::make_pair(to_array(v.features), v.valid);
  });

  m.def(
      "generate_corpus",
      [](const std::filesystem::path& out, std::size_t n_train, std::size_t n_val,
         const py::object& config) {
        const Corpus corpus = generate(from_python(config).get<SynthConfig>(), n_train, n_val);
        save_corpus(corpus, out);
        return to_python(corpus.manifest);
      },
      py::arg("out"), py::arg("n_train"), py::arg("n_val"), py::arg("config") = py::none());
  m.def("load_split", [](const std::filesystem::path& annotations, const std::filesystem::path& features_dir) {
    py::list out;
    for (const auto& s : load_split(annotations, features_dir)) out.append(sample_dict(s));
    return out;
  });

  m.def("train", &train_corpus, py::arg("data"), py::arg("config") = py::none(),
        py::arg("out") = py::none());

  m.def(
      "gradcheck",
      [](std::size_t points, std::uint64_t seed, double eps) {
        std::vector<GradCheckCase> cases;
        {
          py::gil_scoped_release release;
          cases = check_primitives(points, seed, eps);
          for (auto& c : check_models({}, seed, eps)) cases.push_back(std::move(c));
        }
        std::map<std::string, double> out;
        for (const auto& c : cases) out[c.name] = c.max_rel_error;
        return out;
      },
      py::arg("points") = 5, py::arg("seed") = 1, py::arg("eps") = 1e-5);

  py::class_<Model>(m, "Model")
      .def(py::init<const py::object&, std::uint64_t, std::vector<std::string>>(),
           py::arg("config") = py::none(), py::arg("seed") = 1,
           py::arg("vocabulary") = std::vector<std::string>{})
      .def_static("load", &Model::load)
      .def("predict", &Model::predict, py::arg("query"), py::arg("features"))
      .def_property_readonly("config", &Model::config)
      .def_property_readonly("parameter_count", &Model::parameter_count)
      .def("census", &Model::census);
}
