// Copyright 2026 The Storyloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"
#include "storyloop/metrics.hpp"
#include "storyloop/packing.hpp"
#include "storyloop/text.hpp"

namespace py = pybind11;
using namespace storyloop;

namespace {

TokenizerMode parse_mode(const std::string& mode) {
  if (mode == "metric") return TokenizerMode::kMetric;
  if (mode == "stats") return TokenizerMode::kStats;
  throw Error(ErrorCode::kInvalidArgument, "mode must be 'metric' or 'stats'");
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict report_dict(const EditMetricReport& r) {
  py::list spans;
  for (const auto& s : r.spans) {
    spans.append(py::make_tuple(s.start_x, s.start_y, s.length, s.counted));
  }
  py::dict d;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["matched_tokens"] = r.matched_tokens;
  d["spans"] = spans;
  return d;
}

TokenSequence metric_tokens(const std::string& text) {
  return tokenize(text, TokenizerMode::kMetric);
}

}  // namespace

PYBIND11_MODULE(_storyloop, m) {
  m.doc() = "Native core of the storyloop package";

  static py::exception<Error> error(m, "StoryloopError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object cls = error;
      py::object exc = cls(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("tokenize",
        [](const std::string& text, const std::string& mode) {
          return tokenize(text, parse_mode(mode)).tokens;
        },
        py::arg("text"), py::arg("mode") = "metric");

  m.def("truncate_sentences", [](const std::string& text, std::size_t n) {
    return truncate_sentences(text, n);
  });

  m.def("user_score",
        [](const std::string& generated, const std::string& published,
           bool remove_stopwords_first) {
          UserOptions opts;
          opts.remove_stopwords_first = remove_stopwords_first;
          return report_dict(user_score(metric_tokens(generated),
                                        metric_tokens(published),
                                        default_stopwords(), opts));
        },
        py::arg("generated"), py::arg("published"),
        py::arg("remove_stopwords_first") = false);

  m.def("rouge_l",
        [](const std::string& generated, const std::string& published) {
          return report_dict(
              rouge_l(metric_tokens(generated), metric_tokens(published)));
        },
        py::arg("generated"), py::arg("published"));

  m.def("rouge_w",
        [](const std::string& generated, const std::string& published,
           double alpha) {
          return report_dict(rouge_w(metric_tokens(generated),
                                     metric_tokens(published), alpha));
        },
        py::arg("generated"), py::arg("published"),
        py::arg("alpha") = kDefaultRougeWAlpha);

  m.def("diff",
        [](const std::string& generated, const std::string& edited) {
          py::list out;
          for (const auto& s : diff_segments(generated, edited)) {
            out.append(py::make_tuple(std::string(diff_class_name(s.kind)), s.text));
          }
          return out;
        },
        py::arg("generated"), py::arg("edited"));

  m.def("pearson", [](const std::vector<double>& a, const std::vector<double>& b) {
    return pearson_r(a, b).r;
  });

  m.def("fleiss_kappa", [](std::vector<std::vector<int>> rows) {
    return fleiss_kappa(RatingsMatrix(std::move(rows)));
  });

  m.def("solve_policy",
        [](const std::string& policy_text,
           const std::map<std::string, std::int64_t>& lengths,
           std::optional<std::int64_t> budget) {
          const auto policy = packing::Policy::parse(policy_text);
          const auto specs = policy.declared_specs(lengths);
          const auto constraints = policy.instantiate(specs, true);
          return packing::solve(specs, constraints,
                                budget ? *budget : policy.budget, policy.reserve)
              .lengths;
        },
        py::arg("policy"), py::arg("lengths"), py::arg("budget") = py::none());

  m.def("split",
        [](const std::vector<std::pair<std::string, std::int64_t>>& weights,
           const std::string& ratios, std::uint64_t seed) {
          return from_json(dataset::to_json(
              dataset::split_weights(weights, dataset::SplitRatios::parse(ratios), seed)));
        },
        py::arg("weights"), py::arg("ratios") = "8:1:1", py::arg("seed") = 0);

  m.def("corpus_stats", [](const std::string& dir) {
    return from_json(dataset::to_json(dataset::compute_stats(dataset::load_corpus(dir))));
  });
}
