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

#include "storyloop/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"
#include "storyloop/metrics.hpp"
#include "storyloop/packing.hpp"
#include "storyloop/service.hpp"
#include "storyloop/text.hpp"
#include "storyloop/topics.hpp"

namespace storyloop::cli {
namespace {

using nlohmann::json;

std::string fixed6(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << content;
}

json report_json(const EditMetricReport& r) {
  return {{"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"matched_tokens", r.matched_tokens}};
}

void print_scores(std::ostream& out, const PairScores& s) {
  const std::pair<const char*, const EditMetricReport*> rows[] = {
      {"user", &s.user}, {"rouge_l", &s.rouge_l}, {"rouge_w", &s.rouge_w}};
  for (const auto& [name, r] : rows) {
    out << name << "_precision " << fixed6(r->precision) << "\n";
    out << name << "_recall " << fixed6(r->recall) << "\n";
    out << name << "_f1 " << fixed6(r->f1) << "\n";
  }
}

std::map<std::string, std::int64_t> parse_lengths(const std::string& text) {
  std::map<std::string, std::int64_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kParseError, "length '" + item + "' is not name=N");
    }
    try {
      std::size_t used = 0;
      const std::string num = item.substr(eq + 1);
      const long long v = std::stoll(num, &used);
      if (used != num.size() || v < 0) throw std::invalid_argument(num);
      out[item.substr(0, eq)] = v;
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::kParseError, "length '" + item + "' is not name=N");
    } catch (const std::out_of_range&) {
      throw Error(ErrorCode::kParseError, "length '" + item + "' is too large");
    }
  }
  return out;
}

std::function<void()> g_stop;

extern "C" void handle_signal(int) {
  if (g_stop) g_stop();
}

void wait_for_signal(std::function<void()> stop) {
  g_stop = std::move(stop);
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"storyloop: story-generation evaluation toolkit", "storyloop"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "records"}));

  // metric
  auto* metric = app.add_subcommand("metric", "Score generated vs published text");
  std::string generated_path, published_path, pairs_path, stopwords_path;
  double alpha = kDefaultRougeWAlpha;
  bool rouge_remove_stopwords = false, user_remove_first = false, stem = false;
  metric->add_option("--generated", generated_path, "Generated text file");
  metric->add_option("--published", published_path, "Published text file");
  metric->add_option("--pairs", pairs_path,
                     "JSONL file of {id, generated, published} records");
  metric->add_option("--stopwords", stopwords_path, "Stopword list file");
  metric->add_option("--alpha", alpha, "ROUGE-W weighting exponent");
  metric->add_flag("--rouge-remove-stopwords", rouge_remove_stopwords,
                   "Strip stopwords before ROUGE");
  metric->add_flag("--user-remove-stopwords", user_remove_first,
                   "Strip stopwords before USER matching");
  metric->add_flag("--stem", stem, "Porter-stem METRIC tokens");

  // pack
  auto* pack = app.add_subcommand("pack", "Solve a packing policy");
  std::string policy_path, lengths_text;
  std::optional<std::int64_t> budget;
  pack->add_option("--policy", policy_path, "Policy file")->required();
  pack->add_option("--lengths", lengths_text, "Available lengths, name=N,...")
      ->required();
  pack->add_option("--budget", budget, "Override the policy budget");

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string corpus_dir, histograms_path;
  std::optional<std::int64_t> bin_width;
  stats->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  stats->add_option("--bin-width", bin_width, "Fixed histogram bin width");
  stats->add_option("--histograms", histograms_path,
                    "Write histogram records to this file");

  // split
  auto* split = app.add_subcommand("split", "Token-balanced corpus split");
  std::string ratios_text = "8:1:1", split_out;
  std::uint64_t seed = 0;
  split->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  split->add_option("--ratios", ratios_text, "Split ratios, e.g. 8:1:1");
  split->add_option("--seed", seed, "Tie-shuffling seed");
  split->add_option("--out", split_out, "Assignment file (JSONL)");

  // topics
  auto* topics = app.add_subcommand("topics", "Topic model");
  topics->require_subcommand(1);
  std::string lexicon_path, model_path, transitions_out;
  topics::TopicModelConfig tconfig;
  auto* ttrain = topics->add_subcommand("train", "Train a dictionary");
  ttrain->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  ttrain->add_option("--lexicon", lexicon_path, "Word-vector file")->required();
  ttrain->add_option("--out", model_path, "Model output file")->required();
  ttrain->add_option("--topics", tconfig.topics, "Number of topics");
  ttrain->add_option("--epochs", tconfig.epochs, "Training epochs");
  ttrain->add_option("--lr", tconfig.learning_rate, "Learning rate");
  ttrain->add_option("--margin", tconfig.margin, "Hinge margin");
  ttrain->add_option("--negatives", tconfig.negatives, "Negatives per document");
  ttrain->add_option("--ortho", tconfig.ortho_weight, "Orthogonality weight");
  ttrain->add_option("--seed", tconfig.seed, "Random seed");
  auto* ttrans = topics->add_subcommand("transitions", "Topic transition matrix");
  ttrans->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  ttrans->add_option("--lexicon", lexicon_path, "Word-vector file")->required();
  ttrans->add_option("--model", model_path, "Model file")->required();
  ttrans->add_option("--out", transitions_out, "Write records to this file");
  auto* tneigh = topics->add_subcommand("neighbors", "Nearest words per topic");
  std::size_t k = 10;
  std::optional<int> row;
  tneigh->add_option("--lexicon", lexicon_path, "Word-vector file")->required();
  tneigh->add_option("--model", model_path, "Model file")->required();
  tneigh->add_option("--k", k, "Words per topic");
  tneigh->add_option("--row", row, "Only this topic");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the evaluation service");
  std::string bind_address, data_dir;
  std::optional<double> timeout_s;
  std::vector<std::string> registrations;
  serve->add_option("--bind", bind_address, "host:port (env STORYLOOP_BIND)");
  serve->add_option("--data-dir", data_dir, "Data directory (env STORYLOOP_DATA_DIR)");
  serve->add_option("--timeout", timeout_s,
                    "Backend timeout in seconds (env STORYLOOP_BACKEND_TIMEOUT)");
  serve->add_option("--register", registrations, "name=address, repeatable");

  // mock-backend
  auto* mock = app.add_subcommand("mock-backend", "Run the mock model backend");
  std::string mock_bind = "127.0.0.1:8081";
  mock->add_option("--bind", mock_bind, "host:port");

  std::vector<const char*> cargv;
  for (const std::string& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  const bool records = format == "records";
  try {
    if (metric->parsed()) {
      const StopwordList sw = stopwords_path.empty()
                                  ? default_stopwords()
                                  : StopwordList::load(stopwords_path);
      ScoringOptions opts;
      opts.alpha = alpha;
      opts.rouge_remove_stopwords = rouge_remove_stopwords;
      opts.user.remove_stopwords_first = user_remove_first;
      opts.tokenize.stem = stem;
      if (!pairs_path.empty()) {
        std::istringstream lines(read_text(pairs_path));
        std::string line;
        std::size_t n = 0;
        while (std::getline(lines, line)) {
          ++n;
          if (line.empty()) continue;
          json j;
          try {
            j = json::parse(line);
          } catch (const json::parse_error& e) {
            throw Error(ErrorCode::kParseError,
                        pairs_path + ":" + std::to_string(n) + ": " + e.what());
          }
          const PairScores s =
              score_pair(j.at("generated").get<std::string>(),
                         j.at("published").get<std::string>(), sw, opts);
          const json id = j.value("id", json(n));
          if (records) {
            out << json{{"id", id},
                        {"user", report_json(s.user)},
                        {"rouge_l", report_json(s.rouge_l)},
                        {"rouge_w", report_json(s.rouge_w)}}
                       .dump()
                << "\n";
          } else {
            out << "# " << (id.is_string() ? id.get<std::string>() : id.dump())
                << "\n";
            print_scores(out, s);
          }
        }
        return kSuccess;
      }
      if (generated_path.empty() || published_path.empty()) {
        err << "metric: give --generated and --published, or --pairs\n";
        return kUsageError;
      }
      const PairScores s = score_pair(read_text(generated_path),
                                      read_text(published_path), sw, opts);
      if (records) {
        out << json{{"user", report_json(s.user)},
                    {"rouge_l", report_json(s.rouge_l)},
                    {"rouge_w", report_json(s.rouge_w)}}
                   .dump()
            << "\n";
      } else {
        print_scores(out, s);
      }
      return kSuccess;
    }

    if (pack->parsed()) {
      const packing::Policy policy = packing::Policy::load(policy_path);
      const auto specs = policy.declared_specs(parse_lengths(lengths_text));
      const auto constraints = policy.instantiate(specs, true);
      const std::int64_t b = budget ? *budget : policy.budget;
      const packing::Allocation alloc =
          packing::solve(specs, constraints, b, policy.reserve);
      if (records) {
        json j = json::object();
        for (const auto& [name, len] : alloc.lengths) j[name] = len;
        out << json{{"allocation", j}, {"total", alloc.total()}}.dump() << "\n";
      } else {
        bool first = true;
        for (const auto& spec : specs) {
          out << (first ? "" : " ") << spec.name << "=" << alloc.at(spec.name);
          first = false;
        }
        out << "\n";
      }
      return kSuccess;
    }

    if (stats->parsed()) {
      dataset::StatsOptions opts;
      opts.bin_width = bin_width;
      const dataset::DatasetStats s =
          dataset::compute_stats(dataset::load_corpus(corpus_dir), opts);
      const json doc = dataset::to_json(s);
      std::string hist;
      for (const json& h : doc["histograms"]) hist += h.dump() + "\n";
      if (records) {
        for (const json& f : doc["features"]) out << f.dump() << "\n";
        out << hist;
      } else {
        out << dataset::format_table(s);
      }
      if (!histograms_path.empty()) write_text(histograms_path, hist);
      return kSuccess;
    }

    if (split->parsed()) {
      const auto ratios = dataset::SplitRatios::parse(ratios_text);
      const dataset::SplitAssignment a =
          dataset::split_corpus(dataset::load_corpus(corpus_dir), ratios, seed);
      if (!split_out.empty()) {
        std::string lines;
        for (const auto& [id, s] : a.assignment) {
          lines += json{{"id", id}, {"split", std::string(dataset::split_name(s))}}
                       .dump() +
                   "\n";
        }
        write_text(split_out, lines);
      }
      if (records) {
        out << dataset::to_json(a).dump() << "\n";
      } else {
        for (int i = 0; i < 3; ++i) {
          out << dataset::split_name(static_cast<dataset::Split>(i))
              << " stories=" << a.stories[i] << " tokens=" << a.tokens[i]
              << " story_ratio=" << fixed6(a.story_ratio[i])
              << " token_ratio=" << fixed6(a.token_ratio[i]) << "\n";
        }
      }
      return kSuccess;
    }

    if (ttrain->parsed()) {
      const auto lexicon = topics::Lexicon::load(lexicon_path);
      const auto docs =
          topics::corpus_documents(dataset::load_corpus(corpus_dir));
      const topics::TrainResult r =
          topics::train(docs, lexicon, tconfig, [&](int epoch, double loss) {
            if (records) {
              out << json{{"epoch", epoch + 1}, {"loss", loss}}.dump() << "\n";
            } else {
              out << "epoch " << epoch + 1 << " loss " << fixed6(loss) << "\n";
            }
          });
      topics::save_model(r.dictionary, model_path);
      if (!records) {
        out << "documents " << r.documents << " skipped " << r.skipped << "\n";
      }
      return kSuccess;
    }

    if (ttrans->parsed()) {
      const auto lexicon = topics::Lexicon::load(lexicon_path);
      const auto m = topics::transition_matrix(dataset::load_corpus(corpus_dir),
                                               topics::load_model(model_path),
                                               lexicon);
      const std::string lines = topics::format_transitions(m);
      if (transitions_out.empty()) {
        out << lines;
      } else {
        write_text(transitions_out, lines);
        out << "observations " << m.observations() << "\n";
      }
      return kSuccess;
    }

    if (tneigh->parsed()) {
      const auto lexicon = topics::Lexicon::load(lexicon_path);
      const Eigen::MatrixXd r = topics::load_model(model_path);
      const int first = row ? *row : 0;
      const int last = row ? *row : static_cast<int>(r.rows()) - 1;
      for (int t = first; t <= last; ++t) {
        const auto words = topics::nearest_words(r, t, lexicon, k);
        if (records) {
          json list = json::array();
          for (const auto& [w, sim] : words) list.push_back({{"word", w}, {"cosine", sim}});
          out << json{{"topic", t}, {"words", list}}.dump() << "\n";
        } else {
          out << "topic " << t << ":";
          for (const auto& [w, sim] : words) out << " " << w;
          out << "\n";
        }
      }
      return kSuccess;
    }

    if (serve->parsed()) {
      service::ServiceOptions opts = service::ServiceOptions::from_environment();
      if (!data_dir.empty()) opts.data_dir = data_dir;
      if (timeout_s) {
        if (!(*timeout_s > 0)) {
          err << "serve: --timeout must be positive\n";
          return kUsageError;
        }
        opts.backend_timeout = std::chrono::milliseconds(
            static_cast<std::int64_t>(*timeout_s * 1000.0));
      }
      if (bind_address.empty()) {
        const char* env = std::getenv("STORYLOOP_BIND");
        bind_address = env && *env ? env : "127.0.0.1:8080";
      }
      const auto [host, port] = service::parse_bind_address(bind_address);
      service::Service svc(opts);
      for (const std::string& reg : registrations) {
        const auto eq = reg.find('=');
        if (eq == std::string::npos || eq == 0) {
          err << "serve: --register expects name=address\n";
          return kUsageError;
        }
        svc.register_model(reg.substr(0, eq), reg.substr(eq + 1));
      }
      service::HttpServer server(svc);
      const int bound = server.bind(host, port);
      err << "storyloop serving on " << host << ":" << bound << " (data "
          << opts.data_dir << ")\n";
      wait_for_signal([&server] { server.stop(); });
      server.listen();
      g_stop = nullptr;
      return kSuccess;
    }

    if (mock->parsed()) {
      const auto [host, port] = service::parse_bind_address(mock_bind);
      service::MockBackendServer server;
      const int bound = server.bind(host, port);
      err << "mock backend on " << host << ":" << bound << "\n";
      wait_for_signal([&server] { server.stop(); });
      server.listen();
      g_stop = nullptr;
      return kSuccess;
    }
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::kInternal ? kInternalError : kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace storyloop::cli
