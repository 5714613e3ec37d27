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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "storyloop/cli.hpp"

using namespace storyloop;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "storyloop");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write(const fixtures::TempDir& dir, const std::string& name,
                  const std::string& text) {
  const auto path = dir.path() / name;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << text;
  return path.string();
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Ten single-entry stories with the same token count.
std::string equal_corpus(const fixtures::TempDir& dir) {
  for (int i = 0; i < 10; ++i) {
    fixtures::json s = fixtures::story_json("s" + std::to_string(i));
    s["scenes"] = fixtures::json::array(
        {{{"id", "only"},
          {"intro", ""},
          {"entries", {fixtures::entry("e", 0, "ana", "one two three four")}}}});
    write(dir, "corpus/stories/s" + std::to_string(i) + ".story", s.dump());
  }
  return (dir.path() / "corpus").string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("metric on identical files") {
    fixtures::TempDir dir;
    const std::string g = write(dir, "g.txt", "The harbor is quiet tonight.");
    const Result r = run({"metric", "--generated", g, "--published", g});
    CHECK(r.code == 0);
    CHECK(r.out.find("user_f1 1.000000") != std::string::npos);
  }

  TEST_CASE("metric records match the library") {
    fixtures::TempDir dir;
    const std::string g = write(dir, "g.txt", "The cat sat on the mat.");
    const std::string p = write(dir, "p.txt", "The dog sat on a mat.");
    const Result r = run({"--format", "records", "metric", "--generated", g,
                          "--published", p});
    CHECK(r.code == 0);
    const auto j = fixtures::json::parse(r.out);
    CHECK(j["user"]["precision"] == 0.5);
    CHECK(j["user"]["matched_tokens"] == 3);
  }

  TEST_CASE("metric over a pairs file") {
    fixtures::TempDir dir;
    const std::string pairs = write(
        dir, "pairs.jsonl",
        R"({"id":"a","generated":"x y z","published":"x y z"})" "\n"
        R"({"id":"b","generated":"x y z","published":"q"})" "\n");
    const Result r = run({"--format", "records", "metric", "--pairs", pairs});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
  }

  TEST_CASE("pack with the example policy") {
    const Result r = run({"pack", "--policy", STORYLOOP_RESOURCE_DIR "/policies/example.pol",
                          "--lengths", "a=8,b=8", "--budget", "10"});
    CHECK(r.code == 0);
    CHECK(r.out == "a=6 b=4\n");
  }

  TEST_CASE("split of ten equal stories") {
    fixtures::TempDir dir;
    const std::string corpus = equal_corpus(dir);
    const std::string out = (dir.path() / "split.jsonl").string();
    const Result r = run({"split", "--corpus", corpus, "--ratios", "8:1:1",
                          "--seed", "3", "--out", out});
    CHECK(r.code == 0);
    const std::string lines = read(out);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 10);
    std::size_t train = 0, pos = 0;
    while ((pos = lines.find("\"train\"", pos)) != std::string::npos) {
      ++train;
      ++pos;
    }
    CHECK(train == 8);
    const Result again = run({"split", "--corpus", corpus, "--seed", "3"});
    CHECK(again.out == r.out);
  }

  TEST_CASE("stats output is reproducible") {
    fixtures::TempDir dir;
    const std::string corpus = equal_corpus(dir);
    const Result a = run({"--format", "records", "stats", "--corpus", corpus});
    const Result b = run({"--format", "records", "stats", "--corpus", corpus});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("entries_per_story") != std::string::npos);
  }

  TEST_CASE("topics train, transitions and neighbors") {
    fixtures::TempDir dir;
    const std::string corpus = equal_corpus(dir);
    const std::string lex = write(dir, "lex.txt",
                                  "one 1 0 0\ntwo 0 1 0\nthree 0 0 1\nfour 1 1 0\n");
    const std::string model = (dir.path() / "model.txt").string();
    Result r = run({"topics", "train", "--corpus", corpus, "--lexicon", lex, "--out",
                    model, "--topics", "2", "--epochs", "3"});
    CHECK(r.code == 0);
    CHECK(read(model).rfind("2 3\n", 0) == 0);
    r = run({"topics", "transitions", "--corpus", corpus, "--lexicon", lex, "--model",
             model});
    CHECK(r.code == 0);
    r = run({"topics", "neighbors", "--lexicon", lex, "--model", model, "--k", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("topic 0:", 0) == 0);
  }

  TEST_CASE("exit codes") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"metric", "--generated", "/nonexistent/g"}).code == 1);
    CHECK(run({"metric", "--generated", "/nonexistent/g", "--published", "/nonexistent/p"})
              .code == 2);
    fixtures::TempDir dir;
    const std::string bad = write(dir, "bad.pol", "budget ten\n");
    CHECK(run({"pack", "--policy", bad, "--lengths", "a=1"}).code == 2);
    CHECK(run({"--help"}).code == 0);
  }
}
