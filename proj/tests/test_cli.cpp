// Integration test for the command-line tool: generates a small corpus with
// mock_corpus, then drives every subcommand through its real entry point.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef MOUSEDYN_CLI_PATH
#error "MOUSEDYN_CLI_PATH must be defined"
#endif
#ifndef MOCK_CORPUS_PATH
#error "MOCK_CORPUS_PATH must be defined"
#endif

namespace {

namespace fs = std::filesystem;

const fs::path kWork = fs::temp_directory_path() / "mousedyn_cli_test";
const fs::path kCorpus = kWork / "corpus";

int run(const std::string& args) {
  const std::string cmd = std::string(MOUSEDYN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

int run_loud(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      std::string(MOUSEDYN_CLI_PATH) + " " + args + " >" + capture.string() + " 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool ensure_corpus() {
  static bool made = [] {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    const std::string cmd = std::string(MOCK_CORPUS_PATH) + " " + kCorpus.string() +
                            " 40 22 9 >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  }();
  return made;
}

std::string base_flags(int jobs = 2) {
  return "--data-root " + kCorpus.string() + " --trees 12 --seed 5 --jobs " +
         std::to_string(jobs) + " --force";
}

}  // namespace

TEST_CASE("stats reports session counts and writes the histogram CSV") {
  REQUIRE(ensure_corpus());
  const auto log = kWork / "stats.log";
  REQUIRE(run_loud("stats " + base_flags() + " --out " + (kWork / "stats").string(), log) == 0);
  const std::string text = slurp(log);
  CHECK(text.find("65 training, 411 test positive, 405 test negative") != std::string::npos);
  CHECK(fs::exists(kWork / "stats" / "stats.csv"));
  CHECK(fs::exists(kWork / "stats" / "manifest.json"));

  // Per-user rows are present in the CSV.
  const std::string csv = slurp(kWork / "stats" / "stats.csv");
  CHECK(csv.find("user7,") != std::string::npos);
  CHECK(csv.find("user35,") != std::string::npos);
}

TEST_CASE("segment and features write their CSV contracts") {
  REQUIRE(ensure_corpus());
  REQUIRE(run("segment " + base_flags() + " --out " + (kWork / "seg").string()) == 0);
  const std::string actions = slurp(kWork / "seg" / "actions.csv");
  CHECK(actions.rfind("user_id,session_id,kind,n_points,start_t,end_t", 0) == 0);

  REQUIRE(run("features " + base_flags() + " --out " + (kWork / "feat").string()) == 0);
  CHECK(fs::exists(kWork / "feat" / "features_training.csv"));
  CHECK(fs::exists(kWork / "feat" / "features_test.csv"));
  const std::string header = slurp(kWork / "feat" / "features_training.csv");
  CHECK(header.rfind("mean_vx,sd_vx,min_vx,max_vx,", 0) == 0);
  CHECK(header.find("a_beg_time,user_id,session_id,genuine") != std::string::npos);
}

TEST_CASE("train writes a model; CSV input gives the identical model") {
  REQUIRE(ensure_corpus());
  const auto m1 = kWork / "m1.json";
  const auto m2 = kWork / "m2.json";
  REQUIRE(run("train --user 9 " + base_flags() + " --out " + m1.string()) == 0);
  REQUIRE(run("train --user 9 --features-train " +
              (kWork / "feat" / "features_training.csv").string() +
              " --trees 12 --seed 5 --force --out " + m2.string()) == 0);
  CHECK(slurp(m1) == slurp(m2));
}

TEST_CASE("run scenario A and B produce reports deterministically") {
  REQUIRE(ensure_corpus());
  const auto a1 = kWork / "runA1";
  REQUIRE(run("run --scenario A --protocol action " + base_flags() + " --out " + a1.string()) ==
          0);
  CHECK(fs::exists(a1 / "scenarioA_action.csv"));
  const std::string table = slurp(a1 / "scenarioA_action.csv");
  CHECK(table.find("Avg,") != std::string::npos);
  CHECK(table.find("Std,") != std::string::npos);

  const auto b1 = kWork / "runB1";
  const auto b2 = kWork / "runB2";
  REQUIRE(run("run --scenario B --protocol session " + base_flags() + " --out " + b1.string()) ==
          0);
  REQUIRE(run("run --scenario B --protocol session " + base_flags(1) + " --out " +
              b2.string()) == 0);
  CHECK(slurp(b1 / "report.json") == slurp(b2 / "report.json"));
  CHECK(slurp(b1 / "roc.csv") == slurp(b2 / "roc.csv"));
  CHECK(slurp(b1 / "report.json").find("\"seed\": 5") != std::string::npos);

  const auto bset = kWork / "runBset";
  REQUIRE(run("run --scenario B --protocol set:4 " + base_flags() + " --out " + bset.string()) ==
          0);
  const std::string curve = slurp(bset / "scenarioB_set.csv");
  CHECK(curve.rfind("k,auc,eer", 0) == 0);
  CHECK(curve.find("\n4,") != std::string::npos);
}

TEST_CASE("rank-features emits the 39-row table") {
  REQUIRE(ensure_corpus());
  const auto out = kWork / "rank";
  REQUIRE(run("rank-features " + base_flags() + " --out " + out.string()) == 0);
  const std::string csv = slurp(out / "feature_ranking.csv");
  CHECK(csv.rfind("rank,feature,gain_ratio", 0) == 0);
  int lines = 0;
  for (char c : csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 40);  // header + 39 features
}

TEST_CASE("errors: overwrite protection and bad arguments") {
  REQUIRE(ensure_corpus());
  const auto out = kWork / "runB1";  // exists from the earlier case
  CHECK(run("run --scenario B --protocol session --data-root " + kCorpus.string() +
            " --trees 5 --out " + out.string()) != 0);
  CHECK(run("run --scenario C " + base_flags()) != 0);
  CHECK(run("run --scenario A --protocol warp " + base_flags()) != 0);
  CHECK(run("train --user 9999 " + base_flags() + " --out " + (kWork / "x.json").string()) != 0);
}
