#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path dir = support::temp_dir("cli");
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PARCEL_CLI + "\" " + args + " > \"" + (work() / "last.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string at(const std::string& name) { return "\"" + (work() / name).string() + "\""; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("end to end through the command line") {
  REQUIRE(cli("generate --rows 20000 --rate 0.01 --seed 3 --out " + at("raw.csv")) == 0);
  CHECK(fs::exists(work() / "raw.csv.schema.json"));
  REQUIRE(cli("preprocess --data " + at("raw.csv") + " --out " + at("enc.csv")) == 0);
  REQUIRE(cli("split --data " + at("enc.csv") + " --seed 4 --out " + at("split")) == 0);
  for (const char* f : {"train.csv", "validation.csv", "test.csv"}) CHECK(fs::exists(work() / "split" / f));

  REQUIRE(cli("train-dbsl --data " + at("split/train.csv") + " " + at("split/validation.csv") +
              " --resample ru --classifier rf --param n_estimators=20 --seed 5 --out " + at("rf.json")) == 0);
  REQUIRE(cli("evaluate --model " + at("rf.json") + " --data " + at("split/test.csv") + " --name RU-RF --out " +
              at("rf_metrics.csv") + " --predictions " + at("rf_pred.csv")) == 0);
  const auto metrics = slurp(work() / "rf_metrics.csv");
  CHECK(metrics.rfind("model,tp,fp,fn,tn,", 0) == 0);
  CHECK(metrics.find("RU-RF,") != std::string::npos);
  CHECK(slurp(work() / "rf_pred.csv").rfind("row_id,score,prediction,label", 0) == 0);

  REQUIRE(cli("cost-report --data " + at("split/test.csv") + " --predictions " + at("rf_pred.csv") + " --out " +
              at("costs.csv")) == 0);
  const auto costs = slurp(work() / "costs.csv");
  for (const char* s : {"insure_all", "insure_nothing", "business_rules", "rf_pred"})
    CHECK(costs.find(s) != std::string::npos);

  REQUIRE(cli("explain --model " + at("rf.json") + " --data " + at("split/test.csv") +
              " --rows 3 --background 10 --permutations 5 --out " + at("explain")) == 0);
  CHECK(fs::exists(work() / "explain" / "importance.csv"));
  CHECK(fs::exists(work() / "explain" / "attributions.csv"));

  REQUIRE(cli("train-dhel --train " + at("split/train.csv") + " --validation " + at("split/validation.csv") +
              " --epochs 3 --param n_estimators=10 --out " + at("dhel.json")) == 0);
  CHECK(cli("evaluate --model " + at("dhel.json") + " --data " + at("split/test.csv")) == 0);
  CHECK(cli("dhel-train --train " + at("split/train.csv") + " --validation " + at("split/validation.csv") +
            " --epochs 1 --param n_estimators=5 --out " + at("dhel2.json")) == 0);

  REQUIRE(cli("tune --data " + at("split/train.csv") + " --resample ru --classifier dt --candidates 3 --folds 3 "
              "--repeats 1 --out " + at("tune")) == 0);
  CHECK(fs::exists(work() / "tune" / "search_trace.csv"));
  CHECK(fs::exists(work() / "tune" / "best.json"));
}

TEST_CASE("manifest runs are reproducible and comparable") {
  std::ofstream(work() / "manifest.json") << R"({
  "version": 1,
  "data": {"synthetic": {"n_rows": 20000, "positive_rate": 0.01, "seed": 2}},
  "pipeline": {"type": "dbsl", "dbsl": {"resample": {"method": "ru"}, "classifier": {"kind": "rf", "params": {"n_estimators": 10}}}},
  "output_dir": "run_a",
  "seed": 7
})";
  REQUIRE(cli("run --manifest " + at("manifest.json")) == 0);
  REQUIRE(cli("run --manifest " + at("manifest.json") + " --out " + at("run_b")) == 0);
  CHECK(slurp(work() / "run_a" / "metrics.csv") == slurp(work() / "run_b" / "metrics.csv"));
  REQUIRE(cli("compare " + at("run_a") + " " + at("run_b") + " --out " + at("compare.csv")) == 0);
  CHECK(slurp(work() / "compare.csv").find("RU-RF,2,") != std::string::npos);
}

TEST_CASE("exit codes follow the error kind") {
  CHECK(cli("") == 2);
  CHECK(cli("evaluate --model " + at("missing.json") + " --data " + at("missing.csv")) == 2);
  CHECK(cli("train-dbsl --data " + at("split/train.csv") + " --classifier knn") == 2);
  // validation rows reused as training rows: leakage
  CHECK(cli("train-dhel --train " + at("split/train.csv") + " --validation " + at("split/train.csv") + " --epochs 1") == 3);
  std::ofstream(work() / "broken.json") << "{ nope";
  CHECK(cli("evaluate --model " + at("broken.json") + " --data " + at("split/test.csv")) == 3);
}
