#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "support.hpp"
#include "survmae/curve_io.hpp"
#include "survmae/dataset.hpp"

using namespace survmae;
using namespace survmae::testing;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "survmae_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(SURVMAE_CLI) + " " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > " + (workdir() / stdout_file).string();
  cmd += " 2> " + (workdir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

nlohmann::json read_json(const std::string& name) {
  std::ifstream in(path(name));
  return nlohmann::json::parse(in);
}

std::string read_text(const std::string& name) {
  std::ifstream in(path(name));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("CLI pipeline: stats, synth, fit, eval, experiment") {
  save_dataset(path("raw.csv"), weibull_world(21, {.n = 400}));

  REQUIRE(run("stats " + path("raw.csv"), "stats.json") == 0);
  const auto stats = read_json("stats.json");
  CHECK(stats["n"] == 400);
  CHECK(stats["has_ground_truth"] == false);

  REQUIRE(run("synth " + path("raw.csv") + " --kind uniform-admin --seed 3 -o " + path("semi.csv")) == 0);
  const auto semi = load_dataset(path("semi.csv"));
  CHECK(semi.has_ground_truth());
  const auto meta = read_json("semi.csv.json");
  CHECK(meta["spec"]["kind"] == "uniform-admin");
  CHECK(meta["seed"] == 3);
  CHECK(meta["censor_rate"].get<double>() == doctest::Approx(semi.censor_rate()));

  REQUIRE(run("synth " + path("raw.csv") + " --kind external --external " + path("raw.csv") + " --seed 3 -o " +
              path("ext.csv")) == 0);
  REQUIRE(run("synth " + path("raw.csv") + " --kind orig-indep --seed 3 -o " + path("orig.csv")) == 0);
  CHECK(read_text("ext.csv") == read_text("orig.csv"));

  REQUIRE(run("fit " + path("semi.csv") + " --model coxph -o " + path("cox_curves.csv")) == 0);
  const auto curves = load_curves(path("cox_curves.csv"));
  CHECK(curves.curves.size() == semi.size());

  REQUIRE(run("eval " + path("semi.csv") + " --curves " + path("cox_curves.csv"), "eval.json") == 0);
  const auto scores = read_json("eval.json");
  for (const char* key : {"mae_uncensored", "mae_hinge", "mae_margin", "mae_ipcw_d", "mae_ipcw_t", "mae_po",
                          "mae_pop_po", "true_mae", "c_index", "ibs", "d_calibration_p"}) {
    CHECK_MESSAGE(scores[key].is_number(), key);
  }

  REQUIRE(run("fit " + path("raw.csv") + " --model weibull_aft -o " + path("wb_curves.csv")) == 0);
  REQUIRE(run("eval " + path("raw.csv") + " --curves " + path("wb_curves.csv") + " --method mean", "eval_raw.json") ==
          0);
  CHECK(read_json("eval_raw.json")["true_mae"].is_null());

  REQUIRE(run("experiment " + path("semi.csv") + " --models km,coxph,noisy:0.2 --k 3 --seed 1 -o " +
              path("report.json")) == 0);
  const auto report = read_json("report.json");
  CHECK(report["models"].size() == 3);
  CHECK(report["true_mae_rank"][0] == "noisy:0.2");
  const auto csv = read_text("report.csv");
  CHECK(csv.rfind("model,metric,fold,value\n", 0) == 0);
}

TEST_CASE("CLI errors exit nonzero with a message") {
  save_dataset(path("small.csv"), make_dataset({1, 2, 3}, {1, 0, 1}));
  CHECK(run("synth " + path("small.csv") + " --kind nonsense -o " + path("x.csv")) == 1);
  CHECK(read_text("stderr.txt").find("unknown censoring kind") != std::string::npos);
  CHECK(run("stats " + path("does_not_exist.csv")) != 0);
  CHECK(run("synth " + path("small.csv") + " --kind external -o " + path("x.csv")) == 1);
  CHECK(run("experiment " + path("small.csv") + " --models rsf -o " + path("r.json")) == 1);
  {
    std::ofstream bad(path("bad.csv"));
    bad << "time,event\n1,1\n0,1\n";
  }
  CHECK(run("stats " + path("bad.csv")) == 1);
  CHECK(read_text("stderr.txt").find("row 3") != std::string::npos);
  CHECK(run("") != 0);
}
