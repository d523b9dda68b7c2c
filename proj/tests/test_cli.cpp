#include "doctest.h"

#include "hnm/cli.hpp"
#include "hnm/process_tensor.hpp"
#include "json.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hnm;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(HNM_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

} // namespace

TEST_CASE("config resolution") {
  const auto def = cli::resolve_config(std::nullopt, {});
  CHECK(def.params.gamma == 1.0);
  CHECK(def.params.delay == 2.0);
  CHECK(def.dt == doctest::Approx(0.01));
  CHECK(def.t_max == doctest::Approx(8.0));
  CHECK(def.form_factor == FormFactor::two_point(2.0));

  const auto file = cli::load_config(std::string(HNM_CONFIG_DIR) + "/two_point.json", {});
  CHECK(file.form_factor_source == "explicit");
  CHECK(file.e_max == 2);

  cli::Overrides ov;
  ov.gamma = 0.5;
  ov.form_factor = "comb:3";
  const auto mixed = cli::resolve_config(R"({"gamma": 2.0, "T": 1.0})", ov);
  CHECK(mixed.params.gamma == 0.5);
  CHECK(mixed.form_factor.size() == 3);
  CHECK(mixed.dt == doctest::Approx(0.005)); // follows T when not given

  CHECK_THROWS_AS(cli::resolve_config(R"({"gama": 1})", {}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config("{", {}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config(R"({"gamma": "fast"})", {}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config(R"({"form_factor": [[0, 0.6, 0], [0.5, 0.8, 0]]})", {}), SpacingError);
  CHECK_THROWS_AS(cli::resolve_config(R"({"form_factor": "comb:x"})", {}), ConfigError);
  CHECK_THROWS_AS(cli::resolve_config(R"({"emax": 0})", {}), CutoffError);
  CHECK_THROWS_AS(cli::load_config(std::string("/nonexistent/cfg.json"), {}), ConfigError);

  CHECK(cli::exit_code_for(ConfigError("x")) == 2);
  CHECK(cli::exit_code_for(WindowError("x")) == 3);
  CHECK(cli::exit_code_for(TruncationOverflow("x")) == 4);
  CHECK(cli::exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("survival CSV") {
  const auto r = run({"survival", "--no-timestamp", "--samples", "11", "--t-max", "4"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 13);
  CHECK(l[0].rfind("# hnm survival", 0) == 0);
  CHECK(l[1] == "t,re_a,im_a,abs2_a,abs2_exp_reference");
  CHECK(l[2].rfind("0,1,0,1,1", 0) == 0);
  // deterministic without the timestamp
  CHECK(run({"survival", "--no-timestamp", "--samples", "11", "--t-max", "4"}).out == r.out);
  CHECK(run({"survival", "--samples", "3"}).out.rfind("# generated ", 0) == 0);
}

TEST_CASE("field footer reports the excitation balance") {
  const auto r = run({"field", "--no-timestamp", "--t", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  const auto tb = run({"field", "--no-timestamp", "--t", "1", "--mode", "timebin", "--dt", "0.02"});
  CHECK(tb.code == 0);
  CHECK(run({"field", "--mode", "fourier"}).code == 2);
}

TEST_CASE("choi JSON") {
  const auto r = run({"choi", "--no-timestamp", "--t0", "0.4", "--t1", "0.6"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["dimension"] == 16);
  CHECK(j["valid"] == true);
  CHECK(j["max_abs_dev"].get<double>() < 1e-10);
  CHECK(j["factorization_distance"].get<double>() < 1e-10);
  CHECK(j["ordering"] == kChoiOrdering);
  CHECK(j["matrix"].size() == 16);

  const auto late = run({"choi", "--t0", "1.2", "--t1", "1.6"});
  CHECK(late.code == 3);
  CHECK(late.err.find("WindowError") != std::string::npos);

  const auto three = run({"choi", "--no-timestamp", "--durations", "0.2,0.3,0.4"});
  REQUIRE(three.code == 0);
  CHECK(json::parse(three.out)["max_abs_dev"].is_null());
  CHECK(run({"choi", "--durations", "0.1,0.1,0.1,0.1"}).code == 4);
  CHECK(run({"choi", "--durations", "0.1,abc"}).code == 2);
}

TEST_CASE("markov-test") {
  const auto r = run({"markov-test", "--no-timestamp", "--json", "--dt", "0.04", "--pairs", "0.4,0.6;1.2,1.6", "--jobs",
                      "2"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j["pairs"].size() == 2);
  CHECK(j["pairs"][0]["verdict"] == "markovian");
  CHECK(j["pairs"][0]["inside_window"] == true);
  CHECK(j["pairs"][1]["verdict"] == "non-markovian");
  CHECK(j["pairs"][1]["analytic_distance"].is_null());

  const auto table = run({"markov-test", "--no-timestamp", "--dt", "0.04", "--pairs", "0.4,0.6"});
  CHECK(table.code == 0);
  CHECK(table.out.find("markovian") != std::string::npos);

  std::string many;
  for (int i = 0; i < 65; ++i) many += "0.1,0.1;";
  CHECK(run({"markov-test", "--pairs", many}).code == 4);
}

TEST_CASE("prob agrees with direct simulation") {
  const auto r = run({"prob", "--no-timestamp", "--dt", "0.02", "--schedule", "x@1.2,measure-z:excited@2.8"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["choi_path"] == "timebin");
  CHECK(std::abs(j["choi_probability"].get<double>() - j["direct_probability"].get<double>()) < 1e-10);

  const auto inside = run({"prob", "--no-timestamp", "--dt", "0.02", "--schedule", "y@0.4,measure-z:ground@0.8"});
  REQUIRE(inside.code == 0);
  const auto k = json::parse(inside.out);
  CHECK(k["choi_path"] == "analytic");
  CHECK(std::abs(k["choi_probability"].get<double>() - k["direct_probability"].get<double>()) < 0.05);

  CHECK(run({"prob", "--schedule", "hadamard@0.4"}).code == 2);
  CHECK(run({"prob", "--schedule", "x@0.8,x@0.4"}).code == 3);
  CHECK(run({"prob"}).code == 2);
}

TEST_CASE("converge") {
  const auto r = run({"converge", "--no-timestamp", "--form-factor", "one-point", "--rungs", "3"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  CHECK(std::find(l.begin(), l.end(), "dt,max_abs_err_population,fitted_order") != l.end());
  CHECK(std::find(l.begin(), l.end(), "0,0,nan") != l.end());
  CHECK(l.back().find("PASS") != std::string::npos);
  CHECK(run({"converge", "--rungs", "1"}).code == 2);
}

TEST_CASE("--out writes the artifact") {
  const auto path = std::filesystem::temp_directory_path() / "hnm_cli_test_survival.csv";
  const auto r = run({"survival", "--no-timestamp", "--samples", "5", "--out", path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(lines(ss.str()).size() == 7);
  std::filesystem::remove(path);
}

TEST_CASE("binary exit codes") {
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("survival --no-timestamp --samples 3") == 0);
  CHECK(run_binary("survival --bogus") == 2);
  CHECK(run_binary("choi --t0 1.5 --t1 1.5") == 3);
  CHECK(run_binary("choi --durations 0.1,0.1,0.1,0.1") == 4);
  CHECK(run_binary(std::string("survival --config ") + HNM_CONFIG_DIR + "/two_point.json --samples 3") == 0);
}
