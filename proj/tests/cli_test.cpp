#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "clustersim/analysis.hpp"
#include "clustersim/cli.hpp"
#include "clustersim/errors.hpp"

using namespace clustersim;
using namespace clustersim::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "clustersim_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "cluster_sim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream err;
  const int code = main(static_cast<int>(argv.size()), argv.data(), err);
  if (err_text) *err_text = err.str();
  return code;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string f;
  std::istringstream in(line);
  while (std::getline(in, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST_CASE("grid parsing") {
  CHECK(parse_grid("-10:2:20").size() == 16);
  CHECK(parse_grid("-10:2:20").back() == 20.0);
  CHECK(parse_grid("0:0.1:1").size() == 11);
  CHECK(parse_grid("1,2.5,7") == std::vector<double>{1, 2.5, 7});
  CHECK(parse_grid(" 4 ") == std::vector<double>{4});
  CHECK_THROWS_AS(parse_grid("1:0:3"), ConfigError);
  CHECK_THROWS_AS(parse_grid("3:1:1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("1:2"), ConfigError);
  CHECK_THROWS_AS(parse_grid("2,1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("x"), ConfigError);
  CHECK_THROWS_AS(parse_grid(""), ConfigError);
}

TEST_CASE("numbers round-trip through their printed form") {
  for (double x : {0.1, 1.0 / 3, 1e-300, 6.02214076e23, -2.5, 0.0}) {
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(20) == "20");
}

TEST_CASE("coverage CSV layout") {
  const auto out = scratch("coverage.csv");
  REQUIRE(run({"coverage", "--mode", "mc", "--trials", "200", "--output", out.string()}) == 0);
  const auto lines = data_lines(slurp(out));
  REQUIRE(lines.size() == 17);
  CHECK(lines[0] ==
        "grid_param,value,ic_mc_mean,ic_mc_ci95,ic_analytic_value,ic_analytic_err,"
        "nic_mc_mean,nic_mc_ci95,nic_analytic_value,nic_analytic_err");
  CHECK(fields(lines[1])[0] == "t_db");
  CHECK(fields(lines[1])[1] == "-10");
  CHECK(fields(lines[16])[1] == "20");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = fields(lines[i]);
    REQUIRE(f.size() == 10);
    CHECK(f[4].empty());  // mode mc leaves analytic columns blank
    const double p = std::stod(f[2]);
    CHECK(p >= 0);
    CHECK(p <= 1);
  }
}

TEST_CASE("analytic coverage is in the CSV") {
  const auto out = scratch("coverage_analytic.csv");
  REQUIRE(run({"coverage", "--mode", "analytic", "--t-db", "0", "--output", out.string()}) == 0);
  const auto f = fields(data_lines(slurp(out))[1]);
  SimConfig cfg;
  CHECK(std::stod(f[4]) == analysis::coverage_lb_ic(cfg, 1.0).value);
  CHECK(f[2].empty());
}

TEST_CASE("interferer PMF output sums to one") {
  const auto out = scratch("pmf.csv");
  REQUIRE(run({"pmf-n", "--mode", "analytic", "--max-n", "60", "--output", out.string()}) == 0);
  const auto lines = data_lines(slurp(out));
  REQUIRE(lines.size() == 62);
  CHECK(lines[0] == "grid_param,value,pmf_mc_mean,pmf_mc_ci95,pmf_analytic_value,pmf_analytic_err");
  double sum = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) sum += std::stod(fields(lines[i])[4]);
  CHECK(sum >= 1 - 1e-6);
  CHECK(sum <= 1 + 1e-12);
}

TEST_CASE("command line beats the config file, which beats defaults") {
  const auto cfg_path = scratch("run.cfg");
  std::ofstream(cfg_path) << "# test settings\nratio = 5\nsnr-db=20   # comment\ntrials=7\n";
  const auto s = read_config_file(cfg_path.string());
  CHECK(s.at("ratio") == "5");
  CHECK(s.at("snr-db") == "20");

  const auto out = scratch("precedence.csv");
  REQUIRE(run({"rate", "--mode", "mc", "--config", cfg_path.string(), "--snr-db", "0", "--output", out.string()}) == 0);
  const auto meta = read_replay_file(out.string());
  CHECK(meta.at("ratio") == "5");     // from the file
  CHECK(meta.at("snr-db") == "0");    // command line wins
  CHECK(meta.at("trials") == "7");    // from the file
  CHECK(meta.at("alpha") == "4");     // default
  CHECK(meta.at("command") == "rate");

  std::ofstream(cfg_path) << "bogus=1\n";
  CHECK_THROWS_AS(read_config_file(cfg_path.string()), ConfigError);
}

TEST_CASE("replay reproduces the file byte for byte") {
  const auto first = scratch("first.csv");
  const auto second = scratch("second.csv");
  REQUIRE(run({"rate-loss", "--mode", "both", "--btot", "20,40", "--trials", "100", "--seed", "9",
               "--output", first.string()}) == 0);
  REQUIRE(run({"--replay", first.string(), "--output", second.string()}) == 0);
  CHECK(slurp(first) == slurp(second));
  const auto lines = data_lines(slurp(first));
  CHECK(lines[0] ==
        "grid_param,value,adaptive_mc_mean,adaptive_mc_ci95,adaptive_analytic_value,adaptive_analytic_err,"
        "equal_bias_mc_mean,equal_bias_mc_ci95,equal_bias_analytic_value,equal_bias_analytic_err");
  CHECK(lines.size() == 3);
}

TEST_CASE("sweep over the cluster size") {
  const auto out = scratch("sweep.csv");
  REQUIRE(run({"sweep", "--over", "ratio", "--values", "1:1:3", "--metric", "rate", "--mode", "mc", "--nt", "6",
               "--trials", "50", "--output", out.string()}) == 0);
  const auto lines = data_lines(slurp(out));
  REQUIRE(lines.size() == 4);
  CHECK(fields(lines[3])[0] == "ratio");
  CHECK(fields(lines[3])[1] == "3");
}

TEST_CASE("exit codes") {
  std::string err;
  CHECK(run({"coverage", "--ratio", "0.5"}, &err) == 2);
  CHECK(err.find("ratio") != std::string::npos);
  CHECK(run({"coverage", "--trials", "abc"}) == 2);
  CHECK(run({"coverage", "--no-such-option"}) == 2);
  CHECK(run({"rate-loss", "--nt", "8", "--mode", "analytic"}) == 2);
  CHECK(run({"sweep", "--over", "ratio"}) == 2);
  CHECK(run({}) == 2);
  CHECK(run({"--replay", scratch("missing.csv").string()}) == 4);
  CHECK(run({"pmf-n", "--mode", "analytic", "--output", (scratch("no_dir") / "x" / "y.csv").string()}) == 4);
  CHECK(run({"--version"}) == 0);
}

TEST_CASE("the executable writes the same CSV as the library") {
  const auto a = scratch("exe.csv");
  const auto b = scratch("lib.csv");
  const std::string cmd = std::string(CLUSTER_SIM_EXE) + " pmf-n --mode both --trials 300 --max-n 10 --output " + a.string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  REQUIRE(run({"pmf-n", "--mode", "both", "--trials", "300", "--max-n", "10", "--output", b.string()}) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(std::system((std::string(CLUSTER_SIM_EXE) + " coverage --alpha 2 > /dev/null 2>&1").c_str()) != 0);
}
