#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "mvcreg/io.hpp"
#include "mvcreg/simgen.hpp"
#include "test_support.hpp"

using namespace mvcreg;
using mvcreg::testing::run_command;

namespace {

const std::string kCli = MVCREG_CLI_PATH;
const std::string kConfigs = MVCREG_CONFIG_DIR;

std::string cli(const std::string& args) { return kCli + " " + args; }

}  // namespace

TEST_CASE("fit: noiseless single component") {
  const auto dir = testing::scratch_dir("cli_fit");
  std::ostringstream csv;
  csv << "y,x1,p1\n";
  for (int j = 1; j <= 10; ++j) csv << 2.0 * j << ',' << j << ",1\n";
  testing::write_file(dir / "in.csv", csv.str());
  const auto r = run_command(cli("fit --format json --input " + (dir / "in.csv").string()));
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["components"][0]["coefficients"][0].get<double>() == doctest::Approx(2.0));
  CHECK(j["components"][0]["standard_errors"][0].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("fit: generated reference data round trip") {
  const auto dir = testing::scratch_dir("cli_roundtrip");
  const auto sim = generate(reference_design(5000, 8080));
  std::ostringstream csv;
  io::write_csv(csv, sim.data, sim.p);
  testing::write_file(dir / "sim.csv", csv.str());
  const auto r = run_command(cli("fit --format json --input " + (dir / "sim.csv").string()));
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const double truth[2][2] = {{3.0, 0.5}, {-2.0, 1.0}};
  for (int m = 0; m < 2; ++m) {
    for (int i = 0; i < 2; ++i) {
      const double b = j["components"][m]["coefficients"][i].get<double>();
      const double se = j["components"][m]["standard_errors"][i].get<double>();
      CHECK(se > 0.0);
      CHECK(std::abs(b - truth[m][i]) <= 3.0 * se);
    }
  }
}

TEST_CASE("fit: intercept flag and output formats") {
  const auto dir = testing::scratch_dir("cli_intercept");
  std::ostringstream csv;
  csv << "y,x1,p1\n";
  for (int j = 1; j <= 12; ++j) csv << 1.0 + 0.5 * j << ',' << j << ",1\n";
  testing::write_file(dir / "in.csv", csv.str());
  const std::string in = (dir / "in.csv").string();
  auto r = run_command(cli("fit --intercept --format json --input " + in));
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["regressors"][0] == "x0");
  CHECK(j["components"][0]["coefficients"][0].get<double>() == doctest::Approx(1.0));
  CHECK(j["components"][0]["coefficients"][1].get<double>() == doctest::Approx(0.5));
  CHECK(j["warnings"].dump().find("intercept") != std::string::npos);

  r = run_command(cli("fit --intercept --format csv --input " + in));
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("component,regressor,coefficient,se\n1,x0,", 0) == 0);

  r = run_command(
      cli("fit --format table --output " + (dir / "out.txt").string() + " --input " + in));
  CHECK(r.exit_code == 0);
  CHECK(testing::read_file(dir / "out.txt").find("det(Gamma_N)") != std::string::npos);
}

TEST_CASE("fit: error exits") {
  const auto dir = testing::scratch_dir("cli_errors");
  testing::write_file(dir / "dup.csv", "y,x1,p1,p2\n1,1,0.5,0.5\n2,3,0.5,0.5\n3,2,0.5,0.5\n");
  auto r = run_command(cli("fit --input " + (dir / "dup.csv").string()), true);
  CHECK(r.exit_code == 3);
  CHECK(r.out.find("mvcreg-error[SingularGramian]") != std::string::npos);

  testing::write_file(dir / "bad.csv", "y,x1,p1\n1,oops,1\n");
  r = run_command(cli("fit --input " + (dir / "bad.csv").string()), true);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("mvcreg-error[InvalidInput]") != std::string::npos);

  testing::write_file(dir / "rows.csv", "y,x1,p1,p2\n1,1,0.6,0.6\n2,3,0.5,0.5\n3,2,1,0\n");
  r = run_command(cli("fit --input " + (dir / "rows.csv").string()), true);
  CHECK(r.exit_code == 2);

  r = run_command(cli("fit --input " + (dir / "missing.csv").string()), true);
  CHECK(r.exit_code == 2);
  r = run_command(cli("frobnicate"), true);
  CHECK(r.exit_code == 2);
}

TEST_CASE("weights subcommand") {
  const auto dir = testing::scratch_dir("cli_weights");
  testing::write_file(dir / "id.csv", "y,x1,p1,p2\n1,1,1,0\n4,2,0,1\n");
  auto r = run_command(cli("weights --format json --input " + (dir / "id.csv").string()));
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["weights"][0][0].get<double>() == doctest::Approx(2.0));
  CHECK(j["weights"][0][1].get<double>() == doctest::Approx(0.0));
  CHECK(j["weights"][1][1].get<double>() == doctest::Approx(2.0));
  CHECK(j["det_gamma"].get<double>() == doctest::Approx(0.25));

  testing::write_file(dir / "ones.csv", "y,x1,p1\n1,1,1\n2,2,1\n3,5,1\n");
  r = run_command(cli("weights --format csv --input " + (dir / "ones.csv").string()));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "a1\n1\n1\n1\n");

  std::ostringstream ramp;
  ramp << "y,x1,p1,p2\n";
  for (int i = 1; i <= 1000; ++i)
    ramp << "0," << i << ',' << i / 1000.0 << ',' << 1 - i / 1000.0 << '\n';
  testing::write_file(dir / "ramp.csv", ramp.str());
  r = run_command(cli("weights --format json --input " + (dir / "ramp.csv").string()));
  REQUIRE(r.exit_code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["biorthogonality"][0][0].get<double>() - 1.0) <= 1e-10);
  CHECK(std::abs(j["biorthogonality"][0][1].get<double>()) <= 1e-10);
  r = run_command(cli("weights --input " + (dir / "ramp.csv").string()));
  CHECK(r.out.find("1.000000") != std::string::npos);
}

TEST_CASE("simulate then fit matches the library") {
  const auto dir = testing::scratch_dir("cli_simulate");
  const std::string out = (dir / "sim.csv").string();
  auto r = run_command(cli("simulate --input " + kConfigs +
                           "/reference_study.json --n-obs 800 "
                           "--seed 17 --output " +
                           out));
  REQUIRE(r.exit_code == 0);
  r = run_command(cli("fit --format csv --deterministic --input " + out));
  REQUIRE(r.exit_code == 0);

  auto config = reference_design(800, 17);
  const auto sim = generate(config);
  const FitResult fit = fit_all(sim.data, sim.p);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  for (int m = 0; m < 2; ++m) {
    for (int i = 0; i < 2; ++i) {
      std::getline(lines, line);
      const auto c2 = line.find(',', line.find(',') + 1);
      const double b = std::stod(line.substr(c2 + 1, line.find(',', c2 + 1) - c2 - 1));
      CHECK(b == fit.coefficients(m, i));
    }
  }
}

TEST_CASE("study subcommand") {
  const auto dir = testing::scratch_dir("cli_study");
  auto r = run_command(cli("study --input " + kConfigs + "/smoke_study.json"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("inf") != std::string::npos);

  auto j = nlohmann::json::parse(testing::read_file(kConfigs + "/smoke_study.json"));
  j["components"].erase(1);
  testing::write_file(dir / "broken.json", j.dump());
  r = run_command(cli("study --input " + (dir / "broken.json").string()), true);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("mvcreg-error[ConfigError]: components") != std::string::npos);

  // An absurd tolerance forces the comparison to fail.
  r = run_command(cli("study --format json --rel-tol 0 --input " + kConfigs + "/smoke_study.json"),
                  true);
  CHECK(r.exit_code == 5);
}
