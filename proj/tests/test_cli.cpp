// End-to-end checks of the installed CLI binary. The binary path and the
// fixture directory come in through compile definitions.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string command =
      std::string(WINSTAT_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buffer{};
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n = 0;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
    result.output.append(buffer.data(), n);
  const int status = pclose(pipe);
  result.exit_code = WEXITSTATUS(status);
  return result;
}

std::string fixture(const std::string& name) {
  return std::string(WINSTAT_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "winstat_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("--version") {
  const auto r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("0.1.0") != std::string::npos);
}

TEST_CASE("analyze the circular fixture with arm selection") {
  const auto r = run_cli("analyze " + fixture("table2_efron.csv") + " --hce " +
                         fixture("outcome_hce.json") + " --arms A,B");
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report.at("statistics").at("win_ratio").get<double>() == 1.25);
}

TEST_CASE("analyze writes a report file and respects exit codes") {
  const fs::path out = temp_dir() / "report.json";
  fs::remove(out);

  SUBCASE("clean dataset exits 0") {
    const auto r = run_cli("analyze " + fixture("ckd_small.csv") + " --hce " +
                           fixture("ckd_hce.json") +
                           " --strata --permutations 150 --seed 5 -o " +
                           out.string());
    CHECK(r.exit_code == 0);
    const json report = json::parse(slurp(out.string()));
    CHECK(report.at("stratified").at("per_stratum").size() == 2);
    CHECK(report.at("permutation").at("p_value").get<double>() > 0.0);
  }
  SUBCASE("empty dataset exits 2 and writes nothing") {
    fs::remove(out);
    const auto r = run_cli("analyze " + fixture("empty.csv") + " --hce " +
                           fixture("outcome_hce.json") + " -o " +
                           out.string());
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(out));
  }
  SUBCASE("missing file exits 4") {
    const auto r = run_cli("analyze /no/such/file.csv --hce " +
                           fixture("outcome_hce.json"));
    CHECK(r.exit_code == 4);
  }
  SUBCASE("dominance fixture completes with exit 3 and flagged ratio") {
    const auto r = run_cli("analyze " + fixture("dominance.csv") + " --hce " +
                           fixture("outcome_hce.json") + " -o " +
                           out.string());
    CHECK(r.exit_code == 3);
    const json report = json::parse(slurp(out.string()));
    CHECK(report.at("statistics").at("win_ratio").is_null());
    CHECK(report.at("statistics").at("win_ratio_flag") == "infinite");
    CHECK(report.at("statistics").at("win_odds_flag") == "finite");
  }
}

TEST_CASE("analyze output is identical across thread counts") {
  const std::string base = "analyze " + fixture("ckd_small.csv") + " --hce " +
                           fixture("ckd_hce.json") +
                           " --strata --permutations 200 --seed 8";
  const auto sequential = run_cli(base);
  const auto parallel = run_cli(base + " --threads 3");
  CHECK(sequential.exit_code == 0);
  CHECK(parallel.exit_code == 0);
  CHECK(sequential.output == parallel.output);
}

TEST_CASE("theory slope with explicit two-interval visits") {
  // three equally spaced visits give sum (t - tbar)^2 = T^2/2, so the
  // least-squares and mean-change variances coincide
  const auto r = run_cli("theory slope --times 0,1,2");
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report.at("methods").at("lsme").at("variance").get<double>() ==
        doctest::Approx(report.at("methods").at("mc").at("variance")
                            .get<double>())
            .epsilon(1e-14));
}

TEST_CASE("theory normal prints the closed-form values") {
  const auto r = run_cli("theory normal --mu1 1 --mu0 0 --sd1 1 --sd0 1");
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report.at("win_ratio").get<double>() ==
        doctest::Approx(3.17).epsilon(0.0032));
}

TEST_CASE("theory strata reproduces the mixture table") {
  const fs::path csv = temp_dir() / "strata.csv";
  const auto r = run_cli("theory strata --config " +
                         fixture("table4_strata.json") + " --csv " +
                         csv.string());
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report.at("marginal").at("win_ratio").get<double>() ==
        doctest::Approx(2.18).epsilon(0.0046));
  for (const auto& s : report.at("per_stratum"))
    CHECK(s.at("win_ratio").get<double>() ==
          doctest::Approx(3.17).epsilon(0.0032));
  const std::string plot_data = slurp(csv.string());
  CHECK(plot_data.rfind("stratum,weight,mu_treat,mu_ctrl,sigma,theta", 0) ==
        0);
  CHECK(plot_data.find("marginal,") != std::string::npos);
}

TEST_CASE("theory slope --method mc reports the attenuation") {
  const auto r = run_cli("theory slope --method mc");
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report.at("methods").at("mc").at("attenuation_vs_true").get<double>() ==
        doctest::Approx(0.13).epsilon(0.04));
  CHECK(report.at("methods").contains("true"));
  CHECK_FALSE(report.at("methods").contains("lsme"));
}

TEST_CASE("sweep writes the plot-data CSV") {
  const fs::path dir = temp_dir();
  const fs::path csv = dir / "sweep.csv";
  const fs::path mirror = dir / "sweep.json";

  SUBCASE("12-point slope-sd grid decreases in every ratio column") {
    const auto r = run_cli("sweep --axis slope_sd --grid 0.5:6:0.5 -o " +
                           csv.string() + " --json " + mirror.string());
    CHECK(r.exit_code == 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,theta_true,wr_true,theta_lsme,wr_lsme,theta_mc,wr_mc");
    int rows = 0;
    double prev_true = 1e300, prev_lsme = 1e300, prev_mc = 1e300;
    while (std::getline(in, line)) {
      ++rows;
      double x, tt, wt, tl, wl, tm, wm;
      REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &x,
                          &tt, &wt, &tl, &wl, &tm, &wm) == 7);
      CHECK(wt < prev_true);
      CHECK(wl < prev_lsme);
      CHECK(wm < prev_mc);
      prev_true = wt;
      prev_lsme = wl;
      prev_mc = wm;
    }
    CHECK(rows == 12);
    CHECK(json::parse(slurp(mirror.string())).at("rows").size() == 12);
  }
  SUBCASE("single-point grid gives one row") {
    const auto r =
        run_cli("sweep --axis followup --grid 2 -o " + csv.string());
    CHECK(r.exit_code == 0);
    std::ifstream in(csv);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 2);
  }
  SUBCASE("n_measurements axis keeps wr_mc constant") {
    const auto r = run_cli("sweep --axis n_measurements --grid 2,3,4,6,9 -o " +
                           csv.string());
    CHECK(r.exit_code == 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    double first_mc = -1.0;
    while (std::getline(in, line)) {
      const auto last_comma = line.find_last_of(',');
      const double wm = std::stod(line.substr(last_comma + 1));
      if (first_mc < 0)
        first_mc = wm;
      else
        CHECK(wm == doctest::Approx(first_mc).epsilon(1e-14));
    }
  }
  SUBCASE("invalid grid fails before writing") {
    fs::remove(csv);
    const auto r =
        run_cli("sweep --axis slope_sd --grid -1,2 -o " + csv.string());
    CHECK(r.exit_code != 0);
    CHECK_FALSE(fs::exists(csv));
  }
}

TEST_CASE("simulate writes datasets plus a reproducible summary") {
  const fs::path dir = temp_dir() / "sim_run";
  fs::remove_all(dir);
  const std::string cmd = "simulate " + fixture("scenario_ckd.json") +
                          " --replications 2 --method lsme --out-dir " +
                          dir.string();
  const auto first = run_cli(cmd);
  CHECK(first.exit_code == 0);
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "hce.json"));
  CHECK(fs::exists(dir / "dataset_0001.csv"));
  CHECK(fs::exists(dir / "dataset_0002.csv"));
  const std::string summary_once = slurp((dir / "summary.json").string());

  // round-trip: analyzing an exported dataset reproduces its tally
  const json summary = json::parse(summary_once);
  const json rep0 =
      summary.at("methods").at("lsme").at("empirical").at("replicates").at(0);
  const auto analyzed =
      run_cli("analyze " + (dir / "dataset_0001.csv").string() + " --hce " +
              (dir / "hce.json").string());
  REQUIRE(analyzed.exit_code == 0);
  const json report = json::parse(analyzed.output);
  CHECK(report.at("tally").at("wins_treatment") == rep0.at("wins_treatment"));
  CHECK(report.at("tally").at("wins_control") == rep0.at("wins_control"));
  CHECK(report.at("tally").at("ties") == rep0.at("ties"));

  // byte-identical rerun
  const auto second = run_cli(cmd);
  CHECK(second.exit_code == 0);
  CHECK(slurp((dir / "summary.json").string()) == summary_once);

  // --seed overrides the scenario seed and changes the draw
  const fs::path dir_seed = temp_dir() / "sim_run_seeded";
  fs::remove_all(dir_seed);
  const std::string seeded_cmd = "simulate " + fixture("scenario_ckd.json") +
                                 " --replications 1 --seed 424241" +
                                 " --export-datasets none --out-dir " +
                                 dir_seed.string();
  REQUIRE(run_cli(seeded_cmd).exit_code == 0);
  const std::string seeded_summary =
      slurp((dir_seed / "summary.json").string());
  CHECK(json::parse(seeded_summary).at("scenario").at("seed") == 424241);
  REQUIRE(run_cli(seeded_cmd).exit_code == 0);
  CHECK(slurp((dir_seed / "summary.json").string()) == seeded_summary);

  // single replication reports no standard error
  const fs::path dir1 = temp_dir() / "sim_run_single";
  fs::remove_all(dir1);
  const auto single = run_cli("simulate " + fixture("scenario_ckd.json") +
                              " --replications 1 --export-datasets first" +
                              " --out-dir " + dir1.string());
  CHECK(single.exit_code == 0);
  const json s1 = json::parse(slurp((dir1 / "summary.json").string()));
  CHECK(s1.at("methods").at("lsme").at("empirical").at("se").is_null());
}

TEST_CASE("examples print the headline numbers") {
  SUBCASE("hands-paradox") {
    const auto r = run_cli("examples hands-paradox");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("0.5") != std::string::npos);
    CHECK(r.output.find("= 2") != std::string::npos);
  }
  SUBCASE("efron-triple") {
    const auto r = run_cli("examples efron-triple");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("1.25") != std::string::npos);
    CHECK(r.output.find("beats") != std::string::npos);
  }
  SUBCASE("table4") {
    const auto r = run_cli("examples table4");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("3.17") != std::string::npos);
    CHECK(r.output.find("2.18") != std::string::npos);
  }
  SUBCASE("unknown example lists the valid names") {
    const auto r = run_cli("examples nonsense");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("hands-paradox") != std::string::npos);
    CHECK(r.output.find("efron-triple") != std::string::npos);
    CHECK(r.output.find("table4") != std::string::npos);
  }
}
