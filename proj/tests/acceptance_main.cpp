// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Result files land in ./acceptance_out for inspection and
// for the byte-identity criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "winstat/hce.hpp"
#include "winstat/io.hpp"
#include "winstat/rng.hpp"
#include "winstat/simulator.hpp"
#include "winstat/theory.hpp"
#include "winstat/win_stats.hpp"

using namespace winstat;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string fixture(const std::string& name) {
  return std::string(WINSTAT_FIXTURE_DIR) + "/" + name;
}

fs::path out_dir() {
  const fs::path dir = "acceptance_out";
  fs::create_directories(dir);
  return dir;
}

struct Checker {
  std::ostringstream log;
  bool ok = true;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      log << "\n    FAILED: " << what;
    }
  }
  void require_close(double got, double want, double tol,
                     const std::string& what) {
    std::ostringstream msg;
    msg << what << " (got " << got << ", want " << want << " +/- " << tol
        << ")";
    require(std::isfinite(got) && std::fabs(got - want) <= tol, msg.str());
  }
};

// --- shared pipeline pieces (also re-run for the determinism criterion) ---

std::string slope_attenuation_report() {
  const auto design = theory::equally_spaced_design(9, 2.0, 3.0, 5.18, -2.0,
                                                    -3.0);
  io::Manifest manifest;
  manifest.command = "theory slope";
  return io::theory_slope_report(design, manifest);
}

sim::SimScenario bridge_scenario() {
  sim::SimScenario s;
  s.design = theory::equally_spaced_design(9, 2.0, 3.0, 5.18, -2.0, -3.0);
  s.n_per_arm = 2000;
  s.intercept_mean = 40.0;
  s.intercept_sd = 0.0;
  s.seed = 927441u;
  return s;
}

std::string bridge_summary() {
  io::SimulateOptions options;
  options.run_lsme = true;
  options.run_mc = true;
  options.replications = 24;
  options.threads = 2;
  io::Manifest manifest;
  manifest.command = "simulate";
  manifest.seeds = {bridge_scenario().seed};
  return io::run_simulation(bridge_scenario(), options, manifest);
}

std::string permutation_calibration_report() {
  const std::uint64_t master_seed = 55105u;
  const int trials = 1000;
  const std::int64_t n_permutations = 399;
  const double alpha = 0.05;

  sim::SimScenario null_scenario;
  null_scenario.design =
      theory::equally_spaced_design(9, 2.0, 3.0, 5.18, -3.0, -3.0);
  null_scenario.n_per_arm = 20;
  null_scenario.intercept_mean = 40.0;

  int rejections = 0;
  for (int trial = 0; trial < trials; ++trial) {
    sim::SimScenario s = null_scenario;
    s.seed = derive_stream(master_seed, static_cast<std::uint64_t>(trial));
    const auto trial_data = sim::simulate_trial(s);
    const auto slopes =
        sim::estimate_slopes(trial_data, sim::SlopeEstimator::Lsme);
    const auto records = sim::to_records(s, trial_data, slopes);
    const auto result = permutation_test(
        records, sim::scenario_hce(s), n_permutations,
        derive_stream(master_seed, static_cast<std::uint64_t>(trial), 0xabu));
    if (result.p_value <= alpha) ++rejections;
  }

  json report{{"command", "permutation-calibration"},
              {"seed", master_seed},
              {"trials", trials},
              {"n_permutations", n_permutations},
              {"alpha", alpha},
              {"rejections", rejections},
              {"rejection_rate", static_cast<double>(rejections) / trials}};
  return report.dump(2) + "\n";
}

// --- criteria ---

bool criterion_hands_paradox(Checker& c) {
  const auto start = std::chrono::steady_clock::now();

  const auto rows = io::parse_paired_csv(
      io::read_file(fixture("table1_hands_paradox.csv")));
  const auto individual = individual_win_ratio(rows);
  c.require(individual.win_ratio == 2.0, "within-subject WR is exactly 2");

  // the same table read as two independent arms
  const auto hce =
      io::parse_hce_json(io::read_file(fixture("outcome_hce.json")));
  std::vector<SubjectRecord> records;
  int id = 0;
  for (const auto& row : rows) {
    SubjectRecord treatment;
    treatment.subject_id = "t" + std::to_string(id);
    treatment.arm = 1;
    treatment.followup_time = 12.0;
    treatment.observations["outcome"] =
        Observation::measured(row.y_treatment);
    SubjectRecord control;
    control.subject_id = "c" + std::to_string(id++);
    control.arm = 0;
    control.followup_time = 12.0;
    control.observations["outcome"] = Observation::measured(row.y_comparator);
    records.push_back(treatment);
    records.push_back(control);
  }
  const WinTally t = tally(records, hce);
  c.require(t.wins_treatment == 3 && t.wins_control == 6 && t.ties == 0,
            "population tally is 3/6/0");
  c.require(win_statistics(t).win_ratio == 0.5, "population WR is exactly 0.5");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.require(elapsed < 1.0, "runtime under 1 s");
  return c.ok;
}

bool criterion_non_transitivity(Checker& c) {
  const auto hce =
      io::parse_hce_json(io::read_file(fixture("outcome_hce.json")));
  const auto data =
      io::parse_dataset_csv(io::read_file(fixture("table2_efron.csv")), hce);
  const auto result = transitivity_check(io::group_by_arm(data), hce);

  for (const auto& [pair, stats] : result.pairwise) {
    if ((pair.first == "A" && pair.second == "B") ||
        (pair.first == "B" && pair.second == "C") ||
        (pair.first == "C" && pair.second == "A"))
      c.require(stats.win_ratio == 1.25,
                "WR(" + pair.first + "," + pair.second + ") is exactly 1.25");
  }
  c.require(result.cycles.size() == 1, "exactly one 3-cycle reported");

  // rowwise within-subject WR for each ordered pair in the cycle
  const std::map<std::string, std::vector<double>> columns = {
      {"A", {2, 4, 9}}, {"B", {1, 6, 8}}, {"C", {3, 5, 7}}};
  for (const auto& [first, second] :
       std::vector<std::pair<std::string, std::string>>{
           {"A", "B"}, {"B", "C"}, {"C", "A"}}) {
    PairedDataset rows;
    for (int i = 0; i < 3; ++i)
      rows.push_back({std::to_string(i), columns.at(first)[i],
                      columns.at(second)[i]});
    c.require(individual_win_ratio(rows).win_ratio == 2.0,
              "rowwise WR(" + first + "," + second + ") is exactly 2");
  }
  return c.ok;
}

bool criterion_normal_closed_form(Checker& c) {
  const double wr_tight =
      theory::stats_from_theta(theory::win_prob_normal({1, 0, 1, 1}))
          .win_ratio;
  const double wr_spread =
      theory::stats_from_theta(theory::win_prob_normal({1, 0, 2, 2}))
          .win_ratio;
  c.require_close(wr_tight, 3.17, 0.01, "WR at unit SDs");
  c.require_close(wr_spread, 1.76, 0.01, "WR at doubled SDs");
  return c.ok;
}

bool criterion_slope_attenuation(Checker& c) {
  const json report = json::parse(slope_attenuation_report());
  io::write_file_atomic((out_dir() / "slope_attenuation.json").string(),
                        report.dump(2) + "\n");
  const double atten_lsme =
      report.at("methods").at("lsme").at("attenuation_vs_true").get<double>();
  const double atten_mc =
      report.at("methods").at("mc").at("attenuation_vs_true").get<double>();
  c.require_close(atten_lsme, 0.09, 0.01, "LSME attenuation");
  c.require_close(atten_mc, 0.13, 0.01, "MC attenuation");
  return c.ok;
}

bool criterion_non_collapsibility(Checker& c) {
  const auto strata =
      io::parse_strata_json(io::read_file(fixture("table4_strata.json")));
  c.require_close(theory::stratum_wr(strata[0]), 3.17, 0.01,
                  "stratum 1 WR");
  c.require_close(theory::stratum_wr(strata[1]), 3.17, 0.01,
                  "stratum 2 WR");
  c.require_close(theory::marginal_wr(strata), 2.18, 0.01, "marginal WR");
  c.require_close(theory::stratified_pooled_wr(strata), 3.17, 0.01,
                  "stratified pooled WR");
  return c.ok;
}

bool criterion_sweep_shapes(Checker& c) {
  const auto base = theory::equally_spaced_design(9, 2.0, 3.0, 5.18, -2.0,
                                                  -3.0);
  io::Manifest manifest;
  manifest.command = "sweep";

  struct Axis {
    theory::SweepAxis axis;
    const char* name;
    std::vector<double> grid;
  };
  std::vector<Axis> axes;
  axes.push_back({theory::SweepAxis::SlopeSd, "slope_sd", {}});
  for (double x = 0.5; x <= 6.0001; x += 0.5) axes[0].grid.push_back(x);
  axes.push_back({theory::SweepAxis::Followup, "followup", {}});
  for (double x = 0.5; x <= 5.0001; x += 0.5) axes[1].grid.push_back(x);
  axes.push_back({theory::SweepAxis::NMeasurements, "n_measurements", {}});
  for (int n = 2; n <= 12; ++n) axes[2].grid.push_back(n);

  for (const auto& axis : axes) {
    const auto outputs = io::run_sweep(base, axis.axis, axis.grid, manifest);
    const std::string path =
        (out_dir() / ("sweep_" + std::string(axis.name) + ".csv")).string();
    io::write_file_atomic(path, outputs.csv);

    // assert the shapes pointwise on the emitted CSV
    std::istringstream in(io::read_file(path));
    std::string line;
    std::getline(in, line);
    c.require(line == "x,theta_true,wr_true,theta_lsme,wr_lsme,theta_mc,wr_mc",
              std::string(axis.name) + ": frozen header");
    std::vector<std::array<double, 7>> rows;
    while (std::getline(in, line)) {
      std::array<double, 7> row{};
      c.require(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf",
                            &row[0], &row[1], &row[2], &row[3], &row[4],
                            &row[5], &row[6]) == 7,
                std::string(axis.name) + ": row parses");
      rows.push_back(row);
    }
    c.require(rows.size() == axis.grid.size(),
              std::string(axis.name) + ": one row per grid point");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& prev = rows[i - 1];
      const auto& row = rows[i];
      if (axis.axis == theory::SweepAxis::SlopeSd) {
        c.require(row[2] < prev[2] && row[4] < prev[4] && row[6] < prev[6],
                  "slope_sd: all WR columns strictly decreasing");
      } else {
        c.require(std::fabs(row[2] - prev[2]) <= 1e-12,
                  std::string(axis.name) + ": wr_true constant");
        c.require(row[4] >= prev[4] - 1e-12,
                  std::string(axis.name) + ": wr_lsme nondecreasing");
        c.require(row[6] >= prev[6] - 1e-12,
                  std::string(axis.name) + ": wr_mc nondecreasing");
      }
    }
  }
  return c.ok;
}

bool criterion_oracle_equivalence(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(5150);
  for (int rep = 0; rep < 200; ++rep) {
    const auto data = oracles::random_dataset(gen, 50);
    const WinTally fast = tally(data.records, data.hce, 2);
    const WinTally slow = oracles::naive_tally(data.records, data.hce);
    bool equal = fast.wins_treatment == slow.wins_treatment &&
                 fast.wins_control == slow.wins_control &&
                 fast.ties == slow.ties &&
                 fast.per_component.size() == slow.per_component.size();
    if (equal) {
      for (std::size_t k = 0; k < fast.per_component.size(); ++k)
        equal = equal &&
                fast.per_component[k].wins_treatment ==
                    slow.per_component[k].wins_treatment &&
                fast.per_component[k].wins_control ==
                    slow.per_component[k].wins_control;
    }
    c.require(equal, "dataset " + std::to_string(rep) + " matches exactly");
    if (!equal) break;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.require(elapsed < 30.0, "runtime under 30 s");
  return c.ok;
}

bool criterion_monte_carlo_bridge(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  const std::string summary_text = bridge_summary();
  io::write_file_atomic((out_dir() / "bridge_summary.json").string(),
                        summary_text);
  const json summary = json::parse(summary_text);

  const struct {
    const char* key;
    double variance_want;
  } methods[] = {{"lsme", 16.155306666666667}, {"mc", 22.4162}};
  for (const auto& m : methods) {
    const json& block = summary.at("methods").at(m.key);
    const double closed = block.at("closed_form").at("win_ratio").get<double>();
    const json& empirical = block.at("empirical");
    c.require(empirical.at("degenerate").get<int>() == 0,
              std::string(m.key) + ": no degenerate replications");
    const double se = empirical.at("se").get<double>();
    const double mean = empirical.at("mean_win_ratio").get<double>();
    c.require(se < 0.02, std::string(m.key) + ": SE below 0.02 (got " +
                             std::to_string(se) + ")");
    c.require_close(mean, closed, 3.0 * se,
                    std::string(m.key) + ": empirical WR within 3 SE");
    const double variance = empirical.at("estimate_variance").get<double>();
    c.require_close(variance, m.variance_want, 0.05 * m.variance_want,
                    std::string(m.key) + ": estimate variance within 5%");
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.require(elapsed < 120.0, "runtime under 2 min");
  return c.ok;
}

bool criterion_permutation_calibration(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  const std::string report_text = permutation_calibration_report();
  io::write_file_atomic((out_dir() / "permutation_calibration.json").string(),
                        report_text);
  const json report = json::parse(report_text);
  c.require(report.at("trials").get<int>() >= 500, "at least 500 trials");
  const double rate = report.at("rejection_rate").get<double>();
  c.require(rate >= 0.03 && rate <= 0.07,
            "rejection rate " + std::to_string(rate) + " inside [0.03, 0.07]");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.require(elapsed < 300.0, "runtime under 5 min");
  return c.ok;
}

bool criterion_determinism(Checker& c) {
  const auto compare_rerun = [&](const std::string& name,
                                 const std::string& fresh) {
    const std::string previous =
        io::read_file((out_dir() / name).string());
    c.require(fresh == previous, name + " reruns byte-identically");
  };
  compare_rerun("slope_attenuation.json",
                json::parse(slope_attenuation_report()).dump(2) + "\n");
  compare_rerun("bridge_summary.json", bridge_summary());
  compare_rerun("permutation_calibration.json",
                permutation_calibration_report());
  return c.ok;
}

struct Criterion {
  int id;
  const char* name;
  bool (*fn)(Checker&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "paradox fixture: population WR 0.5, within-subject WR 2",
       criterion_hands_paradox},
      {2, "circular arms: three WRs of 1.25 and one cycle",
       criterion_non_transitivity},
      {3, "normal closed form: WR 3.17 and 1.76",
       criterion_normal_closed_form},
      {4, "slope attenuation: 9% LSME and 13% MC",
       criterion_slope_attenuation},
      {5, "non-collapsibility: strata 3.17, marginal 2.18, pooled 3.17",
       criterion_non_collapsibility},
      {6, "sweep shapes on the emitted plot-data CSVs",
       criterion_sweep_shapes},
      {7, "optimized tally equals the naive loop on 200 random datasets",
       criterion_oracle_equivalence},
      {8, "Monte Carlo bridge: empirical WR and variances match theory",
       criterion_monte_carlo_bridge},
      {9, "permutation calibration at alpha 0.05",
       criterion_permutation_calibration},
      {10, "fixed seeds reproduce byte-identical result files",
       criterion_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Checker checker;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = criterion.fn(checker);
    } catch (const std::exception& e) {
      checker.log << "\n    EXCEPTION: " << e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %2d: %s (%.2fs)%s\n", ok ? "PASS" : "FAIL",
                criterion.id, criterion.name, elapsed,
                checker.log.str().c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0)
    std::printf("%d criterion(s) failed\n", failures);
  else
    std::printf("all %zu criteria passed\n", std::size(criteria));
  return failures == 0 ? 0 : 1;
}
