// winstat — command-line front end over the libwinstat C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "winstat.h"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 2 validation/config, 3 degenerate statistic,
// 4 IO failure.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitIo = 4;

struct StringDeleter {
  void operator()(char* s) const { winstat_string_free(s); }
};
using ApiString = std::unique_ptr<char, StringDeleter>;

struct HceDeleter {
  void operator()(winstat_hce* h) const { winstat_hce_free(h); }
};
struct DatasetDeleter {
  void operator()(winstat_dataset* d) const { winstat_dataset_free(d); }
};

int exit_code_for(winstat_status status) {
  switch (status) {
    case WINSTAT_OK:
      return kExitOk;
    case WINSTAT_ERR_IO:
      return kExitIo;
    case WINSTAT_ERR_INTERNAL:
      return 1;
    default:
      return kExitValidation;
  }
}

// Failures funnel through this exception; main maps it to the exit code.
struct CliError {
  int code;
  std::string message;
};

void check(winstat_status status, const std::string& what) {
  if (status == WINSTAT_OK) return;
  throw CliError{exit_code_for(status),
                 what + ": " + winstat_last_error()};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitIo, "cannot open '" + path + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Atomic file write: temp file in the target directory, then rename.
void write_output_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir =
      target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError{kExitIo, "cannot write '" + tmp.string() + "'"};
    out << content;
    if (!out.good())
      throw CliError{kExitIo, "failed writing '" + tmp.string() + "'"};
  }
  fs::rename(tmp, target, ec);
  if (ec)
    throw CliError{kExitIo, "cannot move output onto '" + path + "'"};
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::cout << content;
  else
    write_output_file(out_path, content);
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  const auto colon = spec.find(':');
  try {
    if (colon != std::string::npos) {
      const auto colon2 = spec.find(':', colon + 1);
      if (colon2 == std::string::npos)
        throw CliError{kExitValidation,
                       "grid range must be start:stop:step"};
      const double start = std::stod(spec.substr(0, colon));
      const double stop = std::stod(spec.substr(colon + 1, colon2 - colon - 1));
      const double step = std::stod(spec.substr(colon2 + 1));
      if (!(step > 0.0) || stop < start)
        throw CliError{kExitValidation,
                       "grid range needs stop >= start and step > 0"};
      for (double x = start; x <= stop + 1e-9 * step; x += step)
        grid.push_back(x);
    } else {
      std::stringstream ss(spec);
      std::string cell;
      while (std::getline(ss, cell, ','))
        if (!cell.empty()) grid.push_back(std::stod(cell));
    }
  } catch (const std::invalid_argument&) {
    throw CliError{kExitValidation, "cannot parse grid '" + spec + "'"};
  } catch (const std::out_of_range&) {
    throw CliError{kExitValidation, "grid value out of range in '" + spec +
                                        "'"};
  }
  if (grid.empty())
    throw CliError{kExitValidation, "grid '" + spec + "' is empty"};
  return grid;
}

bool statistics_degenerate(const json& stats) {
  return stats.value("win_ratio_flag", "finite") != "finite" ||
         stats.value("win_odds_flag", "finite") != "finite";
}

bool report_degenerate(const json& report) {
  if (report.contains("statistics") &&
      statistics_degenerate(report.at("statistics")))
    return true;
  if (report.contains("stratified") &&
      report.at("stratified").value("pooled_flag", "finite") != "finite")
    return true;
  return false;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string data_path;
  std::string hce_path;
  std::string arms = "1,0";
  bool stratified = false;
  std::string weights = "pair-count";
  std::int64_t permutations = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool stamp = false;
  std::string out_path;
};

int run_analyze(const AnalyzeArgs& args) {
  const auto comma = args.arms.find(',');
  if (comma == std::string::npos)
    throw CliError{kExitValidation,
                   "--arms expects 'treatment,comparator' labels"};

  winstat_hce* hce_raw = nullptr;
  check(winstat_hce_load(args.hce_path.c_str(), &hce_raw), "loading HCE");
  std::unique_ptr<winstat_hce, HceDeleter> hce(hce_raw);

  winstat_dataset* data_raw = nullptr;
  check(winstat_dataset_load(args.data_path.c_str(), hce.get(), &data_raw),
        "loading dataset");
  std::unique_ptr<winstat_dataset, DatasetDeleter> data(data_raw);

  json options{{"treatment_label", args.arms.substr(0, comma)},
               {"comparator_label", args.arms.substr(comma + 1)},
               {"threads", args.threads},
               {"stamp", args.stamp}};
  if (args.stratified) {
    options["stratified"] = true;
    options["weight_scheme"] = args.weights;
  }
  if (args.permutations > 0) {
    options["permutations"] = args.permutations;
    options["seed"] = args.seed;
  }

  char* report_raw = nullptr;
  check(winstat_analyze(data.get(), options.dump().c_str(), &report_raw),
        "analysis");
  ApiString report(report_raw);

  emit(report.get(), args.out_path);
  return report_degenerate(json::parse(report.get())) ? kExitDegenerate
                                                      : kExitOk;
}

// ---------------------------------------------------------------------------
// theory
// ---------------------------------------------------------------------------

struct SlopeFlags {
  double sigma_s = 3.0;
  double sigma_e = 5.18;
  double followup = 2.0;
  int visits = 9;
  std::string times;  // explicit comma list overrides visits/followup
  double slope_treat = -2.0;
  double slope_ctrl = -3.0;
};

json design_json(const SlopeFlags& f) {
  json design{{"sigma_s", f.sigma_s},
              {"sigma_e", f.sigma_e},
              {"slope_mean_treat", f.slope_treat},
              {"slope_mean_ctrl", f.slope_ctrl}};
  if (!f.times.empty()) {
    design["measurement_times"] = parse_grid(f.times);
  } else {
    design["n_measurements"] = f.visits;
    design["followup_years"] = f.followup;
  }
  return design;
}

void add_slope_flags(CLI::App* cmd, SlopeFlags* f) {
  cmd->add_option("--sigma-s", f->sigma_s,
                  "between-subject slope SD (units/yr)");
  cmd->add_option("--sigma-e", f->sigma_e, "residual SD of one measurement");
  cmd->add_option("--followup", f->followup, "follow-up duration (years)");
  cmd->add_option("--visits", f->visits,
                  "number of equally spaced visits incl. baseline");
  cmd->add_option("--times", f->times,
                  "explicit visit times (years, comma separated)");
  cmd->add_option("--slope-treat", f->slope_treat, "treatment mean slope");
  cmd->add_option("--slope-ctrl", f->slope_ctrl, "comparator mean slope");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario_path;
  std::int64_t replications = 1;
  std::optional<std::uint64_t> seed;
  std::string method = "lsme";
  std::string out_dir;
  int threads = 1;
  std::string export_datasets = "all";
  bool stamp = false;
};

int run_simulate(const SimulateArgs& args) {
  std::string scenario_text = read_text_file(args.scenario_path);
  if (args.seed) {
    json scenario = json::parse(scenario_text, nullptr, false);
    if (scenario.is_discarded())
      throw CliError{kExitValidation, "scenario file is not valid JSON"};
    scenario["seed"] = *args.seed;
    scenario_text = scenario.dump(2) + "\n";
  }

  const json options{{"method", args.method},
                     {"replications", args.replications},
                     {"threads", args.threads},
                     {"stamp", args.stamp}};

  char* summary_raw = nullptr;
  check(winstat_simulate(scenario_text.c_str(), options.dump().c_str(),
                         &summary_raw),
        "simulation");
  ApiString summary(summary_raw);

  std::filesystem::create_directories(args.out_dir);
  write_output_file(args.out_dir + "/summary.json", summary.get());

  char* hce_raw = nullptr;
  char* first_raw = nullptr;
  check(winstat_simulate_dataset(scenario_text.c_str(), 0,
                                 args.method == "mc" ? "mc" : "lsme",
                                 &first_raw, &hce_raw),
        "dataset export");
  ApiString first(first_raw);
  ApiString hce(hce_raw);
  write_output_file(args.out_dir + "/hce.json", hce.get());

  std::int64_t n_export = 0;
  if (args.export_datasets == "all")
    n_export = args.replications;
  else if (args.export_datasets == "first")
    n_export = 1;
  else if (args.export_datasets != "none")
    throw CliError{kExitValidation,
                   "--export-datasets must be all, first or none"};
  for (std::int64_t rep = 0; rep < n_export; ++rep) {
    ApiString csv;
    if (rep == 0) {
      csv = std::move(first);
    } else {
      char* csv_raw = nullptr;
      check(winstat_simulate_dataset(scenario_text.c_str(),
                                     static_cast<std::uint64_t>(rep),
                                     args.method == "mc" ? "mc" : "lsme",
                                     &csv_raw, nullptr),
            "dataset export");
      csv.reset(csv_raw);
    }
    char name[32];
    std::snprintf(name, sizeof name, "dataset_%04lld.csv",
                  static_cast<long long>(rep + 1));
    write_output_file(args.out_dir + "/" + name, csv.get());
  }

  std::cout << "wrote " << args.out_dir << "/summary.json";
  if (n_export > 0) std::cout << " and " << n_export << " dataset file(s)";
  std::cout << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// examples
// ---------------------------------------------------------------------------

const char* kHandsParadoxPaired =
    "subject_id,y1,y0\n"
    "1,1,6\n"
    "2,3,2\n"
    "3,5,4\n";

const char* kOutcomeHce =
    R"({"components":[{"name":"outcome","kind":"continuous",)"
    R"("direction":"higher_better","margin":0}],"horizon":12})";

const char* kHandsParadoxArms =
    "subject_id,arm,stratum,followup_time,outcome_value\n"
    "T1,1,,12,1\nT2,1,,12,3\nT3,1,,12,5\n"
    "C1,0,,12,6\nC2,0,,12,2\nC3,0,,12,4\n";

const char* kEfronCsv =
    "subject_id,arm,stratum,followup_time,outcome_value\n"
    "A1,A,,12,2\nA2,A,,12,4\nA3,A,,12,9\n"
    "B1,B,,12,1\nB2,B,,12,6\nB3,B,,12,8\n"
    "C1,C,,12,3\nC2,C,,12,5\nC3,C,,12,7\n";

const char* kTable4Strata =
    R"({"strata":[{"weight":0.5,"mu_treat":55,"mu_ctrl":50,"sigma":5},)"
    R"({"weight":0.5,"mu_treat":65,"mu_ctrl":60,"sigma":5}]})";

json analyze_inline(const char* csv, const char* hce_json,
                    const json& options) {
  winstat_hce* hce_raw = nullptr;
  check(winstat_hce_parse(hce_json, &hce_raw), "example HCE");
  std::unique_ptr<winstat_hce, HceDeleter> hce(hce_raw);
  winstat_dataset* data_raw = nullptr;
  check(winstat_dataset_parse(csv, hce.get(), &data_raw), "example dataset");
  std::unique_ptr<winstat_dataset, DatasetDeleter> data(data_raw);
  char* report_raw = nullptr;
  check(winstat_analyze(data.get(), options.dump().c_str(), &report_raw),
        "example analysis");
  ApiString report(report_raw);
  return json::parse(report.get());
}

json individual_inline(const std::string& paired_csv) {
  char* report_raw = nullptr;
  check(winstat_individual(paired_csv.c_str(), &report_raw),
        "example within-subject analysis");
  ApiString report(report_raw);
  return json::parse(report.get());
}

void print_ratio(const json& stats, const std::string& label) {
  const json& wr = stats.at("win_ratio");
  std::cout << "  " << label << " = ";
  if (wr.is_null())
    std::cout << stats.at("win_ratio_flag").get<std::string>();
  else
    std::cout << wr.get<double>();
  std::cout << "\n";
}

int example_hands_paradox() {
  std::cout << "Hand's paradox: population-level vs within-subject win "
               "ratio\n\n"
            << "  subject   Y(1)   Y(0)\n"
            << "        1      1      6\n"
            << "        2      3      2\n"
            << "        3      5      4\n\n";

  const json pop = analyze_inline(kHandsParadoxArms, kOutcomeHce, json::object());
  const json& t = pop.at("tally");
  std::cout << "Population level, all " << t.at("pairs")
            << " cross-arm pairs:\n"
            << "  treatment wins " << t.at("wins_treatment") << ", control wins "
            << t.at("wins_control") << ", ties " << t.at("ties") << "\n";
  print_ratio(pop.at("statistics"), "win ratio");

  const json ind = individual_inline(kHandsParadoxPaired);
  std::cout << "\nWithin subjects (same three subjects, paired rows):\n";
  print_ratio(ind.at("statistics"), "win ratio (within-subject)");
  std::cout << "\nThe two measures point in opposite directions; the\n"
               "within-subject version is not identifiable from a\n"
               "randomized trial.\n";
  return kExitOk;
}

int example_efron_triple() {
  std::cout << "Circular win ratios across three arms\n\n"
            << "  subject    A    B    C\n"
            << "        1    2    1    3\n"
            << "        2    4    6    5\n"
            << "        3    9    8    7\n\n";

  winstat_hce* hce_raw = nullptr;
  check(winstat_hce_parse(kOutcomeHce, &hce_raw), "example HCE");
  std::unique_ptr<winstat_hce, HceDeleter> hce(hce_raw);
  winstat_dataset* data_raw = nullptr;
  check(winstat_dataset_parse(kEfronCsv, hce.get(), &data_raw),
        "example dataset");
  std::unique_ptr<winstat_dataset, DatasetDeleter> data(data_raw);
  char* report_raw = nullptr;
  check(winstat_transitivity(data.get(), "{}", &report_raw),
        "transitivity check");
  ApiString report_text(report_raw);
  const json report = json::parse(report_text.get());

  std::cout << "Pairwise win ratios over all 3 x 3 cross-arm pairs:\n";
  for (const auto& pair : report.at("pairwise")) {
    std::cout << "  WR(" << pair.at("treatment").get<std::string>() << " vs "
              << pair.at("comparator").get<std::string>() << ") = ";
    const json& wr = pair.at("statistics").at("win_ratio");
    if (wr.is_null())
      std::cout << pair.at("statistics").at("win_ratio_flag").get<std::string>();
    else
      std::cout << wr.get<double>();
    std::cout << "\n";
  }
  std::cout << "\nCycles detected:\n";
  for (const auto& cycle : report.at("cycles"))
    std::cout << "  " << cycle[0].get<std::string>() << " beats "
              << cycle[1].get<std::string>() << " beats "
              << cycle[2].get<std::string>() << " beats "
              << cycle[0].get<std::string>() << "\n";

  std::cout << "\nWithin-subject (rowwise) win ratios:\n";
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"A", "B"}, {"B", "C"}, {"C", "A"}};
  const std::map<std::string, std::vector<std::string>> columns = {
      {"A", {"2", "4", "9"}}, {"B", {"1", "6", "8"}}, {"C", {"3", "5", "7"}}};
  for (const auto& [first, second] : pairs) {
    std::string csv = "subject_id,y1,y0\n";
    for (int i = 0; i < 3; ++i)
      csv += std::to_string(i + 1) + "," + columns.at(first)[i] + "," +
             columns.at(second)[i] + "\n";
    const json ind = individual_inline(csv);
    print_ratio(ind.at("statistics"),
                "WR(" + first + " vs " + second + ", within-subject)");
  }
  std::cout << "\nEvery arm beats the next in a circle; no ranking exists.\n";
  return kExitOk;
}

int example_table4() {
  std::cout << "Non-collapsibility: per-stratum vs marginal win ratio\n\n"
            << "  stratum  weight  mu_treat  mu_ctrl  sigma\n"
            << "        1     0.5        55       50      5\n"
            << "        2     0.5        65       60      5\n\n";
  char* report_raw = nullptr;
  check(winstat_theory_strata(kTable4Strata, &report_raw), "strata report");
  ApiString report_text(report_raw);
  const json report = json::parse(report_text.get());
  for (const auto& s : report.at("per_stratum"))
    std::cout << "  stratum " << s.at("stratum") << " win ratio = "
              << s.at("win_ratio").get<double>() << "\n";
  std::cout << "  marginal win ratio  = "
            << report.at("marginal").at("win_ratio").get<double>() << "\n"
            << "  stratified pooled   = "
            << report.at("stratified_pooled_win_ratio").get<double>() << "\n\n"
            << "Identical within-stratum effects dilute when arms are\n"
               "compared across strata, so the marginal win ratio differs\n"
               "from the common stratum value without any confounding.\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"winstat — win statistics for hierarchical composite "
               "endpoints"};
  app.set_version_flag("--version", winstat_version());
  app.require_subcommand(1);

  // analyze
  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "win statistics for a subject-level dataset");
  analyze->add_option("data", analyze_args.data_path, "subject CSV")
      ->required();
  analyze->add_option("--hce", analyze_args.hce_path, "HCE config (JSON)")
      ->required();
  analyze->add_option("--arms", analyze_args.arms,
                      "treatment,comparator arm labels (default 1,0)");
  analyze->add_flag("--strata", analyze_args.stratified,
                    "add the stratified block");
  analyze->add_option("--weights", analyze_args.weights,
                      "stratum weights: equal | pair-count | sample-size");
  analyze->add_option("--permutations", analyze_args.permutations,
                      "permutation count (>= 100) for the test block");
  analyze->add_option("--seed", analyze_args.seed, "permutation seed");
  analyze->add_option("--threads", analyze_args.threads, "worker threads");
  analyze->add_flag("--stamp", analyze_args.stamp,
                    "wall-clock timestamp in the manifest");
  analyze->add_option("-o,--out", analyze_args.out_path, "report file");

  // theory
  CLI::App* theory = app.add_subcommand("theory", "closed-form win statistics");
  theory->require_subcommand(1);

  double mu1 = 0.0, mu0 = 0.0, sd1 = 1.0, sd0 = 1.0;
  std::string theory_out;
  CLI::App* normal = theory->add_subcommand(
      "normal", "win statistics of two normal outcomes");
  normal->add_option("--mu1", mu1, "treatment mean")->required();
  normal->add_option("--mu0", mu0, "comparator mean")->required();
  normal->add_option("--sd1", sd1, "treatment SD")->required();
  normal->add_option("--sd0", sd0, "comparator SD")->required();
  normal->add_option("-o,--out", theory_out, "report file");

  SlopeFlags slope_flags;
  std::string slope_method = "all", slope_out;
  CLI::App* slope = theory->add_subcommand(
      "slope", "slope win ratio under true/LSME/MC estimation");
  add_slope_flags(slope, &slope_flags);
  slope->add_option("--method", slope_method, "true | lsme | mc | all");
  slope->add_option("-o,--out", slope_out, "report file");

  std::string strata_config, strata_out, strata_csv_out;
  CLI::App* strata = theory->add_subcommand(
      "strata", "stratum-level vs marginal win ratio");
  strata->add_option("--config", strata_config, "strata config (JSON)")
      ->required();
  strata->add_option("-o,--out", strata_out, "report file");
  strata->add_option("--csv", strata_csv_out, "plot-data CSV file");

  // sweep
  SlopeFlags sweep_flags;
  std::string sweep_axis = "slope_sd", sweep_grid, sweep_out, sweep_json_out;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "slope win-ratio table along a design axis (plot data)");
  sweep->add_option("--axis", sweep_axis,
                    "slope_sd | followup | n_measurements")
      ->required();
  sweep->add_option("--grid", sweep_grid,
                    "grid as start:stop:step or comma list")
      ->required();
  add_slope_flags(sweep, &sweep_flags);
  sweep->add_option("-o,--out", sweep_out, "CSV output file")->required();
  sweep->add_option("--json", sweep_json_out, "JSON mirror file");

  // simulate
  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo run of a random-slope scenario");
  simulate->add_option("scenario", sim_args.scenario_path,
                       "scenario config (JSON)")
      ->required();
  simulate->add_option("--replications", sim_args.replications,
                       "number of replications");
  std::uint64_t sim_seed = 0;
  CLI::Option* seed_opt =
      simulate->add_option("--seed", sim_seed, "override the scenario seed");
  simulate->add_option("--method", sim_args.method, "lsme | mc | both");
  simulate->add_option("--out-dir", sim_args.out_dir, "output directory")
      ->required();
  simulate->add_option("--threads", sim_args.threads, "worker threads");
  simulate->add_option("--export-datasets", sim_args.export_datasets,
                       "all | first | none");
  simulate->add_flag("--stamp", sim_args.stamp,
                     "wall-clock timestamp in the manifest");

  // examples
  std::string example_name;
  CLI::App* examples = app.add_subcommand(
      "examples", "worked examples: hands-paradox, efron-triple, table4");
  examples->add_option("name", example_name, "example name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return run_analyze(analyze_args);

    if (*normal) {
      char* report_raw = nullptr;
      check(winstat_theory_normal(mu1, mu0, sd1, sd0, &report_raw),
            "theory normal");
      ApiString report(report_raw);
      emit(report.get(), theory_out);
      return kExitOk;
    }

    if (*slope) {
      char* report_raw = nullptr;
      check(winstat_theory_slope(design_json(slope_flags).dump().c_str(),
                                 &report_raw),
            "theory slope");
      ApiString report_text(report_raw);
      if (slope_method == "all") {
        emit(report_text.get(), slope_out);
      } else {
        json report = json::parse(report_text.get());
        const std::string key = slope_method == "true" ? "true" : slope_method;
        if (!report.at("methods").contains(key))
          throw CliError{kExitValidation,
                         "--method must be true, lsme, mc or all"};
        report["methods"] =
            json{{key, report.at("methods").at(key)},
                 {"true", report.at("methods").at("true")}};
        emit(report.dump(2) + "\n", slope_out);
      }
      return kExitOk;
    }

    if (*strata) {
      const std::string config = read_text_file(strata_config);
      char* report_raw = nullptr;
      check(winstat_theory_strata(config.c_str(), &report_raw),
            "theory strata");
      ApiString report(report_raw);
      if (!strata_csv_out.empty()) {
        char* csv_raw = nullptr;
        check(winstat_strata_csv(config.c_str(), &csv_raw), "strata CSV");
        ApiString csv(csv_raw);
        emit(csv.get(), strata_csv_out);
      }
      emit(report.get(), strata_out);
      return kExitOk;
    }

    if (*sweep) {
      const auto grid = parse_grid(sweep_grid);
      char* csv_raw = nullptr;
      char* json_raw = nullptr;
      check(winstat_sweep(design_json(sweep_flags).dump().c_str(),
                          sweep_axis.c_str(), grid.data(), grid.size(),
                          &csv_raw, sweep_json_out.empty() ? nullptr
                                                           : &json_raw),
            "sweep");
      ApiString csv(csv_raw);
      ApiString json_text(json_raw);
      emit(csv.get(), sweep_out);
      if (!sweep_json_out.empty()) emit(json_text.get(), sweep_json_out);
      return kExitOk;
    }

    if (*simulate) {
      if (*seed_opt) sim_args.seed = sim_seed;
      return run_simulate(sim_args);
    }

    if (*examples) {
      if (example_name == "hands-paradox") return example_hands_paradox();
      if (example_name == "efron-triple") return example_efron_triple();
      if (example_name == "table4") return example_table4();
      std::cerr << "unknown example '" << example_name
                << "'; valid names: hands-paradox, efron-triple, table4\n";
      return kExitValidation;
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
