#include "winstat.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "winstat/error.hpp"
#include "winstat/hce.hpp"
#include "winstat/io.hpp"
#include "winstat/simulator.hpp"
#include "winstat/theory.hpp"
#include "winstat/version.hpp"
#include "winstat/win_stats.hpp"

using nlohmann::json;

struct winstat_hce {
  winstat::HceDefinition def;
  winstat::io::ManifestInput input;
};

struct winstat_dataset {
  winstat::io::CsvDataset data;
  winstat::HceDefinition hce;
  winstat::io::ManifestInput hce_input;
  winstat::io::ManifestInput input;
};

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

winstat_status fail(winstat_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

winstat_status fail_argument(const char* message) {
  return fail(WINSTAT_ERR_ARGUMENT, message);
}

// Maps library exceptions onto status codes.
template <typename Fn>
winstat_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return WINSTAT_OK;
  } catch (const winstat::ParseError& e) {
    return fail(WINSTAT_ERR_PARSE, e.what());
  } catch (const winstat::ValidationError& e) {
    return fail(WINSTAT_ERR_VALIDATION, e.what());
  } catch (const winstat::DomainError& e) {
    return fail(WINSTAT_ERR_DOMAIN, e.what());
  } catch (const winstat::IoError& e) {
    return fail(WINSTAT_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(WINSTAT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WINSTAT_ERR_INTERNAL, e.what());
  }
}

json parse_options(const char* options_json) {
  if (options_json == nullptr || options_json[0] == '\0')
    return json::object();
  json j = json::parse(options_json, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw winstat::ParseError("options must be a JSON object");
  return j;
}

winstat::io::AnalyzeOptions analyze_options_from_json(const json& j) {
  winstat::io::AnalyzeOptions opt;
  if (j.contains("treatment_label"))
    opt.treatment_label = j.at("treatment_label").get<std::string>();
  if (j.contains("comparator_label"))
    opt.comparator_label = j.at("comparator_label").get<std::string>();
  if (j.contains("stratified")) opt.stratified = j.at("stratified").get<bool>();
  if (j.contains("weight_scheme")) {
    const std::string scheme = j.at("weight_scheme").get<std::string>();
    if (scheme == "equal")
      opt.weight_scheme = winstat::WeightScheme::Equal;
    else if (scheme == "pair-count" || scheme == "pair_count")
      opt.weight_scheme = winstat::WeightScheme::PairCount;
    else if (scheme == "sample-size" || scheme == "sample_size")
      opt.weight_scheme = winstat::WeightScheme::SampleSize;
    else
      throw winstat::ParseError("unknown weight scheme '" + scheme + "'");
  }
  if (j.contains("permutations"))
    opt.permutations = j.at("permutations").get<std::int64_t>();
  if (j.contains("seed")) opt.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) opt.threads = j.at("threads").get<int>();
  return opt;
}

bool stamp_from_json(const json& j) {
  return j.contains("stamp") && j.at("stamp").get<bool>();
}

int threads_from_json(const json& j) {
  return j.contains("threads") ? j.at("threads").get<int>() : 1;
}

winstat::io::ManifestInput inline_input(const std::string& name,
                                        const std::string& content) {
  return {name, "<inline>", winstat::io::sha256_hex(content)};
}

std::string resolved_analyze_options(const winstat::io::AnalyzeOptions& opt) {
  json resolved{{"treatment_label", opt.treatment_label},
                {"comparator_label", opt.comparator_label},
                {"stratified", opt.stratified}};
  if (opt.stratified)
    resolved["weight_scheme"] =
        opt.weight_scheme == winstat::WeightScheme::Equal ? "equal"
        : opt.weight_scheme == winstat::WeightScheme::PairCount
            ? "pair-count"
            : "sample-size";
  if (opt.permutations) {
    resolved["permutations"] = *opt.permutations;
    resolved["seed"] = opt.seed;
  }
  return resolved.dump();
}

winstat::io::ManifestInput file_input(const std::string& name,
                                      const std::string& path,
                                      const std::string& content) {
  return {name, path, winstat::io::sha256_hex(content)};
}

}  // namespace

extern "C" {

const char* winstat_version(void) { return WINSTAT_VERSION_STRING; }

const char* winstat_last_error(void) { return g_last_error.c_str(); }

void winstat_string_free(char* s) { delete[] s; }

winstat_status winstat_hce_parse(const char* json_text, winstat_hce** out) {
  if (json_text == nullptr || out == nullptr)
    return fail_argument("winstat_hce_parse: null argument");
  return guarded([&] {
    auto handle = std::make_unique<winstat_hce>();
    handle->def = winstat::io::parse_hce_json(json_text);
    handle->input = inline_input("hce", json_text);
    *out = handle.release();
  });
}

winstat_status winstat_hce_load(const char* path, winstat_hce** out) {
  if (path == nullptr || out == nullptr)
    return fail_argument("winstat_hce_load: null argument");
  return guarded([&] {
    const std::string text = winstat::io::read_file(path);
    auto handle = std::make_unique<winstat_hce>();
    handle->def = winstat::io::parse_hce_json(text);
    handle->input = file_input("hce", path, text);
    *out = handle.release();
  });
}

winstat_status winstat_hce_to_json(const winstat_hce* hce, char** json_text) {
  if (hce == nullptr || json_text == nullptr)
    return fail_argument("winstat_hce_to_json: null argument");
  return guarded([&] {
    *json_text = copy_string(winstat::io::hce_to_json_text(hce->def));
  });
}

void winstat_hce_free(winstat_hce* hce) { delete hce; }

winstat_status winstat_dataset_parse(const char* csv_text,
                                     const winstat_hce* hce,
                                     winstat_dataset** out) {
  if (csv_text == nullptr || hce == nullptr || out == nullptr)
    return fail_argument("winstat_dataset_parse: null argument");
  return guarded([&] {
    auto handle = std::make_unique<winstat_dataset>();
    handle->data = winstat::io::parse_dataset_csv(csv_text, hce->def);
    handle->hce = hce->def;
    handle->hce_input = hce->input;
    handle->input = inline_input("data", csv_text);
    *out = handle.release();
  });
}

winstat_status winstat_dataset_load(const char* path, const winstat_hce* hce,
                                    winstat_dataset** out) {
  if (path == nullptr || hce == nullptr || out == nullptr)
    return fail_argument("winstat_dataset_load: null argument");
  return guarded([&] {
    const std::string text = winstat::io::read_file(path);
    auto handle = std::make_unique<winstat_dataset>();
    handle->data = winstat::io::parse_dataset_csv(text, hce->def);
    handle->hce = hce->def;
    handle->hce_input = hce->input;
    handle->input = file_input("data", path, text);
    *out = handle.release();
  });
}

void winstat_dataset_free(winstat_dataset* dataset) { delete dataset; }

winstat_status winstat_dataset_validate(const winstat_dataset* dataset,
                                        const char* options_json,
                                        char** report_json) {
  if (dataset == nullptr || report_json == nullptr)
    return fail_argument("winstat_dataset_validate: null argument");
  return guarded([&] {
    const json opts = parse_options(options_json);
    const auto analyze = analyze_options_from_json(opts);
    const auto records = winstat::io::select_arms(
        dataset->data, analyze.treatment_label, analyze.comparator_label);
    const auto report = winstat::validate_dataset(records, dataset->hce);
    json out{{"violations", json::array()}, {"warnings", json::array()}};
    for (const auto& v : report.violations)
      out["violations"].push_back({{"subject_id", v.subject_id},
                                   {"component", v.component},
                                   {"code", v.code},
                                   {"message", v.message}});
    for (const auto& w : report.warnings)
      out["warnings"].push_back({{"subject_id", w.subject_id},
                                 {"component", w.component},
                                 {"code", w.code},
                                 {"message", w.message}});
    out["ok"] = report.ok();
    *report_json = copy_string(out.dump(2) + "\n");
  });
}

winstat_status winstat_analyze(const winstat_dataset* dataset,
                               const char* options_json, char** report_json) {
  if (dataset == nullptr || report_json == nullptr)
    return fail_argument("winstat_analyze: null argument");
  return guarded([&] {
    const json opts = parse_options(options_json);
    const auto analyze = analyze_options_from_json(opts);
    winstat::io::Manifest manifest;
    manifest.command = "analyze";
    manifest.options_json = resolved_analyze_options(analyze);
    manifest.inputs = {dataset->input, dataset->hce_input};
    if (analyze.permutations) manifest.seeds = {analyze.seed};
    manifest.stamp = stamp_from_json(opts);
    *report_json = copy_string(winstat::io::run_analysis(
        dataset->data, dataset->hce, analyze, manifest));
  });
}

winstat_status winstat_transitivity(const winstat_dataset* dataset,
                                    const char* options_json,
                                    char** report_json) {
  if (dataset == nullptr || report_json == nullptr)
    return fail_argument("winstat_transitivity: null argument");
  return guarded([&] {
    const json opts = parse_options(options_json);
    winstat::io::Manifest manifest;
    manifest.command = "transitivity";
    manifest.inputs = {dataset->input, dataset->hce_input};
    manifest.stamp = stamp_from_json(opts);
    *report_json = copy_string(winstat::io::run_transitivity(
        dataset->data, dataset->hce, threads_from_json(opts), manifest));
  });
}

winstat_status winstat_individual(const char* paired_csv, char** report_json) {
  if (paired_csv == nullptr || report_json == nullptr)
    return fail_argument("winstat_individual: null argument");
  return guarded([&] {
    const auto rows = winstat::io::parse_paired_csv(paired_csv);
    winstat::io::Manifest manifest;
    manifest.command = "individual";
    manifest.inputs = {inline_input("paired", paired_csv)};
    *report_json = copy_string(winstat::io::run_individual(rows, manifest));
  });
}

winstat_status winstat_std_normal_cdf(double x, double* out) {
  if (out == nullptr)
    return fail_argument("winstat_std_normal_cdf: null argument");
  return guarded([&] { *out = winstat::theory::std_normal_cdf(x); });
}

winstat_status winstat_theory_normal(double mu_treat, double mu_ctrl,
                                     double sd_treat, double sd_ctrl,
                                     char** report_json) {
  if (report_json == nullptr)
    return fail_argument("winstat_theory_normal: null argument");
  return guarded([&] {
    winstat::io::Manifest manifest;
    manifest.command = "theory normal";
    *report_json = copy_string(winstat::io::theory_normal_report(
        winstat::theory::NormalArmPair{mu_treat, mu_ctrl, sd_treat, sd_ctrl},
        manifest));
  });
}

winstat_status winstat_theory_slope(const char* design_json,
                                    char** report_json) {
  if (design_json == nullptr || report_json == nullptr)
    return fail_argument("winstat_theory_slope: null argument");
  return guarded([&] {
    const auto design = winstat::io::parse_design_json(design_json);
    winstat::io::Manifest manifest;
    manifest.command = "theory slope";
    manifest.inputs = {inline_input("design", design_json)};
    *report_json =
        copy_string(winstat::io::theory_slope_report(design, manifest));
  });
}

winstat_status winstat_theory_strata(const char* strata_json,
                                     char** report_json) {
  if (strata_json == nullptr || report_json == nullptr)
    return fail_argument("winstat_theory_strata: null argument");
  return guarded([&] {
    const auto strata = winstat::io::parse_strata_json(strata_json);
    winstat::io::Manifest manifest;
    manifest.command = "theory strata";
    manifest.inputs = {inline_input("strata", strata_json)};
    *report_json =
        copy_string(winstat::io::theory_strata_report(strata, manifest));
  });
}

winstat_status winstat_strata_csv(const char* strata_json, char** csv_text) {
  if (strata_json == nullptr || csv_text == nullptr)
    return fail_argument("winstat_strata_csv: null argument");
  return guarded([&] {
    const auto strata = winstat::io::parse_strata_json(strata_json);
    *csv_text = copy_string(winstat::io::strata_to_csv(strata));
  });
}

winstat_status winstat_sweep(const char* design_json, const char* axis,
                             const double* grid, size_t grid_len,
                             char** csv_text, char** json_text) {
  if (design_json == nullptr || axis == nullptr ||
      (grid == nullptr && grid_len > 0))
    return fail_argument("winstat_sweep: null argument");
  if (grid_len == 0) return fail_argument("winstat_sweep: empty grid");
  return guarded([&] {
    const auto design = winstat::io::parse_design_json(design_json);
    winstat::theory::SweepAxis sweep_axis;
    const std::string a = axis;
    if (a == "slope_sd")
      sweep_axis = winstat::theory::SweepAxis::SlopeSd;
    else if (a == "followup")
      sweep_axis = winstat::theory::SweepAxis::Followup;
    else if (a == "n_measurements")
      sweep_axis = winstat::theory::SweepAxis::NMeasurements;
    else
      throw winstat::ParseError("unknown sweep axis '" + a +
                                "'; use slope_sd, followup or "
                                "n_measurements");
    winstat::io::Manifest manifest;
    manifest.command = "sweep";
    manifest.inputs = {inline_input("design", design_json)};
    const auto outputs = winstat::io::run_sweep(
        design, sweep_axis, std::span<const double>(grid, grid_len),
        manifest);
    if (csv_text != nullptr) *csv_text = copy_string(outputs.csv);
    if (json_text != nullptr) *json_text = copy_string(outputs.json);
  });
}

winstat_status winstat_simulate(const char* scenario_json,
                                const char* options_json,
                                char** summary_json) {
  if (scenario_json == nullptr || summary_json == nullptr)
    return fail_argument("winstat_simulate: null argument");
  return guarded([&] {
    const auto scenario = winstat::io::parse_scenario_json(scenario_json);
    const json opts = parse_options(options_json);
    winstat::io::SimulateOptions sim_opts;
    if (opts.contains("method")) {
      const std::string method = opts.at("method").get<std::string>();
      if (method == "lsme") {
        sim_opts.run_lsme = true;
        sim_opts.run_mc = false;
      } else if (method == "mc") {
        sim_opts.run_lsme = false;
        sim_opts.run_mc = true;
      } else if (method == "both") {
        sim_opts.run_lsme = true;
        sim_opts.run_mc = true;
      } else {
        throw winstat::ParseError("unknown method '" + method +
                                  "'; use lsme, mc or both");
      }
    }
    if (opts.contains("replications"))
      sim_opts.replications = opts.at("replications").get<std::int64_t>();
    sim_opts.threads = threads_from_json(opts);
    json methods = json::array();
    if (sim_opts.run_lsme) methods.push_back("lsme");
    if (sim_opts.run_mc) methods.push_back("mc");
    winstat::io::Manifest manifest;
    manifest.command = "simulate";
    manifest.options_json =
        json{{"methods", methods}, {"replications", sim_opts.replications}}
            .dump();
    manifest.inputs = {inline_input("scenario", scenario_json)};
    manifest.seeds = {scenario.seed};
    manifest.stamp = stamp_from_json(opts);
    *summary_json = copy_string(
        winstat::io::run_simulation(scenario, sim_opts, manifest));
  });
}

winstat_status winstat_simulate_dataset(const char* scenario_json,
                                        uint64_t replication,
                                        const char* method,
                                        char** dataset_csv, char** hce_json) {
  if (scenario_json == nullptr || dataset_csv == nullptr)
    return fail_argument("winstat_simulate_dataset: null argument");
  return guarded([&] {
    const auto scenario = winstat::io::parse_scenario_json(scenario_json);
    winstat::sim::SlopeEstimator estimator =
        winstat::sim::SlopeEstimator::Lsme;
    if (method != nullptr && method[0] != '\0') {
      const std::string m = method;
      if (m == "lsme")
        estimator = winstat::sim::SlopeEstimator::Lsme;
      else if (m == "mc")
        estimator = winstat::sim::SlopeEstimator::MeanChange;
      else
        throw winstat::ParseError("unknown method '" + m +
                                  "'; use lsme or mc");
    }
    *dataset_csv = copy_string(winstat::io::export_simulated_dataset(
        scenario, static_cast<std::int64_t>(replication), estimator));
    if (hce_json != nullptr)
      *hce_json = copy_string(winstat::io::hce_to_json_text(
          winstat::sim::scenario_hce(scenario)));
  });
}

}  // extern "C"
