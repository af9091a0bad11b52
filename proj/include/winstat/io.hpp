#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "winstat/hce.hpp"
#include "winstat/simulator.hpp"
#include "winstat/theory.hpp"
#include "winstat/win_stats.hpp"

namespace winstat::io {

// ---------------------------------------------------------------------------
// Files and digests
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path);  // throws IoError

/// Writes through a temp file in the same directory plus rename, so the
/// target either keeps its old content or carries the complete new one.
void write_file_atomic(const std::string& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);

/// Shortest decimal representation that round-trips the double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct ManifestInput {
  std::string name;
  std::string path;  // "<inline>" for in-memory inputs
  std::string sha256;
};

/// Provenance block embedded in every emitted result document. Identical
/// manifests (command, resolved options, inputs, seeds) reproduce
/// identical numerical outputs; the wall-clock timestamp is only written
/// when `stamp` is set, keeping default outputs byte-reproducible.
struct Manifest {
  std::string command;
  /// Resolved numerics-affecting options as a JSON object (execution
  /// details like thread counts stay out, so they cannot change bytes).
  std::string options_json;
  std::vector<ManifestInput> inputs;
  std::vector<std::uint64_t> seeds;
  bool stamp = false;
};

// ---------------------------------------------------------------------------
// Configuration and dataset formats
// ---------------------------------------------------------------------------

/// HCE config: {"components": [{"name", "kind", "direction", "margin"}],
/// "horizon"} with kind in {time_to_event, ordinal, continuous} and
/// direction in {higher_better, lower_better}.
HceDefinition parse_hce_json(const std::string& text);
std::string hce_to_json_text(const HceDefinition& hce);

/// Subject CSV with the frozen column layout: subject_id, arm, stratum,
/// followup_time, then per component either <name>_time,<name>_status
/// (1 occurred / 0 censored) or <name>_value (empty cell = missing).
/// Arm labels are kept verbatim; labels "1"/"0" map onto the arm codes,
/// anything else is resolved later via select_arms.
struct CsvDataset {
  std::vector<SubjectRecord> records;
  std::vector<std::string> arm_labels;  // parallel to records
};

CsvDataset parse_dataset_csv(const std::string& text,
                             const HceDefinition& hce);

/// Two-arm view: records whose label equals treatment_label get arm 1,
/// comparator_label arm 0; other labels are dropped. Errors when either
/// selected label has no subjects.
std::vector<SubjectRecord> select_arms(const CsvDataset& data,
                                       const std::string& treatment_label,
                                       const std::string& comparator_label);

std::map<std::string, std::vector<SubjectRecord>> group_by_arm(
    const CsvDataset& data);

std::string dataset_to_csv(const std::vector<SubjectRecord>& records,
                           const HceDefinition& hce,
                           const std::vector<std::string>* arm_labels =
                               nullptr);

/// Paired potential-outcome CSV: subject_id, y1, y0.
PairedDataset parse_paired_csv(const std::string& text);

std::vector<theory::StratumSpec> parse_strata_json(const std::string& text);

/// {"n_measurements", "followup_years", "sigma_s", "sigma_e",
///  "slope_mean_treat", "slope_mean_ctrl"} or an explicit
/// "measurement_times" array in place of the first two.
theory::SlopeDesign parse_design_json(const std::string& text);

sim::SimScenario parse_scenario_json(const std::string& text);
std::string scenario_to_json_text(const sim::SimScenario& s);

// ---------------------------------------------------------------------------
// Result documents (JSON text; no NaN/Infinity literals, degenerate
// statistics carry explicit flags)
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  std::string treatment_label = "1";
  std::string comparator_label = "0";
  bool stratified = false;
  WeightScheme weight_scheme = WeightScheme::PairCount;
  std::optional<std::int64_t> permutations;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Full analysis report: validation, tally with per-component attribution,
/// statistics, optional stratified and permutation blocks. Throws
/// ValidationError (listing the violations) when the dataset is not
/// analyzable.
std::string run_analysis(const CsvDataset& data, const HceDefinition& hce,
                         const AnalyzeOptions& options,
                         const Manifest& manifest);

std::string run_transitivity(const CsvDataset& data, const HceDefinition& hce,
                             int threads, const Manifest& manifest);

std::string run_individual(const PairedDataset& rows,
                           const Manifest& manifest);

std::string theory_normal_report(const theory::NormalArmPair& pair,
                                 const Manifest& manifest);
std::string theory_slope_report(const theory::SlopeDesign& design,
                                const Manifest& manifest);
std::string theory_strata_report(std::span<const theory::StratumSpec> strata,
                                 const Manifest& manifest);

/// Per-stratum plot data with marginal and pooled summary rows appended
/// (columns: stratum,weight,mu_treat,mu_ctrl,sigma,theta,win_ratio).
std::string strata_to_csv(std::span<const theory::StratumSpec> strata);

struct SweepOutputs {
  std::string csv;   // columns: x,theta_true,wr_true,theta_lsme,wr_lsme,
                     //          theta_mc,wr_mc
  std::string json;  // same rows plus design echo and manifest
};
SweepOutputs run_sweep(const theory::SlopeDesign& base, theory::SweepAxis axis,
                       std::span<const double> grid, const Manifest& manifest);

struct SimulateOptions {
  bool run_lsme = true;
  bool run_mc = false;
  std::int64_t replications = 1;
  int threads = 1;
};

/// Monte Carlo summary with the matching closed-form values per method.
std::string run_simulation(const sim::SimScenario& scenario,
                           const SimulateOptions& options,
                           const Manifest& manifest);

/// Dataset of one replication in the subject CSV schema, with slopes
/// estimated by `method`. Replication seeds match run_simulation.
std::string export_simulated_dataset(const sim::SimScenario& scenario,
                                     std::int64_t replication,
                                     sim::SlopeEstimator method);

}  // namespace winstat::io
