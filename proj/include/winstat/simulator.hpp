#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "winstat/hce.hpp"
#include "winstat/theory.hpp"

namespace winstat::sim {

struct EventComponentSpec {
  std::string name;
  double hazard_treat = 0.0;  // per-year exponential rates, >= 0
  double hazard_ctrl = 0.0;
};

/// Random-slope trial scenario: per subject the outcome at visit time t is
/// intercept + slope * t + residual, with slope ~ N(arm mean, sigma_s^2)
/// and residual ~ N(0, sigma_e^2) independent per visit. Optional adverse
/// events truncate follow-up.
struct SimScenario {
  theory::SlopeDesign design;
  std::int64_t n_per_arm = 0;  // >= 2
  double intercept_mean = 40.0;
  double intercept_sd = 0.0;
  std::vector<EventComponentSpec> event_components;
  std::uint64_t seed = 0;

  void check() const;
};

struct SubjectTruth {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> event_times;  // per event component, may exceed T
};

struct SimulatedSubject {
  std::string id;
  int arm = 0;
  double followup_years = 0.0;
  /// Values aligned with the visit schedule; nullopt after follow-up ends.
  std::vector<std::optional<double>> gfr;
  /// Aligned with the scenario's event components.
  std::vector<Observation> events;  // times in years
};

struct SimulatedTrial {
  std::vector<double> visit_times;  // years
  std::vector<SimulatedSubject> subjects;
  std::vector<SubjectTruth> truth;  // excluded from estimator inputs
};

enum class SlopeEstimator { Lsme, MeanChange };

struct SlopeEstimates {
  SlopeEstimator method = SlopeEstimator::Lsme;
  /// Per-subject estimate; nullopt when the subject is flagged.
  std::vector<std::optional<double>> estimate;
  /// Indices of subjects with too few usable visits for the method.
  std::vector<std::size_t> flagged;
};

struct McWrResult {
  double mean_wr = 0.0;
  double se_wr = 0.0;
  bool se_available = false;
  std::int64_t replications = 0;
  std::int64_t degenerate = 0;  // replications with a non-finite WR, excluded
  std::vector<double> replicate_wr;  // NaN at degenerate replications
  std::vector<std::int64_t> replicate_wins_t, replicate_wins_c,
      replicate_ties;
  /// Within-arm variance of the slope estimates, pooled over arms and
  /// replications.
  double estimate_variance = 0.0;
  std::int64_t flagged_subjects = 0;
};

/// Seed of replication `rep` of a Monte Carlo run, derived from the
/// scenario seed; replication 0 is the plain scenario run.
std::uint64_t replication_seed(const SimScenario& s, std::int64_t rep);

/// Draws one trial. Every subject has its own generator stream derived
/// from (seed, subject index), with draws in a fixed order (slope,
/// intercept, one residual per visit, one exponential per event
/// component), so results are bit-identical for any parallel schedule.
/// Subjects 0..n-1 are treatment ("T0001", ...), n..2n-1 comparator.
SimulatedTrial simulate_trial(const SimScenario& s);

/// Per-subject slope estimates. Lsme is the ordinary least-squares slope
/// over all observed visits (needs >= 2); MeanChange is
/// (last scheduled visit - baseline) / elapsed time and needs both ends
/// unless `mc_use_last_available` allows the last pre-truncation visit.
/// Subjects failing the requirement are flagged, not dropped.
SlopeEstimates estimate_slopes(const SimulatedTrial& t, SlopeEstimator method,
                               bool mc_use_last_available = false);

/// HCE matching the scenario's exported datasets: the event components in
/// order, then the slope component (HigherBetter, margin 0). Times are
/// exported in months (years * 12).
HceDefinition scenario_hce(const SimScenario& s,
                           const std::string& slope_component = "gfr_slope");

/// Subject records in the HCE schema for one simulated trial with slope
/// estimates attached; flagged subjects carry a missing slope value.
std::vector<SubjectRecord> to_records(
    const SimScenario& s, const SimulatedTrial& trial,
    const SlopeEstimates& slopes,
    const std::string& slope_component = "gfr_slope");

/// Empirical WR across replications: per replication the trial is drawn
/// with a seed derived from (scenario seed, replication), slopes are
/// estimated, and the full cross-arm tally is computed over the scenario
/// HCE. Degenerate replications (non-finite WR) are counted and excluded
/// from the mean. Replications are independent streams and may run in
/// parallel; output is bit-identical to a sequential run.
McWrResult monte_carlo_wr(const SimScenario& s, SlopeEstimator method,
                          std::int64_t replications, int threads = 1);

}  // namespace winstat::sim
