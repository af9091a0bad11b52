#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "winstat/hce.hpp"

namespace winstat {

struct ComponentWins {
  std::int64_t wins_treatment = 0;
  std::int64_t wins_control = 0;
};

/// Win/loss/tie counts over the full treatment x comparator cross product,
/// with wins attributed to the hierarchy level that decided them.
struct WinTally {
  std::int64_t n_treatment = 0;
  std::int64_t n_control = 0;
  std::int64_t wins_treatment = 0;
  std::int64_t wins_control = 0;
  std::int64_t ties = 0;
  std::vector<ComponentWins> per_component;  // aligned with HCE components

  std::int64_t pairs() const { return n_treatment * n_control; }
  /// Component-wise merge of two partial tallies over the same HCE.
  WinTally& operator+=(const WinTally& other);
};

enum class StatFlag { Finite, Infinite, Undefined };

/// Win proportions and the three summary statistics. When a flag is not
/// Finite the corresponding value is +inf or NaN and must not be consumed
/// as a number; serialization layers map it to an explicit flag instead.
struct WinStatistics {
  double p_treatment = 0.0;
  double p_control = 0.0;
  double p_tie = 0.0;
  double win_ratio = 1.0;
  StatFlag win_ratio_flag = StatFlag::Finite;
  double win_odds = 1.0;
  StatFlag win_odds_flag = StatFlag::Finite;
  double net_benefit = 0.0;
};

enum class WeightScheme { Equal, PairCount, SampleSize };

struct StratumResult {
  WinTally tally;
  WinStatistics stats;
  double weight = 0.0;
};

struct StratifiedResult {
  std::map<std::string, StratumResult> per_stratum;
  double pooled_win_ratio = 1.0;
  StatFlag pooled_flag = StatFlag::Finite;
  WeightScheme scheme = WeightScheme::PairCount;
};

struct PairedRow {
  std::string subject_id;
  double y_treatment = 0.0;
  double y_comparator = 0.0;
};
/// Factual/counterfactual outcomes of the same subjects under both arms,
/// one row per subject, for a single ordered outcome.
using PairedDataset = std::vector<PairedRow>;

struct PermutationResult {
  double observed_net_benefit = 0.0;
  double p_value = 1.0;
  std::int64_t n_permutations = 0;
  std::uint64_t seed = 0;
};

struct TransitivityResult {
  std::vector<std::string> arm_labels;  // sorted
  /// Statistics for every ordered pair (first label plays treatment).
  std::map<std::pair<std::string, std::string>, WinStatistics> pairwise;
  /// Oriented 3-cycles (X beats Y beats Z beats X), each reported once.
  std::vector<std::array<std::string, 3>> cycles;
};

/// Adjudicates the full n_t x n_c cross product. Records with arm == 1 form
/// the treatment side, arm == 0 the comparator side. Pair comparisons are
/// partitioned across `threads` workers; partial tallies merge by addition,
/// so the result is identical for every thread count.
/// Throws ValidationError when either arm is empty.
WinTally tally(const std::vector<SubjectRecord>& records,
               const HceDefinition& hce, int threads = 1);

/// Proportions and WR/WO/NB from a tally. Degenerate ratios are flagged
/// (Infinite when the denominator is empty, Undefined when both sides are),
/// never silent NaN.
WinStatistics win_statistics(const WinTally& t);

/// Per-stratum tallies plus a pooled win ratio: the ratio of weighted win
/// proportions, which reproduces the common stratum WR exactly when all
/// strata agree. Every record must carry a stratum and every stratum both
/// arms.
StratifiedResult stratified_win_ratio(const std::vector<SubjectRecord>& records,
                                      const HceDefinition& hce,
                                      WeightScheme scheme, int threads = 1);

/// Within-subject win statistics over paired outcomes (higher is better).
WinStatistics individual_win_ratio(const PairedDataset& paired);

/// Two-sided permutation test of no treatment effect with |net benefit| as
/// the statistic: p = (1 + #{perm >= observed}) / (1 + n_permutations).
/// Arm labels are permuted with per-permutation streams derived from the
/// seed, so the p-value is reproducible for any thread count and invariant
/// to the order of the input records. Requires n_permutations >= 100.
PermutationResult permutation_test(const std::vector<SubjectRecord>& records,
                                   const HceDefinition& hce,
                                   std::int64_t n_permutations,
                                   std::uint64_t seed, int threads = 1);

/// Win ratio for every ordered pair of arms plus all circular triples
/// (X beats Y, Y beats Z, Z beats X). Needs at least two non-empty arms.
TransitivityResult transitivity_check(
    const std::map<std::string, std::vector<SubjectRecord>>& arms,
    const HceDefinition& hce, int threads = 1);

}  // namespace winstat
