#include "winstat/win_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "winstat/error.hpp"
#include "winstat/parallel.hpp"
#include "winstat/rng.hpp"

namespace winstat {

namespace {

// Column-major copy of the dataset so the all-pairs kernel touches flat
// arrays instead of per-record maps.
struct CompiledData {
  double horizon = 0.0;
  std::vector<double> followup;
  struct Column {
    ComponentKind kind;
    bool higher_better;
    double margin;
    std::vector<double> time_or_value;  // event time, or value (NaN missing)
    std::vector<std::uint8_t> occurred;
  };
  std::vector<Column> columns;

  std::size_t size() const { return followup.size(); }

  static CompiledData build(const std::vector<const SubjectRecord*>& recs,
                            const HceDefinition& hce) {
    CompiledData data;
    data.horizon = hce.horizon;
    data.followup.reserve(recs.size());
    for (const auto* r : recs) data.followup.push_back(r->followup_time);
    data.columns.reserve(hce.components.size());
    for (const auto& comp : hce.components) {
      Column col;
      col.kind = comp.kind;
      col.higher_better = comp.direction == Direction::HigherBetter;
      col.margin = comp.margin;
      col.time_or_value.reserve(recs.size());
      if (comp.kind == ComponentKind::TimeToEvent)
        col.occurred.reserve(recs.size());
      for (const auto* r : recs) {
        auto it = r->observations.find(comp.name);
        if (it == r->observations.end())
          throw ValidationError("subject '" + r->subject_id +
                                "' has no observation for component '" +
                                comp.name + "'");
        const Observation& obs = it->second;
        if (comp.kind == ComponentKind::TimeToEvent) {
          if (obs.kind != Observation::Kind::Event)
            throw ValidationError("component '" + comp.name +
                                  "' is time-to-event but subject '" +
                                  r->subject_id + "' carries a value");
          if (obs.time < 0.0)
            throw ValidationError("subject '" + r->subject_id +
                                  "' has negative event time on '" +
                                  comp.name + "'");
          col.time_or_value.push_back(obs.time);
          col.occurred.push_back(obs.occurred ? 1 : 0);
        } else {
          if (obs.kind == Observation::Kind::Event)
            throw ValidationError("component '" + comp.name +
                                  "' is a value component but subject '" +
                                  r->subject_id + "' carries event data");
          col.time_or_value.push_back(
              obs.kind == Observation::Kind::Value
                  ? obs.value
                  : std::numeric_limits<double>::quiet_NaN());
        }
      }
      data.columns.push_back(std::move(col));
    }
    return data;
  }

  // First non-tie component decides. Returns the win sign for side i
  // (+1 i wins, -1 j wins, 0 tie) and stores the deciding index.
  int adjudicate(std::size_t i, std::size_t j, std::size_t* deciding) const {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const Column& col = columns[k];
      int r;
      if (col.kind == ComponentKind::TimeToEvent) {
        const double h = std::min({followup[i], followup[j], horizon});
        r = detail::compare_tte(col.occurred[i] != 0, col.time_or_value[i],
                                col.occurred[j] != 0, col.time_or_value[j], h);
      } else {
        r = detail::compare_value(col.time_or_value[i], col.time_or_value[j],
                                  col.margin, col.higher_better);
      }
      if (r != 0) {
        *deciding = k;
        return r;
      }
    }
    return 0;
  }
};

// Cross-product tally of [t_begin, t_end) against [c_begin, c_end).
WinTally tally_ranges(const CompiledData& data, std::size_t t_begin,
                      std::size_t t_end, std::size_t c_begin,
                      std::size_t c_end, int threads) {
  const std::size_t n_t = t_end - t_begin;
  WinTally total;
  total.n_treatment = static_cast<std::int64_t>(n_t);
  total.n_control = static_cast<std::int64_t>(c_end - c_begin);
  total.per_component.resize(data.columns.size());

  const ChunkPlan plan(n_t, threads);
  std::vector<WinTally> partial(plan.count);
  parallel_chunks(plan, [&](std::size_t idx, std::size_t begin,
                            std::size_t end) {
    WinTally& part = partial[idx];
    part.per_component.resize(data.columns.size());
    for (std::size_t ti = begin; ti < end; ++ti) {
      for (std::size_t cj = c_begin; cj < c_end; ++cj) {
        std::size_t deciding = 0;
        const int r = data.adjudicate(t_begin + ti, cj, &deciding);
        if (r > 0) {
          ++part.wins_treatment;
          ++part.per_component[deciding].wins_treatment;
        } else if (r < 0) {
          ++part.wins_control;
          ++part.per_component[deciding].wins_control;
        } else {
          ++part.ties;
        }
      }
    }
  });
  for (const auto& part : partial) total += part;
  return total;
}

void split_arms(const std::vector<SubjectRecord>& records,
                std::vector<const SubjectRecord*>* treatment,
                std::vector<const SubjectRecord*>* control) {
  for (const auto& rec : records) {
    if (rec.arm == 1)
      treatment->push_back(&rec);
    else if (rec.arm == 0)
      control->push_back(&rec);
    else
      throw ValidationError("subject '" + rec.subject_id +
                            "' has arm code " + std::to_string(rec.arm) +
                            "; expected 0 or 1");
  }
  if (treatment->empty()) throw ValidationError("treatment arm is empty");
  if (control->empty()) throw ValidationError("comparator arm is empty");
}

WinStatistics stats_from_counts(std::int64_t wins_t, std::int64_t wins_c,
                                std::int64_t ties, std::int64_t pairs) {
  WinStatistics s;
  const double total = static_cast<double>(pairs);
  s.p_treatment = static_cast<double>(wins_t) / total;
  s.p_control = static_cast<double>(wins_c) / total;
  s.p_tie = static_cast<double>(ties) / total;
  s.net_benefit = static_cast<double>(wins_t - wins_c) / total;

  if (wins_c > 0) {
    s.win_ratio = static_cast<double>(wins_t) / static_cast<double>(wins_c);
    s.win_ratio_flag = StatFlag::Finite;
  } else if (wins_t > 0) {
    s.win_ratio = std::numeric_limits<double>::infinity();
    s.win_ratio_flag = StatFlag::Infinite;
  } else {
    s.win_ratio = std::numeric_limits<double>::quiet_NaN();
    s.win_ratio_flag = StatFlag::Undefined;
  }

  const double wo_num = static_cast<double>(wins_t) + 0.5 * ties;
  const double wo_den = static_cast<double>(wins_c) + 0.5 * ties;
  if (wo_den > 0.0) {
    s.win_odds = wo_num / wo_den;
    s.win_odds_flag = StatFlag::Finite;
  } else {
    s.win_odds = std::numeric_limits<double>::infinity();
    s.win_odds_flag = StatFlag::Infinite;
  }
  return s;
}

}  // namespace

WinTally& WinTally::operator+=(const WinTally& other) {
  wins_treatment += other.wins_treatment;
  wins_control += other.wins_control;
  ties += other.ties;
  if (per_component.size() < other.per_component.size())
    per_component.resize(other.per_component.size());
  for (std::size_t i = 0; i < other.per_component.size(); ++i) {
    per_component[i].wins_treatment += other.per_component[i].wins_treatment;
    per_component[i].wins_control += other.per_component[i].wins_control;
  }
  return *this;
}

WinTally tally(const std::vector<SubjectRecord>& records,
               const HceDefinition& hce, int threads) {
  hce.check();
  std::vector<const SubjectRecord*> treatment, control;
  split_arms(records, &treatment, &control);

  std::vector<const SubjectRecord*> ordered = treatment;
  ordered.insert(ordered.end(), control.begin(), control.end());
  const CompiledData data = CompiledData::build(ordered, hce);
  return tally_ranges(data, 0, treatment.size(), treatment.size(),
                      ordered.size(), threads);
}

WinStatistics win_statistics(const WinTally& t) {
  if (t.n_treatment < 1 || t.n_control < 1)
    throw ValidationError("tally needs at least one subject per arm");
  if (t.wins_treatment + t.wins_control + t.ties != t.pairs())
    throw ValidationError("tally counts do not cover all pairs");
  return stats_from_counts(t.wins_treatment, t.wins_control, t.ties,
                           t.pairs());
}

StratifiedResult stratified_win_ratio(
    const std::vector<SubjectRecord>& records, const HceDefinition& hce,
    WeightScheme scheme, int threads) {
  hce.check();
  std::map<std::string, std::vector<SubjectRecord>> groups;
  for (const auto& rec : records) {
    if (!rec.stratum || rec.stratum->empty())
      throw ValidationError("subject '" + rec.subject_id +
                            "' has no stratum");
    groups[*rec.stratum].push_back(rec);
  }
  if (groups.empty()) throw ValidationError("no strata in dataset");

  StratifiedResult result;
  result.scheme = scheme;
  double weight_total = 0.0;
  for (auto& [label, subset] : groups) {
    bool has_t = false, has_c = false;
    for (const auto& rec : subset) {
      if (rec.arm == 1) has_t = true;
      if (rec.arm == 0) has_c = true;
    }
    if (!has_t || !has_c)
      throw ValidationError("stratum '" + label + "' is missing the " +
                            (has_t ? "comparator" : "treatment") + " arm");
    const WinTally t = tally(subset, hce, threads);
    double raw = 1.0;
    switch (scheme) {
      case WeightScheme::Equal:
        raw = 1.0;
        break;
      case WeightScheme::PairCount:
        raw = static_cast<double>(t.pairs());
        break;
      case WeightScheme::SampleSize:
        raw = static_cast<double>(t.n_treatment + t.n_control);
        break;
    }
    weight_total += raw;
    result.per_stratum[label] = StratumResult{t, win_statistics(t), raw};
  }

  double pooled_win = 0.0, pooled_loss = 0.0;
  for (auto& [label, sr] : result.per_stratum) {
    sr.weight /= weight_total;
    pooled_win += sr.weight * sr.stats.p_treatment;
    pooled_loss += sr.weight * sr.stats.p_control;
  }
  if (pooled_loss > 0.0) {
    result.pooled_win_ratio = pooled_win / pooled_loss;
    result.pooled_flag = StatFlag::Finite;
  } else if (pooled_win > 0.0) {
    result.pooled_win_ratio = std::numeric_limits<double>::infinity();
    result.pooled_flag = StatFlag::Infinite;
  } else {
    result.pooled_win_ratio = std::numeric_limits<double>::quiet_NaN();
    result.pooled_flag = StatFlag::Undefined;
  }
  return result;
}

WinStatistics individual_win_ratio(const PairedDataset& paired) {
  if (paired.empty()) throw ValidationError("paired dataset is empty");
  std::int64_t wins = 0, losses = 0, ties = 0;
  for (const auto& row : paired) {
    if (std::isnan(row.y_treatment) || std::isnan(row.y_comparator))
      throw ValidationError("paired row '" + row.subject_id +
                            "' has a missing outcome");
    if (row.y_treatment > row.y_comparator)
      ++wins;
    else if (row.y_treatment < row.y_comparator)
      ++losses;
    else
      ++ties;
  }
  return stats_from_counts(wins, losses, ties,
                           static_cast<std::int64_t>(paired.size()));
}

PermutationResult permutation_test(const std::vector<SubjectRecord>& records,
                                   const HceDefinition& hce,
                                   std::int64_t n_permutations,
                                   std::uint64_t seed, int threads) {
  hce.check();
  if (n_permutations < 100)
    throw ValidationError("permutation test needs n_permutations >= 100");

  // Canonical subject order makes the p-value independent of input order.
  std::vector<const SubjectRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& rec : records) ordered.push_back(&rec);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const SubjectRecord* a, const SubjectRecord* b) {
                     return a->subject_id < b->subject_id;
                   });

  std::size_t n_t = 0, n_c = 0;
  for (const auto* r : ordered) {
    if (r->arm == 1)
      ++n_t;
    else if (r->arm == 0)
      ++n_c;
    else
      throw ValidationError("subject '" + r->subject_id +
                            "' has arm code " + std::to_string(r->arm) +
                            "; expected 0 or 1");
  }
  if (n_t == 0) throw ValidationError("treatment arm is empty");
  if (n_c == 0) throw ValidationError("comparator arm is empty");

  const CompiledData data = CompiledData::build(ordered, hce);
  const std::size_t n = ordered.size();

  // Net score of each subject against everyone else. Because wins within a
  // relabeled arm cancel pairwise, the cross-arm win difference for any
  // labeling is just the sum of these scores over the treatment set, which
  // turns each permutation into an O(n) pass.
  std::vector<std::int64_t> net_score(n, 0);
  {
    const ChunkPlan plan(n, threads);
    std::vector<std::vector<std::int64_t>> partial(
        plan.count, std::vector<std::int64_t>(n, 0));
    parallel_chunks(plan, [&](std::size_t idx, std::size_t begin,
                              std::size_t end) {
      auto& score = partial[idx];
      for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          std::size_t deciding = 0;
          const int r = data.adjudicate(i, j, &deciding);
          score[i] += r;
          score[j] -= r;
        }
      }
    });
    for (const auto& score : partial)
      for (std::size_t i = 0; i < n; ++i) net_score[i] += score[i];
  }

  std::int64_t observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (ordered[i]->arm == 1) observed += net_score[i];
  const std::int64_t abs_observed = std::llabs(observed);

  const auto nperm = static_cast<std::size_t>(n_permutations);
  const ChunkPlan plan(nperm, threads);
  std::vector<std::int64_t> exceed(plan.count, 0);
  parallel_chunks(plan, [&](std::size_t idx, std::size_t begin,
                            std::size_t end) {
    std::vector<std::uint32_t> perm(n);
    for (std::size_t p = begin; p < end; ++p) {
      SplitMix64 rng(derive_stream(seed, p + 1));
      std::iota(perm.begin(), perm.end(), 0u);
      for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
        std::swap(perm[i], perm[j]);
      }
      std::int64_t stat = 0;
      for (std::size_t i = 0; i < n_t; ++i) stat += net_score[perm[i]];
      if (std::llabs(stat) >= abs_observed) ++exceed[idx];
    }
  });
  const std::int64_t exceed_total =
      std::accumulate(exceed.begin(), exceed.end(), std::int64_t{0});

  PermutationResult result;
  result.observed_net_benefit =
      static_cast<double>(observed) / (static_cast<double>(n_t) * n_c);
  result.p_value = static_cast<double>(1 + exceed_total) /
                   static_cast<double>(1 + n_permutations);
  result.n_permutations = n_permutations;
  result.seed = seed;
  return result;
}

TransitivityResult transitivity_check(
    const std::map<std::string, std::vector<SubjectRecord>>& arms,
    const HceDefinition& hce, int threads) {
  hce.check();
  if (arms.size() < 2)
    throw ValidationError("transitivity check needs at least two arms");

  TransitivityResult result;
  std::vector<const SubjectRecord*> ordered;
  std::map<std::string, std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& [label, recs] : arms) {
    if (recs.empty())
      throw ValidationError("arm '" + label + "' is empty");
    const std::size_t begin = ordered.size();
    for (const auto& rec : recs) ordered.push_back(&rec);
    ranges[label] = {begin, ordered.size()};
    result.arm_labels.push_back(label);
  }
  const CompiledData data = CompiledData::build(ordered, hce);

  // wins[a][b]: wins of a over b when a plays the treatment side
  std::map<std::pair<std::string, std::string>, std::int64_t> wins;
  for (const auto& a : result.arm_labels) {
    for (const auto& b : result.arm_labels) {
      if (a == b) continue;
      const auto [ab, ae] = ranges[a];
      const auto [bb, be] = ranges[b];
      const WinTally t = tally_ranges(data, ab, ae, bb, be, threads);
      wins[{a, b}] = t.wins_treatment;
      result.pairwise[{a, b}] = win_statistics(t);
    }
  }

  auto beats = [&wins](const std::string& x, const std::string& y) {
    return wins[{x, y}] > wins[{y, x}];
  };
  const auto& labels = result.arm_labels;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      for (std::size_t k = j + 1; k < labels.size(); ++k) {
        const std::string &x = labels[i], &y = labels[j], &z = labels[k];
        if (beats(x, y) && beats(y, z) && beats(z, x))
          result.cycles.push_back({x, y, z});
        else if (beats(x, z) && beats(z, y) && beats(y, x))
          result.cycles.push_back({x, z, y});
      }
  return result;
}

}  // namespace winstat
