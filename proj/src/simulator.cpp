#include "winstat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "winstat/error.hpp"
#include "winstat/parallel.hpp"
#include "winstat/rng.hpp"
#include "winstat/win_stats.hpp"

namespace winstat::sim {

namespace {

constexpr double kMonthsPerYear = 12.0;

std::string subject_id(int arm, std::int64_t index) {
  std::ostringstream id;
  id << (arm == 1 ? 'T' : 'C');
  id.width(4);
  id.fill('0');
  id << index + 1;
  return id.str();
}

}  // namespace

std::uint64_t replication_seed(const SimScenario& s, std::int64_t rep) {
  return derive_stream(s.seed, static_cast<std::uint64_t>(rep), 0x5e9u);
}

void SimScenario::check() const {
  design.check();
  if (n_per_arm < 2) throw DomainError("n_per_arm must be at least 2");
  if (!(intercept_sd >= 0.0))
    throw DomainError("intercept SD must be nonnegative");
  for (const auto& ev : event_components) {
    if (ev.name.empty()) throw DomainError("event component with empty name");
    if (!(ev.hazard_treat >= 0.0) || !(ev.hazard_ctrl >= 0.0))
      throw DomainError("event hazards must be nonnegative");
  }
}

SimulatedTrial simulate_trial(const SimScenario& s) {
  s.check();
  const std::size_t n_visits = s.design.measurement_times.size();
  const std::size_t total = static_cast<std::size_t>(2 * s.n_per_arm);

  SimulatedTrial trial;
  trial.visit_times = s.design.measurement_times;
  trial.subjects.resize(total);
  trial.truth.resize(total);

  for (std::size_t idx = 0; idx < total; ++idx) {
    const int arm = idx < static_cast<std::size_t>(s.n_per_arm) ? 1 : 0;
    const std::int64_t within =
        static_cast<std::int64_t>(idx) - (arm == 1 ? 0 : s.n_per_arm);
    SplitMix64 rng(derive_stream(s.seed, idx));

    SubjectTruth& truth = trial.truth[idx];
    truth.slope = rng.normal(
        arm == 1 ? s.design.slope_mean_treat : s.design.slope_mean_ctrl,
        s.design.sigma_s);
    truth.intercept = rng.normal(s.intercept_mean, s.intercept_sd);

    std::vector<double> residuals(n_visits);
    for (std::size_t k = 0; k < n_visits; ++k)
      residuals[k] = rng.normal(0.0, s.design.sigma_e);

    truth.event_times.reserve(s.event_components.size());
    double followup = s.design.followup_years;
    for (const auto& ev : s.event_components) {
      const double hazard = arm == 1 ? ev.hazard_treat : ev.hazard_ctrl;
      const double t = hazard > 0.0
                           ? rng.exponential(hazard)
                           : std::numeric_limits<double>::infinity();
      truth.event_times.push_back(t);
      followup = std::min(followup, t);
    }

    SimulatedSubject& subj = trial.subjects[idx];
    subj.id = subject_id(arm, within);
    subj.arm = arm;
    subj.followup_years = followup;
    subj.gfr.resize(n_visits);
    for (std::size_t k = 0; k < n_visits; ++k) {
      const double t = trial.visit_times[k];
      if (t <= followup)
        subj.gfr[k] = truth.intercept + truth.slope * t + residuals[k];
    }
    subj.events.reserve(s.event_components.size());
    for (std::size_t e = 0; e < s.event_components.size(); ++e) {
      const double t = truth.event_times[e];
      if (t <= followup)
        subj.events.push_back(Observation::event(true, t));
      else
        subj.events.push_back(Observation::event(false, followup));
    }
  }
  return trial;
}

SlopeEstimates estimate_slopes(const SimulatedTrial& t, SlopeEstimator method,
                               bool mc_use_last_available) {
  SlopeEstimates out;
  out.method = method;
  out.estimate.resize(t.subjects.size());
  const std::size_t n_visits = t.visit_times.size();

  for (std::size_t idx = 0; idx < t.subjects.size(); ++idx) {
    const auto& gfr = t.subjects[idx].gfr;
    if (method == SlopeEstimator::Lsme) {
      // OLS slope over the observed visits
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      int m = 0;
      for (std::size_t k = 0; k < n_visits; ++k) {
        if (!gfr[k]) continue;
        const double x = t.visit_times[k], y = *gfr[k];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
      }
      const double denom = m > 1 ? sxx - sx * sx / m : 0.0;
      if (m < 2 || !(denom > 0.0)) {
        out.flagged.push_back(idx);
        continue;
      }
      out.estimate[idx] = (sxy - sx * sy / m) / denom;
    } else {
      if (!gfr.front()) {
        out.flagged.push_back(idx);
        continue;
      }
      std::size_t last = n_visits;  // sentinel
      if (gfr.back()) {
        last = n_visits - 1;
      } else if (mc_use_last_available) {
        for (std::size_t k = n_visits; k-- > 1;) {
          if (gfr[k]) {
            last = k;
            break;
          }
        }
      }
      if (last == n_visits || t.visit_times[last] <= 0.0) {
        out.flagged.push_back(idx);
        continue;
      }
      out.estimate[idx] =
          (*gfr[last] - *gfr.front()) / t.visit_times[last];
    }
  }
  return out;
}

HceDefinition scenario_hce(const SimScenario& s,
                           const std::string& slope_component) {
  HceDefinition hce;
  for (const auto& ev : s.event_components)
    hce.components.push_back(
        ComponentSpec{ev.name, ComponentKind::TimeToEvent,
                      Direction::HigherBetter, 0.0});
  hce.components.push_back(ComponentSpec{
      slope_component, ComponentKind::Continuous, Direction::HigherBetter,
      0.0});
  hce.horizon = s.design.followup_years * kMonthsPerYear;
  hce.check();
  return hce;
}

std::vector<SubjectRecord> to_records(const SimScenario& s,
                                      const SimulatedTrial& trial,
                                      const SlopeEstimates& slopes,
                                      const std::string& slope_component) {
  std::vector<SubjectRecord> records;
  records.reserve(trial.subjects.size());
  for (std::size_t idx = 0; idx < trial.subjects.size(); ++idx) {
    const auto& subj = trial.subjects[idx];
    SubjectRecord rec;
    rec.subject_id = subj.id;
    rec.arm = subj.arm;
    rec.followup_time = subj.followup_years * kMonthsPerYear;
    for (std::size_t e = 0; e < s.event_components.size(); ++e) {
      const Observation& ev = subj.events[e];
      rec.observations[s.event_components[e].name] =
          Observation::event(ev.occurred, ev.time * kMonthsPerYear);
    }
    rec.observations[slope_component] =
        slopes.estimate[idx] ? Observation::measured(*slopes.estimate[idx])
                             : Observation::missing();
    records.push_back(std::move(rec));
  }
  return records;
}

McWrResult monte_carlo_wr(const SimScenario& s, SlopeEstimator method,
                          std::int64_t replications, int threads) {
  s.check();
  if (replications < 1) throw DomainError("replications must be >= 1");

  McWrResult result;
  result.replications = replications;
  const auto n_reps = static_cast<std::size_t>(replications);
  result.replicate_wr.assign(n_reps,
                             std::numeric_limits<double>::quiet_NaN());
  result.replicate_wins_t.assign(n_reps, 0);
  result.replicate_wins_c.assign(n_reps, 0);
  result.replicate_ties.assign(n_reps, 0);

  std::vector<double> var_sum(n_reps, 0.0);
  std::vector<std::int64_t> var_arms(n_reps, 0);
  std::vector<std::int64_t> flagged(n_reps, 0);

  const ChunkPlan plan(n_reps, threads);
  parallel_chunks(plan, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t rep = begin; rep < end; ++rep) {
      SimScenario rep_scenario = s;
      rep_scenario.seed = replication_seed(s, static_cast<std::int64_t>(rep));
      const SimulatedTrial trial = simulate_trial(rep_scenario);
      const SlopeEstimates slopes = estimate_slopes(trial, method);
      flagged[rep] = static_cast<std::int64_t>(slopes.flagged.size());

      // within-arm sample variance of the estimates
      for (int arm = 0; arm <= 1; ++arm) {
        double sum = 0.0, sum2 = 0.0;
        std::int64_t m = 0;
        for (std::size_t i = 0; i < trial.subjects.size(); ++i) {
          if (trial.subjects[i].arm != arm || !slopes.estimate[i]) continue;
          sum += *slopes.estimate[i];
          sum2 += *slopes.estimate[i] * *slopes.estimate[i];
          ++m;
        }
        if (m > 1) {
          var_sum[rep] += (sum2 - sum * sum / m) / (m - 1);
          ++var_arms[rep];
        }
      }

      const HceDefinition hce = scenario_hce(rep_scenario);
      const auto records = to_records(rep_scenario, trial, slopes);
      const WinTally t = tally(records, hce, 1);
      const WinStatistics stats = win_statistics(t);
      result.replicate_wins_t[rep] = t.wins_treatment;
      result.replicate_wins_c[rep] = t.wins_control;
      result.replicate_ties[rep] = t.ties;
      if (stats.win_ratio_flag == StatFlag::Finite)
        result.replicate_wr[rep] = stats.win_ratio;
    }
  });

  double mean = 0.0;
  std::int64_t finite = 0;
  for (double wr : result.replicate_wr) {
    if (std::isnan(wr)) continue;
    mean += wr;
    ++finite;
  }
  result.degenerate = replications - finite;
  if (finite > 0) mean /= static_cast<double>(finite);
  result.mean_wr = finite > 0 ? mean
                              : std::numeric_limits<double>::quiet_NaN();
  if (finite > 1) {
    double ss = 0.0;
    for (double wr : result.replicate_wr) {
      if (std::isnan(wr)) continue;
      ss += (wr - mean) * (wr - mean);
    }
    result.se_wr = std::sqrt(ss / (finite - 1) / finite);
    result.se_available = true;
  }

  double var_total = 0.0;
  std::int64_t var_count = 0;
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    var_total += var_sum[rep];
    var_count += var_arms[rep];
    result.flagged_subjects += flagged[rep];
  }
  result.estimate_variance =
      var_count > 0 ? var_total / static_cast<double>(var_count)
                    : std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace winstat::sim
