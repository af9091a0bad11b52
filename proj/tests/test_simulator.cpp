#include <cmath>

#include <doctest.h>

#include "winstat/error.hpp"
#include "winstat/simulator.hpp"
#include "winstat/theory.hpp"
#include "winstat/win_stats.hpp"

using namespace winstat;
using namespace winstat::sim;

namespace {

SimScenario ckd_scenario(std::int64_t n_per_arm, std::uint64_t seed) {
  SimScenario s;
  s.design = theory::equally_spaced_design(9, 2.0, 3.0, 5.18, -2.0, -3.0);
  s.n_per_arm = n_per_arm;
  s.intercept_mean = 40.0;
  s.intercept_sd = 0.0;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("noiseless trials reproduce the latent line exactly") {
  auto s = ckd_scenario(4, 1);
  s.design.sigma_s = 0.0;
  s.design.sigma_e = 0.0;
  const SimulatedTrial trial = simulate_trial(s);
  const auto lsme = estimate_slopes(trial, SlopeEstimator::Lsme);
  const auto mc = estimate_slopes(trial, SlopeEstimator::MeanChange);
  for (std::size_t i = 0; i < trial.subjects.size(); ++i) {
    const double want = trial.subjects[i].arm == 1 ? -2.0 : -3.0;
    CHECK(trial.truth[i].slope == want);
    CHECK(trial.truth[i].intercept == 40.0);
    CHECK(*lsme.estimate[i] == want);
    CHECK(*mc.estimate[i] == want);
    CHECK(*trial.subjects[i].gfr.front() == 40.0);
  }
}

TEST_CASE("same seed gives bit-identical trials") {
  const auto s = ckd_scenario(50, 99);
  const SimulatedTrial a = simulate_trial(s);
  const SimulatedTrial b = simulate_trial(s);
  REQUIRE(a.subjects.size() == b.subjects.size());
  for (std::size_t i = 0; i < a.subjects.size(); ++i) {
    CHECK(a.truth[i].slope == b.truth[i].slope);
    for (std::size_t k = 0; k < a.subjects[i].gfr.size(); ++k) {
      REQUIRE(a.subjects[i].gfr[k].has_value() ==
              b.subjects[i].gfr[k].has_value());
      if (a.subjects[i].gfr[k])
        CHECK(*a.subjects[i].gfr[k] == *b.subjects[i].gfr[k]);
    }
  }
  const SimulatedTrial c = simulate_trial(ckd_scenario(50, 100));
  CHECK(c.truth[0].slope != a.truth[0].slope);
}

TEST_CASE("zero hazards leave every follow-up at the design horizon") {
  auto s = ckd_scenario(10, 3);
  s.event_components = {{"dialysis", 0.0, 0.0}};
  const SimulatedTrial trial = simulate_trial(s);
  for (const auto& subj : trial.subjects) {
    CHECK(subj.followup_years == 2.0);
    CHECK_FALSE(subj.events[0].occurred);
    for (const auto& g : subj.gfr) CHECK(g.has_value());
  }
}

TEST_CASE("events truncate visits and flag the affected estimates") {
  auto s = ckd_scenario(300, 7);
  s.event_components = {{"dialysis", 1.2, 1.2}};  // frequent events
  const SimulatedTrial trial = simulate_trial(s);

  bool saw_truncation = false;
  for (std::size_t i = 0; i < trial.subjects.size(); ++i) {
    const auto& subj = trial.subjects[i];
    if (!subj.events[0].occurred) continue;
    saw_truncation = true;
    CHECK(subj.followup_years == trial.truth[i].event_times[0]);
    for (std::size_t k = 0; k < trial.visit_times.size(); ++k)
      CHECK(subj.gfr[k].has_value() ==
            (trial.visit_times[k] <= subj.followup_years));
  }
  REQUIRE(saw_truncation);

  const auto mc_strict = estimate_slopes(trial, SlopeEstimator::MeanChange);
  const auto mc_fallback =
      estimate_slopes(trial, SlopeEstimator::MeanChange, true);
  // strict MC flags every truncated subject; the fallback keeps those with
  // a usable pre-event visit
  CHECK(mc_strict.flagged.size() > mc_fallback.flagged.size());
  for (std::size_t idx : mc_strict.flagged)
    CHECK_FALSE(mc_strict.estimate[idx].has_value());

  const auto lsme = estimate_slopes(trial, SlopeEstimator::Lsme);
  for (std::size_t idx : lsme.flagged) {
    int usable = 0;
    for (const auto& g : trial.subjects[idx].gfr) usable += g.has_value();
    CHECK(usable < 2);
  }
}

TEST_CASE("slope estimate variances match the closed forms") {
  const auto s = ckd_scenario(5000, 42);
  const SimulatedTrial trial = simulate_trial(s);

  auto within_arm_variance = [&](const SlopeEstimates& est) {
    double total = 0.0;
    int arms = 0;
    for (int arm = 0; arm <= 1; ++arm) {
      double sum = 0.0, sum2 = 0.0;
      std::int64_t m = 0;
      for (std::size_t i = 0; i < trial.subjects.size(); ++i) {
        if (trial.subjects[i].arm != arm) continue;
        sum += *est.estimate[i];
        sum2 += *est.estimate[i] * *est.estimate[i];
        ++m;
      }
      total += (sum2 - sum * sum / m) / (m - 1);
      ++arms;
    }
    return total / arms;
  };

  const double var_lsme =
      within_arm_variance(estimate_slopes(trial, SlopeEstimator::Lsme));
  const double var_mc =
      within_arm_variance(estimate_slopes(trial, SlopeEstimator::MeanChange));
  CHECK(var_lsme ==
        doctest::Approx(theory::lsme_slope_variance(s.design)).epsilon(0.05));
  CHECK(var_mc ==
        doctest::Approx(theory::mc_slope_variance(3.0, 5.18, 2.0))
            .epsilon(0.05));
  // ordering: MC inflates more than LSME, both at least sigma_s^2
  CHECK(var_mc > var_lsme);
  CHECK(var_lsme > 9.0 * 0.95);
}

TEST_CASE("slope estimators are unbiased for the mean slope") {
  const auto s = ckd_scenario(5000, 8);
  const SimulatedTrial trial = simulate_trial(s);
  for (auto method : {SlopeEstimator::Lsme, SlopeEstimator::MeanChange}) {
    const auto est = estimate_slopes(trial, method);
    for (int arm = 0; arm <= 1; ++arm) {
      double sum = 0.0, sum2 = 0.0;
      std::int64_t m = 0;
      for (std::size_t i = 0; i < trial.subjects.size(); ++i) {
        if (trial.subjects[i].arm != arm) continue;
        sum += *est.estimate[i];
        sum2 += *est.estimate[i] * *est.estimate[i];
        ++m;
      }
      const double mean = sum / m;
      const double sd = std::sqrt((sum2 - sum * sum / m) / (m - 1));
      const double se = sd / std::sqrt(static_cast<double>(m));
      const double want = arm == 1 ? -2.0 : -3.0;
      CHECK(std::fabs(mean - want) <= 3.0 * se);
    }
  }
}

TEST_CASE("scenario_hce and to_records build an analyzable dataset") {
  auto s = ckd_scenario(20, 5);
  s.event_components = {{"dialysis", 0.3, 0.4}};
  const HceDefinition hce = scenario_hce(s);
  REQUIRE(hce.components.size() == 2);
  CHECK(hce.components[0].name == "dialysis");
  CHECK(hce.components[0].kind == ComponentKind::TimeToEvent);
  CHECK(hce.components[1].name == "gfr_slope");
  CHECK(hce.horizon == 24.0);

  const SimulatedTrial trial = simulate_trial(s);
  const auto slopes = estimate_slopes(trial, SlopeEstimator::Lsme);
  const auto records = to_records(s, trial, slopes);
  const auto report = validate_dataset(records, hce);
  CHECK(report.ok());
  CHECK_NOTHROW(tally(records, hce));
}

TEST_CASE("monte_carlo_wr matches the closed form for a small bridge") {
  const auto s = ckd_scenario(500, 2027);
  const auto lsme =
      monte_carlo_wr(s, SlopeEstimator::Lsme, 12);
  REQUIRE(lsme.se_available);
  const double closed =
      theory::slope_wr(s.design, theory::SlopeMethod::Lsme);
  CHECK(std::fabs(lsme.mean_wr - closed) <= 3.0 * lsme.se_wr);
  CHECK(lsme.degenerate == 0);
}

TEST_CASE("monte_carlo_wr under no effect centers on 1") {
  auto s = ckd_scenario(400, 321);
  s.design.slope_mean_treat = -3.0;
  const auto result = monte_carlo_wr(s, SlopeEstimator::MeanChange, 12);
  REQUIRE(result.se_available);
  CHECK(std::fabs(result.mean_wr - 1.0) <= 3.0 * result.se_wr);
}

TEST_CASE("monte_carlo_wr is deterministic and thread-invariant") {
  const auto s = ckd_scenario(100, 555);
  const auto a = monte_carlo_wr(s, SlopeEstimator::Lsme, 8, 1);
  const auto b = monte_carlo_wr(s, SlopeEstimator::Lsme, 8, 1);
  CHECK(a.mean_wr == b.mean_wr);
  CHECK(a.se_wr == b.se_wr);
  for (int threads : {2, 4}) {
    const auto c = monte_carlo_wr(s, SlopeEstimator::Lsme, 8, threads);
    CHECK(c.mean_wr == a.mean_wr);
    CHECK(c.se_wr == a.se_wr);
    CHECK(c.estimate_variance == a.estimate_variance);
  }
}

TEST_CASE("degenerate replications are counted and excluded") {
  auto s = ckd_scenario(2, 9);
  s.design.sigma_s = 0.0;
  s.design.sigma_e = 0.0;
  s.design.slope_mean_treat = -3.0;  // all slopes identical -> all ties
  const auto result = monte_carlo_wr(s, SlopeEstimator::Lsme, 5);
  CHECK(result.degenerate == 5);
  CHECK(std::isnan(result.mean_wr));
  CHECK_FALSE(result.se_available);
}

TEST_CASE("single replication reports no standard error") {
  const auto result =
      monte_carlo_wr(ckd_scenario(50, 77), SlopeEstimator::Lsme, 1);
  CHECK(result.replications == 1);
  CHECK_FALSE(result.se_available);
  CHECK(result.degenerate == 0);
}

TEST_CASE("scenario validation") {
  auto s = ckd_scenario(1, 0);
  CHECK_THROWS_AS(s.check(), DomainError);
  s = ckd_scenario(10, 0);
  s.event_components = {{"ev", -0.1, 0.2}};
  CHECK_THROWS_AS(s.check(), DomainError);
  s = ckd_scenario(10, 0);
  s.intercept_sd = -1.0;
  CHECK_THROWS_AS(s.check(), DomainError);
  CHECK_THROWS_AS(
      monte_carlo_wr(ckd_scenario(10, 0), SlopeEstimator::Lsme, 0),
      DomainError);
}
