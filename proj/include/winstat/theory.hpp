#pragma once

#include <span>
#include <vector>

namespace winstat::theory {

/// Standard normal CDF, evaluated through a rational-Chebyshev
/// complementary error function. Absolute error below 1e-12 everywhere
/// (in practice a few ulp).
double std_normal_cdf(double x);

/// Inverse standard normal CDF on (0,1); throws DomainError outside.
double std_normal_quantile(double p);

/// Independent normal outcomes for the two arms; higher values better.
struct NormalArmPair {
  double mu1 = 0.0;     // treatment mean
  double mu0 = 0.0;     // comparator mean
  double sigma1 = 1.0;  // treatment SD, > 0
  double sigma0 = 1.0;  // comparator SD, > 0
};

/// P(Y1 > Y0) = Phi((mu1 - mu0) / sqrt(sigma1^2 + sigma0^2)).
double win_prob_normal(const NormalArmPair& p);

struct WinSummary {
  double win_ratio = 1.0;
  double win_odds = 1.0;
  double net_benefit = 0.0;
};

/// For a continuous outcome (tie probability 0): WR = WO = theta/(1-theta),
/// NB = 2*theta - 1. Throws DomainError when theta is not inside (0,1).
WinSummary stats_from_theta(double theta);

/// Measurement design and slope model for a longitudinal outcome measured
/// at fixed visits. Times are in years; sigma_s is the between-subject SD
/// of the latent slopes, sigma_e the residual SD of a single measurement.
struct SlopeDesign {
  std::vector<double> measurement_times;  // strictly increasing, starts at 0
  double followup_years = 0.0;            // equals measurement_times.back()
  double sigma_s = 0.0;
  double sigma_e = 0.0;
  double slope_mean_treat = 0.0;
  double slope_mean_ctrl = 0.0;

  void check() const;  // throws DomainError on invariant violations
};

/// n equally spaced visits over [0, followup_years], baseline included.
SlopeDesign equally_spaced_design(int n_measurements, double followup_years,
                                  double sigma_s, double sigma_e,
                                  double slope_mean_treat,
                                  double slope_mean_ctrl);

/// Variance of the per-subject least-squares slope:
/// sigma_s^2 + sigma_e^2 / sum_k (t_k - tbar)^2.
double lsme_slope_variance(const SlopeDesign& d);

/// Variance of the baseline-to-end mean-change slope:
/// sigma_s^2 + 2 sigma_e^2 / T^2. Throws DomainError when T <= 0.
double mc_slope_variance(double sigma_s, double sigma_e,
                         double followup_years);

enum class SlopeMethod { True, Lsme, MeanChange };

struct SlopeWinRatio {
  SlopeMethod method = SlopeMethod::True;
  double variance = 0.0;  // per-arm slope (estimate) variance
  double theta = 0.5;
  double win_ratio = 1.0;
};

/// Win probability of the treatment-arm slope against the comparator-arm
/// slope when slopes are estimated by `method`:
/// theta = Phi(delta_beta / sqrt(2 * variance)), WR = theta/(1-theta).
/// The True method uses sigma_s^2 alone (latent slopes).
SlopeWinRatio slope_result(const SlopeDesign& d, SlopeMethod method);
double slope_wr(const SlopeDesign& d, SlopeMethod method);

enum class SweepAxis { SlopeSd, Followup, NMeasurements };

struct SweepRow {
  double x = 0.0;
  double theta_true = 0.5, wr_true = 1.0;
  double theta_lsme = 0.5, wr_lsme = 1.0;
  double theta_mc = 0.5, wr_mc = 1.0;
};

/// Evaluates the three slope win ratios along one design axis. For the
/// Followup and NMeasurements axes the visit schedule is regenerated as
/// equally spaced points per grid value (visit count taken from the base
/// design on the Followup axis). Throws DomainError naming the first
/// invalid grid point.
std::vector<SweepRow> sweep(const SlopeDesign& base, SweepAxis axis,
                            std::span<const double> grid);

/// One stratum of a normal-mixture population; sigma is the common
/// within-stratum SD of both arms.
struct StratumSpec {
  double weight = 1.0;
  double mu1 = 0.0;
  double mu0 = 0.0;
  double sigma = 1.0;
};

double stratum_win_prob(const StratumSpec& s);
/// Within-stratum WR: P(Ys1 - Ys0 > 0) / (1 - P(Ys1 - Ys0 > 0)).
double stratum_wr(const StratumSpec& s);

/// Marginal win probability when strata mix independently across arms:
/// theta = sum_k sum_l w_k w_l P(Yk1 - Yl0 > 0).
/// Throws DomainError unless the weights sum to 1.
double marginal_win_prob(std::span<const StratumSpec> strata);
double marginal_wr(std::span<const StratumSpec> strata);

/// Stratified aggregation: ratio of weighted win proportions,
/// sum_s w_s theta_s / sum_s w_s (1 - theta_s). Equal per-stratum win
/// ratios pool to that common value under any weights.
double stratified_pooled_wr(std::span<const StratumSpec> strata);

}  // namespace winstat::theory
