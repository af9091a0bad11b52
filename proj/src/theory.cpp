#include "winstat/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "winstat/error.hpp"

namespace winstat::theory {

namespace {

// Rational Chebyshev approximation of erfc(x), after W. J. Cody (1969),
// SPECFUN CALERF with JINT = 1. Relative error below 1.2e-16 on IEEE
// doubles; underflows to 0 beyond x ~ 26.5.
double erfc_cody(double x) {
  static const double a[5] = {3.16112374387056560e0, 1.13864154151050156e2,
                              3.77485237685302021e2, 3.20937758913846947e3,
                              1.85777706184603153e-1};
  static const double b[4] = {2.36012909523441209e1, 2.44024637934444173e2,
                              1.28261652607737228e3, 2.84423683343917062e3};
  static const double c[9] = {5.64188496988670089e-1, 8.88314979438837594e0,
                              6.61191906371416295e1,  2.98635138197400131e2,
                              8.81952221241769090e2,  1.71204761263407058e3,
                              2.05107837782607147e3,  1.23033935479799725e3,
                              2.15311535474403846e-8};
  static const double d[8] = {1.57449261107098347e1, 1.17693950891312499e2,
                              5.37181101862009858e2, 1.62138957456669019e3,
                              3.29079923573345963e3, 4.36261909014324716e3,
                              3.43936767414372164e3, 1.23033935480374942e3};
  static const double p[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                              1.25781726111229246e-1, 1.60837851487422766e-2,
                              6.58749161529837803e-4, 1.63153871373020978e-2};
  static const double q[5] = {2.56852019228982242e0, 1.87295284992346047e0,
                              5.27905102951428412e-1, 6.05183413124413191e-2,
                              2.33520497626869185e-3};
  constexpr double sqrpi = 0.56418958354775628695;  // 1/sqrt(pi)
  constexpr double thresh = 0.46875;
  constexpr double xsmall = 1.11e-16;
  constexpr double xbig = 26.543;

  const double y = std::fabs(x);
  double result;
  if (y <= thresh) {
    // erfc via 1 - erf on the central interval
    const double ysq = y > xsmall ? y * y : 0.0;
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    return 1.0 - x * (xnum + a[3]) / (xden + b[3]);
  } else if (y <= 4.0) {
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    result *= std::exp(-ysq * ysq) * std::exp(-del);
  } else if (y < xbig) {
    const double ysq = 1.0 / (y * y);
    double xnum = p[5] * ysq;
    double xden = ysq;
    for (int i = 0; i < 4; ++i) {
      xnum = (xnum + p[i]) * ysq;
      xden = (xden + q[i]) * ysq;
    }
    result = ysq * (xnum + p[4]) / (xden + q[4]);
    result = (sqrpi - result) / y;
    const double yq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - yq) * (y + yq);
    result *= std::exp(-yq * yq) * std::exp(-del);
  } else {
    result = 0.0;
  }
  return x < 0.0 ? 2.0 - result : result;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

double theta_from_delta(double delta) {
  return 0.5 * erfc_cody(-delta * kInvSqrt2);
}

double wr_from_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw DomainError(
        "win probability saturates to 0 or 1 at double precision; the win "
        "ratio is unbounded for these parameters");
  return theta / (1.0 - theta);
}

double sum_squared_centered(const std::vector<double>& times) {
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= static_cast<double>(times.size());
  double sxx = 0.0;
  for (double t : times) sxx += (t - mean) * (t - mean);
  return sxx;
}

}  // namespace

double std_normal_cdf(double x) { return 0.5 * erfc_cody(-x * kInvSqrt2); }

double std_normal_quantile(double p) {
  // Wichura's algorithm AS 241 (PPND16), accurate to ~1e-16 relative.
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("normal quantile requires p inside (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) *
                 r +
             4.5921953931549871457e4) *
                r +
            1.3731693765509461125e4) *
               r +
           1.9715909503065514427e3) *
              r +
          1.3314166789178437745e2) *
             r +
         3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

double win_prob_normal(const NormalArmPair& p) {
  if (!(p.sigma1 > 0.0) || !(p.sigma0 > 0.0))
    throw DomainError("arm standard deviations must be positive");
  const double scale = std::sqrt(p.sigma1 * p.sigma1 + p.sigma0 * p.sigma0);
  return std_normal_cdf((p.mu1 - p.mu0) / scale);
}

WinSummary stats_from_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw DomainError("theta must lie strictly inside (0,1)");
  return WinSummary{theta / (1.0 - theta), theta / (1.0 - theta),
                    2.0 * theta - 1.0};
}

void SlopeDesign::check() const {
  if (measurement_times.size() < 2)
    throw DomainError("slope design needs at least 2 measurement times");
  if (measurement_times.front() != 0.0)
    throw DomainError("measurement schedule must include a baseline at 0");
  for (std::size_t i = 1; i < measurement_times.size(); ++i)
    if (!(measurement_times[i] > measurement_times[i - 1]))
      throw DomainError("measurement times must be strictly increasing");
  if (measurement_times.back() != followup_years)
    throw DomainError("followup_years must equal the last measurement time");
  if (!(sigma_s >= 0.0) || !(sigma_e >= 0.0))
    throw DomainError("slope and residual SDs must be nonnegative");
}

SlopeDesign equally_spaced_design(int n_measurements, double followup_years,
                                  double sigma_s, double sigma_e,
                                  double slope_mean_treat,
                                  double slope_mean_ctrl) {
  if (n_measurements < 2)
    throw DomainError("need at least 2 measurements including baseline");
  if (!(followup_years > 0.0))
    throw DomainError("follow-up duration must be positive");
  SlopeDesign d;
  d.measurement_times.reserve(static_cast<std::size_t>(n_measurements));
  for (int k = 0; k < n_measurements; ++k)
    d.measurement_times.push_back(followup_years * k / (n_measurements - 1));
  d.measurement_times.back() = followup_years;  // no rounding drift at T
  d.followup_years = followup_years;
  d.sigma_s = sigma_s;
  d.sigma_e = sigma_e;
  d.slope_mean_treat = slope_mean_treat;
  d.slope_mean_ctrl = slope_mean_ctrl;
  return d;
}

double lsme_slope_variance(const SlopeDesign& d) {
  d.check();
  const double sxx = sum_squared_centered(d.measurement_times);
  if (!(sxx > 0.0))
    throw DomainError("measurement times are all equal");
  return d.sigma_s * d.sigma_s + d.sigma_e * d.sigma_e / sxx;
}

double mc_slope_variance(double sigma_s, double sigma_e,
                         double followup_years) {
  if (!(followup_years > 0.0))
    throw DomainError("follow-up duration must be positive");
  return sigma_s * sigma_s +
         2.0 * sigma_e * sigma_e / (followup_years * followup_years);
}

SlopeWinRatio slope_result(const SlopeDesign& d, SlopeMethod method) {
  d.check();
  double variance;
  switch (method) {
    case SlopeMethod::True:
      variance = d.sigma_s * d.sigma_s;
      break;
    case SlopeMethod::Lsme:
      variance = lsme_slope_variance(d);
      break;
    case SlopeMethod::MeanChange:
      variance = mc_slope_variance(d.sigma_s, d.sigma_e, d.followup_years);
      break;
    default:
      throw DomainError("unknown slope method");
  }
  const double delta = d.slope_mean_treat - d.slope_mean_ctrl;
  if (delta != 0.0 && !(variance > 0.0))
    throw DomainError("slope variance is zero; win ratio is unbounded");
  const double theta =
      delta == 0.0 ? 0.5 : theta_from_delta(delta / std::sqrt(2.0 * variance));
  return SlopeWinRatio{method, variance, theta, wr_from_theta(theta)};
}

double slope_wr(const SlopeDesign& d, SlopeMethod method) {
  return slope_result(d, method).win_ratio;
}

std::vector<SweepRow> sweep(const SlopeDesign& base, SweepAxis axis,
                            std::span<const double> grid) {
  base.check();
  const int base_n = static_cast<int>(base.measurement_times.size());
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double x : grid) {
    SlopeDesign d = base;
    switch (axis) {
      case SweepAxis::SlopeSd:
        if (!(x > 0.0)) {
          std::ostringstream msg;
          msg << "slope_sd grid point " << x << " must be positive";
          throw DomainError(msg.str());
        }
        d.sigma_s = x;
        break;
      case SweepAxis::Followup:
        if (!(x > 0.0)) {
          std::ostringstream msg;
          msg << "followup grid point " << x << " must be positive";
          throw DomainError(msg.str());
        }
        d = equally_spaced_design(base_n, x, base.sigma_s, base.sigma_e,
                                  base.slope_mean_treat, base.slope_mean_ctrl);
        break;
      case SweepAxis::NMeasurements: {
        if (!(x >= 2.0) || x != std::trunc(x)) {
          std::ostringstream msg;
          msg << "n_measurements grid point " << x
              << " must be an integer >= 2";
          throw DomainError(msg.str());
        }
        d = equally_spaced_design(static_cast<int>(x), base.followup_years,
                                  base.sigma_s, base.sigma_e,
                                  base.slope_mean_treat, base.slope_mean_ctrl);
        break;
      }
    }
    try {
      const SlopeWinRatio t = slope_result(d, SlopeMethod::True);
      const SlopeWinRatio l = slope_result(d, SlopeMethod::Lsme);
      const SlopeWinRatio m = slope_result(d, SlopeMethod::MeanChange);
      rows.push_back(SweepRow{x, t.theta, t.win_ratio, l.theta, l.win_ratio,
                              m.theta, m.win_ratio});
    } catch (const DomainError& e) {
      std::ostringstream msg;
      msg << "grid point " << x << ": " << e.what();
      throw DomainError(msg.str());
    }
  }
  return rows;
}

double stratum_win_prob(const StratumSpec& s) {
  if (!(s.sigma > 0.0))
    throw DomainError("stratum sigma must be positive");
  // Y_s1 - Y_s0 ~ N(mu1 - mu0, 2 sigma^2)
  return std_normal_cdf((s.mu1 - s.mu0) / (s.sigma * std::sqrt(2.0)));
}

double stratum_wr(const StratumSpec& s) {
  return wr_from_theta(stratum_win_prob(s));
}

namespace {

void check_weights(std::span<const StratumSpec> strata) {
  if (strata.empty()) throw DomainError("need at least one stratum");
  double total = 0.0;
  for (const auto& s : strata) {
    if (!(s.weight >= 0.0)) throw DomainError("stratum weight is negative");
    total += s.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw DomainError("stratum weights must sum to 1");
}

}  // namespace

double marginal_win_prob(std::span<const StratumSpec> strata) {
  check_weights(strata);
  double theta = 0.0;
  for (const auto& k : strata) {
    for (const auto& l : strata) {
      if (!(k.sigma > 0.0) || !(l.sigma > 0.0))
        throw DomainError("stratum sigma must be positive");
      const double scale = std::sqrt(k.sigma * k.sigma + l.sigma * l.sigma);
      theta += k.weight * l.weight * std_normal_cdf((k.mu1 - l.mu0) / scale);
    }
  }
  return theta;
}

double marginal_wr(std::span<const StratumSpec> strata) {
  return wr_from_theta(marginal_win_prob(strata));
}

double stratified_pooled_wr(std::span<const StratumSpec> strata) {
  check_weights(strata);
  double win = 0.0, loss = 0.0;
  for (const auto& s : strata) {
    const double theta = stratum_win_prob(s);
    win += s.weight * theta;
    loss += s.weight * (1.0 - theta);
  }
  if (!(loss > 0.0)) throw DomainError("pooled loss probability is zero");
  return win / loss;
}

}  // namespace winstat::theory
