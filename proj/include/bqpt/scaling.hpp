#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bqpt/window_profiler.hpp"

namespace bqpt::scaling {

using window::Interval;

inline constexpr int kMinFitPoints = 8;

/// Least-squares cubic a x^3 + b x^2 + c x + d.
class CubicFit {
 public:
  static CubicFit from_coefficients(double a, double b, double c, double d,
                                    Interval window = {-std::numeric_limits<double>::infinity(),
                                                       std::numeric_limits<double>::infinity()});

  /// (a, b, c, d), highest power first.
  const Eigen::Vector4d& coefficients() const { return coefficients_; }
  const Interval& fit_window() const { return window_; }
  double residual() const { return residual_; }  // RMS over the fitted points
  Eigen::Index points() const { return points_; }

  double operator()(double x) const;

 private:
  friend CubicFit cubic_fit(const Eigen::Ref<const Eigen::VectorXd>&,
                            const Eigen::Ref<const Eigen::VectorXd>&, const Interval&);
  friend double pseudo_critical(const CubicFit&);

  CubicFit() = default;

  Eigen::Vector4d coefficients_;
  // Same cubic in t = (x - centre) / scale, used where cancellation matters.
  Eigen::Vector4d local_;
  double centre_ = 0.0;
  double scale_ = 1.0;
  Interval window_{};
  double residual_ = 0.0;
  Eigen::Index points_ = 0;
};

/// Fits the points with x inside `window`. The monomial system is solved by
/// column-pivoted Householder QR on centred and scaled abscissae.
CubicFit cubic_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const Interval& window);

/// Inflection point -b / (3a) of the cubic, where its derivative peaks.
/// Throws NumericError when it falls outside the fit window.
double pseudo_critical(const CubicFit& fit);

/// [argmin, argmax] of the profile (ordered), i.e. the min-max feature that
/// straddles the transition.
Interval extremum_bracket(const window::ViolationProfile& profile);

/// Fixed interval, or the profile's own extremum bracket when unset.
struct FitWindowPolicy {
  std::optional<Interval> fixed;

  Interval resolve(const window::ViolationProfile& profile) const;
  std::string to_string() const;  // "auto" or "lo,hi"
  static FitWindowPolicy parse(const std::string& text);
};

struct PseudoCritical {
  CubicFit fit;
  double lambda_c;
};

PseudoCritical pseudo_critical_from_profile(const window::ViolationProfile& profile,
                                            const FitWindowPolicy& policy = {});

enum class Mode { fixed, free };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct ScalingPoint {
  int sites;
  double lambda_c;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  Mode mode = Mode::fixed;
  double lambda_c = 1.0;
  double alpha = 0.0;
  double q = 0.0;
  double residual = 0.0;  // fixed: RMS in log space; free: RMS in lambda
  double lambda_c_stderr = 0.0;
  double alpha_stderr = 0.0;
  double q_stderr = 0.0;
};

/// Fits lambda_c^N = lambda_c + alpha N^-q. Fixed mode regresses
/// ln|lambda_c^N - lambda_c| on ln N; free mode refines (lambda_c, alpha, q)
/// by Levenberg-Marquardt starting from the fixed-mode solution.
ScalingResult scaling_fit(std::span<const ScalingPoint> points, Mode mode,
                          double lambda_c = 1.0);

/// Location of the steepest slope of a sampled curve: extremum of the centred
/// difference quotient over `window`, refined by a three-point parabola.
double derivative_pseudo_critical(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                  const Eigen::Ref<const Eigen::VectorXd>& values,
                                  const Interval& window);

void write_scaling_record(std::ostream& out, const ScalingResult& result);
/// `ln_n,ln_abs_offset` rows for plotting the power law.
void write_regression_csv(std::ostream& out, const ScalingResult& result);

}  // namespace bqpt::scaling
