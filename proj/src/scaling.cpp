#include "bqpt/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "bqpt/errors.hpp"

namespace bqpt::scaling {

CubicFit CubicFit::from_coefficients(double a, double b, double c, double d, Interval window) {
  CubicFit fit;
  fit.coefficients_ << a, b, c, d;
  fit.local_ = fit.coefficients_;
  fit.window_ = window;
  return fit;
}

double CubicFit::operator()(double x) const {
  const double t = (x - centre_) / scale_;
  return ((local_[0] * t + local_[1]) * t + local_[2]) * t + local_[3];
}

CubicFit cubic_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const Interval& window) {
  if (x.size() != y.size()) throw DomainError("cubic fit needs equally many x and y values");

  std::vector<Eigen::Index> inside;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (window.contains(x[i])) inside.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(inside.size());
  if (m < kMinFitPoints) {
    std::ostringstream msg;
    msg << "cubic fit needs at least " << kMinFitPoints << " points in [" << window.lo << ", "
        << window.hi << "], got " << m;
    throw DomainError(msg.str());
  }

  double lo = x[inside.front()];
  double hi = lo;
  for (Eigen::Index i : inside) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  const double centre = 0.5 * (lo + hi);
  const double scale = hi > lo ? 0.5 * (hi - lo) : 1.0;

  Eigen::MatrixXd design(m, 4);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double t = (x[inside[static_cast<std::size_t>(r)]] - centre) / scale;
    design.row(r) << t * t * t, t * t, t, 1.0;
    rhs[r] = y[inside[static_cast<std::size_t>(r)]];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 4) throw NumericError("cubic fit is rank deficient (too few distinct x)");
  const Eigen::Vector4d local = qr.solve(rhs);

  // Expand p(t) with t = (x - centre)/scale into monomials of x.
  const double s1 = 1.0 / scale;
  const double s2 = s1 * s1;
  const double s3 = s2 * s1;
  const double c = centre;
  Eigen::Vector4d coefficients;
  coefficients[0] = local[0] * s3;
  coefficients[1] = local[1] * s2 - 3.0 * c * local[0] * s3;
  coefficients[2] = local[2] * s1 - 2.0 * c * local[1] * s2 + 3.0 * c * c * local[0] * s3;
  coefficients[3] = local[3] - c * local[2] * s1 + c * c * local[1] * s2 - c * c * c * local[0] * s3;

  const double y_scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (std::abs(coefficients[0]) < 1e-12 || std::abs(local[0]) <= 1e-10 * y_scale) {
    throw NumericError("fitted cubic coefficient vanishes; data has no inflection");
  }

  CubicFit fit;
  fit.coefficients_ = coefficients;
  fit.local_ = local;
  fit.centre_ = centre;
  fit.scale_ = scale;
  fit.window_ = window;
  fit.points_ = m;
  fit.residual_ = std::sqrt((design * local - rhs).squaredNorm() / static_cast<double>(m));
  return fit;
}

double pseudo_critical(const CubicFit& fit) {
  if (fit.local_[0] == 0.0) throw NumericError("cubic has no inflection point");
  const double x = fit.centre_ - fit.scale_ * fit.local_[1] / (3.0 * fit.local_[0]);
  if (!std::isfinite(x) || !fit.window_.contains(x)) {
    std::ostringstream msg;
    msg << std::setprecision(10) << "inflection point " << x << " lies outside the fit window ["
        << fit.window_.lo << ", " << fit.window_.hi << "]";
    throw NumericError(msg.str());
  }
  return x;
}

Interval extremum_bracket(const window::ViolationProfile& profile) {
  if (profile.size() == 0) throw DomainError("empty profile");
  Eigen::Index at_min = 0;
  Eigen::Index at_max = 0;
  profile.delta.minCoeff(&at_min);
  profile.delta.maxCoeff(&at_max);
  const double a = profile.lambda_mid[at_min];
  const double b = profile.lambda_mid[at_max];
  return {std::min(a, b), std::max(a, b)};
}

Interval FitWindowPolicy::resolve(const window::ViolationProfile& profile) const {
  return fixed ? *fixed : extremum_bracket(profile);
}

std::string FitWindowPolicy::to_string() const {
  if (!fixed) return "auto";
  std::ostringstream out;
  out << std::setprecision(17) << fixed->lo << ',' << fixed->hi;
  return out.str();
}

FitWindowPolicy FitWindowPolicy::parse(const std::string& text) {
  if (text == "auto") return {};
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw DomainError("fit window must be 'auto' or 'LO,HI'");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const std::string lo_text = text.substr(0, comma);
    const std::string hi_text = text.substr(comma + 1);
    const double lo = std::stod(lo_text, &used_lo);
    const double hi = std::stod(hi_text, &used_hi);
    if (used_lo != lo_text.size() || used_hi != hi_text.size()) throw std::invalid_argument("");
    if (!(hi > lo)) throw DomainError("fit window needs LO < HI");
    return {Interval{lo, hi}};
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception&) {
    throw DomainError("malformed fit window '" + text + "'");
  }
}

PseudoCritical pseudo_critical_from_profile(const window::ViolationProfile& profile,
                                            const FitWindowPolicy& policy) {
  CubicFit fit = cubic_fit(profile.lambda_mid, profile.delta, policy.resolve(profile));
  const double lambda_c = pseudo_critical(fit);
  return {std::move(fit), lambda_c};
}

std::string to_string(Mode mode) { return mode == Mode::fixed ? "fixed" : "free"; }

Mode parse_mode(const std::string& text) {
  if (text == "fixed") return Mode::fixed;
  if (text == "free") return Mode::free;
  throw DomainError("unknown scaling mode '" + text + "' (expected fixed or free)");
}

namespace {

void check_points(std::span<const ScalingPoint> points, std::size_t minimum) {
  if (points.size() < minimum) {
    throw DomainError("scaling fit needs at least " + std::to_string(minimum) +
                      " system sizes, got " + std::to_string(points.size()));
  }
  std::set<int> sizes;
  for (const ScalingPoint& p : points) {
    if (p.sites <= 0) throw DomainError("system sizes must be positive");
    if (!std::isfinite(p.lambda_c)) throw NumericError("non-finite pseudo-critical point");
    if (!sizes.insert(p.sites).second) throw DomainError("duplicate system size in scaling fit");
  }
}

ScalingResult fit_fixed(std::span<const ScalingPoint> points, double lambda_c) {
  const auto m = static_cast<Eigen::Index>(points.size());
  double sign = 0.0;
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const ScalingPoint& p = points[static_cast<std::size_t>(i)];
    const double offset = p.lambda_c - lambda_c;
    if (offset == 0.0) {
      throw NumericError("pseudo-critical point at N=" + std::to_string(p.sites) +
                         " equals lambda_c; log transform impossible");
    }
    const double s = offset > 0.0 ? 1.0 : -1.0;
    if (sign != 0.0 && s != sign) {
      throw NumericError("pseudo-critical points lie on both sides of lambda_c");
    }
    sign = s;
    design.row(i) << std::log(static_cast<double>(p.sites)), 1.0;
    rhs[i] = std::log(std::abs(offset));
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::Vector2d beta = qr.solve(rhs);
  const Eigen::VectorXd resid = design * beta - rhs;

  ScalingResult result;
  result.points.assign(points.begin(), points.end());
  result.mode = Mode::fixed;
  result.lambda_c = lambda_c;
  result.q = -beta[0];
  result.alpha = sign * std::exp(beta[1]);
  result.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(m));

  const double dof = static_cast<double>(m - 2);
  if (dof > 0) {
    const double sigma2 = resid.squaredNorm() / dof;
    const Eigen::Matrix2d cov = (design.transpose() * design).inverse() * sigma2;
    result.q_stderr = std::sqrt(cov(0, 0));
    result.alpha_stderr = std::abs(result.alpha) * std::sqrt(cov(1, 1));
  }
  return result;
}

struct PowerLaw {
  std::span<const ScalingPoint> points;

  Eigen::VectorXd residuals(const Eigen::Vector3d& theta) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double n = points[i].sites;
      r[static_cast<Eigen::Index>(i)] = theta[0] + theta[1] * std::pow(n, -theta[2]) -
                                        points[i].lambda_c;
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::Vector3d& theta) const {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(points.size()), 3);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double n = points[i].sites;
      const double power = std::pow(n, -theta[2]);
      j.row(static_cast<Eigen::Index>(i)) << 1.0, power, -theta[1] * std::log(n) * power;
    }
    return j;
  }
};

Eigen::Vector3d levenberg_marquardt(const PowerLaw& model, Eigen::Vector3d theta) {
  constexpr int kMaxIterations = 500;
  double mu = 1e-3;
  Eigen::VectorXd r = model.residuals(theta);
  double cost = r.squaredNorm();

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    const Eigen::MatrixXd j = model.jacobian(theta);
    const Eigen::Matrix3d jtj = j.transpose() * j;
    const Eigen::Vector3d gradient = j.transpose() * r;
    if (gradient.lpNorm<Eigen::Infinity>() < 1e-30 || cost == 0.0) return theta;

    bool improved = false;
    for (int attempt = 0; attempt < 60 && !improved; ++attempt) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() += mu * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector3d step = damped.ldlt().solve(-gradient);
      const Eigen::Vector3d candidate = theta + step;
      const Eigen::VectorXd r_new = model.residuals(candidate);
      const double cost_new = r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new < cost) {
        const bool tiny_step =
            step.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + theta.cwiseAbs().maxCoeff());
        theta = candidate;
        r = r_new;
        const double previous = cost;
        cost = cost_new;
        mu = std::max(mu / 3.0, 1e-15);
        improved = true;
        if (tiny_step || previous - cost <= 1e-30 * previous) return theta;
      } else {
        mu *= 4.0;
      }
    }
    // No downhill step at any damping: we are at a minimum to working precision.
    if (!improved) return theta;
  }
  throw NumericError("power-law fit did not converge");
}

ScalingResult fit_free(std::span<const ScalingPoint> points, double lambda_c_hint) {
  const auto largest = std::max_element(points.begin(), points.end(),
                                        [](const ScalingPoint& a, const ScalingPoint& b) {
                                          return a.sites < b.sites;
                                        });
  Eigen::Vector3d theta;
  try {
    const ScalingResult seed = fit_fixed(points, lambda_c_hint);
    theta << largest->lambda_c, seed.alpha, seed.q;
  } catch (const NumericError&) {
    const auto smallest = std::min_element(points.begin(), points.end(),
                                           [](const ScalingPoint& a, const ScalingPoint& b) {
                                             return a.sites < b.sites;
                                           });
    const double q0 = 2.0;
    const double alpha0 = (smallest->lambda_c - largest->lambda_c) /
                          (std::pow(smallest->sites, -q0) - std::pow(largest->sites, -q0));
    theta << largest->lambda_c, alpha0, q0;
  }

  const PowerLaw model{points};
  theta = levenberg_marquardt(model, theta);
  if (!theta.allFinite() || !(theta[2] > 0.0)) {
    throw NumericError("power-law fit diverged (non-positive or non-finite exponent)");
  }

  const Eigen::VectorXd r = model.residuals(theta);
  const auto m = static_cast<Eigen::Index>(points.size());
  ScalingResult result;
  result.points.assign(points.begin(), points.end());
  result.mode = Mode::free;
  result.lambda_c = theta[0];
  result.alpha = theta[1];
  result.q = theta[2];
  result.residual = std::sqrt(r.squaredNorm() / static_cast<double>(m));
  if (m > 3) {
    const Eigen::MatrixXd j = model.jacobian(theta);
    const double sigma2 = r.squaredNorm() / static_cast<double>(m - 3);
    const Eigen::Matrix3d cov = (j.transpose() * j).inverse() * sigma2;
    result.lambda_c_stderr = std::sqrt(std::max(0.0, cov(0, 0)));
    result.alpha_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
    result.q_stderr = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return result;
}

}  // namespace

ScalingResult scaling_fit(std::span<const ScalingPoint> points, Mode mode, double lambda_c) {
  check_points(points, mode == Mode::fixed ? 3 : 4);
  if (!std::isfinite(lambda_c)) throw DomainError("lambda_c must be finite");
  ScalingResult result = mode == Mode::fixed ? fit_fixed(points, lambda_c)
                                             : fit_free(points, lambda_c);
  if (!(result.q > 0.0)) {
    std::ostringstream msg;
    msg << "fitted exponent q = " << result.q << " is not positive";
    throw NumericError(msg.str());
  }
  return result;
}

double derivative_pseudo_critical(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                  const Eigen::Ref<const Eigen::VectorXd>& values,
                                  const Interval& window) {
  if (lambda.size() != values.size()) throw DomainError("curve needs equally many x and y values");
  std::vector<Eigen::Index> inside;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (window.contains(lambda[i])) inside.push_back(i);
  }
  if (inside.size() < 5) throw DomainError("derivative scan needs at least 5 points in window");

  // Centred differences at the interior points of the window.
  const std::size_t count = inside.size() - 2;
  std::vector<double> x(count);
  std::vector<double> slope(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Eigen::Index prev = inside[k];
    const Eigen::Index here = inside[k + 1];
    const Eigen::Index next = inside[k + 2];
    if (!(lambda[next] > lambda[prev])) throw DomainError("curve abscissae must increase");
    x[k] = lambda[here];
    slope[k] = std::abs((values[next] - values[prev]) / (lambda[next] - lambda[prev]));
  }

  const auto [lo_it, hi_it] = std::minmax_element(slope.begin(), slope.end());
  const auto peak = static_cast<std::size_t>(hi_it - slope.begin());
  if (*hi_it - *lo_it <= 1e-9 * *hi_it) {
    throw NumericError("derivative is flat over the window; no extremum");
  }
  if (peak == 0 || peak + 1 == count) {
    throw NumericError("derivative extremum sits on the window boundary");
  }

  // Vertex of the parabola through the three points around the peak.
  const double x0 = x[peak - 1], x1 = x[peak], x2 = x[peak + 1];
  const double y0 = slope[peak - 1], y1 = slope[peak], y2 = slope[peak + 1];
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  if (!(a < 0.0)) return x1;
  return std::clamp(-b / (2.0 * a), x0, x2);
}

void write_scaling_record(std::ostream& out, const ScalingResult& result) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "mode = " << to_string(result.mode) << '\n';
  for (const ScalingPoint& p : result.points) {
    out << "lambda_c_N." << p.sites << " = " << p.lambda_c << '\n';
  }
  out << "lambda_c = " << result.lambda_c << '\n'
      << "lambda_c_stderr = " << result.lambda_c_stderr << '\n'
      << "alpha = " << result.alpha << '\n'
      << "alpha_stderr = " << result.alpha_stderr << '\n'
      << "q = " << result.q << '\n'
      << "q_stderr = " << result.q_stderr << '\n'
      << "residual = " << result.residual << '\n';
  out.flags(flags);
  out.precision(precision);
}

void write_regression_csv(std::ostream& out, const ScalingResult& result) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "ln_n,ln_abs_offset\n" << std::setprecision(17);
  for (const ScalingPoint& p : result.points) {
    out << std::log(static_cast<double>(p.sites)) << ','
        << std::log(std::abs(p.lambda_c - result.lambda_c)) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace bqpt::scaling
