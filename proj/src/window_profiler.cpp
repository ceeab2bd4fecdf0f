#include "bqpt/window_profiler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "bqpt/errors.hpp"
#include "bqpt/parallel.hpp"

namespace bqpt::window {

void WindowSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(w) || !std::isfinite(epsilon)) {
    throw DomainError("window spec values must be finite");
  }
  if (!(b > a)) throw DomainError("window range needs a < b");
  if (!(w > 0.0) || !(w < b - a)) throw DomainError("window width must satisfy 0 < w < b - a");
  if (!(epsilon > 0.0) || !(epsilon < w)) {
    throw DomainError("window shift must satisfy 0 < epsilon < w");
  }
  if (n < kMinSamples) {
    throw DomainError("need at least " + std::to_string(kMinSamples) + " samples per window");
  }
}

std::size_t WindowSpec::count() const {
  validate();
  return static_cast<std::size_t>(std::floor((b - a - w) / epsilon + 1e-9)) + 1;
}

Interval WindowSpec::window(std::size_t m) const {
  const double lo = a + static_cast<double>(m) * epsilon;
  return {lo, std::min(lo + w, b)};
}

double WindowSpec::midpoint(std::size_t m) const {
  return a + 0.5 * w + static_cast<double>(m) * epsilon;
}

std::vector<Interval> windows(const WindowSpec& spec) {
  const std::size_t count = spec.count();
  std::vector<Interval> out;
  out.reserve(count);
  for (std::size_t m = 0; m < count; ++m) out.push_back(spec.window(m));
  return out;
}

Eigen::ArrayXd normalize(const Eigen::ArrayXd& data) {
  if (data.size() < 2) throw DomainError("normalization needs at least two points");
  if (!data.allFinite()) throw NumericError("window data contains non-finite values");
  const double lo = data.minCoeff();
  const double hi = data.maxCoeff();
  if (!(hi > lo)) throw NumericError("degenerate window: observable is constant");
  Eigen::ArrayXd out = (data - lo) / (hi - lo);
  // Pin the extremes so the result is exactly idempotent.
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (data[i] == lo) out[i] = 0.0;
    if (data[i] == hi) out[i] = 1.0;
  }
  return out;
}

Eigen::ArrayXd sample_points(const Interval& window, int n) {
  if (n < 2) throw DomainError("need at least two sample points");
  Eigen::ArrayXd points(n);
  const double span = window.hi - window.lo;
  for (int i = 0; i < n; ++i) {
    points[i] = window.lo + span * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  points[n - 1] = window.hi;
  return points;
}

namespace {

Eigen::ArrayXd normalized_window(const Source& source, const Interval& window, int n) {
  const Eigen::ArrayXd lambdas = sample_points(window, n);
  const Eigen::ArrayXd values = source(lambdas);
  if (values.size() != lambdas.size()) {
    throw DomainError("observable source returned the wrong number of values");
  }
  return normalize(values);
}

double table_violation(const Eigen::ArrayXd& normalized, int depth, benford::Distance distance) {
  const auto observed = benford::observed_table(
      std::span<const double>(normalized.data(), static_cast<std::size_t>(normalized.size())),
      depth);
  return benford::violation(distance, observed);
}

}  // namespace

double window_violation(const Source& source, const Interval& window, int n, int depth,
                        benford::Distance distance) {
  benford::check_depth(depth);
  return table_violation(normalized_window(source, window, n), depth, distance);
}

std::vector<ViolationProfile> profiles(const Source& source, const WindowSpec& spec,
                                       std::span<const ProfileRequest> requests, int jobs,
                                       const std::string& label) {
  const std::size_t count = spec.count();
  for (const ProfileRequest& r : requests) benford::check_depth(r.depth);

  std::vector<ViolationProfile> out(requests.size());
  for (std::size_t r = 0; r < requests.size(); ++r) {
    out[r].lambda_mid.resize(static_cast<Eigen::Index>(count));
    out[r].delta.resize(static_cast<Eigen::Index>(count));
    out[r].meta = {label, requests[r].depth, requests[r].distance, spec};
    for (std::size_t m = 0; m < count; ++m) {
      out[r].lambda_mid[static_cast<Eigen::Index>(m)] = spec.midpoint(m);
    }
  }

  parallel_for(count, jobs, [&](std::size_t m) {
    const Eigen::ArrayXd normalized = normalized_window(source, spec.window(m), spec.n);
    const std::span<const double> data(normalized.data(),
                                       static_cast<std::size_t>(normalized.size()));
    std::array<std::optional<benford::FrequencyTable>, benford::kMaxDepth + 1> tables;
    for (std::size_t r = 0; r < requests.size(); ++r) {
      const int depth = requests[r].depth;
      auto& table = tables[static_cast<std::size_t>(depth)];
      if (!table) table = benford::observed_table(data, depth);
      out[r].delta[static_cast<Eigen::Index>(m)] = benford::violation(requests[r].distance, *table);
    }
  });
  return out;
}

ViolationProfile profile(const Source& source, const WindowSpec& spec, int depth,
                         benford::Distance distance, int jobs, const std::string& label) {
  const ProfileRequest request{depth, distance};
  return std::move(profiles(source, spec, std::span(&request, 1), jobs, label).front());
}

ConvergenceResult convergence_check(const Source& source, WindowSpec spec, int depth,
                                    benford::Distance distance, double tolerance, int n0,
                                    int n_max, int jobs) {
  if (!(tolerance > 0.0)) throw DomainError("convergence tolerance must be positive");
  if (n0 < kMinSamples) throw DomainError("initial sample count below minimum");

  ConvergenceResult result{};
  spec.n = n0;
  ViolationProfile current = profile(source, spec, depth, distance, jobs);
  while (true) {
    if (spec.n > n_max / 2) {
      std::ostringstream msg;
      msg << "profile did not converge to " << tolerance << " within n <= " << n_max;
      if (!result.history.empty()) msg << " (last deviation " << result.history.back().deviation << ")";
      throw NumericError(msg.str());
    }
    WindowSpec doubled = spec;
    doubled.n = 2 * spec.n;
    ViolationProfile next = profile(source, doubled, depth, distance, jobs);

    double deviation = 0.0;
    for (Eigen::Index m = 0; m < current.size(); ++m) {
      const double base = std::max(current.delta[m], 1e-6);
      deviation = std::max(deviation, std::abs(next.delta[m] - current.delta[m]) / base);
    }
    result.history.push_back({spec.n, deviation});
    if (deviation < tolerance) {
      result.n = spec.n;
      result.deviation = deviation;
      return result;
    }
    spec = doubled;
    current = std::move(next);
  }
}

void write_profile_csv(std::ostream& out, const ViolationProfile& profile) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "lambda_mid,delta\n" << std::setprecision(17);
  for (Eigen::Index m = 0; m < profile.size(); ++m) {
    out << profile.lambda_mid[m] << ',' << profile.delta[m] << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace bqpt::window
