#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bqpt/benford.hpp"

namespace bqpt::window {

/// Any batch evaluator lambda-grid -> observable values; must be safe to call
/// from several threads at once.
using Source = std::function<Eigen::ArrayXd(const Eigen::ArrayXd& lambdas)>;

struct Interval {
  double lo;
  double hi;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Shifting field windows [a + m*epsilon, a + w + m*epsilon] inside [a, b],
/// each sampled at n evenly spaced points.
struct WindowSpec {
  double a = 0.5;
  double b = 1.5;
  double w = 0.05;
  double epsilon = 1e-3;
  int n = 10000;

  void validate() const;
  std::size_t count() const;
  Interval window(std::size_t m) const;
  double midpoint(std::size_t m) const;  // a + w/2 + m*epsilon
};

inline constexpr int kMinSamples = 100;

std::vector<Interval> windows(const WindowSpec& spec);

/// Min-max rescaling to [0, 1]. Throws NumericError on constant data.
Eigen::ArrayXd normalize(const Eigen::ArrayXd& data);

/// n evenly spaced points over `window`, both endpoints included exactly.
Eigen::ArrayXd sample_points(const Interval& window, int n);

double window_violation(const Source& source, const Interval& window, int n, int depth,
                        benford::Distance distance);

struct ProfileMeta {
  std::string observable;  // free-form label of the data source
  int depth = 1;
  benford::Distance distance = benford::Distance::md;
  WindowSpec spec;
};

struct ViolationProfile {
  Eigen::VectorXd lambda_mid;
  Eigen::VectorXd delta;
  ProfileMeta meta;

  Eigen::Index size() const { return lambda_mid.size(); }
};

struct ProfileRequest {
  int depth;
  benford::Distance distance;
};

/// Violation profile over every window of `spec`. Windows are evaluated on
/// `jobs` threads and stored by index, so the result is scheduling-invariant.
ViolationProfile profile(const Source& source, const WindowSpec& spec, int depth,
                         benford::Distance distance, int jobs = 1,
                         const std::string& label = {});

/// Several (depth, distance) profiles that share the same window samples;
/// each observable value is computed once per window.
std::vector<ViolationProfile> profiles(const Source& source, const WindowSpec& spec,
                                       std::span<const ProfileRequest> requests, int jobs = 1,
                                       const std::string& label = {});

struct ConvergenceStep {
  int n;
  double deviation;  // max over windows of |D(2n) - D(n)| / max(D(n), 1e-6)
};

struct ConvergenceResult {
  int n;
  double deviation;
  std::vector<ConvergenceStep> history;
};

/// Doubles n from n0 until the profile at 2n differs from the one at n by
/// less than `tolerance` (relative, worst window). Throws NumericError if n
/// would exceed n_max first.
ConvergenceResult convergence_check(const Source& source, WindowSpec spec, int depth,
                                    benford::Distance distance, double tolerance = 0.01,
                                    int n0 = 2500, int n_max = 1 << 20, int jobs = 1);

/// `lambda_mid,delta` rows at 17 significant digits.
void write_profile_csv(std::ostream& out, const ViolationProfile& profile);

}  // namespace bqpt::window
