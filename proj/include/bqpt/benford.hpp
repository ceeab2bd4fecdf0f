#pragma once

#include <span>
#include <string>

#include <Eigen/Core>

namespace bqpt::benford {

inline constexpr int kMaxDepth = 4;

/// The first `depth` significant decimal digits of a number packed into an
/// integer in [10^(depth-1), 10^depth - 1].
class DigitKey {
 public:
  DigitKey(int depth, int value);

  int depth() const { return depth_; }
  int value() const { return value_; }
  // Position of this key in a FrequencyTable of the same depth.
  Eigen::Index index() const;

  friend bool operator==(const DigitKey&, const DigitKey&) = default;

 private:
  int depth_;
  int value_;
};

void check_depth(int depth);
int first_key(int depth);  // 10^(depth-1)
int key_count(int depth);  // 9 * 10^(depth-1)

/// Leading `depth` digits of |x| (truncated, not rounded). Throws DomainError
/// for zero or non-finite input.
DigitKey significant_digits(double x, int depth);

/// Generalized Benford law log10(1 + 1/key).
double benford_probability(const DigitKey& key);

/// Counts over every digit key of one depth, zero-filled.
class FrequencyTable {
 public:
  FrequencyTable(int depth, Eigen::VectorXd counts);

  int depth() const { return depth_; }
  const Eigen::VectorXd& counts() const { return counts_; }
  double count(const DigitKey& key) const { return counts_[key.index()]; }
  double total() const { return total_; }
  Eigen::Index size() const { return counts_.size(); }

 private:
  int depth_;
  Eigen::VectorXd counts_;
  double total_;
};

/// total * benford_probability(key) for every key.
FrequencyTable expected_table(double total, int depth);

/// Bins the nonzero data by leading digits; exact zeros are skipped and do
/// not count towards total(). Throws NumericError when nothing is binned.
FrequencyTable observed_table(std::span<const double> data, int depth);

enum class Distance { md, sd, bd };

std::string to_string(Distance distance);
Distance parse_distance(const std::string& text);

/// sum |O - E| / E
double delta_md(const FrequencyTable& observed, const FrequencyTable& expected);
/// sqrt(sum (O - E)^2)
double delta_sd(const FrequencyTable& observed, const FrequencyTable& expected);
/// Bhattacharyya distance -ln sum sqrt(o e) between the tables normalized
/// to probability distributions.
double delta_bd(const FrequencyTable& observed, const FrequencyTable& expected);

double distance(Distance kind, const FrequencyTable& observed, const FrequencyTable& expected);

/// Distance of `observed` from expected_table(observed.total(), depth).
double violation(Distance kind, const FrequencyTable& observed);

}  // namespace bqpt::benford
