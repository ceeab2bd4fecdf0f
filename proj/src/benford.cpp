#include "bqpt/benford.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "bqpt/errors.hpp"

namespace bqpt::benford {
namespace {

constexpr std::array<int, kMaxDepth + 2> kPow10 = {1, 10, 100, 1000, 10000, 100000};

// Powers of ten up to 1e22 are exact doubles.
double exact_pow10(int n) {
  static const auto table = [] {
    std::array<double, 23> t{};
    double v = 1.0;
    for (double& entry : t) {
      entry = v;
      v *= 10.0;
    }
    return t;
  }();
  return n <= 22 ? table[static_cast<std::size_t>(n)] : std::pow(10.0, n);
}

// floor(|x| * 10^shift) with a single rounding whenever the power is exact.
// floor() that treats a product a few ulps below an integer as that integer,
// so decimal inputs such as 1234e-6 keep their written digits.
double snap_floor(double scaled) {
  const double t = std::floor(scaled);
  return t + 1.0 - scaled <= 4.0 * std::numeric_limits<double>::epsilon() * scaled ? t + 1.0 : t;
}

double shifted_floor(double magnitude, int shift) {
  if (shift >= 0) return snap_floor(magnitude * exact_pow10(shift));
  if (shift >= -22) return snap_floor(magnitude / exact_pow10(-shift));
  // Deep subnormal range: split the shift so the intermediate stays finite.
  return snap_floor(magnitude / exact_pow10(22) / std::pow(10.0, -shift - 22));
}

void check_compatible(const FrequencyTable& observed, const FrequencyTable& expected) {
  if (observed.depth() != expected.depth()) {
    throw DomainError("frequency tables have different digit depths");
  }
}

}  // namespace

void check_depth(int depth) {
  if (depth < 1 || depth > kMaxDepth) {
    throw DomainError("digit depth must be in 1.." + std::to_string(kMaxDepth) + ", got " +
                      std::to_string(depth));
  }
}

int first_key(int depth) {
  check_depth(depth);
  return kPow10[static_cast<std::size_t>(depth - 1)];
}

int key_count(int depth) { return 9 * first_key(depth); }

DigitKey::DigitKey(int depth, int value) : depth_(depth), value_(value) {
  check_depth(depth);
  if (value < first_key(depth) || value >= kPow10[static_cast<std::size_t>(depth)]) {
    throw DomainError("digit key " + std::to_string(value) + " out of range for depth " +
                      std::to_string(depth));
  }
}

Eigen::Index DigitKey::index() const { return value_ - first_key(depth_); }

DigitKey significant_digits(double x, int depth) {
  check_depth(depth);
  if (!std::isfinite(x)) throw DomainError("significant digits of a non-finite value");
  if (x == 0.0) throw DomainError("zero has no significant digits");

  const double magnitude = std::abs(x);
  const int lo = first_key(depth);
  const int hi = kPow10[static_cast<std::size_t>(depth)];
  int exponent = static_cast<int>(std::floor(std::log10(magnitude)));
  double lead = shifted_floor(magnitude, depth - 1 - exponent);
  // log10 may round across a decade boundary; shift by one decade if so.
  if (lead < lo) {
    --exponent;
    lead = shifted_floor(magnitude, depth - 1 - exponent);
  } else if (lead >= hi) {
    ++exponent;
    lead = shifted_floor(magnitude, depth - 1 - exponent);
  }
  return DigitKey(depth, static_cast<int>(lead));
}

double benford_probability(const DigitKey& key) {
  return std::log10(1.0 + 1.0 / static_cast<double>(key.value()));
}

FrequencyTable::FrequencyTable(int depth, Eigen::VectorXd counts)
    : depth_(depth), counts_(std::move(counts)) {
  if (counts_.size() != key_count(depth)) {
    throw DomainError("frequency table for depth " + std::to_string(depth) + " needs " +
                      std::to_string(key_count(depth)) + " bins");
  }
  if ((counts_.array() < 0.0).any() || !counts_.allFinite()) {
    throw DomainError("frequency counts must be finite and nonnegative");
  }
  total_ = counts_.sum();
}

FrequencyTable expected_table(double total, int depth) {
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DomainError("expected table needs a positive sample count");
  }
  const int lo = first_key(depth);
  Eigen::VectorXd counts(key_count(depth));
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    counts[i] = total * benford_probability(DigitKey(depth, lo + static_cast<int>(i)));
  }
  return FrequencyTable(depth, std::move(counts));
}

FrequencyTable observed_table(std::span<const double> data, int depth) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(key_count(depth));
  for (double x : data) {
    if (x == 0.0) continue;
    counts[significant_digits(x, depth).index()] += 1.0;
  }
  if (counts.sum() == 0.0) throw NumericError("no nonzero data to tabulate");
  return FrequencyTable(depth, std::move(counts));
}

std::string to_string(Distance distance) {
  switch (distance) {
    case Distance::md: return "md";
    case Distance::sd: return "sd";
    case Distance::bd: return "bd";
  }
  return "?";
}

Distance parse_distance(const std::string& text) {
  if (text == "md") return Distance::md;
  if (text == "sd") return Distance::sd;
  if (text == "bd") return Distance::bd;
  throw DomainError("unknown distance '" + text + "' (expected md, sd or bd)");
}

double delta_md(const FrequencyTable& observed, const FrequencyTable& expected) {
  check_compatible(observed, expected);
  const Eigen::ArrayXd e = expected.counts().array();
  if ((e <= 0.0).any()) throw DomainError("expected frequencies must be strictly positive");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    sum += std::abs(observed.counts()[i] - e[i]) / e[i];
  }
  return sum;
}

double delta_sd(const FrequencyTable& observed, const FrequencyTable& expected) {
  check_compatible(observed, expected);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    const double d = observed.counts()[i] - expected.counts()[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double delta_bd(const FrequencyTable& observed, const FrequencyTable& expected) {
  check_compatible(observed, expected);
  if (!(observed.total() > 0.0) || !(expected.total() > 0.0)) {
    throw DomainError("Bhattacharyya distance needs nonempty tables");
  }
  const double scale = 1.0 / (observed.total() * expected.total());
  double coefficient = 0.0;
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    coefficient += std::sqrt(observed.counts()[i] * expected.counts()[i] * scale);
  }
  // Cauchy-Schwarz bounds the coefficient by 1; rounding may not.
  return std::max(0.0, -std::log(coefficient));
}

double distance(Distance kind, const FrequencyTable& observed, const FrequencyTable& expected) {
  switch (kind) {
    case Distance::md: return delta_md(observed, expected);
    case Distance::sd: return delta_sd(observed, expected);
    case Distance::bd: return delta_bd(observed, expected);
  }
  return 0.0;
}

double violation(Distance kind, const FrequencyTable& observed) {
  return distance(kind, observed, expected_table(observed.total(), observed.depth()));
}

}  // namespace bqpt::benford
