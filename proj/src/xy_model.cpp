#include "bqpt/xy_model.hpp"

#include <charconv>
#include <memory>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bqpt/errors.hpp"
#include "bqpt/parallel.hpp"

namespace bqpt::xy {
namespace {

constexpr int kMaxInfiniteOffset = 1000;

struct UnitPoint {
  double cos;
  double sin;
};

// cos and sin of 2 pi m / n, reduced to the first octant so that symmetric
// momenta get bitwise-symmetric values and axis angles are exact.
UnitPoint unit_circle(long long m, long long n) {
  m %= n;
  if (m < 0) m += n;
  const long long quadrant = 4 * m / n;
  const long long r = 4 * m - quadrant * n;  // angle (pi/2) * r / n in the quadrant
  double c = 1.0, s = 0.0;
  if (2 * r == n) {
    c = s = std::cos(std::numbers::pi / 4);
  } else if (2 * r < n) {
    const double theta = 0.5 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
    c = std::cos(theta);
    s = std::sin(theta);
  } else {
    const double theta =
        0.5 * std::numbers::pi * static_cast<double>(n - r) / static_cast<double>(n);
    c = std::sin(theta);
    s = std::cos(theta);
  }
  switch (quadrant) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

// Momentum tables of a finite chain, phi_p = 2 pi p / N for p = 1..N/2.
struct MomentumTable {
  explicit MomentumTable(int sites) : sites(sites) {
    const int modes = sites / 2;
    cos_phi.resize(modes);
    sin_phi.resize(modes);
    for (int p = 1; p <= modes; ++p) {
      const UnitPoint u = unit_circle(p, sites);
      cos_phi[p - 1] = u.cos;
      sin_phi[p - 1] = u.sin;
    }
  }

  int sites;
  std::vector<double> cos_phi;
  std::vector<double> sin_phi;
};

double energy(double cos_phi, double sin_phi, double lambda, double gamma) {
  const double a = gamma * sin_phi;
  const double b = lambda - cos_phi;
  return std::sqrt(a * a + b * b);
}

double thermal_factor(double beta_tilde, double energy) {
  return beta_tilde == kZeroTemperature ? 1.0 : std::tanh(0.5 * beta_tilde * energy);
}

// A vanishing gap only occurs at isolated (phi, lambda) where the numerator
// vanishes as well; those terms contribute nothing.
double magnetization_term(double cos_phi, double sin_phi, double lambda, double gamma,
                          double beta_tilde) {
  const double e = energy(cos_phi, sin_phi, lambda, gamma);
  if (e == 0.0) return 0.0;
  return thermal_factor(beta_tilde, e) * (cos_phi - lambda) / e;
}

double correlator_term(double cos_phi, double sin_phi, double cos_phi_r, double sin_phi_r,
                       double lambda, double gamma) {
  const double e = energy(cos_phi, sin_phi, lambda, gamma);
  if (e == 0.0) return 0.0;
  return (gamma * sin_phi_r * sin_phi - cos_phi_r * (cos_phi - lambda)) / e;
}

double finite_magnetization(const MomentumTable& table, double lambda, double gamma,
                            double beta_tilde) {
  double sum = 0.0;
  for (std::size_t p = 0; p < table.cos_phi.size(); ++p) {
    sum += magnetization_term(table.cos_phi[p], table.sin_phi[p], lambda, gamma, beta_tilde);
  }
  return -2.0 / table.sites * sum;
}

struct OffsetTable {
  OffsetTable(const MomentumTable& momenta, int offset) {
    const std::size_t modes = momenta.cos_phi.size();
    cos_phi_r.resize(modes);
    sin_phi_r.resize(modes);
    for (std::size_t p = 0; p < modes; ++p) {
      const UnitPoint u =
          unit_circle(static_cast<long long>(p + 1) * offset, momenta.sites);
      cos_phi_r[p] = u.cos;
      sin_phi_r[p] = u.sin;
    }
  }
  std::vector<double> cos_phi_r;
  std::vector<double> sin_phi_r;
};

double finite_correlator(const MomentumTable& table, const OffsetTable& offset, double lambda,
                         double gamma) {
  double sum = 0.0;
  for (std::size_t p = 0; p < table.cos_phi.size(); ++p) {
    sum += correlator_term(table.cos_phi[p], table.sin_phi[p], offset.cos_phi_r[p],
                           offset.sin_phi_r[p], lambda, gamma);
  }
  return 2.0 / table.sites * sum;
}

double infinite_magnetization(double lambda, double gamma, double beta_tilde,
                              const QuadratureOptions& quad) {
  auto integrand = [&](double phi) {
    return magnetization_term(std::cos(phi), std::sin(phi), lambda, gamma, beta_tilde);
  };
  return -integrate(integrand, 0.0, std::numbers::pi, quad).value / std::numbers::pi;
}

double infinite_correlator(int offset, double lambda, double gamma,
                           const QuadratureOptions& quad) {
  auto integrand = [&](double phi) {
    return correlator_term(std::cos(phi), std::sin(phi), std::cos(phi * offset),
                           std::sin(phi * offset), lambda, gamma);
  };
  return integrate(integrand, 0.0, std::numbers::pi, quad).value / std::numbers::pi;
}

void check_lambda(double lambda) {
  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
}

}  // namespace

SystemSize SystemSize::sites(int n) {
  if (n < 4 || n % 2 != 0) {
    throw DomainError("system size must be an even integer >= 4, got " + std::to_string(n));
  }
  return SystemSize(n);
}

int SystemSize::sites() const {
  if (is_infinite()) throw DomainError("infinite chain has no finite site count");
  return sites_;
}

std::string SystemSize::to_string() const {
  return is_infinite() ? std::string("inf") : std::to_string(sites_);
}

SystemSize SystemSize::parse(const std::string& text) {
  if (text == "inf" || text == "infinite" || text == "Infinite") return infinite();
  int n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DomainError("invalid system size '" + text + "'");
  }
  return sites(n);
}

void ChainParams::validate() const {
  if (!std::isfinite(gamma) || gamma == 0.0) {
    throw DomainError("anisotropy gamma must be finite and nonzero");
  }
  if (std::isnan(beta_tilde) || beta_tilde <= 0.0) {
    throw DomainError("inverse temperature beta_tilde must be > 0");
  }
}

ModelParams::ModelParams(double lambda, ChainParams chain) : lambda_(lambda), chain_(chain) {
  check_lambda(lambda);
  chain_.validate();
}

double dispersion(double phi, double lambda, double gamma) {
  return energy(std::cos(phi), std::sin(phi), lambda, gamma);
}

double magnetization(const ModelParams& params, const QuadratureOptions& quad) {
  if (params.size().is_infinite()) {
    return infinite_magnetization(params.lambda(), params.gamma(), params.beta_tilde(), quad);
  }
  const MomentumTable table(params.size().sites());
  return finite_magnetization(table, params.lambda(), params.gamma(), params.beta_tilde());
}

double correlator_g(int offset, double lambda, double gamma, SystemSize size,
                    const QuadratureOptions& quad) {
  const ChainParams chain{gamma, kZeroTemperature, size};
  chain.validate();
  check_lambda(lambda);
  check_observable(ObservableKind::g(offset), chain);
  if (size.is_infinite()) return infinite_correlator(offset, lambda, gamma, quad);
  const MomentumTable table(size.sites());
  return finite_correlator(table, OffsetTable(table, offset), lambda, gamma);
}

NearestNeighbour correlators_nn(double lambda, double gamma, SystemSize size,
                                const QuadratureOptions& quad) {
  const double g_minus = correlator_g(-1, lambda, gamma, size, quad);
  const double g_plus = correlator_g(1, lambda, gamma, size, quad);
  const double mz = magnetization(ModelParams(lambda, gamma, kZeroTemperature, size), quad);
  return {g_minus, g_plus, mz * mz - g_minus * g_plus};
}

std::string ObservableKind::to_string() const {
  switch (tag_) {
    case Tag::Mz: return "mz";
    case Tag::Txx: return "txx";
    case Tag::Tyy: return "tyy";
    case Tag::Tzz: return "tzz";
    case Tag::G: return "g:" + std::to_string(offset_);
  }
  return "?";
}

ObservableKind ObservableKind::parse(const std::string& text) {
  if (text == "mz") return mz();
  if (text == "txx") return txx();
  if (text == "tyy") return tyy();
  if (text == "tzz") return tzz();
  if (text.rfind("g:", 0) == 0) {
    int offset = 0;
    const char* first = text.data() + 2;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, offset);
    if (ec == std::errc() && ptr == last && first != last) return g(offset);
  }
  throw DomainError("unknown observable '" + text + "' (expected mz, txx, tyy, tzz or g:<R>)");
}

void check_observable(const ObservableKind& kind, const ChainParams& chain) {
  chain.validate();
  if (kind.tag() == ObservableKind::Tag::Mz) return;
  if (!chain.zero_temperature()) {
    throw DomainError("correlator " + kind.to_string() + " is only defined at zero temperature");
  }
  const int offset = kind.tag() == ObservableKind::Tag::G ? kind.offset() : 1;
  const int bound = chain.size.is_infinite() ? kMaxInfiniteOffset : chain.size.sites() / 2;
  if (std::abs(offset) > bound) {
    throw DomainError("correlator offset " + std::to_string(offset) + " exceeds bound " +
                      std::to_string(bound));
  }
}

double evaluate(const ObservableKind& kind, const ChainParams& chain, double lambda,
                const QuadratureOptions& quad) {
  check_observable(kind, chain);
  using Tag = ObservableKind::Tag;
  switch (kind.tag()) {
    case Tag::Mz: return magnetization(ModelParams(lambda, chain), quad);
    case Tag::Txx: return correlator_g(-1, lambda, chain.gamma, chain.size, quad);
    case Tag::Tyy: return correlator_g(1, lambda, chain.gamma, chain.size, quad);
    case Tag::Tzz: return correlators_nn(lambda, chain.gamma, chain.size, quad).tzz;
    case Tag::G: return correlator_g(kind.offset(), lambda, chain.gamma, chain.size, quad);
  }
  return 0.0;
}

Observable make_observable(const ObservableKind& kind, const ChainParams& chain,
                           const QuadratureOptions& quad) {
  check_observable(kind, chain);
  if (chain.size.is_infinite()) {
    return [kind, chain, quad](const Eigen::ArrayXd& lambdas) {
      Eigen::ArrayXd out(lambdas.size());
      for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
        out[i] = evaluate(kind, chain, lambdas[i], quad);
      }
      return out;
    };
  }

  auto table = std::make_shared<const MomentumTable>(chain.size.sites());
  const double gamma = chain.gamma;
  const double beta = chain.beta_tilde;
  using Tag = ObservableKind::Tag;

  auto each = [](const Eigen::ArrayXd& lambdas, auto&& fn) {
    Eigen::ArrayXd out(lambdas.size());
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) out[i] = fn(lambdas[i]);
    return out;
  };

  if (kind.tag() == Tag::Mz) {
    return [=](const Eigen::ArrayXd& lambdas) {
      return each(lambdas, [&](double l) { return finite_magnetization(*table, l, gamma, beta); });
    };
  }
  if (kind.tag() == Tag::Tzz) {
    auto minus = std::make_shared<const OffsetTable>(*table, -1);
    auto plus = std::make_shared<const OffsetTable>(*table, 1);
    return [=](const Eigen::ArrayXd& lambdas) {
      return each(lambdas, [&](double l) {
        const double mz = finite_magnetization(*table, l, gamma, beta);
        return mz * mz - finite_correlator(*table, *minus, l, gamma) *
                             finite_correlator(*table, *plus, l, gamma);
      });
    };
  }
  const int offset = kind.tag() == Tag::Txx   ? -1
                     : kind.tag() == Tag::Tyy ? 1
                                              : kind.offset();
  auto offsets = std::make_shared<const OffsetTable>(*table, offset);
  return [=](const Eigen::ArrayXd& lambdas) {
    return each(lambdas, [&](double l) { return finite_correlator(*table, *offsets, l, gamma); });
  };
}

std::vector<CurvePoint> observable_curve(const ObservableKind& kind, const ChainParams& chain,
                                         std::span<const double> lambda_grid, int jobs,
                                         const QuadratureOptions& quad) {
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    check_lambda(lambda_grid[i]);
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])) {
      throw DomainError("lambda grid must be strictly increasing");
    }
  }
  const Observable observable = make_observable(kind, chain, quad);
  std::vector<CurvePoint> curve(lambda_grid.size());
  parallel_for(lambda_grid.size(), jobs, [&](std::size_t i) {
    Eigen::ArrayXd one(1);
    one[0] = lambda_grid[i];
    curve[i] = {lambda_grid[i], observable(one)[0]};
  });
  return curve;
}

}  // namespace bqpt::xy
