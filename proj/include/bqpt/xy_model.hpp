#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bqpt/quadrature.hpp"

namespace bqpt::xy {

inline constexpr double kZeroTemperature = std::numeric_limits<double>::infinity();

// Chain length: a finite even number of sites (>= 4) or the thermodynamic limit.
class SystemSize {
 public:
  static SystemSize infinite() { return SystemSize(0); }
  static SystemSize sites(int n);

  bool is_infinite() const { return sites_ == 0; }
  int sites() const;  // throws DomainError for the infinite size

  std::string to_string() const;
  static SystemSize parse(const std::string& text);  // "inf" or an integer

  friend bool operator==(SystemSize, SystemSize) = default;

 private:
  explicit SystemSize(int n) : sites_(n) {}
  int sites_;
};

// Parameters of the transverse XY chain apart from the driving field.
struct ChainParams {
  double gamma = 0.5;
  double beta_tilde = kZeroTemperature;  // beta * J; infinity is the ground state
  SystemSize size = SystemSize::infinite();

  bool zero_temperature() const { return beta_tilde == kZeroTemperature; }
  void validate() const;
};

class ModelParams {
 public:
  ModelParams(double lambda, ChainParams chain);
  ModelParams(double lambda, double gamma, double beta_tilde, SystemSize size)
      : ModelParams(lambda, ChainParams{gamma, beta_tilde, size}) {}

  double lambda() const { return lambda_; }
  const ChainParams& chain() const { return chain_; }
  double gamma() const { return chain_.gamma; }
  double beta_tilde() const { return chain_.beta_tilde; }
  SystemSize size() const { return chain_.size; }

 private:
  double lambda_;
  ChainParams chain_;
};

/// Quasiparticle energy sqrt(gamma^2 sin^2(phi) + (lambda - cos(phi))^2).
double dispersion(double phi, double lambda, double gamma);

/// Transverse magnetization M_z. Finite chains use the momentum sum over
/// phi_p = 2 pi p / N, p = 1..N/2; the infinite chain integrates over [0, pi].
double magnetization(const ModelParams& params, const QuadratureOptions& quad = {});

/// Zero-temperature two-point function G(R, lambda). For finite N the
/// integral is replaced by the same momentum sum that relates the finite and
/// infinite magnetization.
double correlator_g(int offset, double lambda, double gamma, SystemSize size,
                    const QuadratureOptions& quad = {});

struct NearestNeighbour {
  double txx;
  double tyy;
  double tzz;
};

NearestNeighbour correlators_nn(double lambda, double gamma, SystemSize size,
                                const QuadratureOptions& quad = {});

class ObservableKind {
 public:
  enum class Tag { Mz, Txx, Tyy, Tzz, G };

  static ObservableKind mz() { return ObservableKind(Tag::Mz, 0); }
  static ObservableKind txx() { return ObservableKind(Tag::Txx, 0); }
  static ObservableKind tyy() { return ObservableKind(Tag::Tyy, 0); }
  static ObservableKind tzz() { return ObservableKind(Tag::Tzz, 0); }
  static ObservableKind g(int offset) { return ObservableKind(Tag::G, offset); }

  Tag tag() const { return tag_; }
  int offset() const { return offset_; }

  // "mz", "txx", "tyy", "tzz", "g:<R>"
  std::string to_string() const;
  static ObservableKind parse(const std::string& text);

  friend bool operator==(const ObservableKind&, const ObservableKind&) = default;

 private:
  ObservableKind(Tag tag, int offset) : tag_(tag), offset_(offset) {}
  Tag tag_;
  int offset_;
};

/// Checks that `kind` can be evaluated for `chain` (correlators need zero
/// temperature; |R| <= N/2 on finite chains).
void check_observable(const ObservableKind& kind, const ChainParams& chain);

double evaluate(const ObservableKind& kind, const ChainParams& chain, double lambda,
                const QuadratureOptions& quad = {});

/// Batch evaluator lambda-grid -> values. Safe to call concurrently.
using Observable = std::function<Eigen::ArrayXd(const Eigen::ArrayXd& lambdas)>;

/// Builds an evaluator with the momentum tables of a finite chain
/// precomputed once; infinite chains fall back to pointwise quadrature.
Observable make_observable(const ObservableKind& kind, const ChainParams& chain,
                           const QuadratureOptions& quad = {});

struct CurvePoint {
  double lambda;
  double value;
};

/// Evaluates `kind` over a strictly increasing grid. Output order follows the
/// grid and does not depend on `jobs`.
std::vector<CurvePoint> observable_curve(const ObservableKind& kind, const ChainParams& chain,
                                         std::span<const double> lambda_grid, int jobs = 1,
                                         const QuadratureOptions& quad = {});

}  // namespace bqpt::xy
