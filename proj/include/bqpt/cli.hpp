#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bqpt/benford.hpp"
#include "bqpt/kv_config.hpp"
#include "bqpt/scaling.hpp"
#include "bqpt/window_profiler.hpp"
#include "bqpt/xy_model.hpp"

namespace bqpt::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumeric = 2, kIo = 3 };

class UsageError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class Preset { coarse, full };

/// How many samples each window gets for a given digit depth.
struct SampleCount {
  enum class Kind { fixed, automatic, per_depth } kind = Kind::fixed;
  int n = 10000;

  std::string to_string() const;  // integer, "auto" or "per-depth"
  static SampleCount parse(const std::string& text);
};

struct RunConfig {
  std::string command;
  xy::ObservableKind observable = xy::ObservableKind::mz();
  double gamma = 0.5;
  double beta_tilde = xy::kZeroTemperature;
  std::vector<xy::SystemSize> sizes;
  int depth = 1;
  benford::Distance distance = benford::Distance::md;
  window::WindowSpec spec;  // spec.n is set per run from `samples`
  SampleCount samples;
  double tolerance = 0.01;
  scaling::FitWindowPolicy fit_window;
  scaling::Mode scaling_mode = scaling::Mode::fixed;
  double lambda_c = 1.0;
  Preset preset = Preset::coarse;
  std::vector<double> lambdas;  // explicit observables grid
  int points = 101;             // otherwise evenly spaced over [a, b]
  std::string input;            // benford subcommand
  std::filesystem::path out_dir = ".";
  int jobs = 0;
  bool emit_plot = false;

  xy::ChainParams chain(xy::SystemSize size) const { return {gamma, beta_tilde, size}; }
  std::vector<double> observable_grid() const;

  /// Entries of the metadata sidecar; reading them back reproduces the run.
  std::vector<std::pair<std::string, std::string>> sidecar() const;
};

/// Window sample counts that the full preset uses per digit depth.
int per_depth_samples(int depth);

/// Builds a config from merged key-values (config file under command-line
/// flags). Throws UsageError for unknown keys or invalid values.
RunConfig resolve_config(const std::string& command, const KeyValues& values);

struct CellRequest {
  xy::ObservableKind observable;
  int depth;
  benford::Distance distance;
};

struct CellOutcome {
  std::vector<scaling::ScalingPoint> points;
  std::vector<window::Interval> fit_windows;
  std::vector<double> fit_residuals;
  std::optional<std::string> error;  // first failure; the cell is abandoned
};

using SourceFactory =
    std::function<window::Source(const xy::ObservableKind&, const xy::ChainParams&)>;

window::Source xy_source(const xy::ObservableKind& kind, const xy::ChainParams& chain);

/// Profile -> cubic fit -> pseudo-critical point for every system size and
/// every requested (observable, depth, distance) cell. Window samples are
/// shared between cells with the same observable and sample count.
std::vector<CellOutcome> scan_pseudo_critical(const RunConfig& config,
                                              std::span<const CellRequest> cells,
                                              const SourceFactory& factory, std::ostream& log);

/// Pseudo-critical points of ready-made profiles (keyed by system size)
/// followed by the power-law fit.
scaling::ScalingResult scaling_from_profiles(
    std::span<const std::pair<int, window::ViolationProfile>> profiles,
    const scaling::FitWindowPolicy& policy, scaling::Mode mode, double lambda_c);

void cmd_observables(const RunConfig& config, std::ostream& log);
void cmd_profile(const RunConfig& config, std::ostream& log);
void cmd_scaling(const RunConfig& config, std::ostream& log);
void cmd_table1(const RunConfig& config, std::ostream& log);
void cmd_benford(const RunConfig& config, std::ostream& out);

/// Entry point: parses arguments, dispatches, maps errors to exit codes and
/// prints one `error:<kind>: message` line on failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bqpt::cli
