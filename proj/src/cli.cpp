#include "bqpt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "bqpt/errors.hpp"

namespace bqpt::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<int> kPaperSizes = {14, 20, 24, 30, 34, 40};

const std::set<std::string> kKnownKeys = {
    "command", "observable", "gamma",       "beta",         "n_sites",  "k",
    "distance", "a",         "b",           "w",            "epsilon",  "n",
    "tolerance", "fit_window", "scaling_mode", "lambda_c",  "preset",   "lambda",
    "points",  "input",      "out",         "jobs",         "emit_plot"};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw UsageError("invalid number for " + key + ": '" + text + "'");
  }
}

int parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw UsageError("invalid integer for " + key + ": '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("invalid boolean for " + key + ": '" + text + "'");
}

// Re-labels domain errors raised while interpreting user input as usage errors.
template <typename F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_sidecar(const RunConfig& config, const fs::path& path) {
  auto out = open_output(path);
  write_key_values(out, config.sidecar());
}

int samples_for(const RunConfig& config, int depth) {
  switch (config.samples.kind) {
    case SampleCount::Kind::fixed: return config.samples.n;
    case SampleCount::Kind::per_depth: return per_depth_samples(depth);
    case SampleCount::Kind::automatic: break;
  }
  throw DomainError("sample count is automatic and must be resolved by convergence");
}

void write_plot_script(const fs::path& dir, const std::string& csv_name,
                       const window::ViolationProfile& profile) {
  auto out = open_output(dir / "plot_profile.py");
  out << "#!/usr/bin/env python3\n"
         "import csv\n"
         "import os\n\n"
         "import matplotlib\n\n"
         "matplotlib.use(\"Agg\")\n"
         "import matplotlib.pyplot as plt\n\n"
         "here = os.path.dirname(os.path.abspath(__file__))\n"
         "with open(os.path.join(here, \""
      << csv_name
      << "\")) as fh:\n"
         "    rows = list(csv.DictReader(fh))\n"
         "lam = [float(r[\"lambda_mid\"]) for r in rows]\n"
         "delta = [float(r[\"delta\"]) for r in rows]\n\n"
         "fig, ax = plt.subplots(figsize=(5, 4))\n"
         "ax.plot(lam, delta, lw=1.0)\n"
         "ax.axvline(1.0, color=\"grey\", lw=0.5, ls=\"--\")\n"
         "ax.set_xlabel(r\"$\\lambda$\")\n"
         "ax.set_ylabel(r\"$\\Delta_{"
      << benford::to_string(profile.meta.distance) << "}$ (k = " << profile.meta.depth
      << ")\")\n"
         "ax.set_title(\""
      << profile.meta.observable
      << "\")\n"
         "fig.tight_layout()\n"
         "fig.savefig(os.path.join(here, \"profile.png\"), dpi=150)\n";
}

}  // namespace

std::string SampleCount::to_string() const {
  switch (kind) {
    case Kind::fixed: return std::to_string(n);
    case Kind::automatic: return "auto";
    case Kind::per_depth: return "per-depth";
  }
  return "?";
}

SampleCount SampleCount::parse(const std::string& text) {
  if (text == "auto") return {Kind::automatic, 0};
  if (text == "per-depth") return {Kind::per_depth, 0};
  const int n = parse_int("n", text);
  if (n < window::kMinSamples) {
    throw UsageError("n must be at least " + std::to_string(window::kMinSamples));
  }
  return {Kind::fixed, n};
}

int per_depth_samples(int depth) {
  benford::check_depth(depth);
  static constexpr int kSamples[] = {10000, 10000, 11000, 40000};
  return kSamples[depth - 1];
}

std::vector<double> RunConfig::observable_grid() const {
  if (!lambdas.empty()) return lambdas;
  if (points <= 0) throw UsageError("observable grid is empty");
  if (points == 1) return {spec.a};
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = spec.a + (spec.b - spec.a) * i / (points - 1);
  }
  grid.back() = spec.b;
  return grid;
}

std::vector<std::pair<std::string, std::string>> RunConfig::sidecar() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", command);
  std::vector<std::string> size_text;
  for (const auto& s : sizes) size_text.push_back(s.to_string());

  if (command == "benford") {
    kv.emplace_back("input", input);
    kv.emplace_back("k", std::to_string(depth));
    kv.emplace_back("distance", benford::to_string(distance));
    return kv;
  }
  if (command != "table1") kv.emplace_back("observable", observable.to_string());
  kv.emplace_back("gamma", format_double(gamma));
  if (command == "observables" || command == "profile") {
    kv.emplace_back("beta", format_double(beta_tilde));
  }
  kv.emplace_back("n_sites", join(size_text));
  if (command == "observables") {
    if (!lambdas.empty()) {
      std::vector<std::string> grid;
      for (double l : lambdas) grid.push_back(format_double(l));
      kv.emplace_back("lambda", join(grid));
    } else {
      kv.emplace_back("a", format_double(spec.a));
      kv.emplace_back("b", format_double(spec.b));
      kv.emplace_back("points", std::to_string(points));
    }
    return kv;
  }
  if (command != "table1") {
    kv.emplace_back("k", std::to_string(depth));
    kv.emplace_back("distance", benford::to_string(distance));
  }
  kv.emplace_back("a", format_double(spec.a));
  kv.emplace_back("b", format_double(spec.b));
  kv.emplace_back("w", format_double(spec.w));
  kv.emplace_back("epsilon", format_double(spec.epsilon));
  kv.emplace_back("n", samples.to_string());
  if (samples.kind == SampleCount::Kind::automatic) {
    kv.emplace_back("tolerance", format_double(tolerance));
  }
  if (command != "profile") {
    kv.emplace_back("fit_window", fit_window.to_string());
    kv.emplace_back("scaling_mode", scaling::to_string(scaling_mode));
    kv.emplace_back("lambda_c", format_double(lambda_c));
  }
  return kv;
}

RunConfig resolve_config(const std::string& command, const KeyValues& values) {
  return as_usage([&] {
    for (const auto& [key, value] : values) {
      if (!kKnownKeys.contains(key)) throw UsageError("unknown config key '" + key + "'");
    }
    auto get = [&](const std::string& key) -> std::optional<std::string> {
      const auto it = values.find(key);
      if (it == values.end()) return std::nullopt;
      return it->second;
    };

    RunConfig config;
    config.command = command;
    if (auto v = get("command"); v && *v != command) {
      throw UsageError("config file is for '" + *v + "', not '" + command + "'");
    }

    if (auto v = get("preset")) {
      if (*v == "coarse") config.preset = Preset::coarse;
      else if (*v == "full") config.preset = Preset::full;
      else throw UsageError("preset must be coarse or full");
    }
    if (config.preset == Preset::full) {
      config.spec.epsilon = 5e-5;
      config.samples = {SampleCount::Kind::per_depth, 0};
    } else {
      config.spec.epsilon = 1e-3;
      config.samples = {SampleCount::Kind::fixed, 10000};
    }

    if (auto v = get("observable")) config.observable = xy::ObservableKind::parse(*v);
    if (auto v = get("gamma")) config.gamma = parse_real("gamma", *v);
    if (auto v = get("beta")) config.beta_tilde = parse_real("beta", *v);
    if (auto v = get("k")) config.depth = parse_int("k", *v);
    benford::check_depth(config.depth);
    if (auto v = get("distance")) config.distance = benford::parse_distance(*v);
    if (auto v = get("a")) config.spec.a = parse_real("a", *v);
    if (auto v = get("b")) config.spec.b = parse_real("b", *v);
    if (auto v = get("w")) config.spec.w = parse_real("w", *v);
    if (auto v = get("epsilon")) config.spec.epsilon = parse_real("epsilon", *v);
    if (auto v = get("n")) config.samples = SampleCount::parse(*v);
    if (auto v = get("tolerance")) config.tolerance = parse_real("tolerance", *v);
    if (auto v = get("fit_window")) config.fit_window = scaling::FitWindowPolicy::parse(*v);
    if (auto v = get("scaling_mode")) config.scaling_mode = scaling::parse_mode(*v);
    if (auto v = get("lambda_c")) config.lambda_c = parse_real("lambda_c", *v);
    if (auto v = get("points")) config.points = parse_int("points", *v);
    if (auto v = get("lambda")) {
      for (const auto& item : split_list(*v)) config.lambdas.push_back(parse_real("lambda", item));
      if (config.lambdas.empty()) throw UsageError("observable grid is empty");
    }
    if (auto v = get("input")) config.input = *v;
    if (auto v = get("out")) config.out_dir = *v;
    if (auto v = get("jobs")) config.jobs = parse_int("jobs", *v);
    if (auto v = get("emit_plot")) config.emit_plot = parse_bool("emit_plot", *v);

    if (auto v = get("n_sites")) {
      for (const auto& item : split_list(*v)) config.sizes.push_back(xy::SystemSize::parse(item));
    }
    if (config.sizes.empty()) {
      if (command == "scaling" || command == "table1") {
        for (int n : kPaperSizes) config.sizes.push_back(xy::SystemSize::sites(n));
      } else if (command == "observables") {
        config.sizes.push_back(xy::SystemSize::infinite());
      } else if (command == "profile") {
        throw UsageError("profile requires --n-sites");
      }
    }

    if (command == "benford") {
      if (config.input.empty()) throw UsageError("benford requires an input file");
      return config;
    }

    config.chain(config.sizes.front()).validate();
    if (command == "observables" || command == "profile") {
      if (config.sizes.size() != 1) throw UsageError(command + " takes exactly one --n-sites");
      xy::check_observable(config.observable, config.chain(config.sizes.front()));
      if (command == "observables") {
        if (config.lambdas.empty() && !(config.spec.b >= config.spec.a)) {
          throw UsageError("observable grid needs a <= b");
        }
        (void)config.observable_grid();
        return config;
      }
    }
    if (command == "scaling" || command == "table1") {
      if (config.sizes.size() < 3) {
        throw UsageError("scaling needs at least 3 system sizes, got " +
                         std::to_string(config.sizes.size()));
      }
      for (const auto& s : config.sizes) {
        if (s.is_infinite()) throw UsageError("scaling needs finite system sizes");
      }
      if (!config.chain(config.sizes.front()).zero_temperature()) {
        throw UsageError("scaling runs use the ground state");
      }
    }
    if (!(config.tolerance > 0.0)) throw UsageError("tolerance must be positive");
    window::WindowSpec probe = config.spec;
    probe.n = window::kMinSamples;
    probe.validate();
    return config;
  });
}

window::Source xy_source(const xy::ObservableKind& kind, const xy::ChainParams& chain) {
  return xy::make_observable(kind, chain);
}

std::vector<CellOutcome> scan_pseudo_critical(const RunConfig& config,
                                              std::span<const CellRequest> cells,
                                              const SourceFactory& factory, std::ostream& log) {
  std::vector<CellOutcome> outcomes(cells.size());

  // Automatic sample counts are fixed once per cell, on the largest chain.
  std::vector<int> cell_samples(cells.size());
  const auto largest = *std::max_element(
      config.sizes.begin(), config.sizes.end(),
      [](const xy::SystemSize& a, const xy::SystemSize& b) { return a.sites() < b.sites(); });
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (config.samples.kind != SampleCount::Kind::automatic) {
      cell_samples[c] = samples_for(config, cells[c].depth);
      continue;
    }
    const auto source = factory(cells[c].observable, config.chain(largest));
    const auto converged = window::convergence_check(source, config.spec, cells[c].depth,
                                                     cells[c].distance, config.tolerance, 2500,
                                                     1 << 20, config.jobs);
    cell_samples[c] = converged.n;
    log << "converged " << cells[c].observable.to_string() << " k=" << cells[c].depth << ' '
        << benford::to_string(cells[c].distance) << ": n=" << converged.n << '\n';
  }

  for (const xy::SystemSize& size : config.sizes) {
    // Group cells sharing an observable and a sample count into one pass.
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> groups;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      groups[{cells[c].observable.to_string(), cell_samples[c]}].push_back(c);
    }
    for (const auto& [key, members] : groups) {
      const xy::ObservableKind kind = cells[members.front()].observable;
      window::WindowSpec spec = config.spec;
      spec.n = key.second;
      std::vector<window::ProfileRequest> requests;
      for (std::size_t c : members) requests.push_back({cells[c].depth, cells[c].distance});

      const auto source = factory(kind, config.chain(size));
      const auto profiles = window::profiles(source, spec, requests, config.jobs,
                                             kind.to_string() + " N=" + size.to_string());
      for (std::size_t i = 0; i < members.size(); ++i) {
        CellOutcome& outcome = outcomes[members[i]];
        if (outcome.error) continue;
        try {
          const auto found = scaling::pseudo_critical_from_profile(profiles[i], config.fit_window);
          outcome.points.push_back({size.sites(), found.lambda_c});
          outcome.fit_windows.push_back(found.fit.fit_window());
          outcome.fit_residuals.push_back(found.fit.residual());
        } catch (const std::exception& e) {
          outcome.error = "N=" + size.to_string() + ": " + e.what();
        }
      }
      log << "profiled " << kind.to_string() << " N=" << size.to_string() << " n=" << spec.n
          << " (" << members.size() << " cells)\n";
    }
  }
  return outcomes;
}

scaling::ScalingResult scaling_from_profiles(
    std::span<const std::pair<int, window::ViolationProfile>> profiles,
    const scaling::FitWindowPolicy& policy, scaling::Mode mode, double lambda_c) {
  std::vector<scaling::ScalingPoint> points;
  for (const auto& [sites, profile] : profiles) {
    points.push_back({sites, scaling::pseudo_critical_from_profile(profile, policy).lambda_c});
  }
  return scaling::scaling_fit(points, mode, lambda_c);
}

void cmd_observables(const RunConfig& config, std::ostream& log) {
  const std::vector<double> grid = config.observable_grid();
  const auto curve = as_usage([&] {
    return xy::observable_curve(config.observable, config.chain(config.sizes.front()), grid,
                                config.jobs);
  });
  ensure_dir(config.out_dir);
  auto out = open_output(config.out_dir / "observables.csv");
  out << "lambda,value\n" << std::setprecision(17);
  for (const auto& p : curve) out << p.lambda << ',' << p.value << '\n';
  write_sidecar(config, config.out_dir / "observables.meta");
  log << "wrote " << curve.size() << " rows to " << (config.out_dir / "observables.csv").string()
      << '\n';
}

void cmd_profile(const RunConfig& config, std::ostream& log) {
  const xy::SystemSize size = config.sizes.front();
  const auto source = xy_source(config.observable, config.chain(size));
  window::WindowSpec spec = config.spec;
  ensure_dir(config.out_dir);

  if (config.samples.kind == SampleCount::Kind::automatic) {
    const auto converged = window::convergence_check(source, spec, config.depth, config.distance,
                                                     config.tolerance, 2500, 1 << 20, config.jobs);
    spec.n = converged.n;
    auto out = open_output(config.out_dir / "convergence.txt");
    out << "n,deviation\n" << std::setprecision(17);
    for (const auto& step : converged.history) out << step.n << ',' << step.deviation << '\n';
  } else {
    spec.n = samples_for(config, config.depth);
  }

  const std::string label = config.observable.to_string() + " N=" + size.to_string() +
                            " gamma=" + format_double(config.gamma);
  const auto result =
      window::profile(source, spec, config.depth, config.distance, config.jobs, label);
  {
    auto out = open_output(config.out_dir / "profile.csv");
    window::write_profile_csv(out, result);
  }
  write_sidecar(config, config.out_dir / "profile.meta");
  if (config.emit_plot) write_plot_script(config.out_dir, "profile.csv", result);
  log << "wrote " << result.size() << " windows (n=" << spec.n << ") to "
      << (config.out_dir / "profile.csv").string() << '\n';
}

void cmd_scaling(const RunConfig& config, std::ostream& log) {
  const CellRequest cell{config.observable, config.depth, config.distance};
  const auto outcomes = scan_pseudo_critical(config, std::span(&cell, 1), xy_source, log);
  const CellOutcome& outcome = outcomes.front();
  if (outcome.error) throw NumericError(*outcome.error);

  const auto result = scaling::scaling_fit(outcome.points, config.scaling_mode, config.lambda_c);
  ensure_dir(config.out_dir);
  {
    auto out = open_output(config.out_dir / "scaling.txt");
    scaling::write_scaling_record(out, result);
  }
  {
    auto out = open_output(config.out_dir / "scaling_regression.csv");
    scaling::write_regression_csv(out, result);
  }
  {
    auto out = open_output(config.out_dir / "pseudo_critical.csv");
    out << "n_sites,lambda_c_n,fit_lo,fit_hi,fit_residual\n" << std::setprecision(17);
    for (std::size_t i = 0; i < outcome.points.size(); ++i) {
      out << outcome.points[i].sites << ',' << outcome.points[i].lambda_c << ','
          << outcome.fit_windows[i].lo << ',' << outcome.fit_windows[i].hi << ','
          << outcome.fit_residuals[i] << '\n';
    }
  }
  write_sidecar(config, config.out_dir / "scaling.meta");
  log << "q = " << format_double(result.q) << " (" << scaling::to_string(result.mode)
      << ", lambda_c = " << format_double(result.lambda_c) << ")\n";
}

void cmd_table1(const RunConfig& config, std::ostream& log) {
  using benford::Distance;
  struct Column {
    std::string name;
    xy::ObservableKind observable;
    Distance distance;
  };
  const std::vector<Column> columns = {
      {"md_mz", xy::ObservableKind::mz(), Distance::md},
      {"sd_mz", xy::ObservableKind::mz(), Distance::sd},
      {"bd_mz", xy::ObservableKind::mz(), Distance::bd},
      {"md_txx", xy::ObservableKind::txx(), Distance::md},
  };
  std::vector<CellRequest> cells;
  for (int k = 1; k <= benford::kMaxDepth; ++k) {
    for (const Column& col : columns) cells.push_back({col.observable, k, col.distance});
  }

  const auto outcomes = scan_pseudo_critical(config, cells, xy_source, log);

  std::vector<std::optional<scaling::ScalingResult>> fits(cells.size());
  std::vector<std::string> failures;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::string cell_name = columns[c % columns.size()].name + " k=" +
                                  std::to_string(cells[c].depth);
    if (outcomes[c].error) {
      failures.push_back(cell_name + ": " + *outcomes[c].error);
      continue;
    }
    try {
      fits[c] = scaling::scaling_fit(outcomes[c].points, config.scaling_mode, config.lambda_c);
    } catch (const std::exception& e) {
      failures.push_back(cell_name + ": " + e.what());
    }
  }

  ensure_dir(config.out_dir);
  {
    auto out = open_output(config.out_dir / "table1.csv");
    out << "k";
    for (const Column& col : columns) out << ",q_" << col.name;
    for (const Column& col : columns) out << ",residual_" << col.name;
    out << '\n' << std::setprecision(17);
    for (int k = 1; k <= benford::kMaxDepth; ++k) {
      out << k;
      const std::size_t row = static_cast<std::size_t>(k - 1) * columns.size();
      for (std::size_t j = 0; j < columns.size(); ++j) {
        out << ',';
        if (fits[row + j]) out << fits[row + j]->q; else out << "NA";
      }
      for (std::size_t j = 0; j < columns.size(); ++j) {
        out << ',';
        if (fits[row + j]) out << fits[row + j]->residual; else out << "NA";
      }
      out << '\n';
    }
  }
  {
    auto out = open_output(config.out_dir / "table1_points.csv");
    out << "cell,k,n_sites,lambda_c_n\n" << std::setprecision(17);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (const auto& p : outcomes[c].points) {
        out << columns[c % columns.size()].name << ',' << cells[c].depth << ',' << p.sites << ','
            << p.lambda_c << '\n';
      }
    }
  }
  write_sidecar(config, config.out_dir / "table1.meta");
  for (const auto& f : failures) log << "missing cell " << f << '\n';
  log << "table1: " << (cells.size() - failures.size()) << " of " << cells.size()
      << " cells fitted\n";
}

void cmd_benford(const RunConfig& config, std::ostream& out) {
  std::ifstream in(config.input);
  if (!in) throw IoError("cannot read '" + config.input + "'");

  std::vector<double> data;
  std::string line;
  int line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r,");
    const std::string token = line.substr(first, last - first + 1);
    double value = 0.0;
    std::size_t used = 0;
    bool ok = true;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok || used != token.size() || !std::isfinite(value)) {
      const bool header = !seen_content && !ok &&
                          std::any_of(token.begin(), token.end(),
                                      [](unsigned char ch) { return std::isalpha(ch); });
      seen_content = true;
      if (header) continue;
      throw IoError(config.input + ":" + std::to_string(line_no) + ": malformed number '" +
                    token + "'");
    }
    seen_content = true;
    data.push_back(value);
  }
  if (data.empty()) throw IoError("no numeric rows in '" + config.input + "'");

  const auto zeros = std::count(data.begin(), data.end(), 0.0);
  const auto observed = benford::observed_table(data, config.depth);
  const auto expected = benford::expected_table(observed.total(), config.depth);

  out << std::setprecision(17);
  out << "file = " << config.input << '\n'
      << "k = " << config.depth << '\n'
      << "rows = " << data.size() << '\n'
      << "zeros_skipped = " << zeros << '\n'
      << "delta_md = " << benford::delta_md(observed, expected) << '\n'
      << "delta_sd = " << benford::delta_sd(observed, expected) << '\n'
      << "delta_bd = " << benford::delta_bd(observed, expected) << '\n'
      << "distance = " << benford::to_string(config.distance) << '\n'
      << "violation = " << benford::distance(config.distance, observed, expected) << '\n'
      << "digits,observed,expected\n";
  const int first_key = benford::first_key(config.depth);
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    out << first_key + i << ',' << observed.counts()[i] << ',' << expected.counts()[i] << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benford analysis of the transverse XY chain", "bqpt"};
  app.require_subcommand(1);

  struct Flags {
    std::map<std::string, std::string> scalars;
    std::vector<std::string> sizes;
    std::vector<std::string> lambdas;
    std::string config_file;
    bool coarse = false;
    bool full = false;
    bool emit_plot = false;
  };
  std::map<std::string, Flags> flags;

  auto add_scalar = [](CLI::App* sub, Flags& f, const std::string& flag, const std::string& key,
                       const std::string& help) {
    sub->add_option(flag, f.scalars[key], help);
  };

  auto make = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    Flags& f = flags[name];
    sub->add_option("--config", f.config_file, "key = value config file (flags override)");
    sub->add_option("--out", f.scalars["out"], "output directory");
    sub->add_option("--jobs", f.scalars["jobs"], "worker threads (0 = all cores)");
    add_scalar(sub, f, "--k", "k", "number of leading digits (1-4)");
    add_scalar(sub, f, "--distance", "distance", "md | sd | bd");
    if (name == "benford") {
      sub->add_option("file", f.scalars["input"], "one number per line")->required();
      return;
    }
    add_scalar(sub, f, "--observable", "observable", "mz | txx | tyy | tzz | g:<R>");
    add_scalar(sub, f, "--gamma", "gamma", "anisotropy (nonzero)");
    add_scalar(sub, f, "--beta", "beta", "inverse temperature beta*J (inf = ground state)");
    sub->add_option("--n-sites", f.sizes, "chain length(s), even >= 4 or inf")->delimiter(',');
    add_scalar(sub, f, "--a", "a", "lower end of the field range");
    add_scalar(sub, f, "--b", "b", "upper end of the field range");
    add_scalar(sub, f, "--w", "w", "window width");
    add_scalar(sub, f, "--epsilon", "epsilon", "window shift");
    add_scalar(sub, f, "--n", "n", "samples per window, 'auto' or 'per-depth'");
    add_scalar(sub, f, "--tolerance", "tolerance", "relative tolerance for --n auto");
    add_scalar(sub, f, "--fit-window", "fit_window", "'auto' or LO,HI");
    add_scalar(sub, f, "--scaling-mode", "scaling_mode", "fixed | free");
    add_scalar(sub, f, "--lambda-c", "lambda_c", "critical field for fixed mode");
    add_scalar(sub, f, "--points", "points", "observables: grid size over [a, b]");
    sub->add_option("--lambda", f.lambdas, "observables: explicit grid value(s)")->delimiter(',');
    auto* coarse = sub->add_flag("--coarse", f.coarse, "epsilon = 1e-3, n = 1e4");
    sub->add_flag("--full", f.full, "epsilon = 5e-5, per-depth n")->excludes(coarse);
    sub->add_flag("--emit-plot", f.emit_plot, "profile: also write a plotting script");
  };
  make("observables", "observable curve over a field grid");
  make("profile", "Benford violation profile over shifting field windows");
  make("scaling", "finite-size scaling exponent of the pseudo-critical point");
  make("table1", "exponents for k = 1..4 and md/sd/bd on Mz, md on Txx");
  make("benford", "Benford conformance report for a data file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    std::string what = e.what();
    std::replace(what.begin(), what.end(), '\n', ' ');
    err << "error:usage: " << what << '\n';
    return kUsage;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    CLI::App* sub = app.get_subcommand(command);
    Flags& f = flags[command];
    auto given = [sub](const std::string& name) {
      const CLI::Option* opt = sub->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };

    KeyValues values;
    if (!f.config_file.empty()) values = read_key_values_file(f.config_file);
    for (const auto& [key, value] : f.scalars) {
      const std::string flag = key == "input" ? "file" : "--" + [&] {
        std::string s = key;
        std::replace(s.begin(), s.end(), '_', '-');
        return s;
      }();
      if (given(flag)) values[key] = value;
    }
    if (given("--n-sites")) values["n_sites"] = join(f.sizes);
    if (given("--lambda")) values["lambda"] = join(f.lambdas);
    if (f.coarse) values["preset"] = "coarse";
    if (f.full) values["preset"] = "full";
    if (f.emit_plot) values["emit_plot"] = "true";

    const RunConfig config = resolve_config(command, values);
    if (command == "observables") cmd_observables(config, err);
    else if (command == "profile") cmd_profile(config, err);
    else if (command == "scaling") cmd_scaling(config, err);
    else if (command == "table1") cmd_table1(config, err);
    else cmd_benford(config, out);
    return kOk;
  } catch (const DomainError& e) {
    err << "error:usage: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "error:numeric: " << e.what() << '\n';
    return kNumeric;
  } catch (const IoError& e) {
    err << "error:io: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error:numeric: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace bqpt::cli
