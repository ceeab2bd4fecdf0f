#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <sstream>
#include <vector>

#include "bqpt/errors.hpp"

namespace bqpt {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
};

struct PanelByError {
  bool operator()(const Panel& lhs, const Panel& rhs) const {
    if (lhs.error != rhs.error) return lhs.error < rhs.error;
    return lhs.lo > rhs.lo;
  }
};

// 7-point Gauss / 15-point Kronrod pair on [lo, hi]. Only interior nodes are
// evaluated, so integrands with removable 0/0 at the endpoints are safe.
template <typename F>
Panel gauss_kronrod_15(const F& f, double lo, double hi) {
  static constexpr std::array<double, 8> kNodes = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> kKronrod = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for nodes 1, 3, 5 and the centre.
  static constexpr std::array<double, 4> kGauss = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  const double fc = f(centre);
  double kronrod = kKronrod[7] * fc;
  double gauss = kGauss[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrod[j] * pair;
    if (j % 2 == 1) gauss += kGauss[j / 2] * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration: the panel with the largest
// error estimate is bisected until the summed estimate meets the tolerance.
// Panel order is fully determined by the integrand, so results are
// reproducible bit for bit.
template <typename F>
QuadratureResult integrate(const F& f, double lo, double hi,
                           const QuadratureOptions& options = {}) {
  using detail::Panel;
  std::priority_queue<Panel, std::vector<Panel>, detail::PanelByError> heap;
  Panel first = detail::gauss_kronrod_15(f, lo, hi);
  double total = first.value;
  double error = first.error;
  heap.push(first);

  auto converged = [&] {
    return error <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
  };

  while (!converged()) {
    if (heap.size() >= options.max_intervals) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << lo << ", " << hi << "] within "
          << options.max_intervals << " panels (error estimate " << error << ")";
      throw NumericError(msg.str());
    }
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left = detail::gauss_kronrod_15(f, worst.lo, mid);
    const Panel right = detail::gauss_kronrod_15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from scratch in position order to shed the drift of the running
  // updates above.
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& a, const Panel& b) { return a.lo < b.lo; });
  QuadratureResult result;
  for (const Panel& p : panels) {
    result.value += p.value;
    result.abs_error += p.error;
  }
  result.intervals = panels.size();
  if (!std::isfinite(result.value)) {
    throw NumericError("quadrature produced a non-finite value");
  }
  return result;
}

}  // namespace bqpt
