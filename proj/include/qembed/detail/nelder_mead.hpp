// Derivative-free simplex minimization for the small (3-parameter)
// compilation problems.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace qembed::detail {

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x{};
  double value = 0.0;
  int evaluations = 0;
};

struct SimplexOptions {
  double initial_step = 1.0;
  double xtol = 1e-12;  // simplex diameter (max-norm) at which to stop
  double ftol = 0.0;    // absolute spread of vertex values at which to stop
  int max_evaluations = 4000;
  int restarts = 3;     // fresh simplices around the incumbent
};

/// Nelder-Mead with the standard coefficients (1, 2, 1/2, 1/2).
template <std::size_t N, class F>
SimplexResult<N> nelder_mead_once(F&& f, const std::array<double, N>& start, double step,
                                  const SimplexOptions& opt) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> pts;
  std::array<double, N + 1> val;
  int evals = 0;
  auto eval = [&](const Point& p) {
    ++evals;
    return f(p);
  };

  pts[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += step;
  }
  for (std::size_t i = 0; i <= N; ++i) val[i] = eval(pts[i]);

  std::array<std::size_t, N + 1> order;
  while (evals < opt.max_evaluations) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order[0], worst = order[N], second = order[N - 1];

    double diam = 0.0;
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t k = 0; k < N; ++k) diam = std::max(diam, std::abs(pts[order[i]][k] - pts[best][k]));
    if (diam <= opt.xtol || val[worst] - val[best] <= opt.ftol) break;

    Point centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) centroid[k] += pts[order[i]][k] / static_cast<double>(N);

    auto along = [&](double t) {
      Point p;
      for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return p;
    };

    const Point xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const Point xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Point xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    // shrink towards the best vertex
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < N; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
      val[i] = eval(pts[i]);
    }
  }

  std::size_t b = 0;
  for (std::size_t i = 1; i <= N; ++i)
    if (val[i] < val[b]) b = i;
  return {pts[b], val[b], evals};
}

/// Runs nelder_mead_once, then restarts with a smaller simplex around the
/// incumbent; restarting recovers from the premature collapse plain
/// Nelder-Mead is prone to.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start, const SimplexOptions& opt = {}) {
  SimplexResult<N> best = nelder_mead_once<N>(f, start, opt.initial_step, opt);
  double step = opt.initial_step;
  for (int r = 0; r < opt.restarts; ++r) {
    step *= 0.1;
    const SimplexResult<N> next = nelder_mead_once<N>(f, best.x, step, opt);
    const int evals = best.evaluations + next.evaluations;
    if (next.value < best.value) best = next;
    best.evaluations = evals;
  }
  return best;
}

}  // namespace qembed::detail
