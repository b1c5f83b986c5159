// Copyright 2026 The lambdarc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace lambdarc {

/// Bisection on a monotone non-increasing f over [lo, hi]: returns x with
/// f(x) close to target. Assumes f(lo) >= target >= f(hi); callers handle
/// the bracket-exhausted cases themselves.
inline double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi,
                                double target, int max_iter = 100) {
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit linear_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_regression: need two equally sized series");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("linear_regression: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

/// Solves the square system a*x = b in place by Gaussian elimination with
/// partial pivoting. a is row-major n x n.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (a[pivot * n + col] == 0.0) throw std::runtime_error("solve_linear: singular system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * x[c];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

/// Least-squares polynomial fit, coefficients in ascending power order.
inline std::vector<double> polyfit(std::span<const double> x, std::span<const double> y,
                                   int degree) {
  if (x.size() != y.size() || x.size() < static_cast<std::size_t>(degree + 1)) {
    throw std::invalid_argument("polyfit: not enough points for requested degree");
  }
  const std::size_t m = static_cast<std::size_t>(degree) + 1;
  std::vector<double> ata(m * m, 0.0), atb(m, 0.0);
  std::vector<double> powers(m);
  for (std::size_t i = 0; i < x.size(); ++i) {
    powers[0] = 1.0;
    for (std::size_t p = 1; p < m; ++p) powers[p] = powers[p - 1] * x[i];
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) ata[r * m + c] += powers[r] * powers[c];
      atb[r] += powers[r] * y[i];
    }
  }
  return solve_linear(std::move(ata), std::move(atb));
}

inline double polyval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

/// Definite integral of a polynomial given in ascending power order.
inline double polyint(std::span<const double> coeffs, double a, double b) {
  double fa = 0.0, fb = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) {
    fa = fa * a + coeffs[i] / static_cast<double>(i + 1);
    fb = fb * b + coeffs[i] / static_cast<double>(i + 1);
  }
  return fb * b - fa * a;
}

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Nelder-Mead downhill simplex. Deterministic: no random restarts inside.
inline SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> x0, double step, double rel_tol,
                                 int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  SimplexResult res;
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), cand(n);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <=
        rel_tol * (std::abs(vals[best]) + std::abs(vals[worst]) + 1e-300)) {
      res.converged = true;
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (std::size_t d = 0; d < n; ++d) centroid[d] /= static_cast<double>(n);

    auto blend = [&](double coef) {
      for (std::size_t d = 0; d < n; ++d) {
        cand[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
      }
    };

    blend(-1.0);  // reflect
    const double fr = f(cand);
    if (fr < vals[order[0]]) {
      std::vector<double> refl = cand;
      blend(-2.0);  // expand
      const double fe = f(cand);
      if (fe < fr) {
        pts[worst] = cand;
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(refl);
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = cand;
      vals[worst] = fr;
    } else {
      blend(fr < vals[worst] ? -0.5 : 0.5);  // contract
      const double fc = f(cand);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = cand;
        vals[worst] = fc;
      } else {  // shrink toward the best point
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d) {
            pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
          }
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (vals[i] < vals[best]) best = i;
  }
  res.x = pts[best];
  res.value = vals[best];
  res.iterations = iter;
  return res;
}

}  // namespace lambdarc
