#include "funcineq/numerics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace funcineq {

std::vector<double> log_space(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw std::invalid_argument("log_space: bad range");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int k = 0; k < n; ++k) out[k] = std::exp(a + (b - a) * k / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_space(double lo, double hi, int n) {
  if (!(hi >= lo) || n < 1) throw std::invalid_argument("lin_space: bad range");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = lo + (hi - lo) * k / (n - 1);
  out.back() = hi;
  return out;
}

ScalarMinimum golden_section_minimize(const std::function<double(double)>& fn, double lo,
                                      double hi, double x_tol, int max_iter) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  ScalarMinimum best{c, fc};
  auto consider = [&](double x, double v) {
    if (v < best.value) best = {x, v};
  };
  consider(d, fd);
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    // Ties (including inf == inf) shrink towards the finite side when one is known.
    const bool keep_left = fc < fd || (fc == fd && best.x <= c);
    if (keep_left) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
      consider(d, fd);
    }
  }
  const double fa = fn(lo), fb = fn(hi);
  consider(lo, fa);
  consider(hi, fb);
  return best;
}

ScalarMinimum grid_then_golden(const std::function<double(double)>& fn,
                               const std::vector<double>& grid, double rel_x_tol) {
  if (grid.empty()) throw std::invalid_argument("grid_then_golden: empty grid");
  std::size_t arg = 0;
  double best = fn(grid[0]);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double v = fn(grid[k]);
    if (v < best) {
      best = v;
      arg = k;
    }
  }
  ScalarMinimum result{grid[arg], best};
  if (grid.size() < 2 || !std::isfinite(best)) return result;
  const double lo = grid[arg == 0 ? 0 : arg - 1];
  const double hi = grid[std::min(arg + 1, grid.size() - 1)];
  const double tol = rel_x_tol * std::max({std::abs(lo), std::abs(hi), 1e-300});
  const ScalarMinimum refined = golden_section_minimize(fn, lo, hi, tol);
  if (refined.value < result.value) result = refined;
  return result;
}

namespace {

struct SimpsonState {
  const std::function<double(double)>& fn;
  int evaluations = 0;
  double eval(double x) {
    ++evaluations;
    return fn(x);
  }
};

double simpson_recurse(SimpsonState& s, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth, double& err) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = s.eval(lm), frm = s.eval(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, roundoff)) {
    err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(s, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err) +
         simpson_recurse(s, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                                  double abs_tol, int max_depth) {
  if (a == b) return {0.0, 0.0, 0};
  const double sign = b > a ? 1.0 : -1.0;
  if (b < a) std::swap(a, b);
  SimpsonState s{fn};
  const double fa = s.eval(a), fb = s.eval(b), fm = s.eval(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double err = 0.0;
  const double v = simpson_recurse(s, a, b, fa, fm, fb, whole, abs_tol, max_depth, err);
  return {sign * v, err, s.evaluations};
}

}  // namespace funcineq
