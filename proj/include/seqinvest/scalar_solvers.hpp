#pragma once

// Bracketing scalar solvers. Every root and maximizer in the library goes
// through these: the objectives are monotone or single-peaked but steep near
// zero, so derivative-based methods are avoided.

#include <cmath>
#include <cstddef>
#include <string>

#include "seqinvest/errors.hpp"

namespace seqinvest {

struct ScalarSolve {
  double argument = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
  int iterations = 0;
};

/// Bisection for a sign change of `f` on [lo, hi]. Stops when the bracket
/// is narrower than `x_tol` or after `max_iter` halvings.
/// Throws BracketError when f(lo) and f(hi) have the same strict sign.
template <class F>
ScalarSolve bisect(F&& f, double lo, double hi, double x_tol = 1e-12,
                   int max_iter = 200) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, lo, lo, 0};
  if (f_hi == 0.0) return {hi, hi, hi, 0};
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw BracketError("bisect: no sign change on [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]");
  }
  int it = 0;
  while (hi - lo > x_tol && it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    const double f_mid = f(mid);
    ++it;
    if (f_mid == 0.0) return {mid, mid, mid, it};
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), lo, hi, it};
}

/// Doubles `hi` until `f(hi)` has the opposite sign of `f(lo)`.
/// Returns the expanded upper end; throws BracketError past `limit`.
template <class F>
double expand_upper(F&& f, double lo, double hi, double limit) {
  const bool neg_lo = std::signbit(f(lo));
  while (std::signbit(f(hi)) == neg_lo && f(hi) != 0.0) {
    if (hi >= limit) {
      throw BracketError("expand_upper: no sign change below " +
                         std::to_string(limit));
    }
    hi = std::fmin(2.0 * hi, limit);
  }
  return hi;
}

/// Golden-section search for the maximizer of a single-peaked `f` on
/// [lo, hi].
template <class F>
ScalarSolve golden_section_max(F&& f, double lo, double hi,
                               double x_tol = 1e-10, int max_iter = 500) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  while (b - a > x_tol && it < max_iter) {
    ++it;
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return {0.5 * (a + b), a, b, it};
}

}  // namespace seqinvest
