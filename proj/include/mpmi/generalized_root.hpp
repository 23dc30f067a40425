#pragma once

#include <cmath>
#include <span>

namespace mpmi {

/// Which one-sided value to take at a breakpoint.
enum class Side { left, right };

struct GeneralizedRoot {
  double value = 0.0;
  bool jump = false;  // the target was jumped over at a breakpoint
};

namespace detail {

/// Generalized root of f(p) = target for f nondecreasing on p >= 0,
/// left-continuous, continuous and increasing between the sorted positive
/// `breakpoints`, constant past the last one.
///
/// `eval(p, Side::left)` must return f(p) (= f(p - 0)), and
/// `eval(p, Side::right)` must return f(p + 0).
///
/// Returns p* with f(p* - 0) <= target <= f(p* + 0). The caller must have
/// checked f(0) < target < f(+inf); if that fails the largest breakpoint is
/// returned.
template <typename Eval>
GeneralizedRoot generalized_root(std::span<const double> breakpoints, const Eval& eval,
                                 double target) {
  double prev = 0.0;
  if (target <= eval(0.0, Side::right)) return {0.0, target > eval(0.0, Side::left)};

  for (const double b : breakpoints) {
    if (b <= prev) continue;
    const double at_b = eval(b, Side::left);
    if (target == at_b) return {b, false};
    if (target < at_b) {
      // f(prev + 0) < target < f(b); f is continuous on (prev, b].
      double lo = prev;
      double hi = b;
      double f_lo = eval(prev, Side::right);
      double f_hi = at_b;
      for (;;) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        const double f_mid = eval(mid, Side::left);
        if (f_mid < target) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
          f_hi = f_mid;
          if (f_mid == target) break;
        }
      }
      if (lo > prev && std::abs(f_lo - target) < std::abs(f_hi - target)) return {lo, false};
      return {hi, false};
    }
    if (target <= eval(b, Side::right)) return {b, true};
    prev = b;
  }
  return {prev, true};
}

}  // namespace detail
}  // namespace mpmi
