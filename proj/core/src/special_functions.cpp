#include "mvlt/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace mvlt {

// Upward recurrence into the asymptotic regime, then the Stirling-type
// expansion. Truncation error at x >= 10 is below 1e-15.
double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("digamma requires x > 0");
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double z = inv * inv;
  const double series =
      z * (1.0 / 12.0 -
           z * (1.0 / 120.0 -
                z * (1.0 / 252.0 -
                     z * (1.0 / 240.0 - z * (1.0 / 132.0 - z * (691.0 / 32760.0))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("trigamma requires x > 0");
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double z = inv * inv;
  const double series =
      inv + 0.5 * z +
      inv * z * (1.0 / 6.0 -
                 z * (1.0 / 30.0 -
                      z * (1.0 / 42.0 - z * (1.0 / 30.0 - z * (5.0 / 66.0)))));
  return acc + series;
}

// Lanczos approximation (g = 7, 9 terms), reflection below 0.5.
double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("log_gamma requires x > 0");
  }
  static const double kCoef[9] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double kHalfLogTwoPi = 0.91893853320467274178;
  if (x < 0.5) {
    // ln Gamma(x) = ln(pi / sin(pi x)) - ln Gamma(1 - x)
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double sum = kCoef[0];
  for (int i = 1; i < 9; ++i) sum += kCoef[i] / (z + i);
  const double t = z + 7.5;
  return kHalfLogTwoPi + (z + 0.5) * std::log(t) - t + std::log(sum);
}

}  // namespace mvlt
