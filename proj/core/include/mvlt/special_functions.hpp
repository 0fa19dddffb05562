#pragma once

namespace mvlt {

// psi(x) for x > 0. Absolute error <= 1e-10 on [1e-3, 1e6].
double digamma(double x);

// psi'(x) for x > 0.
double trigamma(double x);

// ln Gamma(x) for x > 0.
double log_gamma(double x);

}  // namespace mvlt
