#pragma once

namespace catmix {

/// Digamma function for x > 0.
double digamma(double x);

/// log Gamma(x) for x > 0. Reentrant, unlike std::lgamma on glibc.
double log_gamma(double x);

/// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).
double log_beta(double a, double b);

}  // namespace catmix
