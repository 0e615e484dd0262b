#pragma once

#include <cstdint>

namespace moodisp::stats {

/// Regularized incomplete beta I_x(a, b), by Lentz's continued fraction with
/// the symmetry I_x(a, b) = 1 - I_{1-x}(b, a) for fast convergence.
double incomplete_beta(double a, double b, double x);

/// P(F > f) for an F(d1, d2) variable.
double f_survival(double f, double d1, double d2);

/// P(X <= k) for X ~ Binomial(n, p).
double binomial_cdf(std::int64_t k, std::int64_t n, double p);

/// Two-sided exact binomial test p-value of k successes in n trials against
/// p = 0.5, i.e. min(1, 2 P(X <= min(k, n - k))).
double binomial_two_sided_p(std::int64_t k, std::int64_t n);

}  // namespace moodisp::stats
