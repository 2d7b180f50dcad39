#pragma once

namespace onebit {

// Standard normal CDF via erfc; absolute error below 1e-15 for |x| <= 8.
double std_normal_cdf(double x);

// Inverse standard normal CDF on the open interval (0,1).
// Throws std::domain_error at or outside the endpoints; callers that may
// produce exact 0/1 probabilities must clamp first.
double std_normal_quantile(double p);

// log(Phi(x)), finite for every finite x. Uses erfc directly for x >= -8
// and an asymptotic tail expansion below that, where Phi itself underflows.
double log_std_normal_cdf(double x);

// Standard normal density.
double std_normal_pdf(double x);

}  // namespace onebit
