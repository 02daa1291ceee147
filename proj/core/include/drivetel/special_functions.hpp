#ifndef DRIVETEL_SPECIAL_FUNCTIONS_HPP
#define DRIVETEL_SPECIAL_FUNCTIONS_HPP

namespace drivetel::stats {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (modified Lentz). Accurate to ~1e-13 over the parameter ranges
// the t distribution needs.
double incomplete_beta(double a, double b, double x);

// Student-t CDF with real (non-integer) degrees of freedom.
double student_t_cdf(double t, double df);

// Inverse of student_t_cdf in t for fixed df (bisection on the monotone CDF).
double student_t_quantile(double p, double df);

}  // namespace drivetel::stats

#endif
