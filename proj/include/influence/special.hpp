#pragma once

namespace influence {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x),
// series expansion below a + 1 and a Lentz continued fraction above.
// Absolute error is below 1e-12 over the ranges used here.
double lower_reg_gamma(double a, double x);
double upper_reg_gamma(double a, double x);

// Regularized incomplete beta function I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// Upper tail probabilities for the chi-square and F distributions.
double chi2_sf(double x, double dof);
double f_sf(double x, double dof1, double dof2);

// Standard normal CDF.
double normal_cdf(double x);

// CDF of Gamma(shape, rate) at x.
double gamma_cdf(double x, double shape, double rate);

}  // namespace influence
