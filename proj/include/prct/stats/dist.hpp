#pragma once

namespace prct::stats {

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
// Series expansion for x < a+1, continued fraction otherwise; precision
// target 1e-10 relative.
double reg_inc_gamma_p(double a, double x);
double reg_inc_gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b) via Lentz continued fraction.
double reg_inc_beta(double a, double b, double x);

double normal_cdf(double z);

double student_t_cdf(double t, double df);
double chi2_cdf(double x, double df);
double f_cdf(double f, double df1, double df2);

// Tail helpers used by the tests in stats_kit.
double t_two_sided_p(double t, double df);
double chi2_upper_p(double x, double df);
double f_upper_p(double f, double df1, double df2);

} // namespace prct::stats
