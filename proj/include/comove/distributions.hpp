#pragma once

namespace comove::dist {

// Two-sided p-value of a Student t statistic.
double student_t_two_sided(double t, double dof);
// Upper tail P(F > f) for F(d1, d2).
double f_upper(double f, double d1, double d2);
// Upper tail P(X > x) for chi-square(dof).
double chi_square_upper(double x, double dof);
double normal_cdf(double x);

}  // namespace comove::dist
