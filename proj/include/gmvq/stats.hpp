#pragma once

#include <vector>

namespace gmvq {

double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson on average ranks (ties share the mean rank).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Regularized incomplete beta function I_x(a, b), via the standard
/// continued-fraction expansion (modified Lentz).
double reg_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct Correlation {
  double rho = 0;
  double p_value = 1;
  long n = 0;
};

/// Pearson rho with its two-sided p-value from the t distribution with
/// n - 2 degrees of freedom.
Correlation pearson_with_p(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gmvq
