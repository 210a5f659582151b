#include "gmvq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gmvq {

namespace {

void require_paired(const std::vector<double>& x, const std::vector<double>& y, size_t min_n) {
  if (x.size() != y.size()) throw std::invalid_argument("gmvq: correlation inputs differ in length");
  if (x.size() < min_n)
    throw std::invalid_argument("gmvq: correlation needs at least " + std::to_string(min_n) + " points");
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t(0));
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based mean rank of the tie group
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("gmvq: incomplete beta continued fraction did not converge");
}

}  // namespace

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw std::invalid_argument("gmvq: reg_incomplete_beta needs a, b > 0");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1) / (a + b + 2)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0)) throw std::invalid_argument("gmvq: student_t_two_sided_p needs dof > 0");
  if (!std::isfinite(t)) return 0;
  return reg_incomplete_beta(dof / 2, 0.5, dof / (dof + t * t));
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  require_paired(x, y, 2);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0)
    throw std::invalid_argument("gmvq: correlation undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require_paired(x, y, 2);
  return pearson(average_ranks(x), average_ranks(y));
}

Correlation pearson_with_p(const std::vector<double>& x, const std::vector<double>& y) {
  require_paired(x, y, 3);
  Correlation c;
  c.n = static_cast<long>(x.size());
  c.rho = pearson(x, y);
  const double dof = static_cast<double>(c.n - 2);
  const double r2 = std::min(c.rho * c.rho, 1.0 - 1e-15);
  const double t = c.rho * std::sqrt(dof / (1.0 - r2));
  c.p_value = student_t_two_sided_p(t, dof);
  return c;
}

}  // namespace gmvq
