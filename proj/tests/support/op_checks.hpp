#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gmvq/autodiff.hpp"
#include "gmvq/rng.hpp"

namespace gmvq::testing {

// One gradient-check fixture per diffcore op: draws a fresh random point
// and a fixed random linear functional over the op output (so asymmetric
// pullback bugs cannot hide behind a symmetric reduction), then compares
// the analytic gradient against central differences.

struct OpCheck {
  std::string name;
  std::function<GradCheckResult(Rng&)> run;
};

inline Mat away_from(Mat m, double margin, Rng& rng) {
  // Resamples entries that sit within `margin` of zero (relu/clamp kinks).
  std::uniform_real_distribution<double> u(margin, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (Index i = 0; i < m.size(); ++i)
    if (std::abs(m.data()[i]) < margin) m.data()[i] = (sign(rng) ? 1 : -1) * u(rng);
  return m;
}

inline std::vector<OpCheck> diffcore_op_checks() {
  using gmvq::Var;
  std::vector<OpCheck> checks;

  // Builds a check from a point generator, the op under test, and the op's
  // output shape (for the fixed projection weights).
  auto add_check = [&checks](std::string name, Index out_r, Index out_c,
                             std::function<std::vector<Mat>(Rng&)> make_point,
                             std::function<Var(const std::vector<Var>&)> op) {
    checks.push_back({std::move(name), [=](Rng& rng) {
                        std::vector<Mat> pt = make_point(rng);
                        const Mat W = draw_uniform(out_r, out_c, -1, 1, rng);
                        auto f = [&op, &W](const std::vector<Var>& l) {
                          return sum(mul(op(l), Var::constant(W)));
                        };
                        return grad_check(f, pt);
                      }});
  };

  add_check(
      "matmul", 3, 2,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(4, 2, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return matmul(l[0], l[1]); });
  add_check(
      "add", 3, 4,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(3, 4, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return add(l[0], l[1]); });
  add_check(
      "add_broadcast_row", 3, 4,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(1, 4, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return add(l[0], l[1]); });
  add_check(
      "add_broadcast_col", 3, 4,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(3, 1, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return add(l[0], l[1]); });
  add_check(
      "sub", 3, 4,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(1, 4, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return sub(l[0], l[1]); });
  add_check(
      "mul", 3, 4,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(3, 4, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return mul(l[0], l[1]); });
  add_check(
      "mul_broadcast_col", 3, 4,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 1, -1, 1, rng), draw_uniform(3, 4, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return mul(l[0], l[1]); });
  add_check(
      "square", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 3, -2, 2, rng)}; },
      [](const std::vector<Var>& l) { return square(l[0]); });
  add_check(
      "sqrt", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 3, 0.5, 2.5, rng)}; },
      [](const std::vector<Var>& l) { return sqrt(l[0]); });
  add_check(
      "exp", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 3, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return exp(l[0]); });
  add_check(
      "log", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 3, 0.5, 3.0, rng)}; },
      [](const std::vector<Var>& l) { return log(l[0]); });
  add_check(
      "softplus", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 3, -2, 2, rng)}; },
      [](const std::vector<Var>& l) { return softplus(l[0]); });
  add_check(
      "relu", 3, 3,
      [](Rng& rng) { return std::vector<Mat>{away_from(draw_uniform(3, 3, -1, 1, rng), 0.05, rng)}; },
      [](const std::vector<Var>& l) { return relu(l[0]); });
  add_check(
      "scale", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 3, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return scale(l[0], 1.7); });
  add_check(
      "add_const", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 3, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return add_const(l[0], 0.37); });
  add_check(
      "clamp_min", 3, 3,
      [](Rng& rng) { return std::vector<Mat>{away_from(draw_uniform(3, 3, -1, 1, rng), 0.05, rng)}; },
      [](const std::vector<Var>& l) { return clamp_min(l[0], 0.0); });
  add_check(
      "sum", 1, 1, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return sum(l[0]); });
  add_check(
      "mean", 1, 1, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return mean(l[0]); });
  add_check(
      "rowwise_sum", 3, 1, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return rowwise_sum(l[0]); });
  add_check(
      "colwise_sum", 1, 4, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return colwise_sum(l[0]); });
  add_check(
      "softmax_lastdim", 2, 5, [](Rng& rng) { return std::vector<Mat>{draw_uniform(2, 5, -2, 2, rng)}; },
      [](const std::vector<Var>& l) { return softmax_lastdim(l[0]); });
  add_check(
      "log_softmax_lastdim", 2, 5,
      [](Rng& rng) { return std::vector<Mat>{draw_uniform(2, 5, -2, 2, rng)}; },
      [](const std::vector<Var>& l) { return log_softmax_lastdim(l[0]); });
  add_check(
      "slice_cols", 3, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(3, 6, -1, 1, rng)}; },
      [](const std::vector<Var>& l) { return slice_cols(l[0], 1, 3); });
  add_check(
      "select_rows", 4, 3, [](Rng& rng) { return std::vector<Mat>{draw_uniform(4, 3, -1, 1, rng)}; },
      [](const std::vector<Var>& l) {
        return select_rows(l[0], {2, 0, 2, 3});  // repeats exercise the scatter-add
      });
  add_check(
      "pairwise_sqdist", 3, 5,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(5, 4, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return pairwise_sqdist(l[0], l[1]); });
  add_check(
      "pairwise_weighted_sqdist", 3, 5,
      [](Rng& rng) {
        return std::vector<Mat>{draw_uniform(3, 4, -1, 1, rng), draw_uniform(3, 4, 0.1, 2.0, rng),
                                draw_uniform(5, 4, -1, 1, rng)};
      },
      [](const std::vector<Var>& l) { return pairwise_weighted_sqdist(l[0], l[1], l[2]); });
  return checks;
}

}  // namespace gmvq::testing
