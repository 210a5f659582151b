#include <doctest.h>

#include <cmath>

#include "gmvq/posterior.hpp"
#include "gmvq/rng.hpp"

using namespace gmvq;

TEST_SUITE("posterior") {

TEST_CASE("encoder_heads: softplus activation of the weight half") {
  SUBCASE("raw weights all zero give ln 2") {
    auto [zhat, what] = encoder_heads(Var::constant(rowvec({0.5, -0.5, 0, 0})));
    CHECK(zhat.value() == Mat(rowvec({0.5, -0.5})));
    CHECK(what.value()(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(what.value()(0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("large raw weights approach identity") {
    auto [zhat, what] = encoder_heads(Var::constant(rowvec({0, 0, 10, 10})));
    (void)zhat;
    CHECK(what.value()(0, 0) == doctest::Approx(10.0000454).epsilon(1e-6));
  }
  SUBCASE("deterministic") {
    Mat head = rowvec({1, 2, 3, 4});
    auto [z1, w1] = encoder_heads(Var::constant(head));
    auto [z2, w2] = encoder_heads(Var::constant(head));
    CHECK(z1.value() == z2.value());
    CHECK(w1.value() == w2.value());
  }
  SUBCASE("odd head width rejected") {
    CHECK_THROWS_AS(encoder_heads(Var::constant(rowvec({1, 2, 3}))), std::invalid_argument);
  }
}

TEST_CASE("gm_logits: weighted distance examples") {
  SUBCASE("zhat at a codeword gives zero logit for it") {
    Mat m(2, 2);
    m << 0.25, -0.75, 2, 3;
    Var logits = gm_logits(Var::constant(rowvec({0.25, -0.75})), Var::constant(rowvec({1.3, 0.7})),
                           Var::constant(m));
    CHECK(logits.value()(0, 0) == 0.0);  // exact: direct subtraction form
    CHECK(logits.value()(0, 1) < 0.0);
  }
  SUBCASE("direct arithmetic") {
    Mat m(1, 2);
    m << 0, 0;
    Var logits =
        gm_logits(Var::constant(rowvec({1, 0})), Var::constant(rowvec({2, 4})), Var::constant(m));
    CHECK(logits.value()(0, 0) == doctest::Approx(-1.0));
  }
  SUBCASE("unit weights reduce to the plain distance logit with sigma2 = 1") {
    Rng rng(2);
    Mat zhat = draw_normal(3, 4, rng);
    Mat m = draw_normal(5, 4, rng);
    Var weighted = gm_logits(Var::constant(zhat), Var::constant(Mat(Mat::Ones(3, 4))), Var::constant(m));
    Var plain = scale(pairwise_sqdist(Var::constant(zhat), Var::constant(m)), -0.5);
    CHECK((weighted.value() - plain.value()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("categorical_posterior examples") {
  SUBCASE("equal logits give uniform") {
    Mat pi = categorical_posterior(Var::constant(rowvec({0, 0, 0, 0}))).value();
    for (Index c = 0; c < 4; ++c) CHECK(pi(0, c) == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("logistic of 1") {
    Mat pi = categorical_posterior(Var::constant(rowvec({0, -1}))).value();
    CHECK(pi(0, 0) == doctest::Approx(0.7310585786).epsilon(1e-9));
    CHECK(pi(0, 1) == doctest::Approx(0.2689414214).epsilon(1e-9));
  }
  SUBCASE("shift invariance") {
    Mat l = rowvec({0.3, -1.2, 2.0});
    Mat shifted = l.array() + 5.0;
    Mat a = categorical_posterior(Var::constant(l)).value();
    Mat b = categorical_posterior(Var::constant(shifted)).value();
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("component_variance") {
  Mat m(2, 2);
  m << 1, 1, 3, 3;
  SUBCASE("zero at the codeword, direct arithmetic elsewhere") {
    Var s2 = component_variance(Var::constant(rowvec({1, 1})), Var::constant(m), 1.0);
    CHECK(s2.value()(0, 0) == 0.0);
    // ||(1,1)-(3,3)||^2 = 8; (8/2)/2 = 2.
    CHECK(s2.value()(0, 1) == doctest::Approx(2.0));
  }
  SUBCASE("drawn example: L=2, sigma2=1, squared distance 4 gives 1") {
    Mat m2(1, 2);
    m2 << 2, 0;  // distance^2 from (0,0) = 4
    Var s2 = component_variance(Var::constant(rowvec({0, 0})), Var::constant(m2), 1.0);
    CHECK(s2.value()(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("quadratic scaling in the offset") {
    Rng rng(4);
    Mat zhat = draw_normal(1, 3, rng);
    Mat mu = Mat::Zero(2, 3);
    mu.row(1) = draw_normal(1, 3, rng);
    const double t = 1.7;
    Var base = component_variance(Var::constant(zhat), Var::constant(mu), 1.0);
    Var scaled = component_variance(Var::constant(Mat(t * zhat)), Var::constant(Mat(t * mu)), 1.0);
    CHECK(scaled.value()(0, 1) == doctest::Approx(t * t * base.value()(0, 1)));
  }
  SUBCASE("sigma2 must be positive") {
    CHECK_THROWS_AS(component_variance(Var::constant(rowvec({0, 0})), Var::constant(m), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(component_variance(Var::constant(rowvec({0, 0})), Var::constant(m), -1.0),
                    std::invalid_argument);
  }
  SUBCASE("non-negative everywhere, zero iff at a codeword") {
    Rng rng(8);
    Mat zhat = draw_normal(4, 3, rng);
    Mat mu = draw_normal(5, 3, rng);
    mu.row(2) = zhat.row(1);  // plant an exact match
    Mat s2 = component_variance(Var::constant(zhat), Var::constant(mu), 0.7).value();
    CHECK((s2.array() >= 0).all());
    CHECK(s2(1, 2) == 0.0);
    for (Index b = 0; b < 4; ++b)
      for (Index c = 0; c < 5; ++c)
        if (!(b == 1 && c == 2)) CHECK(s2(b, c) > 0.0);
  }
}

TEST_CASE("stochastic_vq_posterior") {
  SUBCASE("concentrates on the near codeword") {
    Mat m(2, 2);
    m << 0, 0, 50, 50;
    Mat pi = stochastic_vq_posterior(Var::constant(rowvec({0, 0})), Var::constant(m), 1.0).value();
    CHECK(pi(0, 0) > 1.0 - 1e-12);
  }
  SUBCASE("uniform when equidistant") {
    Mat m(2, 2);
    m << 1, 0, -1, 0;
    Mat pi = stochastic_vq_posterior(Var::constant(rowvec({0, 0})), Var::constant(m), 1.0).value();
    CHECK(pi(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("agrees with gm_logits when what = 1/sigma2") {
    Rng rng(12);
    Mat zhat = draw_normal(3, 4, rng);
    Mat m = draw_normal(5, 4, rng);
    const double sigma2 = 0.4;
    Mat w = Mat::Constant(3, 4, 1.0 / sigma2);
    Mat via_gm = categorical_posterior(
                     gm_logits(Var::constant(zhat), Var::constant(w), Var::constant(m)))
                     .value();
    Mat direct = stochastic_vq_posterior(Var::constant(zhat), Var::constant(m), sigma2).value();
    CHECK((via_gm - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("posterior bundle invariants") {
  Rng rng(21);
  Mat head = draw_normal(6, 8, rng);  // L = 4
  Mat m = draw_normal(5, 4, rng);
  PosteriorBundle pb = gm_posterior(Var::constant(head), Var::constant(m), 1.0);

  SUBCASE("rows of pi are probability vectors") {
    for (Index b = 0; b < 6; ++b) CHECK(std::abs(pb.pi.value().row(b).sum() - 1.0) <= 1e-9);
    CHECK((pb.what.value().array() > 0).all());
  }
  SUBCASE("argmax pi matches argmin weighted distance") {
    Mat wd = pairwise_weighted_sqdist(pb.zhat, pb.what, Var::constant(m)).value();
    for (Index b = 0; b < 6; ++b) {
      Index arg_pi = 0, arg_d = 0;
      for (Index c = 1; c < 5; ++c) {
        if (pb.pi.value()(b, c) > pb.pi.value()(b, arg_pi)) arg_pi = c;
        if (wd(b, c) < wd(b, arg_d)) arg_d = c;
      }
      CHECK(arg_pi == arg_d);
    }
  }
  SUBCASE("log_pi is log of pi") {
    CHECK((pb.log_pi.value().array().exp() - pb.pi.value().array()).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("moving zhat toward a codeword raises its posterior") {
  // Shrinking the weighted distance to codeword j with every other distance
  // held fixed means raising logit j alone; softmax is strictly monotone in
  // each logit.
  Rng rng(33);
  for (int rep = 0; rep < 20; ++rep) {
    Mat logits = draw_uniform(1, 6, -3, 3, rng);
    Mat closer = logits;
    const Index j = rep % 6;
    closer(0, j) += 0.5;  // distance dropped by 1.0 at w-weighted scale
    const double before = categorical_posterior(Var::constant(logits)).value()(0, j);
    const double after = categorical_posterior(Var::constant(closer)).value()(0, j);
    CHECK(after > before);
  }

  // Geometric version: walking zhat straight at mu_0 raises pi_0 (here the
  // other distances grow too, pushing the same way).
  Mat m(3, 2);
  m << 2, 0, 0, 5, 0, -5;
  Mat w = Mat::Ones(1, 2);
  auto pi0_at = [&](double z0) {
    return categorical_posterior(
               gm_logits(Var::constant(rowvec({z0, 0})), Var::constant(w), Var::constant(m)))
        .value()(0, 0);
  };
  CHECK(pi0_at(1.0) > pi0_at(0.0));
  CHECK(pi0_at(1.9) > pi0_at(1.0));
}

}  // TEST_SUITE
