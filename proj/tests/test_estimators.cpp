#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "slabdens/basis.hpp"
#include "slabdens/bounds.hpp"
#include "slabdens/density.hpp"
#include "slabdens/errors.hpp"
#include "slabdens/estimators.hpp"
#include "slabdens/fnspace.hpp"

using namespace slabdens;

namespace {

EstimatorConfig config_for(const char* method, double eps = 0.1) {
  EstimatorConfig c;
  c.method = interval_method_from_string(method, "all");
  c.eps = eps;
  return c;
}

}  // namespace

TEST_CASE("the four solvers agree on orthogonal families") {
  const Density uniform = make_density("uniform");
  const Density blocks = make_density("blocks");
  int instance = 0;
  for (const Density* density : {&uniform, &blocks})
    for (const char* method : {"theorem1", "improved-grid"})
      for (int variant = 0; variant < 3; ++variant) {
        ++instance;
        const FamilyWithCertificate fwc =
            (instance % 2 == 0) ? histogram_family(8) : haar_family(3);
        const Sample s = draw_sample(*density, 256, 100 + instance);
        EstimatorConfig cfg = config_for(method);
        cfg.kappa_stop = 1e-300;  // run greedy to exhaustion

        const SpanElement soft = soft_threshold(s, fwc, cfg);
        const FitResult greedy = fit_greedy(s, fwc, cfg);
        const SpanElement inter = fit_intersection(s, fwc, cfg);
        const std::vector<Slab> slabs = build_slabs(s, fwc, cfg.method, cfg.eps);
        const SpanElement dual = dual_solve(slabs, gram(*fwc.family), fwc.family);

        CHECK(dist2(soft, greedy.estimate) <= 1e-10);
        CHECK(dist2(soft, inter) <= 1e-10);
        CHECK(dist2(soft, dual) <= 1e-10);
        CHECK(!greedy.trace.hit_max_iter);
      }
}

TEST_CASE("greedy trace") {
  // correlated family and tight hand-built slabs force a multi-step run
  const FamilyWithCertificate fwc = gaussian_kernel_family(4, {16.0}, false);
  const std::vector<Slab> slabs = {
      {0, 1.0, 0.05}, {1, -0.7, 0.05}, {2, 0.4, 0.05}, {3, 0.2, 0.05}};
  const long sample_size = 1000;
  EstimatorConfig cfg = config_for("theorem1");

  const FitResult fit = fit_greedy_slabs(slabs, fwc.family, cfg, sample_size);
  const GreedyTrace& trace = fit.trace;
  REQUIRE(trace.n_s >= 4);
  CHECK(trace.n_s == static_cast<long>(trace.steps.size()));
  CHECK(!trace.hit_max_iter);
  const double kappa = 0.5 / static_cast<double>(sample_size);
  CHECK(trace.final_max_gain <= kappa);

  // every recorded gain is the squared distance between consecutive iterates
  SpanElement prev = SpanElement::zero(fwc.family);
  for (long i = 1; i <= trace.n_s; ++i) {
    EstimatorConfig partial = cfg;
    partial.max_iter = i;
    const SpanElement cur = fit_greedy_slabs(slabs, fwc.family, partial, sample_size).estimate;
    const double gain = trace.steps[static_cast<std::size_t>(i - 1)].gain;
    CHECK(dist2(prev, cur) == doctest::Approx(gain).epsilon(1e-10));
    CHECK(gain > kappa);
    CHECK(trace.steps[static_cast<std::size_t>(i - 1)].n == i - 1);
    prev = cur;
  }
  CHECK(dist2(prev, fit.estimate) <= 1e-18);

  // a unit iteration cap is reported
  EstimatorConfig capped = cfg;
  capped.max_iter = 1;
  const FitResult one = fit_greedy_slabs(slabs, fwc.family, capped, sample_size);
  CHECK(one.trace.n_s == 1);
  CHECK(one.trace.hit_max_iter);
}

TEST_CASE("greedy stops immediately when zero is feasible") {
  const auto trig = trig_family(4, 2.0);
  const std::vector<Slab> slabs = {{0, 0.05, 0.1}, {1, 0.0, 0.2}, {2, -0.01, 0.02}, {3, 0.0, 1.0}};
  EstimatorConfig cfg = config_for("theorem1");
  const FitResult fit = fit_greedy_slabs(slabs, trig.family, cfg, 100);
  CHECK(fit.trace.n_s == 0);
  CHECK(fit.trace.final_max_gain == 0.0);
  CHECK(fit.estimate.coefficients().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("config validation") {
  const Density uniform = make_density("uniform");
  const Sample s = draw_sample(uniform, 64, 5);
  const auto hist = histogram_family(4);
  EstimatorConfig cfg = config_for("theorem1");
  cfg.eps = 0.0;
  CHECK_THROWS_AS(fit_greedy(s, hist, cfg), InvalidLevel);
  cfg.eps = 0.1;
  cfg.kappa_stop = 1.0 / 64.0 + 1e-9;  // above 1/N
  CHECK_THROWS_AS(fit_greedy(s, hist, cfg), std::invalid_argument);
  cfg.kappa_stop = 1.0 / 64.0;
  CHECK_NOTHROW(fit_greedy(s, hist, cfg));
}

TEST_CASE("dual solver") {
  SUBCASE("zero centers yield the zero element") {
    const auto trig = trig_family(3, 2.0);
    const std::vector<Slab> slabs = {{0, 0.0, 0.1}, {1, 0.0, 0.05}, {2, 0.0, 0.2}};
    const SpanElement g = dual_solve(slabs, gram(*trig.family), trig.family);
    CHECK(g.coefficients().cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("maximizes the penalized quadratic dual and closes the gap") {
    const auto fwc = gaussian_kernel_family(3, {4.0}, false);
    const GramMatrix gm = gram(*fwc.family);
    const Eigen::MatrixXd& G = gm.matrix();
    Eigen::VectorXd gamma_h(3);
    gamma_h << 0.3, -0.2, 0.1;
    const Eigen::VectorXd w = G * gamma_h;
    std::vector<Slab> slabs;
    const std::vector<double> rho = {0.1, 0.2, 0.15};
    for (int k = 0; k < 3; ++k)
      slabs.push_back(Slab{k, w[k] / fwc.family->norm_sq(k), rho[static_cast<std::size_t>(k)]});

    const SpanElement sol = dual_solve(slabs, gm, fwc.family);
    const double primal = dist2(sol, SpanElement::zero(fwc.family));

    auto theta = [&](const Eigen::VectorXd& x) {
      double v = -x.dot(G * x);
      for (int k = 0; k < 3; ++k) {
        const double dk = fwc.family->norm_sq(k);
        v += 2.0 * x[k] * slabs[static_cast<std::size_t>(k)].center * dk;
        v -= 2.0 * std::abs(x[k]) * slabs[static_cast<std::size_t>(k)].halfwidth * dk;
      }
      return v;
    };
    const double solver_theta = theta(sol.coefficients());
    // strong duality: the dual optimum equals the primal squared distance
    CHECK(solver_theta == doctest::Approx(primal).epsilon(1e-6));
    // no grid point does better
    double grid_max = -1e300;
    Eigen::VectorXd x(3);
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j)
        for (int k = 0; k <= 40; ++k) {
          x << -2.0 + 0.1 * i, -2.0 + 0.1 * j, -2.0 + 0.1 * k;
          grid_max = std::max(grid_max, theta(x));
        }
    CHECK(solver_theta >= grid_max - 1e-9);

    const auto other = trig_family(2, 2.0);
    CHECK_THROWS_AS(dual_solve(slabs, gm, other.family), FamilyMismatch);
  }
}

TEST_CASE("soft threshold") {
  const Density uniform = make_density("uniform");
  const auto hist = histogram_family(8);

  SUBCASE("kills everything when the slabs are wide") {
    const Sample s = draw_sample(uniform, 16, 3);
    const SpanElement g = soft_threshold(s, hist, config_for("theorem1"));
    CHECK(g.coefficients().cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("keeps informative coordinates at large n") {
    const auto coarse = histogram_family(2);
    const Sample s = draw_sample(uniform, 1024, 13);
    EstimatorConfig cfg = config_for("theorem1");
    const std::vector<Slab> slabs = build_slabs(s, coarse, cfg.method, cfg.eps);
    for (const Slab& sl : slabs) CHECK(std::abs(1.0 - sl.center) <= sl.halfwidth);
    const SpanElement g = soft_threshold(s, coarse, cfg);
    for (int k = 0; k < 2; ++k) {
      CHECK(g.coefficients()[k] > 0.0);
      // nearest point of the slab to zero
      const double lo = slabs[static_cast<std::size_t>(k)].center -
                        slabs[static_cast<std::size_t>(k)].halfwidth;
      CHECK(g.coefficients()[k] == doctest::Approx(lo).epsilon(1e-14));
    }
  }

  SUBCASE("cap applies after thresholding") {
    // the cap needs an orthonormal family
    const auto trig = trig_family(3, 2.0);
    const Sample s = draw_sample(uniform, 1024, 13);
    EstimatorConfig cfg = config_for("theorem1");
    const SpanElement plain = soft_threshold(s, trig, cfg);
    REQUIRE(plain.coefficients().maxCoeff() > 0.25);
    cfg.cap_c = 0.0625;  // coefficients capped at 0.25
    const SpanElement g = soft_threshold(s, trig, cfg);
    CHECK(g.coefficients().maxCoeff() <= 0.25 + 1e-15);
    for (int k = 0; k < 3; ++k)
      CHECK(g.coefficients()[k] ==
            doctest::Approx(std::min(plain.coefficients()[k], 0.25)).epsilon(1e-14));
  }

  SUBCASE("requires an orthogonal family") {
    const Sample s = draw_sample(uniform, 32, 3);
    const auto gauss = gaussian_kernel_family(2, {4.0}, false);
    CHECK_THROWS_AS(soft_threshold(s, gauss, config_for("theorem1")), OrthogonalityRequired);
  }
}

TEST_CASE("hard threshold baseline") {
  const Density blocks = make_density("blocks");
  const Sample s = draw_sample(blocks, 256, 19);

  CHECK_THROWS_AS(hard_threshold_baseline(s, 0, 0.7), InvalidLevel);
  CHECK_THROWS_AS(hard_threshold_baseline(s, 3, -0.1), std::invalid_argument);

  const auto fwc = haar_family(4);  // resolution J = 5
  const BasisFamily& fam = *fwc.family;

  SUBCASE("huge threshold keeps only the coarse entries") {
    const SpanElement g = hard_threshold_baseline(s, 5, 1e6);
    REQUIRE(g.coefficients().size() == fam.size());
    for (int k = 0; k < fam.size(); ++k) {
      const int level = std::get<HaarAtom>(fam.atom(k)).level;
      const double expected =
          level <= 0 ? estimate_coefficient(s, fam, k, DetailPolicy::none).alpha_hat : 0.0;
      CHECK(g.coefficients()[k] == doctest::Approx(expected).epsilon(1e-14));
    }
  }

  SUBCASE("zero threshold keeps every empirical coefficient") {
    const SpanElement g = hard_threshold_baseline(s, 5, 0.0);
    for (int k = 0; k < fam.size(); ++k)
      CHECK(g.coefficients()[k] ==
            doctest::Approx(estimate_coefficient(s, fam, k, DetailPolicy::none).alpha_hat)
                .epsilon(1e-14));
  }

  SUBCASE("selection rule is |alpha| >= kappa sqrt(j/n), with optional level scaling") {
    for (bool scaled : {false, true}) {
      const SpanElement g = hard_threshold_baseline(s, 5, 0.7, scaled);
      int kept = 0, dropped = 0;
      for (int k = 0; k < fam.size(); ++k) {
        const int level = std::get<HaarAtom>(fam.atom(k)).level;
        const double alpha = estimate_coefficient(s, fam, k, DetailPolicy::none).alpha_hat;
        const double scale = scaled ? level * std::pow(2.0, level) : static_cast<double>(level);
        const bool keep = level <= 0 || std::abs(alpha) >= 0.7 * std::sqrt(scale / 256.0);
        if (keep) {
          CHECK(g.coefficients()[k] == doctest::Approx(alpha).epsilon(1e-14));
          ++kept;
        } else {
          CHECK(g.coefficients()[k] == 0.0);
          ++dropped;
        }
      }
      CHECK(kept >= 2);
      CHECK(dropped >= 1);
    }
  }
}

TEST_CASE("multiple kernel estimator") {
  Sample empty;
  CHECK_THROWS_AS(fit_multiple_kernel(empty, {4.0}, EstimatorConfig{}), std::invalid_argument);

  const Density cosine = make_density("cosine");
  const Sample s = draw_sample(cosine, 64, 23);
  const SpanElement g = fit_multiple_kernel(s, {4.0, 16.0}, EstimatorConfig{});
  CHECK(g.coefficients().size() == 64 * 2 + 1);
  CHECK(g.coefficients().allFinite());
  CHECK(std::isfinite(g.evaluate(0.3)));
  // the fit moved off the origin
  CHECK(g.coefficients().cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("projection estimate improves on the origin when the slabs hold") {
  // replicate on which every slab contains the true coefficient vector
  const Density blocks = make_density("blocks");
  const auto hist = histogram_family(8);
  const Sample s = draw_sample(blocks, 1024, 29);
  EstimatorConfig cfg = config_for("theorem1");
  const std::vector<Slab> slabs = build_slabs(s, hist, cfg.method, cfg.eps);

  Eigen::VectorXd alpha(8);
  for (int k = 0; k < 8; ++k) alpha[k] = oracle_alpha(blocks, *hist.family, k);
  bool event = true;
  for (const Slab& sl : slabs)
    if (std::abs(alpha[sl.k] - sl.center) > sl.halfwidth) event = false;
  REQUIRE(event);

  const SpanElement target(hist.family, alpha);
  const FitResult fit = fit_greedy(s, hist, cfg);
  const SpanElement zero = SpanElement::zero(hist.family);
  CHECK(dist2(fit.estimate, target) <= dist2(zero, target) + 1e-12);

  // telescoped gains never overshoot the initial squared distance
  double gains = 0.0;
  for (const GreedyStep& st : fit.trace.steps) gains += st.gain;
  CHECK(gains <= dist2(zero, target) - dist2(fit.estimate, target) + 1e-9);
}
