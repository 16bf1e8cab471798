#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "pnsreg/errors.hpp"
#include "pnsreg/eval.hpp"
#include "pnsreg/geom.hpp"
#include "pnsreg/pns.hpp"
#include "pnsreg/rng.hpp"
#include "pnsreg/simplex.hpp"

using namespace pnsreg;
namespace g = pnsreg::geom;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v / v.norm();
}

// n points on the subsphere A(axis, r) of S^{dim-1}, optionally pushed along
// a random tangent direction of the ambient sphere (sigma in radians).
Eigen::MatrixXd subsphere_sample(Rng& rng, const Eigen::VectorXd& axis, double r,
                                 int n, double sigma) {
  const int dim = static_cast<int>(axis.size());
  // orthonormal tangent frame at the axis
  Eigen::MatrixXd frame(dim, dim - 1);
  {
    Eigen::MatrixXd b(dim, dim);
    b.col(0) = axis;
    for (int j = 1; j < dim; ++j) b.col(j) = random_unit(rng, dim);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
    Eigen::MatrixXd Q = qr.householderQ();
    if (Q.col(0).dot(axis) < 0.0) Q = -Q;
    frame = Q.rightCols(dim - 1);
  }
  Eigen::MatrixXd X(dim, n);
  for (int i = 0; i < n; ++i) {
    // direction on the subsphere
    Eigen::VectorXd u(dim - 1);
    for (int j = 0; j < dim - 1; ++j) u[j] = rng.normal();
    u /= u.norm();
    Eigen::VectorXd x = std::cos(r) * axis + std::sin(r) * (frame * u);
    if (sigma > 0.0) {
      Eigen::VectorXd w(dim);
      for (int j = 0; j < dim; ++j) w[j] = rng.normal(sigma);
      w -= w.dot(x) * x;  // tangent at x
      const double t = w.norm();
      if (t > 0.0) x = std::cos(t) * x + std::sin(t) * (w / t);
    }
    X.col(i) = x;
  }
  return X;
}
}  // namespace

TEST_CASE("fit_subsphere recovers a noise-free small sphere exactly") {
  Rng rng(101);
  const Eigen::VectorXd axis = random_unit(rng, 3);
  for (double r : {0.4, 0.9, 1.3}) {
    const Eigen::MatrixXd X = subsphere_sample(rng, axis, r, 50, 0.0);
    const pns::SubsphereFit fit = pns::fit_subsphere(X, g::SphereKind::Small);
    CHECK(fit.sub.angle == doctest::Approx(r).epsilon(1e-7));
    CHECK(g::geodesic_dist(fit.sub.axis, axis) < 1e-6);
    CHECK(fit.rss < 1e-12);
    CHECK(fit.sub.kind == g::SphereKind::Small);
  }
}

TEST_CASE("fit_subsphere great fit pins the angle at pi/2") {
  Rng rng(103);
  const Eigen::VectorXd axis = random_unit(rng, 4);
  const Eigen::MatrixXd X = subsphere_sample(rng, axis, kPi / 2.0, 60, 0.01);
  const pns::SubsphereFit fit = pns::fit_subsphere(X, g::SphereKind::Great);
  CHECK(fit.sub.angle == kPi / 2.0);  // exact, by construction
  CHECK(fit.sub.kind == g::SphereKind::Great);
  const double axis_err = std::min(g::geodesic_dist(fit.sub.axis, axis),
                                   g::geodesic_dist(fit.sub.axis, (-axis).eval()));
  CHECK(axis_err < 0.02);
}

TEST_CASE("fit_subsphere canonicalizes an axis with angle beyond pi/2") {
  Rng rng(107);
  const Eigen::VectorXd axis = random_unit(rng, 3);
  const double r = 2.3;  // distance from `axis`, i.e. pi - 2.3 from -axis
  const Eigen::MatrixXd X = subsphere_sample(rng, axis, r, 50, 0.0);
  const pns::SubsphereFit fit = pns::fit_subsphere(X, g::SphereKind::Small);
  CHECK(fit.sub.angle <= kPi / 2.0);
  CHECK(fit.sub.angle == doctest::Approx(kPi - r).epsilon(1e-6));
  CHECK(g::geodesic_dist(fit.sub.axis, (-axis).eval()) < 1e-5);
}

TEST_CASE("fit_subsphere under tangential noise meets the recovery tolerances") {
  for (double r : {0.4, kPi / 4.0}) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      Rng rng(seed);
      const Eigen::VectorXd axis = random_unit(rng, 3);
      const Eigen::MatrixXd X = subsphere_sample(rng, axis, r, 200, 0.01);
      const pns::SubsphereFit fit = pns::fit_subsphere(X, g::SphereKind::Small);
      CHECK(std::abs(fit.sub.angle - r) < 0.01);
      CHECK(g::geodesic_dist(fit.sub.axis, axis) < 0.02);
    }
  }
}

TEST_CASE("fit_subsphere is deterministic") {
  Rng rng(109);
  const Eigen::MatrixXd X = subsphere_sample(rng, random_unit(rng, 3), 0.7, 40, 0.05);
  const pns::SubsphereFit a = pns::fit_subsphere(X, g::SphereKind::Small);
  const pns::SubsphereFit b = pns::fit_subsphere(X, g::SphereKind::Small);
  CHECK(a.sub.angle == b.sub.angle);
  CHECK((a.sub.axis - b.sub.axis).norm() == 0.0);
  CHECK(a.rss == b.rss);
}

TEST_CASE("fit_subsphere needs more points than the dimension") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(4, 3);  // n = 3 <= m = 3
  CHECK_THROWS_AS(pns::fit_subsphere(X, g::SphereKind::Small), DataError);
}

TEST_CASE("select_sphere_kind: forced modes and the exact-great shortcut") {
  Rng rng(113);
  const Eigen::VectorXd axis = random_unit(rng, 3);
  const Eigen::MatrixXd X = subsphere_sample(rng, axis, 0.5, 100, 0.02);
  const pns::SubsphereFit great = pns::fit_subsphere(X, g::SphereKind::Great);
  const pns::SubsphereFit small = pns::fit_subsphere(X, g::SphereKind::Small);

  CHECK(pns::select_sphere_kind(great, small, 100, 2, pns::Selection::ForcedGreat) ==
        g::SphereKind::Great);
  CHECK(pns::select_sphere_kind(great, small, 100, 2, pns::Selection::ForcedSmall) ==
        g::SphereKind::Small);

  // residuals already negligible on the great sphere: always Great
  const Eigen::MatrixXd Xg = subsphere_sample(rng, axis, kPi / 2.0, 100, 0.0);
  const pns::SubsphereFit g0 = pns::fit_subsphere(Xg, g::SphereKind::Great);
  const pns::SubsphereFit s0 = pns::fit_subsphere(Xg, g::SphereKind::Small);
  CHECK(pns::select_sphere_kind(g0, s0, 100, 2, pns::Selection::ForcedSmall) ==
        g::SphereKind::Great);
}

TEST_CASE("select_sphere_kind separates small and great regimes") {
  for (auto method : {pns::Selection::Bic, pns::Selection::VarianceTest}) {
    int small_right = 0, great_right = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(1000 + seed);
      const Eigen::VectorXd axis = random_unit(rng, 3);

      const Eigen::MatrixXd Xs = subsphere_sample(rng, axis, 0.5, 200, 0.02);
      const auto gs = pns::fit_subsphere(Xs, g::SphereKind::Great);
      const auto ss = pns::fit_subsphere(Xs, g::SphereKind::Small);
      if (pns::select_sphere_kind(gs, ss, 200, 2, method) == g::SphereKind::Small)
        ++small_right;

      const Eigen::MatrixXd Xg = subsphere_sample(rng, axis, kPi / 2.0, 200, 0.02);
      const auto gg = pns::fit_subsphere(Xg, g::SphereKind::Great);
      const auto sg = pns::fit_subsphere(Xg, g::SphereKind::Small);
      if (pns::select_sphere_kind(gg, sg, 200, 2, method) == g::SphereKind::Great)
        ++great_right;
    }
    CHECK(small_right >= 9);
    CHECK(great_right >= 9);
  }
}

TEST_CASE("fit_pns inverts its own scores exactly") {
  const pns::PnsModel phi = eval::default_phi_star();
  eval::SimulationConfig cfg;
  cfg.n = 60;
  cfg.sigma = 0.05;
  cfg.seed = 2024;
  const eval::Dataset ds = eval::simulate_dataset(phi, cfg);

  Eigen::MatrixXd Q(5, cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    Q.col(i) = simplex::power_transform(ds.Y.row(i).transpose(), 0.5);

  const pns::PnsFit fit = pns::fit_pns(Q, pns::Selection::Bic, 0.5);
  REQUIRE(fit.model.d == 4);
  REQUIRE_FALSE(fit.model.degenerate);
  double worst = 0.0;
  for (int i = 0; i < cfg.n; ++i) {
    const Eigen::VectorXd back =
        pns::scores_to_sphere(fit.model, fit.scores.row(i).transpose());
    worst = std::max(worst, (back - Q.col(i)).norm());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("compute_scores reproduces the training scores") {
  const pns::PnsModel phi = eval::default_phi_star();
  eval::SimulationConfig cfg;
  cfg.n = 40;
  cfg.seed = 77;
  const eval::Dataset ds = eval::simulate_dataset(phi, cfg);

  Eigen::MatrixXd Q(5, cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    Q.col(i) = simplex::power_transform(ds.Y.row(i).transpose(), 0.5);
  const pns::PnsFit fit = pns::fit_pns(Q, pns::Selection::Bic, 0.5);
  const Eigen::MatrixXd again = pns::compute_scores(fit.model, Q);
  CHECK((again - fit.scores).lpNorm<Eigen::Infinity>() < 1e-9);

  CHECK_THROWS_AS(pns::compute_scores(fit.model, Eigen::MatrixXd::Identity(3, 3)),
                  DataError);
}

TEST_CASE("score bookkeeping: scales, rho and display order") {
  const pns::PnsModel phi = eval::default_phi_star();
  eval::SimulationConfig cfg;
  cfg.n = 50;
  cfg.seed = 5;
  const eval::Dataset ds = eval::simulate_dataset(phi, cfg);
  Eigen::MatrixXd Q(5, cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    Q.col(i) = simplex::power_transform(ds.Y.row(i).transpose(), 0.5);
  const pns::PnsFit fit = pns::fit_pns(Q, pns::Selection::Bic, 0.5);
  const pns::PnsModel& m = fit.model;

  REQUIRE(static_cast<int>(m.score_scales.size()) == m.d);
  CHECK(m.score_scales[0] == 1.0);
  double running = 1.0;
  for (std::size_t k = 0; k < m.levels.size(); ++k) {
    running *= std::sin(m.levels[k].angle);
    CHECK(m.score_scales[k + 1] == doctest::Approx(running).epsilon(1e-14));
  }
  CHECK(m.rho == doctest::Approx(m.score_scales.back()).epsilon(1e-14));

  // s_d (last display column) is the unscaled residual of the first fit
  for (int i = 0; i < 5; ++i) {
    const double rho_i = g::geodesic_dist(Q.col(i), m.levels[0].axis);
    CHECK(fit.scores(i, m.d - 1) ==
          doctest::Approx(rho_i - m.levels[0].angle).epsilon(1e-9));
  }

  // s_1 is bounded by the circumference scale
  CHECK(fit.scores.col(0).lpNorm<Eigen::Infinity>() <= m.rho * kPi + 1e-12);
}

TEST_CASE("pns_mean has all-zero scores and unit norm") {
  const pns::PnsModel phi = eval::default_phi_star();
  eval::SimulationConfig cfg;
  cfg.n = 40;
  cfg.seed = 21;
  const eval::Dataset ds = eval::simulate_dataset(phi, cfg);
  Eigen::MatrixXd Q(5, cfg.n);
  for (int i = 0; i < cfg.n; ++i)
    Q.col(i) = simplex::power_transform(ds.Y.row(i).transpose(), 0.5);
  const pns::PnsFit fit = pns::fit_pns(Q, pns::Selection::Bic, 0.5);

  const Eigen::VectorXd mu = pns::pns_mean(fit.model);
  CHECK(mu.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((pns::scores_to_sphere(fit.model, Eigen::VectorXd::Zero(4)) - mu).norm() ==
        0.0);
  const Eigen::MatrixXd s0 = pns::compute_scores(fit.model, mu);
  CHECK(s0.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("scores_to_sphere argument validation") {
  const pns::PnsModel phi = eval::default_phi_star();
  CHECK_THROWS_AS(pns::scores_to_sphere(phi, Eigen::VectorXd::Zero(3)), DataError);
  CHECK_THROWS_AS(pns::scores_to_sphere(phi, Eigen::VectorXd::Zero(4), 0), DataError);
  CHECK_THROWS_AS(pns::scores_to_sphere(phi, Eigen::VectorXd::Zero(4), 5), DataError);
  // truncation to the first k scores zeroes the rest
  Eigen::VectorXd s(4);
  s << 0.1, 0.05, -0.03, 0.02;
  Eigen::VectorXd s1only(4);
  s1only << 0.1, 0.0, 0.0, 0.0;
  CHECK((pns::scores_to_sphere(phi, s, 1) - pns::scores_to_sphere(phi, s1only))
            .norm() < 1e-14);
}

TEST_CASE("variance_explained sums to one and flags zero variance") {
  Eigen::MatrixXd s(4, 2);
  s << 1.0, 0.0, 2.0, 0.5, 3.0, 1.0, 4.0, 1.5;
  const Eigen::VectorXd ve = pns::variance_explained(s);
  CHECK(ve.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // column variances: var(1,2,3,4) = 5/3, var(0,.5,1,1.5) = 5/12
  CHECK(ve[0] == doctest::Approx((5.0 / 3.0) / (5.0 / 3.0 + 5.0 / 12.0)));
  CHECK_THROWS_AS(pns::variance_explained(Eigen::MatrixXd::Zero(5, 2)),
                  NumericalError);
  CHECK_THROWS_AS(pns::variance_explained(Eigen::MatrixXd::Zero(1, 2)), DataError);
}

TEST_CASE("degenerate data collapses to a point model") {
  Eigen::VectorXd p(4);
  p << 0.5, 0.5, 0.5, 0.5;
  Eigen::MatrixXd X = p.replicate(1, 10);
  const pns::PnsFit fit = pns::fit_pns(X, pns::Selection::Bic, 0.5);
  CHECK(fit.model.degenerate);
  CHECK(fit.scores.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((pns::scores_to_sphere(fit.model, Eigen::VectorXd::Zero(3)) - p).norm() <
        1e-9);
  // new identical points also score zero
  const Eigen::MatrixXd s = pns::compute_scores(fit.model, X.leftCols(3));
  CHECK(s.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("fit_pns input validation") {
  CHECK_THROWS_AS(pns::fit_pns(Eigen::MatrixXd::Identity(1, 5), pns::Selection::Bic),
                  DataError);
  CHECK_THROWS_AS(pns::fit_pns(Eigen::MatrixXd::Identity(5, 4), pns::Selection::Bic),
                  DataError);
}

TEST_CASE("biplot_paths stays on the sphere and validates its grid") {
  const pns::PnsModel phi = eval::default_phi_star();
  std::vector<double> grid{-0.4, -0.2, 0.0, 0.2, 0.4};
  const pns::PathTable t1 = pns::biplot_paths(phi, 1, grid);
  CHECK(t1.coords.rows() == 5);
  CHECK(t1.coords.cols() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(t1.coords.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  // score 1 at zero is the mean point
  CHECK((t1.coords.row(2).transpose() - pns::pns_mean(phi)).norm() < 1e-12);

  const pns::PathTable t2 = pns::biplot_paths(phi, 2, {-0.1, 0.0, 0.1});
  for (int i = 0; i < 3; ++i)
    CHECK(t2.coords.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(pns::biplot_paths(phi, 0, grid), DataError);
  CHECK_THROWS_AS(pns::biplot_paths(phi, 5, grid), DataError);
  // far beyond the circumference of the nested circle
  CHECK_THROWS_AS(pns::biplot_paths(phi, 1, {10.0}), DataError);
  // would push the level angle past pi
  CHECK_THROWS_AS(pns::biplot_paths(phi, 4, {3.2}), DataError);
}
