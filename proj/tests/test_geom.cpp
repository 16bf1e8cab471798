#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "pnsreg/errors.hpp"
#include "pnsreg/geom.hpp"
#include "pnsreg/rng.hpp"

using namespace pnsreg;
namespace g = pnsreg::geom;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v / v.norm();
}

// Point at geodesic distance rho from axis, in the direction of a tangent u.
Eigen::VectorXd point_at(const Eigen::VectorXd& axis, const Eigen::VectorXd& u,
                         double rho) {
  Eigen::VectorXd t = u - u.dot(axis) * axis;
  t /= t.norm();
  return std::cos(rho) * axis + std::sin(rho) * t;
}
}  // namespace

TEST_CASE("wrap maps angles into [-pi, pi)") {
  CHECK(g::wrap(0.0) == doctest::Approx(0.0));
  CHECK(g::wrap(kPi) == doctest::Approx(-kPi));   // half-open on the right
  CHECK(g::wrap(-kPi) == doctest::Approx(-kPi));
  CHECK(g::wrap(2.0 * kPi) == doctest::Approx(0.0));
  CHECK(g::wrap(3.0 * kPi) == doctest::Approx(-kPi));
  CHECK(g::wrap(1.0) == doctest::Approx(1.0));
  CHECK(g::wrap(-4.0) == doctest::Approx(-4.0 + 2.0 * kPi));

  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double t = 40.0 * (rng.uniform() - 0.5);
    const double w = g::wrap(t);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    // w and t differ by an integer multiple of 2 pi
    const double k = (t - w) / (2.0 * kPi);
    CHECK(std::abs(k - std::round(k)) < 1e-9);
  }
}

TEST_CASE("geodesic_dist basics") {
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3), e2 = Eigen::VectorXd::Zero(3);
  e1[0] = 1.0;
  e2[1] = 1.0;
  CHECK(g::geodesic_dist(e1, e1) == doctest::Approx(0.0));
  CHECK(g::geodesic_dist(e1, e2) == doctest::Approx(kPi / 2.0));
  CHECK(g::geodesic_dist(e1, (-e1).eval()) == doctest::Approx(kPi));
  // inner products slightly outside [-1, 1] must not produce NaN
  Eigen::VectorXd a = e1 * (1.0 + 1e-14);
  CHECK(std::isfinite(g::geodesic_dist(a, e1)));
  CHECK_THROWS_AS(g::geodesic_dist(e1, Eigen::VectorXd::Ones(4)), DataError);
}

TEST_CASE("geodesic_dist is symmetric and satisfies the triangle inequality") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd a = random_unit(rng, 4);
    const Eigen::VectorXd b = random_unit(rng, 4);
    const Eigen::VectorXd c = random_unit(rng, 4);
    CHECK(g::geodesic_dist(a, b) == doctest::Approx(g::geodesic_dist(b, a)));
    CHECK(g::geodesic_dist(a, c) <=
          g::geodesic_dist(a, b) + g::geodesic_dist(b, c) + 1e-12);
  }
}

TEST_CASE("rotation_to_pole sends the axis to the pole and is special orthogonal") {
  Rng rng(23);
  for (int dim : {2, 3, 5, 8}) {
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::VectorXd v = random_unit(rng, dim);
      const Eigen::MatrixXd R = g::rotation_to_pole(v);
      Eigen::VectorXd pole = Eigen::VectorXd::Zero(dim);
      pole[dim - 1] = 1.0;
      CHECK((R * v - pole).norm() < 1e-12);
      CHECK((R * R.transpose() - Eigen::MatrixXd::Identity(dim, dim)).norm() < 1e-12);
      CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("rotation_to_pole handles the pole and near-antipodal axes") {
  for (int dim : {3, 5}) {
    Eigen::VectorXd pole = Eigen::VectorXd::Zero(dim);
    pole[dim - 1] = 1.0;
    // axis already at the pole: identity
    CHECK((g::rotation_to_pole(pole) - Eigen::MatrixXd::Identity(dim, dim)).norm() <
          1e-12);
    // axis at the south pole: antipodal branch
    const Eigen::MatrixXd R = g::rotation_to_pole((-pole).eval());
    CHECK((R * (-pole) - pole).norm() < 1e-9);
    CHECK((R * R.transpose() - Eigen::MatrixXd::Identity(dim, dim)).norm() < 1e-10);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    // slightly off-antipodal
    Eigen::VectorXd v = -pole;
    v[0] = 1e-10;
    v /= v.norm();
    const Eigen::MatrixXd R2 = g::rotation_to_pole(v);
    CHECK((R2 * v - pole).norm() < 1e-8);
  }
}

TEST_CASE("project_to_subsphere lands on the subsphere and fixes its points") {
  Rng rng(31);
  g::Subsphere s;
  s.axis = random_unit(rng, 4);
  s.angle = 0.6;
  s.kind = g::SphereKind::Small;

  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::VectorXd x = random_unit(rng, 4);
    if (std::sin(g::geodesic_dist(x, s.axis)) < 1e-6) continue;
    const Eigen::VectorXd p = g::project_to_subsphere(x, s);
    CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g::geodesic_dist(p, s.axis) == doctest::Approx(s.angle).epsilon(1e-10));
    // projection is idempotent
    CHECK((g::project_to_subsphere(p, s) - p).norm() < 1e-10);
  }

  // the projection is the closest point: it beats nearby subsphere points
  const Eigen::VectorXd x = random_unit(rng, 4);
  const Eigen::VectorXd p = g::project_to_subsphere(x, s);
  const double dp = g::geodesic_dist(x, p);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd other = point_at(s.axis, random_unit(rng, 4), s.angle);
    CHECK(dp <= g::geodesic_dist(x, other) + 1e-10);
  }

  // x exactly at the axis (or its antipode): direction undefined. A basis
  // vector makes the dot product land on +/-1 exactly; a random unit vector's
  // self-dot rounds just below 1 and slips past the guard.
  g::Subsphere exact;
  exact.axis = Eigen::VectorXd::Zero(4);
  exact.axis[0] = 1.0;
  exact.angle = 0.6;
  exact.kind = g::SphereKind::Small;
  CHECK_THROWS_AS(g::project_to_subsphere(exact.axis, exact), NumericalError);
  CHECK_THROWS_AS(g::project_to_subsphere(-exact.axis, exact), NumericalError);
}

TEST_CASE("drop_dimension / lift_dimension round trip") {
  Rng rng(37);
  for (int dim : {3, 5}) {
    g::Subsphere s;
    s.axis = random_unit(rng, dim);
    s.angle = 0.8;
    s.kind = g::SphereKind::Small;
    for (int rep = 0; rep < 30; ++rep) {
      const Eigen::VectorXd x = random_unit(rng, dim);
      const double rho = g::geodesic_dist(x, s.axis);
      if (std::sin(rho) < 1e-3) continue;
      const Eigen::VectorXd proj = g::project_to_subsphere(x, s);
      const Eigen::VectorXd p = g::drop_dimension(proj, s);
      CHECK(p.size() == dim - 1);
      CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-10));
      // lifting with the signed residual reproduces the original point
      const Eigen::VectorXd back = g::lift_dimension(p, s, rho - s.angle);
      CHECK((back - x).norm() < 1e-9);
      // lifting with zero residual reproduces the projection
      const Eigen::VectorXd back0 = g::lift_dimension(p, s, 0.0);
      CHECK((back0 - proj).norm() < 1e-9);
    }
  }
}

TEST_CASE("drop_dimension rejects points off the subsphere") {
  g::Subsphere s;
  s.axis = Eigen::VectorXd::Zero(3);
  s.axis[2] = 1.0;
  s.angle = 0.5;
  Eigen::VectorXd x(3);
  x << std::sin(1.2), 0.0, std::cos(1.2);  // distance 1.2 != 0.5
  CHECK_THROWS_AS(g::drop_dimension(x, s), DataError);
}

TEST_CASE("lift_dimension rejects angles outside (0, pi)") {
  g::Subsphere s;
  s.axis = Eigen::VectorXd::Zero(3);
  s.axis[2] = 1.0;
  s.angle = 0.5;
  Eigen::VectorXd p(2);
  p << 1.0, 0.0;
  CHECK_NOTHROW(g::lift_dimension(p, s, 0.1));
  CHECK_THROWS_AS(g::lift_dimension(p, s, -0.5), NumericalError);       // angle 0
  CHECK_THROWS_AS(g::lift_dimension(p, s, kPi - 0.5), NumericalError);  // angle pi
  CHECK_THROWS_AS(g::lift_dimension(p, s, -1.0), NumericalError);
}

TEST_CASE("great subsphere drop/lift preserves the equator") {
  g::Subsphere s;
  s.axis = Eigen::VectorXd::Zero(3);
  s.axis[2] = 1.0;
  s.angle = kPi / 2.0;
  s.kind = g::SphereKind::Great;
  Eigen::VectorXd x(3);
  x << std::cos(0.4), std::sin(0.4), 0.0;
  const Eigen::VectorXd p = g::drop_dimension(x, s);
  CHECK(p.norm() == doctest::Approx(1.0));
  CHECK((g::lift_dimension(p, s, 0.0) - x).norm() < 1e-12);
}

TEST_CASE("circular_frechet_mean: antipodal pair resolves to -pi") {
  // Both candidates 0 and -pi attain the same cost; the tie-break picks the
  // smaller mean.
  std::vector<double> angles{-kPi / 2.0, kPi / 2.0};
  CHECK(g::circular_frechet_mean(angles) == doctest::Approx(-kPi));
}

TEST_CASE("circular_frechet_mean matches a brute-force grid") {
  auto cost = [](const std::vector<double>& a, double mu) {
    double c = 0.0;
    for (double t : a) {
      const double w = g::wrap(t - mu);
      c += w * w;
    }
    return c;
  };
  auto grid_min = [&](const std::vector<double>& a) {
    double best_mu = -kPi, best = cost(a, -kPi);
    for (int i = 1; i < 2000000; ++i) {
      const double mu = -kPi + 2.0 * kPi * i / 2000000.0;
      const double c = cost(a, mu);
      if (c < best) {
        best = c;
        best_mu = mu;
      }
    }
    return std::pair{best_mu, best};
  };

  // data straddling the cut point: the naive linear mean is far off
  std::vector<double> wrapped{3.0, -3.0, 3.1};
  const double mu = g::circular_frechet_mean(wrapped);
  auto [gmu, gcost] = grid_min(wrapped);
  CHECK(std::abs(g::wrap(mu - gmu)) < 1e-4);
  CHECK(cost(wrapped, mu) <= gcost + 1e-9);

  Rng rng(41);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> a;
    for (int i = 0; i < 7; ++i) a.push_back(g::wrap(rng.normal(2.0)));
    const double m = g::circular_frechet_mean(a);
    auto [gm, gc] = grid_min(a);
    CHECK(cost(a, m) <= gc + 1e-7);  // never worse than the grid optimum
    (void)gm;
  }
}

TEST_CASE("circular_frechet_mean degenerate inputs") {
  CHECK(g::circular_frechet_mean({1.25}) == doctest::Approx(1.25));
  CHECK(g::circular_frechet_mean({0.5, 0.5, 0.5}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(g::circular_frechet_mean({}), DataError);
}

TEST_CASE("circular_frechet_mean is rotation-equivariant away from ties") {
  Rng rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a;
    for (int i = 0; i < 9; ++i) a.push_back(g::wrap(0.3 * rng.normal()));
    const double delta = g::wrap(2.0 * rng.uniform() - 1.0);
    std::vector<double> b;
    for (double t : a) b.push_back(g::wrap(t + delta));
    const double ma = g::circular_frechet_mean(a);
    const double mb = g::circular_frechet_mean(b);
    CHECK(std::abs(g::wrap(mb - (ma + delta))) < 1e-9);
  }
}
