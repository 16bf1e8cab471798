#include "pnsreg/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pnsreg/errors.hpp"

namespace pnsreg::geom {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTau = 2.0 * std::numbers::pi;

// Rotation taking unit `from` to unit `to`, acting in span{from, to} and as
// the identity on its orthogonal complement.
Eigen::MatrixXd plane_rotation(const Eigen::VectorXd& from, const Eigen::VectorXd& to) {
  const Eigen::Index n = from.size();
  const double c = std::clamp(from.dot(to), -1.0, 1.0);
  Eigen::VectorXd aux = from - c * to;
  const double na = aux.norm();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  if (na < 1e-13) return r;  // already aligned (or numerically so)
  aux /= na;
  const double s = na;  // sin of the rotation angle
  r += s * (to * aux.transpose() - aux * to.transpose()) +
       (c - 1.0) * (to * to.transpose() + aux * aux.transpose());
  return r;
}
}  // namespace

double wrap(double theta) {
  return theta - kTau * std::floor((theta + kPi) / kTau);
}

double geodesic_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw DataError("geodesic_dist: dimension mismatch (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

Eigen::MatrixXd rotation_to_pole(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd pole = Eigen::VectorXd::Zero(n);
  pole[n - 1] = 1.0;
  if (v.dot(pole) < -1.0 + 1e-9) {
    // Antipodal: the rotation plane is ill-defined; go through e_1.
    Eigen::VectorXd mid = Eigen::VectorXd::Zero(n);
    mid[0] = 1.0;
    return plane_rotation(mid, pole) * plane_rotation(v, mid);
  }
  return plane_rotation(v, pole);
}

Eigen::VectorXd project_to_subsphere(const Eigen::VectorXd& x, const Subsphere& s) {
  const double rho = geodesic_dist(x, s.axis);
  const double sr = std::sin(rho);
  if (sr < 1e-12)
    throw NumericalError("project_to_subsphere: point coincides with the axis");
  return (std::sin(s.angle) * x + std::sin(rho - s.angle) * s.axis) / sr;
}

Eigen::VectorXd drop_dimension(const Eigen::VectorXd& x, const Subsphere& s) {
  const double rho = geodesic_dist(x, s.axis);
  if (std::abs(rho - s.angle) > 1e-6)
    throw DataError("drop_dimension: point not on the subsphere (distance " +
                    std::to_string(rho) + ", expected " + std::to_string(s.angle) + ")");
  const Eigen::VectorXd y = rotation_to_pole(s.axis) * x;
  return y.head(y.size() - 1) / std::sin(s.angle);
}

Eigen::VectorXd lift_dimension(const Eigen::VectorXd& p, const Subsphere& s,
                               double residual) {
  const double ang = s.angle + residual;
  if (!(ang > 0.0 && ang < kPi))
    throw NumericalError("lift_dimension: lifted angle " + std::to_string(ang) +
                         " outside (0, pi)");
  Eigen::VectorXd ext(p.size() + 1);
  ext.head(p.size()) = std::sin(ang) * p;
  ext[p.size()] = std::cos(ang);
  return rotation_to_pole(s.axis).transpose() * ext;
}

double circular_frechet_mean(const std::vector<double>& angles) {
  if (angles.empty()) throw DataError("circular_frechet_mean: empty input");
  const int n = static_cast<int>(angles.size());

  double lin = 0.0, sc = 0.0, ss = 0.0;
  std::vector<double> wrapped(angles.size());
  for (int i = 0; i < n; ++i) {
    wrapped[i] = wrap(angles[i]);
    lin += wrapped[i];
    sc += std::cos(wrapped[i]);
    ss += std::sin(wrapped[i]);
  }
  lin /= n;

  // Stationary points of the wrapped objective are the linear mean shifted by
  // multiples of 2*pi/n, plus we also try the extrinsic mean.
  std::vector<double> cands;
  cands.reserve(angles.size() + 1);
  for (int j = 0; j < n; ++j) cands.push_back(wrap(lin + kTau * j / n));
  cands.push_back(std::atan2(ss, sc));

  double best = std::numeric_limits<double>::quiet_NaN();
  double bf = std::numeric_limits<double>::infinity();
  for (double c : cands) {
    double f = 0.0;
    for (double t : wrapped) {
      const double e = wrap(t - c);
      f += e * e;
    }
    if (f < bf - 1e-12 || (std::abs(f - bf) <= 1e-12 && c < best)) {
      best = c;
      bf = f;
    }
  }
  return best;
}

}  // namespace pnsreg::geom
