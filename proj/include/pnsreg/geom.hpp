#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pnsreg::geom {

// Wrap an angle into [-pi, pi).
double wrap(double theta);

// Arc length between unit vectors; arccos of the inner product clamped to
// [-1, 1]. Throws DataError on dimension mismatch.
double geodesic_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

enum class SphereKind { Great, Small };

// Subsphere A(v, r) of S^m: points at geodesic distance r from the axis v.
// kind == Great if and only if angle == pi/2 exactly.
struct Subsphere {
  Eigen::VectorXd axis;  // unit vector, length m+1
  double angle = 0.0;    // r in (0, pi/2]
  SphereKind kind = SphereKind::Small;
};

// Orthogonal map R with R*v = north pole e_{m+1}, det +1, identity on the
// complement of span{v, pole}. Near-antipodal v (v . pole < -1 + 1e-9) is
// handled by composing two half rotations through an intermediate point.
Eigen::MatrixXd rotation_to_pole(const Eigen::VectorXd& v);

// Closest point on the subsphere:
//   P(x) = (sin(r) * x + sin(rho - r) * v) / sin(rho),  rho = d(x, v).
// Throws NumericalError when sin(rho) < 1e-12 (x at +-axis).
Eigen::VectorXd project_to_subsphere(const Eigen::VectorXd& x, const Subsphere& s);

// Coordinates of a point on the subsphere as a point of S^{m-1}: rotate the
// axis to the pole, drop the last coordinate, rescale by 1/sin(r).
// Requires d(x, axis) = r within 1e-6.
Eigen::VectorXd drop_dimension(const Eigen::VectorXd& x, const Subsphere& s);

// Inverse of drop_dimension with a signed deviation from the subsphere:
//   R^T * (sin(r + residual) * p, cos(r + residual)).
// Requires r + residual in (0, pi).
Eigen::VectorXd lift_dimension(const Eigen::VectorXd& p, const Subsphere& s,
                               double residual);

// Minimizer of sum_i wrap(theta_i - mu)^2 over mu in [-pi, pi). Evaluates the
// extrinsic mean plus every cut-point-shifted candidate mean; ties broken by
// the smallest mu. Throws DataError on empty input.
double circular_frechet_mean(const std::vector<double>& angles);

}  // namespace pnsreg::geom
