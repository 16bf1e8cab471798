#include "pnsreg/simplex.hpp"

#include <cmath>

#include "pnsreg/errors.hpp"

namespace pnsreg::simplex {

Eigen::VectorXd normalize(const Eigen::VectorXd& raw) {
  for (Eigen::Index j = 0; j < raw.size(); ++j)
    if (raw[j] < 0.0)
      throw DataError("normalize: negative entry at index " + std::to_string(j));
  const double total = raw.sum();
  if (total <= 0.0) throw DataError("normalize: all entries are zero");
  return raw / total;
}

Eigen::VectorXd power_transform(const Eigen::VectorXd& x, double alpha) {
  Eigen::VectorXd q(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    q[j] = x[j] > 0.0 ? std::pow(x[j], alpha) : 0.0;
  const double norm = q.norm();
  if (norm <= 0.0) throw DataError("power_transform: zero vector");
  return q / norm;
}

Eigen::VectorXd inverse_power_transform(const Eigen::VectorXd& q, double alpha) {
  Eigen::VectorXd x(q.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q[j] < 0.0)
      throw DataError("inverse_power_transform: negative coordinate at index " +
                      std::to_string(j) + " (truncate to the orthant first)");
    x[j] = q[j] > 0.0 ? std::pow(q[j], 1.0 / alpha) : 0.0;
  }
  const double total = x.sum();
  if (total <= 0.0) throw DataError("inverse_power_transform: zero vector");
  return x / total;
}

Eigen::VectorXd orthant_truncate(const Eigen::VectorXd& q) {
  Eigen::VectorXd t = q.cwiseMax(0.0);
  const double norm = t.norm();
  if (norm <= 0.0)
    throw NumericalError("orthant_truncate: no positive coordinate to keep");
  return t / norm;
}

bool is_valid_composition(const Eigen::VectorXd& x, double tol) {
  if (x.size() == 0) return false;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x[j] < -tol || !std::isfinite(x[j])) return false;
  return std::abs(x.sum() - 1.0) <= tol;
}

}  // namespace pnsreg::simplex
