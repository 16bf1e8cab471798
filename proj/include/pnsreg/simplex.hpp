#pragma once

#include <Eigen/Dense>

namespace pnsreg::simplex {

// Scale a non-negative vector to unit sum. Throws DataError on a negative
// entry or an all-zero vector.
Eigen::VectorXd normalize(const Eigen::VectorXd& raw);

// q_j = x_j^alpha / ||x^alpha||_2, mapping the simplex onto the positive
// orthant of the sphere. Zero parts pass through as zeros.
Eigen::VectorXd power_transform(const Eigen::VectorXd& x, double alpha);

// x_j = q_j^{1/alpha} / sum_k q_k^{1/alpha}. Requires all q_j >= 0 (truncate
// first if a fitted point left the orthant); throws DataError otherwise.
Eigen::VectorXd inverse_power_transform(const Eigen::VectorXd& q, double alpha);

// Clamp negative coordinates to zero and renormalize to unit Euclidean norm.
// Identity on the positive orthant; idempotent. Throws NumericalError when
// no coordinate is positive.
Eigen::VectorXd orthant_truncate(const Eigen::VectorXd& q);

// True when every part is >= -tol and the parts sum to 1 within tol.
bool is_valid_composition(const Eigen::VectorXd& x, double tol = 1e-9);

}  // namespace pnsreg::simplex
