#pragma once

#include <Eigen/Dense>

namespace pnsreg::baselines {

enum class BaselineKind { LinearSimplex, QuadraticSimplex, PcaScore1, ArcsinePcaScore1 };

// Comparison methods with a shared predict interface. All fits take the raw
// n x p predictor matrix and build their own design internally; predictions
// are clamped to non-negative values and renormalized to sum 1.
struct BaselineModel {
  BaselineKind kind = BaselineKind::LinearSimplex;
  Eigen::MatrixXd coef;     // per-component columns, or the score-1 row
  Eigen::VectorXd center;   // PCA variants: mean in the working space
  Eigen::VectorXd axis;     // PCA variants: first principal axis
};

// Independent OLS per composition part on (1, x).
BaselineModel fit_linear_simplex(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X);

// Independent OLS per part on (1, x_j, x_j^2 for each predictor j).
BaselineModel fit_quadratic_simplex(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X);

// Regress the first principal-component score on (1, x) and reconstruct
// center + fitted * axis. With arcsine = true the PCA runs on
// arcsin(sqrt(x_j)) coordinates and reconstructions map back through sin^2.
BaselineModel fit_pca_score1(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                             bool arcsine);

Eigen::VectorXd predict_baseline(const BaselineModel& model, const Eigen::VectorXd& x);

// Clamp negatives to zero and rescale rows to unit sum (uniform composition
// when a row clamps to all zeros).
Eigen::VectorXd clamp_to_simplex(const Eigen::VectorXd& y);

}  // namespace pnsreg::baselines
