#pragma once

#include <Eigen/Dense>

#include "pnsreg/pns.hpp"

namespace pnsreg::regress {

// Prepend a column of ones: raw n x p predictors become n x (p+1) design rows.
Eigen::MatrixXd make_design(const Eigen::MatrixXd& X);

// Ordinary least squares with a rank check. X is n x m design rows.
Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct CircularFit {
  Eigen::VectorXd beta;  // intercept wrapped into [-pi, pi)
  double rss = 0.0;      // wrapped residual sum of squares
  bool converged = true;
};

// Wrapped circular-linear least squares: minimize sum_i wrap(y_i - x_i'b)^2.
// Multi-start iterative unwrapping: from an OLS warm start with intercept
// offsets {0, +-pi/2, pi}, alternate unwrap-targets / OLS-refit to a fixed
// point; keep the candidate with the smallest wrapped RSS.
CircularFit fit_circular_ls(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

struct VonMisesFit {
  double mu0 = 0.0;        // baseline mean direction
  Eigen::VectorXd gamma;   // link coefficients, one per raw predictor
  double kappa = 0.0;      // concentration
  bool kappa_capped = false;
};

// von Mises regression with the Fisher-Lee link mu_i = mu0 + 2 atan(z_i'gamma)
// where z_i are the non-intercept columns of the design. Alternates a
// Gauss-Newton step on gamma with the closed-form mu0 update, then estimates
// kappa from the mean resultant length (capped at 1e6 for near-noiseless
// data).
VonMisesFit fit_circular_vonmises(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

// Two-stage model, stage 2: regression of PNS scores on predictors given Phi.
struct RegressionModel {
  Eigen::VectorXd beta_circular;       // score-1 (angle scale) coefficients
  Eigen::MatrixXd B_linear;            // (k_used-1) x m rows for scores 2..k_used
  int k_used = 1;
  Eigen::VectorXd residual_variances;  // k_used entries, score scale
};

// Fit score 1 as an angle (s_1 / rho) by wrapped least squares and scores
// 2..k_used by OLS. scores is n x d in display order; X is n x m design rows.
RegressionModel fit_score_regression(const Eigen::MatrixXd& scores,
                                     const Eigen::MatrixXd& X, int k_used,
                                     const pns::PnsModel& model);

// Predicted composition for one raw predictor row: predicted scores ->
// sphere -> orthant truncation -> inverse power transform. Higher-score
// predictions outside the valid lift range are clamped just inside the
// boundary (counted by clamp_count()); a sphere point with no positive
// coordinate is replaced by its antipode (same composition) first, so the
// result is always a valid composition.
Eigen::VectorXd predict_composition(const pns::PnsModel& model,
                                    const RegressionModel& reg,
                                    const Eigen::VectorXd& x_new);

// Number of higher-score clamps since the last reset (thread-local).
long clamp_count();
void reset_clamp_count();

}  // namespace pnsreg::regress
