#include "pnsreg/baselines.hpp"

#include <cmath>
#include <numbers>

#include "pnsreg/errors.hpp"
#include "pnsreg/regress.hpp"

namespace pnsreg::baselines {

namespace {

Eigen::MatrixXd quadratic_design(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd d(X.rows(), 2 * X.cols() + 1);
  d.col(0).setOnes();
  d.middleCols(1, X.cols()) = X;
  d.rightCols(X.cols()) = X.array().square();
  return d;
}

// Per-component OLS; coefficient column j predicts part j.
Eigen::MatrixXd per_component_ols(const Eigen::MatrixXd& design, const Eigen::MatrixXd& Y) {
  Eigen::MatrixXd coef(design.cols(), Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j)
    coef.col(j) = regress::ols(design, Y.col(j));
  return coef;
}

// First principal axis of row-centered data, sign-canonicalized.
Eigen::VectorXd principal_axis(const Eigen::MatrixXd& centered) {
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / double(std::max<Eigen::Index>(centered.rows() - 1, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.eigenvalues().maxCoeff() <= 0.0)
    throw NumericalError("fit_pca_score1: data have zero variance");
  Eigen::VectorXd axis = eig.eigenvectors().col(cov.cols() - 1);
  Eigen::Index imax = 0;
  axis.cwiseAbs().maxCoeff(&imax);
  if (axis[imax] < 0.0) axis = -axis;
  return axis;
}

}  // namespace

Eigen::VectorXd clamp_to_simplex(const Eigen::VectorXd& y) {
  Eigen::VectorXd c = y.cwiseMax(0.0);
  const double total = c.sum();
  if (total <= 0.0)
    return Eigen::VectorXd::Constant(y.size(), 1.0 / double(y.size()));
  return c / total;
}

BaselineModel fit_linear_simplex(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X) {
  BaselineModel m;
  m.kind = BaselineKind::LinearSimplex;
  m.coef = per_component_ols(regress::make_design(X), Y);
  return m;
}

BaselineModel fit_quadratic_simplex(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X) {
  BaselineModel m;
  m.kind = BaselineKind::QuadraticSimplex;
  m.coef = per_component_ols(quadratic_design(X), Y);
  return m;
}

BaselineModel fit_pca_score1(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                             bool arcsine) {
  BaselineModel m;
  m.kind = arcsine ? BaselineKind::ArcsinePcaScore1 : BaselineKind::PcaScore1;

  Eigen::MatrixXd work = Y;
  if (arcsine)
    work = work.array().max(0.0).min(1.0).sqrt().asin();

  m.center = work.colwise().mean();
  const Eigen::MatrixXd centered = work.rowwise() - m.center.transpose();
  m.axis = principal_axis(centered);
  const Eigen::VectorXd score = centered * m.axis;
  m.coef = regress::ols(regress::make_design(X), score);
  return m;
}

Eigen::VectorXd predict_baseline(const BaselineModel& model, const Eigen::VectorXd& x) {
  Eigen::VectorXd xd;
  if (model.kind == BaselineKind::QuadraticSimplex) {
    xd.resize(2 * x.size() + 1);
    xd[0] = 1.0;
    xd.segment(1, x.size()) = x;
    xd.tail(x.size()) = x.array().square();
  } else {
    xd.resize(x.size() + 1);
    xd[0] = 1.0;
    xd.tail(x.size()) = x;
  }

  if (xd.size() != model.coef.rows())
    throw DataError("predict_baseline: predictor dimension mismatch");

  switch (model.kind) {
    case BaselineKind::LinearSimplex:
    case BaselineKind::QuadraticSimplex:
      return clamp_to_simplex(model.coef.transpose() * xd);
    case BaselineKind::PcaScore1: {
      const double t = xd.dot(model.coef.col(0));
      return clamp_to_simplex(model.center + t * model.axis);
    }
    case BaselineKind::ArcsinePcaScore1: {
      const double t = xd.dot(model.coef.col(0));
      Eigen::VectorXd u = model.center + t * model.axis;
      u = u.array().max(0.0).min(std::numbers::pi / 2.0);
      return clamp_to_simplex(u.array().sin().square());
    }
  }
  throw DataError("predict_baseline: unknown model kind");
}

}  // namespace pnsreg::baselines
