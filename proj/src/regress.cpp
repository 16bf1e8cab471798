#include "pnsreg/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pnsreg/errors.hpp"
#include "pnsreg/simplex.hpp"

namespace pnsreg::regress {

namespace {
constexpr double kPi = std::numbers::pi;

thread_local long g_clamp_count = 0;

Eigen::VectorXd wrap_all(const Eigen::VectorXd& v) {
  Eigen::VectorXd w(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) w[i] = geom::wrap(v[i]);
  return w;
}
}  // namespace

long clamp_count() { return g_clamp_count; }
void reset_clamp_count() { g_clamp_count = 0; }

Eigen::MatrixXd make_design(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd d(X.rows(), X.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(X.cols()) = X;
  return d;
}

Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw DataError("ols: row count mismatch");
  if (X.rows() <= X.cols())
    throw DataError("ols: need more observations than coefficients");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw DataError("ols: rank-deficient design");
  return qr.solve(y);
}

CircularFit fit_circular_ls(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  const Eigen::VectorXd warm = ols(X, wrap_all(y));

  CircularFit best;
  best.rss = std::numeric_limits<double>::infinity();
  const double offsets[] = {0.0, kPi / 2.0, -kPi / 2.0, kPi};
  for (double off : offsets) {
    Eigen::VectorXd b = warm;
    b[0] += off;
    bool fixed_point = false;
    for (int it = 0; it < 100; ++it) {
      const Eigen::VectorXd pred = X * b;
      const Eigen::VectorXd ystar = pred + wrap_all(y - pred);
      const Eigen::VectorXd bn = ols(X, ystar);
      const bool done = (bn - b).cwiseAbs().maxCoeff() < 1e-10;
      b = bn;
      if (done) {
        fixed_point = true;
        break;
      }
    }
    const double rss = wrap_all(y - X * b).squaredNorm();
    b[0] = geom::wrap(b[0]);  // canonical intercept: wrap-equivalent optima agree
    if (rss < best.rss - 1e-12) {
      best.beta = b;
      best.rss = rss;
      best.converged = fixed_point;
    }
  }
  return best;
}

VonMisesFit fit_circular_vonmises(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  if (n <= X.cols())
    throw DataError("fit_circular_vonmises: need more observations than coefficients");
  const Eigen::MatrixXd Z = X.rightCols(X.cols() - 1);
  const Eigen::Index p = Z.cols();

  auto mu0_for = [&](const Eigen::VectorXd& gam) {
    double s = 0.0, c = 0.0;
    const Eigen::VectorXd eta = Z * gam;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = y[i] - 2.0 * std::atan(eta[i]);
      s += std::sin(a);
      c += std::cos(a);
    }
    return std::atan2(s, c);
  };
  auto objective = [&](double mu0, const Eigen::VectorXd& gam) {
    const Eigen::VectorXd eta = Z * gam;
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      f += std::cos(y[i] - mu0 - 2.0 * std::atan(eta[i]));
    return f;
  };

  Eigen::VectorXd gam = Eigen::VectorXd::Zero(p);
  double mu0 = mu0_for(gam);
  double f = objective(mu0, gam);

  double lambda = 1e-3;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd eta = Z * gam;
    Eigen::MatrixXd jac(n, p);  // d mu_i / d gamma
    Eigen::VectorXd sin_e(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      jac.row(i) = (2.0 / (1.0 + eta[i] * eta[i])) * Z.row(i);
      sin_e[i] = std::sin(y[i] - mu0 - 2.0 * std::atan(eta[i]));
    }
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * sin_e;

    bool accepted = false;
    double f_try = f;
    for (int retry = 0; retry < 30; ++retry) {
      Eigen::MatrixXd damped = a;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd delta = damped.ldlt().solve(grad);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd gam_try = gam + delta;
      const double mu0_try = mu0_for(gam_try);
      f_try = objective(mu0_try, gam_try);
      if (f_try > f + 1e-14) {
        gam = gam_try;
        mu0 = mu0_try;
        lambda = std::max(lambda / 3.0, 1e-10);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || f_try - f < 1e-12) break;
    f = f_try;
  }

  VonMisesFit fit;
  fit.mu0 = mu0;
  fit.gamma = gam;

  // kappa from the mean resultant length of the residuals (standard
  // piecewise approximation to A^{-1}).
  const double rbar = std::clamp(objective(mu0, gam) / double(n), 0.0, 1.0 - 1e-12);
  double kappa;
  if (rbar < 0.53)
    kappa = 2.0 * rbar + rbar * rbar * rbar + 5.0 * std::pow(rbar, 5) / 6.0;
  else if (rbar < 0.85)
    kappa = -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar);
  else
    kappa = 1.0 / (rbar * rbar * rbar - 4.0 * rbar * rbar + 3.0 * rbar);
  fit.kappa_capped = kappa > 1e6;
  fit.kappa = std::min(kappa, 1e6);
  return fit;
}

RegressionModel fit_score_regression(const Eigen::MatrixXd& scores,
                                     const Eigen::MatrixXd& X, int k_used,
                                     const pns::PnsModel& model) {
  const Eigen::Index n = scores.rows();
  const int d = model.d;
  if (k_used < 1 || k_used > d)
    throw DataError("fit_score_regression: k_used out of range");
  if (X.rows() != n) throw DataError("fit_score_regression: row count mismatch");

  RegressionModel reg;
  reg.k_used = k_used;
  reg.residual_variances.resize(k_used);
  const Eigen::Index dof = std::max<Eigen::Index>(n - X.cols(), 1);

  const Eigen::VectorXd y1 = scores.col(0) / model.rho;
  const CircularFit cf = fit_circular_ls(y1, X);
  reg.beta_circular = cf.beta;
  reg.residual_variances[0] = model.rho * model.rho * cf.rss / double(dof);

  reg.B_linear.resize(k_used - 1, X.cols());
  for (int k = 2; k <= k_used; ++k) {
    const Eigen::VectorXd bk = ols(X, scores.col(k - 1));
    reg.B_linear.row(k - 2) = bk.transpose();
    reg.residual_variances[k - 1] =
        (scores.col(k - 1) - X * bk).squaredNorm() / double(dof);
  }
  return reg;
}

Eigen::VectorXd predict_composition(const pns::PnsModel& model,
                                    const RegressionModel& reg,
                                    const Eigen::VectorXd& x_new) {
  const int d = model.d;
  if (reg.beta_circular.size() != x_new.size() + 1)
    throw DataError("predict_composition: predictor dimension mismatch");
  Eigen::VectorXd xd(x_new.size() + 1);
  xd[0] = 1.0;
  xd.tail(x_new.size()) = x_new;

  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
  s[0] = model.rho * geom::wrap(xd.dot(reg.beta_circular));
  for (int k = 2; k <= reg.k_used; ++k) {
    double val = xd.dot(reg.B_linear.row(k - 2));
    const int fit_idx = d - k + 1;  // level producing score k
    if (fit_idx - 1 < static_cast<int>(model.levels.size())) {
      const double r = model.levels[fit_idx - 1].angle;
      const double c = model.score_scales[fit_idx - 1];
      const double lo = (1e-6 - r) * c;
      const double hi = (kPi - 1e-6 - r) * c;
      if (val < lo || val > hi) {
        val = std::clamp(val, lo, hi);
        ++g_clamp_count;
      }
    } else {
      val = 0.0;  // degenerate tail has no level to lift through
    }
    s[k - 1] = val;
  }

  Eigen::VectorXd q = pns::scores_to_sphere(model, s, reg.k_used);
  // Antipodal points carry the same composition; flip when the circle point
  // has left the orthant entirely so truncation always has something to keep.
  if (q.maxCoeff() <= 0.0) q = -q;
  return simplex::inverse_power_transform(simplex::orthant_truncate(q), model.alpha);
}

}  // namespace pnsreg::regress
