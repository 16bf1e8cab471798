#include "pnsreg/pns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pnsreg/errors.hpp"

namespace pnsreg::pns {

namespace {

constexpr double kPi = std::numbers::pi;
// Two-sided 5% critical value of the standard normal.
constexpr double kZCrit = 1.9599639845400545;

Eigen::VectorXd geodesics_to(const Eigen::VectorXd& v, const Eigen::MatrixXd& X) {
  Eigen::VectorXd rho = (v.transpose() * X).transpose();
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    rho[i] = std::acos(std::clamp(rho[i], -1.0, 1.0));
  return rho;
}

// One damped Gauss-Newton descent from a given starting axis. Returns the
// local minimizer of sum_i (rho_i - r)^2 found from that start.
SubsphereFit descend(const Eigen::MatrixXd& X, Eigen::VectorXd v, bool great,
                     int max_iter) {
  const Eigen::Index m1 = X.rows();

  auto radius_for = [&](const Eigen::VectorXd& rho) {
    return great ? kPi / 2.0 : rho.mean();
  };

  Eigen::VectorXd rho = geodesics_to(v, X);
  double r = radius_for(rho);
  if (!great && r > kPi / 2.0) {  // canonical hemisphere: flip the axis
    v = -v;
    rho = geodesics_to(v, X);
    r = radius_for(rho);
  }
  double objective = (rho.array() - r).square().sum();

  double lambda = 1e-6;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd e = rho.array() - r;
    // Tangent-space Jacobian of rho_i w.r.t. v: -(I - v v^T) x_i / sin(rho_i).
    Eigen::MatrixXd g = -(X - v * (v.transpose() * X));
    for (Eigen::Index i = 0; i < g.cols(); ++i)
      g.col(i) /= std::max(std::sin(rho[i]), 1e-8);
    const Eigen::MatrixXd a = g * g.transpose();
    const Eigen::VectorXd b = -(g * e);

    bool accepted = false;
    double decrease = 0.0;
    for (int retry = 0; retry < 25; ++retry) {
      Eigen::MatrixXd damped = a;
      damped.diagonal().array() += lambda;
      Eigen::VectorXd delta = damped.ldlt().solve(b);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      delta -= delta.dot(v) * v;  // keep the step tangent
      Eigen::VectorXd vt = v + delta;
      vt /= vt.norm();
      Eigen::VectorXd rho_t = geodesics_to(vt, X);
      double r_t = radius_for(rho_t);
      if (!great && r_t > kPi / 2.0) {
        vt = -vt;
        rho_t = kPi - rho_t.array();
        r_t = kPi - r_t;
      }
      const double obj_t = (rho_t.array() - r_t).square().sum();
      if (obj_t < objective) {
        decrease = objective - obj_t;
        v = vt;
        rho = rho_t;
        r = r_t;
        objective = obj_t;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || decrease < 1e-12) {
      converged = true;
      break;
    }
  }

  SubsphereFit fit;
  fit.sub.axis = v;
  fit.sub.angle = great ? kPi / 2.0 : std::clamp(r, 1e-9, kPi / 2.0);
  fit.sub.kind = great ? geom::SphereKind::Great : geom::SphereKind::Small;
  fit.residuals = rho.array() - fit.sub.angle;
  fit.rss = objective;
  fit.converged = converged;
  (void)m1;
  return fit;
}

}  // namespace

SubsphereFit fit_subsphere(const Eigen::MatrixXd& X, geom::SphereKind kind) {
  const Eigen::Index m = X.rows() - 1;
  const Eigen::Index n = X.cols();
  if (n <= m)
    throw DataError("fit_subsphere: need more points than the sphere dimension (n = " +
                    std::to_string(n) + ", m = " + std::to_string(m) + ")");

  const bool great = kind == geom::SphereKind::Great;

  // Axis of least data spread: eigenvector of X X^T with smallest eigenvalue,
  // sign-canonicalized so the largest-magnitude entry is positive.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X * X.transpose());
  Eigen::VectorXd v_eig = eig.eigenvectors().col(0);
  Eigen::Index imax = 0;
  v_eig.cwiseAbs().maxCoeff(&imax);
  if (v_eig[imax] < 0.0) v_eig = -v_eig;

  std::vector<Eigen::VectorXd> starts;
  if (!great) {
    Eigen::VectorXd mu = X.rowwise().mean();
    if (mu.norm() > 1e-10) starts.push_back(mu / mu.norm());
  }
  starts.push_back(v_eig);

  SubsphereFit best;
  bool have = false;
  for (const auto& v0 : starts) {
    SubsphereFit fit = descend(X, v0, great, 200);
    if (!have || fit.rss < best.rss) {
      best = fit;
      have = true;
    }
  }
  return best;
}

geom::SphereKind select_sphere_kind(const SubsphereFit& great, const SubsphereFit& small,
                                    int n, int m, Selection method) {
  const double rss_g = great.rss;
  const double rss_s = small.rss;
  if (rss_g / n <= 1e-15) return geom::SphereKind::Great;  // already on a great sphere

  if (method == Selection::ForcedGreat) return geom::SphereKind::Great;
  if (method == Selection::ForcedSmall) return geom::SphereKind::Small;

  if (method == Selection::VarianceTest) {
    // Mean signed deviation from a right angle, measured at the small fit's
    // axis: mean_i(rho_i) - pi/2 = r_small - pi/2. The spread of the small
    // fit's residuals provides the standard error.
    const double mean = small.sub.angle - kPi / 2.0;
    const double mu = small.residuals.mean();
    const double var =
        (small.residuals.array() - mu).square().sum() / std::max(n - 1, 1);
    if (var < 1e-30)
      return (std::abs(mean) > 1e-12 && rss_s < rss_g) ? geom::SphereKind::Small
                                                       : geom::SphereKind::Great;
    const double z = mean / std::sqrt(var / n);
    return (std::abs(z) > kZCrit && rss_s < rss_g) ? geom::SphereKind::Small
                                                   : geom::SphereKind::Great;
  }

  const double bic_g =
      n * std::log(std::max(rss_g / n, 1e-300)) + m * std::log(double(n));
  const double bic_s =
      n * std::log(std::max(rss_s / n, 1e-300)) + (m + 1) * std::log(double(n));
  return bic_s < bic_g ? geom::SphereKind::Small : geom::SphereKind::Great;
}

namespace {

// Shared by fit and scoring: project every column onto the subsphere, then
// drop a dimension.
Eigen::MatrixXd project_and_drop(const Eigen::MatrixXd& X, const geom::Subsphere& s) {
  Eigen::MatrixXd next(X.rows() - 1, X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    next.col(i) = geom::drop_dimension(geom::project_to_subsphere(X.col(i), s), s);
  return next;
}

double spread_from_first(const Eigen::MatrixXd& X) {
  double spread = 0.0;
  for (Eigen::Index i = 1; i < X.cols(); ++i)
    spread = std::max(spread, geom::geodesic_dist(X.col(0), X.col(i)));
  return spread;
}

void finish_scales(PnsModel& model) {
  model.score_scales.assign(model.d, 1.0);
  double running = 1.0;
  for (int k = 1; k < model.d; ++k) {
    if (k <= static_cast<int>(model.levels.size()))
      running *= std::sin(model.levels[k - 1].angle);
    model.score_scales[k] = running;
  }
  model.rho = 1.0;
  for (const auto& lvl : model.levels) model.rho *= std::sin(lvl.angle);
}

}  // namespace

PnsFit fit_pns(const Eigen::MatrixXd& X, Selection method, double alpha) {
  const int d = static_cast<int>(X.rows()) - 1;
  const int n = static_cast<int>(X.cols());
  if (d < 1) throw DataError("fit_pns: data must live on at least S^1");
  if (n <= d)
    throw DataError("fit_pns: need n > d (n = " + std::to_string(n) +
                    ", d = " + std::to_string(d) + ")");

  PnsFit out;
  out.model.d = d;
  out.model.selection = method;
  out.model.alpha = alpha;
  out.scores = Eigen::MatrixXd::Zero(n, d);

  Eigen::MatrixXd cur = X;
  double scale = 1.0;  // cumulative product of sin(r) over fitted levels

  for (int m = d; m >= 2; --m) {
    const int k = d - m + 1;  // fit index, 1-based

    if (spread_from_first(cur) < 1e-8) {
      out.model.degenerate = true;
      Eigen::VectorXd mu = cur.rowwise().mean();
      out.model.degenerate_base = mu / mu.norm();
      finish_scales(out.model);
      return out;
    }

    SubsphereFit great = fit_subsphere(cur, geom::SphereKind::Great);
    geom::Subsphere chosen = great.sub;
    Eigen::VectorXd residuals = great.residuals;
    double rss = great.rss;
    if (method != Selection::ForcedGreat) {
      SubsphereFit small = fit_subsphere(cur, geom::SphereKind::Small);
      if (select_sphere_kind(great, small, n, m, method) == geom::SphereKind::Small) {
        chosen = small.sub;
        residuals = small.residuals;
        rss = small.rss;
      }
    }

    if (chosen.angle < 1e-6 && rss / n < 1e-16) {
      // Points concentrated at the axis: nothing left to fit.
      out.model.degenerate = true;
      Eigen::VectorXd mu = cur.rowwise().mean();
      out.model.degenerate_base = mu / mu.norm();
      finish_scales(out.model);
      return out;
    }

    out.model.levels.push_back(chosen);
    out.scores.col(d - k) = scale * residuals;  // score s_{d-k+1}
    scale *= std::sin(chosen.angle);
    cur = project_and_drop(cur, chosen);
  }

  // Final S^1 stage: circular Frechet mean and the circular score.
  std::vector<double> theta(n);
  for (int i = 0; i < n; ++i) theta[i] = std::atan2(cur(1, i), cur(0, i));
  out.model.final_mean_angle = geom::circular_frechet_mean(theta);
  finish_scales(out.model);
  for (int i = 0; i < n; ++i)
    out.scores(i, 0) =
        out.model.rho * geom::wrap(theta[i] - out.model.final_mean_angle);
  return out;
}

Eigen::MatrixXd compute_scores(const PnsModel& model, const Eigen::MatrixXd& X) {
  const int d = model.d;
  const int n = static_cast<int>(X.cols());
  if (static_cast<int>(X.rows()) != d + 1)
    throw DataError("compute_scores: data dimension does not match the model");

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, d);
  Eigen::MatrixXd cur = X;
  for (std::size_t k = 1; k <= model.levels.size(); ++k) {
    const geom::Subsphere& lvl = model.levels[k - 1];
    Eigen::VectorXd rho = geodesics_to(lvl.axis, cur);
    scores.col(d - static_cast<int>(k)) =
        model.score_scales[k - 1] * (rho.array() - lvl.angle);
    cur = project_and_drop(cur, lvl);
  }
  if (!model.degenerate) {
    for (int i = 0; i < n; ++i) {
      const double theta = std::atan2(cur(1, i), cur(0, i));
      scores(i, 0) = model.rho * geom::wrap(theta - model.final_mean_angle);
    }
  }
  return scores;
}

Eigen::VectorXd scores_to_sphere(const PnsModel& model, const Eigen::VectorXd& s,
                                 int use_first_k) {
  const int d = model.d;
  if (static_cast<int>(s.size()) != d)
    throw DataError("scores_to_sphere: expected " + std::to_string(d) + " scores");
  if (use_first_k < 0) use_first_k = d;
  if (use_first_k < 1 || use_first_k > d)
    throw DataError("scores_to_sphere: use_first_k out of range");

  Eigen::VectorXd sv = s;
  for (int j = use_first_k; j < d; ++j) sv[j] = 0.0;

  Eigen::VectorXd pt;
  if (model.degenerate) {
    pt = model.degenerate_base;
  } else {
    const double psi = model.final_mean_angle + sv[0] / model.rho;
    pt.resize(2);
    pt << std::cos(psi), std::sin(psi);
  }
  for (int k = static_cast<int>(model.levels.size()); k >= 1; --k) {
    const double resid = sv[d - k] / model.score_scales[k - 1];
    pt = geom::lift_dimension(pt, model.levels[k - 1], resid);
  }
  return pt;
}

Eigen::VectorXd pns_mean(const PnsModel& model) {
  return scores_to_sphere(model, Eigen::VectorXd::Zero(model.d));
}

Eigen::VectorXd variance_explained(const Eigen::MatrixXd& scores) {
  const Eigen::Index n = scores.rows();
  if (n < 2) throw DataError("variance_explained: need at least 2 observations");
  Eigen::VectorXd var(scores.cols());
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    const double mean = scores.col(j).mean();
    var[j] = (scores.col(j).array() - mean).square().sum() / double(n - 1);
  }
  const double total = var.sum();
  if (total <= 0.0)
    throw NumericalError("variance_explained: total score variance is zero");
  return var / total;
}

PathTable biplot_paths(const PnsModel& model, int score_index,
                       const std::vector<double>& grid) {
  const int d = model.d;
  if (score_index < 1 || score_index > d)
    throw DataError("biplot_paths: score index out of range");

  // Validity bounds for the swept score. Score 1 is periodic; higher scores
  // must keep the lifted angle strictly inside (0, pi).
  for (double t : grid) {
    bool ok;
    if (score_index == 1) {
      ok = std::abs(t) <= model.rho * kPi + 1e-12;
    } else {
      const int fit_idx = d - score_index + 1;  // level producing this score
      const double r = model.levels.at(fit_idx - 1).angle;
      const double c = model.score_scales[fit_idx - 1];
      ok = t / c + r > 0.0 && t / c + r < kPi;
    }
    if (!ok)
      throw DataError("biplot_paths: grid value " + std::to_string(t) +
                      " outside the score's valid range");
  }

  PathTable table;
  table.score_index = score_index;
  table.grid = grid;
  table.coords.resize(static_cast<Eigen::Index>(grid.size()), d + 1);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s[score_index - 1] = grid[i];
    table.coords.row(static_cast<Eigen::Index>(i)) =
        scores_to_sphere(model, s).transpose();
  }
  return table;
}

}  // namespace pnsreg::pns
