#include "pnsreg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "pnsreg/baselines.hpp"
#include "pnsreg/errors.hpp"
#include "pnsreg/regress.hpp"
#include "pnsreg/rng.hpp"
#include "pnsreg/simplex.hpp"

namespace pnsreg::eval {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTau = 2.0 * std::numbers::pi;
}  // namespace

pns::PnsModel default_phi_star() {
  pns::PnsModel m;
  m.d = 4;
  m.alpha = 0.5;
  m.selection = pns::Selection::ForcedSmall;
  const double angles[] = {0.7, 0.9, 1.1};
  const int dims[] = {5, 4, 3};  // axis length per level
  for (int k = 0; k < 3; ++k) {
    geom::Subsphere s;
    s.axis = Eigen::VectorXd::Constant(dims[k], 1.0 / std::sqrt(double(dims[k])));
    s.angle = angles[k];
    s.kind = geom::SphereKind::Small;
    m.levels.push_back(s);
  }
  m.final_mean_angle = 0.0;
  m.score_scales = {1.0, std::sin(0.7), std::sin(0.7) * std::sin(0.9)};
  m.score_scales.push_back(m.score_scales[2] * std::sin(1.1));
  m.rho = m.score_scales[3];
  return m;
}

Dataset simulate_dataset(const pns::PnsModel& phi_star, const SimulationConfig& cfg) {
  if (cfg.n < 10) throw DataError("simulate_dataset: need n >= 10");
  if (!(cfg.sigma > 0.0)) throw DataError("simulate_dataset: sigma must be positive");
  const int d = phi_star.d;
  const int n = cfg.n;

  Dataset ds;
  ds.X.resize(n, 2);
  ds.Y.resize(n, d + 1);
  ds.scores.resize(n, d);

  Rng rng(cfg.seed);
  for (int i = 0; i < n; ++i) {
    const double t = double(-51 + (i + 1)) / 100.0;
    ds.X(i, 0) = t;
    ds.X(i, 1) = std::sin(kTau * t);

    Eigen::VectorXd s(d);
    for (int k = 0; k < d; ++k) s[k] = rng.normal(cfg.sigma);
    s[0] += cfg.a[0] + cfg.a[1] * ds.X(i, 0) + cfg.a[2] * ds.X(i, 1);
    s[0] = phi_star.rho * geom::wrap(s[0] / phi_star.rho);
    // Keep higher scores inside the valid lift range of their level.
    for (int k = 2; k <= d; ++k) {
      const int fit_idx = d - k + 1;
      if (fit_idx - 1 >= static_cast<int>(phi_star.levels.size())) continue;
      const double r = phi_star.levels[fit_idx - 1].angle;
      const double c = phi_star.score_scales[fit_idx - 1];
      s[k - 1] = std::clamp(s[k - 1], (1e-6 - r) * c, (kPi - 1e-6 - r) * c);
    }
    ds.scores.row(i) = s.transpose();

    const Eigen::VectorXd q = pns::scores_to_sphere(phi_star, s);
    ds.Y.row(i) = q.array().square().transpose();  // alpha = 1/2 inverse
  }
  return ds;
}

double pmse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& observed) {
  if (predicted.rows() != observed.rows() || predicted.cols() != observed.cols())
    throw DataError("pmse: shape mismatch");
  return 100.0 * (predicted - observed).array().square().rowwise().sum().mean();
}

std::vector<Method> all_methods() {
  return {Method::PnsScore1,     Method::PnsAllScores,     Method::PnsVonMises,
          Method::LinearSimplex, Method::QuadraticSimplex, Method::Pca,
          Method::ArcsinePca};
}

std::string method_name(Method m) {
  switch (m) {
    case Method::PnsScore1: return "pns_score1";
    case Method::PnsAllScores: return "pns_all_scores";
    case Method::PnsVonMises: return "pns_vonmises";
    case Method::LinearSimplex: return "linear_simplex";
    case Method::QuadraticSimplex: return "quadratic_simplex";
    case Method::Pca: return "pca_score1";
    case Method::ArcsinePca: return "arcsine_pca_score1";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& M, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), M.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = M.row(idx[i]);
  return out;
}

bool needs_pns(Method m) {
  return m == Method::PnsScore1 || m == Method::PnsAllScores ||
         m == Method::PnsVonMises;
}

// Stage 1 of the two-stage procedure, shared by the three PNS methods.
struct PnsStage {
  bool ok = false;
  pns::PnsFit pf;
  Eigen::VectorXd y_angle;  // score 1 on the angle scale
};

PnsStage fit_stage1(const Eigen::MatrixXd& Ytr, double alpha,
                    pns::Selection selection) {
  PnsStage st;
  Eigen::MatrixXd Q(Ytr.cols(), Ytr.rows());
  for (Eigen::Index i = 0; i < Ytr.rows(); ++i)
    Q.col(i) = simplex::power_transform(Ytr.row(i).transpose(), alpha);
  st.pf = pns::fit_pns(Q, selection, alpha);
  st.y_angle = st.pf.scores.col(0) / st.pf.model.rho;
  st.ok = true;
  return st;
}

// One method's test-set predictions given the (possibly shared) stage-1 fit.
// Throws when the method cannot be fitted.
Eigen::MatrixXd predict_method(Method method, const PnsStage& stage,
                               const Eigen::MatrixXd& Xtr, const Eigen::MatrixXd& Ytr,
                               const Eigen::MatrixXd& Dtr, const Eigen::MatrixXd& Xte,
                               double alpha) {
  const int nte = static_cast<int>(Xte.rows());
  Eigen::MatrixXd pred(nte, Ytr.cols());
  switch (method) {
    case Method::PnsScore1:
    case Method::PnsAllScores: {
      if (!stage.ok) throw NumericalError("PNS stage-1 fit unavailable");
      const auto& pf = stage.pf;
      const int k_used = method == Method::PnsScore1 ? 1 : pf.model.d;
      const regress::RegressionModel reg =
          regress::fit_score_regression(pf.scores, Dtr, k_used, pf.model);
      for (int i = 0; i < nte; ++i)
        pred.row(i) =
            regress::predict_composition(pf.model, reg, Xte.row(i).transpose())
                .transpose();
      return pred;
    }
    case Method::PnsVonMises: {
      if (!stage.ok) throw NumericalError("PNS stage-1 fit unavailable");
      const auto& pf = stage.pf;
      const regress::VonMisesFit vm =
          regress::fit_circular_vonmises(stage.y_angle, Dtr);
      for (int i = 0; i < nte; ++i) {
        const double ang = vm.mu0 + 2.0 * std::atan(Xte.row(i).dot(vm.gamma));
        Eigen::VectorXd s = Eigen::VectorXd::Zero(pf.model.d);
        s[0] = pf.model.rho * geom::wrap(ang);
        Eigen::VectorXd q = pns::scores_to_sphere(pf.model, s, 1);
        if (q.maxCoeff() <= 0.0) q = -q;  // antipode carries the same composition
        pred.row(i) = simplex::inverse_power_transform(simplex::orthant_truncate(q),
                                                       alpha)
                          .transpose();
      }
      return pred;
    }
    case Method::LinearSimplex:
    case Method::QuadraticSimplex: {
      const baselines::BaselineModel bm = method == Method::LinearSimplex
                                              ? baselines::fit_linear_simplex(Ytr, Xtr)
                                              : baselines::fit_quadratic_simplex(Ytr, Xtr);
      for (int i = 0; i < nte; ++i)
        pred.row(i) =
            baselines::predict_baseline(bm, Xte.row(i).transpose()).transpose();
      return pred;
    }
    case Method::Pca:
    case Method::ArcsinePca: {
      const baselines::BaselineModel bm =
          baselines::fit_pca_score1(Ytr, Xtr, method == Method::ArcsinePca);
      for (int i = 0; i < nte; ++i)
        pred.row(i) =
            baselines::predict_baseline(bm, Xte.row(i).transpose()).transpose();
      return pred;
    }
  }
  throw DataError("predict_method: unknown method");
}

// Per-split PMSE for every configured method; NaN marks a failure.
std::vector<double> run_split(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                              const std::vector<int>& train, const std::vector<int>& test,
                              const BenchmarkConfig& cfg) {
  const Eigen::MatrixXd Xtr = rows_of(X, train), Xte = rows_of(X, test);
  const Eigen::MatrixXd Ytr = rows_of(Y, train), Yte = rows_of(Y, test);
  const Eigen::MatrixXd Dtr = regress::make_design(Xtr);

  std::vector<double> out(cfg.methods.size(),
                          std::numeric_limits<double>::quiet_NaN());

  // Stage 1, shared by the PNS methods: refit on training responses only.
  PnsStage stage;
  if (std::any_of(cfg.methods.begin(), cfg.methods.end(), needs_pns)) {
    try {
      stage = fit_stage1(Ytr, cfg.alpha, cfg.selection);
    } catch (const std::exception&) {
      stage.ok = false;
    }
  }

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    try {
      const Eigen::MatrixXd pred =
          predict_method(cfg.methods[mi], stage, Xtr, Ytr, Dtr, Xte, cfg.alpha);
      out[mi] = pmse(pred, Yte);
    } catch (const std::exception&) {
      // leave NaN: counted as a failure
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd fit_and_predict(Method method, const Eigen::MatrixXd& Xtr,
                                const Eigen::MatrixXd& Ytr,
                                const Eigen::MatrixXd& Xte, double alpha,
                                pns::Selection selection) {
  if (Xtr.rows() != Ytr.rows())
    throw DataError("fit_and_predict: row count mismatch");
  if (Xtr.cols() != Xte.cols())
    throw DataError("fit_and_predict: predictor dimension mismatch");
  PnsStage stage;
  if (needs_pns(method)) stage = fit_stage1(Ytr, alpha, selection);
  return predict_method(method, stage, Xtr, Ytr, regress::make_design(Xtr), Xte,
                        alpha);
}

std::vector<MethodResult> cross_validate(const Eigen::MatrixXd& X,
                                         const Eigen::MatrixXd& Y,
                                         const BenchmarkConfig& cfg) {
  const int n = static_cast<int>(Y.rows());
  if (n < 20) throw DataError("cross_validate: need at least 20 observations");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw DataError("cross_validate: train_fraction must be in (0, 1)");
  if (X.rows() != Y.rows()) throw DataError("cross_validate: row count mismatch");

  const int ntr = std::max(1, static_cast<int>(std::floor(cfg.train_fraction * n)));
  if (ntr >= n) throw DataError("cross_validate: empty test set");

  // All permutations drawn up front from one seeded stream so that results
  // do not depend on the number of jobs.
  Rng rng(cfg.seed);
  std::vector<std::vector<int>> perms(cfg.n_splits);
  for (int s = 0; s < cfg.n_splits; ++s) perms[s] = rng.permutation(n);

  std::vector<std::vector<double>> per_split(cfg.n_splits);
  auto work = [&](int begin, int end) {
    for (int s = begin; s < end; ++s) {
      std::vector<int> train(perms[s].begin(), perms[s].begin() + ntr);
      std::vector<int> test(perms[s].begin() + ntr, perms[s].end());
      per_split[s] = run_split(X, Y, train, test, cfg);
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    work(0, cfg.n_splits);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cfg.n_splits + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      const int begin = j * chunk;
      const int end = std::min(cfg.n_splits, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  std::vector<MethodResult> results;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    MethodResult r;
    r.method = cfg.methods[mi];
    r.n_splits = cfg.n_splits;
    double sum = 0.0, sumsq = 0.0;
    int ok = 0;
    for (int s = 0; s < cfg.n_splits; ++s) {
      const double v = per_split[s][mi];
      if (std::isnan(v)) {
        ++r.failures;
      } else {
        sum += v;
        sumsq += v * v;
        ++ok;
      }
    }
    if (ok > 0) {
      r.mean_pmse = sum / ok;
      r.sd_pmse = ok > 1 ? std::sqrt(std::max(0.0, (sumsq - sum * sum / ok) / (ok - 1)))
                         : 0.0;
    } else {
      r.mean_pmse = std::numeric_limits<double>::quiet_NaN();
      r.sd_pmse = std::numeric_limits<double>::quiet_NaN();
    }
    results.push_back(r);
  }
  return results;
}

}  // namespace pnsreg::eval
