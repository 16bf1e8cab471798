#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pnsreg/pns.hpp"

namespace pnsreg::eval {

// Bundled generator model: a fully nested small-sphere sequence on S^4
// (level angles 0.7, 0.9, 1.1) whose final circle stays essentially inside
// the positive orthant, so simulated compositions are valid.
pns::PnsModel default_phi_star();

struct SimulationConfig {
  int n = 100;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  std::array<double, 3> a{0.1, 1.6, 0.4};  // score-1 linear model coefficients
};

struct Dataset {
  Eigen::MatrixXd X;       // n x 2 predictors
  Eigen::MatrixXd Y;       // n x (d+1) compositions
  Eigen::MatrixXd scores;  // n x d generating scores (kept for diagnostics)
};

// Deterministic simulation: x1 = (-51+i)/100, x2 = sin(2 pi (-51+i)/100);
// score 1 follows the linear model plus noise (wrapped onto the circle),
// higher scores are pure noise (clamped to the valid lift range); scores map
// through phi_star and coordinates are squared into compositions.
Dataset simulate_dataset(const pns::PnsModel& phi_star, const SimulationConfig& cfg);

// 100 * mean over rows of the squared composition error.
double pmse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& observed);

enum class Method {
  PnsScore1,         // 1: wrapped LS on PNS score 1 only
  PnsAllScores,      // 2: score 1 + OLS on the remaining scores
  PnsVonMises,       // 3: von Mises regression on score 1
  LinearSimplex,     // 4
  QuadraticSimplex,  // 5
  Pca,               // 6
  ArcsinePca         // 7
};

std::vector<Method> all_methods();
std::string method_name(Method m);

struct BenchmarkConfig {
  double train_fraction = 0.8;
  int n_splits = 100;
  std::uint64_t seed = 0;
  std::vector<Method> methods = all_methods();
  int jobs = 1;
  double alpha = 0.5;
  pns::Selection selection = pns::Selection::Bic;
};

struct MethodResult {
  Method method;
  double mean_pmse = 0.0;
  double sd_pmse = 0.0;
  int n_splits = 0;
  int failures = 0;
};

// Random 80/20 (by default) splits; every configured method is fitted on the
// training part (PNS refitted per split on training responses only) and
// scored on the held-out part. A method failure on a split is counted, not
// fatal. Deterministic for a given config; jobs > 1 parallelizes over splits
// without changing results.
std::vector<MethodResult> cross_validate(const Eigen::MatrixXd& X,
                                         const Eigen::MatrixXd& Y,
                                         const BenchmarkConfig& cfg);

// Fit one benchmark method on (Xtr, Ytr) and predict a composition per row
// of Xte — the same pipeline cross_validate runs inside each split. Throws
// when the method cannot be fitted on the given data.
Eigen::MatrixXd fit_and_predict(Method method, const Eigen::MatrixXd& Xtr,
                                const Eigen::MatrixXd& Ytr,
                                const Eigen::MatrixXd& Xte, double alpha = 0.5,
                                pns::Selection selection = pns::Selection::Bic);

}  // namespace pnsreg::eval
