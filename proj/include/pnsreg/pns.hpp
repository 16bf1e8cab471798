#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pnsreg/geom.hpp"

namespace pnsreg::pns {

enum class Selection { Bic, VarianceTest, ForcedGreat, ForcedSmall };

// Full PNS parameter set. Level k (1-based) is fitted on S^{d-k+1}; its axis
// has d-k+2 coordinates. Scores are stored in display order (s_1, ..., s_d):
// s_1 is the circular score from the final S^1 stage, and level k produces
// s_{d-k+1}.
struct PnsModel {
  int d = 0;                            // sphere dimension of the data
  std::vector<geom::Subsphere> levels;  // d-1 entries unless degenerate
  double final_mean_angle = 0.0;        // Frechet mean on the last S^1
  // score_scales[k-1] = prod_{j<k} sin(r_j), the residual scale of fit k;
  // score_scales[0] = 1 and score_scales[d-1] = rho when all levels fitted.
  std::vector<double> score_scales;
  double rho = 1.0;  // radius of the fully nested circle
  Selection selection = Selection::Bic;
  double alpha = 0.5;  // transform exponent used upstream (bookkeeping)

  // Set when the descent stopped early because the remaining points were
  // concentrated at one point; the tail scores are identically zero and
  // degenerate_base replaces the S^1 stage in reconstructions.
  bool degenerate = false;
  Eigen::VectorXd degenerate_base;
};

struct SubsphereFit {
  geom::Subsphere sub;
  Eigen::VectorXd residuals;  // geodesic_dist(x_i, axis) - r, in input order
  double rss = 0.0;
  bool converged = true;
};

// Least-squares subsphere through points given as columns on S^m (so X is
// (m+1) x n with n > m). Great fixes r = pi/2; Small estimates r and
// canonicalizes to r <= pi/2 via the antipodal flip. Deterministic.
SubsphereFit fit_subsphere(const Eigen::MatrixXd& X, geom::SphereKind kind);

// Great-vs-small decision from the two candidate fits on the same data
// (n points, ambient dimension m + 1). Bic: small iff its penalized score is
// lower. VarianceTest: small iff a two-sided z-test rejects "the mean signed
// deviation from a right angle at the small fit's axis is zero" (equivalently,
// the fitted radius differs from pi/2 by more than 1.96 standard errors of the
// small-fit residual spread) and the small fit has lower RSS. Zero residual
// variance returns Great unless the fitted radius itself differs from pi/2.
geom::SphereKind select_sphere_kind(const SubsphereFit& great, const SubsphereFit& small,
                                    int n, int m, Selection method);

// Backward PNS on data columns on S^d (X is (d+1) x n, n > d). Returns the
// model and the n x d score matrix in display order.
struct PnsFit {
  PnsModel model;
  Eigen::MatrixXd scores;  // n x d
};
PnsFit fit_pns(const Eigen::MatrixXd& X, Selection method, double alpha = 0.5);

// Scores for new points (columns on S^d) under an already fitted model, by
// projecting through the fitted levels.
Eigen::MatrixXd compute_scores(const PnsModel& model, const Eigen::MatrixXd& X);

// Inverse map: place the circular score on the nested circle and lift back
// out level by level. Scores beyond use_first_k are treated as zero;
// use_first_k = -1 means all d. Throws NumericalError if a lifted angle
// leaves (0, pi).
Eigen::VectorXd scores_to_sphere(const PnsModel& model, const Eigen::VectorXd& s,
                                 int use_first_k = -1);

// The point with all scores zero; lies on every fitted subsphere.
Eigen::VectorXd pns_mean(const PnsModel& model);

// Per-score fraction of total score variance. Throws NumericalError when the
// total variance is zero.
Eigen::VectorXd variance_explained(const Eigen::MatrixXd& scores);

// Coordinate trajectories swept by one score with the others at zero.
struct PathTable {
  int score_index = 1;              // 1-based
  std::vector<double> grid;         // score values
  Eigen::MatrixXd coords;           // grid.size() x (d+1) sphere coordinates
};
PathTable biplot_paths(const PnsModel& model, int score_index,
                       const std::vector<double>& grid);

}  // namespace pnsreg::pns
