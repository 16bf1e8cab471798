#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pnsreg/pns.hpp"

namespace pnsreg::figures {

// Equilateral-triangle coordinates of a 3-part composition: corners at
// (0,0), (1,0) and (1/2, sqrt(3)/2), so (1/3,1/3,1/3) maps to the centroid.
std::array<double, 2> ternary_xy(const Eigen::VectorXd& comp);

// Fitted-circle samples of a d=2 model, mapped to the simplex.
struct TernaryCurve {
  Eigen::VectorXd s1;        // circular score grid
  Eigen::MatrixXd sphere;    // n x 3 raw circle points (may leave the orthant)
  Eigen::MatrixXd simplex;   // n x 3 compositions after truncation + inverse
  Eigen::VectorXd truncated; // 1 where the raw point had a negative coordinate
};
TernaryCurve ternary_curve(const pns::PnsModel& model, int n_samples = 200);

// Ternary diagram SVG (data points, fitted curve, PNS mean) plus a CSV of
// the curve coordinates. Model must have d = 2.
void plot_ternary(const Eigen::MatrixXd& Y, const pns::PnsModel& model,
                  const std::vector<std::string>& labels,
                  const std::string& svg_path, const std::string& csv_path);

// Per-part trajectories as score 1 (and score 2 when d >= 2) sweep a
// symmetric grid with the other scores at zero; SVG chart plus CSV rows
// (score_index, t, parts...).
void plot_biplot(const pns::PnsModel& model, const std::vector<std::string>& labels,
                 const std::string& svg_path, const std::string& csv_path,
                 int grid_points = 101);

}  // namespace pnsreg::figures
