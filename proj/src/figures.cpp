#include "pnsreg/figures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pnsreg/errors.hpp"
#include "pnsreg/io.hpp"
#include "pnsreg/simplex.hpp"

namespace pnsreg::figures {

namespace {

constexpr double kPi = std::numbers::pi;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::array<double, 2> ternary_xy(const Eigen::VectorXd& comp) {
  if (comp.size() != 3) throw DataError("ternary_xy: need a 3-part composition");
  const double x = comp[1] + 0.5 * comp[2];
  const double y = comp[2] * std::sqrt(3.0) / 2.0;
  return {x, y};
}

TernaryCurve ternary_curve(const pns::PnsModel& model, int n_samples) {
  if (model.d != 2) throw DataError("ternary_curve: model must have d = 2");
  TernaryCurve c;
  c.s1.resize(n_samples);
  c.sphere.resize(n_samples, 3);
  c.simplex.resize(n_samples, 3);
  c.truncated.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double t = -kPi + 2.0 * kPi * i / n_samples;  // angle around the circle
    Eigen::VectorXd s(2);
    s << model.rho * t, 0.0;
    const Eigen::VectorXd q = pns::scores_to_sphere(model, s);
    c.s1[i] = s[0];
    c.sphere.row(i) = q.transpose();
    c.truncated[i] = q.minCoeff() < 0.0 ? 1.0 : 0.0;
    // Flip to the antipode (same composition) when the sample has no positive
    // coordinate left to truncate onto.
    const Eigen::VectorXd rep = q.maxCoeff() > 0.0 ? q : Eigen::VectorXd(-q);
    c.simplex.row(i) =
        simplex::inverse_power_transform(simplex::orthant_truncate(rep), model.alpha)
            .transpose();
  }
  return c;
}

void plot_ternary(const Eigen::MatrixXd& Y, const pns::PnsModel& model,
                  const std::vector<std::string>& labels,
                  const std::string& svg_path, const std::string& csv_path) {
  if (Y.cols() != 3) throw DataError("plot_ternary: need 3-part compositions");
  if (labels.size() != 3) throw DataError("plot_ternary: need 3 corner labels");

  const TernaryCurve curve = ternary_curve(model);

  // Curve CSV: score grid, raw sphere point, simplex point, truncation flag.
  {
    std::vector<std::string> header = {"s1", "q1", "q2", "q3"};
    for (const auto& l : labels) header.push_back(l);
    header.push_back("truncated");
    Eigen::MatrixXd rows(curve.s1.size(), 8);
    rows.col(0) = curve.s1;
    rows.middleCols(1, 3) = curve.sphere;
    rows.middleCols(4, 3) = curve.simplex;
    rows.col(7) = curve.truncated;
    io::write_csv(csv_path, header, rows);
  }

  const double side = 480.0, margin = 60.0;
  const double height = margin * 2 + side * std::sqrt(3.0) / 2.0;
  const double width = margin * 2 + side;
  auto px = [&](const std::array<double, 2>& xy) {
    return std::array<double, 2>{margin + xy[0] * side,
                                 height - margin - xy[1] * side};
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
      << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " "
      << fmt(height) << "\">\n";

  // Triangle outline.
  const std::array<double, 2> corners[3] = {
      px({0.0, 0.0}), px({1.0, 0.0}), px({0.5, std::sqrt(3.0) / 2.0})};
  svg << "<path d=\"M " << fmt(corners[0][0]) << " " << fmt(corners[0][1]) << " L "
      << fmt(corners[1][0]) << " " << fmt(corners[1][1]) << " L "
      << fmt(corners[2][0]) << " " << fmt(corners[2][1])
      << " Z\" fill=\"none\" stroke=\"#333\" stroke-width=\"1.5\"/>\n";

  const double lab_off[3][2] = {{-10, 18}, {10, 18}, {0, -12}};
  const char* anchor[3] = {"end", "start", "middle"};
  for (int k = 0; k < 3; ++k)
    svg << "<text x=\"" << fmt(corners[k][0] + lab_off[k][0]) << "\" y=\""
        << fmt(corners[k][1] + lab_off[k][1]) << "\" text-anchor=\"" << anchor[k]
        << "\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(labels[k])
        << "</text>\n";

  // Fitted curve (closed around the circle).
  svg << "<path d=\"";
  for (Eigen::Index i = 0; i < curve.simplex.rows(); ++i) {
    const auto p = px(ternary_xy(curve.simplex.row(i).transpose()));
    svg << (i == 0 ? "M " : "L ") << fmt(p[0]) << " " << fmt(p[1]) << " ";
  }
  svg << "Z\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";

  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const auto p = px(ternary_xy(Y.row(i).transpose()));
    svg << "<circle cx=\"" << fmt(p[0]) << "\" cy=\"" << fmt(p[1])
        << "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n";
  }

  const Eigen::VectorXd mean_comp = simplex::inverse_power_transform(
      simplex::orthant_truncate(pns::pns_mean(model)), model.alpha);
  const auto mp = px(ternary_xy(mean_comp));
  svg << "<circle cx=\"" << fmt(mp[0]) << "\" cy=\"" << fmt(mp[1])
      << "\" r=\"6\" fill=\"#ffbf00\" stroke=\"#333\" stroke-width=\"1.5\"/>\n";

  svg << "</svg>\n";
  io::write_text(svg_path, svg.str());
}

void plot_biplot(const pns::PnsModel& model, const std::vector<std::string>& labels,
                 const std::string& svg_path, const std::string& csv_path,
                 int grid_points) {
  const int d = model.d;
  if (static_cast<int>(labels.size()) != d + 1)
    throw DataError("plot_biplot: need one label per composition part");
  if (grid_points < 5) throw DataError("plot_biplot: grid too small");

  const int n_indices = d >= 2 && !model.degenerate ? 2 : 1;

  std::vector<Eigen::MatrixXd> tables;  // per score index: grid x (2 + d+1)
  for (int si = 1; si <= n_indices; ++si) {
    double lo, hi;
    if (si == 1) {
      lo = -0.98 * model.rho * kPi;
      hi = 0.98 * model.rho * kPi;
    } else {
      const int fit_idx = d - si + 1;
      const double r = model.levels.at(fit_idx - 1).angle;
      const double c = model.score_scales[fit_idx - 1];
      const double span = 0.98 * std::min(r, kPi - r) * c;  // symmetric about 0
      lo = -span;
      hi = span;
    }
    std::vector<double> grid(grid_points);
    for (int i = 0; i < grid_points; ++i)
      grid[i] = lo + (hi - lo) * i / (grid_points - 1);
    const pns::PathTable paths = pns::biplot_paths(model, si, grid);

    Eigen::MatrixXd table(grid_points, 2 + d + 1);
    for (int i = 0; i < grid_points; ++i) {
      table(i, 0) = si;
      table(i, 1) = grid[i];
      Eigen::VectorXd q = paths.coords.row(i).transpose();
      if (q.maxCoeff() <= 0.0) q = -q;  // antipode carries the same composition
      const Eigen::VectorXd comp = simplex::inverse_power_transform(
          simplex::orthant_truncate(q), model.alpha);
      table.row(i).tail(d + 1) = comp.transpose();
    }
    tables.push_back(table);
  }

  {
    std::vector<std::string> header = {"score_index", "t"};
    for (const auto& l : labels) header.push_back(l);
    Eigen::MatrixXd all(grid_points * n_indices, 2 + d + 1);
    for (int si = 0; si < n_indices; ++si)
      all.middleRows(si * grid_points, grid_points) = tables[si];
    io::write_csv(csv_path, header, all);
  }

  // One panel per score index, parts as colored paths over the score grid.
  const double pw = 420.0, ph = 300.0, margin = 50.0, gap = 40.0;
  const double width = margin * 2 + pw * n_indices + gap * (n_indices - 1);
  const double height = margin * 2 + ph + 30.0 * ((d + 1 + 3) / 4);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
      << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " "
      << fmt(height) << "\">\n";

  for (int si = 0; si < n_indices; ++si) {
    const double x0 = margin + si * (pw + gap);
    const double y0 = margin;
    const Eigen::MatrixXd& table = tables[si];
    const double tmin = table.col(1).minCoeff(), tmax = table.col(1).maxCoeff();

    svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt(x0 + pw / 2) << "\" y=\"" << fmt(y0 - 10)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << "score " << (si + 1) << "</text>\n";
    // zero-score anchor line (paths meet at the PNS mean here)
    const double xz = x0 + (0.0 - tmin) / (tmax - tmin) * pw;
    svg << "<line x1=\"" << fmt(xz) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(xz)
        << "\" y2=\"" << fmt(y0 + ph)
        << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";

    for (int j = 0; j < d + 1; ++j) {
      svg << "<path d=\"";
      for (int i = 0; i < grid_points; ++i) {
        const double x = x0 + (table(i, 1) - tmin) / (tmax - tmin) * pw;
        const double y = y0 + ph - table(i, 2 + j) * ph;
        svg << (i == 0 ? "M " : "L ") << fmt(x) << " " << fmt(y) << " ";
      }
      svg << "\" fill=\"none\" stroke=\"" << kPalette[j % 8]
          << "\" stroke-width=\"2\"/>\n";
    }
  }

  for (int j = 0; j < d + 1; ++j) {
    const double lx = margin + (j % 4) * 140.0;
    const double ly = margin + ph + 25.0 + (j / 4) * 22.0;
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << fmt(lx + 24) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\""
        << kPalette[j % 8] << "\" stroke-width=\"3\"/>\n";
    svg << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(labels[j])
        << "</text>\n";
  }

  svg << "</svg>\n";
  io::write_text(svg_path, svg.str());
}

}  // namespace pnsreg::figures
