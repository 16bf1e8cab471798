#include "pnsreg/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pnsreg/errors.hpp"
#include "pnsreg/simplex.hpp"

namespace pnsreg::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Write content to path atomically via a sibling temp file.
void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot replace " + path + ": " + ec.message());
  }
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(vec_to_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows, Eigen::Index cols_hint) {
  if (rows.empty()) return Eigen::MatrixXd(0, cols_hint);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) =
        vec_from_json(rows[i]).transpose();
  return m;
}

std::string selection_to_string(pns::Selection s) {
  switch (s) {
    case pns::Selection::Bic: return "bic";
    case pns::Selection::VarianceTest: return "variance";
    case pns::Selection::ForcedGreat: return "great";
    case pns::Selection::ForcedSmall: return "small";
  }
  return "bic";
}

pns::Selection selection_from_string(const std::string& s) {
  if (s == "variance") return pns::Selection::VarianceTest;
  if (s == "great") return pns::Selection::ForcedGreat;
  if (s == "small") return pns::Selection::ForcedSmall;
  return pns::Selection::Bic;
}

}  // namespace

DataTable read_table(const std::string& path,
                     const std::vector<std::string>& response_cols,
                     const std::vector<std::string>& predictor_cols) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file: " + path);
  const std::vector<std::string> header = split_line(line);

  auto column_index = [&](const std::string& name) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    throw DataError("column '" + name + "' not found in " + path);
  };
  std::vector<int> yidx, xidx;
  for (const auto& c : response_cols) yidx.push_back(column_index(c));
  for (const auto& c : predictor_cols) xidx.push_back(column_index(c));

  std::vector<Eigen::VectorXd> yrows, xrows;
  int dropped = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_line(line);

    bool blank = false;
    for (int j : yidx)
      if (j >= static_cast<int>(cells.size()) || cells[j].empty()) blank = true;
    for (int j : xidx)
      if (j >= static_cast<int>(cells.size()) || cells[j].empty()) blank = true;
    if (blank) {
      ++dropped;
      continue;
    }

    auto cell_value = [&](int j) {
      double v;
      if (!parse_double(cells[j], v))
        throw DataError("unparseable value '" + cells[j] + "' at row " +
                        std::to_string(lineno) + ", column '" + header[j] + "'");
      return v;
    };

    Eigen::VectorXd y(yidx.size());
    for (std::size_t k = 0; k < yidx.size(); ++k) {
      y[static_cast<Eigen::Index>(k)] = cell_value(yidx[k]);
      if (y[static_cast<Eigen::Index>(k)] < 0.0)
        throw DataError("negative response value at row " + std::to_string(lineno) +
                        ", column '" + header[yidx[k]] + "'");
    }
    Eigen::VectorXd x(xidx.size());
    for (std::size_t k = 0; k < xidx.size(); ++k)
      x[static_cast<Eigen::Index>(k)] = cell_value(xidx[k]);

    if (y.size() > 0) {
      try {
        y = simplex::normalize(y);
      } catch (const DataError&) {
        throw DataError("row " + std::to_string(lineno) +
                        ": response parts are all zero, cannot normalize");
      }
    }
    yrows.push_back(y);
    xrows.push_back(x);
  }

  DataTable t;
  t.response_cols = response_cols;
  t.predictor_cols = predictor_cols;
  t.dropped_rows = dropped;
  t.Y.resize(static_cast<Eigen::Index>(yrows.size()),
             static_cast<Eigen::Index>(response_cols.size()));
  t.X.resize(static_cast<Eigen::Index>(xrows.size()),
             static_cast<Eigen::Index>(predictor_cols.size()));
  for (std::size_t i = 0; i < yrows.size(); ++i) {
    t.Y.row(static_cast<Eigen::Index>(i)) = yrows[i].transpose();
    t.X.row(static_cast<Eigen::Index>(i)) = xrows[i].transpose();
  }
  return t;
}

void write_text(const std::string& path, const std::string& content) {
  atomic_write(path, content);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols())
    throw DataError("write_csv: header size does not match column count");
  std::ostringstream out;
  for (std::size_t j = 0; j < header.size(); ++j)
    out << (j ? "," : "") << header[j];
  out << "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      out << (j ? "," : "") << format_full(values(i, j));
    out << "\n";
  }
  atomic_write(path, out.str());
}

void write_model(const std::string& path, const ModelFile& model) {
  json levels = json::array();
  for (const auto& lvl : model.pns.levels) {
    levels.push_back({{"axis", vec_to_json(lvl.axis)},
                      {"angle", lvl.angle},
                      {"kind", lvl.kind == geom::SphereKind::Great ? "great" : "small"}});
  }
  json j = {
      {"format_version", model.format_version},
      {"alpha", model.alpha},
      {"pns",
       {{"d", model.pns.d},
        {"levels", levels},
        {"final_mean_angle", model.pns.final_mean_angle},
        {"score_scales", model.pns.score_scales},
        {"rho", model.pns.rho},
        {"selection", selection_to_string(model.pns.selection)},
        {"degenerate", model.pns.degenerate}}},
      {"response_cols", model.response_cols},
      {"predictor_cols", model.predictor_cols},
      {"provenance",
       {{"seed", model.seed}, {"selection", model.selection}, {"fitted_at", model.fitted_at}}},
  };
  if (model.pns.degenerate)
    j["pns"]["degenerate_base"] = vec_to_json(model.pns.degenerate_base);
  if (model.regression) {
    j["regression"] = {
        {"beta_circular", vec_to_json(model.regression->beta_circular)},
        {"B_linear", mat_to_json(model.regression->B_linear)},
        {"k_used", model.regression->k_used},
        {"residual_variances", vec_to_json(model.regression->residual_variances)}};
  }
  atomic_write(path, j.dump(2) + "\n");
}

ModelFile read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("corrupt model file " + path + ": " + e.what());
  }

  ModelFile m;
  try {
    m.format_version = j.at("format_version");
    if (m.format_version > 1)
      throw DataError("model file " + path + " has format_version " +
                      std::to_string(m.format_version) + "; this build reads version 1");
    m.alpha = j.at("alpha");

    const json& p = j.at("pns");
    m.pns.d = p.at("d");
    m.pns.alpha = m.alpha;
    for (const auto& lvl : p.at("levels")) {
      geom::Subsphere s;
      s.axis = vec_from_json(lvl.at("axis"));
      s.angle = lvl.at("angle");
      s.kind = lvl.at("kind") == "great" ? geom::SphereKind::Great
                                         : geom::SphereKind::Small;
      m.pns.levels.push_back(s);
    }
    m.pns.final_mean_angle = p.at("final_mean_angle");
    m.pns.score_scales = p.at("score_scales").get<std::vector<double>>();
    m.pns.rho = p.at("rho");
    m.pns.selection = selection_from_string(p.value("selection", "bic"));
    m.pns.degenerate = p.value("degenerate", false);
    if (m.pns.degenerate) m.pns.degenerate_base = vec_from_json(p.at("degenerate_base"));

    m.response_cols = j.value("response_cols", std::vector<std::string>{});
    m.predictor_cols = j.value("predictor_cols", std::vector<std::string>{});

    if (j.contains("provenance")) {
      const json& prov = j["provenance"];
      m.seed = prov.value("seed", std::uint64_t{0});
      m.selection = prov.value("selection", std::string{"bic"});
      m.fitted_at = prov.value("fitted_at", std::string{});
    }

    if (j.contains("regression")) {
      const json& r = j["regression"];
      regress::RegressionModel reg;
      reg.beta_circular = vec_from_json(r.at("beta_circular"));
      reg.k_used = r.at("k_used");
      reg.B_linear = mat_from_json(r.at("B_linear"), reg.beta_circular.size());
      reg.residual_variances = vec_from_json(r.at("residual_variances"));
      m.regression = reg;
    }
  } catch (const DataError&) {
    throw;
  } catch (const json::exception& e) {
    throw DataError("corrupt model file " + path + ": " + e.what());
  }
  return m;
}

}  // namespace pnsreg::io
