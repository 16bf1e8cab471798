#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pnsreg/pns.hpp"
#include "pnsreg/regress.hpp"

namespace pnsreg::io {

struct DataTable {
  std::vector<std::string> response_cols;
  std::vector<std::string> predictor_cols;
  Eigen::MatrixXd Y;  // compositions, unit-sum normalized
  Eigen::MatrixXd X;  // predictors
  int dropped_rows = 0;
};

// Parse a comma-separated file with a header row. Response rows are
// normalized to compositions; rows with a blank cell in any declared column
// are dropped (counted). Errors cite the offending row and column.
DataTable read_table(const std::string& path,
                     const std::vector<std::string>& response_cols,
                     const std::vector<std::string>& predictor_cols);

// Write a numeric CSV with full double precision, atomically (temp + rename).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

// Atomic plain-text write (temp + rename), used for SVG and report files.
void write_text(const std::string& path, const std::string& content);

// Serialized fit: PNS parameters plus the optional score regression.
struct ModelFile {
  int format_version = 1;
  double alpha = 0.5;
  pns::PnsModel pns;
  std::optional<regress::RegressionModel> regression;
  std::vector<std::string> response_cols;
  std::vector<std::string> predictor_cols;
  // provenance
  std::uint64_t seed = 0;
  std::string selection = "bic";
  std::string fitted_at;  // ISO 8601, informational only
};

// JSON document with a format_version field; numbers round-trip at full
// precision. write_model is atomic; read_model rejects corrupt files and
// newer major versions, and fills defaults for absent optional fields.
void write_model(const std::string& path, const ModelFile& model);
ModelFile read_model(const std::string& path);

}  // namespace pnsreg::io
