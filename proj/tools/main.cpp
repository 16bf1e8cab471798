// pnsreg: regression with compositional responses through a sphere embedding
// and principal nested spheres. Subcommands cover the two-stage fit, score
// prediction, simulation, a cross-validated benchmark of seven methods, and
// figure emitters.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnsreg/baselines.hpp"
#include "pnsreg/errors.hpp"
#include "pnsreg/eval.hpp"
#include "pnsreg/figures.hpp"
#include "pnsreg/io.hpp"
#include "pnsreg/pns.hpp"
#include "pnsreg/regress.hpp"
#include "pnsreg/simplex.hpp"

namespace {

using namespace pnsreg;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

pns::Selection resolve_selection(const std::string& selection,
                                 const std::string& force_kind) {
  if (force_kind == "great") return pns::Selection::ForcedGreat;
  if (force_kind == "small") return pns::Selection::ForcedSmall;
  if (selection == "variance") return pns::Selection::VarianceTest;
  return pns::Selection::Bic;
}

std::string selection_name(pns::Selection s) {
  switch (s) {
    case pns::Selection::Bic: return "bic";
    case pns::Selection::VarianceTest: return "variance";
    case pns::Selection::ForcedGreat: return "great";
    case pns::Selection::ForcedSmall: return "small";
  }
  return "bic";
}

Eigen::MatrixXd to_sphere_columns(const Eigen::MatrixXd& Y, double alpha) {
  Eigen::MatrixXd Q(Y.cols(), Y.rows());
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    Q.col(i) = simplex::power_transform(Y.row(i).transpose(), alpha);
  return Q;
}

void print_fit_report(const pns::PnsFit& fit) {
  const auto& m = fit.model;
  for (std::size_t k = 0; k < m.levels.size(); ++k) {
    const auto& lvl = m.levels[k];
    std::printf("level %zu on S^%d: %s, r = %.6f\n", k + 1,
                m.d - static_cast<int>(k),
                lvl.kind == geom::SphereKind::Great ? "great" : "small", lvl.angle);
  }
  if (m.degenerate) {
    std::printf("descent stopped early: remaining points coincide\n");
    return;
  }
  std::printf("circle radius rho = %.6f, mean angle = %.6f\n", m.rho,
              m.final_mean_angle);
  try {
    const Eigen::VectorXd ve = pns::variance_explained(fit.scores);
    std::printf("variance explained:");
    for (Eigen::Index j = 0; j < ve.size(); ++j)
      std::printf(" s%ld %.1f%%", j + 1, 100.0 * ve[j]);
    std::printf("\n");
  } catch (const NumericalError&) {
    std::printf("variance explained: undefined (zero total variance)\n");
  }
}

struct FitFlags {
  std::string data, out;
  std::string response_cols, predictor_cols;
  double alpha = 0.5;
  std::string selection = "bic", force_kind, scores = "all";
  std::uint64_t seed = 0;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_scores) {
  cmd->add_option("--data", f.data, "input CSV file")->required();
  cmd->add_option("--response-cols", f.response_cols,
                  "comma-separated composition part columns")
      ->required();
  cmd->add_option("--predictor-cols", f.predictor_cols,
                  "comma-separated predictor columns")
      ->required();
  cmd->add_option("--alpha", f.alpha, "power transform exponent (default 0.5)");
  cmd->add_option("--selection", f.selection, "great/small rule: bic or variance")
      ->check(CLI::IsMember({"bic", "variance"}));
  cmd->add_option("--force-kind", f.force_kind, "force every level great or small")
      ->check(CLI::IsMember({"great", "small"}));
  if (with_scores)
    cmd->add_option("--scores", f.scores, "number of scores to regress: all or K");
  cmd->add_option("--seed", f.seed, "seed recorded in provenance");
  cmd->add_option("--out", f.out, "output model file")->required();
}

int run_fit(const FitFlags& f, bool with_regression) {
  const auto ycols = split_csv_list(f.response_cols);
  const auto xcols = split_csv_list(f.predictor_cols);
  const io::DataTable table = io::read_table(f.data, ycols, xcols);
  if (table.dropped_rows > 0)
    std::fprintf(stderr, "dropped %d row(s) with missing values\n", table.dropped_rows);

  const pns::Selection sel = resolve_selection(f.selection, f.force_kind);
  const pns::PnsFit fit =
      pns::fit_pns(to_sphere_columns(table.Y, f.alpha), sel, f.alpha);
  print_fit_report(fit);

  io::ModelFile mf;
  mf.alpha = f.alpha;
  mf.pns = fit.model;
  mf.response_cols = table.response_cols;
  mf.predictor_cols = table.predictor_cols;
  mf.seed = f.seed;
  mf.selection = selection_name(sel);
  mf.fitted_at = now_iso8601();

  if (with_regression) {
    int k_used = fit.model.d;
    if (f.scores != "all") {
      try {
        k_used = std::stoi(f.scores);
      } catch (const std::exception&) {
        throw DataError("--scores must be 'all' or an integer");
      }
    }
    mf.regression = regress::fit_score_regression(
        fit.scores, regress::make_design(table.X), k_used, fit.model);
    std::printf("score regression fitted with k_used = %d\n",
                mf.regression->k_used);
  }

  io::write_model(f.out, mf);
  std::printf("model written to %s\n", f.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional regression via sphere embedding and principal nested spheres"};
  app.require_subcommand(1);

  FitFlags fit_flags;
  CLI::App* cmd_fit = app.add_subcommand("fit", "two-stage fit: PNS + score regression");
  add_fit_flags(cmd_fit, fit_flags, true);

  FitFlags pns_flags;
  CLI::App* cmd_pns = app.add_subcommand("pns", "stage 1 only: fit the PNS decomposition");
  add_fit_flags(cmd_pns, pns_flags, false);

  struct {
    std::string model, data, out;
  } predict_flags;
  CLI::App* cmd_predict = app.add_subcommand("predict", "predict compositions from a model");
  cmd_predict->add_option("--model", predict_flags.model, "fitted model file")->required();
  cmd_predict->add_option("--data", predict_flags.data, "CSV with predictor columns")->required();
  cmd_predict->add_option("--out", predict_flags.out, "output CSV")->required();

  struct {
    std::string out, phi_star;
    int n = 100;
    double sigma = 0.05;
    std::uint64_t seed = 0;
  } sim_flags;
  CLI::App* cmd_sim = app.add_subcommand("simulate", "draw a synthetic dataset");
  cmd_sim->add_option("--out", sim_flags.out, "output CSV")->required();
  cmd_sim->add_option("--n", sim_flags.n, "sample count (default 100)");
  cmd_sim->add_option("--sigma", sim_flags.sigma, "noise s.d. (default 0.05)");
  cmd_sim->add_option("--seed", sim_flags.seed, "random seed");
  cmd_sim->add_option("--phi-star", sim_flags.phi_star,
                      "generator model file (default: bundled synthetic model)");

  struct {
    std::string data, out, response_cols, predictor_cols, methods = "all";
    int splits = 100, jobs = 1, n = 100;
    double train_fraction = 0.8, alpha = 0.5, sigma = 0.05;
    std::uint64_t seed = 0;
    std::string selection = "bic", force_kind;
  } bench_flags;
  CLI::App* cmd_bench =
      app.add_subcommand("benchmark", "cross-validated PMSE of the seven methods");
  cmd_bench->add_option("--data", bench_flags.data,
                        "input CSV (omit to benchmark on a simulated dataset)");
  cmd_bench->add_option("--response-cols", bench_flags.response_cols,
                        "composition part columns (with --data)");
  cmd_bench->add_option("--predictor-cols", bench_flags.predictor_cols,
                        "predictor columns (with --data)");
  cmd_bench->add_option("--methods", bench_flags.methods,
                        "all or comma-separated method names");
  cmd_bench->add_option("--splits", bench_flags.splits, "number of random splits");
  cmd_bench->add_option("--train-fraction", bench_flags.train_fraction,
                        "training fraction (default 0.8)");
  cmd_bench->add_option("--alpha", bench_flags.alpha, "power transform exponent");
  cmd_bench->add_option("--selection", bench_flags.selection, "bic or variance")
      ->check(CLI::IsMember({"bic", "variance"}));
  cmd_bench->add_option("--force-kind", bench_flags.force_kind, "great or small")
      ->check(CLI::IsMember({"great", "small"}));
  cmd_bench->add_option("--seed", bench_flags.seed, "random seed");
  cmd_bench->add_option("--jobs", bench_flags.jobs, "parallel workers over splits");
  cmd_bench->add_option("--n", bench_flags.n, "simulated sample count (no --data)");
  cmd_bench->add_option("--sigma", bench_flags.sigma, "simulated noise s.d. (no --data)");
  cmd_bench->add_option("--out", bench_flags.out, "output CSV")->required();

  struct {
    std::string data, model, response_cols, out, curve_csv;
    double alpha = 0.5;
    std::string selection = "bic", force_kind;
  } tern_flags;
  CLI::App* cmd_tern = app.add_subcommand("plot-ternary", "ternary diagram with the fitted circle");
  cmd_tern->add_option("--data", tern_flags.data, "3-part composition CSV")->required();
  cmd_tern->add_option("--response-cols", tern_flags.response_cols,
                       "the three part columns")
      ->required();
  cmd_tern->add_option("--model", tern_flags.model,
                       "fitted model file (omit to fit here)");
  cmd_tern->add_option("--alpha", tern_flags.alpha, "power transform exponent");
  cmd_tern->add_option("--selection", tern_flags.selection, "bic or variance")
      ->check(CLI::IsMember({"bic", "variance"}));
  cmd_tern->add_option("--force-kind", tern_flags.force_kind, "great or small")
      ->check(CLI::IsMember({"great", "small"}));
  cmd_tern->add_option("--out", tern_flags.out, "output SVG")->required();
  cmd_tern->add_option("--curve-csv", tern_flags.curve_csv,
                       "output CSV of curve coordinates")
      ->required();

  struct {
    std::string model, out, csv;
    int grid_points = 101;
  } biplot_flags;
  CLI::App* cmd_biplot = app.add_subcommand("plot-biplot", "per-part score-sweep paths");
  cmd_biplot->add_option("--model", biplot_flags.model, "fitted model file")->required();
  cmd_biplot->add_option("--out", biplot_flags.out, "output SVG")->required();
  cmd_biplot->add_option("--csv", biplot_flags.csv, "output CSV of paths")->required();
  cmd_biplot->add_option("--grid-points", biplot_flags.grid_points,
                         "samples per score sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_fit) return run_fit(fit_flags, true);
    if (*cmd_pns) return run_fit(pns_flags, false);

    if (*cmd_predict) {
      const io::ModelFile mf = io::read_model(predict_flags.model);
      if (!mf.regression)
        throw DataError("model file has no regression stage; run 'fit' first");
      const io::DataTable table =
          io::read_table(predict_flags.data, {}, mf.predictor_cols);
      Eigen::MatrixXd pred(table.X.rows(), mf.pns.d + 1);
      for (Eigen::Index i = 0; i < table.X.rows(); ++i)
        pred.row(i) = regress::predict_composition(mf.pns, *mf.regression,
                                                   table.X.row(i).transpose())
                          .transpose();
      std::vector<std::string> header = mf.response_cols;
      if (header.empty())
        for (int j = 0; j < mf.pns.d + 1; ++j)
          header.push_back("part" + std::to_string(j + 1));
      io::write_csv(predict_flags.out, header, pred);
      if (regress::clamp_count() > 0)
        std::fprintf(stderr, "clamped %ld out-of-range score prediction(s)\n",
                     regress::clamp_count());
      std::printf("%lld prediction(s) written to %s\n",
                  static_cast<long long>(pred.rows()), predict_flags.out.c_str());
      return 0;
    }

    if (*cmd_sim) {
      pns::PnsModel phi = sim_flags.phi_star.empty()
                              ? eval::default_phi_star()
                              : io::read_model(sim_flags.phi_star).pns;
      eval::SimulationConfig cfg;
      cfg.n = sim_flags.n;
      cfg.sigma = sim_flags.sigma;
      cfg.seed = sim_flags.seed;
      const eval::Dataset ds = eval::simulate_dataset(phi, cfg);
      std::vector<std::string> header = {"x1", "x2"};
      for (int j = 0; j < phi.d + 1; ++j) header.push_back("y" + std::to_string(j + 1));
      Eigen::MatrixXd out(ds.X.rows(), ds.X.cols() + ds.Y.cols());
      out << ds.X, ds.Y;
      io::write_csv(sim_flags.out, header, out);
      std::printf("simulated %d observation(s) to %s\n", cfg.n, sim_flags.out.c_str());
      return 0;
    }

    if (*cmd_bench) {
      Eigen::MatrixXd X, Y;
      if (bench_flags.data.empty()) {
        eval::SimulationConfig scfg;
        scfg.n = bench_flags.n;
        scfg.sigma = bench_flags.sigma;
        scfg.seed = bench_flags.seed;
        const eval::Dataset ds = eval::simulate_dataset(eval::default_phi_star(), scfg);
        X = ds.X;
        Y = ds.Y;
      } else {
        if (bench_flags.response_cols.empty() || bench_flags.predictor_cols.empty())
          throw DataError("--data requires --response-cols and --predictor-cols");
        const io::DataTable table =
            io::read_table(bench_flags.data, split_csv_list(bench_flags.response_cols),
                           split_csv_list(bench_flags.predictor_cols));
        X = table.X;
        Y = table.Y;
      }

      eval::BenchmarkConfig cfg;
      cfg.n_splits = bench_flags.splits;
      cfg.train_fraction = bench_flags.train_fraction;
      cfg.seed = bench_flags.seed;
      cfg.jobs = bench_flags.jobs;
      cfg.alpha = bench_flags.alpha;
      cfg.selection = resolve_selection(bench_flags.selection, bench_flags.force_kind);
      if (bench_flags.methods != "all") {
        cfg.methods.clear();
        for (const auto& name : split_csv_list(bench_flags.methods)) {
          bool found = false;
          for (eval::Method m : eval::all_methods())
            if (eval::method_name(m) == name) {
              cfg.methods.push_back(m);
              found = true;
            }
          if (!found) throw DataError("unknown method '" + name + "'");
        }
      }

      const std::vector<eval::MethodResult> results = eval::cross_validate(X, Y, cfg);

      std::ostringstream csv;
      csv << "method,mean_pmse,sd_pmse,n_splits,failures\n";
      for (const auto& r : results) {
        std::printf("%-20s mean PMSE %8.3f  (sd %.3f, %d split(s), %d failure(s))\n",
                    eval::method_name(r.method).c_str(), r.mean_pmse, r.sd_pmse,
                    r.n_splits, r.failures);
        char line[160];
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%d,%d\n",
                      eval::method_name(r.method).c_str(), r.mean_pmse, r.sd_pmse,
                      r.n_splits, r.failures);
        csv << line;
      }
      io::write_text(bench_flags.out, csv.str());
      return 0;
    }

    if (*cmd_tern) {
      const auto ycols = split_csv_list(tern_flags.response_cols);
      if (ycols.size() != 3)
        throw DataError("plot-ternary requires exactly three response columns");
      const io::DataTable table = io::read_table(tern_flags.data, ycols, {});
      pns::PnsModel model;
      if (tern_flags.model.empty()) {
        const pns::Selection sel =
            resolve_selection(tern_flags.selection, tern_flags.force_kind);
        model = pns::fit_pns(to_sphere_columns(table.Y, tern_flags.alpha), sel,
                             tern_flags.alpha)
                    .model;
      } else {
        model = io::read_model(tern_flags.model).pns;
      }
      if (model.d != 2)
        throw DataError("plot-ternary requires a 3-part (d = 2) model");
      figures::plot_ternary(table.Y, model, ycols, tern_flags.out,
                            tern_flags.curve_csv);
      std::printf("ternary diagram written to %s\n", tern_flags.out.c_str());
      return 0;
    }

    if (*cmd_biplot) {
      const io::ModelFile mf = io::read_model(biplot_flags.model);
      std::vector<std::string> labels = mf.response_cols;
      if (labels.empty())
        for (int j = 0; j < mf.pns.d + 1; ++j)
          labels.push_back("part" + std::to_string(j + 1));
      figures::plot_biplot(mf.pns, labels, biplot_flags.out, biplot_flags.csv,
                           biplot_flags.grid_points);
      std::printf("biplot written to %s\n", biplot_flags.out.c_str());
      return 0;
    }
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
