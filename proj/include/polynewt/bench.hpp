#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polynewt/losses.hpp"
#include "polynewt/solvers.hpp"

namespace polynewt::bench {

using nlohmann::json;

struct ExperimentSpec {
  std::string kind;  // lasso | linf | tv1d | oscar | poisson_sr | remark34
  Index m = 0, n = 0;
  Index sparsity = 8;      // nonzeros (lasso) / maximal coordinates (linf)
  double lambda_c = 0.1;
  double noise_var = 1e-3;
  std::uint64_t seed = 7;
  // poisson_sr
  Index truth_side = 16;
  Index q = 2;
  double fwhm_lowres = 2.5;   // FWHM in low-res pixels; high-res = q * this
  double background = 1.0;
  Index n_sources = 8;
  double ref_tol = 1e-12;

  std::vector<SolverConfig> solvers;

  std::string id() const;
  static ExperimentSpec lasso(std::uint64_t seed);
  static ExperimentSpec linf(std::uint64_t seed);
  static ExperimentSpec tv(std::uint64_t seed);
  static ExperimentSpec oscar(std::uint64_t seed);
  static ExperimentSpec poisson_sr(std::uint64_t seed);
  static ExperimentSpec remark34();
};

struct GeneratedInstance {
  ProblemInstance prob;
  Vector x_star;   // ground truth
  Vector x0;       // protocol starting point
  double lambda = 0.0;
  std::uint64_t data_hash = 0;
  json manifest;
};

GeneratedInstance gen_lasso(const ExperimentSpec& spec);
GeneratedInstance gen_linf(const ExperimentSpec& spec);
GeneratedInstance gen_tv(const ExperimentSpec& spec);
GeneratedInstance gen_oscar(const ExperimentSpec& spec);
GeneratedInstance gen_poisson_sr(const ExperimentSpec& spec);
GeneratedInstance gen_remark34(const ExperimentSpec& spec);
GeneratedInstance generate(const ExperimentSpec& spec);

struct ResultRecord {
  std::string experiment;
  std::string method;
  std::string status;
  int iterations = 0;
  bool converged = false;
  std::int64_t wall_time_ns = 0;
  double terminal_kkt = kInf;
  double terminal_objective = kInf;
  double dist_to_ref = kInf;
  int newton_steps_accepted = 0;
  std::optional<int> identification_iter;
  std::optional<double> order_estimate;
  std::string error;  // per-run failure note; suite keeps going
};

struct SuiteResult {
  std::vector<ResultRecord> records;
  std::string summary_csv;
  std::uint64_t content_hash = 0;  // over the summary minus wall-time columns
  bool all_converged = false;
};

/// Named suites: "paper51" (the four regression configurations), "toy"
/// (the exactly-known two-dimensional fixture), "poisson" (desk-scale
/// super-resolution).
std::vector<ExperimentSpec> suite_specs(const std::string& name, std::uint64_t seed);

/// Generates, solves, analyzes and writes one CSV per run plus
/// summary.csv and a manifest per experiment under out_dir. Runs execute
/// concurrently up to POLYNEWT_THREADS. Empty spec list is a no-op success.
SuiteResult run_suite(const std::vector<ExperimentSpec>& specs,
                      const std::filesystem::path& out_dir);

}  // namespace polynewt::bench
