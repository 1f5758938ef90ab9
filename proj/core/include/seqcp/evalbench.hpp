#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqcp/core.hpp"
#include "seqcp/dp_search.hpp"
#include "seqcp/simgen.hpp"

namespace seqcp {

// Fraction of index pairs on which two segmentations of the same T agree,
// via contingency counts. Throws LengthMismatch when the lengths differ.
double rand_index(const Segmentation& a, const Segmentation& b);

struct BenchConfig {
  PenaltySpec penalty = PenaltySpec::automatic();
  SearchOptions search;
  // Unset: se_defaults() for the scenario's model.
  std::optional<SeOptions> se;
  // Lasso only. Unset: estimated per dataset by estimate_sigma_hat().
  std::optional<double> sigma_hat;
  // Cells run concurrently when > 1; each detection itself is sequential.
  int threads = 1;
};

struct BenchRecord {
  Scenario scenario;
  std::uint64_t seed = 0;
  Method method = Method::Pelt;
  double rand_index = 0.0;
  Index k_detected = 0;
  Index k_true = 0;
  double elapsed_seconds = 0.0;
  double objective = 0.0;
  bool failed = false;
  std::string error;
};

// Runs every (scenario, rep, method) cell; rep r of a scenario uses seed
// scenario.seed + r. Failures become rows with failed = true.
std::vector<BenchRecord> run_benchmark(std::span<const Scenario> grid,
                                       std::span<const Method> methods, int reps,
                                       const BenchConfig& cfg = {});

struct BenchSummary {
  std::string scenario;
  Method method = Method::Pelt;
  int runs = 0;
  int failed = 0;
  double mean_rand_index = 0.0;
  double rand_index_half_width = 0.0;  // 2 standard errors
  double mean_elapsed = 0.0;
  double elapsed_half_width = 0.0;
  double mean_k_detected = 0.0;
};

// Mean +- 2 SE per (scenario, method), in first-appearance order. Failed
// rows are counted but excluded from the means.
std::vector<BenchSummary> summarize(std::span<const BenchRecord> records);

struct ConvergenceConfig {
  std::vector<Index> n_grid{100, 400, 1600};
  int seeds = 20;
  // Scalar preconditioner constants to sweep; an empty optional means "auto",
  // the smallest eigenvalue of the averaged Hessian at the exact minimizer.
  std::vector<std::optional<double>> mus{std::nullopt};
  ModelKind model = ModelKind::Logistic;
  // Data are x = (1, u), u ~ U(-1, 1), drawn once per n from data_seed.
  Vector theta0 = (Vector(2) << 0.5, -1.0).finished();
  std::uint64_t data_seed = 1;
  double radius = 100.0;
};

struct ConvergenceRow {
  Index n = 0;
  std::uint64_t seed = 0;
  double gap = 0.0;
  double mu = 0.0;
};

struct ConvergenceCurve {
  double mu = 0.0;
  bool mu_auto = false;
  std::vector<Index> n;
  std::vector<double> mean_gap;
  double slope = 0.0;  // least-squares slope of log(mean gap) on log(n)
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceCurve> curves;  // one per entry of cfg.mus
};

// For each n: generate no-change data, and for each seed permute the rows,
// run the scalar sequential updates from theta = 0 and record
// gap = F_n(theta_bar) - F_n(theta_hat) with F_n the average loss.
ConvergenceResult convergence_experiment(const ConvergenceConfig& cfg);

}  // namespace seqcp
