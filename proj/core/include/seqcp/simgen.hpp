#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "seqcp/core.hpp"

namespace seqcp {

enum class Family { Logistic, Poisson, LassoLinear };
enum class Magnitude { Small, Medium, Large };

std::string_view to_string(Family f) noexcept;
std::string_view to_string(Magnitude m) noexcept;
Family parse_family(std::string_view name);
Magnitude parse_magnitude(std::string_view name);

// One simulation design. Change-point locations are the T = 1500 reference
// positions rescaled to T and rounded to the nearest integer.
struct Scenario {
  Family family = Family::Logistic;
  Index T = 1500;
  Index d = 1;
  int k = 1;  // 0, 1, 3 or 5
  Magnitude magnitude = Magnitude::Medium;
  std::uint64_t seed = 1;
  int sparsity = 1;  // nonzero coefficients, lasso only

  std::string id() const;
  // Throws InvalidScenario naming the offending field.
  void validate() const;
};

struct SimulatedData {
  DataSequence data;
  Segmentation truth;
  std::vector<Vector> segment_params;
  Vector delta;                    // GLM families: the change vector
  std::vector<Index> support;      // lasso: 0-based nonzero coordinates
};

// Change size M(delta) = delta' Sigma delta for each family and magnitude.
double change_magnitude(Family f, Magnitude m) noexcept;

std::vector<Index> default_change_points(int k, Index T);

// Sigma_ij = rho^|i - j|.
Matrix ar1_covariance(Index d, double rho);

// Baseline coefficients of the first segment: 1.2 for d = 1, otherwise the
// first d entries of (1, 1.2, -1, 0.5, -2) repeated cyclically.
Vector baseline_coefficients(Index d);

// delta = c * 1_d with c chosen so that delta' Sigma delta = target_m.
Vector make_delta(Index d, double target_m, const Matrix& sigma);

SimulatedData gen_glm(const Scenario& s);
SimulatedData gen_lasso(const Scenario& s);
SimulatedData simulate(const Scenario& s);

struct NoiseEstimate {
  double sigma_hat = 0.0;
  int blocks_used = 0;
  bool fell_back = false;  // fewer than 20 observations: two blocks were used
};

// Averages per-block residual scales sqrt(RSS / n_b) of Lasso fits with
// lambda = sqrt(2 log(d) / n_b) over `blocks` near-equal blocks.
NoiseEstimate estimate_sigma_hat(const DataSequence& data, int blocks = 10);

}  // namespace seqcp
