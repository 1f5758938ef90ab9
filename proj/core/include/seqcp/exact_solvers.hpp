#pragma once

#include "seqcp/core.hpp"
#include "seqcp/cost_models.hpp"

namespace seqcp {

// Inner-solver settings for exact segment costs. `radius` is the Euclidean
// ball that realizes the compact parameter space; every solver projects onto it.
struct SolverConfig {
  int max_iter = 100;
  double grad_tol = 1e-12;
  int step_halving_max = 20;
  double ridge = 1e-8;
  double radius = 100.0;
};

struct SegmentFit {
  double cost = 0.0;
  Vector theta;
  int iterations = 0;
  bool converged = true;
  // Fewer observations than parameters; the ridge term made it solvable.
  bool underdetermined = false;
};

Vector project_to_ball(Vector theta, double radius);

// min_theta sum l(z_i, theta) over the rows in `range` by damped Newton
// (Fisher scoring) with ridge-stabilized solves and step halving.
// GaussianMeanModel is delegated to its closed form.
SegmentFit glm_exact_cost(const DataSequence& data, SegmentRange range, const CostModel& model,
                          const SolverConfig& cfg = {});

// min_theta 1/2 sum (y_i - x_i'theta)^2 + lambda |theta|_1 by cyclic coordinate
// descent; the returned cost includes the penalty term.
SegmentFit lasso_exact_cost(const DataSequence& data, SegmentRange range, double lambda,
                            const SolverConfig& cfg = {});

// Exact segment cost C(z_{begin+1:end}) for any model: closed form, Newton, or
// coordinate descent with lambda = model.penalty_weight(range.size()).
SegmentFit exact_segment_cost(const DataSequence& data, SegmentRange range, const CostModel& model,
                              const SolverConfig& cfg = {});

// Summed loss (plus penalty for penalized models) at a fixed theta.
double segment_objective(const DataSequence& data, SegmentRange range, const CostModel& model,
                         const Vector& theta);

}  // namespace seqcp
