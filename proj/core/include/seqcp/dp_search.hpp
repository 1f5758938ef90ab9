#pragma once

#include <functional>
#include <span>

#include "seqcp/core.hpp"
#include "seqcp/cost_models.hpp"
#include "seqcp/exact_solvers.hpp"
#include "seqcp/seq_engine.hpp"

namespace seqcp {

// Options shared by exact DP and PELT.
struct SearchOptions {
  SolverConfig solver;
  // Candidates whose segment would be shorter than this are skipped.
  Index min_segment_length = 1;
  int threads = 1;
};

struct SeOptions {
  EngineConfig engine;
  SolverConfig solver;  // block initialization fits
  int epochs = 1;
  int init_blocks = 10;
  bool fast_cost = false;
  bool prune = true;
  bool post_process = true;
  Index min_boundary = 0;  // 0 selects max(2, ceil(0.01 T))
  Index min_gap = 0;       // 0 selects max(2, ceil(0.01 T))
  Index min_segment_length = 1;
  int threads = 1;
};

// SE defaults per model: Fisher-scoring quasi-Newton (inverse preconditioner)
// for the GLMs, scalar eta_t = t mu / 2 gradient descent for the Lasso.
SeOptions se_defaults(ModelKind kind);

// Optimal partitioning: F(t) = min_{0 <= tau < t} F(tau) + C(tau+1:t) + beta
// with F(0) = -beta, evaluating every candidate at every t.
DetectionResult exact_dp(const DataSequence& data, const CostModel& model, double beta,
                         const SearchOptions& opts = {});

// Optimal partitioning restricted to the PELT candidate sets
// R_{t+1} = {tau in R_t u {t} : F(tau) + C(tau+1:t) <= F(t)}.
DetectionResult pelt(const DataSequence& data, const CostModel& model, double beta,
                     const SearchOptions& opts = {});

// Sequential search: exact costs are replaced by the approximate costs of the
// per-candidate sequential states, which also drive pruning.
DetectionResult se_search(const DataSequence& data, const CostModel& model, double beta,
                          const SeOptions& opts = {});

// Follows last_cp pointers (indexed 0..T, last_cp[t] = tau*) back from T.
Segmentation backtrack(std::span<const Index> last_cp, Index T);

// Cost of one segment, used by post_process to arbitrate between close change-points.
using SegmentCostFn = std::function<double(SegmentRange)>;

// Drops change-points closer than min_boundary to either end, then resolves
// every pair closer than min_gap by removing the one whose removal yields the
// lower total cost (the later one when no cost function is given or on ties).
Segmentation post_process(const Segmentation& seg, Index min_boundary, Index min_gap,
                          const SegmentCostFn& cost = {});

Index default_post_process_threshold(Index T) noexcept;

struct DetectOptions {
  Method method = Method::Se;
  PenaltySpec penalty = PenaltySpec::automatic();
  SearchOptions search;
  SeOptions se;
};

// Resolves the penalty (d = parameter dimension) and runs the chosen method.
DetectionResult detect(const DataSequence& data, const CostModel& model, const DetectOptions& opts);

}  // namespace seqcp
