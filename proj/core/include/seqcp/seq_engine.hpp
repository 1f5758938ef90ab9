#pragma once

// Sequential per-candidate parameter tracking. Every surviving candidate
// change-point tau owns a SegmentState for the segment tau+1..t; each new
// observation advances it by one projected (proximal) quasi-Newton step
//
//   theta <- P(theta - H^{-1} grad l(z_t, theta) + a (theta - theta_prev))
//   H     <- H + A_t(theta)
//
// and the segment cost is approximated at the running average of iterates.

#include <optional>
#include <vector>

#include "seqcp/core.hpp"
#include "seqcp/cost_models.hpp"
#include "seqcp/exact_solvers.hpp"

namespace seqcp {

enum class PrecondMode {
  Scalar,   // H = eta I with eta_t = t mu / 2
  Dense,    // H accumulated as a dense matrix, solved by LDLT
  Inverse,  // H^{-1} maintained directly (Sherman-Morrison for rank-one updates)
};

std::string_view to_string(PrecondMode mode) noexcept;
PrecondMode parse_precond_mode(std::string_view name);

// How H_{t:t} of a fresh candidate is seeded (Dense/Inverse only).
enum class PrecondInit {
  Point,  // curvature of the single observation z_t plus eps0 I
  Block,  // summed curvature of z_t's initialization block at its estimate, plus eps0 I
};

std::string_view to_string(PrecondInit init) noexcept;
PrecondInit parse_precond_init(std::string_view name);

inline constexpr double kPrecondFloor = 1e-8;

struct EngineConfig {
  PrecondMode precond = PrecondMode::Inverse;
  PrecondInit precond_init = PrecondInit::Block;
  double mu = 1.0;
  // Block seeding: H_{t:t} = init_weight * (block curvature) + eps0 I.
  double init_weight = 1.0;
  double momentum = 0.0;
  double radius = 100.0;
  // Accumulate sum_i l(z_i, theta_{tau+1:i}) while stepping (fast-cost mode).
  bool track_running_loss = false;
};

class PrecondState {
 public:
  static PrecondState scalar(double mu);
  // `h` is H itself; Inverse mode stores and maintains its inverse.
  static PrecondState dense(Matrix h);
  static PrecondState inverse(const Matrix& h);

  PrecondMode kind() const noexcept { return kind_; }
  double eta() const noexcept { return eta_; }
  double mu() const noexcept { return mu_; }
  // H for Dense, H^{-1} for Inverse, empty for Scalar.
  const Matrix& stored() const noexcept { return mat_; }

  // H^{-1} g
  Vector solve(const Vector& g) const;
  // H <- H + A. Scalar mode ignores A and grows eta by mu / 2.
  void accumulate(const CurvatureUpdate& a);
  // Largest eigenvalue of H.
  double spectral_norm() const;
  Matrix matrix(Index d) const;

 private:
  PrecondMode kind_ = PrecondMode::Scalar;
  double eta_ = 0.0;
  double mu_ = 1.0;
  Matrix mat_;
};

struct SegmentState {
  Index start = 1;  // 1-based index of the first observation (tau + 1)
  Vector theta;
  PrecondState precond;
  Vector iterate_sum;
  Index count = 0;
  Vector prev_theta;
  double momentum = 0.0;
  double running_loss = 0.0;

  // 1-based index of the last observation absorbed.
  Index last() const noexcept { return start + count - 1; }
  SegmentRange range() const noexcept { return {start - 1, start - 1 + count}; }
};

struct InitialPoint {
  Vector theta;
  std::optional<Matrix> curvature;  // block curvature for PrecondInit::Block
};

// Preliminary per-block estimates used to seed fresh candidates: the data are
// cut into `blocks` near-equal blocks, each fitted exactly; theta_{t:t} is the
// estimate of the block containing t. With curvature, H_{t:t} is seeded by the
// block's summed curvature at that estimate, so the estimate enters with the
// weight of the data it came from.
class BlockInitializer {
 public:
  BlockInitializer(const DataSequence& data, const CostModel& model, int blocks,
                   const SolverConfig& solver, bool with_curvature);

  // t is 1-based.
  InitialPoint at(Index t) const;
  Index num_blocks() const noexcept { return static_cast<Index>(thetas_.size()); }
  const std::vector<Vector>& block_thetas() const noexcept { return thetas_; }

 private:
  std::vector<Index> bounds_;  // block j covers rows [bounds_[j], bounds_[j+1])
  std::vector<Vector> thetas_;
  std::vector<Matrix> curvatures_;
};

// State for the one-point segment {t}. theta_init is projected onto the ball.
SegmentState init_state(Index t, const InitialPoint& init, const ObservationView& z_t,
                        const CostModel& model, const EngineConfig& cfg);

// Absorbs the next observation z_{last()+1}. Throws StateDiverged on a
// non-finite gradient or iterate.
void se_step(SegmentState& state, const ObservationView& z, const CostModel& model,
             const EngineConfig& cfg);

Vector averaged_theta(const SegmentState& state);

// sum_{i in segment} l(z_i, theta_bar), plus lambda * pen(theta_bar) for penalized models.
double approx_cost(const SegmentState& state, const DataSequence& data, const CostModel& model);

// Fast-cost variant: running sum of losses at the intermediate iterates, plus
// the penalty at theta_bar. Requires cfg.track_running_loss.
double running_cost(const SegmentState& state, const CostModel& model);

// Additional passes k = 2..K over the state's segment, each starting from the
// previous pass's terminal (theta, H). The iterate sum is replaced by the sum of
// the final pass's iterates; count is unchanged.
void multi_epoch_refine(SegmentState& state, const DataSequence& data, const CostModel& model,
                        int epochs, const EngineConfig& cfg);

// One time tick of the multiple-epoch search update: a step with z_t followed
// by passes 2..K over the whole segment, then S += theta.
void se_step_epochs(SegmentState& state, const DataSequence& data, const CostModel& model,
                    int epochs, const EngineConfig& cfg);

struct SequentialFit {
  double cost = 0.0;
  Vector theta;
};

// Runs the sequential updates over `range` from scratch (seeded by `init`) and
// returns the approximate cost and averaged parameter, exactly as the search
// loop would have produced them for that candidate.
SequentialFit sequential_segment_fit(const DataSequence& data, SegmentRange range,
                                     const CostModel& model, const BlockInitializer& init,
                                     const EngineConfig& cfg, int epochs, bool fast_cost);

}  // namespace seqcp
