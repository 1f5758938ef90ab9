#include "seqcp/seq_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seqcp {

std::string_view to_string(PrecondMode mode) noexcept {
  switch (mode) {
    case PrecondMode::Scalar: return "scalar";
    case PrecondMode::Dense: return "dense";
    case PrecondMode::Inverse: return "inverse";
  }
  return "unknown";
}

PrecondMode parse_precond_mode(std::string_view name) {
  if (name == "scalar") return PrecondMode::Scalar;
  if (name == "dense") return PrecondMode::Dense;
  if (name == "inverse") return PrecondMode::Inverse;
  throw Error(ErrorCode::ParseError, "unknown preconditioner '" + std::string(name) + "'");
}

std::string_view to_string(PrecondInit init) noexcept {
  return init == PrecondInit::Point ? "point" : "block";
}

PrecondInit parse_precond_init(std::string_view name) {
  if (name == "point") return PrecondInit::Point;
  if (name == "block") return PrecondInit::Block;
  throw Error(ErrorCode::ParseError, "unknown preconditioner initialization '" + std::string(name) + "'");
}

// ---- PrecondState ---------------------------------------------------------

PrecondState PrecondState::scalar(double mu) {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidPenalty, "mu must be positive");
  PrecondState p;
  p.kind_ = PrecondMode::Scalar;
  p.mu_ = mu;
  p.eta_ = mu / 2.0;
  return p;
}

PrecondState PrecondState::dense(Matrix h) {
  PrecondState p;
  p.kind_ = PrecondMode::Dense;
  p.mat_ = std::move(h);
  return p;
}

PrecondState PrecondState::inverse(const Matrix& h) {
  PrecondState p;
  p.kind_ = PrecondMode::Inverse;
  p.mat_ = h.ldlt().solve(Matrix::Identity(h.rows(), h.cols()));
  return p;
}

Vector PrecondState::solve(const Vector& g) const {
  switch (kind_) {
    case PrecondMode::Scalar: return g / eta_;
    case PrecondMode::Dense: return mat_.ldlt().solve(g);
    case PrecondMode::Inverse: return mat_ * g;
  }
  return g;
}

void PrecondState::accumulate(const CurvatureUpdate& a) {
  switch (kind_) {
    case PrecondMode::Scalar:
      eta_ += mu_ / 2.0;
      return;
    case PrecondMode::Dense:
      a.add_to(mat_);
      return;
    case PrecondMode::Inverse:
      if (a.kind == CurvatureKind::RankOne) {
        // Sherman-Morrison: (H + g g')^{-1} = H^{-1} - H^{-1} g g' H^{-1} / (1 + g' H^{-1} g)
        const Vector u = mat_ * a.factor;
        const double denom = 1.0 + a.factor.dot(u);
        mat_.noalias() -= (u / denom) * u.transpose();
      } else if (a.kind == CurvatureKind::Scalar && mat_.rows() == 1) {
        mat_(0, 0) = 1.0 / (1.0 / mat_(0, 0) + a.scalar);
      } else {
        Matrix h = mat_.ldlt().solve(Matrix::Identity(mat_.rows(), mat_.cols()));
        a.add_to(h);
        mat_ = h.ldlt().solve(Matrix::Identity(h.rows(), h.cols()));
      }
      return;
  }
}

double PrecondState::spectral_norm() const {
  switch (kind_) {
    case PrecondMode::Scalar: return eta_;
    case PrecondMode::Dense: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
      return es.eigenvalues().maxCoeff();
    }
    case PrecondMode::Inverse: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
      return 1.0 / es.eigenvalues().minCoeff();
    }
  }
  return 0.0;
}

Matrix PrecondState::matrix(Index d) const {
  switch (kind_) {
    case PrecondMode::Scalar: return eta_ * Matrix::Identity(d, d);
    case PrecondMode::Dense: return mat_;
    case PrecondMode::Inverse: return mat_.ldlt().solve(Matrix::Identity(mat_.rows(), mat_.cols()));
  }
  return {};
}

// ---- BlockInitializer -----------------------------------------------------

BlockInitializer::BlockInitializer(const DataSequence& data, const CostModel& model, int blocks,
                                   const SolverConfig& solver, bool with_curvature) {
  const Index T = data.length();
  const Index B = std::clamp<Index>(blocks, 1, T);
  const Index p = model.param_dim(data.dim());
  bounds_.resize(static_cast<std::size_t>(B) + 1);
  for (Index j = 0; j <= B; ++j) {
    bounds_[static_cast<std::size_t>(j)] = (j * T) / B;
  }
  thetas_.reserve(static_cast<std::size_t>(B));
  for (Index j = 0; j < B; ++j) {
    const SegmentRange r{bounds_[static_cast<std::size_t>(j)], bounds_[static_cast<std::size_t>(j) + 1]};
    Vector theta = exact_segment_cost(data, r, model, solver).theta;
    if (with_curvature) {
      Matrix sum = Matrix::Zero(p, p);
      for (Index i = r.begin; i < r.end; ++i) model.curvature(data[i], theta).add_to(sum);
      curvatures_.push_back(std::move(sum));
    }
    thetas_.push_back(std::move(theta));
  }
}

InitialPoint BlockInitializer::at(Index t) const {
  const Index row = t - 1;
  const auto it = std::upper_bound(bounds_.begin(), bounds_.end(), row);
  const auto j = static_cast<std::size_t>(std::distance(bounds_.begin(), it) - 1);
  InitialPoint ip{thetas_[j], std::nullopt};
  if (!curvatures_.empty()) ip.curvature = curvatures_[j];
  return ip;
}

// ---- stepping -------------------------------------------------------------

namespace {

// One projected (proximal) preconditioned step with observation z; the
// penalty weight uses the segment length `segment_len` after the step.
void advance(SegmentState& s, const ObservationView& z, const CostModel& model,
             const EngineConfig& cfg, Index segment_len) {
  const Vector grad = model.gradient(z, s.theta);
  if (!grad.allFinite()) {
    throw Error(ErrorCode::StateDiverged, "non-finite gradient for candidate starting at " +
                                              std::to_string(s.start));
  }
  Vector next = s.theta - s.precond.solve(grad);
  if (s.momentum != 0.0) next += s.momentum * (s.theta - s.prev_theta);
  if (model.has_penalty()) {
    next = model.prox(next, model.penalty_weight(segment_len) / s.precond.spectral_norm());
  }
  next = project_to_ball(std::move(next), cfg.radius);
  if (!next.allFinite()) {
    throw Error(ErrorCode::StateDiverged, "non-finite iterate for candidate starting at " +
                                              std::to_string(s.start));
  }
  s.prev_theta = std::move(s.theta);
  s.theta = std::move(next);
  s.precond.accumulate(model.curvature(z, s.theta));
}

}  // namespace

SegmentState init_state(Index t, const InitialPoint& init, const ObservationView& z_t,
                        const CostModel& model, const EngineConfig& cfg) {
  SegmentState s;
  s.start = t;
  s.theta = project_to_ball(init.theta, cfg.radius);
  const Index p = s.theta.size();
  switch (cfg.precond) {
    case PrecondMode::Scalar:
      s.precond = PrecondState::scalar(cfg.mu);
      break;
    case PrecondMode::Dense:
    case PrecondMode::Inverse: {
      Matrix h = (cfg.precond_init == PrecondInit::Block && init.curvature)
                     ? Matrix(cfg.init_weight * *init.curvature)
                     : model.curvature(z_t, s.theta).materialize(p);
      h.diagonal().array() += kPrecondFloor;
      s.precond = cfg.precond == PrecondMode::Dense ? PrecondState::dense(std::move(h))
                                                    : PrecondState::inverse(h);
      break;
    }
  }
  s.iterate_sum = s.theta;
  s.count = 1;
  s.prev_theta = s.theta;
  s.momentum = cfg.momentum;
  if (cfg.track_running_loss) s.running_loss = model.loss(z_t, s.theta);
  return s;
}

void se_step(SegmentState& state, const ObservationView& z, const CostModel& model,
             const EngineConfig& cfg) {
  advance(state, z, model, cfg, state.count + 1);
  state.iterate_sum += state.theta;
  state.count += 1;
  if (cfg.track_running_loss) state.running_loss += model.loss(z, state.theta);
}

Vector averaged_theta(const SegmentState& state) {
  return state.iterate_sum / static_cast<double>(state.count);
}

double approx_cost(const SegmentState& state, const DataSequence& data, const CostModel& model) {
  return segment_objective(data, state.range(), model, averaged_theta(state));
}

double running_cost(const SegmentState& state, const CostModel& model) {
  double c = state.running_loss;
  if (model.has_penalty()) {
    c += model.penalty_weight(state.count) * model.penalty(averaged_theta(state));
  }
  return c;
}

void multi_epoch_refine(SegmentState& state, const DataSequence& data, const CostModel& model,
                        int epochs, const EngineConfig& cfg) {
  if (epochs <= 1) return;
  const SegmentRange r = state.range();
  for (int k = 2; k <= epochs; ++k) {
    Vector sum = Vector::Zero(state.theta.size());
    double running = 0.0;
    for (Index j = r.begin; j < r.end; ++j) {
      advance(state, data[j], model, cfg, j - r.begin + 1);
      sum += state.theta;
      if (cfg.track_running_loss) running += model.loss(data[j], state.theta);
    }
    state.iterate_sum = std::move(sum);
    if (cfg.track_running_loss) state.running_loss = running;
  }
}

void se_step_epochs(SegmentState& state, const DataSequence& data, const CostModel& model,
                    int epochs, const EngineConfig& cfg) {
  const Index row = state.last();  // 0-based row of z_t
  const Index begin = state.start - 1;
  advance(state, data[row], model, cfg, state.count + 1);
  for (int k = 2; k <= epochs; ++k) {
    for (Index j = begin; j <= row; ++j) {
      advance(state, data[j], model, cfg, j - begin + 1);
    }
  }
  state.iterate_sum += state.theta;
  state.count += 1;
  if (cfg.track_running_loss) state.running_loss += model.loss(data[row], state.theta);
}

SequentialFit sequential_segment_fit(const DataSequence& data, SegmentRange range,
                                     const CostModel& model, const BlockInitializer& init,
                                     const EngineConfig& cfg, int epochs, bool fast_cost) {
  if (range.empty()) throw Error(ErrorCode::EmptySegment, "sequential fit of an empty segment");
  EngineConfig c = cfg;
  c.track_running_loss = c.track_running_loss || fast_cost;
  SegmentState s = init_state(range.begin + 1, init.at(range.begin + 1), data[range.begin], model, c);
  for (Index i = range.begin + 1; i < range.end; ++i) {
    if (epochs > 1) {
      se_step_epochs(s, data, model, epochs, c);
    } else {
      se_step(s, data[i], model, c);
    }
  }
  return {fast_cost ? running_cost(s, model) : approx_cost(s, data, model), averaged_theta(s)};
}

}  // namespace seqcp
