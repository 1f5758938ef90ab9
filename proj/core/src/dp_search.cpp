#include "seqcp/dp_search.hpp"

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace seqcp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs f(0..n-1) either inline or on a bounded TBB arena. Results must be
// written to per-index slots so the reduction order stays deterministic.
class Workers {
 public:
  explicit Workers(int threads) {
    if (threads > 1) arena_ = std::make_unique<tbb::task_arena>(threads);
  }

  template <class F>
  void run(Index n, F&& f) {
    if (!arena_ || n < 2) {
      for (Index i = 0; i < n; ++i) f(i);
      return;
    }
    arena_->execute([&] {
      tbb::parallel_for(Index{0}, n, [&](Index i) { f(i); });
    });
  }

 private:
  std::unique_ptr<tbb::task_arena> arena_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_search_inputs(const DataSequence& data, const CostModel& model, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidPenalty, "beta must be finite and nonnegative");
  }
  model.check_data(data);
}

// Minimum over candidates with ties resolved toward the largest tau. `taus`
// is ascending; NaN marks candidates that were not eligible at this t.
std::pair<double, Index> argmin_latest(std::span<const Index> taus, std::span<const double> vals) {
  double best = kInf;
  Index arg = -1;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!std::isnan(vals[i]) && vals[i] <= best) {
      best = vals[i];
      arg = taus[i];
    }
  }
  return {best, arg};
}

DetectionResult optimal_partition(const DataSequence& data, const CostModel& model, double beta,
                                  const SearchOptions& opts, bool prune) {
  check_search_inputs(data, model, beta);
  const auto t0 = std::chrono::steady_clock::now();
  const Index T = data.length();
  const Index min_len = std::clamp<Index>(opts.min_segment_length, 1, T);

  std::vector<double> F(static_cast<std::size_t>(T) + 1, kInf);
  std::vector<Index> last(static_cast<std::size_t>(T) + 1, 0);
  F[0] = -beta;

  Workers workers(opts.threads);
  SearchDiagnostics diag;
  std::vector<Index> R{0};
  std::vector<double> vals;
  std::vector<char> under;
  std::vector<char> unconv;

  for (Index t = 1; t <= T; ++t) {
    if (!prune) {
      R.resize(static_cast<std::size_t>(t));
      for (Index tau = 0; tau < t; ++tau) R[static_cast<std::size_t>(tau)] = tau;
    }
    const Index n = static_cast<Index>(R.size());
    vals.assign(R.size(), std::numeric_limits<double>::quiet_NaN());
    under.assign(R.size(), 0);
    unconv.assign(R.size(), 0);
    workers.run(n, [&](Index i) {
      const auto k = static_cast<std::size_t>(i);
      const Index tau = R[k];
      if (t - tau < min_len || !std::isfinite(F[static_cast<std::size_t>(tau)])) return;
      const SegmentFit fit = exact_segment_cost(data, {tau, t}, model, opts.solver);
      vals[k] = F[static_cast<std::size_t>(tau)] + fit.cost;
      under[k] = fit.underdetermined;
      unconv[k] = !fit.converged;
    });
    for (std::size_t k = 0; k < R.size(); ++k) {
      if (!std::isnan(vals[k])) ++diag.cost_evaluations;
      diag.underdetermined_fits += under[k];
      diag.unconverged_fits += unconv[k];
    }
    diag.max_candidates = std::max(diag.max_candidates, n);

    const auto [best, arg] = argmin_latest(R, vals);
    if (arg >= 0) {
      F[static_cast<std::size_t>(t)] = best + beta;
      last[static_cast<std::size_t>(t)] = arg;
    }

    if (prune) {
      const double Ft = F[static_cast<std::size_t>(t)];
      std::vector<Index> next;
      next.reserve(R.size() + 1);
      for (std::size_t k = 0; k < R.size(); ++k) {
        const Index tau = R[k];
        if (!std::isfinite(F[static_cast<std::size_t>(tau)])) continue;
        if (std::isnan(vals[k]) || vals[k] <= Ft) next.push_back(tau);
      }
      next.push_back(t);
      R = std::move(next);
    }
  }

  if (!std::isfinite(F[static_cast<std::size_t>(T)])) {
    throw Error(ErrorCode::InternalError, "no feasible segmentation of the full sequence");
  }

  DetectionResult res;
  res.method = prune ? Method::Pelt : Method::Dp;
  res.beta = beta;
  res.segmentation = backtrack(last, T);
  // F(0) = -beta leaves k betas in F(T); the reported objective counts k + 1.
  res.objective = F[static_cast<std::size_t>(T)] + beta;
  for (const auto& r : res.segmentation.segments()) {
    res.segment_params.push_back(exact_segment_cost(data, r, model, opts.solver).theta);
  }
  res.diagnostics = diag;
  res.elapsed_seconds = seconds_since(t0);
  return res;
}

struct Candidate {
  Index tau = 0;
  SegmentState state;
  double cost = 0.0;
  bool alive = true;
};

}  // namespace

DetectionResult exact_dp(const DataSequence& data, const CostModel& model, double beta,
                         const SearchOptions& opts) {
  return optimal_partition(data, model, beta, opts, false);
}

DetectionResult pelt(const DataSequence& data, const CostModel& model, double beta,
                     const SearchOptions& opts) {
  return optimal_partition(data, model, beta, opts, true);
}

DetectionResult se_search(const DataSequence& data, const CostModel& model, double beta,
                          const SeOptions& opts) {
  check_search_inputs(data, model, beta);
  if (opts.epochs < 1) throw Error(ErrorCode::InvalidLength, "epochs must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  const Index T = data.length();
  const Index min_len = std::clamp<Index>(opts.min_segment_length, 1, T);

  EngineConfig cfg = opts.engine;
  cfg.track_running_loss = cfg.track_running_loss || opts.fast_cost;
  const bool block_curvature =
      cfg.precond != PrecondMode::Scalar && cfg.precond_init == PrecondInit::Block;
  const BlockInitializer init(data, model, opts.init_blocks, opts.solver, block_curvature);

  std::vector<double> F(static_cast<std::size_t>(T) + 1, kInf);
  std::vector<Index> last(static_cast<std::size_t>(T) + 1, 0);
  F[0] = -beta;

  Workers workers(opts.threads);
  SearchDiagnostics diag;
  std::vector<Candidate> cands;
  std::vector<Index> taus;
  std::vector<double> vals;

  for (Index t = 1; t <= T; ++t) {
    const ObservationView z_t = data[t - 1];
    // Existing candidates absorb z_t; the fresh candidate t-1 starts at z_t.
    workers.run(static_cast<Index>(cands.size()), [&](Index i) {
      Candidate& c = cands[static_cast<std::size_t>(i)];
      try {
        if (opts.epochs > 1) {
          se_step_epochs(c.state, data, model, opts.epochs, cfg);
        } else {
          se_step(c.state, z_t, model, cfg);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StateDiverged) throw;
        c.alive = false;
      }
    });
    cands.push_back(Candidate{t - 1, init_state(t, init.at(t), z_t, model, cfg), 0.0, true});

    workers.run(static_cast<Index>(cands.size()), [&](Index i) {
      Candidate& c = cands[static_cast<std::size_t>(i)];
      if (!c.alive) return;
      c.cost = opts.fast_cost ? running_cost(c.state, model) : approx_cost(c.state, data, model);
      if (std::isnan(c.cost)) c.alive = false;
    });

    taus.clear();
    vals.clear();
    for (const Candidate& c : cands) {
      if (!c.alive) {
        ++diag.diverged_candidates;
        continue;
      }
      taus.push_back(c.tau);
      const bool eligible = t - c.tau >= min_len;
      vals.push_back(eligible ? F[static_cast<std::size_t>(c.tau)] + c.cost
                              : std::numeric_limits<double>::quiet_NaN());
    }
    diag.cost_evaluations += static_cast<Index>(taus.size());
    diag.max_candidates = std::max(diag.max_candidates, static_cast<Index>(cands.size()));

    const auto [best, arg] = argmin_latest(taus, vals);
    if (arg >= 0) {
      F[static_cast<std::size_t>(t)] = best + beta;
      last[static_cast<std::size_t>(t)] = arg;
    }

    // Pruning uses the approximate costs in place of the exact ones.
    const double Ft = F[static_cast<std::size_t>(t)];
    std::erase_if(cands, [&](const Candidate& c) {
      if (!c.alive) return true;
      if (!std::isfinite(F[static_cast<std::size_t>(c.tau)])) return true;
      if (!opts.prune || t - c.tau < min_len) return false;
      return !(F[static_cast<std::size_t>(c.tau)] + c.cost <= Ft);
    });
  }

  if (!std::isfinite(F[static_cast<std::size_t>(T)])) {
    throw Error(ErrorCode::InternalError, "no feasible segmentation of the full sequence");
  }

  const auto segment_fit = [&](SegmentRange r) {
    return sequential_segment_fit(data, r, model, init, cfg, opts.epochs, opts.fast_cost);
  };

  Segmentation seg = backtrack(last, T);
  if (opts.post_process) {
    const Index mb = opts.min_boundary > 0 ? opts.min_boundary : default_post_process_threshold(T);
    const Index mg = opts.min_gap > 0 ? opts.min_gap : default_post_process_threshold(T);
    seg = post_process(seg, mb, mg, [&](SegmentRange r) { return segment_fit(r).cost; });
  }

  DetectionResult res;
  res.method = Method::Se;
  res.beta = beta;
  res.segmentation = std::move(seg);
  const auto segments = res.segmentation.segments();
  const auto n_segments = static_cast<Index>(segments.size());
  std::vector<SequentialFit> fits(segments.size());
  workers.run(n_segments, [&](Index j) {
    fits[static_cast<std::size_t>(j)] = segment_fit(segments[static_cast<std::size_t>(j)]);
  });
  res.objective = static_cast<double>(n_segments) * beta;
  for (auto& f : fits) {
    res.objective += f.cost;
    res.segment_params.push_back(std::move(f.theta));
  }
  res.diagnostics = diag;
  res.elapsed_seconds = seconds_since(t0);
  return res;
}

Segmentation backtrack(std::span<const Index> last_cp, Index T) {
  if (T < 1 || static_cast<Index>(last_cp.size()) <= T) {
    throw Error(ErrorCode::InternalError, "backtrack pointer array shorter than T + 1");
  }
  Segmentation seg;
  seg.length = T;
  Index t = T;
  while (t > 0) {
    const Index cp = last_cp[static_cast<std::size_t>(t)];
    if (cp < 0 || cp >= t) {
      throw Error(ErrorCode::InternalError, "change-point pointer chain is not strictly decreasing at t = " +
                                                std::to_string(t));
    }
    if (cp > 0) seg.change_points.push_back(cp);
    t = cp;
  }
  std::reverse(seg.change_points.begin(), seg.change_points.end());
  return seg;
}

Index default_post_process_threshold(Index T) noexcept {
  const auto one_percent = static_cast<Index>(std::ceil(0.01 * static_cast<double>(T)));
  return std::max<Index>(2, one_percent);
}

Segmentation post_process(const Segmentation& seg, Index min_boundary, Index min_gap,
                          const SegmentCostFn& cost) {
  const Index T = seg.length;
  Segmentation out;
  out.length = T;
  for (Index cp : seg.change_points) {
    if (cp >= min_boundary && T - cp >= min_boundary) out.change_points.push_back(cp);
  }
  auto& cps = out.change_points;
  std::size_t i = 0;
  while (i + 1 < cps.size()) {
    const Index a = cps[i];
    const Index b = cps[i + 1];
    if (b - a >= min_gap) {
      ++i;
      continue;
    }
    bool remove_later = true;
    if (cost) {
      const Index prev = i == 0 ? 0 : cps[i - 1];
      const Index next = i + 2 < cps.size() ? cps[i + 2] : T;
      const double without_a = cost({prev, b}) + cost({b, next});
      const double without_b = cost({prev, a}) + cost({a, next});
      remove_later = without_b <= without_a;
    }
    cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(remove_later ? i + 1 : i));
  }
  return out;
}

SeOptions se_defaults(ModelKind kind) {
  SeOptions opts;
  if (kind == ModelKind::Lasso) {
    opts.engine.precond = PrecondMode::Scalar;
    opts.engine.mu = 1.0;
  } else {
    opts.engine.precond = PrecondMode::Inverse;
  }
  return opts;
}

DetectionResult detect(const DataSequence& data, const CostModel& model, const DetectOptions& opts) {
  const Index p = model.param_dim(data.dim());
  const double beta = data.length() >= 2 || !opts.penalty.is_auto()
                          ? resolve_penalty(opts.penalty, p, std::max<Index>(data.length(), 2))
                          : 0.0;
  switch (opts.method) {
    case Method::Dp: return exact_dp(data, model, beta, opts.search);
    case Method::Pelt: return pelt(data, model, beta, opts.search);
    case Method::Se: return se_search(data, model, beta, opts.se);
  }
  throw Error(ErrorCode::InternalError, "unhandled method");
}

}  // namespace seqcp
