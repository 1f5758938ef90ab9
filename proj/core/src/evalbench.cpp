#include "seqcp/evalbench.hpp"

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "seqcp/cost_models.hpp"
#include "seqcp/exact_solvers.hpp"
#include "seqcp/rng.hpp"
#include "seqcp/seq_engine.hpp"

namespace seqcp {

namespace {

std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

std::unique_ptr<CostModel> model_for(const Scenario& s, const DataSequence& data,
                                     const BenchConfig& cfg) {
  switch (s.family) {
    case Family::Logistic: return make_model(ModelKind::Logistic, data.dim());
    case Family::Poisson: return make_model(ModelKind::Poisson, data.dim());
    case Family::LassoLinear: {
      const double sigma = cfg.sigma_hat ? *cfg.sigma_hat : estimate_sigma_hat(data).sigma_hat;
      return make_model(ModelKind::Lasso, data.dim(), sigma);
    }
  }
  throw Error(ErrorCode::InternalError, "unhandled family");
}

BenchRecord run_cell(const Scenario& base, std::uint64_t seed, Method method,
                     const BenchConfig& cfg) {
  BenchRecord rec;
  rec.scenario = base;
  rec.scenario.seed = seed;
  rec.seed = seed;
  rec.method = method;
  rec.k_true = base.k;
  try {
    const SimulatedData sim = simulate(rec.scenario);
    const auto model = model_for(rec.scenario, sim.data, cfg);
    DetectOptions opts;
    opts.method = method;
    opts.penalty = cfg.penalty;
    opts.search = cfg.search;
    opts.se = cfg.se ? *cfg.se : se_defaults(model->kind());
    const auto t0 = std::chrono::steady_clock::now();
    const DetectionResult res = detect(sim.data, *model, opts);
    const auto t1 = std::chrono::steady_clock::now();
    rec.elapsed_seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.objective = res.objective;
    rec.k_detected = static_cast<Index>(res.segmentation.change_points.size());
    rec.rand_index = rand_index(res.segmentation, sim.truth);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double two_se(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return 2.0 * std::sqrt(ss / (n - 1.0) / n);
}

double loglog_slope(std::span<const Index> n, std::span<const double> gap) {
  const std::size_t m = n.size();
  if (m < 2) return 0.0;
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(static_cast<double>(n[i]));
    ly[i] = std::log(gap[i]);
  }
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

DataSequence no_change_data(Index n, const ConvergenceConfig& cfg) {
  Rng rng(cfg.data_seed + static_cast<std::uint64_t>(n));
  Vector y(n);
  RowMatrix X(n, 2);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = 2.0 * rng.uniform() - 1.0;
    const double eta = X.row(i).dot(cfg.theta0);
    if (cfg.model == ModelKind::Logistic) {
      y[i] = rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
    } else {
      y[i] = static_cast<double>(rng.poisson(std::exp(eta)));
    }
  }
  return DataSequence(std::move(y), std::move(X));
}

std::vector<Index> permutation(Index n, std::uint64_t seed) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

// Smallest eigenvalue of the average curvature at theta.
double strong_convexity(const DataSequence& data, const CostModel& model, const Vector& theta) {
  const Index d = data.dim();
  Matrix h = Matrix::Zero(d, d);
  for (Index i = 0; i < data.length(); ++i) model.curvature(data[i], theta).add_to(h);
  h /= static_cast<double>(data.length());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

double rand_index(const Segmentation& a, const Segmentation& b) {
  if (a.length != b.length) {
    throw Error(ErrorCode::LengthMismatch, "rand_index: segmentations cover different lengths (" +
                                               std::to_string(a.length) + " vs " +
                                               std::to_string(b.length) + ")");
  }
  const std::int64_t T = a.length;
  if (T < 2) return 1.0;
  const auto sa = a.segments();
  const auto sb = b.segments();
  std::int64_t same_a = 0, same_b = 0, same_both = 0;
  for (const auto& r : sa) same_a += pairs(r.size());
  for (const auto& r : sb) same_b += pairs(r.size());
  // Both lists are sorted, so overlaps can be found by a merge.
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const Index lo = std::max(sa[i].begin, sb[j].begin);
    const Index hi = std::min(sa[i].end, sb[j].end);
    if (hi > lo) same_both += pairs(hi - lo);
    if (sa[i].end < sb[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::int64_t total = pairs(T);
  const std::int64_t agree = total + 2 * same_both - same_a - same_b;
  return static_cast<double>(agree) / static_cast<double>(total);
}

std::vector<BenchRecord> run_benchmark(std::span<const Scenario> grid,
                                       std::span<const Method> methods, int reps,
                                       const BenchConfig& cfg) {
  if (reps < 1) throw Error(ErrorCode::InvalidScenario, "reps must be at least 1");
  for (const auto& s : grid) s.validate();

  struct Cell {
    std::size_t scenario;
    std::uint64_t seed;
    Method method;
  };
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (int r = 0; r < reps; ++r) {
      for (Method m : methods) cells.push_back({g, grid[g].seed + static_cast<std::uint64_t>(r), m});
    }
  }

  std::vector<BenchRecord> out(cells.size());
  auto run = [&](std::size_t c) {
    out[c] = run_cell(grid[cells[c].scenario], cells[c].seed, cells[c].method, cfg);
  };
  if (cfg.threads > 1) {
    tbb::task_arena arena(cfg.threads);
    arena.execute([&] {
      tbb::parallel_for(std::size_t{0}, cells.size(), [&](std::size_t c) { run(c); });
    });
  } else {
    for (std::size_t c = 0; c < cells.size(); ++c) run(c);
  }
  return out;
}

std::vector<BenchSummary> summarize(std::span<const BenchRecord> records) {
  std::vector<std::pair<std::string, Method>> order;
  std::map<std::pair<std::string, Method>, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records) {
    auto key = std::make_pair(r.scenario.id(), r.method);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<BenchSummary> out;
  for (const auto& key : order) {
    BenchSummary s;
    s.scenario = key.first;
    s.method = key.second;
    std::vector<double> ri, el, kd;
    for (const BenchRecord* r : groups[key]) {
      ++s.runs;
      if (r->failed) {
        ++s.failed;
        continue;
      }
      ri.push_back(r->rand_index);
      el.push_back(r->elapsed_seconds);
      kd.push_back(static_cast<double>(r->k_detected));
    }
    s.mean_rand_index = mean(ri);
    s.rand_index_half_width = two_se(ri);
    s.mean_elapsed = mean(el);
    s.elapsed_half_width = two_se(el);
    s.mean_k_detected = mean(kd);
    out.push_back(std::move(s));
  }
  return out;
}

ConvergenceResult convergence_experiment(const ConvergenceConfig& cfg) {
  if (cfg.model != ModelKind::Logistic && cfg.model != ModelKind::Poisson) {
    throw Error(ErrorCode::InvalidScenario, "convergence experiment supports logistic and poisson");
  }
  if (cfg.theta0.size() != 2) throw Error(ErrorCode::DimError, "theta0 must have 2 entries");
  if (cfg.seeds < 1) throw Error(ErrorCode::InvalidScenario, "seeds must be at least 1");
  for (std::size_t i = 1; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] <= cfg.n_grid[i - 1]) {
      throw Error(ErrorCode::InvalidScenario, "n_grid must be strictly increasing");
    }
  }
  const auto model = make_model(cfg.model, 2);
  SolverConfig solver;
  solver.radius = cfg.radius;

  ConvergenceResult res;
  res.curves.resize(cfg.mus.size());
  for (std::size_t m = 0; m < cfg.mus.size(); ++m) res.curves[m].mu_auto = !cfg.mus[m].has_value();

  for (Index n : cfg.n_grid) {
    if (n < 2) throw Error(ErrorCode::InvalidLength, "n must be at least 2");
    const DataSequence data = no_change_data(n, cfg);
    const SegmentRange all{0, n};
    const SegmentFit best = glm_exact_cost(data, all, *model, solver);
    const double f_best = best.cost / static_cast<double>(n);
    const double mu_auto = strong_convexity(data, *model, best.theta);

    for (std::size_t m = 0; m < cfg.mus.size(); ++m) {
      const double mu = cfg.mus[m].value_or(mu_auto);
      if (!(mu > 0.0)) throw Error(ErrorCode::InvalidPenalty, "mu must be positive");
      EngineConfig ec;
      ec.precond = PrecondMode::Scalar;
      ec.mu = mu;
      ec.radius = cfg.radius;
      double total = 0.0;
      for (int s = 1; s <= cfg.seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        const auto order = permutation(n, seed);
        const DataSequence perm = data.permuted(order);
        SegmentState st = init_state(1, InitialPoint{Vector::Zero(2), std::nullopt}, perm[0], *model, ec);
        for (Index i = 1; i < n; ++i) se_step(st, perm[i], *model, ec);
        const double f_bar = segment_objective(perm, all, *model, averaged_theta(st)) /
                             static_cast<double>(n);
        // Rounding can leave a tiny negative difference at the optimum.
        const double gap = std::max(0.0, f_bar - f_best);
        res.rows.push_back({n, seed, gap, mu});
        total += gap;
      }
      res.curves[m].mu = mu;
      res.curves[m].n.push_back(n);
      res.curves[m].mean_gap.push_back(total / cfg.seeds);
    }
  }
  for (auto& c : res.curves) c.slope = loglog_slope(c.n, c.mean_gap);
  return res;
}

}  // namespace seqcp
