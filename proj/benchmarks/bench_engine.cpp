#include <benchmark/benchmark.h>

#include <random>

#include "seqcp/exact_solvers.hpp"
#include "seqcp/seq_engine.hpp"

namespace {

using namespace seqcp;

DataSequence logistic_rows(Index n, Index d) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> norm(0.0, 1.0);
  RowMatrix X(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    double eta = 0.0;
    for (Index j = 0; j < d; ++j) {
      X(i, j) = norm(gen);
      eta += 0.5 * X(i, j);
    }
    y[i] = std::bernoulli_distribution(1.0 / (1.0 + std::exp(-eta)))(gen) ? 1.0 : 0.0;
  }
  return DataSequence(y, X);
}

// One sequential step per observation, per preconditioner mode.
void BM_SeStep(benchmark::State& state) {
  const Index d = state.range(0);
  const auto mode = static_cast<PrecondMode>(state.range(1));
  const DataSequence data = logistic_rows(512, d);
  LogisticModel model;
  EngineConfig cfg;
  cfg.precond = mode;
  const InitialPoint init{Vector::Zero(d), Matrix::Identity(d, d)};
  for (auto _ : state) {
    SegmentState s = init_state(1, init, data[0], model, cfg);
    for (Index i = 1; i < data.length(); ++i) se_step(s, data[i], model, cfg);
    benchmark::DoNotOptimize(s.theta.data());
  }
  state.SetItemsProcessed(state.iterations() * (data.length() - 1));
}

void BM_ExactLogisticCost(benchmark::State& state) {
  const Index n = state.range(0);
  const DataSequence data = logistic_rows(n, 5);
  LogisticModel model;
  for (auto _ : state) benchmark::DoNotOptimize(glm_exact_cost(data, {0, n}, model).cost);
  state.SetComplexityN(n);
}

}  // namespace

BENCHMARK(BM_SeStep)
    ->ArgsProduct({{3, 10, 50},
                   {static_cast<int>(PrecondMode::Scalar), static_cast<int>(PrecondMode::Dense),
                    static_cast<int>(PrecondMode::Inverse)}})
    ->ArgNames({"d", "mode"});
BENCHMARK(BM_ExactLogisticCost)->RangeMultiplier(4)->Range(16, 4096)->Complexity();
