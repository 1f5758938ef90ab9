#include <benchmark/benchmark.h>

#include "seqcp/dp_search.hpp"
#include "seqcp/simgen.hpp"

namespace {

using namespace seqcp;

SimulatedData scenario(Family family, Index T, Index d, int k) {
  Scenario s;
  s.family = family;
  s.T = T;
  s.d = d;
  s.k = k;
  s.magnitude = Magnitude::Large;
  s.seed = 2024;
  return simulate(s);
}

std::unique_ptr<CostModel> model_for(Family f, const SimulatedData& sim) {
  const Index d = sim.data.dim();
  switch (f) {
    case Family::Logistic: return make_model(ModelKind::Logistic, d);
    case Family::Poisson: return make_model(ModelKind::Poisson, d);
    default: return make_model(ModelKind::Lasso, d, estimate_sigma_hat(sim.data).sigma_hat);
  }
}

ModelKind kind_of(Family f) {
  switch (f) {
    case Family::Logistic: return ModelKind::Logistic;
    case Family::Poisson: return ModelKind::Poisson;
    default: return ModelKind::Lasso;
  }
}

template <Family F>
void BM_Pelt(benchmark::State& state) {
  const Index T = state.range(0);
  const Index d = F == Family::LassoLinear ? 50 : 3;
  const SimulatedData sim = scenario(F, T, d, 3);
  const auto model = model_for(F, sim);
  const double beta = resolve_penalty(PenaltySpec::automatic(), model->param_dim(d), T);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pelt(sim.data, *model, beta));
  }
  state.SetComplexityN(T);
}

template <Family F>
void BM_Se(benchmark::State& state) {
  const Index T = state.range(0);
  const Index d = F == Family::LassoLinear ? 50 : 3;
  const SimulatedData sim = scenario(F, T, d, 3);
  const auto model = model_for(F, sim);
  const double beta = resolve_penalty(PenaltySpec::automatic(), model->param_dim(d), T);
  const SeOptions opts = se_defaults(kind_of(F));
  for (auto _ : state) {
    benchmark::DoNotOptimize(se_search(sim.data, *model, beta, opts));
  }
  state.SetComplexityN(T);
}

}  // namespace

BENCHMARK(BM_Pelt<Family::Logistic>)->Arg(150)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_Se<Family::Logistic>)->Arg(150)->Arg(300)->Arg(600)->Arg(1500)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_Pelt<Family::Poisson>)->Arg(150)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_Se<Family::Poisson>)->Arg(150)->Arg(300)->Arg(600)->Arg(1500)->Unit(benchmark::kMillisecond)->Complexity();
BENCHMARK(BM_Pelt<Family::LassoLinear>)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Se<Family::LassoLinear>)->Arg(150)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);
