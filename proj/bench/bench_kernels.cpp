// Serial reference vs OpenMP kernels. The second argument selects the variant
// (0 serial, 1 parallel); set CKAM_THREADS to vary the team size.

#include "ckam/diophantine.hpp"
#include "ckam/perturbation.hpp"
#include "ckam/variational.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace ckam;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::kParallel : Exec::kSerial; }

const PerturbationSpec& golden_spec() {
  static const PerturbationSpec s = [] {
    PerturbationConfig c;
    c.policy = ThresholdPolicy::kRecord;
    return build_perturbation({-3, 5}, FrequencyVector::parse("golden"), 0.0, 0.1, 0.0, c, false);
  }();
  return s;
}

void BM_find_resonances(benchmark::State& st) {
  auto w = FrequencyVector::parse("golden");
  for (auto _ : st) benchmark::DoNotOptimize(find_resonances(w, 300, 1.0, exec_of(st)));
}
BENCHMARK(BM_find_resonances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_structured_norm(benchmark::State& st) {
  const auto& spec = golden_spec();
  for (auto _ : st) benchmark::DoNotOptimize(structured_norm(spec, 2, exec_of(st)));
}
BENCHMARK(BM_structured_norm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_action_profile(benchmark::State& st) {
  std::vector<double> s;
  for (int i = 0; i < 41; ++i) s.push_back(20.0 * (i + 1) / 42);
  for (auto _ : st) benchmark::DoNotOptimize(action_profile(1.0, 0.0, 20.0, s, exec_of(st)));
}
BENCHMARK(BM_action_profile)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_destruction_test(benchmark::State& st) {
  const auto& spec = golden_spec();
  auto pf = pushforward(spec.frame, FrequencyVector::parse("golden"), spec.params.tau);
  Vec w;
  for (std::size_t i = 0; i < pf.omega_new.dim(); ++i) w.push_back(pf.omega_new[i].to_double());
  DestructionOptions o;
  o.trials = 4;
  o.K = 256;
  for (auto _ : st) benchmark::DoNotOptimize(destruction_test(spec, w, o, exec_of(st)));
}
BENCHMARK(BM_destruction_test)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
