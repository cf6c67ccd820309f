#include <benchmark/benchmark.h>

#include <omp.h>

#include "kinesphere/eurdf.hpp"
#include "kinesphere/install.hpp"

using namespace kinesphere;

namespace {

struct Setup {
  PlatformDescription platform;
  VsamSpec spec;
};

Setup setup(const char* name) {
  PlatformDescription p = load_eurdf_file(std::string(KINESPHERE_FIXTURES) + "/" + name + ".eurdf");
  std::vector<std::string> origins;
  for (const auto& [label, joint] : p.labels.distals) origins.push_back(label);
  for (const auto& [label, links] : p.labels.core) origins.push_back(label);
  VsamSpec spec = build_vsam(p, origins, laban26(), 3);
  return {std::move(p), std::move(spec)};
}

void BM_InstallParallel(benchmark::State& state, const char* name) {
  Setup s = setup(name);
  for (auto _ : state) benchmark::DoNotOptimize(auto_install(s.platform, s.spec, {}).store.pose_size());
  state.counters["threads"] = omp_get_max_threads();
}

void BM_InstallSerial(benchmark::State& state, const char* name) {
  Setup s = setup(name);
  for (auto _ : state) benchmark::DoNotOptimize(auto_install_serial(s.platform, s.spec, {}).store.pose_size());
}

}  // namespace

BENCHMARK_CAPTURE(BM_InstallParallel, youbot, "youbot")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_InstallSerial, youbot, "youbot")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_InstallParallel, nao, "nao")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_InstallSerial, nao, "nao")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_InstallParallel, baxter, "baxter")->Unit(benchmark::kMillisecond)->Iterations(2);
BENCHMARK_CAPTURE(BM_InstallSerial, baxter, "baxter")->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
