#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <random>

#include "otlab/cesaro.hpp"
#include "otlab/commutant.hpp"
#include "otlab/dirtree.hpp"
#include "otlab/lazyop.hpp"
#include "otlab/matkernel.hpp"
#include "otlab/registry.hpp"
#include "otlab/weightgen.hpp"

namespace {

using namespace otlab;

CMatrix random_unitary(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) G(i, j) = Complex(g(rng), g(rng));
  }
  return Eigen::HouseholderQR<CMatrix>(G).householderQ();
}

// Unitarily diagonalizable with two peripheral phases and stable bulk, so the
// averaged powers converge and both routes stay well conditioned.
CMatrix mixed_power_bounded(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMatrix U = random_unitary(n, rng);
  CMatrix D = CMatrix::Zero(n, n);
  D(0, 0) = Complex(1.0, 0.0);
  D(1, 1) = std::polar(1.0, 2.1);
  for (int i = 2; i < n; ++i) D(i, i) = std::polar(0.2 + 0.6 * u(rng), 6.28 * u(rng));
  return U * D * U.adjoint();
}

BlockTriple mixed_triple(int l, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  CMatrix U = random_unitary(l, rng);
  CMatrix D0 = CMatrix::Zero(l, l);
  for (int i = 0; i < l; ++i) D0(i, i) = std::polar(0.2 + 0.5 * u(rng), 6.28 * u(rng));
  CMatrix D1 = CMatrix::Zero(l, l);
  for (int i = 0; i < l; ++i) D1(i, i) = std::polar(1.0, 6.28 * u(rng));
  CMatrix T01(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) T01(i, j) = Complex(g(rng), g(rng));
  }
  return make_block_triple(U * D0 * U.adjoint(), T01, D1);
}

TreeShift dyadic_pair() {
  DirectedTree::Tail t0;
  t0.attach = 0;
  t0.gen = WeightGen::table_then_constant_gen({{1, 0.5}}, 1.0);
  DirectedTree::Tail t1;
  t1.attach = 0;
  t1.gen = WeightGen::table_then_constant_gen({{1, 0.25}}, 1.0);
  DirectedTree t = DirectedTree::build({"b"}, {-1}, {t0, t1},
                                       WeightGen::table_then_constant_gen({{0, 0.5}}, 1.0));
  return TreeShift::build(std::move(t), {1.0});
}

void BM_cesaro_iterative(benchmark::State& state) {
  CMatrix T = mixed_power_bounded(static_cast<int>(state.range(0)), 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cesaro_limit_iterative(T));
  }
}
BENCHMARK(BM_cesaro_iterative)->Arg(4)->Arg(8)->Arg(16);

void BM_cesaro_spectral(benchmark::State& state) {
  CMatrix T = mixed_power_bounded(static_cast<int>(state.range(0)), 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cesaro_limit_spectral(T));
  }
}
BENCHMARK(BM_cesaro_spectral)->Arg(4)->Arg(8)->Arg(16);

void BM_injectivity_kernel(benchmark::State& state) {
  BlockTriple bt = mixed_triple(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(injectivity_kernel(bt));
  }
}
BENCHMARK(BM_injectivity_kernel)->Arg(2)->Arg(3)->Arg(4);

void BM_banach_scan(benchmark::State& state) {
  WeightGen runs = WeightGen::run_indicator_gen(3, std::sqrt(2.0));
  auto xsq = [&runs](long long j) {
    double w = runs.weight(j);
    return w * w;
  };
  long long K = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(banach_range_bounds(xsq, K, 10, {K - 10}));
  }
}
BENCHMARK(BM_banach_scan)->Arg(2194)->Arg(59059);

void BM_lazy_power(benchmark::State& state) {
  LazyOperator T = example_registry("ch3_no_cesaro").ops.at("T");
  FinVec e1 = FinVec::basis(BasisIndex::Nat(1), 1.0);
  long long n = state.range(0);
  for (auto _ : state) {
    FinVec x = e1;
    for (long long i = 0; i < n; ++i) x = apply(T, x);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_lazy_power)->Arg(64)->Arg(512);

void BM_tree_asymptotics(benchmark::State& state) {
  TreeShift s = dyadic_pair();
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyze_asymptotics(s));
  }
}
BENCHMARK(BM_tree_asymptotics);

void BM_binary_tree_report(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(binary_tree_preset());
  }
}
BENCHMARK(BM_binary_tree_report);

void BM_backward_cyclic(benchmark::State& state) {
  auto ones = [](int, long long) { return 1.0; };
  long long K = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward_cyclic_vector(ones, 2, K, 8));
  }
}
BENCHMARK(BM_backward_cyclic)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
