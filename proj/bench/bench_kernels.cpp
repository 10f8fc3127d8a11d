// Timing comparison of the OpenMP kernels against their serial reference
// paths: operator assembly (the dominant setup cost) and the Monte Carlo
// oracle. Run with an optional repetition count (default 3).
#include "qcds/mc.hpp"
#include "qcds/operators.hpp"
#include "qcds/pricer.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace qcds;

namespace {

template <typename Fn>
double best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (s < best) best = s;
  }
  return best;
}

} // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("reps=%d threads=%d\n", reps, threads);

  ModelConfig cfg = default_config();
  for (int d = 0; d < 4; ++d) {
    cfg.numerics.nodes_per_dim[d] = 9;
    cfg.numerics.patches_per_dim[d] = 4;
  }
  Geometry geom = build_geometry(cfg);
  std::printf("assembly config: 9^4 nodes, 4^4 patches (%d unknowns)\n",
              geom.space->size());

  const double t_serial =
      best_of(reps, [&] { build_v_operator(cfg, *geom.space, false); });
  const double t_parallel =
      best_of(reps, [&] { build_v_operator(cfg, *geom.space, true); });
  std::printf("%-28s %8.3fs\n", "assembly serial", t_serial);
  std::printf("%-28s %8.3fs  speedup %.2fx\n", "assembly OpenMP", t_parallel,
              t_serial / t_parallel);

  const long paths = 20000;
  const int steps = 120;
  std::printf("mc config: %ld paths, %d steps\n", paths, steps);
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  const double mc_serial =
      best_of(reps, [&] { simulate(cfg, 5.0, steps, paths, 42); });
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
  const double mc_parallel =
      best_of(reps, [&] { simulate(cfg, 5.0, steps, paths, 42); });
  std::printf("%-28s %8.3fs\n", "mc 1 thread", mc_serial);
  std::printf("%-28s %8.3fs  speedup %.2fx\n", "mc max threads", mc_parallel,
              mc_serial / mc_parallel);
  return 0;
}
