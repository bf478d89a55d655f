// Parallel kernels against their serial references: wall time and agreement.
//
//   bench_kernels [--reps N] [--episodes N]

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <random>

#include "hca/agents.hpp"
#include "hca/envs.hpp"
#include "hca/hindsight.hpp"
#include "hca/montecarlo.hpp"
#include "hca/reference.hpp"

using namespace hca;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = INFINITY;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const std::string& name, double serial, double parallel, double diff) {
  std::cout << std::left << std::setw(34) << name << std::right << std::setw(12) << std::fixed
            << std::setprecision(4) << serial << std::setw(12) << parallel << std::setw(9)
            << std::setprecision(2) << serial / parallel << "x" << std::setw(12) << std::scientific
            << std::setprecision(1) << diff << std::defaultfloat << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernels"};
  int reps = 3;
  long long episodes = 20000;
  app.add_option("--reps", reps, "repetitions, best time kept")->check(CLI::PositiveNumber);
  app.add_option("--episodes", episodes, "Monte Carlo episodes")->check(CLI::Range(2LL, 100'000'000LL));
  CLI11_PARSE(app, argc, argv);

  std::cout << "threads " << omp_get_max_threads() << "\n";
  std::cout << std::left << std::setw(34) << "kernel" << std::right << std::setw(12) << "serial s"
            << std::setw(12) << "parallel s" << std::setw(10) << "speedup" << std::setw(12) << "max|diff|"
            << '\n';

  Rng rng(1);
  std::normal_distribution<double> normal(0.0, 0.5);
  RandomMdpConfig cfg;
  cfg.n_states = 60;
  cfg.n_actions = 4;
  cfg.max_successors = 6;
  const TabularMdp big = make_random_mdp(cfg, rng);
  PolicyTable pi = PolicyTable::uniform(big);
  for (double& l : pi.logits()) l = normal(rng.engine());

  {
    ExactHindsight a, b;
    const int D = 40;
    const double ts = best_of(reps, [&] { b = exact_hindsight_serial(big, pi, D); });
    const double tp = best_of(reps, [&] { a = exact_hindsight(big, pi, D); });
    double diff = 0.0;
    for (int d = 1; d <= D; ++d)
      for (int s = 0; s < big.n_states(); ++s)
        for (int x = 0; x < big.n_states(); ++x) {
          if (!a.defined(d, s, x)) continue;
          for (int k = 0; k < big.n_actions(); ++k)
            diff = std::max(diff, std::abs(a.prob(d, s, x, k) - b.prob(d, s, x, k)));
        }
    report("exact_hindsight (S=60, D=40)", ts, tp, diff);
  }
  {
    ValueTable a, b;
    const TabularMdp slow = big.with_gamma(0.999);
    const double ts = best_of(reps, [&] { b = evaluate_policy_serial(slow, pi, {1e-12, 10'000'000}); });
    const double tp = best_of(reps, [&] { a = evaluate_policy(slow, pi, 1e-12); });
    double diff = 0.0;
    for (int s = 0; s < slow.n_states(); ++s) diff = std::max(diff, std::abs(a[s] - b[s]));
    report("evaluate_policy (S=60, g=0.999)", ts, tp, diff);
  }
  {
    FrozenLakeConfig fl;
    const TabularMdp lake = make_frozenlake(fl);
    PolicyTable p = PolicyTable::uniform(lake);
    const EpisodeEstimator est = [&](const Trajectory& ep) {
      return reinforce_update(RolloutBatch{{ep}}, p, lake.gamma());
    };
    McOptions opt;
    opt.episodes = episodes;
    McEstimate a, b;
    const double ts = best_of(reps, [&] { b = monte_carlo_update_serial(lake, p, est, opt); });
    const double tp = best_of(reps, [&] { a = monte_carlo_update(lake, p, est, opt); });
    report("monte_carlo_update (frozenlake)", ts, tp, max_abs_diff(a.mean, b.mean));
  }
  return 0;
}
