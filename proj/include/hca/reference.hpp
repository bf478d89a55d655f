#pragma once

// Single-threaded reference versions of the parallel kernels. They follow the
// plainest formulation and are used by tests and the benchmark.

#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"
#include "hca/montecarlo.hpp"

namespace hca {

ExactHindsight exact_hindsight_serial(const TabularMdp& mdp, const PolicyTable& policy,
                                      int delta_max);

ValueTable evaluate_policy_serial(const TabularMdp& mdp, const PolicyTable& policy,
                                  const PolicyEvaluationOptions& options = {});

McEstimate monte_carlo_update_serial(const TabularMdp& mdp, const PolicyTable& policy,
                                     const EpisodeEstimator& estimator, const McOptions& options);

}  // namespace hca
