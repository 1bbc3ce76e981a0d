#pragma once

// Batched execution of independent runs. Each run is sequential by data
// dependence; runs are distributed over OpenMP threads. The *_serial variants
// are the reference the parallel kernels are tested against (results must be
// bit-identical).

#include <cstddef>
#include <span>
#include <vector>

#include "dampsym/integrators.hpp"

namespace dampsym {

struct RunSpec {
  DampedLinearSystem system;
  PhaseState initial;
  double tau = 0.0;
  std::size_t n_steps = 0;
  Method method = Method::midpoint_direct;
  double guard = kDefaultStiffnessGuard;
};

std::vector<Trajectory> integrate_batch(std::span<const RunSpec> runs);
std::vector<Trajectory> integrate_batch_serial(std::span<const RunSpec> runs);

std::vector<PhaseState> propagate_batch(std::span<const RunSpec> runs);
std::vector<PhaseState> propagate_batch_serial(std::span<const RunSpec> runs);

/// Worker threads available to the parallel kernels (1 without OpenMP).
int parallel_threads();

}  // namespace dampsym
