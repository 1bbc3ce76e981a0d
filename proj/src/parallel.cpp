#include "dampsym/parallel.hpp"

#include <exception>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dampsym {

namespace {

// Exceptions may not cross an OpenMP region; the first failure (by run index)
// is rethrown after the loop.
template <typename Result, typename Fn>
std::vector<Result> run_parallel(std::span<const RunSpec> runs, Fn&& fn) {
  const auto count = static_cast<std::ptrdiff_t>(runs.size());
  std::vector<std::optional<Result>> slots(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      slots[static_cast<std::size_t>(i)].emplace(fn(runs[static_cast<std::size_t>(i)]));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Result> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

template <typename Result, typename Fn>
std::vector<Result> run_serial(std::span<const RunSpec> runs, Fn&& fn) {
  std::vector<Result> out;
  out.reserve(runs.size());
  for (const RunSpec& r : runs) out.push_back(fn(r));
  return out;
}

Trajectory integrate_one(const RunSpec& r) {
  return integrate(r.system, r.initial, r.tau, r.n_steps, r.method, r.guard);
}

PhaseState propagate_one(const RunSpec& r) {
  return propagate(r.system, r.initial, r.tau, r.n_steps, r.method, r.guard);
}

}  // namespace

std::vector<Trajectory> integrate_batch(std::span<const RunSpec> runs) {
  return run_parallel<Trajectory>(runs, integrate_one);
}

std::vector<Trajectory> integrate_batch_serial(std::span<const RunSpec> runs) {
  return run_serial<Trajectory>(runs, integrate_one);
}

std::vector<PhaseState> propagate_batch(std::span<const RunSpec> runs) {
  return run_parallel<PhaseState>(runs, propagate_one);
}

std::vector<PhaseState> propagate_batch_serial(std::span<const RunSpec> runs) {
  return run_serial<PhaseState>(runs, propagate_one);
}

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace dampsym
