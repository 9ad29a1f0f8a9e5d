#pragma once

#include <cstdint>
#include <vector>

#include "vigrid/simulate.hpp"

namespace vigrid {

struct OptimizerConfig {
  int max_iterations = 80;
  double initial_step = 1.0;      // scaled by control range internally
  double shrink = 0.5;
  double grow = 1.5;
  int max_backtracks = 25;
  double fd_step_rel = 1e-4;      // finite-difference step as a fraction of range
  double tolerance = 1e-7;        // stop when an accepted step improves less than this
  IntegrationMethod integrator = IntegrationMethod::rk4;
  int substeps = 5;
  bool multi_start = true;
  int random_starts = 0;
  std::uint64_t seed = 0;
  int threads = 0;                // gradient parallelism; 0 = hardware default
};

struct EvalResult {
  double objective = 0.0;
  Trajectory trajectory;
};

struct HistoryEntry {
  int iteration = 0;
  double objective = 0.0;
  double step = 0.0;
  double gradient_norm = 0.0;
};

struct OptimizeResult {
  ControlSchedule best;
  double objective = 0.0;
  Trajectory trajectory;
  std::vector<HistoryEntry> history;
};

/// Rolls the schedule forward and returns the penalized objective with the
/// full trajectory.
EvalResult evaluate_schedule(const NetworkModel& net, const SystemState& x0,
                             const ControlSchedule& schedule, const Horizon& horizon,
                             const ObjectiveWeights& weights, const Limits& limits,
                             const OptimizerConfig& config);

/// Central finite differences per schedule entry, clipped at the control
/// bounds with one-sided fallback. Coordinates are evaluated in parallel.
std::vector<double> schedule_gradient(const NetworkModel& net, const SystemState& x0,
                                      const ControlSchedule& schedule,
                                      const Horizon& horizon,
                                      const ObjectiveWeights& weights,
                                      const Limits& limits,
                                      const OptimizerConfig& config);

/// Projected-gradient descent with backtracking line search. Accepted
/// iterates never increase the objective; the returned schedule is the best
/// over all starts (multi-start adds the constant lower-bound, desired and
/// upper-bound schedules plus seeded random constants).
OptimizeResult optimize_schedule(const NetworkModel& net, const SystemState& x0,
                                 const ControlSchedule& initial, const Horizon& horizon,
                                 const ObjectiveWeights& weights, const Limits& limits,
                                 const OptimizerConfig& config);

}  // namespace vigrid
