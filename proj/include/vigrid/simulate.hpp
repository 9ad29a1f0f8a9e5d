#pragma once

#include <utility>
#include <vector>

#include "vigrid/limits.hpp"
#include "vigrid/network.hpp"
#include "vigrid/trajectory.hpp"

namespace vigrid {

struct Horizon {
  double t0 = 0.0;
  double t1 = 0.0;
  double ts = 0.0;

  int stages() const;
};

/// Piecewise-constant virtual-inertia plan: values[k][j] holds M_e over
/// [t0 + k ts, t0 + (k+1) ts) for the j-th storage bus (model order).
struct ControlSchedule {
  std::vector<int> storage_ids;
  std::vector<std::pair<double, double>> bounds;
  std::vector<std::vector<double>> values;

  static ControlSchedule constant(const std::vector<int>& storage_ids,
                                  const std::vector<std::pair<double, double>>& bounds,
                                  int stages, const std::vector<double>& value);
  void clamp_to_bounds();
  bool within_bounds(double tol = 0.0) const;
  std::size_t entry_count() const { return values.size() * storage_ids.size(); }
};

struct SimulateOptions {
  IntegrationMethod method = IntegrationMethod::rk4;
  int substeps = 1;
};

/// Integrates the schedule from x0 and assembles the full Trajectory: states
/// at every ts sample, storage terminal power per interval (Eq-style first
/// difference at ts resolution), cumulative energy, and the cost breakdown.
/// Stage terms are charged on arrival states: g(x_{k+1}, u_k) ts summed over
/// k plus the terminal window penalty and flat terminal offset.
Trajectory simulate_schedule(const NetworkModel& net, const SystemState& x0,
                             const ControlSchedule& schedule, const Horizon& horizon,
                             const ObjectiveWeights& weights, const Limits& limits,
                             const SimulateOptions& options);

}  // namespace vigrid
