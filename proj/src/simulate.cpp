#include "vigrid/simulate.hpp"

#include <cmath>

namespace vigrid {

int Horizon::stages() const {
  if (ts <= 0.0) throw ValidationError("horizon needs ts > 0");
  const double n = (t1 - t0) / ts;
  const int stages = static_cast<int>(std::lround(n));
  if (stages <= 0 || std::abs(n - stages) > 1e-9) {
    throw ValidationError("horizon (t1 - t0) must be a positive integer multiple of ts");
  }
  return stages;
}

ControlSchedule ControlSchedule::constant(
    const std::vector<int>& storage_ids,
    const std::vector<std::pair<double, double>>& bounds, int stages,
    const std::vector<double>& value) {
  ControlSchedule s;
  s.storage_ids = storage_ids;
  s.bounds = bounds;
  s.values.assign(stages, value);
  return s;
}

void ControlSchedule::clamp_to_bounds() {
  for (auto& stage : values) {
    for (std::size_t j = 0; j < stage.size(); ++j) {
      stage[j] = std::clamp(stage[j], bounds[j].first, bounds[j].second);
    }
  }
}

bool ControlSchedule::within_bounds(double tol) const {
  for (const auto& stage : values) {
    for (std::size_t j = 0; j < stage.size(); ++j) {
      if (stage[j] < bounds[j].first - tol || stage[j] > bounds[j].second + tol) {
        return false;
      }
    }
  }
  return true;
}

Trajectory simulate_schedule(const NetworkModel& net, const SystemState& x0,
                             const ControlSchedule& schedule, const Horizon& horizon,
                             const ObjectiveWeights& weights, const Limits& limits,
                             const SimulateOptions& options) {
  const int stages = horizon.stages();
  if (static_cast<int>(schedule.values.size()) != stages) {
    throw ValidationError("control schedule stage count does not match the horizon");
  }
  const auto& storage_ids = net.storage_bus_ids();
  if (schedule.storage_ids != storage_ids) {
    throw ValidationError("control schedule storage buses do not match the network");
  }
  const int substeps = std::max(1, options.substeps);

  Trajectory traj;
  traj.t0 = horizon.t0;
  traj.ts = horizon.ts;
  traj.states.reserve(stages + 1);
  traj.states.push_back(x0);
  traj.storage_energy.assign(1, std::vector<double>(storage_ids.size(), 0.0));

  ControlInput u;
  double stage_sum = 0.0;
  double penalty_sum = 0.0;
  std::map<int, double> pr_map;

  for (int k = 0; k < stages; ++k) {
    u.virtual_inertia.clear();
    for (std::size_t j = 0; j < storage_ids.size(); ++j) {
      u.virtual_inertia[storage_ids[j]] = schedule.values[k][j];
    }
    SystemState x = traj.states.back();
    const double dt = horizon.ts / substeps;
    for (int s = 0; s < substeps; ++s) {
      x = net.step(x, u, dt, options.method);
    }

    const SystemState& prev = traj.states.back();
    std::vector<double> pr(storage_ids.size());
    std::vector<double> energy = traj.storage_energy.back();
    pr_map.clear();
    for (std::size_t j = 0; j < storage_ids.size(); ++j) {
      const int id = storage_ids[j];
      const int oi = net.omega_index(id);
      const StorageLimits& sl = limits.storage_at(id);
      pr[j] = storage_terminal_power(prev.omega[oi], x.omega[oi],
                                     schedule.values[k][j], horizon.ts,
                                     net.bus(id).damping, sl.pe);
      energy[j] += pr[j] * horizon.ts;
      pr_map[id] = pr[j];
    }

    stage_sum += stage_cost(x, u, weights, net, horizon.ts);
    penalty_sum += stage_penalty(x, u, pr_map, limits, weights, net) * horizon.ts;

    traj.states.push_back(std::move(x));
    traj.controls.push_back(schedule.values[k]);
    traj.storage_power.push_back(std::move(pr));
    traj.storage_energy.push_back(std::move(energy));
  }

  // optional energy-box hinge on the final cumulative change
  double energy_penalty = 0.0;
  for (std::size_t j = 0; j < storage_ids.size(); ++j) {
    const int id = storage_ids[j];
    const StorageLimits& sl = limits.storage_at(id);
    const double d = weights.weight_or_zero(weights.power_violation_weight, id);
    if (d == 0.0) continue;
    const double e = traj.storage_energy.back()[j];
    if (sl.energy_hi < kUnbounded) energy_penalty += d * std::max(e - sl.energy_hi, 0.0);
    if (sl.energy_lo > -kUnbounded) energy_penalty += d * std::max(sl.energy_lo - e, 0.0);
  }

  traj.cost.stage_integral = stage_sum;
  traj.cost.constraint_penalty = penalty_sum + energy_penalty;
  traj.cost.terminal_penalty =
      terminal_cost(traj.states.back(), limits, weights, net) + weights.terminal_offset;
  traj.cost.total =
      traj.cost.stage_integral + traj.cost.constraint_penalty + traj.cost.terminal_penalty;
  return traj;
}

}  // namespace vigrid
