#pragma once

#include <limits>
#include <map>
#include <optional>

#include "vigrid/network.hpp"
#include "vigrid/trajectory.hpp"

namespace vigrid {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Transient band |omega_i| <= omega_max plus the terminal window applied at
/// t1. Buses absent from omega_max are unconstrained.
struct FrequencyLimits {
  std::map<int, double> omega_max;
  double terminal_omega_lo = -kUnbounded;
  double terminal_omega_hi = kUnbounded;
  double terminal_delta_lo = -kUnbounded;
  double terminal_delta_hi = kUnbounded;
};

/// Per-storage-bus operating box: terminal power, cumulative energy change,
/// and the baseline exchange P^e entering the P^r formula.
struct StorageLimits {
  double pr_min = -kUnbounded;
  double pr_max = kUnbounded;
  double energy_lo = -kUnbounded;
  double energy_hi = kUnbounded;
  double pe = 0.0;
};

struct Limits {
  FrequencyLimits frequency;
  std::map<int, StorageLimits> storage;

  const StorageLimits& storage_at(int bus_id) const;
};

/// Hinge objective on one line: max(flow - threshold, 0) enters the stage
/// cost scaled by weight.
struct FlowObjective {
  int from = 0;
  int to = 0;
  double threshold = 0.0;
  double weight = 1.0;
};

struct ObjectiveWeights {
  std::map<int, double> inertia_weight;          // a_s, per storage bus
  std::map<int, double> inertia_desired;         // M_{e,s,d}, seconds
  std::map<int, double> omega_weight;            // b_i
  std::map<int, double> angle_weight;            // c_i
  std::map<int, double> power_violation_weight;  // d_s, per storage bus
  double terminal_penalty = 0.0;                 // charged when the final window is missed
  double terminal_offset = 0.0;                  // flat terminal charge (paper-style reporting)
  std::optional<FlowObjective> flow;

  double weight_or_zero(const std::map<int, double>& m, int bus_id) const {
    auto it = m.find(bus_id);
    return it == m.end() ? 0.0 : it->second;
  }
};

/// dt * [ sum_s a_s (M_e - M_d)^2 + sum_i b_i |omega_i| + sum_i c_i delta_i^2
///        + flow hinge ]. Total function, never throws on numeric input.
double stage_cost(const SystemState& state, const ControlInput& u,
                  const ObjectiveWeights& weights, const NetworkModel& net, double dt);

/// Instantaneous constraint penalty: d_s hinges on the storage power box plus
/// the terminal_penalty charge if any |omega_i| exceeds its transient bound.
/// Zero exactly when every encoded constraint holds. Callers integrate it.
double stage_penalty(const SystemState& state, const ControlInput& u,
                     const std::map<int, double>& storage_power, const Limits& limits,
                     const ObjectiveWeights& weights, const NetworkModel& net);

/// 0 inside the terminal window, terminal_penalty outside (the flat
/// terminal_offset is reported separately by the solvers).
double terminal_cost(const SystemState& state, const Limits& limits,
                     const ObjectiveWeights& weights, const NetworkModel& net);

/// Signed distance to the terminal window: <= 0 inside. Used as the
/// level-set terminal function.
double terminal_window_distance(const SystemState& state, const Limits& limits,
                                const NetworkModel& net);

/// sum_k sum_i b_i |omega_i(k)| * ts over the N arrival samples k = 1..N.
double freq_abs_integral(const Trajectory& traj, const ObjectiveWeights& weights,
                         const NetworkModel& net);

/// Running sums E(K) = sum_{k<=K} P^r(k) * dt of one storage power series.
std::vector<double> energy_series(const std::vector<double>& storage_power, double dt);

struct PowerPeak {
  double value = 0.0;
  double time = 0.0;
};

/// Max line flow over the trajectory samples; earliest time wins ties.
PowerPeak power_peak(const Trajectory& traj, const NetworkModel& net, int from, int to);

}  // namespace vigrid
