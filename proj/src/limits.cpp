#include "vigrid/limits.hpp"

#include <algorithm>
#include <cmath>

namespace vigrid {

const StorageLimits& Limits::storage_at(int bus_id) const {
  static const StorageLimits unbounded{};
  auto it = storage.find(bus_id);
  return it == storage.end() ? unbounded : it->second;
}

double stage_cost(const SystemState& state, const ControlInput& u,
                  const ObjectiveWeights& weights, const NetworkModel& net, double dt) {
  double g = 0.0;
  for (const auto& [bus_id, a] : weights.inertia_weight) {
    if (a == 0.0) continue;
    const double md = weights.weight_or_zero(weights.inertia_desired, bus_id);
    const double diff = u.at(bus_id) - md;
    g += a * diff * diff;
  }
  for (const auto& [bus_id, b] : weights.omega_weight) {
    if (b == 0.0) continue;
    const int oi = net.omega_index(bus_id);
    if (oi >= 0) g += b * std::abs(state.omega[oi]);
  }
  for (const auto& [bus_id, c] : weights.angle_weight) {
    if (c == 0.0) continue;
    const int ai = net.angle_index(bus_id);
    if (ai >= 0) g += c * state.delta[ai] * state.delta[ai];
  }
  if (weights.flow) {
    const Line& l = net.line(weights.flow->from, weights.flow->to);
    const double f = net.line_flow(state, Line{weights.flow->from, weights.flow->to,
                                               l.susceptance});
    g += weights.flow->weight * std::max(f - weights.flow->threshold, 0.0);
  }
  return g * dt;
}

double stage_penalty(const SystemState& state, const ControlInput& u,
                     const std::map<int, double>& storage_power, const Limits& limits,
                     const ObjectiveWeights& weights, const NetworkModel& net) {
  (void)u;
  double phi = 0.0;
  for (const auto& [bus_id, pr] : storage_power) {
    const double d = weights.weight_or_zero(weights.power_violation_weight, bus_id);
    if (d == 0.0) continue;
    const StorageLimits& sl = limits.storage_at(bus_id);
    if (sl.pr_max < kUnbounded) phi += d * std::max(pr - sl.pr_max, 0.0);
    if (sl.pr_min > -kUnbounded) phi += d * std::max(sl.pr_min - pr, 0.0);
  }
  for (const auto& [bus_id, wmax] : limits.frequency.omega_max) {
    const int oi = net.omega_index(bus_id);
    if (oi >= 0 && std::abs(state.omega[oi]) > wmax) {
      phi += weights.terminal_penalty;
    }
  }
  return phi;
}

double terminal_cost(const SystemState& state, const Limits& limits,
                     const ObjectiveWeights& weights, const NetworkModel& net) {
  return terminal_window_distance(state, limits, net) <= 0.0 ? 0.0
                                                             : weights.terminal_penalty;
}

double terminal_window_distance(const SystemState& state, const Limits& limits,
                                const NetworkModel& net) {
  const FrequencyLimits& f = limits.frequency;
  double dist = -kUnbounded;
  for (std::size_t i = 0; i < state.omega.size(); ++i) {
    dist = std::max(dist, f.terminal_omega_lo - state.omega[i]);
    dist = std::max(dist, state.omega[i] - f.terminal_omega_hi);
  }
  for (std::size_t i = 0; i < state.delta.size(); ++i) {
    dist = std::max(dist, f.terminal_delta_lo - state.delta[i]);
    dist = std::max(dist, state.delta[i] - f.terminal_delta_hi);
  }
  (void)net;
  if (dist == -kUnbounded) dist = 0.0;  // fully unconstrained window
  return dist;
}

double freq_abs_integral(const Trajectory& traj, const ObjectiveWeights& weights,
                         const NetworkModel& net) {
  if (traj.states.empty()) {
    throw ValidationError("freq_abs_integral needs a non-empty trajectory");
  }
  double sum = 0.0;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const SystemState& s = traj.states[k];
    for (const auto& [bus_id, b] : weights.omega_weight) {
      if (b == 0.0) continue;
      const int oi = net.omega_index(bus_id);
      if (oi >= 0) sum += b * std::abs(s.omega[oi]);
    }
  }
  return sum * traj.ts;
}

std::vector<double> energy_series(const std::vector<double>& storage_power, double dt) {
  std::vector<double> e;
  e.reserve(storage_power.size());
  double acc = 0.0;
  for (double p : storage_power) {
    acc += p * dt;
    e.push_back(acc);
  }
  return e;
}

PowerPeak power_peak(const Trajectory& traj, const NetworkModel& net, int from, int to) {
  const Line& l = net.line(from, to);
  const Line oriented{from, to, l.susceptance};
  PowerPeak peak;
  peak.value = -kUnbounded;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double f = net.line_flow(traj.states[k], oriented);
    if (f > peak.value) {
      peak.value = f;
      peak.time = traj.time_at(k);
    }
  }
  return peak;
}

}  // namespace vigrid
