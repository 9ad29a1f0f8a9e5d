#pragma once

#include <vector>

#include "vigrid/network.hpp"

namespace vigrid {

struct CostBreakdown {
  double stage_integral = 0.0;     // integrated g terms
  double constraint_penalty = 0.0; // integrated phi terms
  double terminal_penalty = 0.0;   // g_N + phi_N at the final state
  double total = 0.0;              // always the exact sum of the three
};

/// Uniformly sampled run: N+1 states, N per-interval controls and storage
/// power values, N+1 cumulative energies (energy[0] = 0). Controls and
/// storage series follow NetworkModel::storage_bus_ids() order.
struct Trajectory {
  double t0 = 0.0;
  double ts = 0.0;
  std::vector<SystemState> states;
  std::vector<std::vector<double>> controls;
  std::vector<std::vector<double>> storage_power;
  std::vector<std::vector<double>> storage_energy;
  CostBreakdown cost;

  std::size_t stage_count() const { return controls.size(); }
  double time_at(std::size_t k) const { return t0 + ts * static_cast<double>(k); }
};

}  // namespace vigrid
