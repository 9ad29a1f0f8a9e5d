#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vigrid/grid.hpp"

namespace vigrid {

enum class DpVariant { basic, levelset };

/// Discretized horizon and grids for the backward sweep. State axes follow
/// the reduced state layout (all angles, then all frequencies); control axes
/// follow storage order.
struct DpConfig {
  double t0 = 0.0;
  double t1 = 0.0;
  double ts = 0.0;
  int stages = 0;
  StateGrid state_grid;
  StateGrid control_grid;
  double my_inf = 0.0;
  DpVariant variant = DpVariant::basic;
};

/// Grid-sampled penalized problem. Callbacks work on raw coordinate arrays so
/// sweeps stay allocation-free; they must be safe to call concurrently.
struct DpProblem {
  /// One Euler step of the discretized dynamics.
  std::function<void(const double* x, const double* u, double* x_next)> transition;
  /// Full transition charge (g_k + phi_k) * Ts; charged on arrival values.
  std::function<double(const double* x, const double* u, const double* x_next, int k)>
      stage_cost;
  /// g_N + phi_N, evaluated pointwise on the grid.
  std::function<double(const double* x)> terminal_cost;
  /// Signed distance to the terminal window (<= 0 inside); level-set variant.
  std::function<double(const double* x)> terminal_level;
};

/// Cost-to-go tables per stage. J[k] has one entry per state-grid point;
/// I is filled by the level-set variant only. The policy stores the
/// minimizing control-grid index per point (ties resolved to the lowest
/// index).
struct DpTables {
  std::vector<std::vector<double>> cost_to_go;       // stages+1 tables
  std::vector<std::vector<double>> level_set;        // stages+1 tables (levelset)
  std::vector<std::vector<std::int32_t>> policy;     // stages tables
};

/// Backward value recursion over the full grid. Grid points within one stage
/// are processed in parallel; results are independent of thread count.
DpTables backward_sweep(const DpConfig& config, const DpProblem& problem,
                        int threads = 0);

struct DpRolloutStep {
  std::vector<double> state;   // at stage k
  std::int32_t control_index = -1;
};

struct DpRollout {
  std::vector<std::vector<double>> states;     // stages+1
  std::vector<std::int32_t> control_indices;   // stages
  std::vector<std::vector<double>> controls;   // stages, control values
  double predicted_cost = 0.0;                 // interpolated J at x0
};

/// Forward pass from x0 re-optimizing over the full control grid at every
/// stage with the interpolated cost-to-go (not a nearest-policy lookup).
DpRollout dp_rollout(const DpConfig& config, const DpProblem& problem,
                     const DpTables& tables, std::span<const double> x0);

}  // namespace vigrid
