#include "vigrid/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace vigrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_config(const DpConfig& config) {
  if (config.ts <= 0.0) throw ValidationError("dp config needs ts > 0");
  if (config.stages <= 0) throw ValidationError("dp config needs at least one stage");
  const double span = config.t1 - config.t0;
  if (std::abs(span - config.stages * config.ts) > 1e-9) {
    throw ValidationError("dp horizon is not an integer number of stages");
  }
}

void parallel_over(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
  unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, 64);
  if (n <= 1 || count < 2048) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + n - 1) / n;
  for (unsigned t = 0; t < n; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

// Extends the level-set interpolation outside the grid: positive box distance
// plus the clamped surface value keeps I monotone toward the interior.
double level_interp(const StateGrid& grid, std::span<const double> table,
                    std::span<const double> x, double* clamped) {
  const std::size_t d = grid.dim();
  double dist = grid.box_distance(x);
  if (dist == 0.0) return grid.interpolate(table, x);
  for (std::size_t k = 0; k < d; ++k) {
    clamped[k] = std::clamp(x[k], grid.axes()[k].lo, grid.axes()[k].hi);
  }
  return dist + grid.interpolate(table, std::span<const double>(clamped, d));
}

}  // namespace

DpTables backward_sweep(const DpConfig& config, const DpProblem& problem, int threads) {
  check_config(config);
  const StateGrid& sg = config.state_grid;
  const StateGrid& cg = config.control_grid;
  const std::size_t n_states = sg.size();
  const std::size_t n_controls = cg.size();
  const std::size_t sd = sg.dim();
  const std::size_t cd = cg.dim();
  const int stages = config.stages;
  const bool levelset = config.variant == DpVariant::levelset;

  DpTables tables;
  tables.cost_to_go.assign(stages + 1, {});
  tables.policy.assign(stages, {});
  if (levelset) tables.level_set.assign(stages + 1, {});

  // control grid points are reused across every state and stage
  std::vector<double> control_points(n_controls * cd);
  for (std::size_t c = 0; c < n_controls; ++c) {
    cg.point_of(c, std::span<double>(control_points.data() + c * cd, cd));
  }

  // terminal tables
  tables.cost_to_go[stages].resize(n_states);
  if (levelset) tables.level_set[stages].resize(n_states);
  {
    std::vector<double>& jn = tables.cost_to_go[stages];
    parallel_over(n_states, threads, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> x(sd);
      for (std::size_t s = lo; s < hi; ++s) {
        sg.point_of(s, x);
        jn[s] = problem.terminal_cost(x.data());
        if (levelset) tables.level_set[stages][s] = problem.terminal_level(x.data());
      }
    });
  }

  std::vector<char> feasible(levelset ? n_states : 0);

  for (int k = stages - 1; k >= 0; --k) {
    const std::vector<double>& j_next = tables.cost_to_go[k + 1];
    tables.cost_to_go[k].resize(n_states);
    tables.policy[k].resize(n_states);
    std::vector<double>& j_here = tables.cost_to_go[k];
    std::vector<std::int32_t>& pol = tables.policy[k];

    if (!levelset) {
      parallel_over(n_states, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> x(sd), xn(sd);
        for (std::size_t s = lo; s < hi; ++s) {
          sg.point_of(s, x);
          double best = kInf;
          std::int32_t best_u = 0;
          for (std::size_t c = 0; c < n_controls; ++c) {
            const double* u = control_points.data() + c * cd;
            problem.transition(x.data(), u, xn.data());
            const double tail = sg.contains(xn) ? sg.interpolate(j_next, xn)
                                                : config.my_inf;
            const double q = problem.stage_cost(x.data(), u, xn.data(), k) + tail;
            if (q < best) {
              best = q;
              best_u = static_cast<std::int32_t>(c);
            }
          }
          j_here[s] = best;
          pol[s] = best_u;
        }
      });
      continue;
    }

    const std::vector<double>& i_next = tables.level_set[k + 1];
    tables.level_set[k].resize(n_states);
    std::vector<double>& i_here = tables.level_set[k];
    // corner feasibility mask of the stage-(k+1) tables
    parallel_over(n_states, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t s = lo; s < hi; ++s) feasible[s] = i_next[s] <= 0.0 ? 1 : 0;
    });

    parallel_over(n_states, threads, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> x(sd), xn(sd), clamp_buf(sd);
      for (std::size_t s = lo; s < hi; ++s) {
        sg.point_of(s, x);
        double best_feasible = kInf;       // min Q over controls with I <= 0
        std::int32_t best_feasible_u = -1;
        double min_level = kInf;           // min I over all controls
        double q_at_min_level = kInf;      // Q of the most-feasible control
        std::int32_t min_level_u = 0;
        for (std::size_t c = 0; c < n_controls; ++c) {
          const double* u = control_points.data() + c * cd;
          problem.transition(x.data(), u, xn.data());
          const double level = level_interp(sg, i_next, xn, clamp_buf.data());
          double tail;
          if (sg.contains(xn)) {
            tail = sg.interpolate_masked(j_next, feasible, xn);
          } else {
            tail = config.my_inf;
          }
          const double q = problem.stage_cost(x.data(), u, xn.data(), k) + tail;
          if (level <= 0.0 && q < best_feasible) {
            best_feasible = q;
            best_feasible_u = static_cast<std::int32_t>(c);
          }
          if (level < min_level) {
            min_level = level;
            q_at_min_level = q;
            min_level_u = static_cast<std::int32_t>(c);
          }
        }
        i_here[s] = min_level;
        if (best_feasible_u >= 0) {
          j_here[s] = best_feasible;
          pol[s] = best_feasible_u;
        } else {
          j_here[s] = q_at_min_level;
          pol[s] = min_level_u;
        }
      }
    });
  }
  return tables;
}

DpRollout dp_rollout(const DpConfig& config, const DpProblem& problem,
                     const DpTables& tables, std::span<const double> x0) {
  check_config(config);
  const StateGrid& sg = config.state_grid;
  const StateGrid& cg = config.control_grid;
  const std::size_t sd = sg.dim();
  const std::size_t cd = cg.dim();
  const std::size_t n_controls = cg.size();
  const bool levelset = config.variant == DpVariant::levelset;
  if (!sg.contains(x0)) {
    throw SolverError("rollout initial state lies outside the state grid");
  }

  DpRollout out;
  out.states.emplace_back(x0.begin(), x0.end());
  out.predicted_cost = sg.interpolate(tables.cost_to_go[0], x0);

  std::vector<double> u(cd), xn(sd), best_xn(sd), clamp_buf(sd);
  std::vector<char> feasible;
  for (int k = 0; k < config.stages; ++k) {
    const std::vector<double>& j_next = tables.cost_to_go[k + 1];
    const std::vector<double>* i_next = levelset ? &tables.level_set[k + 1] : nullptr;
    if (levelset) {
      feasible.resize(sg.size());
      for (std::size_t s = 0; s < sg.size(); ++s) feasible[s] = (*i_next)[s] <= 0.0;
    }
    const std::vector<double>& x = out.states.back();

    // first pass (levelset): does any control reach the backward-reachable set?
    bool any_feasible = false;
    if (levelset) {
      for (std::size_t c = 0; c < n_controls && !any_feasible; ++c) {
        cg.point_of(c, u);
        problem.transition(x.data(), u.data(), xn.data());
        if (level_interp(sg, *i_next, xn, clamp_buf.data()) <= 0.0) any_feasible = true;
      }
    }

    double best = kInf;
    std::int32_t best_c = -1;
    for (std::size_t c = 0; c < n_controls; ++c) {
      cg.point_of(c, u);
      problem.transition(x.data(), u.data(), xn.data());
      double tail;
      if (levelset) {
        if (any_feasible &&
            level_interp(sg, *i_next, xn, clamp_buf.data()) > 0.0) {
          continue;
        }
        tail = sg.contains(xn) ? sg.interpolate_masked(j_next, feasible, xn)
                               : config.my_inf;
      } else {
        tail = sg.contains(xn) ? sg.interpolate(j_next, xn) : config.my_inf;
      }
      const double q = problem.stage_cost(x.data(), u.data(), xn.data(), k) + tail;
      if (q < best) {
        best = q;
        best_c = static_cast<std::int32_t>(c);
        best_xn = xn;
      }
    }
    if (best_c < 0) {
      throw SolverError("rollout found no admissible control at stage " +
                        std::to_string(k));
    }
    if (!sg.contains(best_xn)) {
      throw SolverError("rollout trajectory exits the state grid at stage " +
                        std::to_string(k));
    }
    cg.point_of(static_cast<std::size_t>(best_c), u);
    out.control_indices.push_back(best_c);
    out.controls.push_back(u);
    out.states.push_back(best_xn);
  }
  return out;
}

}  // namespace vigrid
