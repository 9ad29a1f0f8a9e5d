#include "vigrid/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace vigrid {

namespace {

SimulateOptions sim_options(const OptimizerConfig& config) {
  return SimulateOptions{config.integrator, config.substeps};
}

double entry_get(const ControlSchedule& s, std::size_t flat) {
  const std::size_t ns = s.storage_ids.size();
  return s.values[flat / ns][flat % ns];
}

void entry_set(ControlSchedule& s, std::size_t flat, double v) {
  const std::size_t ns = s.storage_ids.size();
  s.values[flat / ns][flat % ns] = v;
}

}  // namespace

EvalResult evaluate_schedule(const NetworkModel& net, const SystemState& x0,
                             const ControlSchedule& schedule, const Horizon& horizon,
                             const ObjectiveWeights& weights, const Limits& limits,
                             const OptimizerConfig& config) {
  EvalResult r;
  r.trajectory = simulate_schedule(net, x0, schedule, horizon, weights, limits,
                                   sim_options(config));
  r.objective = r.trajectory.cost.total;
  return r;
}

std::vector<double> schedule_gradient(const NetworkModel& net, const SystemState& x0,
                                      const ControlSchedule& schedule,
                                      const Horizon& horizon,
                                      const ObjectiveWeights& weights,
                                      const Limits& limits,
                                      const OptimizerConfig& config) {
  const std::size_t n = schedule.entry_count();
  const std::size_t ns = schedule.storage_ids.size();
  std::vector<double> grad(n, 0.0);

  auto coordinate = [&](std::size_t flat) {
    const std::size_t j = flat % ns;
    const auto [lo, hi] = schedule.bounds[j];
    const double h = config.fd_step_rel * (hi - lo);
    const double v = entry_get(schedule, flat);
    const double up = std::min(v + h, hi);
    const double dn = std::max(v - h, lo);
    if (up <= dn) return 0.0;
    ControlSchedule s = schedule;
    entry_set(s, flat, up);
    const double f_up =
        simulate_schedule(net, x0, s, horizon, weights, limits, sim_options(config))
            .cost.total;
    entry_set(s, flat, dn);
    const double f_dn =
        simulate_schedule(net, x0, s, horizon, weights, limits, sim_options(config))
            .cost.total;
    return (f_up - f_dn) / (up - dn);
  };

  unsigned workers = config.threads > 0
                         ? static_cast<unsigned>(config.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, 32);
  if (workers <= 1 || n < 8) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = coordinate(i);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) grad[i] = coordinate(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return grad;
}

namespace {

struct SingleRun {
  ControlSchedule schedule;
  double objective = 0.0;
  Trajectory trajectory;
  std::vector<HistoryEntry> history;
};

SingleRun descend(const NetworkModel& net, const SystemState& x0,
                  ControlSchedule schedule, const Horizon& horizon,
                  const ObjectiveWeights& weights, const Limits& limits,
                  const OptimizerConfig& config, int history_offset) {
  SingleRun run;
  if (!schedule.within_bounds(1e-12)) {
    throw ValidationError("initial control schedule violates its bounds");
  }
  EvalResult cur = evaluate_schedule(net, x0, schedule, horizon, weights, limits, config);

  double range = 0.0;
  for (const auto& [lo, hi] : schedule.bounds) range = std::max(range, hi - lo);
  double step = config.initial_step * range;

  run.history.push_back({history_offset, cur.objective, 0.0, 0.0});

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    std::vector<double> grad =
        schedule_gradient(net, x0, schedule, horizon, weights, limits, config);
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
    if (gnorm == 0.0) break;

    bool accepted = false;
    for (int bt = 0; bt < config.max_backtracks; ++bt) {
      ControlSchedule trial = schedule;
      for (std::size_t flat = 0; flat < trial.entry_count(); ++flat) {
        entry_set(trial, flat, entry_get(trial, flat) - step * grad[flat]);
      }
      trial.clamp_to_bounds();
      EvalResult r = evaluate_schedule(net, x0, trial, horizon, weights, limits, config);
      if (r.objective < cur.objective) {
        const double gain = cur.objective - r.objective;
        schedule = std::move(trial);
        cur = std::move(r);
        run.history.push_back({history_offset + iter, cur.objective, step, gnorm});
        step *= config.grow;
        accepted = true;
        if (gain < config.tolerance) iter = config.max_iterations;  // converged
        break;
      }
      step *= config.shrink;
    }
    if (!accepted) break;
  }

  run.schedule = std::move(schedule);
  run.objective = cur.objective;
  run.trajectory = std::move(cur.trajectory);
  return run;
}

}  // namespace

OptimizeResult optimize_schedule(const NetworkModel& net, const SystemState& x0,
                                 const ControlSchedule& initial, const Horizon& horizon,
                                 const ObjectiveWeights& weights, const Limits& limits,
                                 const OptimizerConfig& config) {
  std::vector<ControlSchedule> starts{initial};
  if (config.multi_start) {
    const int stages = static_cast<int>(initial.values.size());
    std::vector<double> lo_vals, hi_vals, mid_vals;
    for (std::size_t j = 0; j < initial.storage_ids.size(); ++j) {
      lo_vals.push_back(initial.bounds[j].first);
      hi_vals.push_back(initial.bounds[j].second);
      const double md =
          weights.weight_or_zero(weights.inertia_desired, initial.storage_ids[j]);
      mid_vals.push_back(md > 0.0 ? std::clamp(md, initial.bounds[j].first,
                                               initial.bounds[j].second)
                                  : 0.5 * (initial.bounds[j].first +
                                           initial.bounds[j].second));
    }
    starts.push_back(ControlSchedule::constant(initial.storage_ids, initial.bounds,
                                               stages, lo_vals));
    starts.push_back(ControlSchedule::constant(initial.storage_ids, initial.bounds,
                                               stages, mid_vals));
    starts.push_back(ControlSchedule::constant(initial.storage_ids, initial.bounds,
                                               stages, hi_vals));
    std::mt19937_64 rng(config.seed);
    for (int r = 0; r < config.random_starts; ++r) {
      std::vector<double> v(initial.storage_ids.size());
      for (std::size_t j = 0; j < v.size(); ++j) {
        std::uniform_real_distribution<double> dist(initial.bounds[j].first,
                                                    initial.bounds[j].second);
        v[j] = dist(rng);
      }
      starts.push_back(
          ControlSchedule::constant(initial.storage_ids, initial.bounds, stages, v));
    }
  }

  OptimizeResult out;
  bool have = false;
  int offset = 0;
  for (const ControlSchedule& s : starts) {
    SingleRun run = descend(net, x0, s, horizon, weights, limits, config, offset);
    offset += static_cast<int>(run.history.size());
    out.history.insert(out.history.end(), run.history.begin(), run.history.end());
    if (!have || run.objective < out.objective) {
      out.best = std::move(run.schedule);
      out.objective = run.objective;
      out.trajectory = std::move(run.trajectory);
      have = true;
    }
  }
  return out;
}

}  // namespace vigrid
