#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vigrid/errors.hpp"

namespace vigrid {

enum class BusKind { generator, load, storage, reference };

std::string to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& s);

/// One network node. Inertia is meaningful for generator buses only; storage
/// inertia is a control input and never stored here. The injection holds
/// P_M - P_D for generators, -P_D for loads and P^e - P_D for storage buses.
struct Bus {
  int id = 0;
  BusKind kind = BusKind::load;
  double inertia = 0.0;    // seconds
  double damping = 0.0;    // p.u.
  double injection = 0.0;  // p.u.
};

/// Lossless line; power flow from -> to is b * sin(delta_from - delta_to).
struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;  // p.u.
};

/// Reduced dynamic state. Angles cover every non-reference bus (model order:
/// ascending bus id); omega covers the subset with second-order dynamics
/// (generator and storage kinds). The reference bus is pinned at delta = 0,
/// omega = 0 and does not appear.
struct SystemState {
  std::vector<double> delta;
  std::vector<double> omega;

  bool same_shape(const SystemState& other) const {
    return delta.size() == other.delta.size() && omega.size() == other.omega.size();
  }
};

/// Piecewise-constant control: virtual inertia per storage bus, in seconds.
struct ControlInput {
  std::map<int, double> virtual_inertia;

  double at(int bus_id) const;
};

enum class IntegrationMethod { euler, rk4 };

/// Structure-preserving lossless network. Immutable after construction; all
/// evaluation methods are const and safe to call concurrently.
class NetworkModel {
 public:
  NetworkModel(std::vector<Bus> buses, std::vector<Line> lines, int reference_bus,
               double base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  int reference_bus() const { return reference_bus_; }
  double base_mva() const { return base_mva_; }

  const Bus& bus(int id) const;
  bool has_bus(int id) const;
  const Line& line(int from, int to) const;

  /// Buses carrying an angle state, ascending id (reference excluded).
  const std::vector<int>& angle_bus_ids() const { return angle_ids_; }
  /// Buses carrying a frequency state, ascending id.
  const std::vector<int>& omega_bus_ids() const { return omega_ids_; }
  const std::vector<int>& storage_bus_ids() const { return storage_ids_; }

  /// Position of a bus in the angle vector, -1 for the reference bus.
  int angle_index(int bus_id) const;
  /// Position of a bus in the omega vector, -1 for first-order or reference.
  int omega_index(int bus_id) const;

  std::size_t state_dim() const { return angle_ids_.size() + omega_ids_.size(); }

  /// Returns a copy with the injection at one bus shifted by delta_p.
  NetworkModel with_injection_step(int bus_id, double delta_p) const;

  double line_flow(const SystemState& state, const Line& line) const;

  /// Continuous dynamics. Generator/storage buses follow the second-order
  /// swing equation (storage uses the commanded virtual inertia); first-order
  /// load buses move their angle directly against their damping.
  SystemState rhs(const SystemState& state, const ControlInput& u) const;

  /// Allocation-free core used by the solvers. m_e is indexed like
  /// storage_bus_ids(); outputs must have angle/omega sizes.
  void rhs_raw(const double* delta, const double* omega, const double* m_e,
               double* ddelta, double* domega) const;

  SystemState step(const SystemState& state, const ControlInput& u, double dt,
                   IntegrationMethod method) const;

  void step_raw(const double* delta, const double* omega, const double* m_e, double dt,
                IntegrationMethod method, double* delta_out, double* omega_out) const;

  /// Max-norm of the state derivative under the given control.
  double rhs_inf_norm(const SystemState& state, const ControlInput& u) const;

  /// Sum over buses of net electrical power; identically zero for a lossless
  /// network up to rounding.
  double net_electrical_power(const SystemState& state) const;

  SystemState zero_state() const;

 private:
  void validate() const;

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  int reference_bus_;
  double base_mva_;

  std::vector<int> angle_ids_;
  std::vector<int> omega_ids_;
  std::vector<int> storage_ids_;
  std::map<int, int> bus_pos_;       // id -> index in buses_
  std::map<int, int> angle_pos_;     // id -> index in delta vector
  std::map<int, int> omega_pos_;     // id -> index in omega vector

  // per angle-bus adjacency: (neighbour angle index or -1 for reference, b)
  std::vector<std::vector<std::pair<int, double>>> adj_;
  // cached per-bus coefficients in angle order
  std::vector<double> inv_first_order_damping_;  // 1/D for first-order buses, 0 otherwise
  std::vector<int> storage_slot_;                // angle idx -> storage index or -1
  std::vector<int> omega_of_angle_;              // angle idx -> omega idx or -1
  std::vector<double> injection_by_angle_;
  std::vector<double> inertia_by_angle_;         // generators; 0 for storage/first-order
  std::vector<double> damping_by_angle_;
};

/// Net terminal power of a storage unit over one step of length dt:
/// P^r(k) = P^e - M_e (omega_{k+1} - omega_k)/dt - D_e omega_k.
double storage_terminal_power(double omega_k, double omega_k1, double m_e, double dt,
                              double d_e, double p_e);

/// Newton iteration on the lossless power-flow equations. Optional injection
/// override is keyed by bus id; omitted buses keep their model injection.
SystemState solve_equilibrium(const NetworkModel& net,
                              const std::optional<std::map<int, double>>& injections = std::nullopt,
                              int max_iterations = 50, double tolerance = 1e-12);

}  // namespace vigrid
