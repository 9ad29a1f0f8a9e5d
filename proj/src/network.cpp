#include "vigrid/network.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace vigrid {

std::string to_string(BusKind kind) {
  switch (kind) {
    case BusKind::generator: return "generator";
    case BusKind::load: return "load";
    case BusKind::storage: return "storage";
    case BusKind::reference: return "reference";
  }
  return "?";
}

BusKind bus_kind_from_string(const std::string& s) {
  if (s == "generator") return BusKind::generator;
  if (s == "load") return BusKind::load;
  if (s == "storage") return BusKind::storage;
  if (s == "reference") return BusKind::reference;
  throw ValidationError("unknown bus kind '" + s + "'");
}

double ControlInput::at(int bus_id) const {
  auto it = virtual_inertia.find(bus_id);
  if (it == virtual_inertia.end()) {
    throw SolverError("missing virtual-inertia control for storage bus " +
                      std::to_string(bus_id));
  }
  return it->second;
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Line> lines,
                           int reference_bus, double base_mva)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      reference_bus_(reference_bus),
      base_mva_(base_mva) {
  std::sort(buses_.begin(), buses_.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    bus_pos_[buses_[i].id] = static_cast<int>(i);
  }
  validate();

  for (const Bus& b : buses_) {
    if (b.kind == BusKind::reference) continue;
    angle_pos_[b.id] = static_cast<int>(angle_ids_.size());
    angle_ids_.push_back(b.id);
    if (b.kind == BusKind::generator || b.kind == BusKind::storage) {
      omega_pos_[b.id] = static_cast<int>(omega_ids_.size());
      omega_ids_.push_back(b.id);
    }
    if (b.kind == BusKind::storage) storage_ids_.push_back(b.id);
  }

  adj_.assign(angle_ids_.size(), {});
  auto angle_or_ref = [&](int id) { return id == reference_bus_ ? -1 : angle_pos_.at(id); };
  for (const Line& l : lines_) {
    if (l.from != reference_bus_) {
      adj_[angle_pos_.at(l.from)].emplace_back(angle_or_ref(l.to), l.susceptance);
    }
    if (l.to != reference_bus_) {
      adj_[angle_pos_.at(l.to)].emplace_back(angle_or_ref(l.from), l.susceptance);
    }
  }

  const std::size_t na = angle_ids_.size();
  inv_first_order_damping_.assign(na, 0.0);
  storage_slot_.assign(na, -1);
  omega_of_angle_.assign(na, -1);
  injection_by_angle_.assign(na, 0.0);
  inertia_by_angle_.assign(na, 0.0);
  damping_by_angle_.assign(na, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    const Bus& b = bus(angle_ids_[i]);
    injection_by_angle_[i] = b.injection;
    damping_by_angle_[i] = b.damping;
    if (b.kind == BusKind::load) {
      inv_first_order_damping_[i] = 1.0 / b.damping;
    } else {
      omega_of_angle_[i] = omega_pos_.at(b.id);
      if (b.kind == BusKind::storage) {
        auto it = std::find(storage_ids_.begin(), storage_ids_.end(), b.id);
        storage_slot_[i] = static_cast<int>(it - storage_ids_.begin());
      } else {
        inertia_by_angle_[i] = b.inertia;
      }
    }
  }
}

void NetworkModel::validate() const {
  if (buses_.empty()) throw ValidationError("network has no buses");
  int n_ref = 0;
  std::set<int> ids;
  for (const Bus& b : buses_) {
    if (!ids.insert(b.id).second) {
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
    }
    if (b.kind == BusKind::reference) ++n_ref;
    if (b.kind == BusKind::generator && b.inertia <= 0.0) {
      throw ValidationError("generator bus " + std::to_string(b.id) +
                            " needs inertia > 0");
    }
    if (b.kind == BusKind::load && b.damping <= 0.0) {
      throw ValidationError("load bus " + std::to_string(b.id) + " needs damping > 0");
    }
    if (b.damping < 0.0) {
      throw ValidationError("bus " + std::to_string(b.id) + " has negative damping");
    }
  }
  if (n_ref != 1) {
    throw ValidationError("network needs exactly one reference bus, found " +
                          std::to_string(n_ref));
  }
  if (!bus_pos_.count(reference_bus_) ||
      bus(reference_bus_).kind != BusKind::reference) {
    throw ValidationError("reference_bus does not name the reference-kind bus");
  }

  std::set<std::pair<int, int>> seen;
  for (const Line& l : lines_) {
    if (!bus_pos_.count(l.from) || !bus_pos_.count(l.to)) {
      throw ValidationError("line endpoints " + std::to_string(l.from) + "-" +
                            std::to_string(l.to) + " reference unknown buses");
    }
    if (l.from == l.to) {
      throw ValidationError("self-loop line at bus " + std::to_string(l.from));
    }
    if (l.susceptance <= 0.0) {
      throw ValidationError("line " + std::to_string(l.from) + "-" +
                            std::to_string(l.to) + " needs susceptance > 0");
    }
    auto key = std::minmax(l.from, l.to);
    if (!seen.insert(key).second) {
      throw ValidationError("duplicate line between buses " + std::to_string(key.first) +
                            " and " + std::to_string(key.second));
    }
  }

  // connectivity over all buses
  std::map<int, std::vector<int>> nb;
  for (const Line& l : lines_) {
    nb[l.from].push_back(l.to);
    nb[l.to].push_back(l.from);
  }
  std::set<int> visited;
  std::queue<int> q;
  q.push(buses_.front().id);
  visited.insert(buses_.front().id);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : nb[v]) {
      if (visited.insert(w).second) q.push(w);
    }
  }
  if (visited.size() != buses_.size()) {
    throw ValidationError("network graph is not connected");
  }
}

const Bus& NetworkModel::bus(int id) const {
  auto it = bus_pos_.find(id);
  if (it == bus_pos_.end()) {
    throw ValidationError("unknown bus id " + std::to_string(id));
  }
  return buses_[it->second];
}

bool NetworkModel::has_bus(int id) const { return bus_pos_.count(id) > 0; }

const Line& NetworkModel::line(int from, int to) const {
  for (const Line& l : lines_) {
    if ((l.from == from && l.to == to) || (l.from == to && l.to == from)) return l;
  }
  throw ValidationError("no line between buses " + std::to_string(from) + " and " +
                        std::to_string(to));
}

int NetworkModel::angle_index(int bus_id) const {
  if (bus_id == reference_bus_) return -1;
  auto it = angle_pos_.find(bus_id);
  if (it == angle_pos_.end()) {
    throw ValidationError("unknown bus id " + std::to_string(bus_id));
  }
  return it->second;
}

int NetworkModel::omega_index(int bus_id) const {
  auto it = omega_pos_.find(bus_id);
  return it == omega_pos_.end() ? -1 : it->second;
}

NetworkModel NetworkModel::with_injection_step(int bus_id, double delta_p) const {
  std::vector<Bus> b = buses_;
  bool found = false;
  for (Bus& bb : b) {
    if (bb.id == bus_id) {
      bb.injection += delta_p;
      found = true;
    }
  }
  if (!found) throw ValidationError("disturbance bus " + std::to_string(bus_id) +
                                    " does not exist");
  return NetworkModel(std::move(b), lines_, reference_bus_, base_mva_);
}

double NetworkModel::line_flow(const SystemState& state, const Line& line) const {
  auto angle = [&](int id) {
    int i = angle_index(id);
    return i < 0 ? 0.0 : state.delta[i];
  };
  return line.susceptance * std::sin(angle(line.from) - angle(line.to));
}

void NetworkModel::rhs_raw(const double* delta, const double* omega, const double* m_e,
                           double* ddelta, double* domega) const {
  const std::size_t na = angle_ids_.size();
  for (std::size_t i = 0; i < na; ++i) {
    double flow = 0.0;
    for (const auto& [j, b] : adj_[i]) {
      flow += b * std::sin(delta[i] - (j < 0 ? 0.0 : delta[j]));
    }
    const double accel_power = injection_by_angle_[i] - flow;
    if (inv_first_order_damping_[i] != 0.0) {
      ddelta[i] = accel_power * inv_first_order_damping_[i];
    } else {
      const int oi = omega_of_angle_[i];
      const double m =
          storage_slot_[i] >= 0 ? m_e[storage_slot_[i]] : inertia_by_angle_[i];
      ddelta[i] = omega[oi];
      domega[oi] = (accel_power - damping_by_angle_[i] * omega[oi]) / m;
    }
  }
}

namespace {

std::vector<double> resolve_controls(const NetworkModel& net, const ControlInput& u) {
  std::vector<double> m_e;
  m_e.reserve(net.storage_bus_ids().size());
  for (int id : net.storage_bus_ids()) {
    double m = u.at(id);
    if (m <= 0.0) {
      throw SolverError("virtual inertia for storage bus " + std::to_string(id) +
                        " must be positive");
    }
    m_e.push_back(m);
  }
  return m_e;
}

}  // namespace

SystemState NetworkModel::rhs(const SystemState& state, const ControlInput& u) const {
  if (state.delta.size() != angle_ids_.size() || state.omega.size() != omega_ids_.size()) {
    throw ValidationError("state dimensions do not match the network");
  }
  std::vector<double> m_e = resolve_controls(*this, u);
  SystemState out = zero_state();
  rhs_raw(state.delta.data(), state.omega.data(), m_e.data(), out.delta.data(),
          out.omega.data());
  return out;
}

void NetworkModel::step_raw(const double* delta, const double* omega, const double* m_e,
                            double dt, IntegrationMethod method, double* delta_out,
                            double* omega_out) const {
  const std::size_t na = angle_ids_.size();
  const std::size_t nw = omega_ids_.size();
  thread_local std::vector<double> buf;
  if (method == IntegrationMethod::euler) {
    buf.resize(na + nw);
    double* dd = buf.data();
    double* dw = buf.data() + na;
    rhs_raw(delta, omega, m_e, dd, dw);
    for (std::size_t i = 0; i < na; ++i) delta_out[i] = delta[i] + dt * dd[i];
    for (std::size_t i = 0; i < nw; ++i) omega_out[i] = omega[i] + dt * dw[i];
    return;
  }
  // classic RK4
  buf.resize(6 * (na + nw));
  double* k1 = buf.data();
  double* k2 = k1 + (na + nw);
  double* k3 = k2 + (na + nw);
  double* k4 = k3 + (na + nw);
  double* xd = k4 + (na + nw);
  double* xw = xd + na;
  auto eval = [&](const double* d, const double* w, double* k) {
    rhs_raw(d, w, m_e, k, k + na);
  };
  eval(delta, omega, k1);
  for (std::size_t i = 0; i < na; ++i) xd[i] = delta[i] + 0.5 * dt * k1[i];
  for (std::size_t i = 0; i < nw; ++i) xw[i] = omega[i] + 0.5 * dt * k1[na + i];
  eval(xd, xw, k2);
  for (std::size_t i = 0; i < na; ++i) xd[i] = delta[i] + 0.5 * dt * k2[i];
  for (std::size_t i = 0; i < nw; ++i) xw[i] = omega[i] + 0.5 * dt * k2[na + i];
  eval(xd, xw, k3);
  for (std::size_t i = 0; i < na; ++i) xd[i] = delta[i] + dt * k3[i];
  for (std::size_t i = 0; i < nw; ++i) xw[i] = omega[i] + dt * k3[na + i];
  eval(xd, xw, k4);
  for (std::size_t i = 0; i < na; ++i) {
    delta_out[i] = delta[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  for (std::size_t i = 0; i < nw; ++i) {
    omega_out[i] = omega[i] + dt / 6.0 * (k1[na + i] + 2.0 * k2[na + i] +
                                          2.0 * k3[na + i] + k4[na + i]);
  }
}

SystemState NetworkModel::step(const SystemState& state, const ControlInput& u,
                               double dt, IntegrationMethod method) const {
  if (dt <= 0.0) throw ValidationError("step needs dt > 0");
  std::vector<double> m_e = resolve_controls(*this, u);
  SystemState out = zero_state();
  step_raw(state.delta.data(), state.omega.data(), m_e.data(), dt, method,
           out.delta.data(), out.omega.data());
  for (std::size_t i = 0; i < out.delta.size(); ++i) {
    if (!std::isfinite(out.delta[i])) {
      throw IntegrationError("non-finite angle at bus " + std::to_string(angle_ids_[i]),
                             angle_ids_[i]);
    }
  }
  for (std::size_t i = 0; i < out.omega.size(); ++i) {
    if (!std::isfinite(out.omega[i])) {
      throw IntegrationError(
          "non-finite frequency at bus " + std::to_string(omega_ids_[i]), omega_ids_[i]);
    }
  }
  return out;
}

double NetworkModel::rhs_inf_norm(const SystemState& state, const ControlInput& u) const {
  SystemState d = rhs(state, u);
  double m = 0.0;
  for (double v : d.delta) m = std::max(m, std::abs(v));
  for (double v : d.omega) m = std::max(m, std::abs(v));
  return m;
}

double NetworkModel::net_electrical_power(const SystemState& state) const {
  // per-bus outflows summed over all buses; cancels pairwise for a lossless grid
  auto angle = [&](int id) {
    int i = angle_index(id);
    return i < 0 ? 0.0 : state.delta[i];
  };
  double sum = 0.0;
  for (const Bus& b : buses_) {
    for (const Line& l : lines_) {
      if (l.from == b.id) {
        sum += l.susceptance * std::sin(angle(l.from) - angle(l.to));
      } else if (l.to == b.id) {
        sum += l.susceptance * std::sin(angle(l.to) - angle(l.from));
      }
    }
  }
  return sum;
}

SystemState NetworkModel::zero_state() const {
  SystemState s;
  s.delta.assign(angle_ids_.size(), 0.0);
  s.omega.assign(omega_ids_.size(), 0.0);
  return s;
}

double storage_terminal_power(double omega_k, double omega_k1, double m_e, double dt,
                              double d_e, double p_e) {
  if (dt <= 0.0) throw ValidationError("storage_terminal_power needs dt > 0");
  return p_e - m_e * (omega_k1 - omega_k) / dt - d_e * omega_k;
}

SystemState solve_equilibrium(const NetworkModel& net,
                              const std::optional<std::map<int, double>>& injections,
                              int max_iterations, double tolerance) {
  const auto& angle_ids = net.angle_bus_ids();
  const int n = static_cast<int>(angle_ids.size());

  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) {
    p[i] = net.bus(angle_ids[i]).injection;
    if (injections) {
      auto it = injections->find(angle_ids[i]);
      if (it != injections->end()) p[i] = it->second;
    }
  }

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  double residual = 0.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (const Line& l : net.lines()) {
      const int i = net.angle_index(l.from);
      const int j = net.angle_index(l.to);
      const double di = i < 0 ? 0.0 : delta[i];
      const double dj = j < 0 ? 0.0 : delta[j];
      const double s = l.susceptance * std::sin(di - dj);
      const double c = l.susceptance * std::cos(di - dj);
      if (i >= 0) {
        f[i] += s;
        jac(i, i) += c;
        if (j >= 0) jac(i, j) -= c;
      }
      if (j >= 0) {
        f[j] -= s;
        jac(j, j) += c;
        if (i >= 0) jac(j, i) -= c;
      }
    }
    for (int i = 0; i < n; ++i) f[i] = p[i] - f[i];
    residual = f.lpNorm<Eigen::Infinity>();
    if (residual < tolerance) {
      SystemState s;
      s.delta.assign(delta.data(), delta.data() + n);
      s.omega.assign(net.omega_bus_ids().size(), 0.0);
      return s;
    }
    Eigen::VectorXd dx = jac.partialPivLu().solve(f);
    if (!dx.allFinite()) {
      throw SolverError("equilibrium Newton step produced non-finite update");
    }
    delta += dx;
  }
  std::ostringstream oss;
  oss << "equilibrium solve did not converge after " << max_iterations
      << " iterations (residual " << residual << ")";
  throw SolverError(oss.str());
}

}  // namespace vigrid
