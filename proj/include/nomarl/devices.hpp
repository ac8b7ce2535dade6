#pragma once
/**
 * Heterogeneous device populations: three QoS classes, scenario-specific
 * placement, and per-step traffic/buffer/battery dynamics.
 *
 * Activity semantics: a device transmits in a step iff its per-class duty
 * gate opens AND it has queued packets AND remaining energy.  The gate is
 * drawn every step for every device regardless of queue state, so stream
 * consumption never depends on actions — seeds stay aligned across agents.
 * Duty cycles therefore cap long-run activity; actual activity is
 * traffic-limited when arrivals are sparse.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nomarl/channel.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

enum class DeviceClass { Critical = 0, Periodic = 1, BestEffort = 2 };

inline const char* to_string(DeviceClass c) {
  switch (c) {
    case DeviceClass::Critical: return "critical";
    case DeviceClass::Periodic: return "periodic";
    case DeviceClass::BestEffort: return "best_effort";
  }
  return "?";
}

struct ClassParams {
  double duty_cycle = 1.0;
  double reliability_target = 0.9;
  double latency_limit_ms = 1000.0;  // recorded, not enforced by dynamics
  double sinr_req_db = 0.0;
  double class_weight = 1.0;
};

struct ClassConfig {
  ClassParams critical{0.10, 0.999, 100.0, 7.0, 2.0};
  ClassParams periodic{0.01, 0.97, 1000.0, 3.0, 1.0};
  ClassParams best_effort{0.001, 0.90, 1000.0, 0.0, 0.5};

  const ClassParams& params(DeviceClass c) const {
    switch (c) {
      case DeviceClass::Critical: return critical;
      case DeviceClass::Periodic: return periodic;
      case DeviceClass::BestEffort: return best_effort;
    }
    throw std::logic_error("unreachable device class");
  }

  void validate() const {
    for (const auto* p : {&critical, &periodic, &best_effort}) {
      if (p->duty_cycle <= 0.0 || p->duty_cycle > 1.0)
        throw std::invalid_argument("duty_cycle must be in (0, 1]");
      if (p->class_weight < 0.0) throw std::invalid_argument("class_weight must be >= 0");
    }
  }
};

struct DeviceProfile {
  int id = 0;
  DeviceClass cls = DeviceClass::BestEffort;
  Vec2 position;
  double tx_power_dbm = 10.0;
  double battery_capacity_j = 10.0;
  int buffer_capacity = 10;
  double processing_gops = 1.0;  // recorded, unused by dynamics

  double tx_power_mw() const { return dbm_to_mw(tx_power_dbm); }
  double tx_power_w() const { return dbm_to_mw(tx_power_dbm) / 1000.0; }
  double distance_from_origin() const { return std::max(std::hypot(position.x, position.y), 1.0); }
};

struct DeviceState {
  double energy_j = 0.0;
  int buffer = 0;
  bool active = false;
  long next_periodic_step = -1;  // next scheduled periodic arrival; <0 = none
  long dropped_packets = 0;
};

enum class ScenarioKind { SmartCity, IndustrialIoT, SensorNetwork };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SmartCity: return "smart_city";
    case ScenarioKind::IndustrialIoT: return "industrial_iot";
    case ScenarioKind::SensorNetwork: return "sensor_network";
  }
  return "?";
}

struct ScenarioParams {
  ScenarioKind kind = ScenarioKind::SmartCity;
  int num_devices = 0;  // 0 = scenario default (100 / 60 / 150)
  std::array<double, 3> class_shares{0.2, 0.4, 0.4};
  double cell_radius_m = 500.0;
  int buffer_capacity = 10;
  // Smart city clustering
  int cluster_count = 5;
  double cluster_sigma_m = 50.0;
  // Industrial grid
  double grid_spacing_m = 40.0;
  double grid_jitter_m = 2.0;
  // Per-device draws
  double tx_power_min_dbm = 10.0, tx_power_max_dbm = 23.0;
  double battery_min_j = 10.0, battery_max_j = 100.0;
  double gops_min = 1.0, gops_max = 10.0;

  int resolved_num_devices() const {
    if (num_devices > 0) return num_devices;
    switch (kind) {
      case ScenarioKind::SmartCity: return 100;
      case ScenarioKind::IndustrialIoT: return 60;
      case ScenarioKind::SensorNetwork: return 150;
    }
    return 0;
  }

  void validate() const {
    if (num_devices < 0) throw std::invalid_argument("num_devices must be > 0 (or 0 for default)");
    double share_sum = 0.0;
    for (double s : class_shares) {
      if (s < 0.0) throw std::invalid_argument("class shares must be >= 0");
      share_sum += s;
    }
    if (std::fabs(share_sum - 1.0) > 1e-9)
      throw std::invalid_argument("class shares must sum to 1");
    if (cell_radius_m <= 0.0) throw std::invalid_argument("cell radius must be > 0");
    if (buffer_capacity < 1) throw std::invalid_argument("buffer capacity must be >= 1");
    if (cluster_count < 1) throw std::invalid_argument("cluster count must be >= 1");
    if (cluster_sigma_m < 0.0 || grid_jitter_m < 0.0)
      throw std::invalid_argument("spatial sigmas must be >= 0");
    if (grid_spacing_m <= 0.0) throw std::invalid_argument("grid spacing must be > 0");
    if (tx_power_max_dbm < tx_power_min_dbm || battery_max_j < battery_min_j)
      throw std::invalid_argument("inverted parameter range");
  }
};

/// Largest-remainder apportionment of n devices over three class shares.
inline std::array<int, 3> class_counts(int n, const std::array<double, 3>& shares) {
  std::array<int, 3> counts{};
  std::array<double, 3> rema{};
  int assigned = 0;
  for (int c = 0; c < 3; ++c) {
    const double exact = shares[static_cast<std::size_t>(c)] * n;
    counts[static_cast<std::size_t>(c)] = static_cast<int>(std::floor(exact));
    rema[static_cast<std::size_t>(c)] = exact - std::floor(exact);
    assigned += counts[static_cast<std::size_t>(c)];
  }
  while (assigned < n) {  // ties resolve in class order
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (rema[static_cast<std::size_t>(c)] > rema[static_cast<std::size_t>(best)]) best = c;
    counts[static_cast<std::size_t>(best)]++;
    rema[static_cast<std::size_t>(best)] = -1.0;
    ++assigned;
  }
  return counts;
}

namespace detail {

inline Vec2 uniform_in_disk(double radius, RngStream& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double th = 2.0 * M_PI * rng.uniform();
  return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace detail

/**
 * Create the device population for a scenario.  Classes are assigned in id
 * blocks (Critical first), positions by scenario geometry, then power /
 * battery / processing draws per device in id order — a fixed draw order
 * that keeps populations reproducible.
 */
inline std::vector<DeviceProfile> spawn_scenario(const ScenarioParams& sp, const ClassConfig& cc,
                                                 RngStream& rng) {
  sp.validate();
  cc.validate();
  const int n = sp.resolved_num_devices();
  if (n <= 0) throw std::invalid_argument("scenario resolves to zero devices");

  const auto counts = class_counts(n, sp.class_shares);
  std::vector<DeviceProfile> devs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    devs[static_cast<std::size_t>(i)].id = i;
    devs[static_cast<std::size_t>(i)].cls =
        i < counts[0] ? DeviceClass::Critical
                      : (i < counts[0] + counts[1] ? DeviceClass::Periodic
                                                   : DeviceClass::BestEffort);
    devs[static_cast<std::size_t>(i)].buffer_capacity = sp.buffer_capacity;
  }

  switch (sp.kind) {
    case ScenarioKind::SmartCity: {
      // Cluster centres stay 2 sigma inside the cell so most mass fits.
      std::vector<Vec2> centers;
      const double center_radius = std::max(sp.cell_radius_m - 2.0 * sp.cluster_sigma_m, 0.0);
      for (int c = 0; c < sp.cluster_count; ++c)
        centers.push_back(detail::uniform_in_disk(center_radius, rng));
      for (auto& d : devs) {
        Vec2 p;
        do {
          const auto& ctr = centers[static_cast<std::size_t>(
              rng.uniform_int(0, sp.cluster_count - 1))];
          p = {ctr.x + sp.cluster_sigma_m * rng.gaussian(),
               ctr.y + sp.cluster_sigma_m * rng.gaussian()};
        } while (std::hypot(p.x, p.y) > sp.cell_radius_m);
        d.position = p;
      }
      break;
    }
    case ScenarioKind::IndustrialIoT: {
      const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
      for (int i = 0; i < n; ++i) {
        const int r = i / cols, c = i % cols;
        const double x0 = (c - (cols - 1) / 2.0) * sp.grid_spacing_m;
        const double y0 = (r - (cols - 1) / 2.0) * sp.grid_spacing_m;
        devs[static_cast<std::size_t>(i)].position = {x0 + sp.grid_jitter_m * rng.gaussian(),
                                                      y0 + sp.grid_jitter_m * rng.gaussian()};
      }
      break;
    }
    case ScenarioKind::SensorNetwork: {
      for (auto& d : devs) d.position = detail::uniform_in_disk(sp.cell_radius_m, rng);
      break;
    }
  }

  for (auto& d : devs) {
    d.tx_power_dbm = rng.uniform(sp.tx_power_min_dbm, sp.tx_power_max_dbm);
    d.battery_capacity_j = rng.uniform(sp.battery_min_j, sp.battery_max_j);
    d.processing_gops = rng.uniform(sp.gops_min, sp.gops_max);
  }
  return devs;
}

struct TrafficParams {
  double event_rate_hz = 0.5;     // Poisson arrivals for Critical / BestEffort
  double periodic_rate_hz = 1.0;  // deterministic schedule for Periodic
  int packet_size_bits = 1000;
  double step_duration_s = 0.001;

  void validate() const {
    if (event_rate_hz < 0.0) throw std::invalid_argument("event rate must be >= 0");
    if (periodic_rate_hz <= 0.0) throw std::invalid_argument("periodic rate must be > 0");
    if (packet_size_bits < 1) throw std::invalid_argument("packet size must be >= 1 bit");
    if (step_duration_s <= 0.0) throw std::invalid_argument("step duration must be > 0");
  }

  long periodic_period_steps() const {
    return std::max<long>(1, std::lround(1.0 / (periodic_rate_hz * step_duration_s)));
  }
};

/**
 * Advance one device one step: enqueue arrivals (clipped at capacity with a
 * drop counter), then evaluate the duty gate.  Exactly one gate uniform is
 * drawn per device per step; event arrivals consume draws only from the
 * same stream, independent of network state.
 */
inline void step_traffic(DeviceState& st, const DeviceProfile& dev, const ClassParams& cls,
                         const TrafficParams& tp, long t, RngStream& rng) {
  int arrivals = 0;
  if (dev.cls == DeviceClass::Periodic) {
    if (st.next_periodic_step >= 0 && t >= st.next_periodic_step) {
      arrivals = 1;
      st.next_periodic_step += tp.periodic_period_steps();
    }
  } else {
    arrivals = rng.poisson(tp.event_rate_hz * tp.step_duration_s);
  }
  const int space = dev.buffer_capacity - st.buffer;
  if (arrivals > space) {
    st.dropped_packets += arrivals - space;
    arrivals = space;
  }
  st.buffer += arrivals;

  const bool gate = rng.uniform() < cls.duty_cycle;
  st.active = gate && st.buffer > 0 && st.energy_j > 0.0;
}

/// Battery drain for one step: energy -= P[W] * dt when transmitting.
inline void update_energy(DeviceState& st, bool active, double tx_power_dbm, double dt_s) {
  if (dt_s <= 0.0) throw std::invalid_argument("dt must be > 0");
  if (!active) return;
  st.energy_j = std::max(0.0, st.energy_j - dbm_to_mw(tx_power_dbm) / 1000.0 * dt_s);
}

}  // namespace nomarl
