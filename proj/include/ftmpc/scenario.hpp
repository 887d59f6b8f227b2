// Copyright 2026 The ftmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario files: INI-style sections of key = value pairs. Angles are given
// in degrees and angular rates in deg/s; everything else is SI.
//
//   [sim]          name, description, ts, plant_dt, t_p, t_c, t_ddi, duration,
//                  initial_speed
//   [vehicle]      mass, yaw_inertia, lf, lr, track_front, track_rear,
//                  wheel_radius, wheel_inertia, cg_height
//   [plant]        mass_scale, inertia_scale, cg_shift_rear, load_transfer
//   [tires]        long_B, long_C, long_E, lat_B, lat_C, lat_E, mu_max
//   [trajectory]   speed, amplitude, frequency, dwell, lead_in
//   [mpc]          w_<output>, w_<input>, soft_weight
//   [slip]         kp, ki
//   [thresholds]   tangential, normal, heading
//   [degradation]  kind, wheel, t_trigger, torque, lo, hi, held, sign
//
// Further events go in [degradation.2], [degradation.3], ...

#ifndef FTMPC_SCENARIO_HPP_
#define FTMPC_SCENARIO_HPP_

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ftmpc/sim.hpp"

namespace ftmpc {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

namespace pt = boost::property_tree;

inline bool is_angle_kind(DegradationKind k) {
  return k == DegradationKind::D7 || k == DegradationKind::D8 || k == DegradationKind::D9;
}

class IniReader {
 public:
  explicit IniReader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  void get(const std::string& section, const std::string& key, T& value) {
    used_.insert(section + "." + key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        value = *v;
      } else if constexpr (std::is_same_v<T, bool>) {
        const std::string& s = *v;
        if (s == "true" || s == "1" || s == "yes") {
          value = true;
        } else if (s == "false" || s == "0" || s == "no") {
          value = false;
        } else {
          throw std::invalid_argument(s);
        }
      } else {
        std::size_t pos = 0;
        value = static_cast<T>(std::stod(*v, &pos));
        if (pos != v->size()) throw std::invalid_argument(*v);
      }
    } catch (const std::exception&) {
      throw ScenarioError("scenario: bad value for " + section + "." + key + ": '" + *v + "'");
    }
  }

  void get_deg(const std::string& section, const std::string& key, double& rad) {
    double deg = rad2deg(rad);
    get(section, key, deg);
    rad = deg2rad(deg);
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    return sec && sec->get_child_optional(key);
  }

  void mark(const std::string& section, const std::string& key) { used_.insert(section + "." + key); }

  // Unknown keys are rejected so typos do not silently fall back to defaults.
  void check_unused() const {
    for (const auto& [section, sec] : tree_) {
      if (sec.empty() && !sec.data().empty()) {
        throw ScenarioError("scenario: key '" + section + "' outside a section");
      }
      for (const auto& [key, val] : sec) {
        if (!used_.count(section + "." + key)) {
          throw ScenarioError("scenario: unknown key " + section + "." + key);
        }
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

inline std::string output_weight_key(int k) { return std::string("w_") + output_label(k); }
inline std::string input_weight_key(int j) { return std::string("w_") + input_label(j); }

inline DegradationEvent read_event(IniReader& r, const std::string& sec) {
  DegradationEvent ev;
  std::string kind;
  r.get(sec, "kind", kind);
  ev.kind = degradation_kind_from_string(kind);
  std::string wheel = wheel_name(ev.wheel);
  r.get(sec, "wheel", wheel);
  ev.wheel = wheel_from_name(wheel);
  r.get(sec, "t_trigger", ev.t_trigger);
  r.get(sec, "torque", ev.torque);
  r.get(sec, "sign", ev.sign);
  const bool angular = is_angle_kind(ev.kind);
  if (r.has(sec, "lo") || r.has(sec, "hi")) {
    if (!r.has(sec, "lo") || !r.has(sec, "hi")) {
      throw ScenarioError("scenario: " + sec + " needs both lo and hi");
    }
    ev.range.is_void = false;
    r.get(sec, "lo", ev.range.lo);
    r.get(sec, "hi", ev.range.hi);
    if (angular) {
      ev.range.lo = deg2rad(ev.range.lo);
      ev.range.hi = deg2rad(ev.range.hi);
    }
  }
  r.get(sec, "held", ev.held);
  if (angular) ev.held = deg2rad(ev.held);
  ev.validate();
  return ev;
}

}  // namespace detail

inline SimConfig parse_scenario(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  detail::IniReader r(tree);
  SimConfig c;

  r.get("sim", "name", c.name);
  r.get("sim", "description", c.description);
  r.get("sim", "ts", c.ts);
  r.get("sim", "plant_dt", c.plant_dt);
  r.get("sim", "t_p", c.t_p);
  r.get("sim", "t_c", c.t_c);
  r.get("sim", "t_ddi", c.t_ddi);
  r.get("sim", "duration", c.duration);
  r.get("sim", "initial_speed", c.initial_speed);

  VehicleParams& v = c.vehicle;
  r.get("vehicle", "mass", v.mass);
  r.get("vehicle", "yaw_inertia", v.yaw_inertia);
  r.get("vehicle", "lf", v.lf);
  r.get("vehicle", "lr", v.lr);
  r.get("vehicle", "track_front", v.track_front);
  r.get("vehicle", "track_rear", v.track_rear);
  double radius = v.wheel_radius[0];
  r.get("vehicle", "wheel_radius", radius);
  v.wheel_radius.fill(radius);
  r.get("vehicle", "wheel_inertia", v.wheel_inertia);
  r.get("vehicle", "cg_height", v.cg_height);

  r.get("plant", "mass_scale", c.plant.mass_scale);
  r.get("plant", "inertia_scale", c.plant.inertia_scale);
  r.get("plant", "cg_shift_rear", c.plant.cg_shift_rear);
  r.get("plant", "load_transfer", c.load_transfer);

  TireParams& t = c.tires;
  r.get("tires", "long_B", t.longitudinal.B);
  r.get("tires", "long_C", t.longitudinal.C);
  r.get("tires", "long_E", t.longitudinal.E);
  r.get("tires", "lat_B", t.lateral.B);
  r.get("tires", "lat_C", t.lateral.C);
  r.get("tires", "lat_E", t.lateral.E);
  r.get("tires", "mu_max", t.mu_max);
  t.nominal_load = v.mass * kGravity / 4.0;
  try {
    t.validate();
  } catch (const std::exception& e) {
    throw ScenarioError(e.what());
  }
  t.calibrate();

  SineWithDwell& m = c.maneuver;
  r.get("trajectory", "speed", m.speed);
  r.get("trajectory", "amplitude", m.lateral_amplitude);
  r.get("trajectory", "frequency", m.frequency);
  r.get("trajectory", "dwell", m.dwell);
  r.get("trajectory", "lead_in", m.lead_in);

  for (int k = 0; k < yx::kSize; ++k) r.get("mpc", detail::output_weight_key(k), c.mpc.w_y[k]);
  for (int j = 0; j < ux::kSize; ++j) r.get("mpc", detail::input_weight_key(j), c.mpc.w_u[j]);
  r.get("mpc", "soft_weight", c.mpc.soft_weight);

  r.get("slip", "kp", c.slip_gains.kp);
  r.get("slip", "ki", c.slip_gains.ki);

  r.get("thresholds", "tangential", c.thresholds.tangential);
  r.get("thresholds", "normal", c.thresholds.normal);
  r.get_deg("thresholds", "heading", c.thresholds.heading);

  for (const auto& [section, sec] : tree) {
    if (section == "degradation" || section.rfind("degradation.", 0) == 0) {
      try {
        c.events.push_back(detail::read_event(r, section));
      } catch (const ScenarioError&) {
        throw;
      } catch (const std::exception& e) {
        throw ScenarioError("scenario: [" + section + "]: " + e.what());
      }
    }
  }
  r.check_unused();
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  return c;
}

inline SimConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ScenarioError("scenario: cannot open " + path.string());
  return parse_scenario(is);
}

// Full effective configuration in the scenario syntax; parse_scenario of the
// echo reproduces the configuration.
inline void write_config_echo(std::ostream& os, const SimConfig& c) {
  os << std::setprecision(17);
  os << "[sim]\n"
     << "name = " << c.name << "\n"
     << "description = " << c.description << "\n"
     << "ts = " << c.ts << "\nplant_dt = " << c.plant_dt << "\nt_p = " << c.t_p
     << "\nt_c = " << c.t_c << "\nt_ddi = " << c.t_ddi << "\nduration = " << c.duration
     << "\ninitial_speed = " << c.initial_speed << "\n\n";
  const VehicleParams& v = c.vehicle;
  os << "[vehicle]\nmass = " << v.mass << "\nyaw_inertia = " << v.yaw_inertia
     << "\nlf = " << v.lf << "\nlr = " << v.lr << "\ntrack_front = " << v.track_front
     << "\ntrack_rear = " << v.track_rear << "\nwheel_radius = " << v.wheel_radius[0]
     << "\nwheel_inertia = " << v.wheel_inertia << "\ncg_height = " << v.cg_height << "\n\n";
  os << "[plant]\nmass_scale = " << c.plant.mass_scale
     << "\ninertia_scale = " << c.plant.inertia_scale
     << "\ncg_shift_rear = " << c.plant.cg_shift_rear
     << "\nload_transfer = " << (c.load_transfer ? "true" : "false") << "\n\n";
  const TireParams& t = c.tires;
  os << "[tires]\nlong_B = " << t.longitudinal.B << "\nlong_C = " << t.longitudinal.C
     << "\nlong_E = " << t.longitudinal.E << "\nlat_B = " << t.lateral.B
     << "\nlat_C = " << t.lateral.C << "\nlat_E = " << t.lateral.E << "\nmu_max = " << t.mu_max
     << "\n\n";
  const SineWithDwell& m = c.maneuver;
  os << "[trajectory]\nspeed = " << m.speed << "\namplitude = " << m.lateral_amplitude
     << "\nfrequency = " << m.frequency << "\ndwell = " << m.dwell << "\nlead_in = " << m.lead_in
     << "\n\n";
  os << "[mpc]\n";
  for (int k = 0; k < yx::kSize; ++k) {
    os << detail::output_weight_key(k) << " = " << c.mpc.w_y[k] << "\n";
  }
  for (int j = 0; j < ux::kSize; ++j) {
    os << detail::input_weight_key(j) << " = " << c.mpc.w_u[j] << "\n";
  }
  os << "soft_weight = " << c.mpc.soft_weight << "\n\n";
  os << "[slip]\nkp = " << c.slip_gains.kp << "\nki = " << c.slip_gains.ki << "\n\n";
  os << "[thresholds]\ntangential = " << c.thresholds.tangential
     << "\nnormal = " << c.thresholds.normal
     << "\nheading = " << rad2deg(c.thresholds.heading) << "\n";
  for (std::size_t i = 0; i < c.events.size(); ++i) {
    const DegradationEvent& e = c.events[i];
    const bool angular = detail::is_angle_kind(e.kind);
    const double scale = angular ? rad2deg(1.0) : 1.0;
    os << "\n[degradation" << (i == 0 ? std::string() : "." + std::to_string(i + 1)) << "]\n"
       << "kind = " << to_string(e.kind) << "\nwheel = " << wheel_name(e.wheel)
       << "\nt_trigger = " << e.t_trigger << "\ntorque = " << e.torque
       << "\nsign = " << e.sign << "\nheld = " << e.held * scale << "\n";
    if (!e.range.is_void) {
      os << "lo = " << e.range.lo * scale << "\nhi = " << e.range.hi * scale << "\n";
    }
  }
}

}  // namespace ftmpc

#endif  // FTMPC_SCENARIO_HPP_
