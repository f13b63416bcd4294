#include "c3bf/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace c3bf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

using Section = std::map<std::string, std::string>;
using Ini = std::map<std::string, Section>;

Ini parse_ini(std::istream& is) {
  Ini ini;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      ini[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    }
    ini[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return ini;
}

double to_double(const std::string& raw, const std::string& key) {
  try {
    size_t used = 0;
    const double v = std::stod(raw, &used);
    if (trim(raw.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config key '" + key + "': bad number '" + raw + "'");
}

std::vector<double> to_doubles(const std::string& raw, const std::string& key) {
  std::istringstream ss(raw);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) out.push_back(to_double(tok, key));
  return out;
}

class SectionReader {
 public:
  SectionReader(const Ini& ini, const std::string& name) : name_(name) {
    auto it = ini.find(name);
    if (it != ini.end()) section_ = &it->second;
  }

  bool has(const std::string& key) const {
    return section_ && section_->count(key) > 0;
  }
  std::string str(const std::string& key, const std::string& fallback = "") const {
    if (!has(key)) return fallback;
    return section_->at(key);
  }
  std::string require(const std::string& key) const {
    if (!has(key)) {
      throw std::runtime_error("config: missing key '" + key + "' in [" + name_ + "]");
    }
    return section_->at(key);
  }
  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return to_double(section_->at(key), qualified(key));
  }
  double require_num(const std::string& key) const {
    return to_double(require(key), qualified(key));
  }
  std::vector<double> nums(const std::string& key) const {
    return to_doubles(require(key), qualified(key));
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  const Section* section_ = nullptr;
};

Vec3 to_vec3(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 3) {
    throw std::runtime_error("config key '" + key + "': expected 3 numbers");
  }
  return Vec3(v[0], v[1], v[2]);
}

Mat3 to_gain(const std::vector<double>& v, const std::string& key) {
  if (v.size() == 3) {
    return Vec3(v[0], v[1], v[2]).asDiagonal();
  }
  if (v.size() == 9) {
    Mat3 m;
    m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    return m;
  }
  throw std::runtime_error("config key '" + key +
                           "': expected 3 (diagonal) or 9 (row-major) numbers");
}

std::vector<Waypoint> to_waypoints(const std::string& raw, const std::string& key) {
  std::vector<Waypoint> wps;
  std::istringstream groups(raw);
  std::string group;
  while (std::getline(groups, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    const std::vector<double> v = to_doubles(group, key);
    if (v.size() != 4) {
      throw std::runtime_error("config key '" + key +
                               "': each waypoint needs 't x y z'");
    }
    wps.push_back({v[0], Vec3(v[1], v[2], v[3])});
  }
  return wps;
}

ArmModel parse_arm(const Ini& ini) {
  SectionReader arm(ini, "arm");
  const int n = static_cast<int>(arm.require_num("links"));
  Vec3 gravity(0, 0, -9.81);
  if (arm.has("gravity")) gravity = to_vec3(arm.nums("gravity"), "arm.gravity");

  std::vector<DHLink> links;
  for (int i = 0; i < n; ++i) {
    const std::string p = "link" + std::to_string(i) + ".";
    DHLink link;
    link.a = arm.require_num(p + "a");
    link.alpha = arm.require_num(p + "alpha");
    link.d = arm.require_num(p + "d");
    link.theta_offset = arm.require_num(p + "theta_offset");
    link.mass = arm.require_num(p + "mass");
    link.com = to_vec3(arm.nums(p + "com"), arm.qualified(p + "com"));
    const std::vector<double> in = arm.nums(p + "inertia");
    if (in.size() != 6) {
      throw std::runtime_error("config key '" + arm.qualified(p + "inertia") +
                               "': expected 'ixx iyy izz ixy ixz iyz'");
    }
    link.inertia << in[0], in[3], in[4], in[3], in[1], in[5], in[4], in[5], in[2];
    links.push_back(link);
  }
  return ArmModel(std::move(links), gravity);
}

}  // namespace

SimConfig load_config(std::istream& is) {
  const Ini ini = parse_ini(is);
  SimConfig cfg(parse_arm(ini));
  const int n = cfg.arm.dof();

  SectionReader sim(ini, "sim");
  cfg.name = sim.str("name", "custom");
  cfg.dt = sim.num("dt", cfg.dt);
  cfg.duration = sim.num("duration", cfg.duration);
  const std::string integ = sim.str("integrator", "semi_implicit_euler");
  if (integ == "semi_implicit_euler") {
    cfg.integrator = Integrator::semi_implicit_euler;
  } else if (integ == "rk4") {
    cfg.integrator = Integrator::rk4;
  } else {
    throw std::runtime_error("config: unknown integrator '" + integ + "'");
  }
  cfg.q0 = VecX::Zero(n);
  cfg.qd0 = VecX::Zero(n);
  if (sim.has("q0")) {
    const auto v = sim.nums("q0");
    if (static_cast<int>(v.size()) != n) {
      throw std::runtime_error("config key 'sim.q0': expected " + std::to_string(n) +
                               " numbers");
    }
    for (int i = 0; i < n; ++i) cfg.q0[i] = v[i];
  }
  if (sim.has("qd0")) {
    const auto v = sim.nums("qd0");
    if (static_cast<int>(v.size()) != n) {
      throw std::runtime_error("config key 'sim.qd0': expected " + std::to_string(n) +
                               " numbers");
    }
    for (int i = 0; i < n; ++i) cfg.qd0[i] = v[i];
  }

  SectionReader imp(ini, "impedance");
  Mat3 lambda = Mat3::Identity();
  Mat3 damping = 20.0 * Mat3::Identity();
  Mat3 stiffness = 100.0 * Mat3::Identity();
  if (imp.has("lambda")) lambda = to_gain(imp.nums("lambda"), "impedance.lambda");
  if (imp.has("damping")) damping = to_gain(imp.nums("damping"), "impedance.damping");
  if (imp.has("stiffness"))
    stiffness = to_gain(imp.nums("stiffness"), "impedance.stiffness");
  cfg.impedance = ImpedanceParams(lambda, damping, stiffness);
  cfg.dls_lambda = imp.num("dls_lambda", cfg.dls_lambda);
  if (imp.has("f_ext")) cfg.f_ext = to_vec3(imp.nums("f_ext"), "impedance.f_ext");

  SectionReader traj(ini, "trajectory");
  const std::string shape = traj.str("shape", "setpoint");
  if (shape == "setpoint") {
    cfg.trajectory.shape = TrajectorySpec::Shape::setpoint;
    cfg.trajectory.target = to_vec3(traj.nums("target"), "trajectory.target");
  } else if (shape == "waypoints") {
    cfg.trajectory.shape = TrajectorySpec::Shape::waypoints;
    cfg.trajectory.waypoints =
        to_waypoints(traj.require("waypoints"), "trajectory.waypoints");
    if (cfg.trajectory.waypoints.empty()) {
      throw std::runtime_error("config: trajectory.waypoints is empty");
    }
  } else if (shape == "circle") {
    cfg.trajectory.shape = TrajectorySpec::Shape::circle;
    cfg.trajectory.center = to_vec3(traj.nums("center"), "trajectory.center");
    cfg.trajectory.radius = traj.require_num("radius");
    cfg.trajectory.rate = traj.require_num("rate");
    cfg.trajectory.phase = traj.num("phase", 0.0);
    if (traj.has("axis"))
      cfg.trajectory.axis = to_vec3(traj.nums("axis"), "trajectory.axis");
  } else {
    throw std::runtime_error("config: unknown trajectory shape '" + shape + "'");
  }

  SectionReader safety(ini, "safety");
  const std::string mode = safety.str("mode", "c3bf");
  if (mode == "c3bf") {
    cfg.safety.mode = FilterMode::c3bf;
  } else if (mode == "distance") {
    cfg.safety.mode = FilterMode::distance;
  } else if (mode == "none") {
    cfg.safety.mode = FilterMode::none;
  } else {
    throw std::runtime_error("config: unknown safety mode '" + mode + "'");
  }
  cfg.safety.gamma = safety.num("gamma", cfg.safety.gamma);
  cfg.safety.gamma1 = safety.num("gamma1", cfg.safety.gamma1);
  cfg.safety.gamma2 = safety.num("gamma2", cfg.safety.gamma2);
  cfg.safety.eps_v = safety.num("eps_v", cfg.safety.eps_v);
  cfg.safety.ee_radius = safety.num("ee_radius", cfg.safety.ee_radius);
  cfg.safety.clearance = safety.num("clearance", cfg.safety.clearance);
  cfg.safety.margin = safety.num("margin", cfg.safety.margin);
  cfg.safety.guard = safety.num("guard", cfg.safety.guard);

  SectionReader world(ini, "world");
  cfg.perception.range = world.num("perception_range", cfg.perception.range);
  const int nobs = static_cast<int>(world.num("obstacles", 0));
  for (int k = 0; k < nobs; ++k) {
    const std::string p = "obs" + std::to_string(k) + ".";
    Obstacle obs;
    obs.id = k;
    obs.radius = world.require_num(p + "radius");
    if (world.has(p + "waypoints")) {
      obs.motion = Obstacle::Motion::waypoints;
      obs.waypoints =
          to_waypoints(world.str(p + "waypoints"), world.qualified(p + "waypoints"));
    } else {
      obs.center = to_vec3(world.nums(p + "center"), world.qualified(p + "center"));
      if (world.has(p + "velocity")) {
        obs.velocity =
            to_vec3(world.nums(p + "velocity"), world.qualified(p + "velocity"));
      }
    }
    obs.validate();
    cfg.obstacles.push_back(obs);
  }

  cfg.validate();
  return cfg;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  return load_config(is);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(const Vec3& v) {
  return fmt(v[0]) + " " + fmt(v[1]) + " " + fmt(v[2]);
}

std::string fmt_waypoints(const std::vector<Waypoint>& wps) {
  std::string out;
  for (const Waypoint& wp : wps) {
    if (!out.empty()) out += " ; ";
    out += fmt(wp.t) + " " + fmt(wp.p);
  }
  return out;
}

std::string fmt_gain(const Mat3& m) {
  Mat3 diag = Mat3(m.diagonal().asDiagonal());
  if ((m - diag).cwiseAbs().maxCoeff() == 0.0) {
    return fmt(Vec3(m.diagonal()));
  }
  std::string out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out += (out.empty() ? "" : " ") + fmt(m(r, c));
  return out;
}

}  // namespace

void save_config(std::ostream& os, const SimConfig& cfg) {
  os << "[sim]\n";
  os << "name = " << cfg.name << "\n";
  os << "dt = " << fmt(cfg.dt) << "\n";
  os << "duration = " << fmt(cfg.duration) << "\n";
  os << "integrator = "
     << (cfg.integrator == Integrator::rk4 ? "rk4" : "semi_implicit_euler") << "\n";
  std::string q0, qd0;
  for (int i = 0; i < cfg.arm.dof(); ++i) {
    q0 += (i ? " " : "") + fmt(cfg.q0[i]);
    qd0 += (i ? " " : "") + fmt(cfg.qd0[i]);
  }
  os << "q0 = " << q0 << "\n";
  os << "qd0 = " << qd0 << "\n";

  os << "\n[arm]\n";
  os << "links = " << cfg.arm.dof() << "\n";
  os << "gravity = " << fmt(cfg.arm.gravity()) << "\n";
  for (int i = 0; i < cfg.arm.dof(); ++i) {
    const DHLink& link = cfg.arm.links()[i];
    const std::string p = "link" + std::to_string(i) + ".";
    os << p << "a = " << fmt(link.a) << "\n";
    os << p << "alpha = " << fmt(link.alpha) << "\n";
    os << p << "d = " << fmt(link.d) << "\n";
    os << p << "theta_offset = " << fmt(link.theta_offset) << "\n";
    os << p << "mass = " << fmt(link.mass) << "\n";
    os << p << "com = " << fmt(link.com) << "\n";
    os << p << "inertia = " << fmt(link.inertia(0, 0)) << " " << fmt(link.inertia(1, 1))
       << " " << fmt(link.inertia(2, 2)) << " " << fmt(link.inertia(0, 1)) << " "
       << fmt(link.inertia(0, 2)) << " " << fmt(link.inertia(1, 2)) << "\n";
  }

  os << "\n[impedance]\n";
  os << "lambda = " << fmt_gain(cfg.impedance.lambda()) << "\n";
  os << "damping = " << fmt_gain(cfg.impedance.damping()) << "\n";
  os << "stiffness = " << fmt_gain(cfg.impedance.stiffness()) << "\n";
  os << "dls_lambda = " << fmt(cfg.dls_lambda) << "\n";
  os << "f_ext = " << fmt(cfg.f_ext) << "\n";

  os << "\n[trajectory]\n";
  switch (cfg.trajectory.shape) {
    case TrajectorySpec::Shape::setpoint:
      os << "shape = setpoint\n";
      os << "target = " << fmt(cfg.trajectory.target) << "\n";
      break;
    case TrajectorySpec::Shape::waypoints:
      os << "shape = waypoints\n";
      os << "waypoints = " << fmt_waypoints(cfg.trajectory.waypoints) << "\n";
      break;
    case TrajectorySpec::Shape::circle:
      os << "shape = circle\n";
      os << "center = " << fmt(cfg.trajectory.center) << "\n";
      os << "radius = " << fmt(cfg.trajectory.radius) << "\n";
      os << "rate = " << fmt(cfg.trajectory.rate) << "\n";
      os << "phase = " << fmt(cfg.trajectory.phase) << "\n";
      os << "axis = " << fmt(cfg.trajectory.axis) << "\n";
      break;
  }

  os << "\n[safety]\n";
  const char* mode = cfg.safety.mode == FilterMode::c3bf ? "c3bf"
                     : cfg.safety.mode == FilterMode::distance ? "distance"
                                                               : "none";
  os << "mode = " << mode << "\n";
  os << "gamma = " << fmt(cfg.safety.gamma) << "\n";
  os << "gamma1 = " << fmt(cfg.safety.gamma1) << "\n";
  os << "gamma2 = " << fmt(cfg.safety.gamma2) << "\n";
  os << "eps_v = " << fmt(cfg.safety.eps_v) << "\n";
  os << "ee_radius = " << fmt(cfg.safety.ee_radius) << "\n";
  os << "clearance = " << fmt(cfg.safety.clearance) << "\n";
  os << "margin = " << fmt(cfg.safety.margin) << "\n";
  os << "guard = " << fmt(cfg.safety.guard) << "\n";

  os << "\n[world]\n";
  os << "perception_range = " << fmt(cfg.perception.range) << "\n";
  os << "obstacles = " << cfg.obstacles.size() << "\n";
  for (size_t k = 0; k < cfg.obstacles.size(); ++k) {
    const Obstacle& obs = cfg.obstacles[k];
    const std::string p = "obs" + std::to_string(k) + ".";
    os << p << "radius = " << fmt(obs.radius) << "\n";
    if (obs.motion == Obstacle::Motion::waypoints) {
      os << p << "waypoints = " << fmt_waypoints(obs.waypoints) << "\n";
    } else {
      os << p << "center = " << fmt(obs.center) << "\n";
      os << p << "velocity = " << fmt(obs.velocity) << "\n";
    }
  }
}

void save_config_file(const std::string& path, const SimConfig& cfg) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot write config file: " + path);
  }
  save_config(os, cfg);
}

}  // namespace c3bf
