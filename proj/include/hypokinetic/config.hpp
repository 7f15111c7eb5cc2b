#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hypokinetic/errors.hpp"
#include "hypokinetic/operators.hpp"
#include "hypokinetic/phase_space.hpp"
#include "hypokinetic/rates.hpp"
#include "hypokinetic/sigma.hpp"

namespace hypokinetic {

enum class CollisionModel { bgk, anisotropic };
enum class InitialProfile { standard, single_mode, random };

struct Config {
  // [grid]
  int nx = 32;
  double lx = 2.0 * std::numbers::pi;
  int nv = 16;
  VelocityRule velocity_rule = VelocityRule::gauss_hermite;
  double vmax = 6.0;
  double velocity_shift = 0.0;
  DerivativeRule derivative = DerivativeRule::spectral;
  // [model]
  CollisionModel collision = CollisionModel::bgk;
  double kernel_base = 1.0;
  double kernel_amplitude = 0.5;
  double kernel_width = 1.0;
  // [scaling]
  Scaling scaling = Scaling::kinetic;
  double kn = 1.0;
  // [sigma]
  SigmaKind sigma_kind = SigmaKind::affine;
  double sigma_base = 1.0;
  double sigma_base_variation = 0.0;
  double sigma_slope = 0.5;
  double sigma_slope_variation = 0.0;
  double sigma_amplitude = 0.4;
  double sigma_amplitude_variation = 0.0;
  double sigma_frequency = 1.0;
  double z0 = 0.0;
  double z_min = -1.0;
  double z_max = 1.0;
  // [initial]
  InitialProfile profile = InitialProfile::standard;
  std::uint64_t seed = 1;
  double H = 1.0;
  bool inject_derivatives = false;
  // [time]
  double t_end = 10.0;
  double dt = 0.01;  // <= 0 means: use the largest admissible step
  int output_every = 10;
  // [uq]
  int lmax = 5;
  int collocation_nodes = 17;
  // [output]
  std::string out_dir = "out";
  double fit_window = 0.5;

  void validate() const;
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& text) {
  std::string s = text;
  double scale = 1.0;
  // "2pi", "pi", "0.5*pi"
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    scale = std::numbers::pi;
    s = s.substr(0, s.size() - 2);
    if (!s.empty() && s.back() == '*') s.pop_back();
    if (s.empty()) s = "1";
  }
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    v *= scale;
    if (!std::isfinite(v)) throw std::invalid_argument("inf");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("invalid number for '" + key + "': '" + text + "'");
  }
}

inline long parse_int(const std::string& key, const std::string& text) {
  try {
    size_t pos = 0;
    long v = std::stol(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("invalid integer for '" + key + "': '" + text + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("invalid boolean for '" + key + "': '" + text + "'");
}

}  // namespace detail

inline void apply_setting(Config& c, const std::string& key, const std::string& value) {
  using namespace detail;
  auto real = [&] { return parse_real(key, value); };
  auto integer = [&] { return static_cast<int>(parse_int(key, value)); };
  auto choice = [&](std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
      if (value == a) return value;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ValidationError("invalid value for '" + key + "': '" + value + "' (expected " + list + ")");
  };

  if (key == "grid.nx") c.nx = integer();
  else if (key == "grid.lx") c.lx = real();
  else if (key == "grid.nv") c.nv = integer();
  else if (key == "grid.velocity_rule")
    c.velocity_rule = choice({"gauss_hermite", "uniform_symmetric"}) == "gauss_hermite"
                          ? VelocityRule::gauss_hermite
                          : VelocityRule::uniform_symmetric;
  else if (key == "grid.vmax") c.vmax = real();
  else if (key == "grid.velocity_shift") c.velocity_shift = real();
  else if (key == "grid.derivative")
    c.derivative = choice({"spectral", "central2"}) == "spectral" ? DerivativeRule::spectral
                                                                  : DerivativeRule::central2;
  else if (key == "model.collision")
    c.collision = choice({"bgk", "anisotropic"}) == "bgk" ? CollisionModel::bgk : CollisionModel::anisotropic;
  else if (key == "model.kernel_base") c.kernel_base = real();
  else if (key == "model.kernel_amplitude") c.kernel_amplitude = real();
  else if (key == "model.kernel_width") c.kernel_width = real();
  else if (key == "scaling.scaling") c.scaling = parse_scaling(choice({"kinetic", "parabolic", "highfield"}));
  else if (key == "scaling.kn") c.kn = real();
  else if (key == "sigma.kind")
    c.sigma_kind = choice({"affine", "analytic"}) == "affine" ? SigmaKind::affine : SigmaKind::analytic;
  else if (key == "sigma.base") c.sigma_base = real();
  else if (key == "sigma.base_variation") c.sigma_base_variation = real();
  else if (key == "sigma.slope") c.sigma_slope = real();
  else if (key == "sigma.slope_variation") c.sigma_slope_variation = real();
  else if (key == "sigma.amplitude") c.sigma_amplitude = real();
  else if (key == "sigma.amplitude_variation") c.sigma_amplitude_variation = real();
  else if (key == "sigma.frequency") c.sigma_frequency = real();
  else if (key == "sigma.z0") c.z0 = real();
  else if (key == "sigma.z_min") c.z_min = real();
  else if (key == "sigma.z_max") c.z_max = real();
  else if (key == "initial.profile") {
    std::string p = choice({"default", "single_mode", "random"});
    c.profile = p == "default" ? InitialProfile::standard
                : p == "single_mode" ? InitialProfile::single_mode
                                     : InitialProfile::random;
  } else if (key == "initial.seed") {
    long s = parse_int(key, value);
    require(s >= 0, "initial.seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "initial.H") c.H = real();
  else if (key == "initial.inject_derivatives") c.inject_derivatives = parse_bool(key, value);
  else if (key == "time.t_end") c.t_end = real();
  else if (key == "time.dt") c.dt = value == "auto" ? 0.0 : real();
  else if (key == "time.output_every") c.output_every = integer();
  else if (key == "uq.lmax") c.lmax = integer();
  else if (key == "uq.collocation_nodes") c.collocation_nodes = integer();
  else if (key == "output.dir") c.out_dir = value;
  else if (key == "output.fit_window") c.fit_window = real();
  else throw ValidationError("unknown config key '" + key + "'");
}

inline void Config::validate() const {
  require(nx >= 4 && nx % 2 == 0, "grid.nx must be an even count >= 4");
  require(nv >= 4 && nv % 2 == 0, "grid.nv must be an even count >= 4");
  require(lx > 0.0, "grid.lx must be positive");
  require(vmax > 0.0, "grid.vmax must be positive");
  require(kernel_base > 0.0 && kernel_amplitude >= 0.0 && kernel_width > 0.0,
          "model.kernel_* must give a positive kernel");
  require(kn > 0.0 && kn <= 1.0, "scaling.kn must lie in (0, 1]");
  require(scaling != Scaling::kinetic || kn == 1.0, "scaling.kn must be 1 for kinetic scaling");
  require(z_min < z_max, "sigma.z_min must be below sigma.z_max");
  require(z0 >= z_min && z0 <= z_max, "sigma.z0 must lie in [z_min, z_max]");
  require(sigma_frequency > 0.0, "sigma.frequency must be positive");
  require(H >= 0.0, "initial.H must be nonnegative");
  require(t_end > 0.0, "time.t_end must be positive");
  require(dt >= 0.0, "time.dt must be positive (or auto)");
  require(dt == 0.0 || t_end >= dt, "time.t_end must be >= time.dt");
  require(output_every >= 1, "time.output_every must be >= 1");
  require(lmax >= 0 && lmax <= 10, "uq.lmax must lie in [0, 10]");
  require(collocation_nodes >= 2, "uq.collocation_nodes must be >= 2");
  require(fit_window > 0.0 && fit_window <= 1.0, "output.fit_window must lie in (0, 1]");
}

inline Config parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
  }
  Config c;
  static const std::set<std::string> sections = {"grid",    "model", "scaling", "sigma",
                                                 "initial", "time",  "uq",      "output"};
  for (const auto& [section, body] : tree) {
    if (!sections.count(section)) throw ValidationError("unknown config section '" + section + "'");
    for (const auto& [key, value] : body) apply_setting(c, section + "." + key, value.data());
  }
  c.validate();
  return c;
}

inline Config parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace hypokinetic
