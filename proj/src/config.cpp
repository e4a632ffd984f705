#include "cqed/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace cqed {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"model", {"g_a", "g_c", "k_tilde", "gamma_tilde", "tau_off"}},
    {"input", {"state", "p", "amplitudes_re", "amplitudes_im"}},
    {"grid", {"tau_start", "tau_end", "dt", "sample_step"}},
    {"solver", {"kind", "trajectories", "seed", "workers"}},
    {"sweep", {"rates", "fixed_rate"}},
    {"map", {"p_points", "tau_points", "tau_max", "subsystem"}},
    {"output", {"path", "observables"}},
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw std::invalid_argument(fmt::format("{}: '{}' is not a number", key, text));
  return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split_list(text)) out.push_back(to_double(key, p));
  return out;
}

long to_integer(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v)) throw std::invalid_argument(fmt::format("{}: '{}' is not an integer", key, text));
  return static_cast<long>(v);
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(fmt::format("config: {}", e.message()));
  }
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    const auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) throw std::invalid_argument(fmt::format("config: unknown section '{}'", section));
    if (!body.data().empty()) throw std::invalid_argument(fmt::format("config: key '{}' outside a section", section));
    for (const auto& [key, value] : body) {
      if (!known->second.count(key)) throw std::invalid_argument(fmt::format("config: unknown key '{}.{}'", section, key));
      std::string text = value.data();
      // Inline comments need whitespace before the marker.
      for (const char* marker : {" #", "\t#", " ;", "\t;"}) {
        if (const auto pos = text.find(marker); pos != std::string::npos) text.erase(pos);
      }
      kv[section + "." + key] = boost::trim_copy(text);
    }
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  RunConfig cfg;
  auto& sc = cfg.scenario;
  auto& m = sc.model;
  const std::pair<const char*, double*> model_keys[] = {{"model.g_a", &m.g_a},
                                                        {"model.g_c", &m.g_c},
                                                        {"model.k_tilde", &m.k_tilde},
                                                        {"model.gamma_tilde", &m.gamma_tilde},
                                                        {"model.tau_off", &m.tau_off}};
  for (const auto& [key, field] : model_keys) {
    if (auto v = get(key)) *field = to_double(key, *v);
  }

  const std::string state = boost::to_lower_copy(get("input.state").value_or("w"));
  if (state == "w") {
    sc.input = InputStateSpec::w();
  } else if (state == "ghz") {
    sc.input = InputStateSpec::ghz();
  } else if (state == "mixed") {
    const auto p = get("input.p");
    if (!p) throw std::invalid_argument("config: input.state = mixed needs input.p");
    sc.input = InputStateSpec::mixed(to_double("input.p", *p));
  } else if (state == "custom") {
    const auto re = to_doubles("input.amplitudes_re", get("input.amplitudes_re").value_or(""));
    auto im = to_doubles("input.amplitudes_im", get("input.amplitudes_im").value_or(""));
    if (im.empty()) im.assign(8, 0.0);
    if (re.size() != 8 || im.size() != 8) throw std::invalid_argument("config: custom input needs 8 amplitudes");
    std::array<Complex, 8> a;
    for (int i = 0; i < 8; ++i) a[i] = {re[i], im[i]};
    sc.input = InputStateSpec::custom(a);
  } else {
    throw std::invalid_argument(fmt::format("config: unknown input.state '{}'", state));
  }
  if (state != "mixed" && get("input.p")) throw std::invalid_argument("config: input.p only applies to mixed inputs");

  const double tau_start = to_double("grid.tau_start", get("grid.tau_start").value_or("0"));
  const double tau_end = to_double("grid.tau_end", get("grid.tau_end").value_or("12"));
  const double dt = to_double("grid.dt", get("grid.dt").value_or("0.001"));
  const double sample_step = to_double("grid.sample_step", get("grid.sample_step").value_or("0.01"));
  sc.grid = TimeGrid::uniform(tau_start, tau_end, dt, sample_step);

  if (auto v = get("solver.kind")) sc.solver.kind = parse_solver(boost::to_lower_copy(*v));
  if (auto v = get("solver.trajectories")) sc.solver.n_traj = static_cast<int>(to_integer("solver.trajectories", *v));
  if (auto v = get("solver.seed")) sc.solver.seed = static_cast<std::uint64_t>(to_integer("solver.seed", *v));
  if (auto v = get("solver.workers")) sc.solver.workers = static_cast<unsigned>(to_integer("solver.workers", *v));

  if (auto v = get("sweep.rates")) cfg.sweep_rates = to_doubles("sweep.rates", *v);
  if (auto v = get("sweep.fixed_rate")) cfg.sweep_fixed_rate = to_double("sweep.fixed_rate", *v);

  if (auto v = get("map.p_points")) cfg.map_p_points = static_cast<int>(to_integer("map.p_points", *v));
  if (auto v = get("map.tau_points")) cfg.map_tau_points = static_cast<int>(to_integer("map.tau_points", *v));
  if (auto v = get("map.tau_max")) cfg.map_tau_max = to_double("map.tau_max", *v);
  if (auto v = get("map.subsystem")) {
    const auto s = boost::to_lower_copy(*v);
    if (s == "atoms") {
      cfg.map_subsystem = Subsystem::Atoms;
    } else if (s == "cavities") {
      cfg.map_subsystem = Subsystem::Cavities;
    } else {
      throw std::invalid_argument(fmt::format("config: unknown map.subsystem '{}'", *v));
    }
  }
  if (cfg.map_p_points < 2 || cfg.map_tau_points < 2) throw std::invalid_argument("config: map grids need 2 points");

  if (auto v = get("output.path")) sc.output_path = *v;
  if (auto v = get("output.observables")) sc.observables = split_list(*v);

  sc.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open config {}", path));
  return parse_config(in);
}

}  // namespace cqed
