#include "fddisac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

namespace fddisac {

namespace {

using nlohmann::json;

constexpr double kDeg = kPi / 180.0;

struct MethodEntry {
  Method method;
  const char* name;
};
constexpr MethodEntry kMethods[] = {
    {Method::Rs, "rs"},           {Method::RsNoEcm, "rs_no_ecm"},
    {Method::NoRs, "no_rs"},      {Method::RadarOnly, "radar_only"},
    {Method::Mrt, "mrt"},         {Method::Rzf, "rzf"},
};

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) fail(field(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) fail(field(key), "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) fail(field(key), "expected a number");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      fail(field(key), e.what());
    }
  }

  void read_list(const std::string& key, std::vector<double>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) fail(field(key), "expected an array of numbers");
    out.clear();
    for (const auto& x : *v) {
      if (!x.is_number()) fail(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<Reflector> read_reflectors(const json& arr, const std::string& field) {
  if (!arr.is_array()) fail(field, "expected an array of {theta_deg, beta}");
  std::vector<Reflector> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section s(arr[i], field + "[" + std::to_string(i) + "]");
    double theta_deg = 0.0;
    double beta = 0.1;
    s.read("theta_deg", theta_deg);
    s.read("beta", beta);
    s.finish();
    out.push_back({cd{beta, 0.0}, theta_deg * kDeg});
  }
  return out;
}

json reflectors_json(const std::vector<Reflector>& refl) {
  json arr = json::array();
  for (const auto& r : refl)
    arr.push_back({{"theta_deg", r.theta / kDeg}, {"beta", r.beta.real()}});
  return arr;
}

bool finite_list(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

const char* method_name(Method m) {
  for (const auto& e : kMethods)
    if (e.method == m) return e.name;
  return "?";
}

Method parse_method(const std::string& name) {
  for (const auto& e : kMethods)
    if (name == e.name) return e.method;
  throw ConfigError("methods: unknown method '" + name + "'");
}

const char* sweep_name(Sweep s) {
  switch (s) {
    case Sweep::Tmse: return "tmse";
    case Sweep::Snr: return "snr";
    case Sweep::Scnr: return "scnr";
  }
  return "?";
}

Sweep parse_sweep(const std::string& name) {
  if (name == "tmse") return Sweep::Tmse;
  if (name == "snr") return Sweep::Snr;
  if (name == "scnr") return Sweep::Scnr;
  throw ConfigError("sweep: expected tmse, snr or scnr, got '" + name + "'");
}

const std::vector<double>& ExperimentConfig::sweep_points() const {
  switch (sweep) {
    case Sweep::Snr: return snr_db;
    case Sweep::Scnr: return t_scnr_db;
    case Sweep::Tmse: break;
  }
  return t_mse_db;
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const char* field, const char* msg) {
    if (!ok) fail(field, msg);
  };
  try {
    geometry.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  check(std::isfinite(ul_snr_db), "geometry.ul_snr_db", "must be finite");
  check(users >= 1, "users", "must be >= 1");
  check(radar_streams >= 0, "radar_streams", "must be >= 0");
  check(scenario.min_paths >= 1, "scenario.min_paths", "must be >= 1");
  check(scenario.max_paths >= scenario.min_paths, "scenario.max_paths",
        "must be >= scenario.min_paths");
  check(scenario.max_angle > 0.0 && scenario.max_angle < kPi / 2,
        "scenario.max_angle_deg", "must be in (0, 90)");
  check(eta_reciprocity >= 0.0 && eta_reciprocity <= 1.0, "eta_reciprocity",
        "must be in [0, 1]");
  check(!snr_db.empty() && finite_list(snr_db), "snr_db", "must be a non-empty list");
  check(!t_mse_db.empty() && finite_list(t_mse_db), "t_mse_db",
        "must be a non-empty list");
  check(!t_scnr_db.empty() && finite_list(t_scnr_db), "t_scnr_db",
        "must be a non-empty list");
  check(n_trials >= 1, "n_trials", "must be >= 1");
  check(!methods.empty(), "methods", "must name at least one method");
  check(!targets_deg.empty() && finite_list(targets_deg), "sensing.targets_deg",
        "must list at least one target");
  for (double t : targets_deg)
    check(std::abs(t) <= 90.0, "sensing.targets_deg", "angles must be in [-90, 90]");
  check(mainlobe_deg >= 0.0, "sensing.mainlobe_deg", "must be >= 0");
  check(n_grid >= 2, "sensing.n_grid", "must be >= 2");
  check(sidelobe_halfwidth_deg >= 0.0 && sidelobe_halfwidth_deg < 90.0,
        "sensing.sidelobe_halfwidth_deg", "must be in [0, 90)");
  check(pattern_grid_deg > 0.0 && pattern_grid_deg <= 10.0, "sensing.pattern_grid_deg",
        "must be in (0, 10]");
  check(!scnr_targets.empty(), "scnr.targets", "must list at least one target");
  check(nomp.oversample_tau >= 1, "nomp.oversample_tau", "must be >= 1");
  check(nomp.oversample_theta >= 1, "nomp.oversample_theta", "must be >= 1");
  check(nomp.max_paths >= 1, "nomp.max_paths", "must be >= 1");
  check(nomp.gamma > 0.0, "nomp.gamma", "must be > 0");
  check(nomp.cyclic_rounds >= 0, "nomp.cyclic_rounds", "must be >= 0");
  check(solver.eta_lse > 0.0, "solver.eta_lse", "must be > 0");
  check(solver.eta_lse_max >= solver.eta_lse, "solver.eta_lse_max",
        "must be >= solver.eta_lse");
  check(solver.eps_p > 0.0, "solver.eps_p", "must be > 0");
  check(solver.t_max >= 1, "solver.t_max", "must be >= 1");
  check(solver.nu_min >= 0.0, "solver.nu_min", "must be >= 0");
  check(solver.nu_max >= solver.nu_min, "solver.nu_max", "must be >= solver.nu_min");
  check(solver.n_max >= 0, "solver.n_max", "must be >= 0");
  check(solver.n_max_slack >= 0, "solver.n_max_slack", "must be >= 0");
  check(solver.slack_tol >= 0.0, "solver.slack_tol", "must be >= 0");
  check(workers >= 1, "workers", "must be >= 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text.empty() ? std::string("{}") : json_text);
  } catch (const json::parse_error& e) {
    fail("config", std::string("JSON parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(root, "");

  if (const json* g = top.find("geometry")) {
    Section s(*g, "geometry");
    s.read("n_antennas", cfg.geometry.n_antennas);
    s.read("n_subcarriers", cfg.geometry.n_subcarriers);
    s.read("delta_f", cfg.geometry.delta_f);
    s.read("f_c_ul", cfg.geometry.f_c_ul);
    s.read("f_c_dl", cfg.geometry.f_c_dl);
    s.read("extrapolation_f", cfg.geometry.extrapolation_f);
    s.read("ul_snr_db", cfg.ul_snr_db);
    s.finish();
  }
  top.read("users", cfg.users);
  top.read("radar_streams", cfg.radar_streams);
  if (const json* g = top.find("scenario")) {
    Section s(*g, "scenario");
    s.read("min_paths", cfg.scenario.min_paths);
    s.read("max_paths", cfg.scenario.max_paths);
    double max_deg = cfg.scenario.max_angle / kDeg;
    s.read("max_angle_deg", max_deg);
    cfg.scenario.max_angle = max_deg * kDeg;
    s.read("sigma_path_sq", cfg.scenario.sigma_path_sq);
    s.finish();
  }
  top.read("eta_reciprocity", cfg.eta_reciprocity);
  top.read_list("snr_db", cfg.snr_db);
  top.read_list("t_mse_db", cfg.t_mse_db);
  top.read_list("t_scnr_db", cfg.t_scnr_db);
  if (const json* v = top.find("sweep")) {
    if (!v->is_string()) fail("sweep", "expected a string");
    cfg.sweep = parse_sweep(v->get<std::string>());
  }
  top.read("n_trials", cfg.n_trials);
  if (const json* v = top.find("seed")) {
    if (!v->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    cfg.seed = v->get<std::uint64_t>();
  }
  if (const json* v = top.find("methods")) {
    if (!v->is_array()) fail("methods", "expected an array of method names");
    cfg.methods.clear();
    for (const auto& m : *v) {
      if (!m.is_string()) fail("methods", "expected an array of method names");
      cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  if (const json* g = top.find("sensing")) {
    Section s(*g, "sensing");
    s.read_list("targets_deg", cfg.targets_deg);
    s.read("mainlobe_deg", cfg.mainlobe_deg);
    s.read("n_grid", cfg.n_grid);
    s.read("sidelobe_halfwidth_deg", cfg.sidelobe_halfwidth_deg);
    s.read("pattern_grid_deg", cfg.pattern_grid_deg);
    s.finish();
  }
  if (const json* g = top.find("scnr")) {
    Section s(*g, "scnr");
    if (const json* t = s.find("targets")) cfg.scnr_targets = read_reflectors(*t, "scnr.targets");
    if (const json* c = s.find("clutter")) cfg.scnr_clutter = read_reflectors(*c, "scnr.clutter");
    s.read("sigma_r_sq", cfg.sigma_r_sq);
    s.finish();
  }
  if (const json* g = top.find("nomp")) {
    Section s(*g, "nomp");
    s.read("gamma", cfg.nomp.gamma);
    s.read("oversample_tau", cfg.nomp.oversample_tau);
    s.read("oversample_theta", cfg.nomp.oversample_theta);
    s.read("max_paths", cfg.nomp.max_paths);
    s.read("cyclic_rounds", cfg.nomp.cyclic_rounds);
    s.finish();
  }
  if (const json* g = top.find("ecm")) {
    Section s(*g, "ecm");
    s.read("add_gain_mismatch", cfg.ecm.add_gain_mismatch);
    s.finish();
  }
  if (const json* g = top.find("solver")) {
    Section s(*g, "solver");
    s.read("eta_lse", cfg.solver.eta_lse);
    s.read("eta_lse_max", cfg.solver.eta_lse_max);
    s.read("lse_gap_bits", cfg.solver.lse_gap_bits);
    s.read("eps_p", cfg.solver.eps_p);
    s.read("t_max", cfg.solver.t_max);
    s.read("nu_min", cfg.solver.nu_min);
    s.read("nu_max", cfg.solver.nu_max);
    s.read("eps_nu", cfg.solver.eps_nu);
    s.read("n_max", cfg.solver.n_max);
    s.read("slack_tol", cfg.solver.slack_tol);
    s.read("n_max_slack", cfg.solver.n_max_slack);
    s.finish();
  }
  top.read("workers", cfg.workers);
  top.read("timing", cfg.timing);
  top.read("dump_precoders", cfg.dump_precoders);
  top.finish();

  cfg.geometry.noise_var_ul = db_to_linear(-cfg.ul_snr_db);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(method_name(m));
  json out = {
      {"geometry",
       {{"n_antennas", cfg.geometry.n_antennas},
        {"n_subcarriers", cfg.geometry.n_subcarriers},
        {"delta_f", cfg.geometry.delta_f},
        {"f_c_ul", cfg.geometry.f_c_ul},
        {"f_c_dl", cfg.geometry.f_c_dl},
        {"extrapolation_f", cfg.geometry.extrapolation_f},
        {"ul_snr_db", cfg.ul_snr_db}}},
      {"users", cfg.users},
      {"radar_streams", cfg.radar_streams},
      {"scenario",
       {{"min_paths", cfg.scenario.min_paths},
        {"max_paths", cfg.scenario.max_paths},
        {"max_angle_deg", cfg.scenario.max_angle / kDeg},
        {"sigma_path_sq", cfg.scenario.sigma_path_sq}}},
      {"eta_reciprocity", cfg.eta_reciprocity},
      {"snr_db", cfg.snr_db},
      {"t_mse_db", cfg.t_mse_db},
      {"t_scnr_db", cfg.t_scnr_db},
      {"sweep", sweep_name(cfg.sweep)},
      {"n_trials", cfg.n_trials},
      {"seed", cfg.seed},
      {"methods", methods},
      {"sensing",
       {{"targets_deg", cfg.targets_deg},
        {"mainlobe_deg", cfg.mainlobe_deg},
        {"n_grid", cfg.n_grid},
        {"sidelobe_halfwidth_deg", cfg.sidelobe_halfwidth_deg},
        {"pattern_grid_deg", cfg.pattern_grid_deg}}},
      {"scnr",
       {{"targets", reflectors_json(cfg.scnr_targets)},
        {"clutter", reflectors_json(cfg.scnr_clutter)},
        {"sigma_r_sq", cfg.sigma_r_sq}}},
      {"nomp",
       {{"gamma", cfg.nomp.gamma},
        {"oversample_tau", cfg.nomp.oversample_tau},
        {"oversample_theta", cfg.nomp.oversample_theta},
        {"max_paths", cfg.nomp.max_paths},
        {"cyclic_rounds", cfg.nomp.cyclic_rounds}}},
      {"ecm", {{"add_gain_mismatch", cfg.ecm.add_gain_mismatch}}},
      {"solver",
       {{"eta_lse", cfg.solver.eta_lse},
        {"eta_lse_max", cfg.solver.eta_lse_max},
        {"lse_gap_bits", cfg.solver.lse_gap_bits},
        {"eps_p", cfg.solver.eps_p},
        {"t_max", cfg.solver.t_max},
        {"nu_min", cfg.solver.nu_min},
        {"nu_max", cfg.solver.nu_max},
        {"eps_nu", cfg.solver.eps_nu},
        {"n_max", cfg.solver.n_max},
        {"slack_tol", cfg.solver.slack_tol},
        {"n_max_slack", cfg.solver.n_max_slack}}},
      {"workers", cfg.workers},
      {"timing", cfg.timing},
      {"dump_precoders", cfg.dump_precoders},
  };
  return out.dump(2);
}

}  // namespace fddisac
