#include "smectic/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace smectic {

namespace {

using nlohmann::json;

struct NamedExperiment {
  Experiment e;
  const char* name;
};

constexpr NamedExperiment kExperiments[] = {
    {Experiment::profile, "profile"},
    {Experiment::cube, "cube"},
    {Experiment::dislocation, "dislocation"},
    {Experiment::entropy_check, "entropy-check"},
    {Experiment::identity_suite, "identity-suite"},
    {Experiment::minimize, "minimize"},
};

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::vector<std::string>& allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    std::string msg = "unknown key";
    if (const auto near = nearest_key(key, allowed)) msg += "; did you mean \"" + *near + "\"?";
    fail(join_path(path, key), msg);
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0) || !std::isfinite(x)) fail(path, "must be positive and finite, got " + v.dump());
  return x;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

Eigen::Vector3d vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected an array of three numbers");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]"), number(v[2], path + "[2]")};
}

std::array<double, 2> range2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "expected [lo, hi]");
  const double lo = number(v[0], path + "[0]"), hi = number(v[1], path + "[1]");
  if (!(hi > lo)) fail(path, "need lo < hi");
  return {lo, hi};
}

std::vector<double> positive_list(const json& v, const std::string& path) {
  std::vector<double> out;
  if (v.is_array()) {
    if (v.empty()) fail(path, "list must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(positive(v[i], path + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(positive(v, path));
  }
  return out;
}

std::vector<int> grid_list(const json& v, const std::string& path) {
  std::vector<int> out;
  auto one = [&](const json& x, const std::string& p) {
    const int n = integer(x, p);
    if (n < 3) fail(p, "grid size must be at least 3");
    out.push_back(n);
  };
  if (v.is_array()) {
    if (v.empty()) fail(path, "list must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) one(v[i], path + "[" + std::to_string(i) + "]");
  } else {
    one(v, path);
  }
  return out;
}

void read_jump(const json& v, JumpConfig& out) {
  reject_unknown(v, "jump", {"m_plus", "m_minus", "nu"});
  if (!v.contains("m_plus")) fail("jump.m_plus", "missing required key");
  if (!v.contains("m_minus")) fail("jump.m_minus", "missing required key");
  out.m_plus = vec3(v["m_plus"], "jump.m_plus");
  out.m_minus = vec3(v["m_minus"], "jump.m_minus");
  out.nu.reset();
  if (v.contains("nu")) out.nu = vec3(v["nu"], "jump.nu");
  try {
    (void)out.states();
  } catch (const IncompatibleJump& e) {
    fail("jump", e.what());
  }
}

void read_profile(const json& v, ExperimentConfig& cfg) {
  reject_unknown(v, "profile", {"t_max", "tol"});
  if (v.contains("t_max")) cfg.t_max = positive(v["t_max"], "profile.t_max");
  if (v.contains("tol")) cfg.tol = positive(v["tol"], "profile.tol");
}

void read_dislocation(const json& v, ExperimentConfig& cfg) {
  reject_unknown(v, "dislocation",
                 {"b", "sign", "x_range", "y_range", "z_range", "nx", "ny", "nz", "refinements"});
  DislocationSpec& d = cfg.dislocation;
  if (v.contains("b")) d.b = number(v["b"], "dislocation.b");
  if (v.contains("sign")) {
    const int s = integer(v["sign"], "dislocation.sign");
    if (s != 1 && s != -1) fail("dislocation.sign", "must be +1 or -1");
    d.sign = s > 0 ? BpsSign::plus : BpsSign::minus;
  }
  if (v.contains("x_range")) d.x_range = range2(v["x_range"], "dislocation.x_range");
  if (v.contains("y_range")) d.y_range = range2(v["y_range"], "dislocation.y_range");
  if (v.contains("z_range")) {
    d.z_range = range2(v["z_range"], "dislocation.z_range");
    if (!(d.z_range[0] > 0.0)) fail("dislocation.z_range", "depth range must be strictly positive");
  }
  auto count = [&](const char* key, int& dst) {
    if (!v.contains(key)) return;
    dst = integer(v[key], std::string("dislocation.") + key);
    if (dst < 3) fail(std::string("dislocation.") + key, "must be at least 3");
  };
  count("nx", d.nx);
  count("ny", d.ny);
  count("nz", d.nz);
  if (v.contains("refinements")) {
    cfg.refinements = integer(v["refinements"], "dislocation.refinements");
    if (cfg.refinements < 1) fail("dislocation.refinements", "must be at least 1");
  }
}

void read_minimize(const json& v, ExperimentConfig& cfg, const std::filesystem::path& base) {
  reject_unknown(v, "minimize",
                 {"max_iters", "step_rule", "step", "armijo", "max_backtracks", "grad_tol", "slab",
                  "blend", "pinned_face_layers", "init", "initial_field"});
  MinimizeConfig& m = cfg.minimize;
  if (v.contains("max_iters")) {
    m.max_iters = integer(v["max_iters"], "minimize.max_iters");
    if (m.max_iters < 0) fail("minimize.max_iters", "must be nonnegative");
  }
  if (v.contains("step_rule")) {
    const json& r = v["step_rule"];
    if (r == "fixed") m.step_rule = StepRule::fixed;
    else if (r == "backtracking") m.step_rule = StepRule::backtracking;
    else fail("minimize.step_rule", "expected \"fixed\" or \"backtracking\"");
  }
  if (v.contains("step")) m.step = positive(v["step"], "minimize.step");
  if (v.contains("armijo")) {
    m.armijo = positive(v["armijo"], "minimize.armijo");
    if (m.armijo >= 1.0) fail("minimize.armijo", "must lie in (0, 1)");
  }
  if (v.contains("max_backtracks")) {
    m.max_backtracks = integer(v["max_backtracks"], "minimize.max_backtracks");
    if (m.max_backtracks < 0) fail("minimize.max_backtracks", "must be nonnegative");
  }
  if (v.contains("grad_tol")) m.grad_tol = positive(v["grad_tol"], "minimize.grad_tol");
  if (v.contains("slab")) {
    m.slab = positive(v["slab"], "minimize.slab");
    if (m.slab >= 0.5) fail("minimize.slab", "must lie in (0, 1/2)");
  }
  if (v.contains("blend")) {
    m.blend = positive(v["blend"], "minimize.blend");
    if (m.blend > 0.5 - m.slab) fail("minimize.blend", "ramp does not fit inside the free region");
  }
  if (v.contains("pinned_face_layers")) {
    m.pinned_face_layers = integer(v["pinned_face_layers"], "minimize.pinned_face_layers");
    if (m.pinned_face_layers < 0) fail("minimize.pinned_face_layers", "must be nonnegative");
  }
  if (v.contains("init")) {
    const json& i = v["init"];
    if (i == "ansatz") m.init = InitialCondition::ansatz;
    else if (i == "affine-blend") m.init = InitialCondition::affine_blend;
    else if (i == "provided") m.init = InitialCondition::provided;
    else fail("minimize.init", "expected \"ansatz\", \"affine-blend\" or \"provided\"");
  }
  if (v.contains("initial_field")) {
    if (!v["initial_field"].is_string()) fail("minimize.initial_field", "expected a path string");
    std::filesystem::path p = v["initial_field"].get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) fail("minimize.initial_field", "file not found: " + p.string());
    cfg.initial_field = p;
  }
  if (m.init == InitialCondition::provided && !cfg.initial_field)
    fail("minimize.initial_field", "required when init is \"provided\"");
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& n : kExperiments)
    if (n.e == e) return n.name;
  return "unknown";
}

std::optional<Experiment> experiment_from_string(const std::string& name) {
  for (const auto& n : kExperiments)
    if (name == n.name) return n.e;
  return std::nullopt;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& n : kExperiments) v.emplace_back(n.name);
    return v;
  }();
  return names;
}

std::optional<std::string> nearest_key(const std::string& key,
                                       const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  const Eigen::Vector3d layered_plus(1.0, 0.0, 0.5);
  cfg.jump = {layered_plus, Eigen::Vector3d::Zero(), std::nullopt};
  switch (e) {
    case Experiment::profile:
      cfg.epsilons = {0.5, 1.0, 2.0};
      break;
    case Experiment::cube:
      cfg.epsilons = {0.2, 0.1, 0.05};
      cfg.grid_sizes = {49};
      cfg.jump.m_minus = Eigen::Vector3d(-1.0, 0.0, 0.5);
      break;
    case Experiment::minimize:
      cfg.epsilons = {0.1};
      cfg.grid_sizes = {33};
      cfg.jump.m_minus = Eigen::Vector3d(-1.0, 0.0, 0.5);
      break;
    case Experiment::dislocation:
      cfg.epsilons = {0.2};
      break;
    case Experiment::entropy_check:
      cfg.epsilons = {1.0};
      cfg.grid_sizes = {33};
      cfg.jump.m_plus = Eigen::Vector3d(1.0, 1.0, 1.0);
      break;
    case Experiment::identity_suite:
      cfg.epsilons = {1.0};
      cfg.grid_sizes = {17, 33, 65};
      break;
  }
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::optional<std::string>& experiment,
                                   const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<document>: malformed JSON: ") + e.what());
  }
  reject_unknown(doc, "",
                 {"experiment", "epsilon", "grid_sizes", "box", "jump", "profile", "dislocation",
                  "minimize", "n_theta", "samples", "exponents", "output_dir", "seed",
                  "write_fields"});

  std::optional<std::string> name = experiment;
  if (doc.contains("experiment")) {
    if (!doc["experiment"].is_string()) fail("experiment", "expected a string");
    const std::string in_doc = doc["experiment"].get<std::string>();
    if (name && *name != in_doc)
      fail("experiment", "document names \"" + in_doc + "\" but \"" + *name + "\" was requested");
    name = in_doc;
  }
  if (!name) fail("experiment", "missing required key");
  const auto which = experiment_from_string(*name);
  if (!which) {
    std::string msg = "unknown experiment \"" + *name + "\"";
    if (const auto near = nearest_key(*name, experiment_names()))
      msg += "; did you mean \"" + *near + "\"?";
    fail("experiment", msg);
  }

  ExperimentConfig cfg = default_config(*which);
  if (doc.contains("epsilon")) cfg.epsilons = positive_list(doc["epsilon"], "epsilon");
  if (doc.contains("grid_sizes")) cfg.grid_sizes = grid_list(doc["grid_sizes"], "grid_sizes");
  if (doc.contains("box")) {
    reject_unknown(doc["box"], "box", {"lo", "hi"});
    if (doc["box"].contains("lo")) cfg.box.lo = vec3(doc["box"]["lo"], "box.lo");
    if (doc["box"].contains("hi")) cfg.box.hi = vec3(doc["box"]["hi"], "box.hi");
    if (!(cfg.box.hi.array() > cfg.box.lo.array()).all()) fail("box", "need lo < hi on every axis");
  }
  if (doc.contains("jump")) read_jump(doc["jump"], cfg.jump);
  if (doc.contains("profile")) read_profile(doc["profile"], cfg);
  if (doc.contains("dislocation")) read_dislocation(doc["dislocation"], cfg);
  if (doc.contains("minimize")) read_minimize(doc["minimize"], cfg, base_dir);
  if (doc.contains("n_theta")) {
    cfg.n_theta = integer(doc["n_theta"], "n_theta");
    if (cfg.n_theta < 2) fail("n_theta", "must be at least 2");
  }
  if (doc.contains("samples")) {
    cfg.samples = integer(doc["samples"], "samples");
    if (cfg.samples < 1) fail("samples", "must be at least 1");
  }
  if (doc.contains("exponents")) {
    cfg.exponents = positive_list(doc["exponents"], "exponents");
    for (double p : cfg.exponents)
      if (p < 1.0) fail("exponents", "exponents must be >= 1");
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) fail("output_dir", "expected a path string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
    if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("write_fields")) {
    if (!doc["write_fields"].is_boolean()) fail("write_fields", "expected true or false");
    cfg.write_fields = doc["write_fields"].get<bool>();
  }
  cfg.minimize.epsilon = cfg.epsilons.front();
  cfg.minimize.profile_t_max = cfg.t_max;
  cfg.minimize.profile_tol = cfg.tol;
  cfg.dislocation.epsilon = cfg.epsilons.front();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::optional<std::string>& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), experiment, path.parent_path());
}

}  // namespace smectic
