#include "smectic/runner.hpp"

#include "smectic/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace smectic {

namespace {

Json vec_json(const Eigen::Vector3d& v) { return Json{v.x(), v.y(), v.z()}; }

std::string eps_tag(double eps) { return "eps" + format_number(eps); }

double window_max_abs(const Eigen::ArrayXd& values, const Grid3& grid, const Window& w) {
  std::array<std::array<int, 2>, 3> r;
  for (int a = 0; a < 3; ++a) r[a] = w.node_range(grid, static_cast<Axis>(a));
  double m = 0.0;
  for (int k = r[2][0]; k <= r[2][1]; ++k)
    for (int j = r[1][0]; j <= r[1][1]; ++j)
      for (int i = r[0][0]; i <= r[0][1]; ++i)
        m = std::max(m, std::abs(values[grid.index(i, j, k)]));
  return m;
}

/// Observed convergence orders between consecutive refinements.
Json orders(const std::vector<double>& h, const std::vector<double>& err) {
  Json out = Json::array();
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    out.push_back(std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]));
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i + 1] < v[i])) return false;
  return true;
}

Grid3 cubic(const ExperimentConfig& cfg, int n) { return make_grid(n, n, n, cfg.box); }

// ---------------------------------------------------------------------------

void run_profile(const ExperimentConfig& cfg, ArtifactSink& sink) {
  const JumpStates j = cfg.jump.states();
  const ProfileSolution sol = solve_profile(j, cfg.t_max, cfg.tol);
  sink.add("profile.csv", profile_csv(sol));

  const double jc = jump_cost(j);
  Json energies = Json::array();
  for (double eps : cfg.epsilons) {
    const double e = profile_energy(sol, eps);
    energies.push_back(Json{{"epsilon", eps}, {"energy", e}, {"gap", std::abs(e - jc)}});
  }
  Json out;
  out["jump"] = to_json(j);
  out["t_max"] = cfg.t_max;
  out["tol"] = cfg.tol;
  out["samples"] = sol.ts.size();
  out["energy"] = energies.front()["energy"];
  out["jump_cost"] = jc;
  out["gap"] = energies.front()["gap"];
  out["energies"] = energies;
  out["decay_plus"] = sol.decay_plus;
  out["decay_minus"] = sol.decay_minus;
  out["fit_r2_plus"] = sol.fit_r2_plus;
  out["fit_r2_minus"] = sol.fit_r2_minus;
  out["tail_extension_error"] = sol.tail_extension_error();
  out["denom"] = sol.denom;
  sink.add_json("profile.json", out);
}

ScalarField initial_field(const ExperimentConfig& cfg, const MinimizeConfig& m,
                          const JumpStates& j, const Grid3& grid) {
  switch (m.init) {
    case InitialCondition::ansatz: return cube_ansatz(j, grid, m);
    case InitialCondition::affine_blend: return cube_affine_blend(j, grid, m);
    case InitialCondition::provided: break;
  }
  ScalarField u = read_field_dump(*cfg.initial_field);
  if (!(u.grid == grid))
    throw std::invalid_argument("minimize.initial_field: dump grid does not match grid_sizes/box");
  return u;
}

struct CubeRun {
  MinimizeReport report;
  CompactnessReport compactness;
};

CubeRun cube_run(const ExperimentConfig& cfg, double eps, int n, const JumpStates& j) {
  MinimizeConfig m = cfg.minimize;
  m.epsilon = eps;
  const Grid3 grid = cubic(cfg, n);
  const ScalarField u0 = initial_field(cfg, m, j, grid);
  MinimizeReport rep = minimize(u0, m, j);
  const Window w = m.window.value_or(cube_window(j.oriented_normal(), m.slab));
  CompactnessReport c = compactness_diagnostics(rep.field, cfg.exponents, w);
  return {std::move(rep), std::move(c)};
}

Json run_json(const CubeRun& run) {
  Json j = to_json(run.report);
  j["compactness"] = to_json(run.compactness);
  return j;
}

void run_cube(const ExperimentConfig& cfg, ArtifactSink& sink) {
  const JumpStates j = cfg.jump.states();
  const int n = cfg.grid_sizes.front();
  std::vector<double> eps = cfg.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());

  std::vector<std::vector<double>> rows;
  std::vector<double> excess, gap, curl;
  Json runs = Json::array();
  double lower = 0.0;
  for (double e : eps) {
    const CubeRun run = cube_run(cfg, e, n, j);
    const MinimizeReport& r = run.report;
    lower = r.lower_bound;
    const std::string tag = "cube_" + eps_tag(e);
    Json entry{{"epsilon", e}, {"grid", n}};
    entry.update(run_json(run));
    sink.add_json(tag + ".json", entry);
    sink.add(tag + "_trajectory.csv", trajectory_csv(r.trajectory));
    if (cfg.write_fields) sink.add_field(tag + "_field", r.field);

    excess.push_back(r.upper_bound - r.lower_bound);
    gap.push_back(r.equipartition_gap);
    curl.push_back(std::hypot(run.compactness.curl_x_l2, run.compactness.curl_y_l2));
    rows.push_back({e, static_cast<double>(n), r.upper_bound, r.lower_bound, excess.back(),
                    r.final_energy.total, r.equipartition_gap, run.compactness.curl_x_l2,
                    run.compactness.curl_y_l2, run.compactness.div_b_l1,
                    run.compactness.compression_l2, static_cast<double>(r.iterations)});
    runs.push_back(tag + ".json");
  }
  sink.add("cube_sweep.csv",
           table_csv({"epsilon", "grid", "ansatz_energy", "lower_bound", "excess", "final_energy",
                      "equipartition_gap", "curl_x_l2", "curl_y_l2", "div_b_l1",
                      "compression_l2", "iterations"},
                     rows));
  Json summary;
  summary["jump"] = to_json(j);
  summary["grid"] = n;
  summary["lower_bound"] = lower;
  summary["epsilons"] = eps;
  summary["excess_decreasing"] = strictly_decreasing(excess);
  summary["gap_decreasing"] = strictly_decreasing(gap);
  summary["curl_l2_decreasing"] = strictly_decreasing(curl);
  summary["runs"] = runs;
  sink.add_json("cube.json", summary);
}

void run_minimize(const ExperimentConfig& cfg, ArtifactSink& sink) {
  const JumpStates j = cfg.jump.states();
  const CubeRun run = cube_run(cfg, cfg.epsilons.front(), cfg.grid_sizes.front(), j);
  Json out{{"epsilon", cfg.epsilons.front()}, {"grid", cfg.grid_sizes.front()},
           {"jump", to_json(j)}, {"step_rule", to_string(cfg.minimize.step_rule)},
           {"init", to_string(cfg.minimize.init)}};
  out.update(run_json(run));
  sink.add_json("minimize.json", out);
  sink.add_json("energy.json", to_json(run.report.final_energy));
  sink.add("trajectory.csv", trajectory_csv(run.report.trajectory));
  if (cfg.write_fields) sink.add_field("minimize_field", run.report.field);
}

void run_dislocation(const ExperimentConfig& cfg, ArtifactSink& sink) {
  const DislocationSpec& base = cfg.dislocation;
  const double half_b = 0.5 * base.b;
  std::vector<double> hs, bps_max, heat_max;
  std::vector<std::vector<double>> rows;
  double worst_left = 0.0, worst_right = 0.0;
  for (int level = 0; level < cfg.refinements; ++level) {
    DislocationSpec spec = base;
    spec.nx = (base.nx - 1) * (1 << level) + 1;
    spec.nz = (base.nz - 1) * (1 << level) + 1;
    const ScalarField u = dislocation_field(spec);
    const ScalarField s = dislocation_heat_field(spec);
    const Window interior{{{{0.1, 0.9}, {0.0, 1.0}, {0.1, 0.9}}}};
    const BpsVerification v = bps_verify(u, spec.epsilon, spec.sign, interior);

    const Eigen::ArrayXd heat = first_difference(s.values, s.grid, Axis::z) -
                                spec.epsilon * second_difference(s.values, s.grid, Axis::x);
    const double heat_res = window_max_abs(heat, s.grid, interior);

    double left = 0.0, right = 0.0;
    for (int k = 0; k < u.grid.nz(); ++k)
      for (int jj = 0; jj < u.grid.ny(); ++jj) {
        left = std::max(left, std::abs(u(0, jj, k)));
        right = std::max(right, std::abs(u(u.grid.nx() - 1, jj, k) - half_b));
      }
    worst_left = std::max(worst_left, left);
    worst_right = std::max(worst_right, right);

    hs.push_back(u.grid.hx());
    bps_max.push_back(v.max_residual);
    heat_max.push_back(heat_res);
    rows.push_back({static_cast<double>(spec.nx), static_cast<double>(spec.nz), u.grid.hx(),
                    u.grid.hz(), v.max_residual, v.l2_residual, heat_res, left, right});
    if (level == 0 && cfg.write_fields) {
      sink.add_field("dislocation_u", u);
      sink.add_field("dislocation_S", s);
    }
  }
  sink.add("dislocation.csv",
           table_csv({"nx", "nz", "hx", "hz", "bps_max_residual", "bps_l2_residual",
                      "heat_max_residual", "left_plateau", "right_plateau"},
                     rows));
  Json out;
  out["b"] = base.b;
  out["epsilon"] = base.epsilon;
  out["sign"] = static_cast<int>(base.sign);
  out["x_range"] = base.x_range;
  out["z_range"] = base.z_range;
  out["bps_orders"] = orders(hs, bps_max);
  out["heat_orders"] = orders(hs, heat_max);
  out["left_plateau"] = worst_left;
  out["right_plateau"] = worst_right;
  sink.add_json("dislocation.json", out);
}

void run_entropy_check(const ExperimentConfig& cfg, ArtifactSink& sink) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> comp(-2.0, 2.0), angle(0.0, std::numbers::pi);
  double combo = 0.0;
  for (int s = 0; s < cfg.samples; ++s) {
    const Eigen::Vector3d m(comp(rng), comp(rng), comp(rng));
    combo = std::max(combo, rotation_combo_check(m, angle(rng)));
  }

  const JumpStates j = cfg.jump.states();
  const double jc = jump_cost(j);
  std::vector<std::vector<double>> frames;
  double best = 0.0, routes = 0.0;
  for (int k = 0; k < cfg.n_theta; ++k) {
    const Frame f{std::numbers::pi * k / cfg.n_theta};
    const double a = frame_cost(j, f), b = frame_cost_direct(j, f);
    best = std::max(best, a);
    routes = std::max(routes, std::abs(a - b));
    frames.push_back({f.theta, a, b});
  }
  sink.add("frames.csv", table_csv({"theta", "frame_cost", "frame_cost_direct"}, frames));

  const TrigField trig = TrigField::random(cfg.seed);
  const ScalarField u = sample_field(cubic(cfg, cfg.grid_sizes.front()), trig);
  const Eigen::ArrayXd eig = entropy_density_eig(u).values;
  const Eigen::ArrayXd sup = entropy_sup_rotations(u, cfg.n_theta).values;
  const double floor = 1e-8 * eig.maxCoeff();
  double rel = 0.0, overshoot = 0.0;
  for (Eigen::Index n = 0; n < eig.size(); ++n) {
    overshoot = std::max(overshoot, sup[n] - eig[n]);
    if (eig[n] > floor) rel = std::max(rel, (eig[n] - sup[n]) / eig[n]);
  }

  Json out;
  out["seed"] = cfg.seed;
  out["samples"] = cfg.samples;
  out["combo_max_deviation"] = combo;
  out["jump"] = to_json(j);
  out["jump_cost"] = jc;
  out["n_theta"] = cfg.n_theta;
  out["max_frame_cost"] = best;
  out["max_frame_cost_ratio"] = best / jc;
  out["frame_route_mismatch"] = routes;
  out["field"] = trig.to_json();
  out["grid"] = cfg.grid_sizes.front();
  out["sup_vs_eig_max_rel"] = rel;
  out["sup_minus_eig_max"] = overshoot;
  sink.add_json("entropy.json", out);
}

double gradient_check(const ScalarField& u, double eps, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::ArrayXd dir(u.grid.size());
  for (Eigen::Index n = 0; n < dir.size(); ++n) dir[n] = gauss(rng);
  const ClampMask none = ClampMask::none(u.grid);
  const double analytic = (energy_gradient(u, eps, none).values * dir).sum();
  const double h = 1e-5;
  const double ep = energy(ScalarField(u.grid, u.values + h * dir), eps).total;
  const double em = energy(ScalarField(u.grid, u.values - h * dir), eps).total;
  const double fd = (ep - em) / (2.0 * h);
  return std::abs(analytic - fd) / std::abs(fd);
}

void run_identity_suite(const ExperimentConfig& cfg, ArtifactSink& sink) {
  const TrigField trig = TrigField::random(cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  const Frame frame{angle(rng)};
  const double eps = cfg.epsilons.front();

  std::vector<double> hs, curv, plus, minus, divs;
  std::vector<std::vector<double>> rows;
  for (int n : cfg.grid_sizes) {
    const ScalarField u = sample_field(cubic(cfg, n), trig);
    const double total = energy(u, eps).total;
    const double c = curvature_flux_check(u).mismatch;
    const double bp = std::abs(bps_decomposition(u, eps, BpsSign::plus).reconstructed_total - total);
    const double bm = std::abs(bps_decomposition(u, eps, BpsSign::minus).reconstructed_total - total);
    const DivSigma ds = div_sigma(u, frame);
    const double dv = window_max_abs(ds.stencil_divergence.values - ds.product_form.values, u.grid,
                                     Window::interior(0.125));
    hs.push_back(u.grid.hx());
    curv.push_back(c);
    plus.push_back(bp);
    minus.push_back(bm);
    divs.push_back(dv);
    rows.push_back({static_cast<double>(n), u.grid.hx(), c, bp, bm, dv});
  }
  sink.add("identity_suite.csv",
           table_csv({"n", "h", "curvature_mismatch", "bps_plus_mismatch", "bps_minus_mismatch",
                      "div_sigma_max"},
                     rows));

  const ScalarField small = sample_field(cubic(cfg, 9), trig);
  Json out;
  out["seed"] = cfg.seed;
  out["field"] = trig.to_json();
  out["epsilon"] = eps;
  out["frame_theta"] = frame.theta;
  out["curvature_orders"] = orders(hs, curv);
  out["bps_plus_orders"] = orders(hs, plus);
  out["bps_minus_orders"] = orders(hs, minus);
  out["div_sigma_orders"] = orders(hs, divs);
  out["gradient_check_rel_error"] = gradient_check(small, eps, rng);
  sink.add_json("identity_suite.json", out);
}

}  // namespace

// ---------------------------------------------------------------------------

TrigField TrigField::random(std::uint64_t seed, int terms) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.2, 0.5), wave(-2.0, 2.0),
      phase(0.0, 2.0 * std::numbers::pi);
  TrigField f;
  for (int t = 0; t < terms; ++t) {
    f.amplitude.push_back(amp(rng));
    f.wave.emplace_back(wave(rng), wave(rng), wave(rng));
    f.phase.push_back(phase(rng));
  }
  return f;
}

double TrigField::operator()(double x, double y, double z) const {
  const Eigen::Vector3d p(x, y, z);
  double v = 0.0;
  for (std::size_t t = 0; t < amplitude.size(); ++t)
    v += amplitude[t] * std::sin(wave[t].dot(p) + phase[t]);
  return v;
}

Json TrigField::to_json() const {
  Json terms = Json::array();
  for (std::size_t t = 0; t < amplitude.size(); ++t)
    terms.push_back(Json{{"amplitude", amplitude[t]}, {"wave", vec_json(wave[t])},
                         {"phase", phase[t]}});
  return terms;
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["experiment"] = to_string(cfg.experiment);
  j["epsilon"] = cfg.epsilons;
  j["grid_sizes"] = cfg.grid_sizes;
  j["box"] = to_json(cfg.box);
  Json jump{{"m_plus", vec_json(cfg.jump.m_plus)}, {"m_minus", vec_json(cfg.jump.m_minus)}};
  if (cfg.jump.nu) jump["nu"] = vec_json(*cfg.jump.nu);
  j["jump"] = jump;
  j["profile"] = Json{{"t_max", cfg.t_max}, {"tol", cfg.tol}};
  const DislocationSpec& d = cfg.dislocation;
  j["dislocation"] = Json{{"b", d.b},           {"sign", static_cast<int>(d.sign)},
                          {"x_range", d.x_range}, {"y_range", d.y_range},
                          {"z_range", d.z_range}, {"nx", d.nx},
                          {"ny", d.ny},           {"nz", d.nz},
                          {"refinements", cfg.refinements}};
  const MinimizeConfig& m = cfg.minimize;
  Json mj{{"max_iters", m.max_iters},
          {"step_rule", to_string(m.step_rule)},
          {"step", m.step},
          {"armijo", m.armijo},
          {"max_backtracks", m.max_backtracks},
          {"grad_tol", m.grad_tol},
          {"slab", m.slab},
          {"blend", m.blend},
          {"pinned_face_layers", m.pinned_face_layers},
          {"init", to_string(m.init)}};
  if (cfg.initial_field) mj["initial_field"] = cfg.initial_field->filename().string();
  j["minimize"] = mj;
  j["n_theta"] = cfg.n_theta;
  j["samples"] = cfg.samples;
  j["exponents"] = cfg.exponents;
  j["seed"] = cfg.seed;
  j["write_fields"] = cfg.write_fields;
  return j;
}

void run_experiment(const ExperimentConfig& cfg, ArtifactSink& sink) {
  switch (cfg.experiment) {
    case Experiment::profile: return run_profile(cfg, sink);
    case Experiment::cube: return run_cube(cfg, sink);
    case Experiment::minimize: return run_minimize(cfg, sink);
    case Experiment::dislocation: return run_dislocation(cfg, sink);
    case Experiment::entropy_check: return run_entropy_check(cfg, sink);
    case Experiment::identity_suite: return run_identity_suite(cfg, sink);
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path().string() + ": cannot create directory: " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace

Json emit_outputs(const std::vector<Artifact>& artifacts, const std::filesystem::path& dir,
                  bool force, const Json& meta) {
  const std::filesystem::path manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path) && !force)
    throw IoError(manifest_path.string() +
                  ": output directory already holds a manifest; pass --force to overwrite");

  std::vector<const Artifact*> sorted;
  for (const auto& a : artifacts) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(),
            [](const Artifact* a, const Artifact* b) { return a->path < b->path; });

  Json entries = Json::array();
  for (const Artifact* a : sorted) {
    write_file(dir / a->path, a->content);
    entries.push_back(
        Json{{"path", a->path}, {"bytes", a->content.size()}, {"sha256", sha256_hex(a->content)}});
  }
  Json manifest = meta;
  manifest["artifacts"] = entries;
  write_file(manifest_path, manifest.dump(2) + "\n");
  return manifest;
}

int run_and_emit(const ExperimentConfig& cfg, const std::filesystem::path& dir, bool force,
                 std::string* message) {
  const std::filesystem::path manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path) && !force) {
    if (message)
      *message = manifest_path.string() +
                 ": output directory already holds a manifest; pass --force to overwrite";
    return exit_code::io;
  }

  ArtifactSink sink;
  int code = exit_code::ok;
  std::string error;
  try {
    run_experiment(cfg, sink);
  } catch (const ConfigError& e) {
    code = exit_code::config;
    error = e.what();
  } catch (const std::invalid_argument& e) {
    code = exit_code::config;
    error = e.what();
  } catch (const IoError& e) {
    code = exit_code::io;
    error = e.what();
  } catch (const std::exception& e) {
    code = exit_code::numerical;
    error = e.what();
  }

  Json meta;
  meta["experiment"] = to_string(cfg.experiment);
  meta["seed"] = cfg.seed;
  meta["status"] = code == exit_code::ok ? "ok" : "failed";
  if (code != exit_code::ok) meta["error"] = error;
  meta["config"] = to_json(cfg);
  try {
    emit_outputs(sink.artifacts, dir, force, meta);
  } catch (const std::exception& e) {
    if (message) *message = e.what();
    return exit_code::io;
  }
  if (message) *message = error;
  return code;
}

}  // namespace smectic
