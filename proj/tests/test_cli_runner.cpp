#include <doctest.h>

#include "smectic/config.hpp"
#include "smectic/runner.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace smectic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("smectic_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const Artifact* find(const ArtifactSink& sink, const std::string& path) {
  for (const Artifact& a : sink.artifacts)
    if (a.path == path) return &a;
  return nullptr;
}

}  // namespace

TEST_CASE("config defaults") {
  const ExperimentConfig cfg = parse_config_text(R"({"experiment": "profile"})");
  CHECK(cfg.experiment == Experiment::profile);
  CHECK(cfg.t_max == 40.0);
  CHECK(cfg.tol == 1e-10);
  CHECK(cfg.epsilons == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(cfg.jump.m_plus.isApprox(Eigen::Vector3d(1, 0, 0.5)));
  CHECK(cfg.jump.m_minus.isZero());

  const ExperimentConfig cube = parse_config_text("{}", std::string("cube"));
  CHECK(cube.grid_sizes == std::vector<int>{49});
  CHECK(cube.epsilons == std::vector<double>{0.2, 0.1, 0.05});

  const ExperimentConfig m = parse_config_text(R"({"experiment": "minimize", "epsilon": [0.07]})");
  CHECK(m.minimize.epsilon == 0.07);
}

TEST_CASE("config validation names the offending key") {
  CHECK(config_error(R"({"experiment": "profile", "epsilon": [-1]})").find("epsilon") != std::string::npos);
  const std::string typo = config_error(R"({"experiment": "profile", "epsilonn": [1]})");
  CHECK(typo.find("epsilonn") != std::string::npos);
  CHECK(typo.find("did you mean \"epsilon\"") != std::string::npos);
  CHECK(config_error(R"({"experiment": "cube", "minimize": {"slab": 0.7}})").find("minimize.slab") != std::string::npos);
  CHECK(config_error(R"({"experiment": "cube", "minimize": {"sttep": 1}})").find("did you mean \"step\"") != std::string::npos);
  CHECK(config_error(R"({"experiment": "profile", "jump": {"m_plus": [1, 0, 0.4], "m_minus": [0, 0, 0]}})")
            .find("jump") != std::string::npos);
  CHECK(config_error(R"({"experiment": "profile", "jump": {"m_plus": [1, 0], "m_minus": [0, 0, 0]}})").find("jump.m_plus") != std::string::npos);
  CHECK(config_error(R"({"experiment": "cube", "grid_sizes": [2]})").find("grid_sizes[0]") != std::string::npos);
  CHECK(config_error(R"({"experiment": "profil"})").find("did you mean \"profile\"") != std::string::npos);
  CHECK(config_error(R"({"epsilon": [1]})").find("experiment") != std::string::npos);
  CHECK(config_error(R"({"experiment": "profile",)").find("JSON") != std::string::npos);
  CHECK(config_error(R"({"experiment": "minimize", "minimize": {"init": "provided"}})").find("initial_field") != std::string::npos);
  CHECK_THROWS_AS(parse_config_text(R"({"experiment": "cube"})", std::string("profile")), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("profile run produces its tables") {
  ArtifactSink sink;
  run_experiment(parse_config_text(R"({"experiment": "profile"})"), sink);
  const Artifact* csv = find(sink, "profile.csv");
  REQUIRE(csv);
  CHECK(csv->content.rfind("t,g,g_prime\n", 0) == 0);
  const Artifact* js = find(sink, "profile.json");
  REQUIRE(js);
  const Json j = Json::parse(js->content);
  CHECK(std::abs(j["energy"].get<double>() - 1.0 / (6.0 * std::sqrt(5.0))) < 1e-6);
  CHECK(j["jump_cost"].get<double>() == doctest::Approx(1.0 / (6.0 * std::sqrt(5.0))));
  CHECK(j["gap"].get<double>() < 1e-6);
}

TEST_CASE("identity suite is deterministic for a fixed seed") {
  const std::string text = R"({"experiment": "identity-suite", "grid_sizes": [9, 17], "seed": 7})";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  CHECK(run_and_emit(parse_config_text(text), a, false) == exit_code::ok);
  CHECK(run_and_emit(parse_config_text(text), b, false) == exit_code::ok);
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  CHECK(slurp(a / "identity_suite.csv") == slurp(b / "identity_suite.csv"));
  const Json m = Json::parse(slurp(a / "manifest.json"));
  CHECK(m["seed"] == 7);
  for (const auto& entry : m["artifacts"]) {
    const std::string body = slurp(a / entry["path"].get<std::string>());
    CHECK(entry["bytes"] == body.size());
    CHECK(entry["sha256"] == sha256_hex(body));
  }

  const ExperimentConfig other = parse_config_text(R"({"experiment": "identity-suite", "grid_sizes": [9, 17], "seed": 8})");
  const fs::path c = scratch("det_c");
  run_and_emit(other, c, false);
  CHECK(slurp(a / "identity_suite.json") != slurp(c / "identity_suite.json"));
}

TEST_CASE("cube run reports the bracket") {
  ArtifactSink sink;
  run_experiment(parse_config_text(
                     R"({"experiment": "cube", "epsilon": [0.1], "grid_sizes": [17], "minimize": {"max_iters": 3}, "write_fields": false})"),
                 sink);
  const Artifact* rep = find(sink, "cube_eps0.1.json");
  REQUIRE(rep);
  const Json j = Json::parse(rep->content);
  for (const char* key : {"lower_bound", "upper_bound", "jump_area", "equipartition_gap", "lower_bound_slack"})
    CHECK(j.contains(key));
  CHECK(j["lower_bound"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(j["final_energy"]["total"].get<double>() <= j["upper_bound"].get<double>() + 1e-6);
  CHECK(find(sink, "cube_sweep.csv"));
}

TEST_CASE("emit outputs") {
  const fs::path empty = scratch("empty");
  const Json m = emit_outputs({}, empty, false);
  CHECK(m["artifacts"].empty());
  CHECK(fs::exists(empty / "manifest.json"));
  CHECK_THROWS_AS(emit_outputs({}, empty, false), IoError);
  CHECK_NOTHROW(emit_outputs({}, empty, true));

  EnergyBreakdown e;
  e.epsilon = 0.1;
  e.compression = 1.0;
  e.bending = 2.0;
  e.total = 3.0;
  e.curvature_integral = -1.0;
  const Json ej = to_json(e);
  CHECK(ej.size() == 5u);
  for (const char* key : {"epsilon", "compression", "bending", "total", "curvature_integral"})
    CHECK(ej.contains(key));
  const fs::path one = scratch("one");
  emit_outputs({{"energy.json", ej.dump(2) + "\n"}}, one, false);
  CHECK(Json::parse(slurp(one / "energy.json")) == ej);

  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("rerun refuses without force") {
  const fs::path dir = scratch("rerun");
  const ExperimentConfig cfg = parse_config_text(R"({"experiment": "profile"})");
  CHECK(run_and_emit(cfg, dir, false) == exit_code::ok);
  std::string msg;
  CHECK(run_and_emit(cfg, dir, false, &msg) == exit_code::io);
  CHECK(msg.find("--force") != std::string::npos);
  CHECK(run_and_emit(cfg, dir, true) == exit_code::ok);
}

TEST_CASE("numerical failure leaves a partial manifest") {
  const fs::path dir = scratch("partial");
  const ExperimentConfig cfg = parse_config_text(R"({"experiment": "profile", "profile": {"t_max": 5}})");
  std::string msg;
  CHECK(run_and_emit(cfg, dir, false, &msg) == exit_code::numerical);
  CHECK(msg.find("t_max") != std::string::npos);
  const Json m = Json::parse(slurp(dir / "manifest.json"));
  CHECK(m["status"] == "failed");
  REQUIRE(m["artifacts"].size() == 1u);
  CHECK(m["artifacts"][0]["path"] == "profile.csv");
}

TEST_CASE("field dumps round-trip") {
  const Grid3 g = make_grid(5, 4, 3, Box::cube(-1.0, 2.0));
  const ScalarField u = sample_field(g, [](double x, double y, double z) { return x - 2 * y + z * z; });
  const fs::path dir = scratch("dump");
  ArtifactSink sink;
  sink.add_field("u", u);
  emit_outputs(sink.artifacts, dir, false);
  const ScalarField back = read_field_dump(dir / "u.json");
  CHECK(back.grid == g);
  CHECK((back.values == u.values).all());
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const fs::path good = dir / "good.json", bad = dir / "bad.json";
  write_text(good, R"({"experiment": "entropy-check", "samples": 100, "grid_sizes": [9]})");
  write_text(bad, R"({"experiment": "entropy-check", "samples": -3})");
  const std::string cli = SMECTIC_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(run("entropy-check --config " + good.string() + " --out " + (dir / "o1").string()) == 0);
  CHECK(fs::exists(dir / "o1" / "entropy.json"));
  CHECK(run("entropy-check --config " + good.string() + " --out " + (dir / "o1").string()) == 4);
  CHECK(run("entropy-check --config " + good.string() + " --out " + (dir / "o1").string() + " --force --seed 3") == 0);
  CHECK(Json::parse(slurp(dir / "o1" / "manifest.json"))["seed"] == 3);
  CHECK(run("entropy-check --config " + bad.string() + " --out " + (dir / "o2").string()) == 2);
  CHECK(run("nonsense --config " + good.string()) == 2);
  CHECK(run("entropy-check") == 2);
  CHECK(run("--help") == 0);
}
