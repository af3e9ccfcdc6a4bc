#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "nested/engine.hpp"
#include "nested/estimators.hpp"
#include "nested/io.hpp"
#include "nested/problem.hpp"
#include "nested/rng.hpp"

using namespace nested;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("nested_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

RunTrace small_run(std::uint64_t seed = 61) {
  const Problem problem = truncated_gaussian(5.0, 2);
  RunConfig config;
  config.nlive = 60;
  config.sampler.kind = SamplerKind::rejection;
  config.seed = seed;
  return run(problem, config);
}

}  // namespace

TEST_CASE("format_double round-trips doubles exactly") {
  RngStream rng(1, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-300.0, 300.0));
    CHECK(parse_double(format_double(x)) == x);
  }
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(parse_double(format_double(-inf)) == -inf);
  CHECK(parse_double(format_double(inf)) == inf);
  CHECK_THROWS(parse_double("not-a-number"));
  CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("dead-points file round-trips the trace and the estimators") {
  const TempDir dir;
  const RunTrace trace = small_run();
  const std::string path = dir.file("dead_points.csv");
  write_dead_points(path, trace);
  const RunTrace parsed = read_dead_points(path);

  REQUIRE(parsed.dead.size() == trace.dead.size());
  REQUIRE(parsed.final_live.size() == trace.final_live.size());
  for (std::size_t i = 0; i < trace.dead.size(); ++i) {
    CHECK(parsed.dead[i].order == trace.dead[i].order);
    CHECK(parsed.dead[i].n_active == trace.dead[i].n_active);
    CHECK(parsed.dead[i].insertion_index == trace.dead[i].insertion_index);
    CHECK(parsed.dead[i].particle.log_like == trace.dead[i].particle.log_like);
    CHECK(parsed.dead[i].particle.birth_log_like ==
          trace.dead[i].particle.birth_log_like);
    CHECK(parsed.dead[i].particle.theta == trace.dead[i].particle.theta);
  }

  // Estimator outputs recompute bit-identically from the parsed file.
  const auto volumes = assign_volumes(trace, VolumeMethod::mean_log);
  const auto parsed_volumes = assign_volumes(parsed, VolumeMethod::mean_log);
  CHECK(log_evidence(parsed, parsed_volumes).log() ==
        log_evidence(trace, volumes).log());
  CHECK(kl_divergence(parsed, parsed_volumes) == kl_divergence(trace, volumes));
  CHECK(posterior_weights(parsed, parsed_volumes) == posterior_weights(trace, volumes));
  CHECK(simulate_evidence(parsed, 20, 9) == simulate_evidence(trace, 20, 9));
}

TEST_CASE("dead-points parser reports the offending line") {
  const TempDir dir;
  const std::string path = dir.file("broken.csv");
  {
    std::ofstream out(path);
    out << "order,log_like,birth_log_like,n_active,insertion_index,theta_0\n";
    out << "0,-1.5,-inf,3,-1,0.25\n";
    out << "1,oops,-1.5,3,0,0.5\n";
  }
  try {
    read_dead_points(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("dead-points parser rejects bad headers and empty files") {
  const TempDir dir;
  const std::string path = dir.file("empty.csv");
  {
    std::ofstream out(path);
    out << "order,log_like,birth_log_like,n_active,insertion_index\n";
  }
  CHECK_THROWS(read_dead_points(path));
  {
    std::ofstream out(path);
    out << "oops,log_like\n0,1\n";
  }
  CHECK_THROWS(read_dead_points(path));
  CHECK_THROWS(read_dead_points(dir.file("missing.csv")));
}

TEST_CASE("config parser applies the documented schema") {
  const TempDir dir;
  const std::string path = dir.file("run.cfg");
  {
    std::ofstream out(path);
    out << "# a comment\n"
        << "problem = gaussian\n"
        << "a = 5\n"
        << "d = 2\n"
        << "sampler = slice\n"
        << "steps = 5\n"
        << "nlive = 1000\n"
        << "tol = 1e-3\n"
        << "seed = 67\n"
        << "workers = 2\n"
        << "finalize = kill\n"
        << "plateau = top_up\n"
        << "output_dir = " << dir.file("out") << "\n";
  }
  const RunSetup setup = parse_config_file(path);
  CHECK(setup.problem_name == "gaussian");
  CHECK(setup.problem_a == 5.0);
  CHECK(setup.problem_d == 2);
  CHECK(setup.config.sampler.kind == SamplerKind::slice);
  CHECK(setup.config.sampler.steps == 5);
  CHECK(setup.config.nlive == 1000);
  CHECK(setup.config.stop_tol == 1e-3);
  CHECK(setup.config.seed == 67);
  CHECK(setup.config.workers == 2);
  CHECK(setup.config.finalize == FinalizeMode::kill_one_by_one);
  CHECK(setup.config.plateau == PlateauMode::top_up);

  const Problem problem = make_problem(setup);
  CHECK(problem.dimension() == 2);
}

TEST_CASE("unknown config keys are an error that names them") {
  const TempDir dir;
  const std::string path = dir.file("typo.cfg");
  {
    std::ofstream out(path);
    out << "problem = gaussian\nnlives = 100\ntoll = 0.1\n";
  }
  try {
    parse_config_file(path);
    FAIL("expected unknown-key error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("nlives") != std::string::npos);
    CHECK(what.find("toll") != std::string::npos);
  }
}

TEST_CASE("config validation rejects nlive below 2") {
  const TempDir dir;
  const std::string path = dir.file("bad.cfg");
  {
    std::ofstream out(path);
    out << "problem = gaussian\nnlive = 1\n";
  }
  CHECK_THROWS(parse_config_file(path));
}

TEST_CASE("plateau levels parse from the levels key") {
  const TempDir dir;
  const std::string path = dir.file("plateau.cfg");
  {
    std::ofstream out(path);
    out << "problem = plateau\n"
        << "levels = 0:0.9,0.6931471805599453:0.09,1.0986122886681098:0.01\n"
        << "nlive = 100\n";
  }
  const RunSetup setup = parse_config_file(path);
  REQUIRE(setup.plateau_levels.size() == 3);
  const Problem problem = make_problem(setup);
  CHECK(*problem.oracle().log_z == doctest::Approx(std::log(1.11)).epsilon(1e-12));
}

TEST_CASE("manifest round-trips every field needed to reproduce a run") {
  const TempDir dir;
  RunManifest manifest;
  manifest.setup.problem_name = "harmonic";
  manifest.setup.problem_a = 5.0;
  manifest.setup.problem_d = 3;
  manifest.setup.config.nlive = 123;
  manifest.setup.config.sampler.kind = SamplerKind::random_walk;
  manifest.setup.config.sampler.steps = 11;
  manifest.setup.config.sampler.step_scale = 0.07;
  manifest.setup.config.stop_tol = 2.5e-4;
  manifest.setup.config.seed = 99;
  manifest.setup.config.workers = 3;
  manifest.setup.config.finalize = FinalizeMode::kill_one_by_one;
  manifest.setup.config.plateau = PlateauMode::naive_single;
  manifest.setup.config.dynamic = DynamicGoal{0.25, 5000, 4};
  manifest.version = "0.1.0";
  manifest.fingerprint = "harmonic(a=5,d=3) | nlive=123";
  manifest.n_like_calls = 4567;
  manifest.truncated = true;
  manifest.started_at = "2026-01-01T00:00:00Z";
  manifest.finished_at = "2026-01-01T00:00:01Z";

  const std::string path = dir.file("manifest.txt");
  write_manifest(path, manifest);
  const RunManifest parsed = read_manifest(path);
  CHECK(parsed.setup.problem_name == "harmonic");
  CHECK(parsed.setup.problem_d == 3);
  CHECK(parsed.setup.config.nlive == 123);
  CHECK(parsed.setup.config.sampler.kind == SamplerKind::random_walk);
  CHECK(parsed.setup.config.sampler.steps == 11);
  CHECK(parsed.setup.config.sampler.step_scale == 0.07);
  CHECK(parsed.setup.config.stop_tol == 2.5e-4);
  CHECK(parsed.setup.config.seed == 99);
  CHECK(parsed.setup.config.workers == 3);
  CHECK(parsed.setup.config.finalize == FinalizeMode::kill_one_by_one);
  CHECK(parsed.setup.config.plateau == PlateauMode::naive_single);
  REQUIRE(parsed.setup.config.dynamic.has_value());
  CHECK(parsed.setup.config.dynamic->budget == 5000);
  CHECK(parsed.n_like_calls == 4567);
  CHECK(parsed.truncated);
}

TEST_CASE("the manifest alone reproduces the dead-points file byte for byte") {
  const TempDir dir;
  const Problem problem = truncated_gaussian(5.0, 2);
  RunSetup setup;
  setup.problem_name = "gaussian";
  setup.problem_a = 5.0;
  setup.problem_d = 2;
  setup.config.nlive = 50;
  setup.config.sampler.kind = SamplerKind::rejection;
  setup.config.seed = 77;

  const RunTrace trace = run(problem, setup.config);
  const std::string first = dir.file("first.csv");
  write_dead_points(first, trace);

  RunManifest manifest;
  manifest.setup = setup;
  const std::string mpath = dir.file("manifest.txt");
  write_manifest(mpath, manifest);

  // A fresh process would do exactly this: parse, rebuild, rerun.
  const RunManifest parsed = read_manifest(mpath);
  const Problem rebuilt = make_problem(parsed.setup);
  const RunTrace again = run(rebuilt, parsed.setup.config);
  const std::string second = dir.file("second.csv");
  write_dead_points(second, again);

  std::ifstream a(first, std::ios::binary);
  std::ifstream b(second, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                            std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
  CHECK(!bytes_a.empty());
}

TEST_CASE("summary file carries the fixed key set") {
  const TempDir dir;
  EvidenceReport report;
  report.log_z = -3.51;
  report.sigma_log_z = 0.05;
  report.h_nats = 2.49;
  report.ess = 812.5;
  report.n_like_calls = 31415;
  const std::string path = dir.file("summary.txt");
  write_summary(path, report, 0.497, 67);
  const auto kv = read_key_value_file(path);
  CHECK(kv.size() == 8);
  CHECK(parse_double(kv.at("log_z")) == -3.51);
  CHECK(parse_double(kv.at("sigma_log_z")) == 0.05);
  CHECK(parse_double(kv.at("h_nats")) == 2.49);
  CHECK(parse_double(kv.at("ess")) == 812.5);
  CHECK(kv.at("n_like_calls") == "31415");
  CHECK(parse_double(kv.at("insertion_p")) == 0.497);
  CHECK(kv.at("seed") == "67");
  CHECK(kv.at("version") == "0.1.0");
}
