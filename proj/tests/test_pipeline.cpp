#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rsacdda/errors.hpp"
#include "rsacdda/pipeline.hpp"

using namespace rsacdda;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rsacdda_pipe_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Summary CSV with the wall_ms column blanked, for determinism comparisons.
std::string strip_timing(const std::string& csv) {
  std::stringstream out;
  std::stringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << line.substr(0, pos) << ",\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("config: defaults and serialization fixed point") {
  const AdaptationConfig def;
  CHECK(def.k_init == 100);
  CHECK(def.lambda == 0.1);
  CHECK(def.iterations_T == 10);
  CHECK(def.alm.mu0 == 0.18);
  CHECK(def.alm.rho == 1.01);
  CHECK(def.alm.mu_max == 1e8);
  CHECK(def.alm.epsilon == 1e-7);
  CHECK(def.alm.k_final == 10);
  CHECK(def.alm.max_iterations == 1000);

  const std::string once = config_to_json(def);
  const AdaptationConfig parsed = config_from_json(once);
  const std::string twice = config_to_json(parsed);
  CHECK(once == twice);

  const AdaptationConfig empty = config_from_json("{}");
  CHECK(config_to_json(empty) == once);
}

TEST_CASE("config: unknown fields and bad values rejected") {
  CHECK_THROWS_WITH_AS(config_from_json(R"({"k_innit": 5})"),
                       doctest::Contains("k_innit"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(R"({"alm": {"muu": 1}})"),
                       doctest::Contains("alm.muu"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"lambda": -1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"alm": {"rho": 0.5}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"alm": {"epsilon": 2}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"normalize_mode": "bogus"})"), ConfigError);
}

TEST_CASE("config: alm.lambda_ridge inherits the top-level lambda") {
  const AdaptationConfig c = config_from_json(R"({"lambda": 0.7})");
  CHECK(c.alm.lambda_ridge == 0.7);
  const AdaptationConfig c2 =
      config_from_json(R"({"lambda": 0.7, "alm": {"lambda_ridge": 0.2}})");
  CHECK(c2.alm.lambda_ridge == 0.2);
}

TEST_CASE("run_rsa_cdda: identical source and target give accuracy exactly 1") {
  const DomainPair base = make_synthetic_pair(31, 12, 2, 20.0, 0.25);
  const DomainPair same = make_domain_pair(base.source, base.source);
  AdaptationConfig cfg;
  cfg.k_init = 3;
  cfg.alm.k_final = 2;
  cfg.alm.max_iterations = 60;
  cfg.normalize_mode = NormalizeMode::none;
  const AdaptationReport report = run_rsa_cdda(same, cfg);
  CHECK(report.accuracy_known);
  CHECK(report.accuracy_value == 1.0);
}

TEST_CASE("run_baseline_nn: identical domains give 1.0; labels gate accuracy") {
  const DomainPair base = make_synthetic_pair(32, 10, 2, 20.0, 0.25);
  const DomainPair same = make_domain_pair(base.source, base.source);
  AdaptationConfig cfg;
  const AdaptationReport r = run_baseline_nn(same, cfg);
  CHECK(r.accuracy_known);
  CHECK(r.accuracy_value == 1.0);

  // Without target labels no accuracy is reported.
  Dataset unlabeled = make_dataset(base.target.features);
  const DomainPair nolabel = make_domain_pair(base.source, unlabeled);
  const AdaptationReport r2 = run_baseline_nn(nolabel, cfg);
  CHECK_FALSE(r2.accuracy_known);
  CHECK(r2.predictions.size() == nolabel.target.sample_count());
}

TEST_CASE("report: every stage appears exactly once; JSON parses with expected fields") {
  const DomainPair pair = make_synthetic_pair(33, 10, 2, 25.0, 0.25);
  AdaptationConfig cfg;
  cfg.k_init = 2;
  cfg.alm.k_final = 2;
  cfg.alm.max_iterations = 40;
  cfg.normalize_mode = NormalizeMode::none;
  const AdaptationReport report = run_rsa_cdda(pair, cfg);

  std::vector<std::string> expect{"normalize", "algorithm_1a", "algorithm_1b",
                                  "classify"};
  REQUIRE(report.timings.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(report.timings[i].stage == expect[i]);

  const nlohmann::json doc = nlohmann::json::parse(report_to_json(report));
  CHECK(doc.contains("config"));
  CHECK(doc.contains("timings"));
  CHECK(doc.contains("algorithm_1a_trace"));
  CHECK(doc.contains("alm_summary"));
  CHECK(doc.contains("subspace"));
  CHECK(doc.contains("predictions"));
  CHECK(doc.contains("accuracy"));
  CHECK(doc.contains("skipped_class_log"));
  CHECK(doc.at("subspace").at("rows").get<std::size_t>() ==
        pair.source.feature_dim());
}

TEST_CASE("run_rsa_cdda: stage failures carry the stage name") {
  // A zero column survives dataset validation but breaks unit_l2 scaling.
  Matrix xs(2, 3);
  xs(0, 0) = 1;
  xs(0, 1) = 2;  // column 2 all zero
  Matrix xt(2, 2);
  xt(0, 0) = 1;
  xt(1, 1) = 1;
  const DomainPair pair =
      make_domain_pair(make_dataset(xs, {1, 2, 1}), make_dataset(xt));
  AdaptationConfig cfg;
  cfg.normalize_mode = NormalizeMode::unit_l2;
  CHECK_THROWS_WITH_AS(run_rsa_cdda(pair, cfg), doctest::Contains("normalize:"),
                       DataError);
}

TEST_CASE("bench: empty manifest produces a header-only summary") {
  TempDir dir;
  std::ofstream(dir.file("manifest.json")) << R"({"tasks": []})";
  const BenchResult result =
      run_benchmark_suite(dir.file("manifest.json"), dir.file("out"));
  CHECK(result.rows.empty());
  CHECK(read_file(result.summary_csv_path) ==
        "task,method,accuracy,alm_iterations,final_residual,wall_ms\n");
}

TEST_CASE("bench: synthetic tasks, reports, averages, failure rows, determinism") {
  TempDir dir;
  const DomainPair p1 = make_synthetic_pair(41, 10, 2, 25.0, 0.25);
  const DomainPair p2 = make_synthetic_pair(42, 10, 2, 15.0, 0.25);
  write_dataset(dir.file("s1.sdam"), p1.source, FileFormat::binary_matrix);
  write_dataset(dir.file("t1.sdam"), p1.target, FileFormat::binary_matrix);
  write_dataset(dir.file("s2.sdam"), p2.source, FileFormat::binary_matrix);
  write_dataset(dir.file("t2.sdam"), p2.target, FileFormat::binary_matrix);

  nlohmann::json manifest;
  manifest["config"] = {{"k_init", 2},
                        {"normalize_mode", "none"},
                        {"alm", {{"k_final", 2}, {"max_iterations", 40}}}};
  manifest["tasks"] = nlohmann::json::array();
  manifest["tasks"].push_back({{"name", "t1"},
                               {"source", dir.file("s1.sdam")},
                               {"target", dir.file("t1.sdam")},
                               {"group", "synth"},
                               {"methods", {"rsa_cdda", "nn"}}});
  manifest["tasks"].push_back({{"name", "t2"},
                               {"source", dir.file("s2.sdam")},
                               {"target", dir.file("t2.sdam")},
                               {"group", "synth"},
                               {"methods", {"rsa_cdda", "nn"}}});
  manifest["tasks"].push_back({{"name", "broken"},
                               {"source", dir.file("missing.sdam")},
                               {"target", dir.file("t2.sdam")}});
  std::ofstream(dir.file("manifest.json")) << manifest.dump(2);

  const BenchResult run1 =
      run_benchmark_suite(dir.file("manifest.json"), dir.file("out1"));
  REQUIRE(run1.rows.size() == 5);
  CHECK(run1.rows[0].ok);
  CHECK(run1.rows[4].ok == false);
  CHECK(fs::exists(dir.file("out1") + "/t1__rsa_cdda.json"));
  CHECK(fs::exists(dir.file("out1") + "/t1__nn.json"));
  CHECK(fs::exists(dir.file("out1") + "/t2__rsa_cdda.json"));

  const std::string csv = read_file(run1.summary_csv_path);
  CHECK(csv.find("average(synth),rsa_cdda,") != std::string::npos);
  CHECK(csv.find("overall_average,rsa_cdda,") != std::string::npos);
  CHECK(csv.find("overall_average,nn,") != std::string::npos);
  CHECK(csv.find("broken,rsa_cdda,failed") != std::string::npos);

  const BenchResult run2 =
      run_benchmark_suite(dir.file("manifest.json"), dir.file("out2"));
  CHECK(strip_timing(read_file(run1.summary_csv_path)) ==
        strip_timing(read_file(run2.summary_csv_path)));
}

TEST_CASE("bench: manifest validation errors") {
  TempDir dir;
  std::ofstream(dir.file("bad.json")) << "still not json";
  CHECK_THROWS_AS(run_benchmark_suite(dir.file("bad.json"), dir.file("o")), ConfigError);
  std::ofstream(dir.file("no_tasks.json")) << R"({"jobs": []})";
  CHECK_THROWS_AS(run_benchmark_suite(dir.file("no_tasks.json"), dir.file("o")),
                  ConfigError);
  CHECK_THROWS_AS(run_benchmark_suite(dir.file("nope.json"), dir.file("o")),
                  ConfigError);
}

TEST_CASE("alm trace CSV has the documented columns") {
  const DomainPair pair = make_synthetic_pair(34, 8, 2, 20.0, 0.25);
  AdaptationConfig cfg;
  cfg.k_init = 2;
  cfg.alm.k_final = 2;
  cfg.alm.max_iterations = 20;
  cfg.normalize_mode = NormalizeMode::none;
  const AdaptationReport report = run_rsa_cdda(pair, cfg);
  TempDir dir;
  write_alm_trace_csv(dir.file("trace.csv"), report.alm_trace);
  std::ifstream in(dir.file("trace.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,r1,r2,r3,energy,mu");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == report.alm_trace.rows.size());
}
