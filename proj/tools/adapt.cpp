// adapt: domain adaptation CLI. Run one task, run a benchmark manifest, or
// emit a synthetic task pair.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "rsacdda/dataset.hpp"
#include "rsacdda/errors.hpp"
#include "rsacdda/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rsacdda;

FileFormat infer_format(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv") return FileFormat::csv;
  return FileFormat::binary_matrix;
}

int run_command(const std::string& source_path, const std::string& target_path,
                const std::string& labels_path, const std::string& config_path,
                const std::string& out_dir, bool trace) {
  const AdaptationConfig cfg = config_from_file(config_path);
  Dataset source = load_dataset(source_path, infer_format(source_path));
  Dataset target = load_dataset(target_path, infer_format(target_path));
  if (!labels_path.empty()) {
    std::vector<int> labels = load_labels(labels_path);
    target = make_dataset(std::move(target.features), std::move(labels));
  }
  const DomainPair pair = make_domain_pair(std::move(source), std::move(target));

  AdaptationReport report = run_rsa_cdda(pair, cfg);
  fs::create_directories(out_dir);
  write_report((fs::path(out_dir) / "report.json").string(), report);
  if (trace)
    write_alm_trace_csv((fs::path(out_dir) / "alm_trace.csv").string(),
                        report.alm_trace);

  if (report.accuracy_known)
    std::printf("accuracy %.4f (%zu ALM iterations, %s)\n", report.accuracy_value,
                report.alm_iterations,
                report.alm_converged ? "converged" : "iteration cap");
  else
    std::printf("done (%zu ALM iterations, %s); no target labels, accuracy not computed\n",
                report.alm_iterations,
                report.alm_converged ? "converged" : "iteration cap");
  return 0;
}

int bench_command(const std::string& manifest, const std::string& out_dir, bool trace) {
  const BenchResult result = run_benchmark_suite(manifest, out_dir, trace);
  std::size_t failed = 0;
  for (const auto& row : result.rows)
    if (!row.ok) {
      ++failed;
      std::fprintf(stderr, "task %s (%s) failed: %s\n", row.task.c_str(),
                   row.method.c_str(), row.error.c_str());
    }
  std::printf("%zu rows written to %s (%zu failed)\n", result.rows.size(),
              result.summary_csv_path.c_str(), failed);
  return 0;
}

int synth_command(std::uint64_t seed, double rotation, int classes, int per_class,
                  double noise, const std::string& out_dir) {
  const DomainPair pair =
      make_synthetic_pair(seed, per_class, classes, rotation, noise);
  fs::create_directories(out_dir);
  const std::string src = (fs::path(out_dir) / "source.sdam").string();
  const std::string tgt = (fs::path(out_dir) / "target.sdam").string();
  write_dataset(src, pair.source, FileFormat::binary_matrix);
  write_dataset(tgt, pair.target, FileFormat::binary_matrix);
  std::printf("wrote %s and %s (%zu features, %zu+%zu samples, %d classes)\n",
              src.c_str(), tgt.c_str(), pair.source.feature_dim(),
              pair.source.sample_count(), pair.target.sample_count(),
              pair.class_count);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSA-CDDA unsupervised domain adaptation"};
  app.require_subcommand(1);

  std::string source_path, target_path, labels_path, config_path, out_dir, manifest;
  bool trace = false;
  std::uint64_t seed = 7;
  double rotation = 30.0;
  int classes = 2;
  int per_class = 100;
  double noise = 0.3;

  CLI::App* run = app.add_subcommand("run", "run one adaptation task");
  run->add_option("--source", source_path, "source dataset (.csv or binary-matrix)")
      ->required();
  run->add_option("--target", target_path, "target dataset")->required();
  run->add_option("--target-labels", labels_path,
                  "evaluation labels for the target, one integer per line");
  run->add_option("--config", config_path, "config JSON file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_flag("--trace", trace, "dump the per-iteration ALM trace CSV");

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark manifest");
  bench->add_option("--manifest", manifest, "manifest JSON file")->required();
  bench->add_option("--out", out_dir, "output directory")->required();
  bench->add_flag("--trace", trace, "dump per-iteration ALM trace CSVs");

  CLI::App* synth = app.add_subcommand("synth", "emit a synthetic task pair");
  synth->add_option("--seed", seed, "random seed");
  synth->add_option("--rotation", rotation, "target rotation in degrees");
  synth->add_option("--classes", classes, "number of classes");
  synth->add_option("--per-class", per_class, "samples per class and domain");
  synth->add_option("--noise", noise, "latent Gaussian noise level");
  synth->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed())
      return run_command(source_path, target_path, labels_path, config_path, out_dir,
                         trace);
    if (bench->parsed()) return bench_command(manifest, out_dir, trace);
    if (synth->parsed())
      return synth_command(seed, rotation, classes, per_class, noise, out_dir);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "argument error: %s\n", e.what());
    return 2;
  } catch (const rsacdda::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rsacdda::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const rsacdda::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
