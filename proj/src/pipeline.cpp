#include "rsacdda/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsacdda/classify.hpp"
#include "rsacdda/errors.hpp"
#include "rsacdda/mmd.hpp"

namespace rsacdda {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    const auto t0 = Clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, t0);
      } else {
        auto result = fn();
        record(stage, t0);
        return result;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(stage + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(stage + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError(stage + ": " + e.what());
    }
  }

 private:
  void record(const std::string& stage, Clock::time_point t0) {
    const double ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    sink_.push_back({stage, ms});
  }

  std::vector<StageTiming>& sink_;
};

// Source and target are normalized jointly: shared z-score statistics, then
// per-column unit length, matching how the joint matrix X enters every formula.
DomainPair normalize_pair(const DomainPair& pair, NormalizeMode mode) {
  if (mode == NormalizeMode::none) return pair;
  const std::size_t m = pair.source.feature_dim();
  const std::size_t ns = pair.source.sample_count();
  const std::size_t nt = pair.target.sample_count();
  Matrix joint(m, ns + nt);
  for (std::size_t j = 0; j < ns; ++j)
    for (std::size_t i = 0; i < m; ++i) joint(i, j) = pair.source.features(i, j);
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t i = 0; i < m; ++i) joint(i, ns + j) = pair.target.features(i, j);
  const Dataset normalized = normalize(make_dataset(std::move(joint)), mode);
  Matrix src(m, ns), tgt(m, nt);
  for (std::size_t j = 0; j < ns; ++j)
    for (std::size_t i = 0; i < m; ++i) src(i, j) = normalized.features(i, j);
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t i = 0; i < m; ++i) tgt(i, j) = normalized.features(i, ns + j);
  return make_domain_pair(make_dataset(std::move(src), pair.source.labels),
                          make_dataset(std::move(tgt), pair.target.labels));
}

std::vector<std::string> skip_log_for(const DomainPair& pair,
                                      const std::vector<int>& pseudo,
                                      const std::string& stage) {
  std::vector<std::string> out;
  const MmdFactor f = build_mmd_factor(index_subdomains(pair, pseudo));
  for (const auto& s : f.skip_report) out.push_back(stage + ": " + s);
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["data_colmajor"] = std::vector<double>(m.data(), m.data() + m.size());
  return out;
}

std::string sanitize_filename(const std::string& name) {
  std::string out = name;
  for (char& ch : out)
    if (ch == '/' || ch == '\\' || ch == ' ' || ch == ':') ch = '_';
  return out;
}

FileFormat infer_format(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv") return FileFormat::csv;
  return FileFormat::binary_matrix;
}

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

AdaptationReport run_rsa_cdda(const DomainPair& pair, const AdaptationConfig& cfg) {
  cfg.validate();
  AdaptationReport report;
  report.method = "rsa_cdda";
  report.config = cfg;
  StageTimer timer(report.timings);

  const DomainPair normalized = timer.run(
      "normalize", [&] { return normalize_pair(pair, cfg.normalize_mode); });

  // k_init is clipped to the data; run_algorithm_1a additionally clips to the
  // numerical rank of the PCA scatter.
  AdaptationConfig effective = cfg;
  const std::size_t m = normalized.source.feature_dim();
  const std::size_t n =
      normalized.source.sample_count() + normalized.target.sample_count();
  effective.k_init = std::min({cfg.k_init, m, n - 1});

  const InitResult init = timer.run(
      "algorithm_1a", [&] { return run_algorithm_1a(normalized, effective); });
  report.init_trace = init.trace;
  report.k_init_used = init.k_used;
  for (auto& s : skip_log_for(normalized, init.pseudo_labels, "algorithm_1a"))
    report.skipped_class_log.push_back(std::move(s));

  const auto alm_out = timer.run("algorithm_1b", [&] {
    return run_algorithm_1b(normalized, init.m_rsa, init.pseudo_labels, cfg.alm,
                            cfg.normalize_mmd);
  });
  const AlmState& state = alm_out.first;
  const ConvergenceTrace& trace = alm_out.second;
  report.alm_iterations = trace.rows.size();
  report.alm_converged = trace.converged;
  if (!trace.rows.empty()) {
    report.final_r1 = trace.rows.back().r1;
    report.final_r2 = trace.rows.back().r2;
    report.final_r3 = trace.rows.back().r3;
  }
  report.alm_trace = trace;
  report.subspace = state.a;
  for (auto& s : skip_log_for(normalized, state.pseudo_labels, "algorithm_1b"))
    report.skipped_class_log.push_back(std::move(s));

  timer.run("classify", [&] {
    const Matrix ps = matmul_tn(state.a, normalized.source.features);
    const Matrix pt = matmul_tn(state.a, normalized.target.features);
    report.predictions = nn_classify(ps, normalized.source.labels, pt).labels;
    if (normalized.target.has_labels()) {
      report.accuracy_value = accuracy(report.predictions, normalized.target.labels);
      report.accuracy_known = true;
    }
  });
  return report;
}

AdaptationReport run_baseline_nn(const DomainPair& pair, const AdaptationConfig& cfg) {
  cfg.validate();
  AdaptationReport report;
  report.method = "nn";
  report.config = cfg;
  StageTimer timer(report.timings);

  const DomainPair normalized = timer.run(
      "normalize", [&] { return normalize_pair(pair, cfg.normalize_mode); });
  timer.run("classify", [&] {
    report.predictions = nn_classify(normalized.source.features,
                                     normalized.source.labels,
                                     normalized.target.features)
                             .labels;
    if (normalized.target.has_labels()) {
      report.accuracy_value = accuracy(report.predictions, normalized.target.labels);
      report.accuracy_known = true;
    }
  });
  return report;
}

std::string report_to_json(const AdaptationReport& report) {
  json root;
  root["task"] = report.task;
  root["method"] = report.method;
  root["config"] = json::parse(config_to_json(report.config));

  json timings = json::array();
  for (const auto& t : report.timings)
    timings.push_back({{"stage", t.stage}, {"wall_ms", t.wall_ms}});
  root["timings"] = timings;

  json init = json::array();
  for (const auto& r : report.init_trace) {
    json row;
    row["iteration"] = r.iteration;
    if (r.accuracy_known) row["target_accuracy"] = r.target_accuracy;
    row["skipped_classes"] = r.skipped_classes;
    init.push_back(row);
  }
  root["algorithm_1a_trace"] = init;
  root["k_init_used"] = report.k_init_used;

  json alm;
  alm["iterations"] = report.alm_iterations;
  alm["converged"] = report.alm_converged;
  alm["final_r1"] = report.final_r1;
  alm["final_r2"] = report.final_r2;
  alm["final_r3"] = report.final_r3;
  root["alm_summary"] = alm;

  if (!report.subspace.empty()) root["subspace"] = matrix_to_json(report.subspace);
  root["predictions"] = report.predictions;
  if (report.accuracy_known) root["accuracy"] = report.accuracy_value;
  root["skipped_class_log"] = report.skipped_class_log;
  return root.dump(2);
}

void write_report(const std::string& path, const AdaptationReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report '" + path + "'");
  out << report_to_json(report) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

void write_alm_trace_csv(const std::string& path, const ConvergenceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace '" + path + "'");
  out << "iteration,r1,r2,r3,energy,mu\n";
  for (const auto& row : trace.rows)
    out << row.iteration << ',' << format_double(row.r1, "%.12e") << ','
        << format_double(row.r2, "%.12e") << ',' << format_double(row.r3, "%.12e")
        << ',' << format_double(row.energy, "%.12e") << ','
        << format_double(row.mu, "%.12e") << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

BenchResult run_benchmark_suite(const std::string& manifest_path,
                                const std::string& out_dir, bool dump_traces) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest '" + manifest_path + "'");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("tasks") ||
      !manifest.at("tasks").is_array())
    throw ConfigError("manifest must be an object with a 'tasks' array");

  json base_config = json::object();
  if (manifest.contains("config")) base_config = manifest.at("config");

  fs::create_directories(out_dir);
  BenchResult result;

  for (const json& task : manifest.at("tasks")) {
    if (!task.is_object() || !task.contains("name") || !task.contains("source") ||
        !task.contains("target"))
      throw ConfigError("every manifest task needs name, source and target fields");
    const std::string name = task.at("name").get<std::string>();
    const std::string group = task.contains("group")
                                  ? task.at("group").get<std::string>()
                                  : std::string();

    std::vector<std::string> methods{"rsa_cdda"};
    if (task.contains("methods"))
      methods = task.at("methods").get<std::vector<std::string>>();

    json merged = base_config;
    if (task.contains("config")) merged.merge_patch(task.at("config"));

    for (const std::string& method : methods) {
      BenchSummaryRow row;
      row.task = name;
      row.method = method;
      row.group = group;
      const auto t0 = Clock::now();
      try {
        if (method != "rsa_cdda" && method != "nn")
          throw ConfigError("unknown method '" + method + "' (expected rsa_cdda|nn)");
        const AdaptationConfig cfg = config_from_json(merged.dump());

        const std::string src_path = task.at("source").get<std::string>();
        const std::string tgt_path = task.at("target").get<std::string>();
        Dataset source = load_dataset(src_path, infer_format(src_path));
        Dataset target = load_dataset(tgt_path, infer_format(tgt_path));
        if (task.contains("target_labels")) {
          std::vector<int> labels =
              load_labels(task.at("target_labels").get<std::string>());
          target = make_dataset(std::move(target.features), std::move(labels));
        }
        const DomainPair pair = make_domain_pair(std::move(source), std::move(target));

        AdaptationReport report =
            method == "nn" ? run_baseline_nn(pair, cfg) : run_rsa_cdda(pair, cfg);
        report.task = name;

        const std::string stem =
            sanitize_filename(name) + "__" + sanitize_filename(method);
        write_report((fs::path(out_dir) / (stem + ".json")).string(), report);
        if (dump_traces && method == "rsa_cdda")
          write_alm_trace_csv((fs::path(out_dir) / (stem + "_trace.csv")).string(),
                              report.alm_trace);

        row.ok = true;
        row.accuracy = report.accuracy_value;
        row.accuracy_known = report.accuracy_known;
        row.alm_iterations = report.alm_iterations;
        if (method == "rsa_cdda") {
          row.final_residual =
              std::max({report.final_r1, report.final_r2, report.final_r3});
          row.has_residual = true;
        }
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      row.wall_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      result.rows.push_back(std::move(row));
    }
  }

  // Summary CSV with per-group averages (when groups are present) and an
  // overall average per method.
  const fs::path csv_path = fs::path(out_dir) / "summary.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw DataError("cannot write '" + csv_path.string() + "'");
  csv << "task,method,accuracy,alm_iterations,final_residual,wall_ms\n";
  for (const auto& row : result.rows) {
    csv << row.task << ',' << row.method << ',';
    if (!row.ok)
      csv << "failed";
    else if (row.accuracy_known)
      csv << format_double(row.accuracy, "%.6f");
    csv << ',' << row.alm_iterations << ',';
    if (row.has_residual) csv << format_double(row.final_residual, "%.6e");
    csv << ',' << format_double(row.wall_ms, "%.3f") << '\n';
  }

  std::vector<std::string> method_order;
  for (const auto& row : result.rows)
    if (std::find(method_order.begin(), method_order.end(), row.method) ==
        method_order.end())
      method_order.push_back(row.method);
  std::vector<std::string> group_order;
  for (const auto& row : result.rows)
    if (!row.group.empty() &&
        std::find(group_order.begin(), group_order.end(), row.group) ==
            group_order.end())
      group_order.push_back(row.group);

  auto emit_average = [&](const std::string& label, const std::string& method,
                          const std::string& group) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& row : result.rows)
      if (row.ok && row.accuracy_known && row.method == method &&
          (group.empty() || row.group == group)) {
        sum += row.accuracy;
        ++count;
      }
    csv << label << ',' << method << ',';
    if (count > 0) csv << format_double(sum / static_cast<double>(count), "%.6f");
    csv << ",,,\n";
  };
  for (const auto& group : group_order)
    for (const auto& method : method_order)
      emit_average("average(" + group + ")", method, group);
  for (const auto& method : method_order) emit_average("overall_average", method, "");

  if (!csv) throw DataError("write failed for '" + csv_path.string() + "'");
  result.summary_csv_path = csv_path.string();
  return result;
}

}  // namespace rsacdda
