#include "rsacdda/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "rsacdda/errors.hpp"
#include "rsacdda/kernels.hpp"

namespace rsacdda {
namespace {

constexpr char kMagic[4] = {'S', 'D', 'A', 'M'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kSyntheticAmbientDim = 20;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double_cell(const std::string& cell, std::size_t line_no,
                         const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw DataError("csv line " + std::to_string(line_no) + ", column " + column +
                    ": invalid number '" + cell + "'");
  if (!std::isfinite(value))
    throw DataError("csv line " + std::to_string(line_no) + ", column " + column +
                    ": non-finite value '" + cell + "'");
  return value;
}

int parse_label_cell(const std::string& cell, std::size_t line_no) {
  int value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw DataError("csv line " + std::to_string(line_no) +
                    ", column label: invalid integer '" + cell + "'");
  if (value < 1)
    throw DataError("csv line " + std::to_string(line_no) + ", column label: value " +
                    std::to_string(value) + " out of range (labels are 1-based)");
  return value;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "': empty file");
  const std::vector<std::string> header = split_csv_line(line);
  bool has_labels = !header.empty() && header.back() == "label";
  const std::size_t m = header.size() - (has_labels ? 1 : 0);
  if (m == 0) throw DataError("'" + path + "': no feature columns in header");
  for (std::size_t i = 0; i < m; ++i) {
    const std::string expect = "f" + std::to_string(i);
    if (header[i] != expect)
      throw DataError("'" + path + "': header column " + std::to_string(i + 1) +
                      " is '" + header[i] + "', expected '" + expect + "'");
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t n = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("csv line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    for (std::size_t i = 0; i < m; ++i)
      values.push_back(parse_double_cell(cells[i], line_no, header[i]));
    if (has_labels) labels.push_back(parse_label_cell(cells.back(), line_no));
    ++n;
  }
  if (n == 0) throw DataError("'" + path + "': no data rows");

  // Rows in the file are samples; transpose into samples-as-columns.
  Matrix features(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) features(i, j) = values[j * m + i];
  return make_dataset(std::move(features), std::move(labels));
}

template <typename T>
void read_raw(std::ifstream& in, T* dst, std::size_t count, const std::string& path) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw DataError("'" + path + "': truncated binary-matrix file");
}

Dataset load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");

  char magic[4];
  read_raw(in, magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("'" + path + "': bad magic, not a binary-matrix file");
  std::uint32_t version = 0;
  read_raw(in, &version, 1, path);
  if (version != kFormatVersion)
    throw DataError("'" + path + "': unsupported version " + std::to_string(version));
  std::uint64_t m = 0, n = 0;
  std::uint8_t has_labels = 0;
  read_raw(in, &m, 1, path);
  read_raw(in, &n, 1, path);
  read_raw(in, &has_labels, 1, path);
  if (m == 0 || n == 0)
    throw DataError("'" + path + "': empty matrix (m=" + std::to_string(m) +
                    ", n=" + std::to_string(n) + ")");

  Matrix features(static_cast<std::size_t>(m), static_cast<std::size_t>(n));
  read_raw(in, features.data(), features.size(), path);
  std::vector<int> labels;
  if (has_labels != 0) {
    std::vector<std::int32_t> raw(n);
    read_raw(in, raw.data(), raw.size(), path);
    labels.assign(raw.begin(), raw.end());
  }
  for (std::size_t j = 0; j < features.cols(); ++j)
    for (std::size_t i = 0; i < features.rows(); ++i)
      if (!std::isfinite(features(i, j)))
        throw DataError("'" + path + "': non-finite value at feature " +
                        std::to_string(i) + ", sample " + std::to_string(j));
  return make_dataset(std::move(features), std::move(labels));
}

void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < d.feature_dim(); ++i) {
    if (i > 0) out << ',';
    out << 'f' << i;
  }
  if (d.has_labels()) out << ",label";
  out << '\n';
  char buf[32];
  for (std::size_t j = 0; j < d.sample_count(); ++j) {
    for (std::size_t i = 0; i < d.feature_dim(); ++i) {
      if (i > 0) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", d.features(i, j));
      out << buf;
    }
    if (d.has_labels()) out << ',' << d.labels[j];
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

void write_binary(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(kMagic, 4);
  const std::uint32_t version = kFormatVersion;
  const std::uint64_t m = d.feature_dim();
  const std::uint64_t n = d.sample_count();
  const std::uint8_t has_labels = d.has_labels() ? 1 : 0;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&m), sizeof(m));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&has_labels), sizeof(has_labels));
  out.write(reinterpret_cast<const char*>(d.features.data()),
            static_cast<std::streamsize>(d.features.size() * sizeof(double)));
  if (d.has_labels()) {
    std::vector<std::int32_t> raw(d.labels.begin(), d.labels.end());
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(std::int32_t)));
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

/// Deterministic standard normal stream: mt19937_64 + Box-Muller. Not
/// std::normal_distribution, whose output is implementation-defined.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_open_unit();
    const double u2 = next_open_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double next_open_unit() {
    // (0,1) strictly, so log() stays finite.
    return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace

int Dataset::class_count() const {
  int c = 0;
  for (int v : labels) c = std::max(c, v);
  return c;
}

Dataset make_dataset(Matrix features, std::vector<int> labels) {
  if (features.rows() == 0 || features.cols() == 0)
    throw DataError("dataset must have at least one feature and one sample");
  if (!features.all_finite()) throw DataError("dataset features contain NaN/Inf");
  if (!labels.empty()) {
    if (labels.size() != features.cols())
      throw DataError("label count " + std::to_string(labels.size()) +
                      " does not match sample count " + std::to_string(features.cols()));
    const int c_max = *std::max_element(labels.begin(), labels.end());
    const int c_min = *std::min_element(labels.begin(), labels.end());
    if (c_min < 1)
      throw DataError("label value " + std::to_string(c_min) +
                      " out of range (labels are 1-based)");
    std::vector<bool> seen(static_cast<std::size_t>(c_max), false);
    for (int v : labels) seen[static_cast<std::size_t>(v - 1)] = true;
    for (int c = 1; c <= c_max; ++c)
      if (!seen[static_cast<std::size_t>(c - 1)])
        throw DataError("class " + std::to_string(c) + " has no samples (labels must cover 1..C)");
  }
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  return d;
}

DomainPair make_domain_pair(Dataset source, Dataset target) {
  if (!source.has_labels()) throw DataError("source dataset must be labeled");
  if (source.feature_dim() != target.feature_dim())
    throw DataError("source and target feature dimensions differ (" +
                    std::to_string(source.feature_dim()) + " vs " +
                    std::to_string(target.feature_dim()) + ")");
  const int c = source.class_count();
  for (int v : target.labels)
    if (v > c)
      throw DataError("target label " + std::to_string(v) +
                      " exceeds source class count " + std::to_string(c));
  DomainPair pair;
  pair.source = std::move(source);
  pair.target = std::move(target);
  pair.class_count = c;
  return pair;
}

SubDomainIndex index_subdomains(const DomainPair& pair,
                                const std::vector<int>& target_pseudo) {
  if (target_pseudo.size() != pair.target.sample_count())
    throw DataError("pseudo-label count does not match target sample count");
  SubDomainIndex idx;
  idx.class_count = pair.class_count;
  idx.ns = pair.source.sample_count();
  idx.nt = pair.target.sample_count();
  idx.source_by_class.resize(static_cast<std::size_t>(pair.class_count));
  idx.target_by_class.resize(static_cast<std::size_t>(pair.class_count));
  for (std::size_t i = 0; i < idx.ns; ++i)
    idx.source_by_class[static_cast<std::size_t>(pair.source.labels[i] - 1)].push_back(i);
  for (std::size_t j = 0; j < idx.nt; ++j) {
    const int v = target_pseudo[j];
    if (v < 1 || v > pair.class_count)
      throw DataError("pseudo label " + std::to_string(v) + " at target sample " +
                      std::to_string(j) + " out of range 1.." +
                      std::to_string(pair.class_count));
    idx.target_by_class[static_cast<std::size_t>(v - 1)].push_back(j);
  }
  return idx;
}

Dataset load_dataset(const std::string& path, FileFormat format) {
  return format == FileFormat::csv ? load_csv(path) : load_binary(path);
}

void write_dataset(const std::string& path, const Dataset& d, FileFormat format) {
  if (format == FileFormat::csv)
    write_csv(path, d);
  else
    write_binary(path, d);
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    int value = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size() || value < 1)
      throw DataError("label file '" + path + "' line " + std::to_string(line_no) +
                      ": invalid label '" + line + "'");
    labels.push_back(value);
  }
  if (labels.empty()) throw DataError("label file '" + path + "' is empty");
  return labels;
}

Dataset normalize(const Dataset& d, NormalizeMode mode) {
  if (mode == NormalizeMode::none) return d;

  Matrix x = d.features;
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();

  if (mode == NormalizeMode::zscore_then_unit_l2) {
    for (std::size_t i = 0; i < m; ++i) {
      double mean = 0.0;
      double peak = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        mean += x(i, j);
        peak = std::max(peak, std::fabs(x(i, j)));
      }
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        x(i, j) -= mean;
        var += x(i, j) * x(i, j);
      }
      var /= static_cast<double>(n);
      const double sd = std::sqrt(var);
      // Constant features stay centered only.
      if (sd > 1e-12 * std::max(1.0, peak)) {
        const double inv = 1.0 / sd;
        for (std::size_t j = 0; j < n; ++j) x(i, j) *= inv;
      }
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    const double norm = std::sqrt(kernels::active().sum_sq(x.col(j), m));
    if (norm == 0.0)
      throw DataError("sample column " + std::to_string(j) +
                      " has zero norm; cannot scale to unit length");
    kernels::active().scale(1.0 / norm, x.col(j), m);
  }
  return make_dataset(std::move(x), d.labels);
}

DomainPair make_synthetic_pair(std::uint64_t seed, int n_per_class, int class_count,
                               double rotation_deg, double noise_sd) {
  if (class_count < 2) throw ConfigError("make_synthetic_pair: class_count must be >= 2");
  if (n_per_class < 2) throw ConfigError("make_synthetic_pair: n_per_class must be >= 2");
  if (noise_sd < 0.0) throw ConfigError("make_synthetic_pair: noise_sd must be >= 0");

  GaussianStream gauss(seed);

  // Seed-fixed orthonormal embedding of the latent plane, via Gram-Schmidt on
  // two Gaussian directions.
  const std::size_t dim = kSyntheticAmbientDim;
  std::vector<double> q0(dim), q1(dim);
  for (std::size_t i = 0; i < dim; ++i) q0[i] = gauss.next();
  for (std::size_t i = 0; i < dim; ++i) q1[i] = gauss.next();
  double norm0 = std::sqrt(kernels::scalar_table().sum_sq(q0.data(), dim));
  for (std::size_t i = 0; i < dim; ++i) q0[i] /= norm0;
  const double proj = kernels::scalar_table().dot(q0.data(), q1.data(), dim);
  for (std::size_t i = 0; i < dim; ++i) q1[i] -= proj * q0[i];
  double norm1 = std::sqrt(kernels::scalar_table().sum_sq(q1.data(), dim));
  for (std::size_t i = 0; i < dim; ++i) q1[i] /= norm1;

  // Class centers are collinear along the latent x-axis; blob noise is
  // anisotropic, elongated along y. Rotating the plane tips the class axis into
  // the noisy y direction, so raw nearest-neighbour distances drown in the
  // displaced nuisance axis, while a projection near the original class axis
  // stays aligned across domains. That is the regime a shared linear subspace
  // can actually repair: the disagreement direction is discardable.
  const double noise_aspect = 5.0;  // σ_y / σ_x within each blob
  const double theta = rotation_deg * M_PI / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  const std::size_t n = static_cast<std::size_t>(class_count) *
                        static_cast<std::size_t>(n_per_class);
  Matrix src(dim, n);
  Matrix tgt(dim, n);
  std::vector<int> src_labels(n);
  std::vector<int> tgt_labels(n);

  // A slice of ambient noise keeps the data full rank, so subspace selection
  // has directions to discard; it scales with noise_sd and vanishes with it.
  const double ambient_sd = 0.25 * noise_sd;
  auto emit = [&](Matrix& out, std::size_t col, double px, double py) {
    for (std::size_t i = 0; i < dim; ++i)
      out(i, col) = q0[i] * px + q1[i] * py + ambient_sd * gauss.next();
  };

  auto center_x = [&](int c) {
    if (class_count == 1) return 0.0;
    return -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(class_count - 1);
  };

  std::size_t col = 0;
  for (int c = 0; c < class_count; ++c) {
    const double cx = center_x(c);
    for (int s = 0; s < n_per_class; ++s, ++col) {
      const double px = cx + noise_sd * gauss.next();
      const double py = noise_aspect * noise_sd * gauss.next();
      emit(src, col, px, py);
      src_labels[col] = c + 1;
    }
  }
  col = 0;
  for (int c = 0; c < class_count; ++c) {
    const double cx = center_x(c);
    for (int s = 0; s < n_per_class; ++s, ++col) {
      const double px = cx + noise_sd * gauss.next();
      const double py = noise_aspect * noise_sd * gauss.next();
      emit(tgt, col, cos_t * px - sin_t * py, sin_t * px + cos_t * py);
      tgt_labels[col] = c + 1;
    }
  }

  return make_domain_pair(make_dataset(std::move(src), std::move(src_labels)),
                          make_dataset(std::move(tgt), std::move(tgt_labels)));
}

}  // namespace rsacdda
