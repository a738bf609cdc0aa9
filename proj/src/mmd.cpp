#include "rsacdda/mmd.hpp"

#include <cmath>

#include "rsacdda/errors.hpp"
#include "rsacdda/kernels.hpp"

namespace rsacdda {
namespace {

// Accumulate w·wᵀ (scaled by sign) into m, where w is given by its support:
// value `a` on indices `ia`, value `b` on indices `ib` (ib offset by `shift_b`).
void accumulate_outer(Matrix& m, double sign, const std::vector<std::size_t>& ia,
                      double a, std::size_t shift_a, const std::vector<std::size_t>& ib,
                      double b, std::size_t shift_b) {
  const double aa = sign * a * a;
  const double bb = sign * b * b;
  const double ab = sign * a * b;
  for (std::size_t i : ia)
    for (std::size_t j : ia) m(i + shift_a, j + shift_a) += aa;
  for (std::size_t i : ib)
    for (std::size_t j : ib) m(i + shift_b, j + shift_b) += bb;
  for (std::size_t i : ia)
    for (std::size_t j : ib) {
      m(i + shift_a, j + shift_b) += ab;
      m(j + shift_b, i + shift_a) += ab;
    }
}

// One factor column: value `a` on source-relative indices ia (offset shift_a),
// value `b` on indices ib (offset shift_b).
void push_factor_column(Matrix& u, std::size_t col, const std::vector<std::size_t>& ia,
                        double a, std::size_t shift_a, const std::vector<std::size_t>& ib,
                        double b, std::size_t shift_b) {
  for (std::size_t i : ia) u(i + shift_a, col) = a;
  for (std::size_t i : ib) u(i + shift_b, col) = b;
}

// The complement of class c pooled across all other classes, as index list +
// cardinality. Lists are per-domain (source or target side).
std::vector<std::size_t> pooled_complement(
    const std::vector<std::vector<std::size_t>>& by_class, int c) {
  std::vector<std::size_t> out;
  for (int r = 1; r <= static_cast<int>(by_class.size()); ++r) {
    if (r == c) continue;
    const auto& lst = by_class[static_cast<std::size_t>(r - 1)];
    out.insert(out.end(), lst.begin(), lst.end());
  }
  return out;
}

struct RepulsiveTerm {
  // side_a: class-c list; side_b: pooled complement. Offsets select the
  // source (0) or target (ns) half of the joint order.
  const std::vector<std::size_t>* list_a;
  std::size_t shift_a;
  const std::vector<std::size_t>* list_b;
  std::size_t shift_b;
  double coef_a;
  double coef_b;
};

// Enumerates the per-class S→T, T→S and S→S terms, skipping degenerate ones.
template <typename Fn>
void for_each_repulsive_term(const SubDomainIndex& idx, std::vector<std::string>* skips,
                             Fn&& fn) {
  std::vector<std::vector<std::size_t>> complements_s(idx.source_by_class.size());
  std::vector<std::vector<std::size_t>> complements_t(idx.target_by_class.size());
  for (int c = 1; c <= idx.class_count; ++c) {
    complements_s[static_cast<std::size_t>(c - 1)] =
        pooled_complement(idx.source_by_class, c);
    complements_t[static_cast<std::size_t>(c - 1)] =
        pooled_complement(idx.target_by_class, c);
  }
  auto emit = [&](const char* tag, int c, const std::vector<std::size_t>& la,
                  std::size_t sa, const std::vector<std::size_t>& lb, std::size_t sb) {
    if (la.empty() || lb.empty()) {
      if (skips != nullptr)
        skips->push_back(std::string(tag) + " skipped for class " + std::to_string(c) +
                         (la.empty() ? " (class empty)" : " (complement empty)"));
      return;
    }
    RepulsiveTerm term;
    term.list_a = &la;
    term.shift_a = sa;
    term.list_b = &lb;
    term.shift_b = sb;
    term.coef_a = 1.0 / static_cast<double>(la.size());
    term.coef_b = -1.0 / static_cast<double>(lb.size());
    fn(term);
  };
  for (int c = 1; c <= idx.class_count; ++c) {
    const auto& sc = idx.source_by_class[static_cast<std::size_t>(c - 1)];
    const auto& tc = idx.target_by_class[static_cast<std::size_t>(c - 1)];
    const auto& comp_s = complements_s[static_cast<std::size_t>(c - 1)];
    const auto& comp_t = complements_t[static_cast<std::size_t>(c - 1)];
    emit("S->T", c, sc, 0, comp_t, idx.ns);
    emit("T->S", c, tc, idx.ns, comp_s, 0);
    emit("S->S", c, sc, 0, comp_s, 0);
  }
}

}  // namespace

Matrix build_m0(std::size_t ns, std::size_t nt) {
  if (ns < 1 || nt < 1) throw DataError("build_m0: need at least one sample per domain");
  const std::size_t n = ns + nt;
  const double ss = 1.0 / (static_cast<double>(ns) * static_cast<double>(ns));
  const double tt = 1.0 / (static_cast<double>(nt) * static_cast<double>(nt));
  const double st = -1.0 / (static_cast<double>(ns) * static_cast<double>(nt));
  Matrix m(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      m(i, j) = (i < ns) ? (j < ns ? ss : st) : (j < ns ? st : tt);
  return m;
}

std::optional<Matrix> build_mc(const SubDomainIndex& idx, int c) {
  if (c < 1 || c > idx.class_count) throw DataError("build_mc: class out of range");
  const auto& sc = idx.source_by_class[static_cast<std::size_t>(c - 1)];
  const auto& tc = idx.target_by_class[static_cast<std::size_t>(c - 1)];
  if (sc.empty() || tc.empty()) return std::nullopt;
  const std::size_t n = idx.ns + idx.nt;
  Matrix m(n, n);
  accumulate_outer(m, 1.0, sc, 1.0 / static_cast<double>(sc.size()), 0, tc,
                   -1.0 / static_cast<double>(tc.size()), idx.ns);
  return m;
}

RepulsiveResult build_repulsive(const SubDomainIndex& idx) {
  const std::size_t n = idx.ns + idx.nt;
  RepulsiveResult out;
  out.matrix = Matrix(n, n);
  for_each_repulsive_term(idx, &out.skips, [&](const RepulsiveTerm& t) {
    accumulate_outer(out.matrix, 1.0, *t.list_a, t.coef_a, t.shift_a, *t.list_b,
                     t.coef_b, t.shift_b);
  });
  return out;
}

MmdSet assemble_mmd(const SubDomainIndex& idx) {
  const std::size_t n = idx.ns + idx.nt;
  MmdSet set;
  set.m0 = build_m0(idx.ns, idx.nt);
  set.m_c_total = set.m0;
  set.mc.reserve(static_cast<std::size_t>(idx.class_count));
  for (int c = 1; c <= idx.class_count; ++c) {
    std::optional<Matrix> mc = build_mc(idx, c);
    if (mc.has_value()) {
      set.m_c_total += *mc;
      set.mc.push_back(std::move(*mc));
    } else {
      set.mc.emplace_back(n, n);
      set.skipped_classes.push_back(c);
      set.skip_report.push_back("Mc skipped for class " + std::to_string(c) +
                                " (empty on source or target)");
    }
  }
  RepulsiveResult rep = build_repulsive(idx);
  set.m_rep = std::move(rep.matrix);
  for (auto& s : rep.skips) set.skip_report.push_back(std::move(s));
  set.m_rsa = set.m_c_total - set.m_rep;
  return set;
}

MmdFactor build_mmd_factor(const SubDomainIndex& idx) {
  const std::size_t n = idx.ns + idx.nt;

  // Count columns: marginal + populated classes + surviving repulsive terms.
  std::size_t cols = 1;
  for (int c = 1; c <= idx.class_count; ++c)
    if (idx.source_count(c) > 0 && idx.target_count(c) > 0) ++cols;
  for_each_repulsive_term(idx, nullptr, [&](const RepulsiveTerm&) { ++cols; });

  MmdFactor f;
  f.u = Matrix(n, cols);
  f.signs.reserve(cols);

  std::size_t col = 0;
  // Marginal: +‖mean_s − mean_t‖² shape.
  for (std::size_t i = 0; i < idx.ns; ++i) f.u(i, col) = 1.0 / static_cast<double>(idx.ns);
  for (std::size_t i = idx.ns; i < n; ++i) f.u(i, col) = -1.0 / static_cast<double>(idx.nt);
  f.signs.push_back(1.0);
  ++col;

  for (int c = 1; c <= idx.class_count; ++c) {
    const auto& sc = idx.source_by_class[static_cast<std::size_t>(c - 1)];
    const auto& tc = idx.target_by_class[static_cast<std::size_t>(c - 1)];
    if (sc.empty() || tc.empty()) {
      f.skipped_classes.push_back(c);
      f.skip_report.push_back("Mc skipped for class " + std::to_string(c) +
                              " (empty on source or target)");
      continue;
    }
    push_factor_column(f.u, col, sc, 1.0 / static_cast<double>(sc.size()), 0, tc,
                       -1.0 / static_cast<double>(tc.size()), idx.ns);
    f.signs.push_back(1.0);
    ++col;
  }

  for_each_repulsive_term(idx, &f.skip_report, [&](const RepulsiveTerm& t) {
    push_factor_column(f.u, col, *t.list_a, t.coef_a, t.shift_a, *t.list_b, t.coef_b,
                       t.shift_b);
    f.signs.push_back(-1.0);
    ++col;
  });
  return f;
}

Matrix mmd_factor_to_matrix(const MmdFactor& f) {
  Matrix us = f.u;
  for (std::size_t j = 0; j < us.cols(); ++j)
    kernels::active().scale(f.signs[j], us.col(j), us.rows());
  return matmul_nt(us, f.u);
}

double mmd_factor_frobenius(const MmdFactor& f) {
  // ‖Σ s_j u_j u_jᵀ‖_F² = Σ_jk s_j s_k (u_jᵀ u_k)²
  const Matrix gram = matmul_tn(f.u, f.u);
  double acc = 0.0;
  for (std::size_t j = 0; j < gram.cols(); ++j)
    for (std::size_t i = 0; i < gram.rows(); ++i) {
      const double g = gram(i, j);
      acc += f.signs[i] * f.signs[j] * g * g;
    }
  return std::sqrt(std::max(acc, 0.0));
}

MmdDistances mmd_distance_oracle(const DomainPair& pair, const std::vector<int>& pseudo,
                                 const Matrix& a_matrix) {
  if (a_matrix.rows() != pair.source.feature_dim())
    throw DataError("mmd_distance_oracle: projection row count must equal feature dim");
  const SubDomainIndex idx = index_subdomains(pair, pseudo);
  const std::size_t k = a_matrix.cols();

  const Matrix es = matmul_tn(a_matrix, pair.source.features);  // k×ns
  const Matrix et = matmul_tn(a_matrix, pair.target.features);  // k×nt

  auto mean_of = [&](const Matrix& e, const std::vector<std::size_t>& list) {
    std::vector<double> mean(k, 0.0);
    for (std::size_t j : list)
      kernels::active().axpy(1.0, e.col(j), mean.data(), k);
    kernels::active().scale(1.0 / static_cast<double>(list.size()), mean.data(), k);
    return mean;
  };
  auto mean_all = [&](const Matrix& e) {
    std::vector<double> mean(k, 0.0);
    for (std::size_t j = 0; j < e.cols(); ++j)
      kernels::active().axpy(1.0, e.col(j), mean.data(), k);
    kernels::active().scale(1.0 / static_cast<double>(e.cols()), mean.data(), k);
    return mean;
  };

  MmdDistances out;
  const std::vector<double> ms = mean_all(es);
  const std::vector<double> mt = mean_all(et);
  out.marginal = kernels::active().sq_dist(ms.data(), mt.data(), k);

  for (int c = 1; c <= idx.class_count; ++c) {
    const auto& sc = idx.source_by_class[static_cast<std::size_t>(c - 1)];
    const auto& tc = idx.target_by_class[static_cast<std::size_t>(c - 1)];
    if (sc.empty() || tc.empty()) continue;
    const std::vector<double> a = mean_of(es, sc);
    const std::vector<double> b = mean_of(et, tc);
    out.conditional += kernels::active().sq_dist(a.data(), b.data(), k);
  }

  for (int c = 1; c <= idx.class_count; ++c) {
    const auto& sc = idx.source_by_class[static_cast<std::size_t>(c - 1)];
    const auto& tc = idx.target_by_class[static_cast<std::size_t>(c - 1)];
    const std::vector<std::size_t> comp_s = pooled_complement(idx.source_by_class, c);
    const std::vector<std::size_t> comp_t = pooled_complement(idx.target_by_class, c);
    if (!sc.empty() && !comp_t.empty()) {
      const std::vector<double> a = mean_of(es, sc);
      const std::vector<double> b = mean_of(et, comp_t);
      out.repulsive += kernels::active().sq_dist(a.data(), b.data(), k);
    }
    if (!tc.empty() && !comp_s.empty()) {
      const std::vector<double> a = mean_of(et, tc);
      const std::vector<double> b = mean_of(es, comp_s);
      out.repulsive += kernels::active().sq_dist(a.data(), b.data(), k);
    }
    if (!sc.empty() && !comp_s.empty()) {
      const std::vector<double> a = mean_of(es, sc);
      const std::vector<double> b = mean_of(es, comp_s);
      out.repulsive += kernels::active().sq_dist(a.data(), b.data(), k);
    }
  }
  return out;
}

}  // namespace rsacdda
