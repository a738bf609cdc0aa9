#include "rsacdda/alm.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rsacdda/classify.hpp"
#include "rsacdda/errors.hpp"
#include "rsacdda/kernels.hpp"
#include "rsacdda/linalg.hpp"
#include "rsacdda/mmd.hpp"

namespace rsacdda {
namespace {

Matrix concat_columns(const Matrix& a, const Matrix& b) {
  Matrix x(a.rows(), a.cols() + b.cols());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) x(i, j) = a(i, j);
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < b.rows(); ++i) x(i, a.cols() + j) = b(i, j);
  return x;
}

Matrix centered_scatter(const Matrix& x) {
  Matrix xc = x;
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  std::vector<double> mean(m, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) mean[i] += x(i, j);
  for (std::size_t i = 0; i < m; ++i) mean[i] /= static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) xc(i, j) -= mean[i];
  return symmetrize(matmul_nt(xc, xc));
}

Matrix scaled_copy(const Matrix& y, double s) {
  Matrix out = y;
  out *= s;
  return out;
}

// X·M_RSA·Xᵀ through the rank-one factorization: G·diag(signs)·Gᵀ with G = X·U.
Matrix xmx_from_factor(const Matrix& x, const MmdFactor& f, bool normalize_mmd) {
  Matrix g = matmul(x, f.u);
  Matrix gs = g;
  double scale = 1.0;
  if (normalize_mmd) {
    const double fro = mmd_factor_frobenius(f);
    if (fro > 0.0) scale = 1.0 / fro;
  }
  for (std::size_t j = 0; j < gs.cols(); ++j)
    kernels::active().scale(scale * f.signs[j], gs.col(j), gs.rows());
  return symmetrize(matmul_nt(gs, g));
}

Matrix update_a_impl(const Matrix& xmx, const Matrix& xhx, const Matrix& x_s,
                     const Matrix& x_t, const Matrix& z, const Matrix& e,
                     const Matrix& y1, double mu, double lambda_ridge) {
  const Matrix w = x_t - matmul(x_s, z);  // m×nt
  Matrix left = scaled_copy(xmx, 2.0);
  left += scaled_copy(matmul_nt(w, w), mu);
  left += scaled_copy(xhx, mu);
  for (std::size_t i = 0; i < left.rows(); ++i) left(i, i) += 2.0 * lambda_ridge;

  const Matrix forcing = e - scaled_copy(y1, 1.0 / mu);  // k×nt
  const Matrix rhs = scaled_copy(matmul_nt(w, forcing), mu);
  try {
    return solve_sym(symmetrize(left), rhs);
  } catch (const NumericError& err) {
    throw NumericError(std::string("update_a: left factor singular (") + err.what() +
                       "); increase lambda");
  }
}

Matrix update_z_impl(const Matrix& p, const Matrix& q, const Matrix& z_l,
                     const Matrix& z_s, const Matrix& e, const Matrix& y1,
                     const Matrix& y2, const Matrix& y3, double mu) {
  const std::size_t ns = p.cols();
  Matrix gram = symmetrize(matmul_tn(p, p));
  for (std::size_t i = 0; i < ns; ++i) gram(i, i) += 2.0;
  Matrix rhs = q - e + scaled_copy(y1, 1.0 / mu);
  rhs = matmul_tn(p, rhs);
  rhs += z_l;
  rhs += z_s;
  rhs -= scaled_copy(y2 + y3, 1.0 / mu);
  return solve_spd(gram, rhs);
}

// Constrained A-step used by the loop. The unconstrained closed form (the
// update_a operation) lets the scatter term dominate, which tilts A toward
// minimum-variance directions and starves the embedding of class signal; the
// model's own side condition AᵀXHXᵀA = I rules that out. The forcing
// F = E − Y1/μ lifts to the ambient space through the minimum-norm lift
// G = A(AᵀA)⁻¹F (so AᵀG = F exactly at the current iterate), which turns the
// smooth-in-A terms into a pure trace quadratic over the constraint manifold:
//   min_A tr(Aᵀ[2·X·M_RSA·Xᵀ + 2λI + μ(W−G)(W−G)ᵀ]A)  s.t.  AᵀXHXᵀA = I,
// solved by the k smallest generalized eigenpairs. As the reconstruction
// residual W−G shrinks, the span decision hands back to the MMD term.
Matrix update_a_constrained(const Matrix& xmx, const Matrix& xhx,
                            const SymEigResult& scatter_eig, const Matrix& a_prev,
                            const Matrix& x_s, const Matrix& x_t, const Matrix& z,
                            const Matrix& e, const Matrix& y1, double mu,
                            double lambda_ridge, std::size_t k) {
  const Matrix w = x_t - matmul(x_s, z);
  const Matrix forcing = e - scaled_copy(y1, 1.0 / mu);  // k×nt
  const Matrix gram = symmetrize(matmul_tn(a_prev, a_prev));
  const Matrix lifted = matmul(a_prev, solve_spd(gram, forcing));  // m×nt
  const Matrix residual = w - lifted;
  Matrix phi = scaled_copy(xmx, 2.0);
  phi += scaled_copy(matmul_nt(residual, residual), mu);
  for (std::size_t i = 0; i < phi.rows(); ++i) phi(i, i) += 2.0 * lambda_ridge;
  return gen_eig_smallest_deflated(symmetrize(phi), xhx, scatter_eig, k).vectors;
}

void require_state_finite(const Matrix& m, std::size_t iteration, const char* var) {
  if (!m.all_finite())
    throw NumericError("algorithm_1b iteration " + std::to_string(iteration) + ": " +
                       var + " became non-finite");
}

double l1_norm(const Matrix& m) {
  double acc = 0.0;
  const double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) acc += std::fabs(p[i]);
  return acc;
}

}  // namespace

Matrix update_a(const AlmState& state, const Matrix& x_s, const Matrix& x_t,
                double lambda_ridge) {
  const Matrix x = concat_columns(x_s, x_t);
  const Matrix xmx = symmetrize(matmul(matmul(x, state.m_rsa), transpose(x)));
  const Matrix xhx = centered_scatter(x);
  return update_a_impl(xmx, xhx, x_s, x_t, state.z, state.e, state.y1, state.mu,
                       lambda_ridge);
}

Matrix update_z(const AlmState& state, const Matrix& x_s, const Matrix& x_t) {
  const Matrix p = matmul_tn(state.a, x_s);
  const Matrix q = matmul_tn(state.a, x_t);
  return update_z_impl(p, q, state.z_l, state.z_s, state.e, state.y1, state.y2,
                       state.y3, state.mu);
}

Matrix update_z_l(const AlmState& state) {
  return svt(state.z + scaled_copy(state.y2, 1.0 / state.mu), 1.0 / state.mu);
}

Matrix update_z_s(const AlmState& state, double lambda2) {
  return shrink(state.z + scaled_copy(state.y3, 1.0 / state.mu), lambda2 / state.mu);
}

Matrix update_e(const AlmState& state, const Matrix& x_s, const Matrix& x_t,
                double lambda1) {
  const Matrix p = matmul_tn(state.a, x_s);
  const Matrix q = matmul_tn(state.a, x_t);
  return shrink(q - matmul(p, state.z) + scaled_copy(state.y1, 1.0 / state.mu),
                lambda1 / state.mu);
}

MultiplierUpdate update_multipliers(const AlmState& state, const Matrix& x_s,
                                    const Matrix& x_t, double rho, double mu_max) {
  const Matrix p = matmul_tn(state.a, x_s);
  const Matrix q = matmul_tn(state.a, x_t);
  MultiplierUpdate out;
  out.y1 = state.y1 + scaled_copy(q - matmul(p, state.z) - state.e, state.mu);
  out.y2 = state.y2 + scaled_copy(state.z - state.z_l, state.mu);
  out.y3 = state.y3 + scaled_copy(state.z - state.z_s, state.mu);
  out.mu = std::min(rho * state.mu, mu_max);
  return out;
}

double alm_energy(const AlmState& state, const Matrix& x_s, const Matrix& x_t,
                  const AlmConfig& cfg) {
  const Matrix x = concat_columns(x_s, x_t);
  const Matrix xmx = symmetrize(matmul(matmul(x, state.m_rsa), transpose(x)));
  const Matrix xhx = centered_scatter(x);
  const Matrix p = matmul_tn(state.a, x_s);
  const Matrix q = matmul_tn(state.a, x_t);
  const Matrix r1 = q - matmul(p, state.z) - state.e;
  const Matrix r2 = state.z - state.z_l;
  const Matrix r3 = state.z - state.z_s;

  double nuclear = 0.0;
  for (double s : svd(state.z_l).s) nuclear += s;

  double energy = inner(state.a, matmul(xmx, state.a));
  energy += cfg.lambda_ridge * frobenius_norm(state.a) * frobenius_norm(state.a);
  energy += cfg.lambda1 * l1_norm(state.e);
  energy += cfg.lambda2 * l1_norm(state.z_s);
  energy += nuclear;
  energy += inner(state.y1, r1) + inner(state.y2, r2) + inner(state.y3, r3);
  const double f1 = frobenius_norm(r1), f2 = frobenius_norm(r2), f3 = frobenius_norm(r3);
  energy += 0.5 * state.mu * (f1 * f1 + f2 * f2 + f3 * f3);
  energy += 0.5 * state.mu *
            (inner(state.a, matmul(xhx, state.a)) - static_cast<double>(state.a.cols()));
  return energy;
}

std::pair<AlmState, ConvergenceTrace> run_algorithm_1b(const DomainPair& pair,
                                                       const Matrix& m_rsa_init,
                                                       const std::vector<int>& pseudo_init,
                                                       const AlmConfig& cfg,
                                                       bool normalize_mmd) {
  cfg.validate();
  const Matrix& x_s = pair.source.features;
  const Matrix& x_t = pair.target.features;
  const std::size_t m = x_s.rows();
  const std::size_t ns = x_s.cols();
  const std::size_t nt = x_t.cols();
  const std::size_t n = ns + nt;
  if (m_rsa_init.rows() != n || m_rsa_init.cols() != n)
    throw DataError("run_algorithm_1b: m_rsa_init must be (ns+nt)×(ns+nt)");

  const Matrix x = concat_columns(x_s, x_t);
  const Matrix xhx = centered_scatter(x);

  AlmState s;
  s.pseudo_labels = pseudo_init;
  MmdFactor factor = build_mmd_factor(index_subdomains(pair, s.pseudo_labels));
  Matrix xmx = symmetrize(matmul(matmul(x, m_rsa_init), transpose(x)));

  // Warm start A from the Rayleigh-quotient pencil, deflated to the range of
  // the centered scatter. With the printed all-zeros initialization the first
  // sweep would leave every residual at zero and stop at a useless fixed
  // point. The subspace width is clipped to the scatter rank: extra columns
  // could only ever stay zero.
  const SymEigResult scatter_eig = sym_eig(xhx);
  std::size_t k = std::min(cfg.k_final, m);
  {
    Matrix left = xmx;
    for (std::size_t i = 0; i < m; ++i) left(i, i) += cfg.lambda_ridge;
    const GenEigResult eig = gen_eig_smallest_deflated(left, xhx, scatter_eig, k);
    s.a = eig.vectors;
    k = s.a.cols();
  }

  s.z = Matrix(ns, nt);
  s.z_l = Matrix(ns, nt);
  s.z_s = Matrix(ns, nt);
  s.e = Matrix(k, nt);
  s.y1 = Matrix(k, nt);
  s.y2 = Matrix(ns, nt);
  s.y3 = Matrix(ns, nt);
  s.mu = cfg.mu0;

  ConvergenceTrace trace;
  double nuclear_z_l = 0.0;

  // The loop runs to the residual criterion, but the state handed back is the
  // best iterate under the model objective (the μ-independent part of the
  // energy). At large μ the A-block satisfies its subproblem by drifting into
  // minimum-variance spans, so the last iterate is often the worst one; the
  // model objective identifies the iterates that actually optimize the model.
  AlmState best = s;
  MmdFactor best_factor = factor;
  double best_j = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 1; iter <= cfg.max_iterations; ++iter) {
    // Step 1 (from the second sweep on; the first sweep runs on the warm
    // start, which satisfies the constraint already).
    if (iter > 1) {
      s.a = update_a_constrained(xmx, xhx, scatter_eig, s.a, x_s, x_t, s.z, s.e,
                                 s.y1, s.mu, cfg.lambda_ridge, k);
      require_state_finite(s.a, iter, "A");
    }

    // Step 2: pseudo-label refresh in the current embedding, then M_RSA rebuild.
    if ((iter - 1) % cfg.pseudo_refresh_every == 0) {
      const Matrix p_all = matmul_tn(s.a, x);  // k×n
      Matrix ds(k, ns), dt(k, nt);
      for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t i = 0; i < k; ++i) ds(i, j) = p_all(i, j);
      for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t i = 0; i < k; ++i) dt(i, j) = p_all(i, ns + j);
      s.pseudo_labels = nn_classify(ds, pair.source.labels, dt).labels;
      factor = build_mmd_factor(index_subdomains(pair, s.pseudo_labels));
      xmx = xmx_from_factor(x, factor, normalize_mmd);
    }

    const Matrix p = matmul_tn(s.a, x_s);
    const Matrix q = matmul_tn(s.a, x_t);

    // Steps 3-6.
    s.z = update_z_impl(p, q, s.z_l, s.z_s, s.e, s.y1, s.y2, s.y3, s.mu);
    require_state_finite(s.z, iter, "Z");
    {
      const Matrix w = s.z + scaled_copy(s.y2, 1.0 / s.mu);
      s.z_l = svt(w, 1.0 / s.mu, &nuclear_z_l);
      require_state_finite(s.z_l, iter, "Z_l");
    }
    s.z_s = shrink(s.z + scaled_copy(s.y3, 1.0 / s.mu), cfg.lambda2 / s.mu);
    require_state_finite(s.z_s, iter, "Z_s");
    const Matrix pz = matmul(p, s.z);
    s.e = shrink(q - pz + scaled_copy(s.y1, 1.0 / s.mu), cfg.lambda1 / s.mu);
    require_state_finite(s.e, iter, "E");

    // Residuals feed both the multiplier update and the convergence check.
    const Matrix r1 = q - pz - s.e;
    const Matrix r2 = s.z - s.z_l;
    const Matrix r3 = s.z - s.z_s;
    const double n1 = max_abs(r1);
    const double n2 = max_abs(r2);
    const double n3 = max_abs(r3);

    // Energy at the pre-update multipliers (the ones this sweep optimized).
    double energy = inner(s.a, matmul(xmx, s.a));
    energy += cfg.lambda_ridge * frobenius_norm(s.a) * frobenius_norm(s.a);
    energy += cfg.lambda1 * l1_norm(s.e);
    energy += cfg.lambda2 * l1_norm(s.z_s);
    energy += nuclear_z_l;
    energy += inner(s.y1, r1) + inner(s.y2, r2) + inner(s.y3, r3);
    const double f1 = frobenius_norm(r1), f2 = frobenius_norm(r2),
                 f3 = frobenius_norm(r3);
    energy += 0.5 * s.mu * (f1 * f1 + f2 * f2 + f3 * f3);
    energy +=
        0.5 * s.mu * (inner(s.a, matmul(xhx, s.a)) - static_cast<double>(k));
    if (!std::isfinite(energy))
      throw NumericError("algorithm_1b iteration " + std::to_string(iter) +
                         ": energy became non-finite");

    trace.rows.push_back({iter, n1, n2, n3, energy, s.mu});

    // Model objective for iterate selection: the energy minus multiplier and
    // penalty terms. Ties favour the earlier iterate (strict improvement).
    {
      const double j_model =
          inner(s.a, matmul(xmx, s.a)) +
          cfg.lambda_ridge * frobenius_norm(s.a) * frobenius_norm(s.a) +
          cfg.lambda1 * l1_norm(s.e) + cfg.lambda2 * l1_norm(s.z_s) + nuclear_z_l;
      if (j_model < best_j) {
        best_j = j_model;
        best = s;
        best.iteration = iter;
        best_factor = factor;
      }
    }

    // Step 7.
    s.y1 += scaled_copy(r1, s.mu);
    s.y2 += scaled_copy(r2, s.mu);
    s.y3 += scaled_copy(r3, s.mu);
    require_state_finite(s.y1, iter, "Y1");
    require_state_finite(s.y2, iter, "Y2");
    require_state_finite(s.y3, iter, "Y3");
    s.mu = std::min(cfg.rho * s.mu, cfg.mu_max);
    s.iteration = iter;

    // Step 8.
    if (n1 < cfg.epsilon && n2 < cfg.epsilon && n3 < cfg.epsilon) {
      trace.converged = true;
      break;
    }
  }

  best.m_rsa = mmd_factor_to_matrix(best_factor);
  if (normalize_mmd) {
    const double fro = frobenius_norm(best.m_rsa);
    if (fro > 0.0) best.m_rsa *= 1.0 / fro;
  }
  return {std::move(best), std::move(trace)};
}

}  // namespace rsacdda
