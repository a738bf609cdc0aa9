#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rsacdda/config.hpp"
#include "rsacdda/dataset.hpp"
#include "rsacdda/matrix.hpp"

namespace rsacdda {

/// All solver variables at one iteration. Z maps source coefficients to target
/// columns (AᵀXt ≈ AᵀXs·Z + E), so Z, Z_l, Z_s, Y2, Y3 are ns×nt and E, Y1 are
/// k×nt.
struct AlmState {
  Matrix a;      // m×k
  Matrix z;      // ns×nt
  Matrix z_l;    // ns×nt
  Matrix z_s;    // ns×nt
  Matrix e;      // k×nt
  Matrix y1;     // k×nt
  Matrix y2;     // ns×nt
  Matrix y3;     // ns×nt
  double mu = 0.0;
  Matrix m_rsa;  // n×n
  std::size_t iteration = 0;
  std::vector<int> pseudo_labels;
};

struct ConvergenceTrace {
  struct Row {
    std::size_t iteration;
    double r1;  // ‖AᵀXt − AᵀXs·Z − E‖_∞
    double r2;  // ‖Z − Z_l‖_∞
    double r3;  // ‖Z − Z_s‖_∞
    double energy;
    double mu;
  };
  std::vector<Row> rows;
  bool converged = false;
};

/// Closed-form A update: the stationary point of the smooth-in-A part of the
/// augmented Lagrangian, (2·X·M_RSA·Xᵀ + 2λI + μ·W·Wᵀ + μ·X·H·Xᵀ)·A =
/// μ·W·(E − Y1/μ)ᵀ with W = Xt − Xs·Z.
Matrix update_a(const AlmState& state, const Matrix& x_s, const Matrix& x_t,
                double lambda_ridge);

/// Closed-form Z update: (PᵀP + 2I)·Z = Pᵀ(Q − E + Y1/μ) + Z_l + Z_s − (Y2+Y3)/μ
/// with P = AᵀXs, Q = AᵀXt (the stationarity system divided through by μ).
Matrix update_z(const AlmState& state, const Matrix& x_s, const Matrix& x_t);

/// Z_l = svt(Z + Y2/μ, 1/μ)
Matrix update_z_l(const AlmState& state);

/// Z_s = shrink(Z + Y3/μ, λ2/μ)
Matrix update_z_s(const AlmState& state, double lambda2);

/// E = shrink(AᵀXt − AᵀXs·Z + Y1/μ, λ1/μ)
Matrix update_e(const AlmState& state, const Matrix& x_s, const Matrix& x_t,
                double lambda1);

struct MultiplierUpdate {
  Matrix y1;
  Matrix y2;
  Matrix y3;
  double mu = 0.0;
};

/// Y1 += μ(AᵀXt − AᵀXs·Z − E); Y2 += μ(Z − Z_l); Y3 += μ(Z − Z_s);
/// μ = min(ρμ, μ_max).
MultiplierUpdate update_multipliers(const AlmState& state, const Matrix& x_s,
                                    const Matrix& x_t, double rho, double mu_max);

/// Value of the augmented Lagrangian at the given state.
double alm_energy(const AlmState& state, const Matrix& x_s, const Matrix& x_t,
                  const AlmConfig& cfg);

/// The inexact-ALM loop. Starts from the Rayleigh-quotient warm start for A
/// (the all-zeros initialization is a fixed point of the printed updates), then
/// sweeps Steps 1-8 with a pseudo-label/M_RSA refresh each
/// cfg.pseudo_refresh_every iterations, until all three residuals drop below
/// cfg.epsilon or cfg.max_iterations is hit.
std::pair<AlmState, ConvergenceTrace> run_algorithm_1b(const DomainPair& pair,
                                                       const Matrix& m_rsa_init,
                                                       const std::vector<int>& pseudo_init,
                                                       const AlmConfig& cfg,
                                                       bool normalize_mmd = false);

}  // namespace rsacdda
