#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rsacdda/errors.hpp"
#include "rsacdda/linalg.hpp"
#include "rsacdda/matrix.hpp"

using namespace rsacdda;

namespace {

Matrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(r, c);
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t i = 0; i < r; ++i) m(i, j) = dist(rng);
  return m;
}

Matrix random_symmetric(std::mt19937& rng, std::size_t n) {
  return symmetrize(random_matrix(rng, n, n));
}

Matrix random_spd(std::mt19937& rng, std::size_t n) {
  Matrix b = random_matrix(rng, n, n);
  Matrix s = matmul_nt(b, b);
  for (std::size_t i = 0; i < n; ++i) s(i, i) += 0.5;
  return symmetrize(s);
}

// Test-side oracle: cyclic Jacobi eigenvalue iteration, independent of the
// library's eigensolver path. Returns eigenvalues ascending.
std::vector<double> jacobi_eigenvalues(Matrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t q = 1; q < n; ++q)
      for (std::size_t p = 0; p < q; ++p) off += a(p, q) * a(p, q);
    if (off < 1e-26) break;
    for (std::size_t q = 1; q < n; ++q) {
      for (std::size_t p = 0; p < q; ++p) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  std::sort(values.begin(), values.end());
  return values;
}

// Test-side Cholesky (lower), no pivoting.
Matrix chol_lower(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    REQUIRE(d > 0.0);
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

// Eigenvalues of the pencil (l, r) with r SPD, via the test-side reduction
// C = G⁻¹ l G⁻ᵀ and Jacobi.
std::vector<double> pencil_eigenvalues_oracle(const Matrix& l, const Matrix& r) {
  const std::size_t n = l.rows();
  const Matrix g = chol_lower(r);
  // Solve G·Y = l (forward), then C·Gᵀ = Y ⇒ C = Y·G⁻ᵀ (forward on rows).
  Matrix y = l;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      double v = y(i, j);
      for (std::size_t k = 0; k < i; ++k) v -= g(i, k) * y(k, j);
      y(i, j) = v / g(i, i);
    }
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = y(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= g(j, k) * c(i, k);
      c(i, j) = v / g(j, j);
    }
  return jacobi_eigenvalues(symmetrize(c));
}

double first_lead_entry(const Matrix& m, std::size_t col) {
  double peak = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) peak = std::max(peak, std::fabs(m(i, col)));
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (std::fabs(m(i, col)) > 1e-12 * peak) return m(i, col);
  return 0.0;
}

double nuclear_norm_of(const Matrix& m) {
  double acc = 0.0;
  for (double s : svd(m).s) acc += s;
  return acc;
}

double l1_norm_of(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) acc += std::fabs(m.data()[i]);
  return acc;
}

}  // namespace

TEST_CASE("gen_eig_smallest: diagonal pencil") {
  Matrix l(3, 3);
  l(0, 0) = 3;
  l(1, 1) = 1;
  l(2, 2) = 2;
  const GenEigResult r = gen_eig_smallest(l, Matrix::identity(3), 2);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[0] == doctest::Approx(1.0));
  CHECK(r.values[1] == doctest::Approx(2.0));
  // Standard basis columns, sign-fixed positive.
  CHECK(r.vectors(1, 0) == doctest::Approx(1.0));
  CHECK(r.vectors(2, 1) == doctest::Approx(1.0));
  CHECK(std::fabs(r.vectors(0, 0)) < 1e-12);
}

TEST_CASE("gen_eig_smallest: identity pencil") {
  const GenEigResult r = gen_eig_smallest(Matrix::identity(4), Matrix::identity(4), 1);
  CHECK(r.values[0] == doctest::Approx(1.0));
  double norm = 0.0;
  for (std::size_t i = 0; i < 4; ++i) norm += r.vectors(i, 0) * r.vectors(i, 0);
  CHECK(norm == doctest::Approx(1.0));
}

TEST_CASE("gen_eig_smallest: matches the dense pencil oracle") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 6;
    const Matrix l = random_symmetric(rng, n);
    const Matrix r = random_spd(rng, n);
    const GenEigResult got = gen_eig_smallest(l, r, 3);
    const std::vector<double> expect = pencil_eigenvalues_oracle(l, r);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(got.values[i] == doctest::Approx(expect[i]).epsilon(1e-8));
    const double bound = 1e-8 * (1.0 + frobenius_norm(l) + frobenius_norm(r));
    CHECK(got.residual <= bound);
  }
}

TEST_CASE("gen_eig_smallest with identity right matrix matches a standard solve") {
  std::mt19937 rng(12);
  const Matrix a = random_symmetric(rng, 7);
  const GenEigResult got = gen_eig_smallest(a, Matrix::identity(7), 7);
  const std::vector<double> expect = jacobi_eigenvalues(a);
  for (std::size_t i = 0; i < 7; ++i)
    CHECK(got.values[i] == doctest::Approx(expect[i]).epsilon(1e-8));
}

TEST_CASE("gen_eig_smallest: singular right matrix errors with ridge advice") {
  Matrix l = Matrix::identity(3);
  Matrix r(3, 3);  // zero matrix: not PD
  CHECK_THROWS_WITH_AS(gen_eig_smallest(l, r, 1),
                       doctest::Contains("increase ridge"), NumericError);
  // A real ridge makes it solvable.
  const GenEigResult ok = gen_eig_smallest(l, r, 1, 1.0);
  CHECK(ok.values[0] == doctest::Approx(1.0));
}

TEST_CASE("gen_eig_smallest: asymmetric input rejected") {
  Matrix l(2, 2);
  l(0, 1) = 1.0;  // l(1,0) stays 0
  CHECK_THROWS_AS(gen_eig_smallest(l, Matrix::identity(2), 1), NumericError);
}

TEST_CASE("gen_eig_smallest_deflated agrees with the PD path on full-rank pencils") {
  std::mt19937 rng(13);
  const Matrix l = random_symmetric(rng, 6);
  const Matrix r = random_spd(rng, 6);
  const GenEigResult a = gen_eig_smallest(l, r, 3);
  const GenEigResult b = gen_eig_smallest_deflated(l, r, sym_eig(r), 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-9));
}

TEST_CASE("gen_eig_smallest_deflated clips k to the right matrix rank") {
  std::mt19937 rng(14);
  Matrix b = random_matrix(rng, 6, 2);
  const Matrix r = symmetrize(matmul_nt(b, b));  // rank 2
  // l maps range(r) into itself: projector-flavoured l = r + I restricted...
  // use l = r itself plus a multiple of r.
  Matrix l = r;
  l *= 2.0;
  const GenEigResult got = gen_eig_smallest_deflated(l, r, sym_eig(r), 5);
  CHECK(got.vectors.cols() == 2);
  for (double v : got.values) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("svd: diagonal and zero matrices") {
  Matrix d(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  const SvdResult r = svd(d);
  CHECK(r.s[0] == doctest::Approx(3.0));
  CHECK(r.s[1] == doctest::Approx(1.0));

  const SvdResult z = svd(Matrix(3, 4));
  for (double s : z.s) CHECK(s == 0.0);
}

TEST_CASE("svd: reconstruction and orthonormality contracts") {
  std::mt19937 rng(15);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{4, 7},
                      std::pair<std::size_t, std::size_t>{7, 4},
                      std::pair<std::size_t, std::size_t>{5, 5}}) {
    const Matrix m = random_matrix(rng, r, c, 2.0);
    const SvdResult f = svd(m);
    Matrix us = f.u;
    for (std::size_t j = 0; j < us.cols(); ++j)
      for (std::size_t i = 0; i < us.rows(); ++i) us(i, j) *= f.s[j];
    const Matrix rec = matmul_nt(us, f.v);
    CHECK(frobenius_norm(rec - m) <= 1e-9 * (1.0 + frobenius_norm(m)));

    const Matrix utu = matmul_tn(f.u, f.u);
    const Matrix vtv = matmul_tn(f.v, f.v);
    CHECK(max_abs_diff(utu, Matrix::identity(utu.rows())) < 1e-9);
    CHECK(max_abs_diff(vtv, Matrix::identity(vtv.rows())) < 1e-9);
    CHECK(std::is_sorted(f.s.rbegin(), f.s.rend()));
    for (std::size_t j = 0; j < f.u.cols(); ++j)
      if (f.s[j] > 1e-12) CHECK(first_lead_entry(f.u, j) > 0.0);
  }
}

TEST_CASE("svd rejects non-finite input") {
  Matrix m(2, 2);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(m), NumericError);
}

TEST_CASE("svt: diagonal case and tau=0 identity") {
  Matrix d(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  const Matrix t = svt(d, 2.0);
  CHECK(t(0, 0) == doctest::Approx(1.0));
  CHECK(std::fabs(t(1, 1)) < 1e-12);

  std::mt19937 rng(16);
  const Matrix m = random_matrix(rng, 4, 5);
  CHECK(frobenius_norm(svt(m, 0.0) - m) < 1e-9 * (1.0 + frobenius_norm(m)));
  CHECK_THROWS_AS(svt(m, -0.1), NumericError);
}

TEST_CASE("svt output singular values equal max(sigma - tau, 0)") {
  std::mt19937 rng(17);
  const Matrix m = random_matrix(rng, 5, 6, 2.0);
  const double tau = 0.8;
  const SvdResult before = svd(m);
  const SvdResult after = svd(svt(m, tau));
  for (std::size_t i = 0; i < after.s.size(); ++i) {
    const double expect = std::max(before.s[i] - tau, 0.0);
    CHECK(after.s[i] == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("svt minimizes its proximal objective against random perturbations") {
  std::mt19937 rng(18);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Matrix m = random_matrix(rng, 5, 5, 1.5);
  const double tau = 0.7;
  const Matrix z = svt(m, tau);
  const Matrix diff0 = z - m;
  const double f0 = tau * nuclear_norm_of(z) +
                    0.5 * frobenius_norm(diff0) * frobenius_norm(diff0);
  for (int p = 0; p < 100; ++p) {
    Matrix delta(5, 5);
    const double scale = (p % 3 == 0) ? 1e-1 : (p % 3 == 1 ? 1e-3 : 1e-5);
    for (std::size_t i = 0; i < delta.size(); ++i) delta.data()[i] = scale * gauss(rng);
    const Matrix cand = z + delta;
    const Matrix diff = cand - m;
    const double f = tau * nuclear_norm_of(cand) +
                     0.5 * frobenius_norm(diff) * frobenius_norm(diff);
    CHECK(f >= f0 - 1e-12);
  }
}

TEST_CASE("shrink: elementwise cases and proximal objective") {
  Matrix x(1, 2);
  x(0, 0) = 0.5;
  x(0, 1) = -3.0;
  const Matrix y = shrink(x, 1.0);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(shrink(x, -1.0), NumericError);

  std::mt19937 rng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Matrix m = random_matrix(rng, 4, 6, 1.5);
  const double tau = 0.3;
  const Matrix z = shrink(m, tau);
  const Matrix d0 = z - m;
  const double f0 = tau * l1_norm_of(z) + 0.5 * frobenius_norm(d0) * frobenius_norm(d0);
  for (int p = 0; p < 100; ++p) {
    Matrix delta(4, 6);
    const double scale = (p % 3 == 0) ? 1e-1 : (p % 3 == 1 ? 1e-3 : 1e-5);
    for (std::size_t i = 0; i < delta.size(); ++i) delta.data()[i] = scale * gauss(rng);
    const Matrix cand = z + delta;
    const Matrix d = cand - m;
    const double f = tau * l1_norm_of(cand) + 0.5 * frobenius_norm(d) * frobenius_norm(d);
    CHECK(f >= f0 - 1e-12);
  }
}

TEST_CASE("svt is non-expansive") {
  std::mt19937 rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix(rng, 5, 4);
    const Matrix b = random_matrix(rng, 5, 4);
    const double tau = 0.4;
    CHECK(frobenius_norm(svt(a, tau) - svt(b, tau)) <=
          frobenius_norm(a - b) + 1e-12);
  }
}

TEST_CASE("shrink composes: shrink(shrink(M,a),b) == shrink(M,a+b)") {
  std::mt19937 rng(21);
  const Matrix m = random_matrix(rng, 6, 5, 2.0);
  const Matrix lhs = shrink(shrink(m, 0.3), 0.5);
  const Matrix rhs = shrink(m, 0.8);
  CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("kernels are deterministic for fixed input") {
  std::mt19937 rng(22);
  const Matrix m = random_matrix(rng, 6, 6);
  const Matrix sym = symmetrize(m);
  const SvdResult s1 = svd(m), s2 = svd(m);
  CHECK(max_abs_diff(s1.u, s2.u) == 0.0);
  CHECK(max_abs_diff(s1.v, s2.v) == 0.0);
  const SymEigResult e1 = sym_eig(sym), e2 = sym_eig(sym);
  CHECK(max_abs_diff(e1.vectors, e2.vectors) == 0.0);
}

TEST_CASE("solve_spd and solve_sym round-trip") {
  std::mt19937 rng(23);
  const Matrix a = random_spd(rng, 6);
  const Matrix b = random_matrix(rng, 6, 3);
  const Matrix x1 = solve_spd(a, b);
  CHECK(frobenius_norm(matmul(a, x1) - b) < 1e-9 * (1.0 + frobenius_norm(b)));
  const Matrix sym = random_symmetric(rng, 6);
  const Matrix x2 = solve_sym(sym, b);
  CHECK(frobenius_norm(matmul(sym, x2) - b) < 1e-8 * (1.0 + frobenius_norm(b)));
  CHECK_THROWS_AS(solve_sym(Matrix(3, 3), Matrix(3, 1)), NumericError);
  CHECK_THROWS_AS(solve_spd(Matrix(3, 3), Matrix(3, 1)), NumericError);
}
