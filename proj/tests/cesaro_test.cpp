#include "otlab/cesaro.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace otlab;
using Catch::Approx;

namespace {

CMatrix diag2(Complex a, Complex b) {
  CMatrix D = CMatrix::Zero(2, 2);
  D(0, 0) = a;
  D(1, 1) = b;
  return D;
}

CMatrix random_matrix(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  CMatrix A(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) A(r, c) = Complex(g(rng), g(rng));
  return A;
}

CMatrix random_unitary(std::mt19937& rng, int n) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, n));
  CMatrix Q = qr.householderQ();
  return Q;
}

// Similarity orbit of a unimodular diagonal plus a strictly stable corner.
// Peripheral phases are spread out and the conjugating matrix keeps its
// condition number below 2, so the Cesaro means settle at the 1/n rate with a
// small constant.
CMatrix random_power_bounded(std::mt19937& rng, int n, int peripheral) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMatrix D = CMatrix::Zero(n, n);
  double offset = two_pi * u(rng);
  for (int j = 0; j < peripheral; ++j) {
    double theta = offset + two_pi * j / peripheral + 0.1 * (u(rng) - 0.5);
    D(j, j) = std::polar(1.0, theta);
  }
  for (int j = peripheral; j < n; ++j) {
    D(j, j) = std::polar(0.2 + 0.4 * u(rng), two_pi * u(rng));
  }
  CMatrix U = random_unitary(rng, n);
  CMatrix V = random_unitary(rng, n);
  CMatrix S = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) S(j, j) = 0.75 + 0.6 * u(rng);
  CMatrix W = U * S * V.adjoint();
  return W * D * W.inverse();
}

}  // namespace

TEST_CASE("power boundedness classification") {
  CMatrix strict = diag2(0.5, Complex(0.0, 0.9));
  PowerBoundedReport r1 = classify_power_bounded(strict);
  CHECK(r1.bounded);
  CHECK(r1.spectral_radius == Approx(0.9));
  CHECK(r1.peripheral.empty());

  CMatrix rot = diag2(std::polar(1.0, 0.3), std::polar(1.0, -0.3));
  PowerBoundedReport r2 = classify_power_bounded(rot);
  CHECK(r2.bounded);
  CHECK(r2.peripheral.size() == 2);
  CHECK(r2.empirical_sup == Approx(1.0));

  CMatrix jordan = CMatrix::Zero(2, 2);
  jordan(0, 0) = 1.0;
  jordan(0, 1) = 1.0;
  jordan(1, 1) = 1.0;
  PowerBoundedReport r3 = classify_power_bounded(jordan);
  CHECK_FALSE(r3.bounded);
  CHECK(r3.verdict_source == PowerBoundedReport::Source::empirical);
  CHECK_FALSE(r3.warnings.empty());

  PowerBoundedReport r4 = classify_power_bounded(1.1 * CMatrix::Identity(3, 3));
  CHECK_FALSE(r4.bounded);

  CMatrix mult = CMatrix::Zero(3, 3);
  mult(0, 0) = 1.0;
  mult(1, 1) = 1.0;
  mult(2, 2) = 0.5;
  PowerBoundedReport r5 = classify_power_bounded(mult);
  REQUIRE(r5.peripheral.size() == 1);
  CHECK(r5.peripheral[0].algebraic == 2);
  CHECK(r5.peripheral[0].geometric == 2);
}

TEST_CASE("iterative route on a unitary returns the identity immediately") {
  CMatrix U = diag2(std::polar(1.0, 1.0 / 7.0), std::polar(1.0, 0.4));
  CesaroLimit lim = cesaro_limit_iterative(U);
  CHECK(lim.method == CesaroLimit::Method::iterative);
  CHECK(op_norm(lim.A - CMatrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("spectral route splits peripheral and stable parts") {
  CMatrix T = diag2(std::polar(1.0, 0.9), 0.5);
  CesaroLimit lim = cesaro_limit_spectral(T);
  CHECK(op_norm(lim.A - diag2(1.0, 0.0)) < 1e-12);
  CHECK(lim.residual < 1e-10);

  // T* A T = A is the invariance identity of the limit.
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    CMatrix S = random_power_bounded(rng, 3, 2);
    CesaroLimit spec = cesaro_limit_spectral(S);
    CHECK(op_norm(S.adjoint() * spec.A * S - spec.A) < 1e-7);
    CesaroLimit iter = cesaro_limit_iterative(S, 1e-5, 200000);
    CHECK(op_norm(spec.A - iter.A) < std::max(1e-3, 10.0 / double(iter.iterations)));
  }

  CHECK_THROWS_AS(cesaro_limit_spectral(1.2 * CMatrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("iterative route refuses an unbounded input") {
  CHECK_THROWS_AS(cesaro_limit_iterative(1.5 * CMatrix::Identity(2, 2)),
                  std::runtime_error);
}

TEST_CASE("invertible realization hits the prescribed spectrum exactly") {
  SpectrumTarget tgt;
  tgt.values = {2.0, 2.0 / 3.0};
  C11Construction c = construct_c11(tgt);
  REQUIRE(c.T.rows() == 2);
  CHECK(rank_of(c.T) == 2);

  CMatrix target = diag2(2.0, 2.0 / 3.0);
  CesaroLimit spec = cesaro_limit_spectral(c.T);
  CHECK(op_norm(spec.A - target) < 1e-10);

  CesaroLimit iter = cesaro_limit_iterative(c.T, 1e-5, 200000);
  CHECK(op_norm(iter.A - target) < 1e-2);

  SpectrumTarget three;
  three.values = {2.0, 2.0, 0.5};
  C11Construction c3 = construct_c11(three);
  CMatrix t3 = CMatrix::Zero(3, 3);
  t3(0, 0) = 2.0;
  t3(1, 1) = 2.0;
  t3(2, 2) = 0.5;
  CHECK(op_norm(cesaro_limit_spectral(c3.T).A - t3) < 1e-10);

  SpectrumTarget bad;
  bad.values = {2.0, 2.0};  // reciprocals sum to 1, not the dimension
  CHECK_THROWS_AS(construct_c11(bad), std::invalid_argument);
  SpectrumTarget stable;
  stable.values = {2.0, 2.0 / 3.0};
  stable.stable_dim = 1;
  CHECK_THROWS_AS(construct_c11(stable), std::invalid_argument);
}

TEST_CASE("stable-part realization matches its frozen 2x2 form") {
  SpectrumTarget tgt;
  tgt.values = {4.0};
  tgt.stable_dim = 1;
  LStableConstruction c = construct_l_stable(tgt);
  REQUIRE(c.T.rows() == 2);

  Complex mu = std::polar(1.0, 1.0 / 7.0);
  CHECK(std::abs(c.T(0, 0)) < 1e-14);
  CHECK(std::abs(c.T(0, 1)) < 1e-14);
  CHECK(std::abs(c.T(1, 0) - std::sqrt(3.0) * mu) < 1e-12);
  CHECK(std::abs(c.T(1, 1) - mu) < 1e-12);

  CesaroLimit spec = cesaro_limit_spectral(c.T);
  HermEig h = eig_hermitian(spec.A);
  CHECK(h.values(0) == Approx(0.0).margin(1e-10));
  CHECK(h.values(1) == Approx(4.0).epsilon(1e-10));

  // X carries A to its diagonal model.
  CMatrix model = c.X.adjoint() * spec.A * c.X;
  CHECK(std::abs(model(0, 0)) < 1e-9);
  CHECK(std::abs(model(1, 1) - 4.0) < 1e-9);
  CHECK(std::abs(model(0, 1)) < 1e-9);

  SpectrumTarget hopeless;
  hopeless.values = {0.5, 0.5};  // reciprocals exceed the nonstable dimension
  hopeless.stable_dim = 1;
  CHECK_THROWS_AS(construct_l_stable(hopeless), std::invalid_argument);
}

TEST_CASE("harmonic identity holds in dimension two and fails for the 3x3 witness") {
  SpectrumTarget tgt;
  tgt.values = {2.0, 2.0 / 3.0};
  HarmonicIdentity ok = harmonic_identity_residual(construct_c11(tgt).T);
  CHECK(ok.residual < 1e-10);
  REQUIRE(ok.combined_eigs.size() == 2);
  CHECK(ok.combined_eigs[0] == Approx(2.0));
  CHECK(ok.combined_eigs[1] == Approx(2.0));

  CMatrix M(3, 3);
  M << Complex(0, 1), Complex(2), Complex(1),
       Complex(0), Complex(1), Complex(0, 1),
       Complex(1), Complex(0), Complex(4);
  CMatrix D = CMatrix::Zero(3, 3);
  D(0, 0) = 1.0;
  D(1, 1) = -1.0;
  D(2, 2) = Complex(0.0, 1.0);
  CMatrix T = M * D * M.inverse();

  HarmonicIdentity bad = harmonic_identity_residual(T);
  CHECK(bad.residual > 0.1);
  REQUIRE(bad.combined_eigs.size() == 3);
  CHECK(bad.combined_eigs[0] == Approx(1.271782549935).epsilon(1e-9));
  CHECK(bad.combined_eigs[1] == Approx(2.128495023213).epsilon(1e-9));
  CHECK(bad.combined_eigs[2] == Approx(2.599722426851).epsilon(1e-9));
}

TEST_CASE("contraction asymptotic limit is an orthogonal projection here") {
  CMatrix T = diag2(1.0, 0.5);
  CMatrix A = contraction_asymptotic_limit(T);
  CHECK(op_norm(A - diag2(1.0, 0.0)) < 1e-10);
  CHECK(op_norm(A * A - A) < 1e-10);

  CMatrix Z = contraction_asymptotic_limit(0.5 * CMatrix::Identity(3, 3));
  CHECK(op_norm(Z) < 1e-10);

  std::mt19937 rng(23);
  CMatrix W = random_unitary(rng, 3);
  CMatrix D = CMatrix::Zero(3, 3);
  D(0, 0) = std::polar(1.0, 0.8);
  D(1, 1) = 0.8;
  D(2, 2) = 0.3;
  CMatrix C = W * D * W.adjoint();
  CMatrix AC = contraction_asymptotic_limit(C);
  CMatrix ACs = contraction_asymptotic_limit(CMatrix(C.adjoint()));
  CHECK(op_norm(AC - ACs) < 1e-8);
  CHECK(op_norm(AC * AC - AC) < 1e-8);

  CHECK_THROWS_AS(contraction_asymptotic_limit(2.0 * CMatrix::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("strong convergence of the power grammians") {
  CMatrix ortho = diag2(std::polar(1.0, 0.3), std::polar(1.0, -0.3));
  SotLimitResult r1 = sot_limit_exists(ortho);
  CHECK(r1.exists);
  REQUIRE(r1.limit.has_value());
  CHECK(op_norm(*r1.limit - CMatrix::Identity(2, 2)) < 1e-10);

  CMatrix skew = CMatrix::Zero(2, 2);
  skew(0, 0) = std::polar(1.0, 0.3);
  skew(0, 1) = 1.0;
  skew(1, 1) = std::polar(1.0, -0.3);
  SotLimitResult r2 = sot_limit_exists(skew);
  CHECK_FALSE(r2.exists);

  SotLimitResult r3 = sot_limit_exists(diag2(0.5, 0.25));
  CHECK(r3.exists);
  REQUIRE(r3.limit.has_value());
  CHECK(op_norm(*r3.limit) < 1e-10);
}

TEST_CASE("loewner order") {
  CHECK(loewner_leq(diag2(1.0, 2.0), diag2(2.0, 3.0)));
  CHECK_FALSE(loewner_leq(diag2(2.0, 3.0), diag2(1.0, 2.0)));
  CHECK(loewner_leq(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)));
}

TEST_CASE("reciprocal sums of the limit spectrum respect the dimension law") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> dim_d(2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    int n = dim_d(rng);
    std::uniform_int_distribution<int> per_d(1, n);
    int p = per_d(rng);
    CMatrix T = random_power_bounded(rng, n, p);
    CesaroLimit lim = cesaro_limit_spectral(T);
    HermEig h = eig_hermitian(lim.A);

    double recip = 0.0;
    int rank = 0;
    for (int j = 0; j < n; ++j) {
      if (h.values(j) > 1e-8) {
        recip += 1.0 / h.values(j);
        ++rank;
      }
    }
    CAPTURE(trial, n, p);
    CHECK(rank == p);
    CHECK(recip <= rank + 1e-6);
    if (p == n) CHECK(recip == Approx(double(n)).margin(1e-6));
  }
}
