#include "otlab/commutant.hpp"

#include "otlab/matkernel.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

using namespace otlab;
using Catch::Approx;

namespace {

CMatrix random_unitary(std::mt19937& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix Z(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) Z(r, c) = Complex(g(rng), g(rng));
  }
  Eigen::HouseholderQR<CMatrix> qr(Z);
  CMatrix Q = qr.householderQ();
  CMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    Complex d = R(j, j);
    if (std::abs(d) > 0.0) Q.col(j) *= d / std::abs(d);
  }
  return Q;
}

// Spectrum inside the disk of radius 0.75, conjugating matrix condition < 2.
CMatrix random_stable(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMatrix D = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    D(j, j) = std::polar(0.2 + 0.5 * u(rng), 2.0 * 3.14159265358979323846 * u(rng));
  }
  CMatrix U = random_unitary(rng, n);
  CMatrix V = random_unitary(rng, n);
  CMatrix S = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) S(j, j) = 0.75 + 0.6 * u(rng);
  CMatrix W = U * S * V.adjoint();
  return W * D * W.inverse();
}

CMatrix random_peripheral_diag(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMatrix D = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    D(j, j) = std::polar(1.0, 2.0 * 3.14159265358979323846 * u(rng));
  }
  return D;
}

CMatrix random_matrix(std::mt19937& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) M(r, c) = Complex(g(rng), g(rng));
  }
  return M;
}

// Defining equations of a kernel element, solved exactly by every basis pair.
double pair_residual(const BlockTriple& bt, const CMatrix& C00, const CMatrix& C01) {
  double a = op_norm(C00 * bt.T00 - bt.T00 * C00);
  double b = op_norm(bt.T00 * C01 - C01 * bt.T11 - C00 * bt.T01);
  return std::max(a, b);
}

}  // namespace

TEST_CASE("block triple assembly and flags") {
  CMatrix T00 = CMatrix::Zero(2, 2);
  T00(0, 0) = Complex(0.5, 0.0);
  T00(1, 1) = Complex(0.0, 0.25);
  CMatrix T11 = CMatrix::Zero(2, 2);
  T11(0, 0) = std::polar(1.0, 0.3);
  T11(1, 1) = std::polar(1.0, 2.0);
  CMatrix T01 = CMatrix::Zero(2, 2);

  SECTION("layout") {
    CMatrix C = T01;
    C(0, 1) = Complex(3.0, -1.0);
    BlockTriple bt = make_block_triple(T00, C, T11);
    CMatrix T = assemble(bt);
    REQUIRE(T.rows() == 4);
    CHECK(T(0, 0) == T00(0, 0));
    CHECK(T(0, 3) == Complex(3.0, -1.0));
    CHECK(T(2, 2) == T11(0, 0));
    CHECK(T(2, 0) == Complex(0.0, 0.0));
    CHECK(T(3, 1) == Complex(0.0, 0.0));
  }

  SECTION("stable part with peripheral tail") {
    BlockTriple bt = make_block_triple(T00, T01, T11);
    CHECK(bt.stable_part);
    CHECK(bt.contraction);
  }

  SECTION("interior eigenvalue in the second block clears the flag") {
    CMatrix M = T11;
    M(1, 1) = Complex(0.5, 0.0);
    BlockTriple bt = make_block_triple(T00, T01, M);
    CHECK_FALSE(bt.stable_part);
  }

  SECTION("peripheral first block clears the flag") {
    CMatrix M = CMatrix::Identity(2, 2);
    BlockTriple bt = make_block_triple(M, T01, T11);
    CHECK_FALSE(bt.stable_part);
  }

  SECTION("coupling pushes the norm past one") {
    CMatrix C = CMatrix::Identity(2, 2);
    BlockTriple bt = make_block_triple(T00, C, T11);
    CHECK_FALSE(bt.contraction);
    CHECK(bt.stable_part);
  }

  SECTION("shape validation") {
    CHECK_THROWS_AS(make_block_triple(T00, CMatrix::Zero(2, 3), T11), std::invalid_argument);
    CHECK_THROWS_AS(make_block_triple(CMatrix::Zero(0, 0), T01, T11), std::invalid_argument);
    CHECK_THROWS_AS(make_block_triple(T00, T01, CMatrix::Zero(2, 3)), std::invalid_argument);
  }
}

TEST_CASE("kernel dimension equals the commutant of the stable block") {
  // Disjoint spectra make the coupling equation uniquely solvable, so the
  // kernel is a copy of {T00}'.
  CMatrix T00 = CMatrix::Zero(2, 2);
  T00(0, 0) = Complex(0.3, 0.0);
  T00(1, 1) = Complex(0.0, 0.5);
  CMatrix T11 = CMatrix::Zero(2, 2);
  T11(0, 0) = std::polar(1.0, 0.4);
  T11(1, 1) = std::polar(1.0, 2.5);
  CMatrix T01(2, 2);
  T01 << Complex(1.0, 0.0), Complex(0.5, 0.0), Complex(0.25, 0.0), Complex(-1.0, 0.0);

  BlockTriple bt = make_block_triple(T00, T01, T11);
  CommutantKernel ker = injectivity_kernel(bt);

  CHECK(ker.dimension == 2);
  REQUIRE(ker.basis.size() == 2);
  CHECK(ker.singular_gap > 100.0);
  CHECK(ker.warnings.empty());
  for (const auto& [C00, C01] : ker.basis) {
    CHECK(pair_residual(bt, C00, C01) < 1e-8);
    CHECK(op_norm(C00) + op_norm(C01) > 1e-8);
  }

  SECTION("kernel elements commute with the assembled operator") {
    const auto& [C00, C01] = ker.basis.front();
    CMatrix C = CMatrix::Zero(4, 4);
    C.block(0, 0, 2, 2) = C00;
    C.block(0, 2, 2, 2) = C01;
    CMatrix T = assemble(bt);
    CHECK(op_norm(C * T - T * C) < 1e-8);
  }

  SECTION("explicit rank tolerance gives the same answer") {
    CommutantKernel k2 = injectivity_kernel(bt, 1e-6);
    CHECK(k2.dimension == 2);
  }
}

TEST_CASE("scalar stable block carries the full matrix commutant") {
  CMatrix T00 = Complex(0.3, 0.0) * CMatrix::Identity(2, 2);
  CMatrix T11 = CMatrix::Zero(2, 2);
  T11(0, 0) = std::polar(1.0, 1.0);
  T11(1, 1) = std::polar(1.0, 4.0);
  CMatrix T01(2, 2);
  T01 << Complex(1.0, 0.0), Complex(0.0, 1.0), Complex(-0.5, 0.0), Complex(0.0, 0.0);

  CommutantKernel ker = injectivity_kernel(make_block_triple(T00, T01, T11));
  CHECK(ker.dimension == 4);
}

TEST_CASE("shared eigenvalue moves the kernel into the coupling slot") {
  CMatrix T00(1, 1), T01(1, 1), T11(1, 1);
  T00(0, 0) = Complex(0.5, 0.0);
  T11(0, 0) = Complex(0.5, 0.0);
  T01(0, 0) = Complex(1.0, 0.0);

  CommutantKernel ker = injectivity_kernel(make_block_triple(T00, T01, T11));
  REQUIRE(ker.dimension == 1);
  const auto& [C00, C01] = ker.basis.front();
  CHECK(std::abs(C00(0, 0)) < 1e-10);
  CHECK(std::abs(C01(0, 0)) == Approx(1.0).margin(1e-10));
}

TEST_CASE("vectorized system guards the desk scale") {
  CMatrix T00 = Complex(0.5, 0.0) * CMatrix::Identity(5, 5);
  CMatrix T11 = CMatrix::Identity(9, 9);
  CMatrix T01 = CMatrix::Zero(5, 9);
  CHECK_THROWS_AS(injectivity_kernel(make_block_triple(T00, T01, T11)), std::invalid_argument);
}

TEST_CASE("necessary conditions on a disjoint-spectra triple") {
  CMatrix T00 = CMatrix::Zero(2, 2);
  T00(0, 0) = Complex(0.3, 0.0);
  T00(1, 1) = Complex(0.0, 0.5);
  CMatrix T11 = CMatrix::Zero(2, 2);
  T11(0, 0) = std::polar(1.0, 0.4);
  T11(1, 1) = std::polar(1.0, 2.5);
  CMatrix T01(2, 2);
  T01 << Complex(1.0, 0.0), Complex(0.5, 0.0), Complex(0.25, 0.0), Complex(-1.0, 0.0);

  NecessaryConditions nc = necessary_conditions(make_block_triple(T00, T01, T11));
  CHECK(nc.intertwining_trivial);
  CHECK_FALSE(nc.spectra_meet);
  // Interior eigenvalues of a finite matrix always reappear in the adjoint.
  CHECK_FALSE(nc.point_spectrum_clear);
  CHECK_FALSE(nc.t01_outside_range);
}

TEST_CASE("necessary conditions when the spectra collide") {
  CMatrix T00(1, 1), T11(1, 1), T01(1, 1);
  T00(0, 0) = Complex(0.5, 0.0);
  T11(0, 0) = Complex(0.5, 0.0);

  SECTION("coupling outside the range") {
    T01(0, 0) = Complex(1.0, 0.0);
    NecessaryConditions nc = necessary_conditions(make_block_triple(T00, T01, T11));
    CHECK_FALSE(nc.intertwining_trivial);
    CHECK(nc.spectra_meet);
    CHECK(nc.t01_outside_range);
  }

  SECTION("zero coupling sits in the range") {
    T01(0, 0) = Complex(0.0, 0.0);
    NecessaryConditions nc = necessary_conditions(make_block_triple(T00, T01, T11));
    CHECK(nc.spectra_meet);
    CHECK_FALSE(nc.t01_outside_range);
  }
}

TEST_CASE("peripheral first block is skipped in the adjoint sweep") {
  CMatrix T00(1, 1), T11(1, 1), T01(1, 1);
  T00(0, 0) = std::polar(1.0, 1.0);
  T11(0, 0) = std::polar(1.0, 2.0);
  T01(0, 0) = Complex(0.5, 0.0);

  NecessaryConditions nc = necessary_conditions(make_block_triple(T00, T01, T11));
  CHECK(nc.point_spectrum_clear);
  REQUIRE_FALSE(nc.warnings.empty());
}

TEST_CASE("point spectrum of the block operator") {
  CMatrix T00 = CMatrix::Zero(2, 2);
  T00(0, 0) = Complex(0.3, 0.0);
  T00(1, 1) = Complex(0.0, 0.5);
  CMatrix T11 = CMatrix::Zero(2, 2);
  T11(0, 0) = std::polar(1.0, 0.4);
  T11(1, 1) = std::polar(1.0, 2.5);
  CMatrix T01(2, 2);
  T01 << Complex(1.0, 0.0), Complex(0.5, 0.0), Complex(0.25, 0.0), Complex(-1.0, 0.0);
  BlockTriple bt = make_block_triple(T00, T01, T11);

  SECTION("disk restriction") {
    CHECK_THROWS_AS(point_spectrum_block(bt, Complex(1.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(point_spectrum_block(bt, Complex(0.8, 0.8)), std::invalid_argument);
  }

  SECTION("matches the brute-force rank tests") {
    const Complex probes[] = {Complex(0.3, 0.0),  Complex(0.0, 0.5), Complex(0.0, -0.5),
                              Complex(0.1, 0.1),  Complex(-0.25, 0.0), Complex(0.7, 0.0)};
    CMatrix T = assemble(bt);
    CMatrix I4 = CMatrix::Identity(4, 4);
    for (Complex lambda : probes) {
      auto [fwd, adj] = point_spectrum_block(bt, lambda);
      bool fwd_ref = rank_of(T - lambda * I4) < 4;
      bool adj_ref = rank_of(T.adjoint() - lambda * I4) < 4;
      CHECK(fwd == fwd_ref);
      CHECK(adj == adj_ref);
    }
  }

  SECTION("eigenvalues land where expected") {
    CHECK(point_spectrum_block(bt, Complex(0.3, 0.0)).first);
    CHECK(point_spectrum_block(bt, Complex(0.3, 0.0)).second);
    CHECK(point_spectrum_block(bt, Complex(0.0, -0.5)).second);
    CHECK_FALSE(point_spectrum_block(bt, Complex(0.7, 0.0)).first);
    CHECK_FALSE(point_spectrum_block(bt, Complex(0.7, 0.0)).second);
  }

  SECTION("second-block eigenvalue in the adjoint branch") {
    CMatrix A(1, 1), B(1, 1), C(1, 1);
    A(0, 0) = Complex(0.3, 0.0);
    B(0, 0) = Complex(0.5, 0.0);
    C(0, 0) = Complex(1.0, 0.0);
    auto [fwd, adj] = point_spectrum_block(make_block_triple(A, C, B), Complex(0.5, 0.0));
    CHECK(fwd);
    CHECK(adj);
  }
}

TEST_CASE("jointly disjoint adjoint ranges") {
  CMatrix I2 = CMatrix::Identity(2, 2);

  SECTION("identity swallows every other range") {
    CMatrix B(1, 2);
    B << Complex(1.0, 0.0), Complex(1.0, 0.0);
    CHECK_FALSE(dense_range_disjoint(I2, B));
  }

  SECTION("orthogonal coordinate rows") {
    CMatrix A(1, 2), B(1, 2);
    A << Complex(1.0, 0.0), Complex(0.0, 0.0);
    B << Complex(0.0, 0.0), Complex(1.0, 0.0);
    CHECK(dense_range_disjoint(A, B));
  }

  SECTION("surjectivity is required") {
    CMatrix A = CMatrix::Zero(2, 2);
    A(0, 0) = Complex(1.0, 0.0);
    CMatrix B(1, 2);
    B << Complex(0.0, 0.0), Complex(1.0, 0.0);
    CHECK_FALSE(dense_range_disjoint(A, B));
  }

  SECTION("overlapping rows in three columns") {
    CMatrix A(2, 3), B(1, 3);
    A << Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0),
         Complex(0.0, 0.0), Complex(1.0, 0.0), Complex(0.0, 0.0);
    B << Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(0.0, 0.0);
    CHECK_FALSE(dense_range_disjoint(A, B));
    CMatrix C(1, 3);
    C << Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(1.0, 0.0);
    CHECK(dense_range_disjoint(A, C));
  }

  SECTION("shape validation") {
    CMatrix B(1, 3);
    B << Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0);
    CHECK_THROWS_AS(dense_range_disjoint(I2, B), std::invalid_argument);
  }
}

TEST_CASE("seeded mixed triples always have kernel") {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 25; ++trial) {
    int l = dim(rng);
    int k = dim(rng);
    BlockTriple bt = make_block_triple(random_stable(rng, l), random_matrix(rng, l, k),
                                       random_peripheral_diag(rng, k));
    CAPTURE(trial, l, k);
    REQUIRE(bt.stable_part);
    CommutantKernel ker = injectivity_kernel(bt);
    REQUIRE(ker.dimension >= 1);
    for (const auto& [C00, C01] : ker.basis) {
      CHECK(pair_residual(bt, C00, C01) < 1e-7);
    }
  }
}
