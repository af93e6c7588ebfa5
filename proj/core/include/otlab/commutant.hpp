#pragma once

#include "otlab/matkernel.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace otlab {

// Upper-triangular block operator [[T00, T01], [0, T11]] on C^l (+) C^k.
// stable_part means r(T00) < 1 with T11 power bounded and purely peripheral.
struct BlockTriple {
  CMatrix T00;  // l x l
  CMatrix T01;  // l x k
  CMatrix T11;  // k x k
  bool contraction = false;
  bool stable_part = false;
};

BlockTriple make_block_triple(CMatrix T00, CMatrix T01, CMatrix T11);
CMatrix assemble(const BlockTriple& bt);

struct CommutantKernel {
  int dimension = 0;
  // Pairs (C00, C01): C00 commutes with T00 and T00 C01 - C01 T11 = C00 T01.
  // Each corresponds to C = [[C00, C01], [0, 0]] in the commutant with range
  // inside the first summand.
  std::vector<std::pair<CMatrix, CMatrix>> basis;
  double singular_gap = 0.0;  // smallest kept / largest dropped singular value
  std::vector<std::string> warnings;
};

// Null space of the linear system characterizing commutant elements whose
// range lies in the stable summand. dimension > 0 certifies that the canonical
// commutant mapping has nontrivial kernel. rank_tol < 0: kRankTolScale * scale.
CommutantKernel injectivity_kernel(const BlockTriple& bt, double rank_tol = -1.0);

struct NecessaryConditions {
  bool intertwining_trivial = false;   // only Y = 0 solves T11 Y = Y T00
  bool spectra_meet = false;           // sigma(T00) meets sigma(T11) within the threshold
  bool point_spectrum_clear = false;   // no lambda in sigma(T00) lies in conj point spectrum of T*
  bool t01_outside_range = false;      // T01 not in ran(Y -> T00 Y - Y T11)
  std::vector<std::string> warnings;   // indeterminate closeness notes
};

// Spectra closer than kSpectraDisjointTol are flagged indeterminate rather
// than silently decided.
inline constexpr double kSpectraDisjointTol = 1e-6;

NecessaryConditions necessary_conditions(const BlockTriple& bt);

// (lambda in point spectrum of T, lambda in point spectrum of T*), |lambda| < 1.
// The adjoint test follows the block characterization: lambda in sigma_p(T11*),
// or some x in ker(T00* - lambda) has T01* x in ran(T11* - lambda).
std::pair<bool, bool> point_spectrum_block(const BlockTriple& bt, Complex lambda,
                                           double tol = 1e-8);

// Both matrices surjective with ran A* and ran B* intersecting only in 0;
// then Y A = Z B forces Y = Z = 0 for the associated triple.
bool dense_range_disjoint(const CMatrix& A, const CMatrix& B);

}  // namespace otlab
