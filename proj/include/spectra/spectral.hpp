#pragma once

#include <complex>
#include <vector>

#include "spectra/binary_matrix.hpp"
#include "spectra/rng.hpp"
#include "spectra/sv.hpp"

namespace spectra {

/// Equal-weight point masses on R or C.
struct EmpiricalMeasure {
  enum class Dim { kReal, kComplex } dim = Dim::kReal;
  std::vector<Complex> points;  // imaginary parts zero when dim == kReal

  static EmpiricalMeasure real(std::vector<double> xs);
  static EmpiricalMeasure complex_points(std::vector<Complex> zs);
  double weight() const { return points.empty() ? 0.0 : 1.0 / points.size(); }
};

/// All eigenvalues of a square 0-1 matrix. The matrix is permuted to block
/// triangular form along its strongly connected components first, so the
/// nilpotent structure between components contributes exact zeros instead
/// of a defect cloud; each diagonal block is handled by a dense Schur
/// solve.
EmpiricalMeasure eigen_spectrum(const BinaryMatrix& m);

struct LogPotential {
  double value = 0.0;        // -(1/n) sum log sigma_j(M - zI)
  double det_form = 0.0;     // -(1/n) log|det(M - zI)| via LU
  bool singular = false;     // z within 1e-12 of the spectrum
};
LogPotential log_potential(const BinaryMatrix& m, Complex z);

/// (1/n) Tr prod_i M^(s_i), s_i = +1 for M and -1 for M^dagger, evaluated
/// by sparse matrix-vector chains (powers are never densified). r <= 20.
double trace_moment(const BinaryMatrix& m, const std::vector<int>& signs);

/// (1/n) sum_i sigma_i(M - zI)^(2r) for r = 1..r_max via sparse powers of
/// the Gram matrix (Frobenius pairings; nothing is densified).
std::vector<double> shifted_gram_moments(const BinaryMatrix& m, Complex z,
                                         int r_max);

struct RotationalReport {
  std::vector<double> mean_diff;  // per r = 1..r_max
  std::vector<double> std_err;
  std::vector<double> band;       // 10 n^{-1/3}
  bool within_band = false;       // all r <= r_max against the band
  // same check restricted to r <= log log n, the range the moment lemma
  // actually covers; beyond it the constant absorbed in the asymptotic
  // bound grows exponentially in r (the top singular edge reacts to Re z)
  bool within_band_lemma_range = false;
  int lemma_r_max = 0;
  int trials = 0;
};

/// Paired Monte Carlo estimate of (1/n) sum sigma(B-zI)^{2r} minus the same
/// at the rotated shift |z|; asserts the mean difference sits inside
/// 10 n^{-1/3} plus 3 standard errors.
RotationalReport rotational_probe(Index n, double d, Complex z, int r_max,
                                  int trials, std::uint64_t seed);

struct SublevelArea {
  double tau = 0.0;
  double area = 0.0;       // Lebesgue measure estimate of S_tau
  double log_area = 0.0;   // log of the estimate (-inf when 0)
  std::int64_t grid_hits = 0;
};

/// Area of S_tau = { z : prod |lambda_i - z| <= exp(-tau n) } inside the
/// disk of the given radius. A uniform grid captures the bulk; log-radial
/// importance samples around each eigenvalue cluster resolve the
/// exponentially small components that the grid cannot see.
SublevelArea sublevel_area(const EmpiricalMeasure& eigs, double tau,
                           Index grid, double radius, Rng rng,
                           std::int64_t samples_per_center = 400);

/// Kolmogorov distance of CDFs in 1D; max over a fixed dictionary of 64
/// bounded-Lipschitz test functions (Gaussian bumps on an 8x8 grid) in 2D.
double measure_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

struct NonatomicStat {
  bool event = false;       // sigma_{ceil((1-gamma)m)} <= tau
  double sigma_at_index = 0.0;
  double tail_integral = 0.0;  // int_{|log u| >= T} |log u| dnu
  double t_threshold = 0.0;
};

/// Per-matrix statistics for the non-atomicity probe; T defaults to
/// log(1/tau).
NonatomicStat nonatomic_stat(const BinaryMatrix& m, Complex z, double gamma,
                             double tau);

}  // namespace spectra
