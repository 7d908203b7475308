#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "spectra/binary_matrix.hpp"
#include "spectra/rng.hpp"

namespace spectra {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// M - z I_{rows x cols} for a 0-1 base matrix; I_{rows x cols} has ones at
/// (i,i), i <= min(rows,cols).
struct ShiftedMatrix {
  BinaryMatrix base;
  Complex z{0.0, 0.0};

  ShiftedMatrix() = default;
  ShiftedMatrix(BinaryMatrix b, Complex shift) : base(std::move(b)), z(shift) {}

  Index rows() const { return base.rows(); }
  Index cols() const { return base.cols(); }
  MatrixXcd dense() const;
};

MatrixXcd shifted_dense(const BinaryMatrix& base, Complex z);

/// Full singular spectrum, non-increasing. When vectors are requested, V is
/// the complete cols x cols right-singular basis (kernel directions
/// included, per the padded-zero convention for wide matrices).
struct SingularSpectrum {
  Index rows = 0, cols = 0;
  VectorXd values;  // length min(rows, cols), non-increasing
  MatrixXcd vectors;  // cols x cols when present, else 0 x 0
  double residual_bound = 0.0;

  bool has_vectors() const { return vectors.size() > 0; }
  /// sigma_i with the zero-padding convention; i is 0-based in [0, cols).
  double sigma_ext(Index i) const {
    return i < values.size() ? values[i] : 0.0;
  }
};

/// Maximum dense dimension accepted by the decomposition backends;
/// overridden by the SPARSE_SPECTRA_DENSE_CAP environment variable.
Index dense_cap();

SingularSpectrum singular_spectrum(const MatrixXcd& m, bool want_vectors);
SingularSpectrum singular_spectrum(const ShiftedMatrix& m, bool want_vectors);

/// Exact spectrum update when a row X is appended to M (rows <= cols
/// required). Solves the secular equation whose roots are the squared
/// singular values of [M; X]: each root is bisected inside its
/// pole-separated bracket, with repeated or weightless poles deflated
/// first. The input spectrum must carry the full right-singular basis.
SingularSpectrum secular_append_row(const SingularSpectrum& spec,
                                    const VectorXcd& x_row);

/// Secular characteristic value at squared-sigma point t (test hook):
/// prod_i (s_i^2 - t) + sum_i w_i prod_{j != i} (s_j^2 - t), evaluated in a
/// normalized product form.
double secular_residual(const SingularSpectrum& spec, const VectorXcd& x_row,
                        double root_squared);

struct WindowInequality {
  double lhs = 0.0;        // prod_{i=k}^{l+1} sigma_i(M')
  double rhs = 0.0;        // ||P X*|| (||X||^2 + sigma_{k-1}(M)^2)^{-1/2} prod_{i=k-1}^{l} sigma_i(M)
  double margin = 0.0;     // lhs - rhs
  double log_lhs = 0.0, log_rhs = 0.0;
};

/// Both sides of the row-append window product inequality; indices are
/// 1-based with 1 <= k-1 <= l < cols.
WindowInequality window_product_inequality(const MatrixXcd& m,
                                           const VectorXcd& x_row, Index k,
                                           Index l);

struct Projection {
  double norm = 0.0;
  VectorXcd projected;
};

/// Orthogonal projection of x onto the span of the r smallest right-singular
/// vectors.
Projection bottom_projection(const SingularSpectrum& spec, Index r,
                             const VectorXcd& x);

struct CirculantBound {
  double bound = 0.0;  // |z^s - 1| / (|z|+1)^{s-1}
  double exact = 0.0;  // sigma_s(Y - z I)
  double det_identity_error = 0.0;  // | |det|^2 - |z^s-1|^2 | / max(|z^s-1|^2, eps)
};

/// Least singular value of the s-cycle shift matrix minus z, against the
/// closed-form determinant bound.
CirculantBound circulant_lsv(Index s, Complex z);

struct NormInequalityReport {
  bool interlacing_ok = false;
  double interlacing_worst = 0.0;  // most negative slack seen
  bool weyl_ok = false;
  double weyl_worst = 0.0;
  bool schur_ok = false;
  double schur_slack = 0.0;  // bound - operator norm
};

/// Cauchy interlacing for [M; X] vs M, Weyl perturbation |s_i(M)-s_i(B)| <=
/// ||M-B||, and the Schur bound ||M|| <= sqrt(||M||_{1->1} ||M*||_{1->1}).
NormInequalityReport norm_inequality_suite(const MatrixXcd& m,
                                           const VectorXcd& x_row,
                                           const MatrixXcd& b);

/// Moduli sorted non-increasing with the inducing permutation.
struct Rearrangement {
  std::vector<double> moduli;      // v*_1 >= v*_2 >= ...
  std::vector<Index> permutation;  // moduli[k] = |v[permutation[k]]|
  double star(Index k) const { return moduli.at(k - 1); }  // 1-based v*_k
};
Rearrangement rearrangement(const VectorXcd& v);

/// Largest approximate level set sup_theta #{i : |v_i - theta| <= delta},
/// with theta restricted to {v_i} union {0}; the 2*delta count brackets the
/// unrestricted supremum.
struct LevelSet {
  Index count_delta = 0;
  Index count_2delta = 0;
  Complex theta{0.0, 0.0};
};
LevelSet largest_level_set(const VectorXcd& v, double delta);

struct SpreadnessConstants {
  double c_prime = 0.05;  // C' in the exp(-C' (log n)^7) scales
  double small_c_scale = 0.125;  // c = small_c_scale * e^{-d}
  double kappa = 0.01;
};

struct SpreadnessReport {
  bool has_vector = false;
  double sigma_min = 0.0;
  double residual = 0.0;          // ||(M - zI) v||
  std::vector<double> vstar;      // v*_k at the probed ks
  std::vector<Index> vstar_ks;
  LevelSet level_set;
  double level_delta = 0.0;
  // Lemma-style zero in-degree coordinate bound, checked when the matrix has
  // enough zero rows
  bool zero_rows_applicable = false;
  Index zero_row_count = 0;
  Index small_coord_count = 0;
  Index small_coord_required = 0;
  double small_coord_threshold = 0.0;
  bool zero_row_bound_holds = true;
  SpreadnessConstants constants;
};

/// Profile of the smallest right-singular vector when sigma_min is below
/// tol; empty report (has_vector = false) otherwise.
SpreadnessReport spreadness_probe(const ShiftedMatrix& m, double near_kernel_tol,
                                  double d,
                                  SpreadnessConstants constants = {});

struct BalancedBasis {
  MatrixXcd basis;      // n x k, orthonormal
  double diagnostic = 0.0;  // min_j (b_j)*_{ceil(k/10)} * n / sqrt(k)
};

/// Re-mixes an orthonormal set by Haar-random unitaries, keeping the draw
/// with the best spread diagnostic. Orthonormality is guaranteed; the
/// diagnostic floor is empirical.
BalancedBasis balanced_basis(const MatrixXcd& v, int retries, Rng rng);

struct IterationBound {
  std::int64_t steps = 0;
  double bound = 0.0;
  bool within_bound = false;
};

/// Iterates k <- k + g(k), g(x) = ceil(alpha(x) x / (2^15 (d + log(n/x)))),
/// until k >= n/2; the step count is checked against 2^17 d (log(n/k))^4.
IterationBound iteration_bound(Index n, Index k, double d);

/// Unit-spectral-norm estimate by power iteration on M* M (deterministic
/// start vector).
double spectral_norm_estimate(const MatrixXcd& m, int iters = 30);

}  // namespace spectra
