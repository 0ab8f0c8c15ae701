// Copyright 2026 The envuni Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file   hilbert.hpp
 * @brief  Dense finite-dimensional linear algebra over labeled tensor-product spaces.
 *
 * A CompositeSpace is an ordered list of labeled factors. Basis indices are
 * row-major mixed radix over the factor order: the last factor varies fastest.
 * That ordering is part of the serialized format and never changes.
 *
 * All value types are immutable after construction and safe to share across
 * threads.
 */

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace envuni {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Numerical tolerances in force for a computation. Every report echoes these.
struct Tolerances {
  double norm = 1e-10;    ///< |‖ψ‖ − 1| for normalized states
  double op = 1e-10;      ///< operator identities (projector, unitary, orthogonality)
  double branch = 1e-12;  ///< magnitude below which a condition is absent
  double env = 1e-8;      ///< envariance residuals
  double approx = 1e-9;   ///< matching amplitudes to rational weights
};

enum class ErrorCode {
  invalid_argument,
  label_collision,
  unknown_label,
  space_mismatch,
  dimension_cap,
  invalid_family,
  not_normalized,
  correlation_violated,
  rank_mismatch,
  unequal_coefficients,
  weight_mismatch,
  zero_probability,
  already_recorded,
  cap_exceeded,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Largest dimension of a dense operator or density matrix. Defaults to 4096;
/// the ENVUNI_DIM_CAP environment variable overrides it. State vectors may
/// reach cap² amplitudes, the storage of one capped operator.
std::size_t dimension_cap();

struct FactorSpace {
  std::string label;
  std::size_t dimension = 1;

  friend bool operator==(const FactorSpace&, const FactorSpace&) = default;
};

class CompositeSpace {
 public:
  explicit CompositeSpace(std::vector<FactorSpace> factors);

  static CompositeSpace single(std::string label, std::size_t dimension) {
    return CompositeSpace({FactorSpace{std::move(label), dimension}});
  }

  const std::vector<FactorSpace>& factors() const noexcept { return factors_; }
  std::size_t total_dimension() const noexcept { return total_; }
  std::size_t factor_count() const noexcept { return factors_.size(); }

  bool contains(std::string_view label) const { return find(label).has_value(); }
  std::optional<std::size_t> find(std::string_view label) const;
  /// Position of a factor; throws unknown_label.
  std::size_t position(std::string_view label) const;

  std::vector<std::size_t> digits(std::size_t index) const;
  std::size_t index(std::span<const std::size_t> digits) const;

  /// Sub-composite made of the named factors, in the given order.
  CompositeSpace restrict_to(std::span<const std::string> labels) const;

  std::vector<std::string> labels() const;

  friend bool operator==(const CompositeSpace&, const CompositeSpace&) = default;

 private:
  std::vector<FactorSpace> factors_;
  std::size_t total_ = 1;
};

class StateVector {
 public:
  StateVector(CompositeSpace space, Vector amplitudes);

  static StateVector zero(const CompositeSpace& space);
  static StateVector basis(const CompositeSpace& space, std::size_t index);
  static StateVector basis(const CompositeSpace& space, std::span<const std::size_t> digits);

  const CompositeSpace& space() const noexcept { return space_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }
  std::size_t dimension() const noexcept { return space_.total_dimension(); }

  double norm() const { return amplitudes_.norm(); }
  bool is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }
  /// Throws invalid_argument on a zero vector.
  StateVector normalized() const;
  StateVector scaled(Complex factor) const { return {space_, amplitudes_ * factor}; }

  friend StateVector operator+(const StateVector& a, const StateVector& b);
  friend StateVector operator-(const StateVector& a, const StateVector& b);

 private:
  CompositeSpace space_;
  Vector amplitudes_;
};

class LinearOperator {
 public:
  LinearOperator(CompositeSpace space, Matrix matrix);

  static LinearOperator identity(const CompositeSpace& space);
  static LinearOperator zero(const CompositeSpace& space);
  /// |ket⟩⟨bra|
  static LinearOperator outer(const StateVector& ket, const StateVector& bra);

  const CompositeSpace& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return matrix_; }

  LinearOperator adjoint() const { return {space_, matrix_.adjoint()}; }
  LinearOperator scaled(Complex factor) const { return {space_, matrix_ * factor}; }

  bool is_projector(double tol) const;
  bool is_unitary(double tol) const;
  bool is_hermitian(double tol) const;

  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator+(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b);

 private:
  CompositeSpace space_;
  Matrix matrix_;
};

class DensityMatrix {
 public:
  DensityMatrix(CompositeSpace space, Matrix matrix);

  static DensityMatrix pure(const StateVector& state);

  const CompositeSpace& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return matrix_; }

  Complex trace() const { return matrix_.trace(); }
  double purity() const;
  double min_eigenvalue() const;
  /// Tr(ρ A) for an operator on the same space.
  Complex expectation(const LinearOperator& op) const;
  /// Trace one, Hermitian, and eigenvalues ≥ −tol.
  bool is_valid(double tol) const;

 private:
  CompositeSpace space_;
  Matrix matrix_;
};

/// Largest absolute entry. Used as the residual norm for operator identities.
double max_abs(const Matrix& m);

/// Makes the first component with |c| > tol real and positive.
Vector canonical_phase(const Vector& v, double tol);

StateVector tensor(const StateVector& a, const StateVector& b);
LinearOperator tensor(const LinearOperator& a, const LinearOperator& b);

Complex inner(const StateVector& a, const StateVector& b);

StateVector apply(const LinearOperator& op, const StateVector& s);

/// Embeds an operator on a sub-composite (one or more factors) into `space`,
/// acting as identity on the remaining factors.
LinearOperator lift(const LinearOperator& op, const CompositeSpace& space);

/// Same as apply(lift(op, s.space()), s) without materializing the lifted matrix.
StateVector apply_local(const LinearOperator& op, const StateVector& s);

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);

/// partial_trace(pure(s), keep), computed directly from the amplitudes.
DensityMatrix reduced_density(const StateVector& s, std::span<const std::string> keep);

/// Orthonormal basis for the range of a projector, via Gram-Schmidt over its
/// columns in index order. For diagonal partitions this is the basis states
/// in increasing index order.
std::vector<Vector> range_basis(const Matrix& projector, double tol);

}  // namespace envuni
