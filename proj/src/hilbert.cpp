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

#include "envuni/hilbert.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace envuni {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::label_collision: return "label collision";
    case ErrorCode::unknown_label: return "unknown label";
    case ErrorCode::space_mismatch: return "space mismatch";
    case ErrorCode::dimension_cap: return "dimension cap exceeded";
    case ErrorCode::invalid_family: return "invalid family";
    case ErrorCode::not_normalized: return "not normalized";
    case ErrorCode::correlation_violated: return "correlation violated";
    case ErrorCode::rank_mismatch: return "rank mismatch";
    case ErrorCode::unequal_coefficients: return "unequal coefficients";
    case ErrorCode::weight_mismatch: return "weight mismatch";
    case ErrorCode::zero_probability: return "zero probability";
    case ErrorCode::already_recorded: return "already recorded";
    case ErrorCode::cap_exceeded: return "enumeration cap exceeded";
  }
  return "unknown error";
}

std::size_t dimension_cap() {
  constexpr std::size_t kDefaultCap = 4096;
  const char* env = std::getenv("ENVUNI_DIM_CAP");
  if (env == nullptr || *env == '\0') return kDefaultCap;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || value == 0) return kDefaultCap;
  return static_cast<std::size_t>(value);
}

namespace {

void require_operator_cap(const CompositeSpace& space) {
  const std::size_t cap = dimension_cap();
  if (space.total_dimension() > cap)
    throw Error(ErrorCode::dimension_cap, "dense operator of dimension " + std::to_string(space.total_dimension()) +
                                              " exceeds cap " + std::to_string(cap) + " (set ENVUNI_DIM_CAP)");
}

void require_state_cap(const CompositeSpace& space) {
  const std::size_t cap = dimension_cap();
  if (space.total_dimension() / cap > cap)
    throw Error(ErrorCode::dimension_cap, "state of dimension " + std::to_string(space.total_dimension()) +
                                              " exceeds cap^2 for cap " + std::to_string(cap) + " (set ENVUNI_DIM_CAP)");
}

}  // namespace

// ---------------------------------------------------------------------------
// CompositeSpace

CompositeSpace::CompositeSpace(std::vector<FactorSpace> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw Error(ErrorCode::invalid_argument, "composite space needs at least one factor");
  // Hard ceiling against index overflow; the configurable cap is enforced by
  // the dense value types.
  constexpr std::size_t kIndexCeiling = std::size_t{1} << 40;
  std::set<std::string_view> seen;
  for (const auto& f : factors_) {
    if (f.label.empty()) throw Error(ErrorCode::invalid_argument, "factor label must be nonempty");
    if (f.dimension < 1) throw Error(ErrorCode::invalid_argument, "factor '" + f.label + "' has dimension 0");
    if (!seen.insert(f.label).second) throw Error(ErrorCode::label_collision, "duplicate factor label '" + f.label + "'");
    if (total_ > kIndexCeiling / f.dimension)
      throw Error(ErrorCode::dimension_cap, "total dimension overflows the index range");
    total_ *= f.dimension;
  }
}

std::optional<std::size_t> CompositeSpace::find(std::string_view label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label == label) return i;
  return std::nullopt;
}

std::size_t CompositeSpace::position(std::string_view label) const {
  if (auto p = find(label)) return *p;
  throw Error(ErrorCode::unknown_label, "unknown factor label '" + std::string(label) + "'");
}

std::vector<std::size_t> CompositeSpace::digits(std::size_t index) const {
  std::vector<std::size_t> out(factors_.size());
  for (std::size_t k = factors_.size(); k-- > 0;) {
    out[k] = index % factors_[k].dimension;
    index /= factors_[k].dimension;
  }
  return out;
}

std::size_t CompositeSpace::index(std::span<const std::size_t> digits) const {
  if (digits.size() != factors_.size()) throw Error(ErrorCode::invalid_argument, "digit count does not match factor count");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (digits[k] >= factors_[k].dimension) throw Error(ErrorCode::invalid_argument, "digit out of range");
    idx = idx * factors_[k].dimension + digits[k];
  }
  return idx;
}

CompositeSpace CompositeSpace::restrict_to(std::span<const std::string> labels) const {
  std::vector<FactorSpace> sub;
  sub.reserve(labels.size());
  for (const auto& l : labels) sub.push_back(factors_[position(l)]);
  return CompositeSpace(std::move(sub));
}

std::vector<std::string> CompositeSpace::labels() const {
  std::vector<std::string> out;
  out.reserve(factors_.size());
  for (const auto& f : factors_) out.push_back(f.label);
  return out;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(CompositeSpace space, Vector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  require_state_cap(space_);
  if (static_cast<std::size_t>(amplitudes_.size()) != space_.total_dimension())
    throw Error(ErrorCode::space_mismatch, "amplitude count does not match space dimension");
}

StateVector StateVector::zero(const CompositeSpace& space) {
  require_state_cap(space);
  return {space, Vector::Zero(static_cast<Eigen::Index>(space.total_dimension()))};
}

StateVector StateVector::basis(const CompositeSpace& space, std::size_t index) {
  require_state_cap(space);
  if (index >= space.total_dimension()) throw Error(ErrorCode::invalid_argument, "basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space.total_dimension()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return {space, std::move(v)};
}

StateVector StateVector::basis(const CompositeSpace& space, std::span<const std::size_t> digits) {
  return basis(space, space.index(digits));
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw Error(ErrorCode::invalid_argument, "cannot normalize a zero vector");
  return {space_, amplitudes_ / n};
}

StateVector operator+(const StateVector& a, const StateVector& b) {
  if (a.space_ != b.space_) throw Error(ErrorCode::space_mismatch, "adding states on different spaces");
  return {a.space_, a.amplitudes_ + b.amplitudes_};
}

StateVector operator-(const StateVector& a, const StateVector& b) {
  if (a.space_ != b.space_) throw Error(ErrorCode::space_mismatch, "subtracting states on different spaces");
  return {a.space_, a.amplitudes_ - b.amplitudes_};
}

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(CompositeSpace space, Matrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  require_operator_cap(space_);
  const auto n = static_cast<Eigen::Index>(space_.total_dimension());
  if (matrix_.rows() != n || matrix_.cols() != n)
    throw Error(ErrorCode::space_mismatch, "operator shape does not match space dimension");
}

LinearOperator LinearOperator::identity(const CompositeSpace& space) {
  require_operator_cap(space);
  const auto n = static_cast<Eigen::Index>(space.total_dimension());
  return {space, Matrix::Identity(n, n)};
}

LinearOperator LinearOperator::zero(const CompositeSpace& space) {
  require_operator_cap(space);
  const auto n = static_cast<Eigen::Index>(space.total_dimension());
  return {space, Matrix::Zero(n, n)};
}

LinearOperator LinearOperator::outer(const StateVector& ket, const StateVector& bra) {
  if (ket.space() != bra.space()) throw Error(ErrorCode::space_mismatch, "outer product across spaces");
  return {ket.space(), ket.amplitudes() * bra.amplitudes().adjoint()};
}

bool LinearOperator::is_projector(double tol) const {
  return max_abs(matrix_ * matrix_ - matrix_) <= tol && is_hermitian(tol);
}

bool LinearOperator::is_unitary(double tol) const {
  const auto n = matrix_.rows();
  return max_abs(matrix_.adjoint() * matrix_ - Matrix::Identity(n, n)) <= tol;
}

bool LinearOperator::is_hermitian(double tol) const { return max_abs(matrix_.adjoint() - matrix_) <= tol; }

LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
  if (a.space_ != b.space_) throw Error(ErrorCode::space_mismatch, "composing operators on different spaces");
  return {a.space_, a.matrix_ * b.matrix_};
}

LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
  if (a.space_ != b.space_) throw Error(ErrorCode::space_mismatch, "adding operators on different spaces");
  return {a.space_, a.matrix_ + b.matrix_};
}

LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
  if (a.space_ != b.space_) throw Error(ErrorCode::space_mismatch, "subtracting operators on different spaces");
  return {a.space_, a.matrix_ - b.matrix_};
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(CompositeSpace space, Matrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  require_operator_cap(space_);
  const auto n = static_cast<Eigen::Index>(space_.total_dimension());
  if (matrix_.rows() != n || matrix_.cols() != n)
    throw Error(ErrorCode::space_mismatch, "density matrix shape does not match space dimension");
}

DensityMatrix DensityMatrix::pure(const StateVector& state) {
  return {state.space(), state.amplitudes() * state.amplitudes().adjoint()};
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Complex DensityMatrix::expectation(const LinearOperator& op) const {
  if (op.space() != space_) throw Error(ErrorCode::space_mismatch, "expectation of operator on a different space");
  return (matrix_ * op.matrix()).trace();
}

bool DensityMatrix::is_valid(double tol) const {
  if (std::abs(trace() - Complex(1.0, 0.0)) > tol) return false;
  if (max_abs(matrix_.adjoint() - matrix_) > tol) return false;
  return min_eigenvalue() >= -tol;
}

// ---------------------------------------------------------------------------
// free functions

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : std::sqrt(m.cwiseAbs2().maxCoeff()); }

Vector canonical_phase(const Vector& v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > tol) return v * (std::conj(v(i)) / mag);
  }
  return v;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<FactorSpace> factors = a.space().factors();
  factors.insert(factors.end(), b.space().factors().begin(), b.space().factors().end());
  CompositeSpace space(std::move(factors));
  const auto nb = b.amplitudes().size();
  Vector out(a.amplitudes().size() * nb);
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i)
    out.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();
  return {std::move(space), std::move(out)};
}

LinearOperator tensor(const LinearOperator& a, const LinearOperator& b) {
  std::vector<FactorSpace> factors = a.space().factors();
  factors.insert(factors.end(), b.space().factors().begin(), b.space().factors().end());
  CompositeSpace space(std::move(factors));
  require_operator_cap(space);
  const auto na = a.matrix().rows();
  const auto nb = b.matrix().rows();
  Matrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
  return {std::move(space), std::move(out)};
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.space() != b.space()) throw Error(ErrorCode::space_mismatch, "inner product across spaces");
  return a.amplitudes().dot(b.amplitudes());  // Eigen's dot conjugates the left operand
}

StateVector apply(const LinearOperator& op, const StateVector& s) {
  if (op.space() != s.space()) throw Error(ErrorCode::space_mismatch, "operator and state live on different spaces");
  return {s.space(), op.matrix() * s.amplitudes()};
}

namespace {

// Splits a full basis index into (sub index, rest index) for a sub-composite:
// full = sub_offset[sub] + rest_offset[rest], with the rest factors enumerated
// in full-space order.
class FactorSplit {
 public:
  FactorSplit(const CompositeSpace& full, const CompositeSpace& sub) {
    const auto& ff = full.factors();
    std::vector<std::size_t> stride(ff.size(), 1);
    for (std::size_t k = ff.size(); k-- > 1;) stride[k - 1] = stride[k] * ff[k].dimension;

    std::vector<bool> in_sub(ff.size(), false);
    std::vector<std::size_t> sub_pos;
    for (const auto& f : sub.factors()) {
      const std::size_t p = full.position(f.label);
      if (ff[p].dimension != f.dimension)
        throw Error(ErrorCode::space_mismatch, "factor '" + f.label + "' has a different dimension in the full space");
      sub_pos.push_back(p);
      in_sub[p] = true;
    }
    std::vector<std::size_t> rest_pos;
    for (std::size_t k = 0; k < ff.size(); ++k)
      if (!in_sub[k]) rest_pos.push_back(k);

    sub_offset_ = offsets(ff, stride, sub_pos);
    rest_offset_ = offsets(ff, stride, rest_pos);
  }

  std::size_t sub_dim() const { return sub_offset_.size(); }
  std::size_t rest_dim() const { return rest_offset_.size(); }
  Eigen::Index full_index(std::size_t sub, std::size_t rest) const {
    return static_cast<Eigen::Index>(sub_offset_[sub] + rest_offset_[rest]);
  }

 private:
  // Offsets of the mixed-radix enumeration over the given factor positions.
  static std::vector<std::size_t> offsets(const std::vector<FactorSpace>& ff, const std::vector<std::size_t>& stride,
                                          const std::vector<std::size_t>& pos) {
    std::vector<std::size_t> out{0};
    for (auto p : pos) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * ff[p].dimension);
      for (auto base : out)
        for (std::size_t d = 0; d < ff[p].dimension; ++d) next.push_back(base + d * stride[p]);
      out = std::move(next);
    }
    return out;
  }

  std::vector<std::size_t> sub_offset_;
  std::vector<std::size_t> rest_offset_;
};

std::vector<std::string> checked_keep(const CompositeSpace& space, std::span<const std::string> keep) {
  if (keep.empty()) throw Error(ErrorCode::invalid_argument, "partial trace needs a nonempty keep set");
  std::vector<std::string> labels(keep.begin(), keep.end());
  for (const auto& l : labels) space.position(l);
  return labels;
}

}  // namespace

LinearOperator lift(const LinearOperator& op, const CompositeSpace& space) {
  require_operator_cap(space);
  const FactorSplit split(space, op.space());
  const auto n = static_cast<Eigen::Index>(space.total_dimension());
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t r = 0; r < split.rest_dim(); ++r)
    for (std::size_t a = 0; a < split.sub_dim(); ++a)
      for (std::size_t b = 0; b < split.sub_dim(); ++b)
        out(split.full_index(a, r), split.full_index(b, r)) =
            op.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return {space, std::move(out)};
}

StateVector apply_local(const LinearOperator& op, const StateVector& s) {
  const FactorSplit split(s.space(), op.space());
  const auto d = static_cast<Eigen::Index>(split.sub_dim());
  Vector out = Vector::Zero(s.amplitudes().size());

  // Sparse local operators (projectors of pointer-like families) skip the
  // dense product entirely.
  struct Entry {
    std::size_t row, col;
    Complex value;
  };
  std::vector<Entry> entries;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      if (const Complex v = op.matrix()(i, j); v != Complex{})
        entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), v});
  if (4 * entries.size() < static_cast<std::size_t>(d * d)) {
    for (std::size_t r = 0; r < split.rest_dim(); ++r)
      for (const auto& e : entries) out(split.full_index(e.row, r)) += e.value * s.amplitudes()(split.full_index(e.col, r));
    return {s.space(), std::move(out)};
  }

  Vector local(d);
  for (std::size_t r = 0; r < split.rest_dim(); ++r) {
    bool any = false;
    for (Eigen::Index a = 0; a < d; ++a) {
      local(a) = s.amplitudes()(split.full_index(static_cast<std::size_t>(a), r));
      any = any || local(a) != Complex{};
    }
    if (!any) continue;
    const Vector mapped = op.matrix() * local;
    for (Eigen::Index a = 0; a < d; ++a) out(split.full_index(static_cast<std::size_t>(a), r)) = mapped(a);
  }
  return {s.space(), std::move(out)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  const auto labels = checked_keep(rho.space(), keep);
  CompositeSpace sub = rho.space().restrict_to(labels);
  const FactorSplit split(rho.space(), sub);
  const auto d = static_cast<Eigen::Index>(split.sub_dim());
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t r = 0; r < split.rest_dim(); ++r)
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b)
        out(a, b) += rho.matrix()(split.full_index(static_cast<std::size_t>(a), r),
                                  split.full_index(static_cast<std::size_t>(b), r));
  return {std::move(sub), std::move(out)};
}

DensityMatrix reduced_density(const StateVector& s, std::span<const std::string> keep) {
  const auto labels = checked_keep(s.space(), keep);
  CompositeSpace sub = s.space().restrict_to(labels);
  const FactorSplit split(s.space(), sub);
  const auto d = static_cast<Eigen::Index>(split.sub_dim());
  // Column r holds the sub-amplitudes for rest index r; ρ = A A†.
  Matrix a(d, static_cast<Eigen::Index>(split.rest_dim()));
  for (std::size_t r = 0; r < split.rest_dim(); ++r)
    for (Eigen::Index i = 0; i < d; ++i)
      a(i, static_cast<Eigen::Index>(r)) = s.amplitudes()(split.full_index(static_cast<std::size_t>(i), r));
  return {std::move(sub), a * a.adjoint()};
}

std::vector<Vector> range_basis(const Matrix& projector, double tol) {
  std::vector<Vector> basis;
  const double cutoff = std::sqrt(tol);
  for (Eigen::Index j = 0; j < projector.cols(); ++j) {
    // Orthogonalization only shrinks a column, so short ones can be skipped.
    if (projector.col(j).norm() <= cutoff) continue;
    Vector v = projector.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b * b.dot(v);
    const double n = v.norm();
    if (n > cutoff) basis.push_back(canonical_phase(v / n, tol));
  }
  return basis;
}

}  // namespace envuni
