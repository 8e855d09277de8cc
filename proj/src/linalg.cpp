#include "pbt/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace pbt {

double max_abs(const CMat& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(m(i, j)));
  return best;
}

double max_abs(const RMat& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(m(i, j)));
  return best;
}

double frob_norm(const CMat& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) acc += std::norm(m(i, j));
  return std::sqrt(acc);
}

double frob_norm(const RMat& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * m(i, j);
  return std::sqrt(acc);
}

double max_abs_diff(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("max_abs_diff: shape mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) best = std::max(best, std::abs(a(i, j) - b(i, j)));
  return best;
}

double max_abs_diff(const RMat& a, const RMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("max_abs_diff: shape mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) best = std::max(best, std::abs(a(i, j) - b(i, j)));
  return best;
}

double hermiticity_defect(const CMat& m) {
  if (!m.square()) throw ValidationError("hermiticity_defect: matrix must be square");
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j)
      best = std::max(best, std::abs(m(i, j) - std::conj(m(j, i))));
  return best;
}

CMat dagger(const CMat& m) {
  CMat out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
  return out;
}

RMat transpose(const RMat& m) {
  RMat out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

CMat to_complex(const RMat& m) {
  CMat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = cplx(m(i, j), 0.0);
  return out;
}

RMat real_part(const CMat& m) {
  RMat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).real();
  return out;
}

double max_imag(const CMat& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(m(i, j).imag()));
  return best;
}

TensorSpace::TensorSpace(std::vector<std::string> labels, std::vector<int> dims)
    : labels_(std::move(labels)), dims_(std::move(dims)) {
  if (labels_.size() != dims_.size())
    throw ValidationError("tensor space: label/dimension count mismatch");
  for (int d : dims_)
    if (d < 1) throw ValidationError("tensor space: dimensions must be positive");
  for (std::size_t i = 0; i < labels_.size(); ++i)
    for (std::size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j]) throw ValidationError("tensor space: duplicate label");
}

TensorSpace TensorSpace::ports(int n_ports, int qudit_dim) {
  if (n_ports < 1) throw ValidationError("need at least one port");
  if (qudit_dim < 2) throw ValidationError("qudit dimension must be at least 2");
  std::vector<std::string> labels;
  std::vector<int> dims;
  for (int i = 1; i <= n_ports; ++i) {
    labels.push_back("A" + std::to_string(i));
    dims.push_back(qudit_dim);
  }
  labels.push_back("B");
  dims.push_back(qudit_dim);
  return TensorSpace(std::move(labels), std::move(dims));
}

std::size_t TensorSpace::dim() const {
  std::size_t p = 1;
  for (int d : dims_) p *= static_cast<std::size_t>(d);
  return p;
}

std::size_t TensorSpace::factor(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  throw ValidationError("tensor space: no factor labeled '" + label + "'");
}

HermitianOperator::HermitianOperator(CMat m_, TensorSpace space_)
    : m(std::move(m_)), space(std::move(space_)) {
  if (!m.square() || m.rows() != space.dim())
    throw ValidationError("hermitian operator: shape does not match space");
  if (hermiticity_defect(m) > 1e-10 * std::max(1.0, max_abs(m)))
    throw ValidationError("hermitian operator: hermiticity defect too large");
}

CMat HermitianOperator::partial_trace_keep(const std::vector<std::string>& keep_labels) const {
  std::vector<int> keep;
  for (const auto& l : keep_labels) keep.push_back(static_cast<int>(space.factor(l)));
  std::sort(keep.begin(), keep.end());
  return partial_trace(m, space.dims(), keep);
}

double state_fidelity(const CMat& r, const CMat& s) {
  if (!r.square() || r.rows() != s.rows() || !s.square())
    throw ValidationError("state_fidelity: shape mismatch");
  CMat rs = sqrt_psd(r, 1e-8);
  CMat inner = matmul(matmul(rs, s), rs);
  EigenDecomposition e = eigh(inner);
  // rank-deficient products put rounding dust where exact zeros belong; its
  // square root would swamp the answer, so drop eigenvalues at noise scale
  const double floor = 1e-13 * std::max(e.eigenvalues.back(), 0.0);
  double acc = 0.0;
  for (double lam : e.eigenvalues)
    if (lam > floor) acc += std::sqrt(lam);
  return acc * acc;
}

}  // namespace pbt
