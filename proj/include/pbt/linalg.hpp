#pragma once

#include "pbt/eigh.hpp"
#include "pbt/kernels.hpp"
#include "pbt/mat.hpp"
#include "pbt/tensor_space.hpp"

namespace pbt {

// A square matrix tied to a factor layout. Construction validates shape and
// hermiticity (defect <= 1e-10 relative to the largest entry).
struct HermitianOperator {
  CMat m;
  TensorSpace space;

  HermitianOperator() = default;
  HermitianOperator(CMat m_, TensorSpace space_);

  CMat partial_trace_keep(const std::vector<std::string>& keep_labels) const;
  EigenDecomposition eig() const { return eigh(m); }
};

// Uhlmann fidelity (tr sqrt(sqrt(r) s sqrt(r)))^2 for density matrices.
double state_fidelity(const CMat& r, const CMat& s);

}  // namespace pbt
