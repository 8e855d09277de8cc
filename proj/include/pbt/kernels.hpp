#pragma once

#include <vector>

#include "pbt/mat.hpp"

// Dense tensor-network kernels. The default entry points are OpenMP-parallel;
// pbt::ref holds serial reference implementations used by the tests and the
// benchmark. Both variants produce bit-identical output for any thread count:
// every output entry is owned by exactly one task and inner reduction order
// is fixed.
namespace pbt {

CMat matmul(const CMat& a, const CMat& b);
RMat matmul(const RMat& a, const RMat& b);
CMat kron(const CMat& a, const CMat& b);
RMat kron(const RMat& a, const RMat& b);

// Trace out every factor not in `keep` (indices into dims, ascending).
// Output factor order is the original order of the kept factors.
CMat partial_trace(const CMat& m, const std::vector<int>& dims, const std::vector<int>& keep);

// Reorder tensor factors. perm[k] = old index of the factor placed at k.
CMat permute_factors(const CMat& m, const std::vector<int>& dims, const std::vector<int>& perm);

// op lives on the listed factors (in listed order); returns op (x) identity
// arranged on the full space described by dims.
CMat embed(const CMat& op, const std::vector<int>& dims, const std::vector<int>& factors);

// (op (x) 1) * m without forming the embedded operator. `dims` describes the
// row space of m; m may have any number of columns.
CMat apply_left(const CMat& op, const std::vector<int>& factors, const CMat& m,
                const std::vector<int>& dims);
// m * (op (x) 1); `dims` describes the column space of m.
CMat apply_right(const CMat& m, const CMat& op, const std::vector<int>& factors,
                 const std::vector<int>& dims);
// (op (x) 1) m (op^dag (x) 1) for square m on `dims`.
CMat conjugate_on_factors(const CMat& op, const std::vector<int>& factors, const CMat& m,
                          const std::vector<int>& dims);

// Re(tr(a*b)) without forming the product.
double trace_of_product_real(const CMat& a, const CMat& b);

namespace ref {
CMat matmul(const CMat& a, const CMat& b);
RMat matmul(const RMat& a, const RMat& b);
CMat kron(const CMat& a, const CMat& b);
CMat partial_trace(const CMat& m, const std::vector<int>& dims, const std::vector<int>& keep);
CMat permute_factors(const CMat& m, const std::vector<int>& dims, const std::vector<int>& perm);
CMat apply_left(const CMat& op, const std::vector<int>& factors, const CMat& m,
                const std::vector<int>& dims);
}  // namespace ref

}  // namespace pbt
