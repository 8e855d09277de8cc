#include "pbt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pbt {

namespace {

std::size_t dims_product(const std::vector<int>& dims) {
  std::size_t p = 1;
  for (int d : dims) {
    if (d < 1) throw ValidationError("factor dimensions must be positive");
    p *= static_cast<std::size_t>(d);
  }
  return p;
}

void check_square_on(const CMat& m, const std::vector<int>& dims) {
  if (!m.square() || m.rows() != dims_product(dims))
    throw ValidationError("matrix shape does not match factor dimensions");
}

void check_factors(const std::vector<int>& dims, const std::vector<int>& facs,
                   bool require_sorted) {
  std::vector<char> seen(dims.size(), 0);
  int prev = -1;
  for (int f : facs) {
    if (f < 0 || static_cast<std::size_t>(f) >= dims.size())
      throw ValidationError("factor index out of range");
    if (seen[f]) throw ValidationError("repeated factor index");
    if (require_sorted && f <= prev) throw ValidationError("factor indices must be ascending");
    seen[f] = 1;
    prev = f;
  }
}

std::vector<int> complement(const std::vector<int>& dims, const std::vector<int>& facs) {
  std::vector<char> in(dims.size(), 0);
  for (int f : facs) in[f] = 1;
  std::vector<int> rest;
  for (std::size_t f = 0; f < dims.size(); ++f)
    if (!in[f]) rest.push_back(static_cast<int>(f));
  return rest;
}

// Composite-index contribution of each linear index over the listed factors
// (listed order, first factor most significant).
std::vector<std::size_t> contribs(const std::vector<int>& dims, const std::vector<int>& facs) {
  std::vector<std::size_t> stride(dims.size(), 1);
  for (int f = static_cast<int>(dims.size()) - 2; f >= 0; --f)
    stride[f] = stride[f + 1] * static_cast<std::size_t>(dims[f + 1]);
  std::size_t dsub = 1;
  for (int f : facs) dsub *= static_cast<std::size_t>(dims[f]);
  std::vector<std::size_t> out(dsub);
  std::vector<int> digit(facs.size(), 0);
  for (std::size_t s = 0; s < dsub; ++s) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < facs.size(); ++i) c += digit[i] * stride[facs[i]];
    out[s] = c;
    for (int i = static_cast<int>(facs.size()) - 1; i >= 0; --i) {
      if (++digit[i] < dims[facs[i]]) break;
      digit[i] = 0;
    }
  }
  return out;
}

template <typename T>
Mat<T> matmul_impl(const Mat<T>& a, const Mat<T>& b, bool parallel) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimension mismatch");
  Mat<T> c(a.rows(), b.cols());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t m = b.cols(), kk = a.cols();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && n > 32)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    T* crow = c.row(static_cast<std::size_t>(i));
    const T* arow = a.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < kk; ++k) {
      const T aik = arow[k];
      if (aik == T{}) continue;
      const T* brow = b.row(k);
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
#ifndef _OPENMP
  (void)parallel;
#endif
  return c;
}

template <typename T>
Mat<T> kron_impl(const Mat<T>& a, const Mat<T>& b, bool parallel) {
  Mat<T> c(a.rows() * b.rows(), a.cols() * b.cols());
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(c.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && rows > 64)
#endif
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const std::size_t ia = static_cast<std::size_t>(i) / b.rows();
    const std::size_t ib = static_cast<std::size_t>(i) % b.rows();
    T* crow = c.row(static_cast<std::size_t>(i));
    const T* brow = b.row(ib);
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
      const T av = a(ia, ja);
      T* dst = crow + ja * b.cols();
      if (av == T{}) continue;
      for (std::size_t jb = 0; jb < b.cols(); ++jb) dst[jb] = av * brow[jb];
    }
  }
#ifndef _OPENMP
  (void)parallel;
#endif
  return c;
}

CMat partial_trace_impl(const CMat& m, const std::vector<int>& dims, const std::vector<int>& keep,
                        bool parallel) {
  check_square_on(m, dims);
  check_factors(dims, keep, /*require_sorted=*/true);
  const std::vector<int> rest = complement(dims, keep);
  const auto keepc = contribs(dims, keep);
  const auto restc = contribs(dims, rest);
  const std::size_t dkeep = keepc.size(), drest = restc.size();
  CMat out(dkeep, dkeep);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && dkeep > 16)
#endif
  for (std::ptrdiff_t rk = 0; rk < static_cast<std::ptrdiff_t>(dkeep); ++rk) {
    for (std::size_t ck = 0; ck < dkeep; ++ck) {
      cplx acc{};
      for (std::size_t t = 0; t < drest; ++t)
        acc += m(keepc[rk] + restc[t], keepc[ck] + restc[t]);
      out(static_cast<std::size_t>(rk), ck) = acc;
    }
  }
#ifndef _OPENMP
  (void)parallel;
#endif
  return out;
}

CMat permute_factors_impl(const CMat& m, const std::vector<int>& dims,
                          const std::vector<int>& perm, bool parallel) {
  check_square_on(m, dims);
  if (perm.size() != dims.size()) throw ValidationError("permutation length mismatch");
  check_factors(dims, perm, /*require_sorted=*/false);
  const std::size_t n = dims.size(), dim = m.rows();
  std::vector<int> new_dims(n);
  for (std::size_t k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];
  std::vector<std::size_t> new_stride(n, 1);
  for (int k = static_cast<int>(n) - 2; k >= 0; --k)
    new_stride[k] = new_stride[k + 1] * static_cast<std::size_t>(new_dims[k + 1]);
  // new position of old factor f
  std::vector<std::size_t> pos(n);
  for (std::size_t k = 0; k < n; ++k) pos[perm[k]] = k;
  std::vector<std::size_t> map(dim);
  std::vector<int> digit(n, 0);
  for (std::size_t r = 0; r < dim; ++r) {
    std::size_t nr = 0;
    for (std::size_t f = 0; f < n; ++f) nr += static_cast<std::size_t>(digit[f]) * new_stride[pos[f]];
    map[r] = nr;
    for (int f = static_cast<int>(n) - 1; f >= 0; --f) {
      if (++digit[f] < dims[f]) break;
      digit[f] = 0;
    }
  }
  CMat out(dim, dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && dim > 64)
#endif
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(dim); ++r) {
    const cplx* src = m.row(static_cast<std::size_t>(r));
    const std::size_t nr = map[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < dim; ++c) out(nr, map[c]) = src[c];
  }
#ifndef _OPENMP
  (void)parallel;
#endif
  return out;
}

CMat apply_left_impl(const CMat& op, const std::vector<int>& factors, const CMat& m,
                     const std::vector<int>& dims, bool parallel) {
  check_factors(dims, factors, /*require_sorted=*/false);
  if (m.rows() != dims_product(dims)) throw ValidationError("apply_left: row space mismatch");
  const std::vector<int> rest = complement(dims, factors);
  const auto subc = contribs(dims, factors);
  const auto restc = contribs(dims, rest);
  const std::size_t dsub = subc.size(), drest = restc.size(), cols = m.cols();
  if (!op.square() || op.rows() != dsub) throw ValidationError("apply_left: operator size mismatch");
  CMat out(m.rows(), cols);
  const std::ptrdiff_t ntask = static_cast<std::ptrdiff_t>(dsub * drest);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && ntask > 64)
#endif
  for (std::ptrdiff_t idx = 0; idx < ntask; ++idx) {
    const std::size_t s = static_cast<std::size_t>(idx) / drest;
    const std::size_t t = static_cast<std::size_t>(idx) % drest;
    cplx* dst = out.row(subc[s] + restc[t]);
    for (std::size_t s2 = 0; s2 < dsub; ++s2) {
      const cplx o = op(s, s2);
      if (o == cplx{}) continue;
      const cplx* src = m.row(subc[s2] + restc[t]);
      for (std::size_t j = 0; j < cols; ++j) dst[j] += o * src[j];
    }
  }
#ifndef _OPENMP
  (void)parallel;
#endif
  return out;
}

}  // namespace

CMat matmul(const CMat& a, const CMat& b) { return matmul_impl(a, b, true); }
RMat matmul(const RMat& a, const RMat& b) { return matmul_impl(a, b, true); }
CMat kron(const CMat& a, const CMat& b) { return kron_impl(a, b, true); }
RMat kron(const RMat& a, const RMat& b) { return kron_impl(a, b, true); }

CMat partial_trace(const CMat& m, const std::vector<int>& dims, const std::vector<int>& keep) {
  return partial_trace_impl(m, dims, keep, true);
}

CMat permute_factors(const CMat& m, const std::vector<int>& dims, const std::vector<int>& perm) {
  return permute_factors_impl(m, dims, perm, true);
}

CMat embed(const CMat& op, const std::vector<int>& dims, const std::vector<int>& factors) {
  check_factors(dims, factors, /*require_sorted=*/false);
  const std::vector<int> rest = complement(dims, factors);
  const auto subc = contribs(dims, factors);
  const auto restc = contribs(dims, rest);
  const std::size_t dsub = subc.size(), drest = restc.size();
  if (!op.square() || op.rows() != dsub) throw ValidationError("embed: operator size mismatch");
  CMat out(dsub * drest, dsub * drest);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (dsub > 8)
#endif
  for (std::ptrdiff_t sr = 0; sr < static_cast<std::ptrdiff_t>(dsub); ++sr) {
    for (std::size_t sc = 0; sc < dsub; ++sc) {
      const cplx v = op(static_cast<std::size_t>(sr), sc);
      if (v == cplx{}) continue;
      for (std::size_t t = 0; t < drest; ++t)
        out(subc[sr] + restc[t], subc[sc] + restc[t]) = v;
    }
  }
  return out;
}

CMat apply_left(const CMat& op, const std::vector<int>& factors, const CMat& m,
                const std::vector<int>& dims) {
  return apply_left_impl(op, factors, m, dims, true);
}

CMat apply_right(const CMat& m, const CMat& op, const std::vector<int>& factors,
                 const std::vector<int>& dims) {
  check_factors(dims, factors, /*require_sorted=*/false);
  if (m.cols() != dims_product(dims)) throw ValidationError("apply_right: column space mismatch");
  const std::vector<int> rest = complement(dims, factors);
  const auto subc = contribs(dims, factors);
  const auto restc = contribs(dims, rest);
  const std::size_t dsub = subc.size(), drest = restc.size();
  if (!op.square() || op.rows() != dsub) throw ValidationError("apply_right: operator size mismatch");
  CMat out(m.rows(), m.cols());
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(m.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows > 16)
#endif
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const cplx* src = m.row(static_cast<std::size_t>(i));
    cplx* dst = out.row(static_cast<std::size_t>(i));
    for (std::size_t s = 0; s < dsub; ++s) {
      for (std::size_t t = 0; t < drest; ++t) {
        cplx acc{};
        for (std::size_t s2 = 0; s2 < dsub; ++s2) {
          const cplx o = op(s2, s);
          if (o == cplx{}) continue;
          acc += src[subc[s2] + restc[t]] * o;
        }
        dst[subc[s] + restc[t]] = acc;
      }
    }
  }
  return out;
}

CMat conjugate_on_factors(const CMat& op, const std::vector<int>& factors, const CMat& m,
                          const std::vector<int>& dims) {
  return apply_right(apply_left(op, factors, m, dims), dagger(op), factors, dims);
}

double trace_of_product_real(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw ValidationError("trace_of_product: shape mismatch");
  double acc = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const cplx* arow = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const cplx& bv = b(c, r);
      acc += arow[c].real() * bv.real() - arow[c].imag() * bv.imag();
    }
  }
  return acc;
}

// Straight textbook loops, no blocking, no zero skipping, no threads. These
// exist so the tuned kernels above have something unarguable to be checked
// and benchmarked against.
namespace ref {

template <typename T>
static Mat<T> matmul_naive(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimension mismatch");
  Mat<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T acc{};
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

CMat matmul(const CMat& a, const CMat& b) { return matmul_naive(a, b); }
RMat matmul(const RMat& a, const RMat& b) { return matmul_naive(a, b); }

CMat kron(const CMat& a, const CMat& b) {
  CMat c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ia = 0; ia < a.rows(); ++ia)
    for (std::size_t ib = 0; ib < b.rows(); ++ib)
      for (std::size_t ja = 0; ja < a.cols(); ++ja)
        for (std::size_t jb = 0; jb < b.cols(); ++jb)
          c(ia * b.rows() + ib, ja * b.cols() + jb) = a(ia, ja) * b(ib, jb);
  return c;
}

CMat partial_trace(const CMat& m, const std::vector<int>& dims, const std::vector<int>& keep) {
  check_square_on(m, dims);
  check_factors(dims, keep, /*require_sorted=*/true);
  const std::vector<int> rest = complement(dims, keep);
  const auto keepc = contribs(dims, keep);
  const auto restc = contribs(dims, rest);
  CMat out(keepc.size(), keepc.size());
  for (std::size_t rk = 0; rk < keepc.size(); ++rk)
    for (std::size_t ck = 0; ck < keepc.size(); ++ck)
      for (std::size_t t = 0; t < restc.size(); ++t)
        out(rk, ck) += m(keepc[rk] + restc[t], keepc[ck] + restc[t]);
  return out;
}

CMat permute_factors(const CMat& m, const std::vector<int>& dims, const std::vector<int>& perm) {
  return permute_factors_impl(m, dims, perm, false);
}

CMat apply_left(const CMat& op, const std::vector<int>& factors, const CMat& m,
                const std::vector<int>& dims) {
  return ref::matmul(embed(op, dims, factors), m);
}

}  // namespace ref

}  // namespace pbt
