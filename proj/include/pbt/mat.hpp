#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "pbt/errors.hpp"

namespace pbt {

using cplx = std::complex<double>;

// Dense row-major matrix. Element type is double for the real-symmetric
// solver paths and std::complex<double> everywhere physics happens.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, T{}) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }
  static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  T* data() { return a_.data(); }
  const T* data() const { return a_.data(); }
  T* row(std::size_t i) { return a_.data() + i * cols_; }
  const T* row(std::size_t i) const { return a_.data() + i * cols_; }

  Mat& operator+=(const Mat& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Mat& operator*=(T s) {
    for (auto& v : a_) v *= s;
    return *this;
  }
  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, T s) { return a *= s; }
  friend Mat operator*(T s, Mat a) { return a *= s; }

  bool operator==(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

  T trace() const {
    T t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

 private:
  void check_same_shape(const Mat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ValidationError("matrix shape mismatch");
  }
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

using CMat = Mat<cplx>;
using RMat = Mat<double>;

double max_abs(const CMat& m);
double max_abs(const RMat& m);
double frob_norm(const CMat& m);
double frob_norm(const RMat& m);
double max_abs_diff(const CMat& a, const CMat& b);
double max_abs_diff(const RMat& a, const RMat& b);
// Largest |H - H^dag| entry; 0 for empty matrices.
double hermiticity_defect(const CMat& m);
CMat dagger(const CMat& m);
RMat transpose(const RMat& m);
CMat to_complex(const RMat& m);
RMat real_part(const CMat& m);
double max_imag(const CMat& m);

}  // namespace pbt
