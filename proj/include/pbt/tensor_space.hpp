#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pbt/errors.hpp"

namespace pbt {

// Ordered list of labeled tensor factors. Indexing is row-major: the first
// factor is the most significant digit of a composite index.
class TensorSpace {
 public:
  TensorSpace() = default;
  TensorSpace(std::vector<std::string> labels, std::vector<int> dims);

  // A1..An of dimension d followed by B of dimension d.
  static TensorSpace ports(int n_ports, int qudit_dim);

  std::size_t factors() const { return dims_.size(); }
  std::size_t dim() const;
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<std::string>& labels() const { return labels_; }
  // Index of the factor carrying `label`; throws ValidationError if absent.
  std::size_t factor(const std::string& label) const;

  bool operator==(const TensorSpace& o) const { return labels_ == o.labels_ && dims_ == o.dims_; }

 private:
  std::vector<std::string> labels_;
  std::vector<int> dims_;
};

}  // namespace pbt
