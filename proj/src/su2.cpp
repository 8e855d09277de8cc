#include "pbt/su2.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pbt/errors.hpp"

namespace pbt::su2 {

namespace {

std::int64_t igcd(std::int64_t a, std::int64_t b) {
  while (b != 0) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

constexpr int kMaxBasisQubits = 11;  // dense 2^n columns; beyond this use the closed forms

long double lfact(int n) {
  static std::vector<long double> cache{1.0L};
  if (n < 0) throw ValidationError("factorial of negative integer");
  while (static_cast<int>(cache.size()) <= n)
    cache.push_back(cache.back() * static_cast<long double>(cache.size()));
  return cache[n];
}

}  // namespace

// binomial table, exact in int64 up to n = 52
std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (n > 52) throw ValidationError("binomial argument too large for exact arithmetic");
  static std::vector<std::vector<std::int64_t>> table;  // grown on demand
  if (static_cast<int>(table.size()) <= n) {
    for (int r = static_cast<int>(table.size()); r <= n; ++r) {
      std::vector<std::int64_t> row(r + 1, 1);
      for (int c = 1; c < r; ++c) row[c] = table[r - 1][c - 1] + table[r - 1][c];
      table.push_back(std::move(row));
    }
  }
  return table[n][k];
}

CgValue CgValue::of(int sign, std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ValidationError("CgValue: denominator must be positive");
  if (num < 0) throw ValidationError("CgValue: radicand must be nonnegative");
  if (num == 0 || sign == 0) return CgValue{};
  const std::int64_t g = igcd(num, den);
  return CgValue{sign > 0 ? 1 : -1, num / g, den / g};
}

CgValue CgValue::operator*(const CgValue& o) const {
  if (is_zero() || o.is_zero()) return CgValue{};
  __int128 n = static_cast<__int128>(num) * o.num;
  __int128 d = static_cast<__int128>(den) * o.den;
  // reduce in 128 bits, then require the result to fit 64
  __int128 a = n, b = d;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  n /= a;
  d /= a;
  if (n > INT64_MAX || d > INT64_MAX)
    throw ValidationError("CgValue: product does not fit exact arithmetic");
  return CgValue{sign * o.sign, static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
}

double CgValue::to_double() const {
  if (is_zero()) return 0.0;
  return sign * std::sqrt(static_cast<double>(num) / static_cast<double>(den));
}

CgValue cg_half(int two_j1, int two_m1, int spin_sign, int two_j) {
  if (two_j1 < 0) throw ValidationError("cg_half: negative spin");
  if ((two_j1 & 1) != (std::abs(two_m1) & 1))
    throw ValidationError("cg_half: parity mismatch between two_j1 and two_m1");
  if (spin_sign != 1 && spin_sign != -1) throw ValidationError("cg_half: spin_sign must be +-1");
  if (two_j != two_j1 + 1 && two_j != two_j1 - 1) return CgValue::zero();
  if (std::abs(two_m1) > two_j1) return CgValue::zero();
  const int two_m = two_m1 + spin_sign;
  if (std::abs(two_m) > two_j) return CgValue::zero();
  const std::int64_t den = 2 * (static_cast<std::int64_t>(two_j1) + 1);
  if (two_j == two_j1 + 1) {
    if (spin_sign > 0) return CgValue::of(+1, two_j1 + two_m1 + 2, den);
    return CgValue::of(+1, two_j1 - two_m1 + 2, den);
  }
  if (spin_sign > 0) return CgValue::of(+1, two_j1 - two_m1, den);
  return CgValue::of(-1, two_j1 + two_m1, den);
}

double cg_general(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M) {
  auto bad_pair = [](int tj, int tm) {
    return tj < 0 || std::abs(tm) > tj || ((tj ^ tm) & 1) != 0;
  };
  if (bad_pair(two_j1, two_m1) || bad_pair(two_j2, two_m2) || bad_pair(two_J, two_M)) return 0.0;
  if (two_m1 + two_m2 != two_M) return 0.0;
  if (two_J < std::abs(two_j1 - two_j2) || two_J > two_j1 + two_j2) return 0.0;
  if (((two_j1 + two_j2 + two_J) & 1) != 0) return 0.0;
  // all of these are integers once the checks above pass
  auto half = [](int x) { return x / 2; };
  const int a1 = half(two_j1 + two_j2 - two_J);
  const int a2 = half(two_j1 - two_j2 + two_J);
  const int a3 = half(-two_j1 + two_j2 + two_J);
  const int a4 = half(two_j1 + two_j2 + two_J) + 1;
  long double pref = static_cast<long double>(two_J + 1) * lfact(a1) * lfact(a2) * lfact(a3) / lfact(a4);
  pref *= lfact(half(two_j1 + two_m1)) * lfact(half(two_j1 - two_m1));
  pref *= lfact(half(two_j2 + two_m2)) * lfact(half(two_j2 - two_m2));
  pref *= lfact(half(two_J + two_M)) * lfact(half(two_J - two_M));
  const int kmin = std::max({0, half(two_j2 - two_J - two_m1), half(two_j1 + two_m2 - two_J)});
  const int kmax = std::min({a1, half(two_j1 - two_m1), half(two_j2 + two_m2)});
  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    long double term = 1.0L / (lfact(k) * lfact(a1 - k) * lfact(half(two_j1 - two_m1) - k) *
                               lfact(half(two_j2 + two_m2) - k) *
                               lfact(half(two_J - two_j2 + two_m1) + k) *
                               lfact(half(two_J - two_j1 - two_m2) + k));
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(std::sqrt(pref) * sum);
}

bool cg_symmetry_check(int two_j1, int two_m1, int spin_sign, int two_j) {
  const double ours = cg_half(two_j1, two_m1, spin_sign, two_j).to_double();
  const int two_m = two_m1 + spin_sign;
  // half-spin listed first matches the table directly...
  const double direct = cg_general(1, spin_sign, two_j1, two_m1, two_j, two_m);
  // ...and listed second picks up (-1)^(j1 + 1/2 - j)
  const int phase_exp = (two_j1 + 1 - two_j) / 2;
  const double swapped = cg_general(two_j1, two_m1, 1, spin_sign, two_j, two_m);
  const double phase = (phase_exp % 2 == 0) ? 1.0 : -1.0;
  return std::abs(ours - direct) <= 1e-12 && std::abs(ours - phase * swapped) <= 1e-12;
}

std::int64_t multiplicity(int n, int two_s) {
  if (n < 0) throw ValidationError("multiplicity: negative qubit count");
  if (two_s < 0) throw ValidationError("multiplicity: negative spin");
  if (((n ^ two_s) & 1) != 0)
    throw ValidationError("multiplicity: parity mismatch between n and two_s");
  if (two_s > n) return 0;
  const int a = (n - two_s) / 2;
  return binomial(n, a) - binomial(n, a - 1);
}

std::vector<std::vector<int>> coupling_paths(int n) {
  if (n < 1) throw ValidationError("coupling_paths: need at least one qubit");
  std::vector<std::vector<int>> out;
  std::vector<int> cur{1};
  // depth-first, smaller branch first, gives lexicographic order
  struct Frame {
    int next;  // 0: try j-1, 1: try j+1, 2: done
  };
  std::vector<Frame> stack{{0}};
  while (!stack.empty()) {
    if (cur.size() == static_cast<std::size_t>(n)) {
      out.push_back(cur);
      stack.pop_back();
      cur.pop_back();
      continue;
    }
    Frame& f = stack.back();
    const int j = cur.back();
    if (f.next == 0) {
      f.next = 1;
      if (j - 1 >= 0) {
        cur.push_back(j - 1);
        stack.push_back({0});
      }
    } else if (f.next == 1) {
      f.next = 2;
      cur.push_back(j + 1);
      stack.push_back({0});
    } else {
      stack.pop_back();
      cur.pop_back();
    }
  }
  return out;
}

std::vector<std::size_t> CoupledBasis::sector(int two_j) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k].two_j == two_j) out.push_back(k);
  return out;
}

std::size_t CoupledBasis::column(const SpinLabel& l) const {
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == l) return k;
  throw ValidationError("coupled basis: no such label");
}

CoupledBasis build_coupled_basis(int n) {
  if (n < 1) throw ValidationError("build_coupled_basis: need at least one qubit");
  if (n > kMaxBasisQubits) throw ResourceError("build_coupled_basis: dense basis too large");

  using Key = std::pair<std::vector<int>, int>;  // (path, two_m)
  using Sparse = std::vector<std::pair<std::size_t, CgValue>>;
  std::map<Key, Sparse> cur;
  cur[{{1}, +1}] = {{1, CgValue::of(+1, 1, 1)}};
  cur[{{1}, -1}] = {{0, CgValue::of(+1, 1, 1)}};
  for (int k = 2; k <= n; ++k) {
    std::map<Key, Sparse> next;
    for (const auto& [key, vec] : cur) {
      const auto& [path, two_m] = key;
      const int j_prev = path.back();
      for (int step : {-1, +1}) {
        const int j_new = j_prev + step;
        if (j_new < 0) continue;
        std::vector<int> new_path = path;
        new_path.push_back(j_new);
        for (int spin_sign : {-1, +1}) {
          const CgValue f = cg_half(j_prev, two_m, spin_sign, j_new);
          if (f.is_zero()) continue;
          const int b = (spin_sign + 1) / 2;
          Sparse& dst = next[{new_path, two_m + spin_sign}];
          for (const auto& [idx, amp] : vec)
            dst.emplace_back((idx << 1) | static_cast<std::size_t>(b), amp * f);
        }
      }
    }
    cur = std::move(next);
  }

  CoupledBasis out;
  out.n = n;
  std::vector<Key> keys;
  keys.reserve(cur.size());
  for (const auto& [key, vec] : cur) keys.push_back(key);
  std::sort(keys.begin(), keys.end(), [](const Key& x, const Key& y) {
    if (x.first.back() != y.first.back()) return x.first.back() < y.first.back();
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  const std::size_t dim = std::size_t{1} << n;
  out.vectors = RMat(dim, keys.size());
  for (std::size_t c = 0; c < keys.size(); ++c) {
    out.labels.push_back(SpinLabel{keys[c].first.back(), keys[c].second, keys[c].first});
    for (const auto& [idx, amp] : cur[keys[c]]) out.vectors(idx, c) += amp.to_double();
  }
  return out;
}

CoupledBasis permute_basis_qubits(const CoupledBasis& basis, const std::vector<int>& qubit_order) {
  const int n = basis.n;
  if (static_cast<int>(qubit_order.size()) != n)
    throw ValidationError("permute_basis_qubits: order length mismatch");
  std::vector<char> seen(n, 0);
  for (int q : qubit_order) {
    if (q < 0 || q >= n || seen[q]) throw ValidationError("permute_basis_qubits: not a permutation");
    seen[q] = 1;
  }
  CoupledBasis out;
  out.n = n;
  out.labels = basis.labels;
  const std::size_t dim = std::size_t{1} << n;
  out.vectors = RMat(dim, basis.labels.size());
  // logical slot k of the standard construction holds physical slot
  // qubit_order[k]; slot 0 is the most significant bit
  for (std::size_t phys = 0; phys < dim; ++phys) {
    std::size_t logical = 0;
    for (int k = 0; k < n; ++k) {
      const int bit = (phys >> (n - 1 - qubit_order[k])) & 1;
      logical = (logical << 1) | static_cast<std::size_t>(bit);
    }
    for (std::size_t c = 0; c < basis.labels.size(); ++c)
      out.vectors(phys, c) = basis.vectors(logical, c);
  }
  return out;
}

RMat rebase_unitary(const CoupledBasis& a, const CoupledBasis& b, int two_s) {
  if (a.n != b.n) throw ValidationError("rebase_unitary: qubit count mismatch");
  const auto cols_a = a.sector(two_s);
  const auto cols_b = b.sector(two_s);
  if (cols_a.empty() || cols_b.empty())
    throw ValidationError("rebase_unitary: sector absent from basis");
  if (cols_a.size() != cols_b.size())
    throw ValidationError("rebase_unitary: sector sizes differ");
  // per-m sub-blocks, label order within the sector
  std::map<int, std::vector<std::size_t>> by_m_a, by_m_b;
  for (auto c : cols_a) by_m_a[a.labels[c].two_m].push_back(c);
  for (auto c : cols_b) by_m_b[b.labels[c].two_m].push_back(c);
  if (by_m_a.size() != by_m_b.size()) throw ValidationError("rebase_unitary: m ranges differ");
  const std::size_t dim = std::size_t{1} << a.n;
  const std::size_t nsec = by_m_a.begin()->second.size();
  RMat u(nsec, nsec);
  bool first = true;
  double mdev = 0.0;
  for (const auto& [m, ca] : by_m_a) {
    auto itb = by_m_b.find(m);
    if (itb == by_m_b.end() || itb->second.size() != nsec || ca.size() != nsec)
      throw ValidationError("rebase_unitary: sector structure mismatch");
    RMat um(nsec, nsec);
    for (std::size_t r = 0; r < nsec; ++r)
      for (std::size_t c = 0; c < nsec; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
          acc += a.vectors(i, ca[r]) * b.vectors(i, itb->second[c]);
        um(r, c) = acc;
      }
    if (first) {
      u = um;
      first = false;
    } else {
      mdev = std::max(mdev, max_abs_diff(u, um));
    }
  }
  if (mdev > 1e-10)
    throw CertificateError("rebase_unitary: overlap depends on the magnetic number");
  double udev = 0.0;
  for (std::size_t r = 0; r < nsec; ++r)
    for (std::size_t c = 0; c < nsec; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < nsec; ++k) acc += u(k, r) * u(k, c);
      udev = std::max(udev, std::abs(acc - (r == c ? 1.0 : 0.0)));
    }
  if (udev > 1e-12) throw CertificateError("rebase_unitary: overlap block is not unitary");
  return u;
}

}  // namespace pbt::su2
