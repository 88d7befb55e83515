#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cmh/types.hpp"

namespace cmh {

/// Exact rank via fraction-free (Bareiss) elimination.
inline int rank_exact(MatR a) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Rat prev_pivot(1);
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index i = r; i < rows; ++i)
      if (!a(i, c).is_zero()) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != r) a.row(piv).swap(a.row(r));
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      for (Eigen::Index j = c + 1; j < cols; ++j)
        a(i, j) = (a(r, c) * a(i, j) - a(i, c) * a(r, j)) / prev_pivot;
      a(i, c) = Rat(0);
    }
    prev_pivot = a(r, c);
    ++r;
  }
  return static_cast<int>(r);
}

/// Solves the square system a x = b exactly via fraction-free (Bareiss)
/// forward elimination on the augmented matrix, then back-substitution.
/// Returns nullopt when singular.
inline std::optional<VecR> solve_exact(const MatR& a, const VecR& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_exact: shape mismatch");
  MatR t(n, n + 1);
  t.leftCols(n) = a;
  t.col(n) = b;

  Rat prev_pivot(1);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index i = c; i < n; ++i)
      if (!t(i, c).is_zero()) {
        piv = i;
        break;
      }
    if (piv < 0) return std::nullopt;
    if (piv != c) t.row(piv).swap(t.row(c));
    for (Eigen::Index i = c + 1; i < n; ++i) {
      for (Eigen::Index j = c + 1; j <= n; ++j)
        t(i, j) = (t(c, c) * t(i, j) - t(i, c) * t(c, j)) / prev_pivot;
      t(i, c) = Rat(0);
    }
    prev_pivot = t(c, c);
  }

  VecR x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    Rat s = t(i, n);
    for (Eigen::Index j = i + 1; j < n; ++j) s -= t(i, j) * x[j];
    x[i] = s / t(i, i);
  }
  return x;
}

/// Solves a x = b with partial pivoting; nullopt when numerically singular.
inline std::optional<VecD> solve_float(MatD a, VecD b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_float: shape mismatch");
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    double best = std::abs(a(c, c));
    for (Eigen::Index i = c + 1; i < n; ++i)
      if (std::abs(a(i, c)) > best) {
        best = std::abs(a(i, c));
        piv = i;
      }
    if (best < 1e-300) return std::nullopt;
    if (piv != c) {
      a.row(piv).swap(a.row(c));
      std::swap(b[piv], b[c]);
    }
    for (Eigen::Index i = c + 1; i < n; ++i) {
      double f = a(i, c) / a(c, c);
      if (f == 0.0) continue;
      for (Eigen::Index j = c; j < n; ++j) a(i, j) -= f * a(c, j);
      b[i] -= f * b[c];
    }
  }
  VecD x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Eigen::Index j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

/// Basis of the null space {x : a x = 0}, exact.
inline std::vector<VecR> null_space_exact(MatR a) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  std::vector<Eigen::Index> pivot_col;
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index i = r; i < rows; ++i)
      if (!a(i, c).is_zero()) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != r) a.row(piv).swap(a.row(r));
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == r || a(i, c).is_zero()) continue;
      Rat f = a(i, c) / a(r, c);
      for (Eigen::Index j = 0; j < cols; ++j) a(i, j) -= f * a(r, j);
    }
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (Eigen::Index c : pivot_col) is_pivot[c] = true;

  std::vector<VecR> basis;
  for (Eigen::Index free_c = 0; free_c < cols; ++free_c) {
    if (is_pivot[free_c]) continue;
    VecR v = zero_vec<Rat>(cols);
    v[free_c] = Rat(1);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(pivot_col.size()); ++k)
      v[pivot_col[k]] = -a(k, free_c) / a(k, pivot_col[k]);
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Affine dimension of a point cloud: rank of the difference matrix.
inline int affine_span_dimension(const std::vector<VecR>& points) {
  if (points.empty()) return -1;
  if (points.size() == 1) return 0;
  MatR diffs(static_cast<Eigen::Index>(points.size()) - 1, points.front().size());
  for (std::size_t i = 1; i < points.size(); ++i) diffs.row(static_cast<Eigen::Index>(i - 1)) = (points[i] - points[0]).transpose();
  return rank_exact(diffs);
}

}  // namespace cmh
