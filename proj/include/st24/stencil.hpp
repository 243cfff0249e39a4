#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "st24/types.hpp"

namespace st24 {

enum class Shape { Box, Star };

const char* to_string(Shape s);
Shape parse_shape(const std::string& s);

/// Dense (2r+1)^d coefficient block of a constant-coefficient linear stencil.
///
/// Coefficients are addressed by offset: coeff(rho, delta) weighs the input at
/// (y + rho, x + delta). A 1D kernel has a single row (rho = 0) and acts along x.
template <typename Scalar = double>
class StencilKernel {
 public:
  Shape shape() const { return shape_; }
  int dims() const { return dims_; }
  int radius() const { return radius_; }
  int width() const { return 2 * radius_ + 1; }
  int row_count() const { return static_cast<int>(coeffs_.rows()); }

  Scalar coeff(int rho, int delta) const { return coeffs_(rho + row_origin(), delta + radius_); }

  /// The 2r+1 coefficients of kernel row rho, ordered by delta = -r..r.
  Vector<Scalar> row(int rho) const { return coeffs_.row(rho + row_origin()).transpose(); }

  const Matrix<Scalar>& coeffs() const { return coeffs_; }

  template <typename Other>
  StencilKernel<Other> cast() const {
    return StencilKernel<Other>(shape_, dims_, radius_, coeffs_.template cast<Other>());
  }

  StencilKernel(Shape shape, int dims, int radius, Matrix<Scalar> coeffs)
      : shape_(shape), dims_(dims), radius_(radius), coeffs_(std::move(coeffs)) {}

 private:
  int row_origin() const { return dims_ == 1 ? 0 : radius_; }

  Shape shape_;
  int dims_;
  int radius_;
  Matrix<Scalar> coeffs_;
};

/// Validates and builds a kernel from a row-major coefficient list.
template <typename Scalar = double>
StencilKernel<Scalar> make_kernel(Shape shape, int dims, int radius, const std::vector<Scalar>& coeffs) {
  if (dims != 1 && dims != 2) throw Error("stencil dimensionality must be 1 or 2, got " + std::to_string(dims));
  if (radius < 1) throw Error("stencil radius must be >= 1, got " + std::to_string(radius));
  const Index w = 2 * radius + 1;
  const Index rows = dims == 1 ? 1 : w;
  if (static_cast<Index>(coeffs.size()) != rows * w) {
    throw Error("expected " + std::to_string(rows * w) + " coefficients for d=" + std::to_string(dims) +
                " r=" + std::to_string(radius) + ", got " + std::to_string(coeffs.size()));
  }
  Matrix<Scalar> m(rows, w);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < w; ++j) m(i, j) = coeffs[static_cast<std::size_t>(i * w + j)];

  if (shape == Shape::Star && dims == 2) {
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < w; ++j)
        if (i != radius && j != radius && m(i, j) != Scalar(0))
          throw Error("star kernel has off-axis coefficient at offset (" + std::to_string(i - radius) + ", " +
                      std::to_string(j - radius) + ")");
  }
  return StencilKernel<Scalar>(shape, dims, radius, std::move(m));
}

/// A rows x cols interior surrounded by a read-only halo of width `halo`.
///
/// Halo cells hold fixed boundary values and are never written by a step.
template <typename Scalar = double>
class Grid {
 public:
  Grid() = default;
  Grid(Index rows, Index cols, Index halo, Scalar fill = Scalar(0))
      : rows_(rows), cols_(cols), halo_(halo), data_(Matrix<Scalar>::Constant(rows + 2 * halo, cols + 2 * halo, fill)) {
    if (rows < 1 || cols < 1) throw Error("grid interior must be at least 1x1");
    if (halo < 0) throw Error("grid halo must be nonnegative");
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index halo() const { return halo_; }

  // Interior coordinates; halo cells are at negative or >= extent indices.
  Scalar& at(Index y, Index x) { return data_(y + halo_, x + halo_); }
  Scalar at(Index y, Index x) const { return data_(y + halo_, x + halo_); }

  bool stored(Index y, Index x) const {
    return y >= -halo_ && y < rows_ + halo_ && x >= -halo_ && x < cols_ + halo_;
  }

  // Zero outside the stored extent.
  Scalar at_or_zero(Index y, Index x) const { return stored(y, x) ? at(y, x) : Scalar(0); }

  auto interior() { return data_.block(halo_, halo_, rows_, cols_); }
  auto interior() const { return data_.block(halo_, halo_, rows_, cols_); }

  Matrix<Scalar>& storage() { return data_; }
  const Matrix<Scalar>& storage() const { return data_; }

  std::int64_t step = 0;

  template <typename Other>
  Grid<Other> cast() const {
    Grid<Other> g(rows_, cols_, halo_);
    g.storage() = data_.template cast<Other>();
    g.step = step;
    return g;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index halo_ = 0;
  Matrix<Scalar> data_;
};

/// Fills interior and halo with uniform values in [-1, 1) from a seeded engine.
template <typename Scalar = double>
Grid<Scalar> make_random_grid(Index rows, Index cols, Index halo, std::uint64_t seed) {
  Grid<Scalar> g(rows, cols, halo);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto& s = g.storage();
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.cols(); ++j) s(i, j) = static_cast<Scalar>(dist(rng));
  return g;
}

/// Reference executor: T Jacobi steps of the pointwise weighted sum.
template <typename Scalar>
Grid<Scalar> naive_apply(const StencilKernel<Scalar>& kernel, const Grid<Scalar>& grid, int steps) {
  const int r = kernel.radius();
  if (grid.halo() < r)
    throw Error("grid halo " + std::to_string(grid.halo()) + " is smaller than stencil radius " + std::to_string(r));
  if (steps < 1) throw Error("step count must be >= 1");

  const int rho_lo = kernel.dims() == 1 ? 0 : -r;
  const int rho_hi = kernel.dims() == 1 ? 0 : r;

  Grid<Scalar> cur = grid;
  Grid<Scalar> next = grid;
  for (int t = 0; t < steps; ++t) {
    for (Index y = 0; y < cur.rows(); ++y) {
      for (Index x = 0; x < cur.cols(); ++x) {
        Scalar acc(0);
        for (int rho = rho_lo; rho <= rho_hi; ++rho)
          for (int delta = -r; delta <= r; ++delta) acc += kernel.coeff(rho, delta) * cur.at(y + rho, x + delta);
        next.at(y, x) = acc;
      }
    }
    next.step = cur.step + 1;
    std::swap(cur, next);
  }
  return cur;
}

/// max |a - b| / max |b| over the interiors.
template <typename Scalar>
double max_relative_error(const Grid<Scalar>& actual, const Grid<Scalar>& expected) {
  if (actual.rows() != expected.rows() || actual.cols() != expected.cols()) throw Error("grid extent mismatch");
  const double diff = (actual.interior() - expected.interior()).cwiseAbs().maxCoeff();
  const double scale = expected.interior().cwiseAbs().maxCoeff();
  if (scale == 0.0) return diff;
  return diff / scale;
}

}  // namespace st24
