#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "st24/types.hpp"

namespace st24 {

using Rational = boost::rational<std::int64_t>;

/// Banded kernel matrix for one stencil-kernel row: L = 2r+2 rows, 2L columns.
///
/// Row i holds the 2r+1 coefficients in columns [i, i+2r]; the last two
/// columns are zero padding that make the width exactly 2L.
template <typename Scalar = double>
struct KernelMatrix {
  int radius = 0;
  Matrix<Scalar> values;
  bool swapped = false;
  Parity parity = Parity::Even;

  Index L() const { return 2 * radius + 2; }
  Index width() const { return 2 * L(); }
};

template <typename Derived>
KernelMatrix<typename Derived::Scalar> build_kernel_matrix(const Eigen::MatrixBase<Derived>& kernel_row, int radius) {
  using Scalar = typename Derived::Scalar;
  if (radius < 1) throw Error("kernel radius must be >= 1");
  const Index taps = 2 * radius + 1;
  if (kernel_row.size() != taps)
    throw Error("kernel row must have " + std::to_string(taps) + " coefficients, got " +
                std::to_string(kernel_row.size()));
  KernelMatrix<Scalar> k;
  k.radius = radius;
  k.values = Matrix<Scalar>::Zero(k.L(), k.width());
  for (Index i = 0; i < k.L(); ++i)
    for (Index t = 0; t < taps; ++t) k.values(i, i + t) = kernel_row(t);
  return k;
}

/// Nonzero fraction (2r+1)/(2r+L) of an L-row banded kernel matrix.
Rational sparsity_ratio(Index radius, Index L);

/// True when the nonzero fraction is at most one half, i.e. L >= 2r+2.
bool sptc_compatible(Index radius, Index L);

inline bool in_parity_class(Index j, Parity p) { return (j & 1) == static_cast<Index>(p); }

/// Exchanges column j with column j+L for every j < L in the parity class.
/// Applying it twice restores the input.
template <typename Derived>
void swap_columns(Eigen::MatrixBase<Derived>& m, Index L, Parity parity) {
  if (m.cols() != 2 * L) throw Error("column swap needs exactly 2L columns");
  for (Index j = 0; j < L; ++j)
    if (in_parity_class(j, parity)) m.col(j).swap(m.col(j + L));
}

template <typename Scalar>
KernelMatrix<Scalar> strided_swap(KernelMatrix<Scalar> k, Parity parity) {
  if (k.swapped) throw Error("kernel matrix is already swapped");
  if (k.values.cols() != k.width()) throw Error("kernel matrix width must be 2L");
  swap_columns(k.values, k.L(), parity);
  k.swapped = true;
  k.parity = parity;
  return k;
}

struct Check2to4Report {
  bool valid = true;
  Index segments = 0;
  std::vector<std::pair<Index, Index>> violations;  // (row, segment)
};

/// Every aligned 4-wide segment of every row must hold at most two nonzeros.
template <typename Derived>
Check2to4Report check_2to4(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.cols() % 4 != 0) throw Error("2:4 check needs a width divisible by 4, got " + std::to_string(m.cols()));
  Check2to4Report report;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index s = 0; s < m.cols() / 4; ++s) {
      int nnz = 0;
      for (Index t = 0; t < 4; ++t) nnz += m(i, 4 * s + t) != Scalar(0);
      ++report.segments;
      if (nnz > 2) report.violations.emplace_back(i, s);
    }
  }
  report.valid = report.violations.empty();
  return report;
}

// Metadata byte layout: first descriptor in bits 0-1, second in bits 2-3.
constexpr std::uint8_t pack_descriptors(unsigned first, unsigned second) {
  return static_cast<std::uint8_t>((first & 3u) | ((second & 3u) << 2));
}
constexpr unsigned descriptor(std::uint8_t meta, int slot) { return (meta >> (2 * slot)) & 3u; }
constexpr bool well_formed(std::uint8_t meta) { return (meta & 0xF0u) == 0 && descriptor(meta, 0) < descriptor(meta, 1); }

inline constexpr std::uint8_t kZeroSegmentMeta = pack_descriptors(0, 1);

template <typename Scalar>
struct Compressed2to4 {
  Matrix<Scalar> values;   // rows x cols/2
  MetadataMatrix metadata;  // rows x cols/4
};

/// Compresses any 2:4-valid matrix. Segments with a single nonzero keep a
/// zero placeholder next to it; empty segments encode as descriptors (0, 1).
template <typename Derived>
Compressed2to4<typename Derived::Scalar> compress_2to4(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.cols() % 4 != 0) throw Error("2:4 compression needs a width divisible by 4");
  const Index segs = m.cols() / 4;
  Compressed2to4<Scalar> out{Matrix<Scalar>::Zero(m.rows(), 2 * segs), MetadataMatrix::Zero(m.rows(), segs)};
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index s = 0; s < segs; ++s) {
      unsigned pos[4];
      int nnz = 0;
      for (unsigned t = 0; t < 4; ++t)
        if (m(i, 4 * s + t) != Scalar(0)) {
          if (nnz == 2)
            throw Error("segment " + std::to_string(s) + " of row " + std::to_string(i) + " has more than 2 nonzeros");
          pos[nnz++] = t;
        }
      unsigned p0 = 0, p1 = 1;
      Scalar v0(0), v1(0);
      if (nnz == 2) {
        p0 = pos[0];
        p1 = pos[1];
        v0 = m(i, 4 * s + p0);
        v1 = m(i, 4 * s + p1);
      } else if (nnz == 1 && pos[0] < 3) {
        p0 = pos[0];
        p1 = pos[0] + 1;
        v0 = m(i, 4 * s + p0);
      } else if (nnz == 1) {
        // A nonzero in the last slot has no larger neighbour: the placeholder goes first.
        p0 = 2;
        p1 = 3;
        v1 = m(i, 4 * s + 3);
      }
      out.values(i, 2 * s) = v0;
      out.values(i, 2 * s + 1) = v1;
      out.metadata(i, s) = pack_descriptors(p0, p1);
    }
  }
  return out;
}

template <typename Derived>
Matrix<typename Derived::Scalar> decompress_2to4(const Eigen::MatrixBase<Derived>& values, const MetadataMatrix& meta) {
  using Scalar = typename Derived::Scalar;
  if (values.rows() != meta.rows() || values.cols() != 2 * meta.cols())
    throw Error("value/metadata shape mismatch");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(values.rows(), 4 * meta.cols());
  for (Index i = 0; i < meta.rows(); ++i) {
    for (Index s = 0; s < meta.cols(); ++s) {
      const std::uint8_t md = meta(i, s);
      if (!well_formed(md))
        throw Error("malformed metadata at row " + std::to_string(i) + " segment " + std::to_string(s));
      out(i, 4 * s + descriptor(md, 0)) = values(i, 2 * s);
      out(i, 4 * s + descriptor(md, 1)) = values(i, 2 * s + 1);
    }
  }
  return out;
}

/// Hardware-ready form of a swapped kernel matrix: L x L values, L x L/2 metadata.
template <typename Scalar = double>
struct CompressedKernel {
  int radius = 0;
  Parity parity = Parity::Even;
  Matrix<Scalar> values;
  MetadataMatrix metadata;

  Index L() const { return 2 * radius + 2; }
};

template <typename Scalar>
CompressedKernel<Scalar> encode(const KernelMatrix<Scalar>& k) {
  if (!k.swapped) throw Error("encode expects a strided-swapped kernel matrix");
  const auto report = check_2to4(k.values);
  if (!report.valid) {
    const auto [row, seg] = report.violations.front();
    throw Error("kernel matrix violates 2:4 at row " + std::to_string(row) + " segment " + std::to_string(seg));
  }
  auto c = compress_2to4(k.values);
  return CompressedKernel<Scalar>{k.radius, k.parity, std::move(c.values), std::move(c.metadata)};
}

template <typename Scalar>
KernelMatrix<Scalar> decode(const CompressedKernel<Scalar>& c) {
  const Index L = c.L();
  if (c.values.rows() != L || c.values.cols() != L || c.metadata.rows() != L || c.metadata.cols() != L / 2)
    throw Error("compressed kernel has inconsistent shape for r=" + std::to_string(c.radius));
  KernelMatrix<Scalar> k;
  k.radius = c.radius;
  k.values = decompress_2to4(c.values, c.metadata);
  k.swapped = true;
  k.parity = c.parity;
  return k;
}

/// Row exchange on the 2L-row input matrix that undoes the kernel's column swap.
class RowPermutation {
 public:
  RowPermutation(Index L, Parity parity);

  Index L() const { return L_; }
  Parity parity() const { return parity_; }
  Index size() const { return static_cast<Index>(map_.size()); }
  Index operator()(Index j) const { return map_[static_cast<std::size_t>(j)]; }
  const std::vector<Index>& mapping() const { return map_; }

  /// Result row j is input row pi(j).
  template <typename Derived>
  Matrix<typename Derived::Scalar> apply(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != size()) throw Error("row permutation expects " + std::to_string(size()) + " rows");
    Matrix<typename Derived::Scalar> out(x.rows(), x.cols());
    for (Index j = 0; j < size(); ++j) out.row(j) = x.row((*this)(j));
    return out;
  }

 private:
  Index L_;
  Parity parity_;
  std::vector<Index> map_;
};

RowPermutation input_row_permutation(Index L, Parity parity);

}  // namespace st24
