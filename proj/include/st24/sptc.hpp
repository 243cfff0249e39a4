#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <boost/container/small_vector.hpp>

#include "st24/transform.hpp"
#include "st24/types.hpp"

namespace st24 {

/// Instruction tile of a sparse MMA (mma.sp.m16n8k16 by default).
struct MmaShape {
  Index m = 16;
  Index n = 8;
  Index k = 16;

  void validate() const;
  std::string str() const;
  static MmaShape parse(const std::string& s);  // "16x8x16"

  bool operator==(const MmaShape&) const = default;
};

inline constexpr MmaShape kMmaM16N8K16{16, 8, 16};

// Fragment geometry of the dense B operand for m16n8k16: 32 lanes, 4 elements each.
inline constexpr int kWarpSize = 32;
inline constexpr int kFragmentElements = 4;

class LaneId {
 public:
  explicit LaneId(int lane);
  int value() const { return lane_; }

 private:
  int lane_;
};

namespace detail {

// Exactly rounded running sum (Shewchuk partials). The result depends only on
// the multiset of added values, never on their order.
template <typename Scalar>
class ExactSum {
 public:
  void add(Scalar x) {
    std::size_t i = 0;
    for (Scalar y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const Scalar hi = x + y;
      const Scalar lo = y - (hi - x);
      if (lo != Scalar(0)) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  // a*b without intermediate rounding.
  void add_product(Scalar a, Scalar b) {
    const Scalar p = a * b;
    add(p);
    add(std::fma(a, b, -p));
  }

  Scalar value() const {
    std::size_t n = partials_.size();
    if (n == 0) return Scalar(0);
    Scalar hi = partials_[--n], lo(0);
    while (n > 0) {
      const Scalar x = hi, y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != Scalar(0)) break;
    }
    if (n > 0 && ((lo < 0 && partials_[n - 1] < 0) || (lo > 0 && partials_[n - 1] > 0))) {
      const Scalar y = lo * 2, x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  boost::container::small_vector<Scalar, 24> partials_;
};

}  // namespace detail

/// Sparse MMA: each metadata descriptor selects the B row its value multiplies.
///
/// C[m][n] += sum_s sum_t values[m][2s+t] * B[4s + meta[m][s].t][n]. Each output
/// is the correctly rounded value of the exact dot product plus the incoming
/// accumulator, so the result does not depend on where a product sits along K.
template <typename V, typename M, typename B, typename C>
void sparse_mma_accumulate(const Eigen::MatrixBase<V>& values, const Eigen::MatrixBase<M>& meta,
                           const Eigen::MatrixBase<B>& b, Eigen::MatrixBase<C>& c) {
  using Scalar = typename C::Scalar;
  const Index rows = values.rows();
  const Index segs = meta.cols();
  if (meta.rows() != rows || values.cols() != 2 * segs) throw Error("sparse_mma: value/metadata shape mismatch");
  if (b.rows() != 4 * segs) throw Error("sparse_mma: B must have 4 rows per metadata segment");
  if (c.rows() != rows || c.cols() != b.cols()) throw Error("sparse_mma: accumulator shape mismatch");
  for (Index i = 0; i < rows; ++i)
    for (Index s = 0; s < segs; ++s)
      if (!well_formed(meta(i, s))) throw Error("sparse_mma: malformed metadata");

  for (Index i = 0; i < rows; ++i) {
    for (Index n = 0; n < b.cols(); ++n) {
      detail::ExactSum<Scalar> acc;
      acc.add(c(i, n));
      for (Index s = 0; s < segs; ++s) {
        const std::uint8_t md = meta(i, s);
        acc.add_product(values(i, 2 * s), b(4 * s + descriptor(md, 0), n));
        acc.add_product(values(i, 2 * s + 1), b(4 * s + descriptor(md, 1), n));
      }
      c(i, n) = acc.value();
    }
  }
}

template <typename V, typename M, typename B, typename C>
Matrix<typename C::Scalar> sparse_mma(const Eigen::MatrixBase<V>& values, const Eigen::MatrixBase<M>& meta,
                                      const Eigen::MatrixBase<B>& b, const Eigen::MatrixBase<C>& c) {
  Matrix<typename C::Scalar> out = c;
  sparse_mma_accumulate(values, meta, b, out);
  return out;
}

/// Multiply-accumulates issued by one sparse instruction: half the dense count.
constexpr std::int64_t mac_count(const MmaShape& s) { return s.m * s.n * (s.k / 2); }
constexpr std::int64_t dense_mac_count(const MmaShape& s) { return s.m * s.n * s.k; }

/// B-operand row held by element i (0..3) of a lane for m16n8k16.
Index offset_row(LaneId lane, int element);

/// B-operand column (the lane's group id).
inline Index fragment_col(LaneId lane) { return lane.value() / 4; }

/// Row actually fetched for invocation k when the input row swap is folded
/// into the address computation: rows in the parity class move by L toward
/// the other half of the 2L-row input. At L = 16 this is offset_row + 16(-1)^k
/// for even elements. Rows >= 2L are zero padding of the K dimension and are
/// never swapped.
Index adjusted_offset(LaneId lane, int element, int invocation, Index L, Parity parity = Parity::Even,
                      Index k_mma = kMmaM16N8K16.k);

/// Unadjusted row: invocation slab base plus offset_row.
inline Index base_offset(LaneId lane, int element, int invocation, Index k_mma = kMmaM16N8K16.k) {
  return invocation * k_mma + offset_row(lane, element);
}

/// Fetches one lane's four B elements for invocation k from a 2L-row tile.
/// Rows beyond 2L read as zero.
template <typename Derived>
std::array<typename Derived::Scalar, kFragmentElements> load_fragment(const Eigen::MatrixBase<Derived>& tile, LaneId lane,
                                                                      int invocation, bool use_swap, Index L,
                                                                      Parity parity = Parity::Even) {
  using Scalar = typename Derived::Scalar;
  if (tile.rows() != 2 * L) throw Error("fragment tile must have 2L = " + std::to_string(2 * L) + " rows");
  const Index col = fragment_col(lane);
  if (col >= tile.cols()) throw Error("fragment column " + std::to_string(col) + " outside tile");
  if (invocation < 0) throw Error("invocation index must be nonnegative");
  std::array<Scalar, kFragmentElements> out{};
  for (int i = 0; i < kFragmentElements; ++i) {
    const Index row = use_swap ? adjusted_offset(lane, i, invocation, L, parity) : base_offset(lane, i, invocation);
    out[static_cast<std::size_t>(i)] = row < tile.rows() ? tile(row, col) : Scalar(0);
  }
  return out;
}

/// Assembles the 16x8 B operand of invocation k as the warp would see it in
/// registers: every lane fetches its four elements, placed at (offset_row, col).
template <typename Derived>
Matrix<typename Derived::Scalar> gather_b_operand(const Eigen::MatrixBase<Derived>& tile, int invocation, bool use_swap,
                                                  Index L, Parity parity = Parity::Even) {
  Matrix<typename Derived::Scalar> b(kMmaM16N8K16.k, kMmaM16N8K16.n);
  for (int l = 0; l < kWarpSize; ++l) {
    const LaneId lane(l);
    const auto frag = load_fragment(tile, lane, invocation, use_swap, L, parity);
    for (int i = 0; i < kFragmentElements; ++i) b(offset_row(lane, i), fragment_col(lane)) = frag[static_cast<std::size_t>(i)];
  }
  return b;
}

}  // namespace st24
