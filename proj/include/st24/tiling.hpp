#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "st24/sptc.hpp"
#include "st24/transform.hpp"
#include "st24/types.hpp"

namespace st24 {

inline constexpr int kRegisterBits = 32;
inline constexpr int kSelectorGroups = 4;       // 8-lane groups per warp
inline constexpr int kSelectorGroupLanes = 8;

/// Three-level tile hierarchy (block / warp / instruction) for one stencil radius.
///
/// The A axis is measured in padded kernel-matrix rows (the MMA M dimension):
/// a chunk of L output points along x occupies `chunk_rows` = ceil(L/M)*M rows.
/// The B axis counts GEMM columns, one per (grid row, x-segment) pair.
struct TilingPlan {
  Index rows = 0;
  Index cols = 0;
  int radius = 0;
  Index block_a = 0, block_b = 0;
  Index warp_a = 0, warp_b = 0;
  MmaShape mma;

  Index L = 0;
  Index chunk_rows = 0;
  Index m_blocks_per_chunk = 0;
  Index k_slabs = 0;
  Index chunks_per_block = 0;
  Index chunks_per_warp = 0;
  Index block_points = 0;  // output x-points covered by one block row

  Index warps_per_block = 0;
  Index invocations_per_warp_pass = 0;
  Index invocations_per_block_pass = 0;

  // Shared-memory input window per kernel-row pass: (A_b + 2r) x B_b.
  Index shared_rows = 0;
  Index shared_cols = 0;
  Index shared_elements = 0;
  // Window the emulator stages: x-extent of the block's chunks plus halo and pad.
  Index staged_width = 0;
  Index staged_elements = 0;

  Index virtual_rows = 0;  // GEMM columns over the whole grid
  Index segments_per_row = 0;
  Index blocks = 0;

  bool kernel_in_registers = true;
  Index kernel_fragments = 0;  // distinct A operands (MMA invocation index k)
  std::vector<int> selectors;  // kernel fragment -> active 8-lane group
  Index metadata_registers_per_thread = 0;
  Index a_elements_per_thread = 0;
  Index b_elements_per_thread = 0;
  Index c_elements_per_thread = 0;
};

TilingPlan plan(Index rows, Index cols, int radius, Index block_a, Index block_b, Index warp_a, Index warp_b,
                const MmaShape& mma = kMmaM16N8K16);

/// Position of a compressed-kernel cell inside the instruction fragments.
struct FragmentCoord {
  int fragment;  // kernel fragment / invocation index k
  int lane;
  int element;
};

// Compressed value (row, col): m16n8k16 sparse A layout, 4 values per lane.
FragmentCoord value_fragment_coord(Index row, Index col, Index k_slabs);
// Metadata (row, segment): active thread t of the selected group holds rows 2t, 2t+1.
FragmentCoord metadata_fragment_coord(Index row, Index segment, Index k_slabs);

struct PackedSlot {
  int lane;
  int element;
  int invocation;
  auto operator<=>(const PackedSlot&) const = default;
};

/// Bijection between (thread, element, invocation) slots and packed offsets.
struct PackedLayout {
  std::vector<PackedSlot> slots;               // by packed offset
  std::vector<std::pair<Index, Index>> cells;  // logical (row, col) by packed offset
  std::map<PackedSlot, Index> offsets;

  Index size() const { return static_cast<Index>(slots.size()); }
  std::optional<Index> position(const PackedSlot& s) const;
  /// True when every logical cell of a rows x cols matrix maps to exactly one offset.
  bool is_bijection(Index rows, Index cols) const;
};

template <typename Scalar = double>
struct PackedValues {
  Index L = 0;
  Index fragments = 0;
  PackedLayout layout;
  std::vector<Scalar> buffer;
};

struct PackedMetadata {
  Index L = 0;
  Index fragments = 0;
  PackedLayout layout;
  std::vector<std::uint8_t> buffer;   // one segment descriptor byte per offset
  Matrix<std::uint32_t> registers;   // lane x register image
  std::vector<int> selectors;
  Index registers_per_thread = 0;
};

PackedLayout kernel_value_layout(Index L, Index k_slabs);
PackedLayout metadata_layout(Index L, Index k_slabs);

namespace detail {
void check_packing_plan(const TilingPlan& p, int radius, Index L);
}

template <typename Scalar>
PackedValues<Scalar> pack_kernel_values(const CompressedKernel<Scalar>& c, const TilingPlan& p) {
  detail::check_packing_plan(p, c.radius, c.values.rows());
  PackedValues<Scalar> out{c.L(), p.kernel_fragments, kernel_value_layout(c.L(), p.k_slabs), {}};
  out.buffer.reserve(out.layout.cells.size());
  for (const auto& [row, col] : out.layout.cells) out.buffer.push_back(c.values(row, col));
  return out;
}

template <typename Scalar>
Matrix<Scalar> unpack_kernel_values(const PackedValues<Scalar>& p) {
  Matrix<Scalar> out = Matrix<Scalar>::Zero(p.L, p.L);
  for (Index i = 0; i < p.layout.size(); ++i) {
    const auto [row, col] = p.layout.cells[static_cast<std::size_t>(i)];
    out(row, col) = p.buffer[static_cast<std::size_t>(i)];
  }
  return out;
}

/// Reorganizes metadata per thread and concatenates invocations into shared
/// registers; invocation k is served by lane group selectors[k].
template <typename Scalar>
PackedMetadata pack_metadata(const CompressedKernel<Scalar>& c, const TilingPlan& p);

PackedMetadata pack_metadata_matrix(const MetadataMatrix& meta, const TilingPlan& p, int radius);

MetadataMatrix unpack_metadata(const PackedMetadata& p);
/// Decodes through the per-lane register image rather than the linear buffer.
MetadataMatrix metadata_from_registers(const PackedMetadata& p);

template <typename Scalar>
PackedMetadata pack_metadata(const CompressedKernel<Scalar>& c, const TilingPlan& p) {
  return pack_metadata_matrix(c.metadata, p, c.radius);
}

/// A-operand panel (M x K/2 values) of kernel fragment f, zero padded.
template <typename Scalar>
Matrix<Scalar> fragment_values(const CompressedKernel<Scalar>& c, int fragment, Index k_slabs) {
  const Index mb = fragment / k_slabs, ks = fragment % k_slabs;
  Matrix<Scalar> a = Matrix<Scalar>::Zero(kMmaM16N8K16.m, kMmaM16N8K16.k / 2);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      const Index row = mb * a.rows() + i, col = ks * a.cols() + j;
      if (row < c.L() && col < c.L()) a(i, j) = c.values(row, col);
    }
  return a;
}

/// Same panel, read lane by lane from the packed buffer.
template <typename Scalar>
Matrix<Scalar> fragment_values(const PackedValues<Scalar>& p, int fragment, Index k_slabs) {
  const Index mb = fragment / k_slabs, ks = fragment % k_slabs;
  Matrix<Scalar> a = Matrix<Scalar>::Zero(kMmaM16N8K16.m, kMmaM16N8K16.k / 2);
  for (int lane = 0; lane < kWarpSize; ++lane)
    for (int e = 0; e < kFragmentElements; ++e) {
      const auto pos = p.layout.position({lane, e, fragment});
      if (!pos) continue;
      const auto [row, col] = p.layout.cells[static_cast<std::size_t>(*pos)];
      a(row - mb * a.rows(), col - ks * a.cols()) = p.buffer[static_cast<std::size_t>(*pos)];
    }
  return a;
}

MetadataMatrix fragment_metadata(const MetadataMatrix& meta, Index L, int fragment, Index k_slabs);
/// Fragment metadata decoded from the active lane group's registers.
MetadataMatrix fragment_metadata(const PackedMetadata& p, int fragment, Index k_slabs);

/// Number of maximal contiguous address runs in a fetch.
Index fetch_runs(std::vector<Index> addresses);

/// Warp fetch runs for loading every kernel fragment's values, summed over fragments.
Index value_fetch_runs(Index L, Index k_slabs, bool packed);
Index metadata_fetch_runs(Index L, Index k_slabs, bool packed);

}  // namespace st24
