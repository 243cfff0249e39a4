#include "st24/tiling.hpp"

#include <algorithm>

namespace st24 {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

std::string dims(Index a, Index b) { return std::to_string(a) + "x" + std::to_string(b); }

}  // namespace

TilingPlan plan(Index rows, Index cols, int radius, Index block_a, Index block_b, Index warp_a, Index warp_b,
                const MmaShape& mma) {
  mma.validate();
  require(radius >= 1, "tiling needs radius >= 1");
  require(rows >= 1 && cols >= 1, "problem size must be at least 1x1");
  require(block_a > 0 && block_b > 0 && warp_a > 0 && warp_b > 0, "tile sizes must be positive");
  require(block_a % warp_a == 0, "block tile A_b=" + std::to_string(block_a) + " is not a multiple of warp A_w=" +
                                     std::to_string(warp_a));
  require(block_b % warp_b == 0, "block tile B_b=" + std::to_string(block_b) + " is not a multiple of warp B_w=" +
                                     std::to_string(warp_b));
  require(warp_a % mma.m == 0, "warp tile A_w=" + std::to_string(warp_a) + " is not a multiple of M_mma=" +
                                   std::to_string(mma.m));
  require(warp_b % mma.n == 0, "warp tile B_w=" + std::to_string(warp_b) + " is not a multiple of N_mma=" +
                                   std::to_string(mma.n));

  TilingPlan p;
  p.rows = rows;
  p.cols = cols;
  p.radius = radius;
  p.block_a = block_a;
  p.block_b = block_b;
  p.warp_a = warp_a;
  p.warp_b = warp_b;
  p.mma = mma;

  p.L = 2 * radius + 2;
  p.chunk_rows = round_up(p.L, mma.m);
  p.m_blocks_per_chunk = p.chunk_rows / mma.m;
  p.k_slabs = ceil_div(2 * p.L, mma.k);
  require(warp_a % p.chunk_rows == 0, "warp tile A_w=" + std::to_string(warp_a) +
                                          " must hold whole chunks of " + std::to_string(p.chunk_rows) +
                                          " padded kernel rows");
  p.chunks_per_block = block_a / p.chunk_rows;
  p.chunks_per_warp = warp_a / p.chunk_rows;
  p.block_points = p.chunks_per_block * p.L;
  require(p.block_points <= round_up(cols, p.L), "block tile covers " + std::to_string(p.block_points) +
                                                     " points along x but the grid row has only " +
                                                     std::to_string(cols));

  p.warps_per_block = (block_a / warp_a) * (block_b / warp_b);
  p.invocations_per_warp_pass = (warp_a / mma.m) * (warp_b / mma.n) * p.k_slabs;
  p.invocations_per_block_pass = p.warps_per_block * p.invocations_per_warp_pass;

  p.shared_rows = block_a + 2 * radius;
  p.shared_cols = block_b;
  p.shared_elements = p.shared_rows * p.shared_cols;
  p.staged_width = p.block_points + 2 * radius + 2;
  p.staged_elements = p.staged_width * block_b;

  p.segments_per_row = ceil_div(cols, p.block_points);
  p.virtual_rows = rows * p.segments_per_row;
  p.blocks = ceil_div(p.virtual_rows, block_b);

  p.kernel_in_registers = true;
  p.kernel_fragments = p.m_blocks_per_chunk * p.k_slabs;
  for (Index f = 0; f < p.kernel_fragments; ++f) p.selectors.push_back(static_cast<int>(f % kSelectorGroups));
  // One invocation's metadata is M*(K/4)*4 bits spread over the whole warp.
  const Index bits_per_thread = mma.m * (mma.k / 4) * 4 / kWarpSize;
  p.metadata_registers_per_thread = ceil_div(p.kernel_fragments * bits_per_thread, kRegisterBits);
  p.a_elements_per_thread = p.kernel_fragments * (mma.m * mma.k / 2) / kWarpSize;
  p.b_elements_per_thread = mma.k * mma.n / kWarpSize;
  p.c_elements_per_thread = (warp_a / mma.m) * (warp_b / mma.n) * (mma.m * mma.n / kWarpSize);
  return p;
}

FragmentCoord value_fragment_coord(Index row, Index col, Index k_slabs) {
  const Index m = kMmaM16N8K16.m, kc = kMmaM16N8K16.k / 2;
  const Index f = (row / m) * k_slabs + col / kc;
  const Index lr = row % m, lc = col % kc;
  return {static_cast<int>(f), static_cast<int>((lr % 8) * 4 + lc / 2), static_cast<int>((lr / 8) * 2 + lc % 2)};
}

FragmentCoord metadata_fragment_coord(Index row, Index segment, Index k_slabs) {
  const Index m = kMmaM16N8K16.m, ks = kMmaM16N8K16.k / 4;
  const Index f = (row / m) * k_slabs + segment / ks;
  const Index lr = row % m, ls = segment % ks;
  const Index lane = (f % kSelectorGroups) * kSelectorGroupLanes + lr / 2;
  return {static_cast<int>(f), static_cast<int>(lane), static_cast<int>((lr % 2) * ks + ls)};
}

std::optional<Index> PackedLayout::position(const PackedSlot& s) const {
  const auto it = offsets.find(s);
  if (it == offsets.end()) return std::nullopt;
  return it->second;
}

bool PackedLayout::is_bijection(Index rows, Index cols) const {
  if (size() != rows * cols || static_cast<Index>(cells.size()) != size()) return false;
  std::vector<int> seen(static_cast<std::size_t>(rows * cols), 0);
  for (const auto& [r, c] : cells) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return false;
    if (seen[static_cast<std::size_t>(r * cols + c)]++) return false;
  }
  if (static_cast<Index>(offsets.size()) != size()) return false;
  for (const auto& [slot, off] : offsets)
    if (off < 0 || off >= size() || slots[static_cast<std::size_t>(off)] != slot) return false;
  return true;
}

namespace {

template <typename CoordFn>
PackedLayout build_layout(Index rows, Index cols, CoordFn coord) {
  struct Entry {
    PackedSlot slot;
    Index row, col;
  };
  std::vector<Entry> entries;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const FragmentCoord fc = coord(r, c);
      entries.push_back({{fc.lane, fc.element, fc.fragment}, r, c});
    }
  // Invocations are laid out back to back; inside one, lanes in order with
  // each lane's elements contiguous.
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.slot.invocation, a.slot.lane, a.slot.element) <
           std::tie(b.slot.invocation, b.slot.lane, b.slot.element);
  });
  PackedLayout layout;
  for (const auto& e : entries) {
    layout.offsets.emplace(e.slot, layout.size());
    layout.slots.push_back(e.slot);
    layout.cells.emplace_back(e.row, e.col);
  }
  return layout;
}

}  // namespace

PackedLayout kernel_value_layout(Index L, Index k_slabs) {
  return build_layout(L, L, [&](Index r, Index c) { return value_fragment_coord(r, c, k_slabs); });
}

PackedLayout metadata_layout(Index L, Index k_slabs) {
  return build_layout(L, L / 2, [&](Index r, Index s) { return metadata_fragment_coord(r, s, k_slabs); });
}

namespace detail {

void check_packing_plan(const TilingPlan& p, int radius, Index L) {
  if (p.radius != radius)
    throw Error("tiling plan radius " + std::to_string(p.radius) + " does not match kernel radius " +
                std::to_string(radius));
  if (L != 2 * radius + 2) throw Error("compressed kernel has " + std::to_string(L) + " rows, expected 2r+2");
  if (!(p.mma == kMmaM16N8K16)) throw Error("packing models the m16n8k16 fragment layout only, plan uses " + p.mma.str());
}

}  // namespace detail

PackedMetadata pack_metadata_matrix(const MetadataMatrix& meta, const TilingPlan& p, int radius) {
  detail::check_packing_plan(p, radius, meta.rows());
  const Index L = meta.rows();
  if (meta.cols() != L / 2) throw Error("metadata must have L/2 segments per row, got " + dims(L, meta.cols()));

  PackedMetadata out;
  out.L = L;
  out.fragments = p.kernel_fragments;
  out.layout = metadata_layout(L, p.k_slabs);
  out.selectors = p.selectors;
  out.registers_per_thread = p.metadata_registers_per_thread;
  for (const auto& [row, seg] : out.layout.cells) out.buffer.push_back(meta(row, seg));

  out.registers = Matrix<std::uint32_t>::Zero(kWarpSize, out.registers_per_thread);
  const Index m = kMmaM16N8K16.m, ks = kMmaM16N8K16.k / 4;
  for (Index f = 0; f < out.fragments; ++f) {
    const Index mb = f / p.k_slabs, slab = f % p.k_slabs;
    for (Index lr = 0; lr < m; ++lr)
      for (Index ls = 0; ls < ks; ++ls) {
        const Index row = mb * m + lr, seg = slab * ks + ls;
        const std::uint8_t md = (row < L && seg < L / 2) ? meta(row, seg) : kZeroSegmentMeta;
        const FragmentCoord fc = metadata_fragment_coord(row, seg, p.k_slabs);
        out.registers(fc.lane, f / kSelectorGroups) |= static_cast<std::uint32_t>(md) << (4 * fc.element);
      }
  }
  return out;
}

MetadataMatrix unpack_metadata(const PackedMetadata& p) {
  MetadataMatrix out = MetadataMatrix::Zero(p.L, p.L / 2);
  for (Index i = 0; i < p.layout.size(); ++i) {
    const auto [row, seg] = p.layout.cells[static_cast<std::size_t>(i)];
    out(row, seg) = p.buffer[static_cast<std::size_t>(i)];
  }
  return out;
}

namespace {

std::uint8_t register_nibble(const PackedMetadata& p, const FragmentCoord& fc) {
  const std::uint32_t word = p.registers(fc.lane, fc.fragment / kSelectorGroups);
  return static_cast<std::uint8_t>((word >> (4 * fc.element)) & 0xFu);
}

Index k_slabs_of(const PackedMetadata& p) {
  // fragments = m_blocks * k_slabs with k_slabs = ceil(2L / 16).
  return ceil_div(2 * p.L, kMmaM16N8K16.k);
}

}  // namespace

MetadataMatrix metadata_from_registers(const PackedMetadata& p) {
  const Index k_slabs = k_slabs_of(p);
  MetadataMatrix out = MetadataMatrix::Zero(p.L, p.L / 2);
  for (Index row = 0; row < p.L; ++row)
    for (Index seg = 0; seg < p.L / 2; ++seg) out(row, seg) = register_nibble(p, metadata_fragment_coord(row, seg, k_slabs));
  return out;
}

MetadataMatrix fragment_metadata(const MetadataMatrix& meta, Index L, int fragment, Index k_slabs) {
  const Index m = kMmaM16N8K16.m, ks = kMmaM16N8K16.k / 4;
  const Index mb = fragment / k_slabs, slab = fragment % k_slabs;
  MetadataMatrix out = MetadataMatrix::Constant(m, ks, kZeroSegmentMeta);
  for (Index i = 0; i < m; ++i)
    for (Index s = 0; s < ks; ++s) {
      const Index row = mb * m + i, seg = slab * ks + s;
      if (row < L && seg < L / 2) out(i, s) = meta(row, seg);
    }
  return out;
}

MetadataMatrix fragment_metadata(const PackedMetadata& p, int fragment, Index k_slabs) {
  const Index m = kMmaM16N8K16.m, ks = kMmaM16N8K16.k / 4;
  const Index mb = fragment / k_slabs, slab = fragment % k_slabs;
  MetadataMatrix out(m, ks);
  for (Index i = 0; i < m; ++i)
    for (Index s = 0; s < ks; ++s)
      out(i, s) = register_nibble(p, metadata_fragment_coord(mb * m + i, slab * ks + s, k_slabs));
  return out;
}

Index fetch_runs(std::vector<Index> addresses) {
  if (addresses.empty()) return 0;
  std::sort(addresses.begin(), addresses.end());
  addresses.erase(std::unique(addresses.begin(), addresses.end()), addresses.end());
  Index runs = 1;
  for (std::size_t i = 1; i < addresses.size(); ++i)
    if (addresses[i] != addresses[i - 1] + 1) ++runs;
  return runs;
}

namespace {

Index layout_fetch_runs(const PackedLayout& layout, Index row_stride, bool packed) {
  std::map<int, std::vector<Index>> by_fragment;
  for (Index i = 0; i < layout.size(); ++i) {
    const auto& slot = layout.slots[static_cast<std::size_t>(i)];
    const auto [row, col] = layout.cells[static_cast<std::size_t>(i)];
    by_fragment[slot.invocation].push_back(packed ? i : row * row_stride + col);
  }
  Index runs = 0;
  for (auto& [f, addrs] : by_fragment) runs += fetch_runs(std::move(addrs));
  return runs;
}

}  // namespace

Index value_fetch_runs(Index L, Index k_slabs, bool packed) {
  return layout_fetch_runs(kernel_value_layout(L, k_slabs), L, packed);
}

Index metadata_fetch_runs(Index L, Index k_slabs, bool packed) {
  return layout_fetch_runs(metadata_layout(L, k_slabs), L / 2, packed);
}

}  // namespace st24
