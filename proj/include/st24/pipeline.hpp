#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "st24/cost_model.hpp"
#include "st24/sptc.hpp"
#include "st24/stencil.hpp"
#include "st24/tiling.hpp"
#include "st24/transform.hpp"
#include "st24/types.hpp"

namespace st24 {

enum class Precision { F64, F32 };

const char* to_string(Precision p);
Precision parse_precision(const std::string& s);

struct ExecConfig {
  Parity parity = Parity::Even;
  Index block_a = 64;
  Index block_b = 64;
  Index warp_a = 16;
  Index warp_b = 8;
  MmaShape mma = kMmaM16N8K16;
  Precision precision = Precision::F64;
  ComputeMode cost_mode = ComputeMode::Ceil;
  bool packing = true;

  void validate() const;
};

struct ExecStats {
  int radius = 0;
  Index rows = 0;
  Index cols = 0;
  std::int64_t steps = 0;

  std::int64_t macs = 0;  // issued by sparse instructions
  std::int64_t dense_macs = 0;  // a dense MMA over the same tiles
  std::int64_t effective_macs = 0;  // restricted to real kernel rows / input rows
  std::int64_t effective_dense_macs = 0;
  std::int64_t input_loads = 0;
  std::int64_t param_loads = 0;
  std::int64_t metadata_loads = 0;
  std::int64_t mma_invocations = 0;
  std::int64_t blocks = 0;
  std::int64_t kernel_row_passes = 0;
  std::int64_t warp_tiles = 0;
  std::int64_t warp_fetch_runs = 0;

  MeasuredCounts measured() const {
    return {rows, cols, radius, steps, effective_macs, input_loads, param_loads};
  }
  bool operator==(const ExecStats&) const = default;
};

/// One compressed kernel per stencil-kernel row plus the shared input permutation.
template <typename Scalar = double>
struct TransformedStencil {
  std::vector<int> kernel_rows;  // rho of each entry, ascending
  std::vector<CompressedKernel<Scalar>> kernels;
  RowPermutation permutation;
};

template <typename Scalar>
TransformedStencil<Scalar> transform_stencil(const StencilKernel<Scalar>& kernel, const ExecConfig& cfg) {
  if (kernel.dims() != 1 && kernel.dims() != 2)
    throw Error("unsupported stencil dimensionality " + std::to_string(kernel.dims()));
  const int r = kernel.radius();
  TransformedStencil<Scalar> out{{}, {}, input_row_permutation(2 * r + 2, cfg.parity)};
  const int lo = kernel.dims() == 1 ? 0 : -r;
  const int hi = kernel.dims() == 1 ? 0 : r;
  for (int rho = lo; rho <= hi; ++rho) {
    out.kernel_rows.push_back(rho);
    out.kernels.push_back(encode(strided_swap(build_kernel_matrix(kernel.row(rho), r), cfg.parity)));
  }
  return out;
}

TilingPlan plan_for(const ExecConfig& cfg, Index rows, Index cols, int radius);

template <typename Scalar>
struct ExecResult {
  Grid<Scalar> grid;
  ExecStats stats;
};

namespace detail {

// Register-resident A operands of one kernel row: values and metadata per fragment.
template <typename Scalar>
struct KernelOperands {
  std::vector<Matrix<Scalar>> values;
  std::vector<MetadataMatrix> metadata;
};

template <typename Scalar>
KernelOperands<Scalar> load_operands(const CompressedKernel<Scalar>& c, const TilingPlan& p, bool packing) {
  KernelOperands<Scalar> ops;
  if (packing) {
    const auto pv = pack_kernel_values(c, p);
    const auto pm = pack_metadata(c, p);
    for (Index f = 0; f < p.kernel_fragments; ++f) {
      ops.values.push_back(fragment_values(pv, static_cast<int>(f), p.k_slabs));
      ops.metadata.push_back(fragment_metadata(pm, static_cast<int>(f), p.k_slabs));
    }
  } else {
    for (Index f = 0; f < p.kernel_fragments; ++f) {
      ops.values.push_back(fragment_values(c, static_cast<int>(f), p.k_slabs));
      ops.metadata.push_back(fragment_metadata(c.metadata, c.L(), static_cast<int>(f), p.k_slabs));
    }
  }
  return ops;
}

}  // namespace detail

/// Runs T steps through the transformed sparse path.
///
/// Per block and kernel row rho (ascending), the block's input window is staged
/// from grid rows shifted by rho; every warp fetches B fragments from the
/// unpermuted window with swap-adjusted offsets and accumulates the sparse MMA
/// into the block's output registers.
template <typename Scalar>
ExecResult<Scalar> execute(const StencilKernel<Scalar>& kernel, const Grid<Scalar>& grid, int steps,
                           const ExecConfig& cfg) {
  cfg.validate();
  const int r = kernel.radius();
  if (grid.halo() < r)
    throw Error("grid halo " + std::to_string(grid.halo()) + " is smaller than stencil radius " + std::to_string(r));
  if (steps < 1) throw Error("step count must be >= 1");

  const TilingPlan p = plan_for(cfg, grid.rows(), grid.cols(), r);
  const auto ts = transform_stencil(kernel, cfg);
  std::vector<detail::KernelOperands<Scalar>> operands;
  for (const auto& c : ts.kernels) operands.push_back(detail::load_operands(c, p, cfg.packing));

  const Index L = p.L;
  const Index H = p.chunk_rows;
  const Index M = cfg.mma.m, N = cfg.mma.n, K = cfg.mma.k;
  const Index warp_rows = p.block_a / p.warp_a;
  const Index warp_cols = p.block_b / p.warp_b;
  const std::int64_t runs_per_kernel_load =
      value_fetch_runs(L, p.k_slabs, cfg.packing) + metadata_fetch_runs(L, p.k_slabs, cfg.packing);

  ExecStats st;
  st.radius = r;
  st.rows = grid.rows();
  st.cols = grid.cols();
  st.steps = steps;

  Grid<Scalar> cur = grid;
  Grid<Scalar> next = grid;
  Matrix<Scalar> window(p.block_b, p.staged_width);
  Matrix<Scalar> acc(p.chunks_per_block * H, p.block_b);

  for (int t = 0; t < steps; ++t) {
    for (Index b = 0; b < p.blocks; ++b) {
      ++st.blocks;
      acc.setZero();
      for (std::size_t kr = 0; kr < ts.kernels.size(); ++kr) {
        const int rho = ts.kernel_rows[kr];
        ++st.kernel_row_passes;
        window.setZero();
        for (Index n = 0; n < p.block_b; ++n) {
          const Index v = b * p.block_b + n;
          if (v >= p.virtual_rows) continue;
          const Index y = v % p.rows, x0 = (v / p.rows) * p.block_points;
          for (Index u = 0; u < p.staged_width; ++u) window(n, u) = cur.at_or_zero(y + rho, x0 - r + u);
        }
        st.input_loads += p.staged_elements;
        st.param_loads += L * L;
        st.metadata_loads += L * L / 2;

        const auto& ops = operands[kr];
        for (Index wa = 0; wa < warp_rows; ++wa) {
          for (Index wb = 0; wb < warp_cols; ++wb) {
            ++st.warp_tiles;
            st.warp_fetch_runs += runs_per_kernel_load;
            for (Index cq = 0; cq < p.chunks_per_warp; ++cq) {
              const Index q = wa * p.chunks_per_warp + cq;
              // Column n of the chunk's 2L-row input matrix is window row n.
              const Matrix<Scalar> x = window.block(wb * p.warp_b, q * L, p.warp_b, 2 * L).transpose();
              for (Index mb = 0; mb < p.m_blocks_per_chunk; ++mb) {
                const Index real_rows = std::min(M, L - mb * M);
                for (Index nb = 0; nb < p.warp_b / N; ++nb) {
                  for (Index ks = 0; ks < p.k_slabs; ++ks) {
                    const Index real_k = std::min(K, 2 * L - ks * K);
                    const auto b_op = gather_b_operand(x.middleCols(nb * N, N), static_cast<int>(ks), true, L, cfg.parity);
                    const auto f = static_cast<std::size_t>(mb * p.k_slabs + ks);
                    auto c_blk = acc.block(q * H + mb * M, wb * p.warp_b + nb * N, M, N);
                    sparse_mma_accumulate(ops.values[f], ops.metadata[f], b_op, c_blk);
                    ++st.mma_invocations;
                    st.macs += mac_count(cfg.mma);
                    st.dense_macs += dense_mac_count(cfg.mma);
                    st.effective_macs += real_rows * N * real_k / 2;
                    st.effective_dense_macs += real_rows * N * real_k;
                  }
                }
              }
            }
          }
        }
      }
      for (Index n = 0; n < p.block_b; ++n) {
        const Index v = b * p.block_b + n;
        if (v >= p.virtual_rows) continue;
        const Index y = v % p.rows, x0 = (v / p.rows) * p.block_points;
        for (Index q = 0; q < p.chunks_per_block; ++q)
          for (Index i = 0; i < L; ++i) {
            const Index x = x0 + q * L + i;
            if (x < p.cols) next.at(y, x) = acc(q * H + i, n);
          }
      }
    }
    next.step = cur.step + 1;
    std::swap(cur, next);
  }
  return {std::move(cur), st};
}

struct VerifyCase {
  Index rows = 0;
  Index cols = 0;
  double max_rel_error = 0.0;
  bool pass = false;
  ExecStats stats;
};

struct VerifyReport {
  Shape shape = Shape::Box;
  int dims = 0;
  int radius = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  double tolerance = 0.0;
  ExecConfig config;
  std::vector<VerifyCase> cases;
  bool pass = false;
};

double default_tolerance(Precision p);

/// Seed of the random grid for one verify case.
std::uint64_t case_seed(std::uint64_t seed, Index size);

/// Compares execute against naive_apply on seeded n x n grids, one case per size.
/// A case passes when its max relative error is below the tolerance (the
/// precision default unless given).
template <typename Scalar>
VerifyReport verify(const StencilKernel<Scalar>& kernel, const std::vector<Index>& sizes, std::uint64_t seed, int steps,
                    const ExecConfig& cfg, std::optional<double> tolerance = std::nullopt) {
  VerifyReport rep;
  rep.shape = kernel.shape();
  rep.dims = kernel.dims();
  rep.radius = kernel.radius();
  rep.seed = seed;
  rep.steps = steps;
  rep.tolerance = tolerance.value_or(default_tolerance(cfg.precision));
  rep.config = cfg;
  rep.pass = true;
  for (Index n : sizes) {
    const auto g = make_random_grid<Scalar>(n, n, kernel.radius(), case_seed(seed, n));
    const auto expected = naive_apply(kernel, g, steps);
    const auto got = execute(kernel, g, steps, cfg);
    VerifyCase vc;
    vc.rows = n;
    vc.cols = n;
    vc.max_rel_error = max_relative_error(got.grid, expected);
    vc.pass = vc.max_rel_error < rep.tolerance;
    vc.stats = got.stats;
    rep.pass = rep.pass && vc.pass;
    rep.cases.push_back(vc);
  }
  return rep;
}

}  // namespace st24
