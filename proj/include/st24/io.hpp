#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "st24/cost_model.hpp"
#include "st24/pipeline.hpp"
#include "st24/stencil.hpp"
#include "st24/tiling.hpp"
#include "st24/transform.hpp"

namespace st24 {

using Json = nlohmann::ordered_json;

// Grid: 16-byte header {"SPGR", u32 A, u32 B, u32 halo}, then the stored
// (A+2h) x (B+2h) extent as row-major little-endian f64.
void write_grid_binary(std::ostream& os, const Grid<double>& g);
Grid<double> read_grid_binary(std::istream& is);

Json grid_to_json(const Grid<double>& g);
Grid<double> grid_from_json(const Json& j);

// Dispatches on extension: ".json" is JSON, anything else the binary format.
Grid<double> load_grid(const std::string& path);
void save_grid(const std::string& path, const Grid<double>& g);

// {"shape": "box"|"star", "d": 1|2, "r": r, "coeffs": [row-major]}
Json kernel_to_json(const StencilKernel<double>& k);
StencilKernel<double> kernel_from_json(const Json& j);
StencilKernel<double> load_kernel(const std::string& path);

// Compressed kernel: {"SPCK", u16 r, u16 L, u8 parity}, L*L f64 values, L*L/2
// metadata bytes. Multi-row kernels are consecutive records.
void write_compressed_kernel(std::ostream& os, const CompressedKernel<double>& c);
CompressedKernel<double> read_compressed_kernel(std::istream& is);
std::vector<CompressedKernel<double>> read_compressed_kernels(std::istream& is);
Json compressed_kernel_to_json(const CompressedKernel<double>& c);

// Packed buffer: {"SPPK", u16 kind, u16 L, u32 length, u32 fragments}. Kind 0
// carries `length` f64 kernel values, kind 1 `length` u32 metadata registers
// (lane-major).
enum class PackedKind : std::uint16_t { Values = 0, Metadata = 1 };

struct PackedBlob {
  PackedKind kind = PackedKind::Values;
  std::uint16_t L = 0;
  std::uint32_t fragments = 0;
  std::vector<double> values;
  std::vector<std::uint32_t> registers;
};

void write_packed(std::ostream& os, const PackedValues<double>& p);
void write_packed(std::ostream& os, const PackedMetadata& p);
PackedBlob read_packed(std::istream& is);

Json plan_to_json(const TilingPlan& p);
Json config_to_json(const ExecConfig& c);
Json stats_to_json(const ExecStats& s);
Json verify_report_to_json(const VerifyReport& r);
Json model_comparison_to_json(const ModelComparison& m);
Json cost_triple_to_json(const CostTriple& t);

/// lane -> [[row, col] x 4] for one m16n8k16 B fragment.
Json fragment_map_json();

}  // namespace st24
