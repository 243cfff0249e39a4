#include "st24/pipeline.hpp"

namespace st24 {

const char* to_string(Precision p) { return p == Precision::F64 ? "f64" : "f32"; }

Precision parse_precision(const std::string& s) {
  if (s == "f64" || s == "double") return Precision::F64;
  if (s == "f32" || s == "float") return Precision::F32;
  throw Error("unknown precision '" + s + "' (expected f64|f32)");
}

void ExecConfig::validate() const {
  mma.validate();
  if (!(mma == kMmaM16N8K16))
    throw Error("the emulated fragment layout is m16n8k16; got mma " + mma.str());
  if (block_a <= 0 || block_b <= 0 || warp_a <= 0 || warp_b <= 0) throw Error("tile sizes must be positive");
}

TilingPlan plan_for(const ExecConfig& cfg, Index rows, Index cols, int radius) {
  return plan(rows, cols, radius, cfg.block_a, cfg.block_b, cfg.warp_a, cfg.warp_b, cfg.mma);
}

double default_tolerance(Precision p) { return p == Precision::F64 ? 1e-10 : 1e-4; }

std::uint64_t case_seed(std::uint64_t seed, Index size) {
  return seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(size);
}

}  // namespace st24
