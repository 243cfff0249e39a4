#include "st24/sptc.hpp"

#include <cstdio>

namespace st24 {

void MmaShape::validate() const {
  if (m < 1 || n < 1 || k < 1) throw Error("mma shape dimensions must be positive");
  if (k % 4 != 0) throw Error("mma K dimension must be divisible by 4, got " + std::to_string(k));
}

std::string MmaShape::str() const {
  return std::to_string(m) + "x" + std::to_string(n) + "x" + std::to_string(k);
}

MmaShape MmaShape::parse(const std::string& s) {
  long m = 0, n = 0, k = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%ldx%ldx%ld%c", &m, &n, &k, &tail) != 3)
    throw Error("cannot parse mma shape '" + s + "' (expected MxNxK)");
  MmaShape shape{m, n, k};
  shape.validate();
  return shape;
}

LaneId::LaneId(int lane) : lane_(lane) {
  if (lane < 0 || lane >= kWarpSize) throw Error("lane id " + std::to_string(lane) + " outside [0, 31]");
}

Index offset_row(LaneId lane, int element) {
  if (element < 0 || element >= kFragmentElements)
    throw Error("fragment element index " + std::to_string(element) + " outside [0, 3]");
  return 2 * (lane.value() % 4) + 8 * (element / 2) + (element % 2);
}

Index adjusted_offset(LaneId lane, int element, int invocation, Index L, Parity parity, Index k_mma) {
  if (L < 2 || L % 2 != 0) throw Error("adjusted offset needs an even L >= 2");
  if (invocation < 0) throw Error("invocation index must be nonnegative");
  const Index raw = invocation * k_mma + offset_row(lane, element);
  if (raw >= 2 * L || !in_parity_class(raw, parity)) return raw;
  return raw < L ? raw + L : raw - L;
}

}  // namespace st24
