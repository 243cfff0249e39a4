#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "st24/transform.hpp"
#include "st24/types.hpp"

namespace st24 {

enum class Method { LowerBound, ConvStencil, TCStencil, LoRAStencil, StridedSwap };

const char* to_string(Method m);
Method parse_method(const std::string& s);
std::vector<Method> all_methods();

// How the strided-swap compute formula treats ceil((2r+c)/4). `Exact` is the
// value without the ceiling, which matches the per-point reference values.
enum class ComputeMode { Ceil, Exact };

const char* to_string(ComputeMode m);
ComputeMode parse_compute_mode(const std::string& s);

// Box-2D stencil of radius r over an A x B input, c x c points updated per tile.
struct CostParams {
  std::int64_t A = 0;
  std::int64_t B = 0;
  int r = 0;
  std::int64_t c = 0;
  std::int64_t L = 16;  // TCStencil matrix size only

  void validate() const;
};

/// A = B = 2c(r+1)*c, so every ceil over A is tight.
CostParams default_cost_params(int r, std::int64_t c, std::int64_t L = 16);

struct CostTriple {
  Rational compute;
  Rational input_access;
  Rational param_access;

  CostTriple operator/(const Rational& d) const { return {compute / d, input_access / d, param_access / d}; }
  bool operator==(const CostTriple&) const = default;
};

CostTriple cost(Method method, const CostParams& p, ComputeMode mode = ComputeMode::Ceil);
CostTriple cost_per_point(Method method, const CostParams& p, ComputeMode mode = ComputeMode::Ceil);

/// Strided-swap formulas with every ceiling dropped: the continuous lower envelope.
CostTriple strided_swap_uncapped(const CostParams& p);

struct Redundancy {
  Method method;
  Rational compute;
  Rational input_access;
  Rational param_access;
};

/// Per-component ratio of each non-baseline method against the lower bound.
std::vector<Redundancy> redundancy_factors(const CostParams& p, ComputeMode mode = ComputeMode::Ceil);

inline double to_double(const Rational& q) { return boost::rational_cast<double>(q); }
std::string to_string(const Rational& q);

/// Counters an emulated run reports for cross-checking against the model.
struct MeasuredCounts {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  int radius = 0;
  std::int64_t steps = 0;
  std::int64_t effective_macs = 0;
  std::int64_t input_loads = 0;
  std::int64_t param_loads = 0;
};

struct ModelEntry {
  std::string metric;
  double measured = 0.0;     // per point per step
  double model_ceil = 0.0;
  double model_exact = 0.0;  // all ceilings dropped
  double deviation = 0.0;    // (measured - model_ceil) / model_ceil
  bool within_envelope = false;
};

struct ModelComparison {
  CostParams params;
  std::vector<ModelEntry> entries;
};

ModelComparison measured_vs_model(const MeasuredCounts& counts, const CostParams& p);

}  // namespace st24
