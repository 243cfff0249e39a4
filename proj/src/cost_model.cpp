#include "st24/cost_model.hpp"

#include <sstream>

namespace st24 {

namespace {

using Int = std::int64_t;

Int ceil_q(Int a, Int b) { return (a + b - 1) / b; }

Rational q(Int n, Int d = 1) { return Rational(n, d); }

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::LowerBound: return "lower-bound";
    case Method::ConvStencil: return "convstencil";
    case Method::TCStencil: return "tcstencil";
    case Method::LoRAStencil: return "lorastencil";
    case Method::StridedSwap: return "strided-swap";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (s == to_string(m)) return m;
  throw Error("unknown method '" + s + "'");
}

std::vector<Method> all_methods() {
  return {Method::LowerBound, Method::ConvStencil, Method::TCStencil, Method::LoRAStencil, Method::StridedSwap};
}

const char* to_string(ComputeMode m) { return m == ComputeMode::Ceil ? "ceil" : "exact"; }

ComputeMode parse_compute_mode(const std::string& s) {
  if (s == "ceil") return ComputeMode::Ceil;
  if (s == "exact") return ComputeMode::Exact;
  throw Error("unknown compute mode '" + s + "' (expected ceil|exact)");
}

void CostParams::validate() const {
  if (r < 1) throw Error("cost model needs radius r >= 1");
  if (A < 1 || B < 1 || c < 1 || L < 1) throw Error("cost model parameters A, B, c, L must be >= 1");
}

CostParams default_cost_params(int r, std::int64_t c, std::int64_t L) {
  const std::int64_t a = 2 * c * (r + 1) * c;
  return CostParams{a, a, r, c, L};
}

CostTriple cost(Method method, const CostParams& p, ComputeMode mode) {
  p.validate();
  const Int A = p.A, B = p.B, r = p.r, c = p.c, L = p.L;
  const Int AB = A * B;
  const Int taps = (2 * r + 1) * (2 * r + 1);

  switch (method) {
    case Method::LowerBound:
      return {q(AB * taps), q(AB * (c + 2 * r) * (c + 2 * r), c * c), q(AB * taps, c * c)};

    case Method::ConvStencil: {
      const Int tiles = ceil_q(A, 2 * c * (r + 1));
      const Int c8 = ceil_q(c, 8), r4 = ceil_q(r + 1, 4), t4 = ceil_q(taps, 4);
      return {q(512 * B * tiles * c8 * r4 * t4), q(64 * B * t4 * tiles * c8), q(64 * B * t4 * r4 * tiles * c8)};
    }

    case Method::TCStencil: {
      if (L <= 2 * r) throw Error("TCStencil needs L > 2r (L=" + std::to_string(L) + ", r=" + std::to_string(r) + ")");
      const Int useful = (L - 2 * r) * (L - 2 * r);
      const Rational access = q(AB * L * L * (2 * r + 1), useful);
      return {q(AB * L * L * L * (2 * r + 1), useful), access, access};
    }

    case Method::LoRAStencil: {
      const Int c8 = ceil_q(c, 8), w4 = ceil_q(2 * r + c, 4), w8 = ceil_q(2 * r + c, 8);
      return {q(256 * r * AB * c8 * w4 * (w8 + c8), c * c), q(32 * AB * w4 * w8, c * c), q(AB * 4 * r, ceil_q(r, 4))};
    }

    case Method::StridedSwap: {
      const Int c8 = ceil_q(c, 8), w4 = ceil_q(2 * r + c, 4);
      const Rational width4 = mode == ComputeMode::Ceil ? q(w4) : q(2 * r + c, 4);
      return {q(256 * AB * (r + 1) * c8 * c8, c * c) * width4, q(32 * AB * (2 * r + 1) * c8 * w4, c * c),
              q(16 * AB * (2 * r + 1) * c8 * w4, c * c)};
    }
  }
  throw Error("unknown method");
}

CostTriple cost_per_point(Method method, const CostParams& p, ComputeMode mode) {
  return cost(method, p, mode) / q(p.A * p.B);
}

CostTriple strided_swap_uncapped(const CostParams& p) {
  p.validate();
  const Int AB = p.A * p.B, r = p.r, c = p.c;
  const Rational c8 = q(c, 8), w4 = q(2 * r + c, 4);
  return {q(256 * AB * (r + 1), c * c) * c8 * c8 * w4, q(32 * AB * (2 * r + 1), c * c) * c8 * w4,
          q(16 * AB * (2 * r + 1), c * c) * c8 * w4};
}

std::vector<Redundancy> redundancy_factors(const CostParams& p, ComputeMode mode) {
  const CostTriple lb = cost(Method::LowerBound, p);
  std::vector<Redundancy> out;
  for (Method m : all_methods()) {
    if (m == Method::LowerBound) continue;
    const CostTriple t = cost(m, p, mode);
    out.push_back({m, t.compute / lb.compute, t.input_access / lb.input_access, t.param_access / lb.param_access});
  }
  return out;
}

std::string to_string(const Rational& v) {
  std::ostringstream os;
  os << v.numerator();
  if (v.denominator() != 1) os << "/" << v.denominator();
  return os.str();
}

ModelComparison measured_vs_model(const MeasuredCounts& counts, const CostParams& p) {
  p.validate();
  if (counts.radius != p.r)
    throw Error("measured run used r=" + std::to_string(counts.radius) + " but the model was asked for r=" +
                std::to_string(p.r));
  if (counts.rows != p.A || counts.cols != p.B)
    throw Error("measured grid " + std::to_string(counts.rows) + "x" + std::to_string(counts.cols) +
                " does not match model A x B = " + std::to_string(p.A) + "x" + std::to_string(p.B));
  if (counts.steps < 1) throw Error("measured run has no time steps");

  const double points = static_cast<double>(counts.rows) * static_cast<double>(counts.cols) *
                        static_cast<double>(counts.steps);
  const CostTriple hi = cost_per_point(Method::StridedSwap, p, ComputeMode::Ceil);
  const CostTriple lo = strided_swap_uncapped(p) / q(p.A * p.B);

  auto entry = [&](const char* name, std::int64_t measured, const Rational& model_hi, const Rational& model_lo) {
    ModelEntry e;
    e.metric = name;
    e.measured = static_cast<double>(measured) / points;
    e.model_ceil = to_double(model_hi);
    e.model_exact = to_double(model_lo);
    e.deviation = (e.measured - e.model_ceil) / e.model_ceil;
    // Exact Rational check so boundary values land inside the envelope.
    const Rational m = Rational(measured) / Rational(counts.rows * counts.cols * counts.steps);
    e.within_envelope = m >= model_lo && m <= model_hi;
    return e;
  };

  ModelComparison out{p, {}};
  out.entries.push_back(entry("compute", counts.effective_macs, hi.compute, lo.compute));
  out.entries.push_back(entry("input_access", counts.input_loads, hi.input_access, lo.input_access));
  out.entries.push_back(entry("param_access", counts.param_loads, hi.param_access, lo.param_access));
  return out;
}

}  // namespace st24
