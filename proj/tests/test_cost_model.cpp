#include <gtest/gtest.h>

#include <cmath>

#include "st24/cost_model.hpp"
#include "st24/pipeline.hpp"

using namespace st24;

namespace {

const CostParams kR3C8 = default_cost_params(3, 8);

CostTriple triple(Rational a, Rational b, Rational c) { return {a, b, c}; }

}  // namespace

TEST(PerPointCost, LowerBound) {
  EXPECT_EQ(cost_per_point(Method::LowerBound, kR3C8), triple(49, Rational(49, 16), Rational(49, 64)));
}

TEST(PerPointCost, ConvStencil) {
  EXPECT_EQ(cost_per_point(Method::ConvStencil, kR3C8), triple(104, 13, 13));
}

TEST(PerPointCost, TCStencil) {
  EXPECT_EQ(cost_per_point(Method::TCStencil, kR3C8), triple(Rational(7168, 25), Rational(448, 25), Rational(448, 25)));
  EXPECT_DOUBLE_EQ(to_double(cost_per_point(Method::TCStencil, kR3C8).compute), 286.72);
}

TEST(PerPointCost, LoRAStencil) {
  EXPECT_EQ(cost_per_point(Method::LoRAStencil, kR3C8), triple(144, 4, 12));
}

TEST(PerPointCost, StridedSwapBothModes) {
  const auto ceil_t = cost_per_point(Method::StridedSwap, kR3C8, ComputeMode::Ceil);
  const auto exact_t = cost_per_point(Method::StridedSwap, kR3C8, ComputeMode::Exact);
  EXPECT_EQ(ceil_t, triple(64, 14, 7));
  EXPECT_EQ(exact_t, triple(56, 14, 7));
}

TEST(PerPointCost, DefaultParamsAreTight) {
  EXPECT_EQ(kR3C8.A, 64 * 8);
  EXPECT_EQ(kR3C8.B, 64 * 8);
  EXPECT_EQ(kR3C8.A % (2 * 8 * 4), 0);
}

TEST(Redundancy, RadiusThreeTileEight) {
  const auto rf = redundancy_factors(kR3C8);
  auto find = [&](Method m) {
    for (const auto& r : rf)
      if (r.method == m) return r;
    ADD_FAILURE() << "missing " << to_string(m);
    return rf.front();
  };
  const auto conv = find(Method::ConvStencil), lora = find(Method::LoRAStencil), tc = find(Method::TCStencil);
  EXPECT_NEAR(to_double(conv.compute), 2.12, 0.01);
  EXPECT_NEAR(to_double(lora.compute), 2.94, 0.01);
  EXPECT_NEAR(to_double(tc.compute), 5.85, 0.01);
  EXPECT_NEAR(to_double(conv.input_access), 4.24, 0.01);
  EXPECT_NEAR(to_double(lora.input_access), 1.31, 0.01);
  EXPECT_NEAR(to_double(tc.input_access), 5.85, 0.01);
  EXPECT_NEAR(to_double(conv.param_access), 16.98, 0.01);
  EXPECT_NEAR(to_double(lora.param_access), 15.67, 0.01);
  EXPECT_NEAR(to_double(tc.param_access), 23.41, 0.01);
}

TEST(CostProperties, TableMethodsAtLeastLowerBound) {
  for (int r = 1; r <= 7; ++r)
    for (std::int64_t c : {4, 8, 16}) {
      const auto p = default_cost_params(r, c, 2 * r + 2 > 16 ? 2 * r + 2 : 16);
      const auto lb = cost(Method::LowerBound, p);
      for (Method m : {Method::ConvStencil, Method::TCStencil, Method::LoRAStencil}) {
        const auto t = cost(m, p);
        EXPECT_GE(t.compute, lb.compute) << to_string(m) << " r=" << r << " c=" << c;
        EXPECT_GE(t.input_access, lb.input_access) << to_string(m) << " r=" << r << " c=" << c;
        if (m == Method::LoRAStencil && r == 7 && c == 4) continue;
        EXPECT_GE(t.param_access, lb.param_access) << to_string(m) << " r=" << r << " c=" << c;
      }
    }
}

TEST(CostProperties, LoRAParamCounterexample) {
  const auto p = default_cost_params(7, 4);
  EXPECT_EQ(cost_per_point(Method::LoRAStencil, p).param_access, Rational(14));
  EXPECT_EQ(cost_per_point(Method::LowerBound, p).param_access, Rational(225, 16));
  EXPECT_LT(cost(Method::LoRAStencil, p).param_access, cost(Method::LowerBound, p).param_access);
}

TEST(CostProperties, LoRAParamBelowBoundAtUnitTile) {
  const auto p = default_cost_params(3, 1);
  EXPECT_LT(cost(Method::LoRAStencil, p).param_access, cost(Method::LowerBound, p).param_access);
}

TEST(CostProperties, SparseComputeIsHalfOfDense) {
  // Doubling the (r+1) factor to the dense 2r+2 rows doubles the compute.
  for (int r = 1; r <= 7; ++r)
    for (std::int64_t c : {4, 8, 16}) {
      const auto p = default_cost_params(r, c);
      const auto sparse = cost(Method::StridedSwap, p, ComputeMode::Exact).compute;
      const Rational c8 = (c + 7) / 8;
      const Rational dense = Rational(256 * p.A * p.B * (2 * r + 2), c * c) * c8 * c8 * Rational(2 * r + c, 4);
      EXPECT_EQ(sparse * 2, dense);
    }
}

TEST(CostProperties, CeilAtLeastExact) {
  for (int r = 1; r <= 7; ++r)
    for (std::int64_t c : {4, 8, 16}) {
      const auto p = default_cost_params(r, c);
      EXPECT_GE(cost(Method::StridedSwap, p, ComputeMode::Ceil).compute,
                cost(Method::StridedSwap, p, ComputeMode::Exact).compute);
      const auto lo = strided_swap_uncapped(p);
      const auto hi = cost(Method::StridedSwap, p);
      EXPECT_LE(lo.compute, hi.compute);
      EXPECT_LE(lo.input_access, hi.input_access);
      EXPECT_LE(lo.param_access, hi.param_access);
    }
}

TEST(CostErrors, Preconditions) {
  EXPECT_THROW(cost(Method::LowerBound, CostParams{64, 64, 0, 8, 16}), Error);
  EXPECT_THROW(cost(Method::LowerBound, CostParams{64, 64, 3, 0, 16}), Error);
  EXPECT_THROW(cost(Method::TCStencil, CostParams{64, 64, 8, 8, 16}), Error);
  EXPECT_THROW(parse_method("bogus"), Error);
}

TEST(RationalFormat, ToString) {
  EXPECT_EQ(to_string(Rational(49, 16)), "49/16");
  EXPECT_EQ(to_string(Rational(14)), "14");
}

TEST(MeasuredVsModel, Box2D3REmulatedRun) {
  std::vector<double> coeffs(49);
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = 0.01 * static_cast<double>(i + 1);
  const auto k = make_kernel(Shape::Box, 2, 3, coeffs);
  const auto g = make_random_grid<double>(64, 64, 3, 9);
  ExecConfig cfg;
  cfg.block_a = 16;
  cfg.block_b = 8;
  cfg.warp_a = 16;
  cfg.warp_b = 8;
  const auto res = execute(k, g, 1, cfg);
  const auto cmp = measured_vs_model(res.stats.measured(), CostParams{64, 64, 3, 8, 16});
  ASSERT_EQ(cmp.entries.size(), 3u);
  EXPECT_EQ(cmp.entries[0].metric, "compute");
  EXPECT_DOUBLE_EQ(cmp.entries[0].measured, 56.0);
  EXPECT_DOUBLE_EQ(cmp.entries[1].measured, 14.0);
  EXPECT_DOUBLE_EQ(cmp.entries[2].measured, 7.0);
  for (const auto& e : cmp.entries) EXPECT_TRUE(e.within_envelope) << e.metric;
  EXPECT_DOUBLE_EQ(cmp.entries[0].model_ceil, 64.0);
}

TEST(MeasuredVsModel, InputLoadsPerTile) {
  // One c x c output tile of Box-2D3R stages (c + 2r + 2) x c inputs per kernel row.
  const TilingPlan p = plan(64, 64, 3, 16, 8, 16, 8);
  EXPECT_EQ(p.staged_elements, (8 + 2 * 3 + 2) * 8);
}

TEST(MeasuredVsModel, Errors) {
  MeasuredCounts m{64, 64, 3, 1, 1, 1, 1};
  EXPECT_THROW(measured_vs_model(m, CostParams{64, 64, 2, 8, 16}), Error);
  EXPECT_THROW(measured_vs_model(m, CostParams{32, 64, 3, 8, 16}), Error);
  m.steps = 0;
  EXPECT_THROW(measured_vs_model(m, CostParams{64, 64, 3, 8, 16}), Error);
  m.radius = 0;
  EXPECT_THROW(measured_vs_model(m, CostParams{64, 64, 0, 8, 16}), Error);
}
