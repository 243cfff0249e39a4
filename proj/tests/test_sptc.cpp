#include <gtest/gtest.h>

#include <random>
#include <set>

#include "st24/sptc.hpp"

using namespace st24;

namespace {

Matrix<double> random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Matrix<double> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

TEST(SparseMma, UnrolledDefinition) {
  Matrix<double> v(1, 2);
  v << 2.0, 3.0;
  MetadataMatrix md(1, 1);
  md(0, 0) = pack_descriptors(0, 2);
  Matrix<double> b(4, 1);
  b << 10, 20, 30, 40;
  const auto out = sparse_mma(v, md, b, Matrix<double>::Zero(1, 1));
  EXPECT_DOUBLE_EQ(out(0, 0), 2.0 * 10 + 3.0 * 30);
}

TEST(SparseMma, PlaceholderContributesNothing) {
  Matrix<double> v(1, 2);
  v << 7.0, 0.0;
  MetadataMatrix md(1, 1);
  md(0, 0) = pack_descriptors(1, 2);
  Matrix<double> b(4, 1);
  b << 10, 20, 30, 40;
  EXPECT_DOUBLE_EQ(sparse_mma(v, md, b, Matrix<double>::Zero(1, 1))(0, 0), 140.0);
}

TEST(SparseMma, Accumulates) {
  Matrix<double> v(1, 2);
  v << 1.0, 1.0;
  MetadataMatrix md(1, 1);
  md(0, 0) = pack_descriptors(0, 1);
  Matrix<double> b = Matrix<double>::Ones(4, 2);
  Matrix<double> c = Matrix<double>::Constant(1, 2, 5.0);
  sparse_mma_accumulate(v, md, b, c);
  EXPECT_EQ(c(0, 0), 7.0);
  EXPECT_EQ(c(0, 1), 7.0);
}

TEST(SparseMma, ShapeErrors) {
  MetadataMatrix md = MetadataMatrix::Constant(2, 2, kZeroSegmentMeta);
  Matrix<double> c = Matrix<double>::Zero(2, 3);
  EXPECT_THROW(sparse_mma(Matrix<double>::Zero(2, 3), md, Matrix<double>::Zero(8, 3), c), Error);
  EXPECT_THROW(sparse_mma(Matrix<double>::Zero(2, 4), md, Matrix<double>::Zero(7, 3), c), Error);
  md(1, 1) = pack_descriptors(3, 3);
  EXPECT_THROW(sparse_mma(Matrix<double>::Zero(2, 4), md, Matrix<double>::Zero(8, 3), c), Error);
}

TEST(SparseMma, MatchesDenseProductOfEncodedKernel) {
  std::mt19937_64 rng(61);
  for (int r = 1; r <= 8; ++r)
    for (Parity p : {Parity::Even, Parity::Odd}) {
      const Vector<double> row = random_matrix(2 * r + 1, 1, rng);
      const auto ks = strided_swap(build_kernel_matrix(row, r), p);
      const auto c = encode(ks);
      const auto b = random_matrix(ks.width(), 8, rng);
      const Matrix<double> dense = ks.values * b;
      const auto sparse = sparse_mma(c.values, c.metadata, b, Matrix<double>::Zero(ks.L(), 8));
      EXPECT_LE((sparse - dense).cwiseAbs().maxCoeff(), 1e-12 * dense.cwiseAbs().maxCoeff());
    }
}

TEST(SparseMma, MatchesDenseOnRandomMasked) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix<double> m = random_matrix(16, 16, rng);
    for (Index i = 0; i < 16; ++i)
      for (Index s = 0; s < 4; ++s) {
        std::vector<int> slots{0, 1, 2, 3};
        std::shuffle(slots.begin(), slots.end(), rng);
        m(i, 4 * s + slots[0]) = 0;
        m(i, 4 * s + slots[1]) = 0;
      }
    const auto enc = compress_2to4(m);
    const auto b = random_matrix(16, 8, rng);
    const Matrix<double> dense = m * b;
    const auto sparse = sparse_mma(enc.values, enc.metadata, b, Matrix<double>::Zero(16, 8));
    EXPECT_LE((sparse - dense).cwiseAbs().maxCoeff(), 1e-12 * dense.cwiseAbs().maxCoeff());
  }
}

TEST(MacCount, HalfOfDense) {
  EXPECT_EQ(mac_count(kMmaM16N8K16), 1024);
  EXPECT_EQ(dense_mac_count(kMmaM16N8K16), 2048);
  EXPECT_EQ(mac_count(MmaShape{1, 1, 4}), 2);
}

TEST(MmaShape, Parse) {
  EXPECT_EQ(MmaShape::parse("16x8x16"), kMmaM16N8K16);
  EXPECT_EQ(kMmaM16N8K16.str(), "16x8x16");
  EXPECT_THROW(MmaShape::parse("16x8"), Error);
  EXPECT_THROW(MmaShape::parse("16x8x6"), Error);
}

TEST(OffsetRow, Examples) {
  EXPECT_EQ(offset_row(LaneId(0), 0), 0);
  EXPECT_EQ(offset_row(LaneId(5), 3), 11);
  EXPECT_EQ(offset_row(LaneId(3), 2), 14);
  EXPECT_THROW(offset_row(LaneId(3), 4), Error);
  EXPECT_THROW(LaneId(32), Error);
  EXPECT_THROW(LaneId(-1), Error);
}

TEST(AdjustedOffset, Examples) {
  EXPECT_EQ(adjusted_offset(LaneId(0), 0, 0, 16), 16);
  EXPECT_EQ(adjusted_offset(LaneId(0), 1, 0, 16), 1);
  EXPECT_EQ(adjusted_offset(LaneId(5), 2, 1, 16), 10);
}

TEST(AdjustedOffset, SixteenSignAlternatesAtLSixteen) {
  for (int l = 0; l < kWarpSize; ++l)
    for (int i = 0; i < kFragmentElements; ++i)
      for (int k = 0; k < 2; ++k) {
        const LaneId lane(l);
        const Index expect = 16 * k + offset_row(lane, i) + (i % 2 == 0 ? (k == 0 ? 16 : -16) : 0);
        EXPECT_EQ(adjusted_offset(lane, i, k, 16), expect);
      }
}

TEST(FragmentLayout, LaneCoverageIsBijective) {
  std::set<std::pair<Index, Index>> cells;
  for (int l = 0; l < kWarpSize; ++l)
    for (int i = 0; i < kFragmentElements; ++i) cells.emplace(offset_row(LaneId(l), i), fragment_col(LaneId(l)));
  EXPECT_EQ(cells.size(), 128u);
  for (const auto& [row, col] : cells) {
    EXPECT_LT(row, 16);
    EXPECT_LT(col, 8);
  }
}

TEST(LoadFragment, ZeroCostIdentityExhaustive) {
  std::mt19937_64 rng(404);
  for (Index L : {4, 6, 8, 16})
    for (Parity p : {Parity::Even, Parity::Odd}) {
      const auto x = random_matrix(2 * L, 8, rng);
      const auto px = input_row_permutation(L, p).apply(x);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < kWarpSize; ++l) {
          const auto a = load_fragment(px, LaneId(l), k, false, L, p);
          const auto b = load_fragment(x, LaneId(l), k, true, L, p);
          EXPECT_EQ(a, b) << "L=" << L << " k=" << k << " lane=" << l;
          EXPECT_EQ(a.size(), 4u);
        }
    }
}

TEST(LoadFragment, UnswappedBothModesAgreeOnIdentity) {
  std::mt19937_64 rng(405);
  const auto x = random_matrix(32, 8, rng);
  for (int l = 0; l < kWarpSize; ++l) {
    const auto a = load_fragment(x, LaneId(l), 0, false, 16);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(a[i], x(offset_row(LaneId(l), i), fragment_col(LaneId(l))));
  }
}

TEST(GatherBOperand, SwappedKernelTimesGatheredEqualsDense) {
  std::mt19937_64 rng(406);
  for (int r : {1, 2, 3, 7})
    for (Parity p : {Parity::Even, Parity::Odd}) {
      const Vector<double> row = random_matrix(2 * r + 1, 1, rng);
      const auto k = build_kernel_matrix(row, r);
      const auto ks = strided_swap(k, p);
      const Index L = k.L();
      const auto x = random_matrix(2 * L, 8, rng);
      const Index slabs = ceil_div(2 * L, 16);
      Matrix<double> acc = Matrix<double>::Zero(L, 8);
      for (Index s = 0; s < slabs; ++s) {
        const auto b = gather_b_operand(x, static_cast<int>(s), true, L, p);
        Matrix<double> a = Matrix<double>::Zero(L, 16);
        const Index w = std::min<Index>(16, 2 * L - 16 * s);
        a.leftCols(w) = ks.values.middleCols(16 * s, w);
        acc += a * b;
      }
      const Matrix<double> ref = k.values * x;
      EXPECT_LE((acc - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff()) << "r=" << r;
    }
}

TEST(ExactSum, OrderIndependentAndCorrectlyRounded) {
  detail::ExactSum<double> a, b;
  const std::vector<double> xs{1e16, 1.0, -1e16, 3.5, 1e-30, -2.25};
  for (double x : xs) a.add(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) b.add(*it);
  EXPECT_EQ(a.value(), b.value());
  EXPECT_EQ(a.value(), 2.25);

  detail::ExactSum<double> p;
  p.add_product(1.0 + 0x1p-30, 1.0 - 0x1p-30);  // exact value 1 - 2^-60
  p.add(-1.0);
  EXPECT_EQ(p.value(), -0x1p-60);
}

TEST(SparseMma, ProductPositionDoesNotChangeRounding) {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    // Same four products, spread over segments in two different orders.
    double a[4], x[4];
    for (int i = 0; i < 4; ++i) a[i] = dist(rng) * std::pow(10.0, i * 3), x[i] = dist(rng);
    Matrix<double> v1(1, 4), v2(1, 4);
    v1 << a[0], a[1], a[2], a[3];
    v2 << a[3], a[2], a[1], a[0];
    MetadataMatrix md(1, 2);
    md(0, 0) = pack_descriptors(0, 1);
    md(0, 1) = pack_descriptors(0, 1);
    Matrix<double> b1 = Matrix<double>::Zero(8, 1), b2 = Matrix<double>::Zero(8, 1);
    b1(0, 0) = x[0], b1(1, 0) = x[1], b1(4, 0) = x[2], b1(5, 0) = x[3];
    b2(0, 0) = x[3], b2(1, 0) = x[2], b2(4, 0) = x[1], b2(5, 0) = x[0];
    const Matrix<double> c0 = Matrix<double>::Constant(1, 1, 0.1);
    EXPECT_EQ(sparse_mma(v1, md, b1, c0)(0, 0), sparse_mma(v2, md, b2, c0)(0, 0));
  }
}
