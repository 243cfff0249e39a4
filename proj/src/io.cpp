#include "st24/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace st24 {

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
  os.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw Error("unexpected end of file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_le<std::uint64_t>(os, bits);
}

double get_f64(std::istream& is) {
  const auto bits = get_le<std::uint64_t>(is);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

void put_magic(std::ostream& os, const char* magic) { os.write(magic, 4); }

void expect_magic(std::istream& is, const char* magic) {
  char got[4];
  is.read(got, 4);
  if (!is || std::memcmp(got, magic, 4) != 0) throw Error(std::string("bad magic, expected ") + magic);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_grid_binary(std::ostream& os, const Grid<double>& g) {
  put_magic(os, "SPGR");
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.rows()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.cols()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.halo()));
  const auto& s = g.storage();
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.cols(); ++j) put_f64(os, s(i, j));
}

Grid<double> read_grid_binary(std::istream& is) {
  expect_magic(is, "SPGR");
  const auto rows = get_le<std::uint32_t>(is);
  const auto cols = get_le<std::uint32_t>(is);
  const auto halo = get_le<std::uint32_t>(is);
  Grid<double> g(rows, cols, halo);
  auto& s = g.storage();
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.cols(); ++j) s(i, j) = get_f64(is);
  return g;
}

Json grid_to_json(const Grid<double>& g) {
  Json values = Json::array();
  const auto& s = g.storage();
  for (Index i = 0; i < s.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < s.cols(); ++j) row.push_back(s(i, j));
    values.push_back(std::move(row));
  }
  return Json{{"A", g.rows()}, {"B", g.cols()}, {"halo", g.halo()}, {"step", g.step}, {"values", std::move(values)}};
}

Grid<double> grid_from_json(const Json& j) {
  Grid<double> g(j.at("A").get<Index>(), j.at("B").get<Index>(), j.at("halo").get<Index>());
  const auto& values = j.at("values");
  auto& s = g.storage();
  if (static_cast<Index>(values.size()) != s.rows()) throw Error("grid JSON has wrong number of stored rows");
  for (Index i = 0; i < s.rows(); ++i) {
    const auto& row = values[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != s.cols()) throw Error("grid JSON has wrong number of stored columns");
    for (Index k = 0; k < s.cols(); ++k) s(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  if (j.contains("step")) g.step = j.at("step").get<std::int64_t>();
  return g;
}

Grid<double> load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open grid file " + path);
  if (ends_with(path, ".json")) return grid_from_json(Json::parse(in));
  return read_grid_binary(in);
}

void save_grid(const std::string& path, const Grid<double>& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write grid file " + path);
  if (ends_with(path, ".json"))
    out << grid_to_json(g).dump(2) << "\n";
  else
    write_grid_binary(out, g);
}

Json kernel_to_json(const StencilKernel<double>& k) {
  Json coeffs = Json::array();
  for (Index i = 0; i < k.coeffs().rows(); ++i)
    for (Index j = 0; j < k.coeffs().cols(); ++j) coeffs.push_back(k.coeffs()(i, j));
  return Json{{"shape", to_string(k.shape())}, {"d", k.dims()}, {"r", k.radius()}, {"coeffs", std::move(coeffs)}};
}

StencilKernel<double> kernel_from_json(const Json& j) {
  try {
    return make_kernel<double>(parse_shape(j.at("shape").get<std::string>()), j.at("d").get<int>(), j.at("r").get<int>(),
                               j.at("coeffs").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed kernel JSON: ") + e.what());
  }
}

StencilKernel<double> load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open kernel file " + path);
  try {
    return kernel_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse kernel file " + path + ": " + e.what());
  }
}

void write_compressed_kernel(std::ostream& os, const CompressedKernel<double>& c) {
  put_magic(os, "SPCK");
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(c.radius));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(c.L()));
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(c.parity));
  for (Index i = 0; i < c.values.rows(); ++i)
    for (Index j = 0; j < c.values.cols(); ++j) put_f64(os, c.values(i, j));
  for (Index i = 0; i < c.metadata.rows(); ++i)
    for (Index j = 0; j < c.metadata.cols(); ++j) put_le<std::uint8_t>(os, c.metadata(i, j));
}

CompressedKernel<double> read_compressed_kernel(std::istream& is) {
  expect_magic(is, "SPCK");
  CompressedKernel<double> c;
  c.radius = get_le<std::uint16_t>(is);
  const Index L = get_le<std::uint16_t>(is);
  if (L != c.L()) throw Error("compressed kernel header has L=" + std::to_string(L) + " for r=" + std::to_string(c.radius));
  const auto parity = get_le<std::uint8_t>(is);
  if (parity > 1) throw Error("compressed kernel header has invalid parity byte");
  c.parity = static_cast<Parity>(parity);
  c.values.resize(L, L);
  for (Index i = 0; i < L; ++i)
    for (Index j = 0; j < L; ++j) c.values(i, j) = get_f64(is);
  c.metadata.resize(L, L / 2);
  for (Index i = 0; i < L; ++i)
    for (Index j = 0; j < L / 2; ++j) {
      c.metadata(i, j) = get_le<std::uint8_t>(is);
      if (!well_formed(c.metadata(i, j))) throw Error("compressed kernel file has malformed metadata");
    }
  return c;
}

std::vector<CompressedKernel<double>> read_compressed_kernels(std::istream& is) {
  std::vector<CompressedKernel<double>> out;
  while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_compressed_kernel(is));
  return out;
}

Json compressed_kernel_to_json(const CompressedKernel<double>& c) {
  Json values = Json::array(), meta = Json::array();
  for (Index i = 0; i < c.values.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < c.values.cols(); ++j) row.push_back(c.values(i, j));
    values.push_back(std::move(row));
  }
  for (Index i = 0; i < c.metadata.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < c.metadata.cols(); ++j)
      row.push_back(Json::array({descriptor(c.metadata(i, j), 0), descriptor(c.metadata(i, j), 1)}));
    meta.push_back(std::move(row));
  }
  return Json{{"r", c.radius}, {"L", c.L()}, {"parity", to_string(c.parity)}, {"values", std::move(values)},
              {"metadata", std::move(meta)}};
}

void write_packed(std::ostream& os, const PackedValues<double>& p) {
  put_magic(os, "SPPK");
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(PackedKind::Values));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(p.L));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.buffer.size()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.fragments));
  for (double v : p.buffer) put_f64(os, v);
}

void write_packed(std::ostream& os, const PackedMetadata& p) {
  put_magic(os, "SPPK");
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(PackedKind::Metadata));
  put_le<std::uint16_t>(os, static_cast<std::uint16_t>(p.L));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.registers.size()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.fragments));
  for (Index lane = 0; lane < p.registers.rows(); ++lane)
    for (Index reg = 0; reg < p.registers.cols(); ++reg) put_le<std::uint32_t>(os, p.registers(lane, reg));
}

PackedBlob read_packed(std::istream& is) {
  expect_magic(is, "SPPK");
  PackedBlob b;
  const auto kind = get_le<std::uint16_t>(is);
  if (kind > 1) throw Error("packed buffer has unknown kind " + std::to_string(kind));
  b.kind = static_cast<PackedKind>(kind);
  b.L = get_le<std::uint16_t>(is);
  const auto length = get_le<std::uint32_t>(is);
  b.fragments = get_le<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < length; ++i) {
    if (b.kind == PackedKind::Values)
      b.values.push_back(get_f64(is));
    else
      b.registers.push_back(get_le<std::uint32_t>(is));
  }
  return b;
}

Json plan_to_json(const TilingPlan& p) {
  return Json{
      {"rows", p.rows},
      {"cols", p.cols},
      {"r", p.radius},
      {"block", {{"A_b", p.block_a}, {"B_b", p.block_b}}},
      {"warp", {{"A_w", p.warp_a}, {"B_w", p.warp_b}}},
      {"mma", {{"M", p.mma.m}, {"N", p.mma.n}, {"K", p.mma.k}}},
      {"L", p.L},
      {"chunk_rows", p.chunk_rows},
      {"m_blocks_per_chunk", p.m_blocks_per_chunk},
      {"k_slabs", p.k_slabs},
      {"chunks_per_block", p.chunks_per_block},
      {"chunks_per_warp", p.chunks_per_warp},
      {"block_points_x", p.block_points},
      {"warps_per_block", p.warps_per_block},
      {"invocations_per_warp_pass", p.invocations_per_warp_pass},
      {"invocations_per_block_pass", p.invocations_per_block_pass},
      {"shared_input_extent", {p.shared_rows, p.shared_cols}},
      {"shared_input_elements", p.shared_elements},
      {"staged_input_width", p.staged_width},
      {"staged_input_elements", p.staged_elements},
      {"segments_per_row", p.segments_per_row},
      {"virtual_rows", p.virtual_rows},
      {"blocks", p.blocks},
      {"kernel_residence", p.kernel_in_registers ? "registers" : "shared"},
      {"kernel_fragments", p.kernel_fragments},
      {"selectors", p.selectors},
      {"metadata_registers_per_thread", p.metadata_registers_per_thread},
      {"a_elements_per_thread", p.a_elements_per_thread},
      {"b_elements_per_thread", p.b_elements_per_thread},
      {"c_elements_per_thread", p.c_elements_per_thread},
  };
}

Json config_to_json(const ExecConfig& c) {
  return Json{{"parity", to_string(c.parity)},
              {"block", {c.block_a, c.block_b}},
              {"warp", {c.warp_a, c.warp_b}},
              {"mma", c.mma.str()},
              {"precision", to_string(c.precision)},
              {"cost_mode", to_string(c.cost_mode)},
              {"packing", c.packing}};
}

Json stats_to_json(const ExecStats& s) {
  return Json{{"r", s.radius},
              {"rows", s.rows},
              {"cols", s.cols},
              {"steps", s.steps},
              {"macs", s.macs},
              {"dense_macs", s.dense_macs},
              {"effective_macs", s.effective_macs},
              {"effective_dense_macs", s.effective_dense_macs},
              {"input_loads", s.input_loads},
              {"param_loads", s.param_loads},
              {"metadata_loads", s.metadata_loads},
              {"mma_invocations", s.mma_invocations},
              {"blocks", s.blocks},
              {"kernel_row_passes", s.kernel_row_passes},
              {"warp_tiles", s.warp_tiles},
              {"warp_fetch_runs", s.warp_fetch_runs}};
}

Json verify_report_to_json(const VerifyReport& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases)
    cases.push_back(Json{{"rows", c.rows},
                         {"cols", c.cols},
                         {"max_rel_error", c.max_rel_error},
                         {"pass", c.pass},
                         {"stats", stats_to_json(c.stats)}});
  return Json{{"kernel", {{"shape", to_string(r.shape)}, {"d", r.dims}, {"r", r.radius}}},
              {"seed", r.seed},
              {"steps", r.steps},
              {"tolerance", r.tolerance},
              {"config", config_to_json(r.config)},
              {"cases", std::move(cases)},
              {"pass", r.pass}};
}

Json cost_triple_to_json(const CostTriple& t) {
  return Json{{"compute", to_double(t.compute)},
              {"input_access", to_double(t.input_access)},
              {"param_access", to_double(t.param_access)},
              {"exact", {to_string(t.compute), to_string(t.input_access), to_string(t.param_access)}}};
}

Json model_comparison_to_json(const ModelComparison& m) {
  Json entries = Json::array();
  for (const auto& e : m.entries)
    entries.push_back(Json{{"metric", e.metric},
                           {"measured_per_point", e.measured},
                           {"model_ceil", e.model_ceil},
                           {"model_exact", e.model_exact},
                           {"relative_deviation", e.deviation},
                           {"within_envelope", e.within_envelope}});
  return Json{{"A", m.params.A}, {"B", m.params.B}, {"r", m.params.r}, {"c", m.params.c}, {"entries", std::move(entries)}};
}

Json fragment_map_json() {
  Json lanes = Json::object();
  for (int l = 0; l < kWarpSize; ++l) {
    const LaneId lane(l);
    Json cells = Json::array();
    for (int i = 0; i < kFragmentElements; ++i) cells.push_back(Json::array({offset_row(lane, i), fragment_col(lane)}));
    lanes[std::to_string(l)] = std::move(cells);
  }
  return lanes;
}

}  // namespace st24
