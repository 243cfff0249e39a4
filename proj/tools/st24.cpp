#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "st24/io.hpp"

namespace {

using namespace st24;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::pair<Index, Index> parse_dims(const std::string& s, const char* what) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const Index a = std::stoll(s.substr(0, x), &used);
    std::size_t used_b = 0;
    const Index b = std::stoll(s.substr(x + 1), &used_b);
    if (used != x || used_b != s.size() - x - 1) throw std::invalid_argument(s);
    return {a, b};
  } catch (const std::logic_error&) {
    throw Error(std::string("bad ") + what + " '" + s + "' (expected AxB)");
  }
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

struct ConfigOptions {
  std::string parity = "even";
  std::string block = "64x64";
  std::string warp = "16x8";
  std::string mma = "16x8x16";
  std::string precision = "f64";
  std::string cost_mode = "ceil";
  bool no_packing = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--parity", parity, "swap parity class (even|odd)")->capture_default_str();
    cmd->add_option("--block", block, "block tile A_bxB_b")->capture_default_str();
    cmd->add_option("--warp", warp, "warp tile A_wxB_w")->capture_default_str();
    cmd->add_option("--mma", mma, "instruction shape MxNxK")->capture_default_str();
    cmd->add_option("--precision", precision, "f64|f32")->capture_default_str();
    cmd->add_option("--cost-mode", cost_mode, "ceil|exact")->capture_default_str();
    cmd->add_flag("--no-packing", no_packing, "fetch kernel fragments from the unpacked layout");
  }

  ExecConfig config() const {
    ExecConfig c;
    c.parity = parse_parity(parity);
    std::tie(c.block_a, c.block_b) = parse_dims(block, "block");
    std::tie(c.warp_a, c.warp_b) = parse_dims(warp, "warp");
    c.mma = MmaShape::parse(mma);
    c.precision = parse_precision(precision);
    c.cost_mode = parse_compute_mode(cost_mode);
    c.packing = !no_packing;
    c.validate();
    return c;
  }
};

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_transform(const std::string& kernel_path, const std::string& parity, const std::string& out, bool json) {
  const auto kernel = load_kernel(kernel_path);
  ExecConfig cfg;
  cfg.parity = parse_parity(parity);
  const auto ts = transform_stencil(kernel, cfg);

  if (!out.empty()) {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw Error("cannot write " + out);
    for (const auto& c : ts.kernels) write_compressed_kernel(os, c);
  }

  Json rows = Json::array();
  for (std::size_t i = 0; i < ts.kernels.size(); ++i) {
    Json e = compressed_kernel_to_json(ts.kernels[i]);
    e["kernel_row"] = ts.kernel_rows[i];
    rows.push_back(std::move(e));
  }
  Json report{{"kernel", kernel_to_json(kernel)},
              {"L", 2 * kernel.radius() + 2},
              {"parity", to_string(cfg.parity)},
              {"permutation", ts.permutation.mapping()},
              {"compressed", std::move(rows)}};
  if (json) {
    print_json(report);
  } else {
    std::cout << "kernel rows: " << ts.kernels.size() << "  L=" << 2 * kernel.radius() + 2
              << "  parity=" << to_string(cfg.parity) << "\n";
    if (!out.empty()) std::cout << "wrote " << out << "\n";
  }
  return kExitPass;
}

int cmd_verify(const std::string& kernel_path, const std::string& sizes, int steps, std::uint64_t seed,
               std::optional<double> tolerance, const ConfigOptions& opts, bool json) {
  const auto kernel = load_kernel(kernel_path);
  const auto cfg = opts.config();
  std::vector<Index> ns;
  for (const auto& s : split(sizes)) {
    try {
      ns.push_back(std::stoll(s));
    } catch (const std::logic_error&) {
      throw Error("bad size '" + s + "'");
    }
  }
  if (ns.empty()) throw Error("--sizes lists no grid sizes");
  if (steps < 1) throw Error("--steps must be >= 1");
  for (Index n : ns) plan_for(cfg, n, n, kernel.radius());

  if (tolerance && !(*tolerance >= 0)) throw Error("--tolerance must be nonnegative");
  const auto rep = cfg.precision == Precision::F64 ? verify(kernel, ns, seed, steps, cfg, tolerance)
                                                   : verify(kernel.cast<float>(), ns, seed, steps, cfg, tolerance);
  if (json) {
    print_json(verify_report_to_json(rep));
  } else {
    for (const auto& c : rep.cases)
      std::cout << c.rows << "x" << c.cols << "  max_rel_error=" << c.max_rel_error << "  "
                << (c.pass ? "PASS" : "FAIL") << "\n";
    std::cout << (rep.pass ? "PASS" : "FAIL") << "\n";
  }
  return rep.pass ? kExitPass : kExitFail;
}

int cmd_analyze(const std::string& rs, const std::string& cs, const std::string& methods, const std::string& format,
                std::int64_t L) {
  std::vector<Method> ms;
  if (methods == "all")
    ms = all_methods();
  else
    for (const auto& m : split(methods)) ms.push_back(parse_method(m));
  if (format != "csv" && format != "json") throw Error("unknown format '" + format + "' (expected csv|json)");

  std::vector<int> radii;
  std::vector<std::int64_t> tiles;
  try {
    for (const auto& s : split(rs)) radii.push_back(std::stoi(s));
    for (const auto& s : split(cs)) tiles.push_back(std::stoll(s));
  } catch (const std::logic_error&) {
    throw Error("--r and --c take comma-separated integers");
  }

  Json out = Json::array();
  std::ostringstream csv;
  csv << "r,c,method,mode,compute,input_access,param_access,compute_redundancy,input_redundancy,"
         "param_redundancy\n";
  for (int r : radii) {
    for (std::int64_t c : tiles) {
      const auto p = default_cost_params(r, c, L);
      const CostTriple lb = cost_per_point(Method::LowerBound, p);
      for (Method m : ms) {
        if (m == Method::TCStencil && L <= 2 * r) continue;
        const std::vector<ComputeMode> modes =
            m == Method::StridedSwap ? std::vector{ComputeMode::Ceil, ComputeMode::Exact} : std::vector{ComputeMode::Ceil};
        const CostTriple ceil_t = cost_per_point(m, p, ComputeMode::Ceil);
        const CostTriple exact_t = cost_per_point(m, p, ComputeMode::Exact);
        for (ComputeMode mode : modes) {
          const CostTriple t = mode == ComputeMode::Ceil ? ceil_t : exact_t;
          const CostTriple red{t.compute / lb.compute, t.input_access / lb.input_access,
                               t.param_access / lb.param_access};
          csv << r << "," << c << "," << to_string(m) << "," << to_string(mode) << "," << to_double(t.compute) << ","
              << to_double(t.input_access) << "," << to_double(t.param_access) << "," << to_double(red.compute) << ","
              << to_double(red.input_access) << "," << to_double(red.param_access) << "\n";
          Json e{{"r", r},
                 {"c", c},
                 {"method", to_string(m)},
                 {"mode", to_string(mode)},
                 {"per_point", cost_triple_to_json(t)},
                 {"redundancy", {{"compute", to_double(red.compute)},
                                 {"input_access", to_double(red.input_access)},
                                 {"param_access", to_double(red.param_access)}}}};
          if (m == Method::StridedSwap) e["ceil_exact_discrepancy"] = !(ceil_t.compute == exact_t.compute);
          out.push_back(std::move(e));
        }
      }
    }
  }
  if (format == "json")
    print_json(out);
  else
    std::cout << csv.str();
  return kExitPass;
}

int cmd_plan(int r, const std::string& grid, const ConfigOptions& opts, bool json, bool fragment_map) {
  const auto cfg = opts.config();
  const auto [rows, cols] = parse_dims(grid, "grid");
  const auto p = plan_for(cfg, rows, cols, r);
  Json j = plan_to_json(p);
  if (fragment_map) j["fragment_map"] = fragment_map_json();
  if (json) {
    print_json(j);
  } else {
    for (const auto& [k, v] : j.items()) std::cout << k << ": " << v.dump() << "\n";
  }
  return kExitPass;
}

int cmd_run(const std::string& kernel_path, const std::string& grid_path, int steps, bool stats, const std::string& out,
            std::int64_t c, const ConfigOptions& opts, bool json) {
  const auto kernel = load_kernel(kernel_path);
  const auto grid = load_grid(grid_path);
  const auto cfg = opts.config();

  Grid<double> result;
  ExecStats st;
  if (cfg.precision == Precision::F64) {
    auto res = execute(kernel, grid, steps, cfg);
    result = std::move(res.grid);
    st = res.stats;
  } else {
    auto res = execute(kernel.cast<float>(), grid.cast<float>(), steps, cfg);
    result = res.grid.cast<double>();
    st = res.stats;
  }
  if (!out.empty()) save_grid(out, result);

  Json report{{"config", config_to_json(cfg)}, {"stats", stats_to_json(st)}};
  if (kernel.dims() == 2 && kernel.shape() == Shape::Box) {
    CostParams p{grid.rows(), grid.cols(), kernel.radius(), c, 16};
    report["model"] = model_comparison_to_json(measured_vs_model(st.measured(), p));
  }
  if (json) {
    print_json(report);
  } else if (stats) {
    for (const auto& [k, v] : report["stats"].items()) std::cout << k << ": " << v.dump() << "\n";
    if (report.contains("model"))
      for (const auto& e : report["model"]["entries"])
        std::cout << "model " << e["metric"].get<std::string>() << ": measured " << e["measured_per_point"].dump()
                  << " per point, envelope [" << e["model_exact"].dump() << ", " << e["model_ceil"].dump() << "]"
                  << (e["within_envelope"].get<bool>() ? "" : "  (outside)") << "\n";
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2:4 sparse stencil transform and emulator"};
  app.require_subcommand(1);

  std::string kernel_path, parity = "even", out, sizes = "32,64,128", grid_path, rs = "3", cs = "8",
                           methods = "all", format = "csv", grid = "256x256";
  int steps = 1, radius = 3;
  std::uint64_t seed = 42;
  std::optional<double> tolerance;
  std::int64_t L = 16, tile_c = 8;
  bool json = false, stats = false, fragment_map = false;
  ConfigOptions opts;

  auto* transform = app.add_subcommand("transform", "emit compressed kernels and metadata");
  transform->add_option("--kernel", kernel_path, "kernel JSON")->required();
  transform->add_option("--parity", parity, "even|odd")->capture_default_str();
  transform->add_option("--out", out, "compressed kernel output (.spck)");
  transform->add_flag("--json", json, "print the compressed kernels as JSON");

  auto* verify_cmd = app.add_subcommand("verify", "compare the sparse path against the reference");
  verify_cmd->add_option("--kernel", kernel_path, "kernel JSON")->required();
  verify_cmd->add_option("--sizes", sizes, "comma-separated grid sizes")->capture_default_str();
  verify_cmd->add_option("--steps", steps, "time steps")->capture_default_str();
  verify_cmd->add_option("--seed", seed, "grid seed")->capture_default_str();
  verify_cmd->add_option("--tolerance", tolerance, "max relative error (default 1e-10 f64, 1e-4 f32)");
  verify_cmd->add_flag("--json", json, "JSON report");
  opts.attach(verify_cmd);

  auto* analyze = app.add_subcommand("analyze", "cost model tables and redundancy factors");
  analyze->add_option("--r", rs, "comma-separated radii")->capture_default_str();
  analyze->add_option("--c", cs, "comma-separated tile sizes")->capture_default_str();
  analyze->add_option("--methods", methods, "all or comma-separated method names")->capture_default_str();
  analyze->add_option("--format", format, "csv|json")->capture_default_str();
  analyze->add_option("--L", L, "dense method matrix size")->capture_default_str();

  auto* plan_cmd = app.add_subcommand("plan", "tiling plan report");
  plan_cmd->add_option("--r", radius, "stencil radius")->capture_default_str();
  plan_cmd->add_option("--grid", grid, "grid extent AxB")->capture_default_str();
  plan_cmd->add_flag("--json", json, "JSON report");
  plan_cmd->add_flag("--fragment-map", fragment_map, "include the B fragment lane map");
  opts.attach(plan_cmd);

  auto* run = app.add_subcommand("run", "emulated execution on a grid file");
  run->add_option("--kernel", kernel_path, "kernel JSON")->required();
  run->add_option("--grid", grid_path, "grid (.spgr or .json)")->required();
  run->add_option("--steps", steps, "time steps")->capture_default_str();
  run->add_flag("--stats", stats, "print execution statistics");
  run->add_option("--out", out, "output grid");
  run->add_option("--c", tile_c, "tile size for the model cross-check")->capture_default_str();
  run->add_flag("--json", json, "JSON report");
  opts.attach(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*transform) return cmd_transform(kernel_path, parity, out, json);
    if (*verify_cmd) return cmd_verify(kernel_path, sizes, steps, seed, tolerance, opts, json);
    if (*analyze) return cmd_analyze(rs, cs, methods, format, L);
    if (*plan_cmd) return cmd_plan(radius, grid, opts, json, fragment_map);
    if (*run) return cmd_run(kernel_path, grid_path, steps, stats, out, tile_c, opts, json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
