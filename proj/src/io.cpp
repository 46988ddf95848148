#include "perigibbs/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace perigibbs {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error(path.string() + ": not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

Json scan_json(const std::optional<PositivityScan<double>>& scan) {
  if (!scan) return nullptr;
  return Json{{"points", scan->points}, {"min", scan->min}, {"max", scan->max}, {"positive", scan->positive()}};
}

// Header row of u nodes, then the t = 0 row, then one row per node.
std::pair<Vector<double>, Matrix<double>> read_matrix_csv(const std::filesystem::path& path,
                                                          const QuadratureRule<double>& rule) {
  const Index n = rule.size();
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  auto header = split(line);
  if (static_cast<Index>(header.size()) != n + 1) throw std::runtime_error(path.string() + ": header width");
  for (Index j = 0; j < n; ++j) {
    if (std::abs(parse_double(header[std::size_t(j + 1)], path) - rule.nodes()(j)) > 1e-12) {
      throw std::runtime_error(path.string() + ": header nodes do not match the rule");
    }
  }
  Vector<double> origin(n);
  Matrix<double> m(n, n);
  for (Index i = -1; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing rows");
    const auto cells = split(line);
    if (static_cast<Index>(cells.size()) != n + 1) throw std::runtime_error(path.string() + ": row width");
    const double t = parse_double(cells[0], path);
    const double expected = i < 0 ? 0.0 : rule.nodes()(i);
    if (std::abs(t - expected) > 1e-12) throw std::runtime_error(path.string() + ": row label mismatch");
    for (Index j = 0; j < n; ++j) {
      const double v = parse_double(cells[std::size_t(j + 1)], path);
      if (i < 0) {
        origin(j) = v;
      } else {
        m(i, j) = v;
      }
    }
  }
  return {std::move(origin), std::move(m)};
}

}  // namespace

void write_grid_function_csv(const std::filesystem::path& path, const GridFunction<double>& f) {
  auto out = open_out(path);
  out << "t,value\n";
  const auto& x = f.rule()->nodes();
  for (Index i = 0; i < f.size(); ++i) out << fmt(x(i)) << ',' << fmt(f[i]) << '\n';
}

GridFunction<double> read_grid_function_csv(const std::filesystem::path& path, RulePtr<double> rule) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split(line) != std::vector<std::string>{"t", "value"}) {
    throw std::runtime_error(path.string() + ": expected header 't,value'");
  }
  Vector<double> v(rule->size());
  Index i = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw std::runtime_error(path.string() + ": expected two columns");
    if (i >= rule->size()) throw std::runtime_error(path.string() + ": more rows than nodes");
    const double t = parse_double(cells[0], path);
    if (std::abs(t - rule->nodes()(i)) > 1e-12) throw std::runtime_error(path.string() + ": node mismatch");
    v(i++) = parse_double(cells[1], path);
  }
  if (i != rule->size()) throw std::runtime_error(path.string() + ": fewer rows than nodes");
  return GridFunction<double>(std::move(rule), std::move(v));
}

std::filesystem::path kernel_sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

Json to_json(const KernelParams& params) {
  Json j = Json::object();
  if (params.n) j["n"] = *params.n;
  if (params.k) j["k"] = *params.k;
  if (params.J) j["J"] = *params.J;
  if (params.beta) j["beta"] = *params.beta;
  if (!params.xi_name.empty()) j["xi"] = params.xi_name;
  return j;
}

Json kernel_metadata(const Kernel<double>& kernel) {
  Json j;
  j["family"] = std::string(to_string(kernel.family()));
  j["params"] = to_json(kernel.params());
  j["scheme"] = std::string(to_string(kernel.rule()->scheme()));
  j["nodes"] = kernel.rule()->size();
  j["scan"] = scan_json(kernel.scan());
  j["node_min"] = kernel.node_min();
  j["node_max"] = kernel.node_max();
  return j;
}

void write_kernel_csv(const std::filesystem::path& path, const Kernel<double>& kernel) {
  auto out = open_out(path);
  const auto& x = kernel.rule()->nodes();
  out << "t\\u";
  for (Index j = 0; j < x.size(); ++j) out << ',' << fmt(x(j));
  out << '\n' << fmt(0.0);
  for (Index j = 0; j < x.size(); ++j) out << ',' << fmt(kernel.origin_row()(j));
  out << '\n';
  for (Index i = 0; i < x.size(); ++i) {
    out << fmt(x(i));
    for (Index j = 0; j < x.size(); ++j) out << ',' << fmt(kernel.matrix()(i, j));
    out << '\n';
  }
  write_json(kernel_sidecar_path(path), kernel_metadata(kernel));
}

Kernel<double> read_kernel_csv(const std::filesystem::path& path) {
  const auto sidecar = kernel_sidecar_path(path);
  Json meta;
  {
    auto in = open_in(sidecar);
    meta = Json::parse(in);
  }
  const auto scheme = parse_scheme(meta.at("scheme").get<std::string>());
  if (!scheme) throw std::runtime_error(sidecar.string() + ": unknown scheme");
  auto rule = build_rule<double>(meta.at("nodes").get<Index>(), *scheme);

  auto [origin, m] = read_matrix_csv(path, *rule);
  KernelParams params;
  if (meta.contains("params")) {
    const auto& p = meta["params"];
    if (p.contains("n")) params.n = p["n"].get<int>();
    if (p.contains("k")) params.k = p["k"].get<int>();
    if (p.contains("J")) params.J = p["J"].get<double>();
    if (p.contains("beta")) params.beta = p["beta"].get<double>();
    if (p.contains("xi")) params.xi_name = p["xi"].get<std::string>();
  }
  return Kernel<double>(KernelFamily::file, std::move(params), std::move(rule), std::move(m), std::move(origin));
}

XiGrid<double> read_xi_csv(const std::filesystem::path& path, const QuadratureRule<double>& rule) {
  auto [origin, m] = read_matrix_csv(path, rule);
  return {std::move(m), std::move(origin)};
}

Json to_json(const KernelReport<double>& r) {
  Json j;
  j["family"] = std::string(to_string(r.family));
  j["k"] = r.k;
  j["M"] = r.ext.M;
  j["m"] = r.ext.m;
  j["ratio"] = r.ratio;
  j["uniqueness_lhs"] = r.uniqueness_lhs;
  j["threshold"] = r.threshold;
  j["verdict"] = std::string(to_string(r.verdict));
  j["scan_grid"] = Json{{"source", std::string(to_string(r.ext.source))}, {"points", r.ext.scan_points}};
  return j;
}

Json to_json(const VerificationReport<double>& r) {
  Json j;
  j["family"] = std::string(to_string(r.family));
  j["params"] = to_json(r.params);
  j["scheme"] = std::string(to_string(r.scheme));
  j["threshold"] = r.threshold;
  j["scan"] = Json{{"points", r.scan.points}, {"min", r.scan.min}, {"max", r.scan.max},
                   {"positive", r.scan.positive()}};
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"label", e.label},
                       {"k", e.k},
                       {"nodes", e.nodes},
                       {"residual_f", e.residual_f},
                       {"residual_g", e.residual_g},
                       {"nodes_fine", e.nodes_fine},
                       {"residual_f_fine", e.residual_f_fine},
                       {"residual_g_fine", e.residual_g_fine},
                       {"pass", e.pass},
                       {"refines", e.refines}});
  }
  j["pairs"] = std::move(entries);
  j["pass"] = r.pass();
  return j;
}

Json function_values(const GridFunction<double>& f) {
  Json v = Json::array();
  for (Index i = 0; i < f.size(); ++i) v.push_back(f[i]);
  return v;
}

Json to_json(const SolveResult<double>& result, const SolverConfig& config) {
  Json j;
  j["config"] = {{"k", config.k},
                 {"max_iterations", config.max_iterations},
                 {"tolerance", config.tolerance},
                 {"damping", config.damping},
                 {"dedup_radius", config.dedup_radius},
                 {"seed", config.seed},
                 {"verify_threshold", config.verify_threshold},
                 {"starts",
                  {{"constant_one", config.starts.constant_one},
                   {"catalog", config.starts.catalog},
                   {"perturbation", config.starts.perturbation},
                   {"random_count", config.starts.random_count}}}};
  if (!result.pairs.empty()) j["nodes"] = function_values(GridFunction<double>(
      result.pairs.front().pair.f.rule(), result.pairs.front().pair.f.rule()->nodes()));
  Json pairs = Json::array();
  for (const auto& p : result.pairs) {
    pairs.push_back({{"classification", std::string(to_string(p.classification))},
                     {"form", std::string(to_string(p.pair.form))},
                     {"separation", p.separation},
                     {"residual_f", p.pair.residual_f},
                     {"residual_g", p.pair.residual_g},
                     {"start", p.start},
                     {"iterations", p.iterations},
                     {"f", function_values(p.pair.f)},
                     {"g", function_values(p.pair.g)}});
  }
  j["pairs"] = std::move(pairs);
  Json starts = Json::array();
  for (const auto& s : result.starts) {
    Json e = {{"label", s.label},
              {"status", std::string(to_string(s.status))},
              {"iterations", s.iterations},
              {"damped", s.damped},
              {"last_step", s.last_step}};
    if (s.pair_index) {
      e["pair"] = *s.pair_index;
      e["residual"] = s.residual;
    }
    starts.push_back(std::move(e));
  }
  j["starts"] = std::move(starts);
  j["counts"] = {{"fixed_point", result.count(Classification::fixed_point)},
                 {"two_cycle", result.count(Classification::two_cycle)},
                 {"unverified", result.count(Classification::unverified)}};
  return j;
}

void write_plot_csv(const std::filesystem::path& path, const Kernel<double>& kernel, const CyclePair<double>& pair) {
  const auto hf = apply_H(kernel, pair.f, pair.k);
  const auto hg = apply_H(kernel, pair.g, pair.k);
  auto out = open_out(path);
  out << "t,f,g,Hf,Hg\n";
  const auto& x = kernel.rule()->nodes();
  for (Index i = 0; i < x.size(); ++i) {
    out << fmt(x(i)) << ',' << fmt(pair.f[i]) << ',' << fmt(pair.g[i]) << ',' << fmt(hf[i]) << ',' << fmt(hg[i])
        << '\n';
  }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace perigibbs
