#include "perigibbs/cli.hpp"

#include "perigibbs/analysis.hpp"
#include "perigibbs/io.hpp"
#include "perigibbs/kernels.hpp"
#include "perigibbs/solver.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace perigibbs {

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::optional<std::string> family;
  std::optional<int> n;
  std::optional<int> k;
  std::optional<long long> nodes;
  std::optional<std::string> scheme;
  std::optional<std::uint64_t> seed;
  std::optional<int> starts;
  std::optional<double> tol;
  std::optional<std::string> out;
  std::optional<std::string> xi;
  std::optional<std::string> xi_file;
  std::optional<std::string> kernel_file;
  std::optional<double> J;
  std::optional<double> beta;
  std::optional<int> k_max;
  std::optional<double> damping;
  std::optional<int> max_iterations;
  std::optional<double> dedup_radius;
  std::optional<int> threads;

  std::set<std::string> keys() const {
    std::set<std::string> s;
    auto add = [&](const char* name, bool present) {
      if (present) s.insert(name);
    };
    add("family", family.has_value());
    add("n", n.has_value());
    add("k", k.has_value());
    add("nodes", nodes.has_value());
    add("scheme", scheme.has_value());
    add("seed", seed.has_value());
    add("starts", starts.has_value());
    add("tol", tol.has_value());
    add("out", out.has_value());
    add("xi", xi.has_value());
    add("xi_file", xi_file.has_value());
    add("kernel_file", kernel_file.has_value());
    add("J", J.has_value());
    add("beta", beta.has_value());
    add("k_max", k_max.has_value());
    add("damping", damping.has_value());
    add("max_iterations", max_iterations.has_value());
    add("dedup_radius", dedup_radius.has_value());
    add("threads", threads.has_value());
    return s;
  }
};

// Keys each command accepts, from flags or the config file.
const std::map<std::string, std::set<std::string>>& command_schema() {
  static const std::set<std::string> kernel_keys{"family", "n",  "k",    "nodes",       "scheme",
                                                 "xi",     "J",  "beta", "kernel_file", "out"};
  static const std::map<std::string, std::set<std::string>> schema = [] {
    std::map<std::string, std::set<std::string>> m;
    m["catalog"] = {"out"};
    m["verify"] = {"family", "n", "k", "nodes", "scheme", "out"};
    m["solve"] = kernel_keys;
    m["solve"].insert({"seed", "starts", "tol", "damping", "max_iterations", "dedup_radius", "threads"});
    m["uniq"] = kernel_keys;
    m["uniq"].insert("xi_file");
    m["k0"] = {"k_max", "out"};
    m["export-kernel"] = kernel_keys;
    return m;
  }();
  return schema;
}

template <typename T>
void json_take(const Json& doc, const std::string& key, std::optional<T>& dst) {
  try {
    dst = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold one JSON object");
  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") {
      if (!value.is_string()) throw ConfigError("config key 'command' must be a string");
      c.command = value.get<std::string>();
    } else if (key == "family") { json_take(doc, key, c.family);
    } else if (key == "n") { json_take(doc, key, c.n);
    } else if (key == "k") { json_take(doc, key, c.k);
    } else if (key == "nodes") { json_take(doc, key, c.nodes);
    } else if (key == "scheme") { json_take(doc, key, c.scheme);
    } else if (key == "seed") { json_take(doc, key, c.seed);
    } else if (key == "starts") { json_take(doc, key, c.starts);
    } else if (key == "tol") { json_take(doc, key, c.tol);
    } else if (key == "out") { json_take(doc, key, c.out);
    } else if (key == "xi") { json_take(doc, key, c.xi);
    } else if (key == "xi_file") { json_take(doc, key, c.xi_file);
    } else if (key == "kernel_file") { json_take(doc, key, c.kernel_file);
    } else if (key == "J") { json_take(doc, key, c.J);
    } else if (key == "beta") { json_take(doc, key, c.beta);
    } else if (key == "k_max") { json_take(doc, key, c.k_max);
    } else if (key == "damping") { json_take(doc, key, c.damping);
    } else if (key == "max_iterations") { json_take(doc, key, c.max_iterations);
    } else if (key == "dedup_radius") { json_take(doc, key, c.dedup_radius);
    } else if (key == "threads") { json_take(doc, key, c.threads);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return c;
}

template <typename T>
void overlay(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

RunConfig merge(RunConfig base, const RunConfig& flags) {
  overlay(base.family, flags.family);
  overlay(base.n, flags.n);
  overlay(base.k, flags.k);
  overlay(base.nodes, flags.nodes);
  overlay(base.scheme, flags.scheme);
  overlay(base.seed, flags.seed);
  overlay(base.starts, flags.starts);
  overlay(base.tol, flags.tol);
  overlay(base.out, flags.out);
  overlay(base.xi, flags.xi);
  overlay(base.xi_file, flags.xi_file);
  overlay(base.kernel_file, flags.kernel_file);
  overlay(base.J, flags.J);
  overlay(base.beta, flags.beta);
  overlay(base.k_max, flags.k_max);
  overlay(base.damping, flags.damping);
  overlay(base.max_iterations, flags.max_iterations);
  overlay(base.dedup_radius, flags.dedup_radius);
  overlay(base.threads, flags.threads);
  return base;
}

void validate_keys(const RunConfig& c) {
  const auto& allowed = command_schema().at(c.command);
  for (const auto& key : c.keys()) {
    if (!allowed.count(key)) throw ConfigError("'" + key + "' is not used by the " + c.command + " command");
  }
}

std::filesystem::path output_dir(const RunConfig& c) {
  if (c.out) return *c.out;
  if (const char* env = std::getenv(output_env_var); env && *env) return env;
  return "perigibbs-out";
}

KernelFamily require_family(const RunConfig& c) {
  if (!c.family) throw ConfigError("--family is required");
  auto f = parse_family(*c.family);
  if (!f) throw ConfigError("unknown family '" + *c.family + "'");
  return *f;
}

bool is_catalog(KernelFamily f) {
  return f == KernelFamily::k2_family || f == KernelFamily::k3_family || f == KernelFamily::k_ge4_family ||
         f == KernelFamily::four_cycle_family;
}

Scheme scheme_for(const RunConfig& c, KernelFamily family) {
  const std::string name = c.scheme.value_or("auto");
  if (name == "auto") {
    return family == KernelFamily::k2_family ? Scheme::gauss_legendre_split : Scheme::gauss_legendre;
  }
  auto s = parse_scheme(name);
  if (!s) throw ConfigError("unknown scheme '" + name + "'");
  return *s;
}

Index node_count(const RunConfig& c) {
  const long long n = c.nodes.value_or(200);
  if (n < 2) throw ConfigError("--nodes must be at least 2");
  return static_cast<Index>(n);
}

KernelParams catalog_params(const RunConfig& c, KernelFamily family) {
  KernelParams p;
  switch (family) {
    case KernelFamily::k2_family:
      if (!c.n) throw ConfigError("k2_family needs --n");
      if (*c.n < 1) throw ConfigError("k2_family needs n >= 1");
      if (c.k && *c.k != 2) throw ConfigError("k2_family is built for k = 2");
      p.n = c.n;
      p.k = 2;
      break;
    case KernelFamily::k3_family:
      if (c.k && *c.k != 3) throw ConfigError("k3_family is built for k = 3");
      p.k = 3;
      break;
    case KernelFamily::k_ge4_family:
      if (!c.k || *c.k < 4) throw ConfigError("k_ge4_family needs --k >= 4");
      p.k = c.k;
      break;
    case KernelFamily::four_cycle_family:
      if (!c.k || *c.k < 2) throw ConfigError("four_cycle_family needs --k >= 2");
      p.k = c.k;
      break;
    default:
      throw ConfigError("not a catalog family: " + std::string(to_string(family)));
  }
  return p;
}

std::string stem(const RunConfig& c, KernelFamily family) {
  std::string s(to_string(family));
  if (family == KernelFamily::k2_family && c.n) s += "_n" + std::to_string(*c.n);
  if ((family == KernelFamily::k_ge4_family || family == KernelFamily::four_cycle_family) && c.k) {
    s += "_k" + std::to_string(*c.k);
  }
  if (family == KernelFamily::generic_xi) s += "_" + (c.xi ? *c.xi : std::string("grid"));
  return s;
}

/// Builds the kernel a command operates on. `allow_xi_file` admits the
/// interaction-grid input.
Kernel<double> build_kernel(const RunConfig& c, KernelFamily family, bool allow_xi_file) {
  if (family == KernelFamily::file) {
    if (!c.kernel_file) throw ConfigError("family file needs --kernel-file");
    return read_kernel_csv(*c.kernel_file);
  }
  if (c.kernel_file) throw ConfigError("--kernel-file is only used with --family file");
  auto rule = build_rule<double>(node_count(c), scheme_for(c, family));
  if (family == KernelFamily::generic_xi) {
    const double J = c.J.value_or(1.0);
    const double beta = c.beta.value_or(1.0);
    if (c.xi_file && allow_xi_file) {
      if (c.xi) throw ConfigError("give either --xi or --xi-file");
      return kernel_from_xi(rule, read_xi_csv(*c.xi_file, *rule), J, beta);
    }
    if (!c.xi) throw ConfigError("generic_xi needs --xi");
    auto xi = builtin_xi<double>(*c.xi);
    if (!xi) throw ConfigError("unknown interaction '" + *c.xi + "'");
    return kernel_from_xi(rule, *xi, J, beta, *c.xi);
  }
  if (c.xi || c.J || c.beta || c.xi_file) throw ConfigError("--xi, --J, --beta apply to generic_xi only");
  return build_catalog_kernel(family, catalog_params(c, family), rule);
}

/// k from the flag, or the order a catalog family is built for.
int resolve_k(const RunConfig& c, const Kernel<double>& kernel) {
  if (c.k) {
    if (*c.k < 1) throw ConfigError("--k must be positive");
    return *c.k;
  }
  if (kernel.params().k) return *kernel.params().k;
  throw ConfigError("--k is required for this kernel");
}

std::string sci(double x) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(3) << x;
  return s.str();
}

// ---------------------------------------------------------------------------

struct CatalogEntry {
  const char* name;
  const char* parameters;
  const char* realizes;
};

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries{
      {"k2_family(n)", "n >= 1, positive from the smallest n passing the scan; k = 2",
       "the model on the Cayley tree of order 2 has at least two periodic Gibbs measures"},
      {"k3_family", "no parameters; k = 3",
       "the model on the Cayley tree of order 3 (Gamma^3) has at least two periodic Gibbs measures"},
      {"k_ge4_family(k)", "k >= 4",
       "the model on the Cayley tree of order k has at least two periodic Gibbs measures"},
      {"four_cycle_family(k)", "k >= k0 (see the k0 command)",
       "the model on the Cayley tree of order k has at least four periodic Gibbs measures"},
      {"generic_xi", "xi in {zero, product, abs_diff, sq_diff, cos} or an xi grid file; J != 0, beta > 0; any k",
       "no period-2 measure when (M/m)^k - (m/M)^k < 1/k"},
  };
  return entries;
}

int cmd_catalog(const RunConfig&, std::ostream& out) {
  for (const auto& e : catalog_entries()) {
    out << e.name << "\n  parameters: " << e.parameters << "\n  realizes:   " << e.realizes << "\n";
  }
  return exit_ok;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const KernelFamily family = require_family(c);
  if (!is_catalog(family)) throw ConfigError("verify needs a catalog family, got " + *c.family);
  const KernelParams params = catalog_params(c, family);
  const Index n = node_count(c);
  const Scheme scheme = scheme_for(c, family);
  const auto report = verify_catalog<double>(family, params, n, scheme);
  const auto dir = output_dir(c);
  const std::string base = stem(c, family);
  write_json(dir / (base + "_verify.json"), to_json(report));
  if (!report.kernel_positive()) {
    err << "kernel is not positive: minimum " << sci(report.scan.min) << " on the " << report.scan.points << "x"
        << report.scan.points << " scan grid\n";
    return exit_config_error;
  }
  auto rule = build_rule<double>(n, scheme);
  const auto kernel = build_catalog_kernel(family, params, rule, 0);
  for (const auto& cf : closed_form_pairs(family, params, rule)) {
    write_grid_function_csv(dir / (base + "_" + cf.label + "_f.csv"), cf.pair.f);
    write_grid_function_csv(dir / (base + "_" + cf.label + "_g.csv"), cf.pair.g);
    write_plot_csv(dir / (base + "_" + cf.label + "_plot.csv"), kernel, cf.pair);
  }
  out << to_string(family) << "  nodes " << n << "/" << 2 * n << "  scheme " << to_string(scheme) << "\n";
  for (const auto& e : report.entries) {
    out << "  " << std::left << std::setw(12) << e.label << " r1 " << sci(e.residual_f) << " -> "
        << sci(e.residual_f_fine) << "  r2 " << sci(e.residual_g) << " -> " << sci(e.residual_g_fine)
        << (e.pass ? "  ok" : "  FAIL") << "\n";
  }
  out << (report.pass() ? "verified" : "verification failed") << "\n";
  return report.pass() ? exit_ok : exit_verification_failed;
}

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const KernelFamily family = require_family(c);
  const auto kernel = build_kernel(c, family, false);
  if (!kernel.positive()) {
    const double lo = kernel.scan() ? kernel.scan()->min : kernel.node_min();
    err << "kernel is not positive: minimum " << sci(lo) << "\n";
    return exit_config_error;
  }
  SolverConfig sc;
  sc.k = resolve_k(c, kernel);
  if (c.seed) sc.seed = *c.seed;
  if (c.starts) sc.starts.random_count = *c.starts;
  if (c.tol) sc.tolerance = *c.tol;
  if (c.damping) sc.damping = *c.damping;
  if (c.max_iterations) sc.max_iterations = *c.max_iterations;
  if (c.dedup_radius) sc.dedup_radius = *c.dedup_radius;
  if (c.threads) sc.threads = *c.threads;
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (sc.k == 1) {
    err << "warning: k = 1 is the linear case, which has not any solution with f != g; "
           "only fixed points are expected\n";
  }
  const auto result = find_cycles(kernel, sc);
  const auto dir = output_dir(c);
  const std::string base = stem(c, family);
  write_json(dir / (base + "_solve.json"), to_json(result, sc));
  if (sc.k >= 2) {
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
      auto plain = rescale_pair(a_to_hammerstein(kernel, result.pairs[i].pair));
      write_plot_csv(dir / (base + "_pair" + std::to_string(i) + "_plot.csv"), kernel, plain);
    }
  }
  out << to_string(family) << "  k " << sc.k << "  starts " << result.starts.size() << "  pairs "
      << result.pairs.size() << " (fixed_point " << result.count(Classification::fixed_point) << ", two_cycle "
      << result.count(Classification::two_cycle) << ", unverified " << result.count(Classification::unverified)
      << ")\n";
  for (std::size_t i = 0; i < result.pairs.size(); ++i) {
    const auto& p = result.pairs[i];
    out << "  [" << i << "] " << std::left << std::setw(11) << to_string(p.classification) << " rel sup|f-g| "
        << sci(p.separation) << "  residual " << sci(p.pair.residual()) << "  from " << p.start << "\n";
  }
  std::size_t failed = 0;
  for (const auto& s : result.starts) failed += s.status != StartStatus::converged;
  if (failed) out << "  " << failed << " start(s) did not converge\n";
  return exit_ok;
}

int cmd_uniq(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const KernelFamily family = require_family(c);
  const auto kernel = build_kernel(c, family, true);
  const int k = resolve_k(c, kernel);
  KernelReport<double> report;
  try {
    report = uniqueness_condition(kernel, k);
  } catch (const std::domain_error& e) {
    err << e.what() << "\n";
    return exit_config_error;
  }
  write_json(output_dir(c) / (stem(c, family) + "_uniq.json"), to_json(report));
  out << to_string(family) << "  k " << k << "  M " << sci(report.ext.M) << "  m " << sci(report.ext.m)
      << "  (M/m)^k-(m/M)^k " << sci(report.uniqueness_lhs) << "  1/k " << sci(report.threshold) << "\n"
      << to_string(report.verdict) << "\n";
  return report.verdict == Verdict::no_period2_guaranteed ? exit_ok : exit_inconclusive;
}

int cmd_k0(const RunConfig& c, std::ostream& out) {
  const int k_max = c.k_max.value_or(200);
  if (k_max < 2) throw ConfigError("--k-max must be at least 2");
  const auto ms = solve_moment_system();
  const auto search = find_k0(ms, k_max);
  Json doc{{"k_max", k_max}, {"scan_points", 1001}, {"odd_targets", std::string(to_string(ms.odd_targets))}};
  if (search.k0) {
    doc["k0"] = *search.k0;
    doc["min_at_k0"] = search.min_at_k0;
    if (search.min_before_k0) doc["min_before_k0"] = *search.min_before_k0;
  } else {
    doc["k0"] = nullptr;
    doc["min_at_k_max"] = four_cycle_scan_min(ms, k_max);
  }
  write_json(output_dir(c) / "k0.json", doc);
  if (!search.k0) {
    out << "no k0 <= " << k_max << "; min K at k_max " << sci(doc["min_at_k_max"].get<double>()) << "\n";
    return exit_not_found;
  }
  out << "k0 " << *search.k0 << "\nmin K at k0 " << sci(search.min_at_k0) << "\n";
  if (search.min_before_k0) out << "min K at k0-1 " << sci(*search.min_before_k0) << "\n";
  return exit_ok;
}

int cmd_export_kernel(const RunConfig& c, std::ostream& out) {
  const KernelFamily family = require_family(c);
  if (family == KernelFamily::file) throw ConfigError("export-kernel needs a family that can be built");
  const auto kernel = build_kernel(c, family, false);
  const auto path = output_dir(c) / (stem(c, family) + ".csv");
  write_kernel_csv(path, kernel);
  out << path.string() << "\n" << kernel_sidecar_path(path).string() << "\n";
  return exit_ok;
}

template <typename T>
struct Flag {
  T value{};
  CLI::Option* option = nullptr;
  void into(std::optional<T>& dst) const {
    if (option->count()) dst = value;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Period-2 boundary laws of [0,1]-spin models on Cayley trees", "perigibbs"};
  app.fallthrough();
  app.require_subcommand(1);

  Flag<std::string> family, scheme, out_dir, config, xi, xi_file, kernel_file;
  Flag<int> n, k, starts, k_max, max_iterations, threads;
  Flag<long long> nodes;
  Flag<std::uint64_t> seed;
  Flag<double> tol, J, beta, damping, dedup_radius;
  family.option = app.add_option("--family", family.value, "Kernel family");
  n.option = app.add_option("--n", n.value, "Root order of k2_family");
  k.option = app.add_option("--k", k.value, "Tree order k");
  nodes.option = app.add_option("--nodes", nodes.value, "Quadrature node count (default 200)");
  scheme.option = app.add_option("--scheme", scheme.value, "gauss_legendre, gauss_legendre_split, composite_simpson or auto");
  seed.option = app.add_option("--seed", seed.value, "Random seed for solver starts");
  starts.option = app.add_option("--starts", starts.value, "Number of random solver starts");
  tol.option = app.add_option("--tol", tol.value, "Solver tolerance");
  out_dir.option = app.add_option("--out", out_dir.value, std::string("Output directory (default $") + output_env_var + ")");
  config.option = app.add_option("--config", config.value, "JSON config file; flags override its keys");
  xi.option = app.add_option("--xi", xi.value, "Builtin interaction for generic_xi");
  xi_file.option = app.add_option("--xi-file", xi_file.value, "Interaction grid CSV for generic_xi");
  kernel_file.option = app.add_option("--kernel-file", kernel_file.value, "Kernel CSV for family file");
  J.option = app.add_option("--J", J.value, "Coupling J");
  beta.option = app.add_option("--beta", beta.value, "Inverse temperature");
  k_max.option = app.add_option("--k-max", k_max.value, "Largest k searched by k0");
  damping.option = app.add_option("--damping", damping.value, "Solver damping in (0,1]");
  max_iterations.option = app.add_option("--max-iterations", max_iterations.value, "Solver iteration cap");
  dedup_radius.option = app.add_option("--dedup-radius", dedup_radius.value, "Solver dedup radius");
  threads.option = app.add_option("--threads", threads.value, "Solver worker threads");

  app.add_subcommand("catalog", "List the kernel families");
  app.add_subcommand("verify", "Check the closed-form pairs of a catalog family");
  app.add_subcommand("solve", "Multistart search for 2-cycles");
  app.add_subcommand("uniq", "Evaluate the non-existence condition");
  app.add_subcommand("k0", "Smallest k with a positive four-cycle kernel");
  app.add_subcommand("export-kernel", "Write a kernel matrix and its metadata");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return exit_config_error;
  }

  RunConfig flags;
  flags.command = app.get_subcommands().front()->get_name();
  family.into(flags.family);
  n.into(flags.n);
  k.into(flags.k);
  nodes.into(flags.nodes);
  scheme.into(flags.scheme);
  seed.into(flags.seed);
  starts.into(flags.starts);
  tol.into(flags.tol);
  out_dir.into(flags.out);
  xi.into(flags.xi);
  xi_file.into(flags.xi_file);
  kernel_file.into(flags.kernel_file);
  J.into(flags.J);
  beta.into(flags.beta);
  k_max.into(flags.k_max);
  damping.into(flags.damping);
  max_iterations.into(flags.max_iterations);
  dedup_radius.into(flags.dedup_radius);
  threads.into(flags.threads);

  try {
    RunConfig cfg = flags;
    if (config.option->count()) {
      RunConfig file = load_config_file(config.value);
      if (!file.command.empty() && file.command != flags.command) {
        throw ConfigError("config file is for '" + file.command + "', not '" + flags.command + "'");
      }
      file.command = flags.command;
      cfg = merge(std::move(file), flags);
    }
    validate_keys(cfg);
    const std::string& cmd = cfg.command;
    if (cmd == "catalog") return cmd_catalog(cfg, out);
    if (cmd == "verify") return cmd_verify(cfg, out, err);
    if (cmd == "solve") return cmd_solve(cfg, out, err);
    if (cmd == "uniq") return cmd_uniq(cfg, out, err);
    if (cmd == "k0") return cmd_k0(cfg, out);
    if (cmd == "export-kernel") return cmd_export_kernel(cfg, out);
    throw ConfigError("unknown command " + cmd);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return exit_config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_config_error;
  }
}

}  // namespace perigibbs
