#ifndef PERIGIBBS_SOLVER_HPP
#define PERIGIBBS_SOLVER_HPP

// Multistart search for 2-cycles of the normalized boundary-law map
// f -> A_k f, by fixed-point iteration of the composed map A_k(A_k f).
// Also the closed-form pairs of the catalog families and their residual
// verification at two resolutions.

#include "perigibbs/grid.hpp"
#include "perigibbs/kernels.hpp"
#include "perigibbs/operators.hpp"

#include <cmath>
#include <algorithm>
#include <array>
#include <cstdint>
#include <numbers>
#include <tuple>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace perigibbs {

struct StartSet {
  bool constant_one = true;
  bool catalog = true;          // closed forms of the kernel's family, exact and perturbed
  double perturbation = 0.01;   // relative noise on the perturbed catalog starts
  int random_count = 8;         // seeded random positive functions
};

struct SolverConfig {
  int k = 2;
  int max_iterations = 5000;
  double tolerance = 1e-10;     // on sup |f_{n+1} - f_n|, relative to max(1, sup |f_n|)
  double damping = 1.0;         // theta in f <- (1 - theta) f + theta A(A f)
  StartSet starts;
  double dedup_radius = 1e-4;   // sup distance, relative to max(1, sup norms of the pairs compared)
  std::uint64_t seed = 42;
  double verify_threshold = 1e-6;  // residual bound for a verified pair
  int threads = 1;

  void validate() const {
    if (k < 1) throw std::invalid_argument("solver: k must be positive");
    if (max_iterations < 1) throw std::invalid_argument("solver: max_iterations must be positive");
    if (!(tolerance > 0)) throw std::invalid_argument("solver: tolerance must be positive");
    if (!(damping > 0 && damping <= 1)) throw std::invalid_argument("solver: damping must lie in (0,1]");
    if (!(dedup_radius > tolerance)) throw std::invalid_argument("solver: dedup radius must exceed the tolerance");
    if (starts.random_count < 0) throw std::invalid_argument("solver: negative random start count");
    if (threads < 1) throw std::invalid_argument("solver: threads must be positive");
  }
};

enum class StartStatus { converged, max_iterations, nonpositive, nonfinite };

inline std::string_view to_string(StartStatus s) {
  switch (s) {
    case StartStatus::converged: return "converged";
    case StartStatus::max_iterations: return "max_iterations";
    case StartStatus::nonpositive: return "nonpositive";
    case StartStatus::nonfinite: return "nonfinite";
  }
  return "unknown";
}

template <typename Scalar>
struct IterationOutcome {
  StartStatus status = StartStatus::max_iterations;
  int iterations = 0;
  bool damped = false;      // oscillation fallback to theta = 0.5 fired
  Scalar last_step = 0;
  std::optional<CyclePair<Scalar>> pair;  // a_form, residuals filled
};

/// Iterates f <- (1 - theta) f + theta A_k(A_k f) from f0. When successive
/// steps keep alternating in sign the damping drops to 0.5. On convergence
/// the partner is g = A_k f.
template <typename Scalar>
IterationOutcome<Scalar> iterate_pair(const Kernel<Scalar>& kernel, int k, const GridFunction<Scalar>& f0,
                                      const SolverConfig& config) {
  if (!f0.positive()) throw std::invalid_argument("iterate_pair: start is not positive");
  IterationOutcome<Scalar> out;
  Scalar theta = Scalar(config.damping);
  // a_form functions are normalized to 1 at t = 0 and A_k ignores scale
  GridFunction<Scalar> f = f0.origin() ? scaled(f0, Scalar(1) / *f0.origin()) : f0;
  if (!f.origin()) theta = Scalar(1);
  Vector<Scalar> previous_step;
  int alternating = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    out.iterations = it;
    std::optional<GridFunction<Scalar>> image;
    try {
      image = apply_A(kernel, apply_A(kernel, f, k), k);
    } catch (const std::domain_error&) {
      out.status = StartStatus::nonpositive;
      return out;
    }
    Vector<Scalar> next = (1 - theta) * f.values() + theta * image->values();
    if (!next.allFinite()) {
      out.status = StartStatus::nonfinite;
      return out;
    }
    if (!(next.array() > Scalar(0)).all()) {
      out.status = StartStatus::nonpositive;
      return out;
    }
    const Scalar origin = f.origin() ? (1 - theta) * *f.origin() + theta : Scalar(1);
    Vector<Scalar> step = next - f.values();
    const Scalar d = step.cwiseAbs().maxCoeff();
    const Scalar scale = std::max(Scalar(1), next.cwiseAbs().maxCoeff());
    if (previous_step.size() == step.size() && step.dot(previous_step) < Scalar(0)) {
      ++alternating;
    } else {
      alternating = 0;
    }
    if (alternating >= 3 && theta > Scalar(0.5)) {
      theta = Scalar(0.5);
      out.damped = true;
      alternating = 0;
    }
    previous_step = std::move(step);
    f = GridFunction<Scalar>(f.rule(), std::move(next), origin);
    out.last_step = d;
    if (d <= Scalar(config.tolerance) * scale) {
      out.status = StartStatus::converged;
      break;
    }
  }
  if (out.status != StartStatus::converged) return out;
  GridFunction<Scalar> g = apply_A(kernel, f, k);
  CyclePair<Scalar> pair{std::move(f), std::move(g), k, PairForm::a_form};
  try {
    cycle_residual(kernel, pair);
  } catch (const std::domain_error&) {
    out.status = StartStatus::nonpositive;
    return out;
  }
  out.pair = std::move(pair);
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form pairs of the catalog families, in plain Hammerstein form.

template <typename Scalar>
struct ClosedForm {
  std::string label;
  CyclePair<Scalar> pair;
};

template <typename Scalar>
std::vector<ClosedForm<Scalar>> closed_form_pairs(KernelFamily family, const KernelParams& params,
                                                  RulePtr<Scalar> rule) {
  using std::pow;
  std::vector<ClosedForm<Scalar>> out;
  auto one = GridFunction<Scalar>::constant(rule, Scalar(1), "one");
  switch (family) {
    case KernelFamily::k2_family: {
      const int n = params.n.value_or(0);
      const auto kc = k2_constants<Scalar>(n);
      auto f = GridFunction<Scalar>::sample(
          rule, [&](Scalar t) { return kc.c * (signed_root(t - Scalar(0.5), n) + 2); }, "c_n(root_n(t-1/2)+2)");
      out.push_back({"root_pair", CyclePair<Scalar>{f, one, 2, PairForm::hammerstein}});
      break;
    }
    case KernelFamily::k3_family: {
      const Scalar a = k3_amplitude<Scalar>();
      auto f = GridFunction<Scalar>::sample(rule, [&](Scalar t) { return a * (1 + k3_profile(t)); },
                                            "a(1+sin(pi(2t-1)/3))");
      out.push_back({"sine_pair", CyclePair<Scalar>{f, one, 3, PairForm::hammerstein}});
      break;
    }
    case KernelFamily::k_ge4_family: {
      const int k = params.k.value_or(0);
      const Scalar a = k_ge4_amplitude<Scalar>(k);
      auto f = GridFunction<Scalar>::sample(rule, [&](Scalar t) { return a * (t + Scalar(0.5)); }, "a(k)(t+1/2)");
      out.push_back({"linear_pair", CyclePair<Scalar>{f, one, k, PairForm::hammerstein}});
      break;
    }
    case KernelFamily::four_cycle_family: {
      const int k = params.k.value_or(0);
      const Scalar inv = Scalar(1) / Scalar(k);
      auto prof = [&](int i, std::string tag) {
        return GridFunction<Scalar>::sample(
            rule, [&, i](Scalar t) { return pow(four_cycle_profiles(t - Scalar(0.5))[std::size_t(i)], inv); },
            std::move(tag));
      };
      // profile order: 20s^4+3/4, 6s^2+1/2, s^3+1, s^5+1
      auto f1 = prof(1, "(6s^2+1/2)^(1/k)");
      auto f2 = prof(0, "(20s^4+3/4)^(1/k)");
      auto g1 = prof(2, "(s^3+1)^(1/k)");
      auto g2 = prof(3, "(s^5+1)^(1/k)");
      out.push_back({"even_pair", CyclePair<Scalar>{f1, f2, k, PairForm::hammerstein}});
      out.push_back({"odd_pair", CyclePair<Scalar>{g1, g2, k, PairForm::hammerstein}});
      break;
    }
    case KernelFamily::generic_xi:
    case KernelFamily::file:
      break;
  }
  return out;
}

template <typename Scalar>
struct VerificationEntry {
  std::string label;
  int k = 0;
  Index nodes = 0;
  Scalar residual_f = 0;
  Scalar residual_g = 0;
  Index nodes_fine = 0;
  Scalar residual_f_fine = 0;
  Scalar residual_g_fine = 0;
  bool pass = false;        // both coarse residuals below the threshold
  bool refines = false;     // fine residuals no larger, or both under 1e-10

  Scalar residual() const { return std::max(residual_f, residual_g); }
};

template <typename Scalar>
struct VerificationReport {
  KernelFamily family = KernelFamily::generic_xi;
  KernelParams params;
  Scheme scheme = Scheme::gauss_legendre;
  double threshold = 1e-6;
  PositivityScan<Scalar> scan;
  std::vector<VerificationEntry<Scalar>> entries;
  bool kernel_positive() const { return scan.positive(); }
  bool pass() const {
    if (!kernel_positive() || entries.empty()) return false;
    for (const auto& e : entries) {
      if (!e.pass) return false;
    }
    return true;
  }
};

template <typename Scalar>
Kernel<Scalar> build_catalog_kernel(KernelFamily family, const KernelParams& params, RulePtr<Scalar> rule,
                                    Index scan_points = 1001, const MomentSystem* ms = nullptr) {
  switch (family) {
    case KernelFamily::k2_family:
      if (!params.n) throw std::invalid_argument("k2_family needs n");
      return build_k2_kernel(std::move(rule), *params.n, scan_points);
    case KernelFamily::k3_family: return build_k3_kernel(std::move(rule), scan_points);
    case KernelFamily::k_ge4_family:
      if (!params.k) throw std::invalid_argument("k_ge4_family needs k");
      return build_k_ge4_kernel(std::move(rule), *params.k, scan_points);
    case KernelFamily::four_cycle_family: {
      if (!params.k) throw std::invalid_argument("four_cycle_family needs k");
      if (ms) return build_four_cycle_kernel(std::move(rule), *params.k, *ms, scan_points);
      return build_four_cycle_kernel(std::move(rule), *params.k, solve_moment_system(), scan_points);
    }
    case KernelFamily::generic_xi:
    case KernelFamily::file:
      break;
  }
  throw std::invalid_argument("not a catalog family: " + std::string(to_string(family)));
}

/// Residuals of every closed-form pair at N and 2N nodes.
template <typename Scalar>
VerificationReport<Scalar> verify_catalog(KernelFamily family, const KernelParams& params, Index node_count,
                                          Scheme scheme = Scheme::gauss_legendre, double threshold = 1e-6) {
  VerificationReport<Scalar> report;
  report.family = family;
  report.params = params;
  report.scheme = scheme;
  report.threshold = threshold;
  std::optional<MomentSystem> ms;
  if (family == KernelFamily::four_cycle_family) ms = solve_moment_system();
  const MomentSystem* msp = ms ? &*ms : nullptr;

  auto coarse_rule = build_rule<Scalar>(node_count, scheme);
  auto fine_rule = build_rule<Scalar>(2 * node_count, scheme);
  const Kernel<Scalar> coarse = build_catalog_kernel(family, params, coarse_rule, 1001, msp);
  const Kernel<Scalar> fine = build_catalog_kernel(family, params, fine_rule, 0, msp);
  report.scan = *coarse.scan();

  auto coarse_pairs = closed_form_pairs(family, coarse.params(), coarse_rule);
  auto fine_pairs = closed_form_pairs(family, fine.params(), fine_rule);
  if (family == KernelFamily::four_cycle_family) {
    const int k = *params.k;
    auto constant = [&](const RulePtr<Scalar>& r) {
      auto one = GridFunction<Scalar>::constant(r, Scalar(1), "one");
      return ClosedForm<Scalar>{"constant", CyclePair<Scalar>{one, one, k, PairForm::hammerstein}};
    };
    coarse_pairs.push_back(constant(coarse_rule));
    fine_pairs.push_back(constant(fine_rule));
  }
  for (std::size_t i = 0; i < coarse_pairs.size(); ++i) {
    VerificationEntry<Scalar> e;
    e.label = coarse_pairs[i].label;
    e.k = coarse_pairs[i].pair.k;
    e.nodes = node_count;
    e.nodes_fine = 2 * node_count;
    std::tie(e.residual_f, e.residual_g) = cycle_residual(coarse, coarse_pairs[i].pair);
    std::tie(e.residual_f_fine, e.residual_g_fine) = cycle_residual(fine, fine_pairs[i].pair);
    e.pass = e.residual_f < Scalar(threshold) && e.residual_g < Scalar(threshold);
    const Scalar floor = Scalar(1e-10);
    e.refines = (e.residual_f_fine <= e.residual_f || e.residual_f_fine < floor) &&
                (e.residual_g_fine <= e.residual_g || e.residual_g_fine < floor);
    report.entries.push_back(std::move(e));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Multistart search.

enum class Classification { fixed_point, two_cycle, unverified };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::fixed_point: return "fixed_point";
    case Classification::two_cycle: return "two_cycle";
    case Classification::unverified: return "unverified";
  }
  return "unknown";
}

template <typename Scalar>
struct FoundPair {
  CyclePair<Scalar> pair;  // a_form, canonical order
  Classification classification = Classification::unverified;
  Scalar separation = 0;   // sup |f - g| / pair_scale
  std::string start;       // first start that reached it
  int iterations = 0;
};

struct StartRecord {
  std::string label;
  StartStatus status = StartStatus::max_iterations;
  int iterations = 0;
  bool damped = false;
  double last_step = 0.0;
  double residual = 0.0;
  std::optional<std::size_t> pair_index;  // into SolveResult::pairs
};

template <typename Scalar>
struct SolveResult {
  std::vector<FoundPair<Scalar>> pairs;
  std::vector<StartRecord> starts;

  std::size_t count(Classification c) const {
    std::size_t n = 0;
    for (const auto& p : pairs) n += p.classification == c;
    return n;
  }
};

/// Smaller value at the first node goes first; ties fall to the second node.
template <typename Scalar>
CyclePair<Scalar> canonical(const CyclePair<Scalar>& pair) {
  const auto& f = pair.f.values();
  const auto& g = pair.g.values();
  for (Index i = 0; i < f.size(); ++i) {
    if (f(i) < g(i)) return pair;
    if (f(i) > g(i)) return pair.swapped();
    if (i >= 1) break;
  }
  return pair;
}

/// max(1, sup |f|, sup |g|): a_form values grow like a k-th power, so
/// distances between pairs are measured relative to this.
template <typename Scalar>
Scalar pair_scale(const CyclePair<Scalar>& pair) {
  return std::max({Scalar(1), sup_norm(pair.f), sup_norm(pair.g)});
}

template <typename Scalar>
struct LabeledStart {
  std::string label;
  GridFunction<Scalar> f;
};

/// Start functions in a fixed order: the constant 1, catalog closed forms of
/// the kernel's family (exact, then perturbed), then seeded random
/// exp(sum_j c_j cos(j pi t)) with c_j uniform in [-1,1].
template <typename Scalar>
std::vector<LabeledStart<Scalar>> make_starts(const Kernel<Scalar>& kernel, const SolverConfig& config) {
  std::vector<LabeledStart<Scalar>> starts;
  const auto& rule = kernel.rule();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (config.starts.constant_one) starts.push_back({"constant_one", GridFunction<Scalar>::constant(rule, Scalar(1))});
  if (config.starts.catalog) {
    std::vector<LabeledStart<Scalar>> exact;
    for (const auto& cf : closed_form_pairs(kernel.family(), kernel.params(), rule)) {
      if (cf.pair.k != config.k) continue;
      const auto a = hammerstein_to_a(cf.pair);
      exact.push_back({"catalog:" + cf.label + ":f", a.f});
      exact.push_back({"catalog:" + cf.label + ":g", a.g});
    }
    for (const auto& s : exact) starts.push_back(s);
    for (const auto& s : exact) {
      Vector<Scalar> v = s.f.values();
      for (Index i = 0; i < v.size(); ++i) v(i) *= Scalar(1 + config.starts.perturbation * unit(rng));
      starts.push_back({s.label + "+noise", GridFunction<Scalar>(rule, std::move(v), Scalar(1))});
    }
  }
  for (int r = 0; r < config.starts.random_count; ++r) {
    std::array<double, 4> c{};
    for (auto& x : c) x = 2.0 * unit(rng) - 1.0;
    auto f = GridFunction<Scalar>::sample(rule, [&](Scalar t) {
      using std::cos;
      using std::exp;
      Scalar acc = 0;
      for (int j = 0; j < 4; ++j) acc += Scalar(c[std::size_t(j)]) * cos(Scalar(j) * std::numbers::pi_v<Scalar> * t);
      return exp(acc);
    });
    starts.push_back({"random:" + std::to_string(r), std::move(f)});
  }
  return starts;
}

template <typename Scalar>
SolveResult<Scalar> find_cycles(const Kernel<Scalar>& kernel, const SolverConfig& config) {
  config.validate();
  if (!kernel.positive()) throw std::invalid_argument("find_cycles needs a positive kernel");
  const auto starts = make_starts(kernel, config);

  std::vector<IterationOutcome<Scalar>> outcomes(starts.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < starts.size(); i += stride) {
      outcomes[i] = iterate_pair(kernel, config.k, starts[i].f, config);
    }
  };
  const auto threads = static_cast<std::size_t>(config.threads);
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  SolveResult<Scalar> result;
  const Scalar radius = Scalar(config.dedup_radius);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& o = outcomes[i];
    StartRecord rec;
    rec.label = starts[i].label;
    rec.status = o.status;
    rec.iterations = o.iterations;
    rec.damped = o.damped;
    rec.last_step = static_cast<double>(o.last_step);
    if (o.pair) {
      CyclePair<Scalar> p = canonical(*o.pair);
      rec.residual = static_cast<double>(p.residual());
      const Scalar scale = pair_scale(p);
      std::optional<std::size_t> match;
      for (std::size_t j = 0; j < result.pairs.size() && !match; ++j) {
        const auto& q = result.pairs[j].pair;
        const Scalar direct = std::max(sup_distance(p.f, q.f), sup_distance(p.g, q.g));
        const Scalar crossed = std::max(sup_distance(p.f, q.g), sup_distance(p.g, q.f));
        if (std::min(direct, crossed) < radius * std::max(scale, pair_scale(q))) match = j;
      }
      if (!match) {
        FoundPair<Scalar> fp{p, Classification::unverified, Scalar(0), {}, 0};
        fp.separation = sup_distance(p.f, p.g) / scale;
        const bool verified = p.residual() < Scalar(config.verify_threshold);
        if (!verified) {
          fp.classification = Classification::unverified;
        } else {
          fp.classification = fp.separation < radius ? Classification::fixed_point : Classification::two_cycle;
        }
        fp.start = rec.label;
        fp.iterations = o.iterations;
        result.pairs.push_back(std::move(fp));
        match = result.pairs.size() - 1;
      }
      rec.pair_index = match;
    }
    result.starts.push_back(std::move(rec));
  }
  return result;
}

}  // namespace perigibbs

#endif  // PERIGIBBS_SOLVER_HPP
