#ifndef PERIGIBBS_KERNELS_HPP
#define PERIGIBBS_KERNELS_HPP

// Kernel families K(t,u) = exp(J*beta*xi(t,u)) on [0,1]^2: generic kernels
// built from an interaction xi, the four explicit catalog families with
// closed-form 2-cycles, and kernels loaded from files.

#include "perigibbs/grid.hpp"
#include "perigibbs/linalg.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace perigibbs {

enum class KernelFamily { generic_xi, k2_family, k3_family, k_ge4_family, four_cycle_family, file };

std::string_view to_string(KernelFamily family);
std::optional<KernelFamily> parse_family(std::string_view name);

/// Family parameters; only the ones meaningful for the family are set.
struct KernelParams {
  std::optional<int> n;         // root order of the k2 family
  std::optional<int> k;         // branching order the construction targets
  std::optional<double> J;      // coupling
  std::optional<double> beta;   // inverse temperature
  std::string xi_name;          // builtin interaction name for generic_xi
};

template <typename Scalar>
struct PositivityScan {
  Scalar min = 0;
  Scalar max = 0;
  Index points = 0;  // per axis
  bool positive() const { return min > Scalar(0); }
};

template <typename Scalar>
class Kernel {
 public:
  using Evaluator = std::function<Scalar(Scalar, Scalar)>;

  /// Kernel with an analytic evaluator; fills the node matrix and the t = 0
  /// row, and scans the dense grid when scan_points > 0.
  Kernel(KernelFamily family, KernelParams params, RulePtr<Scalar> rule, Evaluator eval,
         Index scan_points = 1001)
      : family_(family), params_(std::move(params)), rule_(std::move(rule)), eval_(std::move(eval)) {
    const auto& x = rule_->nodes();
    const Index n = x.size();
    matrix_.resize(n, n);
    origin_row_.resize(n);
    for (Index j = 0; j < n; ++j) {
      origin_row_(j) = eval_(Scalar(0), x(j));
      for (Index i = 0; i < n; ++i) matrix_(i, j) = eval_(x(i), x(j));
    }
    check_finite();
    if (scan_points > 0) scan_ = run_scan(scan_points);
  }

  /// Node-only kernel (files, xi grids): evaluation exists at nodes and t = 0.
  Kernel(KernelFamily family, KernelParams params, RulePtr<Scalar> rule, Matrix<Scalar> matrix,
         Vector<Scalar> origin_row)
      : family_(family),
        params_(std::move(params)),
        rule_(std::move(rule)),
        matrix_(std::move(matrix)),
        origin_row_(std::move(origin_row)) {
    const Index n = rule_->size();
    if (matrix_.rows() != n || matrix_.cols() != n || origin_row_.size() != n) {
      throw std::invalid_argument("kernel matrix does not match the rule");
    }
    check_finite();
  }

  KernelFamily family() const { return family_; }
  const KernelParams& params() const { return params_; }
  const RulePtr<Scalar>& rule() const { return rule_; }
  /// K(t_i, u_j) over the rule's nodes.
  const Matrix<Scalar>& matrix() const { return matrix_; }
  /// K(0, u_j).
  const Vector<Scalar>& origin_row() const { return origin_row_; }
  bool has_evaluator() const { return static_cast<bool>(eval_); }
  const std::optional<PositivityScan<Scalar>>& scan() const { return scan_; }

  Scalar operator()(Scalar t, Scalar u) const {
    if (!eval_) throw std::logic_error("kernel has no evaluator off the nodes");
    return eval_(t, u);
  }

  /// K(t, u_j) for every node u_j.
  Vector<Scalar> row(Scalar t) const {
    if (!eval_) {
      if (t == Scalar(0)) return origin_row_;
      throw std::logic_error("kernel has no evaluator off the nodes");
    }
    const auto& x = rule_->nodes();
    Vector<Scalar> r(x.size());
    for (Index j = 0; j < x.size(); ++j) r(j) = eval_(t, x(j));
    return r;
  }

  /// Smallest entry over the node matrix and the t = 0 row.
  Scalar node_min() const { return std::min(matrix_.minCoeff(), origin_row_.minCoeff()); }
  Scalar node_max() const { return std::max(matrix_.maxCoeff(), origin_row_.maxCoeff()); }

  /// Positive on the dense scan when one ran, otherwise on the nodes.
  bool positive() const { return scan_ ? scan_->positive() : node_min() > Scalar(0); }

 private:
  void check_finite() const {
    if (!matrix_.allFinite() || !origin_row_.allFinite()) {
      throw std::domain_error("kernel has non-finite entries");
    }
  }

  PositivityScan<Scalar> run_scan(Index points) const {
    const Vector<Scalar> g = scan_grid<Scalar>(points);
    PositivityScan<Scalar> s;
    s.points = points;
    s.min = std::numeric_limits<Scalar>::infinity();
    s.max = -std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < points; ++i) {
      for (Index j = 0; j < points; ++j) {
        const Scalar v = eval_(g(i), g(j));
        if (!std::isfinite(static_cast<double>(v))) throw std::domain_error("kernel is not finite on the scan grid");
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
      }
    }
    return s;
  }

  KernelFamily family_;
  KernelParams params_;
  RulePtr<Scalar> rule_;
  Evaluator eval_;
  Matrix<Scalar> matrix_;
  Vector<Scalar> origin_row_;
  std::optional<PositivityScan<Scalar>> scan_;
};

// ---------------------------------------------------------------------------
// Generic kernels from an interaction xi.

template <typename Scalar>
using Interaction = std::function<Scalar(Scalar, Scalar)>;

/// xi sampled on the nodes plus its t = 0 row.
template <typename Scalar>
struct XiGrid {
  Matrix<Scalar> nodes;
  Vector<Scalar> origin_row;
};

/// Builtin interactions: zero, product (tu), abs_diff (|t-u|),
/// sq_diff ((t-u)^2), cos (cos(pi(t-u))).
template <typename Scalar>
std::optional<Interaction<Scalar>> builtin_xi(std::string_view name) {
  using std::abs;
  using std::cos;
  if (name == "zero") return Interaction<Scalar>([](Scalar, Scalar) { return Scalar(0); });
  if (name == "product") return Interaction<Scalar>([](Scalar t, Scalar u) { return t * u; });
  if (name == "abs_diff") return Interaction<Scalar>([](Scalar t, Scalar u) { return abs(t - u); });
  if (name == "sq_diff") return Interaction<Scalar>([](Scalar t, Scalar u) { return (t - u) * (t - u); });
  if (name == "cos") {
    return Interaction<Scalar>(
        [](Scalar t, Scalar u) { return cos(std::numbers::pi_v<Scalar> * (t - u)); });
  }
  return std::nullopt;
}

inline std::vector<std::string> builtin_xi_names() {
  return {"zero", "product", "abs_diff", "sq_diff", "cos"};
}

namespace detail {
inline void check_coupling(double J, double beta) {
  if (J == 0.0 || !std::isfinite(J)) throw std::invalid_argument("coupling J must be nonzero and finite");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
}
}  // namespace detail

/// K(t,u) = exp(J*beta*xi(t,u)).
template <typename Scalar>
Kernel<Scalar> kernel_from_xi(RulePtr<Scalar> rule, Interaction<Scalar> xi, double J, double beta,
                              std::string xi_name = {}, Index scan_points = 1001) {
  detail::check_coupling(J, beta);
  const Scalar jb = Scalar(J) * Scalar(beta);
  KernelParams params;
  params.J = J;
  params.beta = beta;
  params.xi_name = std::move(xi_name);
  auto eval = [xi = std::move(xi), jb](Scalar t, Scalar u) {
    using std::exp;
    const Scalar v = xi(t, u);
    if (!std::isfinite(static_cast<double>(v))) throw std::domain_error("interaction xi is not finite");
    return exp(jb * v);
  };
  return Kernel<Scalar>(KernelFamily::generic_xi, std::move(params), std::move(rule), eval, scan_points);
}

template <typename Scalar>
Kernel<Scalar> kernel_from_xi(RulePtr<Scalar> rule, const XiGrid<Scalar>& xi, double J, double beta) {
  detail::check_coupling(J, beta);
  if (!xi.nodes.allFinite() || !xi.origin_row.allFinite()) {
    throw std::domain_error("interaction xi has non-finite entries");
  }
  const Scalar jb = Scalar(J) * Scalar(beta);
  KernelParams params;
  params.J = J;
  params.beta = beta;
  params.xi_name = "grid";
  Matrix<Scalar> m = (jb * xi.nodes.array()).exp().matrix();
  Vector<Scalar> r = (jb * xi.origin_row.array()).exp().matrix();
  return Kernel<Scalar>(KernelFamily::generic_xi, std::move(params), std::move(rule), std::move(m), std::move(r));
}

/// xi = ln K / (J*beta): the Hamiltonian interaction realizing a kernel.
template <typename Scalar>
XiGrid<Scalar> kernel_to_xi(const Kernel<Scalar>& kernel, double J, double beta) {
  detail::check_coupling(J, beta);
  if (!(kernel.node_min() > Scalar(0))) throw std::domain_error("kernel_to_xi needs a strictly positive kernel");
  const Scalar jb = Scalar(J) * Scalar(beta);
  return {(kernel.matrix().array().log() / jb).matrix(), (kernel.origin_row().array().log() / jb).matrix()};
}

// ---------------------------------------------------------------------------
// k = 2 family: rational kernel in n-th roots of (u - 1/2).

template <typename Scalar>
struct K2Constants {
  Scalar b;   // (4^(-1/n))^(n-1) (1 + 2/n)
  Scalar c;   // cube root of c3
  Scalar c3;  // (1/2) int_{-1/2}^{1/2} du / (2 + root_n(u))^2
};

template <typename Scalar>
K2Constants<Scalar> k2_constants(int n) {
  using std::cbrt;
  using std::pow;
  if (n < 1) throw std::invalid_argument("k2 family needs n >= 1");
  K2Constants<Scalar> out;
  out.b = pow(pow(Scalar(4), -Scalar(1) / Scalar(n)), Scalar(n - 1)) * (1 + Scalar(2) / Scalar(n));
  // Split at the cusp u = 0; on each half substitute s = |u|^(1/n), so
  // du = n s^(n-1) ds and the integrand becomes smooth in s.
  const Scalar top = pow(Scalar(0.5), Scalar(1) / Scalar(n));
  auto [s, w] = detail::gauss_legendre<Scalar>(200, Scalar(0), top);
  Scalar integral = 0;
  for (Index i = 0; i < s.size(); ++i) {
    const Scalar jac = Scalar(n) * pow(s(i), Scalar(n - 1));
    integral += w(i) * jac * (1 / ((2 + s(i)) * (2 + s(i))) + 1 / ((2 - s(i)) * (2 - s(i))));
  }
  out.c3 = integral / 2;
  out.c = cbrt(out.c3);
  return out;
}

template <typename Scalar>
Kernel<Scalar> build_k2_kernel(RulePtr<Scalar> rule, int n, Index scan_points = 1001) {
  const auto kc = k2_constants<Scalar>(n);
  KernelParams params;
  params.n = n;
  params.k = 2;
  auto eval = [kc, n](Scalar t, Scalar u) {
    const Scalar rt = signed_root(t - Scalar(0.5), n);
    const Scalar ru = signed_root(u - Scalar(0.5), n);
    // root_n((u-1/2)^2) equals ru^2 under the signed-root convention
    const Scalar bracket = ru * ru - 4;
    const Scalar num = 1 - kc.b * kc.c3 * ru * bracket * bracket * rt;
    const Scalar den = kc.c * kc.c * (ru + 2) * (ru + 2);
    return num / den;
  };
  return Kernel<Scalar>(KernelFamily::k2_family, std::move(params), std::move(rule), eval, scan_points);
}

// ---------------------------------------------------------------------------
// k = 3 family: trigonometric kernel.

/// a = (198 sqrt(3) / (5 pi))^(1/4).
template <typename Scalar>
Scalar k3_amplitude() {
  using std::pow;
  using std::sqrt;
  return pow(Scalar(198) * sqrt(Scalar(3)) / (Scalar(5) * std::numbers::pi_v<Scalar>), Scalar(0.25));
}

/// sin(pi(2x-1)/3), the profile shared by the k = 3 kernel and its solution.
template <typename Scalar>
Scalar k3_profile(Scalar x) {
  using std::sin;
  return sin(std::numbers::pi_v<Scalar> * (2 * x - 1) / 3);
}

template <typename Scalar>
Kernel<Scalar> build_k3_kernel(RulePtr<Scalar> rule, Index scan_points = 1001) {
  const Scalar a = k3_amplitude<Scalar>();
  const Scalar a3 = a * a * a;
  KernelParams params;
  params.k = 3;
  auto eval = [a3](Scalar t, Scalar u) {
    const Scalar st = k3_profile(t);
    const Scalar su = k3_profile(u);
    const Scalar one_su = 1 + su;
    return (1 - Scalar(22) / Scalar(17) * st * su) / (a3 * one_su * one_su * one_su);
  };
  return Kernel<Scalar>(KernelFamily::k3_family, std::move(params), std::move(rule), eval, scan_points);
}

// ---------------------------------------------------------------------------
// k >= 4 family.

/// c_k as an exact rational.
Rational ck_exact(int k);

/// c_k; exact rational converted for k <= 64, floating formula beyond.
template <typename Scalar>
Scalar ck(int k) {
  using std::pow;
  if (k < 4) throw std::invalid_argument("c_k is defined for k >= 4");
  if (k <= 64) return ck_exact(k).template convert_to<Scalar>();
  const Scalar third = Scalar(1) / Scalar(3);
  const Scalar p1 = 1 - pow(third, Scalar(k - 1));
  const Scalar p2 = 1 - pow(third, Scalar(k - 2));
  return 2 * p1 / (Scalar(k - 1) / Scalar(k - 2) * p2 - 2 * p1);
}

/// a(k) = ((2^(k-1)/(k-1)) (1 - 3^(1-k)))^(1/(k+1)), computed in logs.
template <typename Scalar>
Scalar k_ge4_amplitude(int k) {
  using std::exp;
  using std::log;
  using std::log1p;
  using std::pow;
  if (k < 4) throw std::invalid_argument("k >= 4 family needs k >= 4");
  const Scalar lg = Scalar(k - 1) * log(Scalar(2)) - log(Scalar(k - 1)) +
                    log1p(-pow(Scalar(3), -Scalar(k - 1)));
  return exp(lg / Scalar(k + 1));
}

template <typename Scalar>
Kernel<Scalar> build_k_ge4_kernel(RulePtr<Scalar> rule, int k, Index scan_points = 1001) {
  const Scalar c = ck<Scalar>(k);
  const Scalar a = k_ge4_amplitude<Scalar>(k);
  KernelParams params;
  params.k = k;
  auto eval = [c, a, k](Scalar t, Scalar u) {
    using std::pow;
    return (1 + c * (t - Scalar(0.5)) * (u - Scalar(0.5))) / pow(a * (u + Scalar(0.5)), Scalar(k));
  };
  return Kernel<Scalar>(KernelFamily::k_ge4_family, std::move(params), std::move(rule), eval, scan_points);
}

// ---------------------------------------------------------------------------
// Four-cycle family: moment-matched polynomial system.

/// Which right-hand sides the two odd polynomials psi3, psi4 are solved for.
enum class OddTargets {
  as_printed,  // psi3: (int u^3, int u^5) = (1, 0), psi4: (0, 1)
  swapped      // psi3: (0, 1), psi4: (1, 0)
};

std::string_view to_string(OddTargets t);

/// One moment int_{-1/2}^{1/2} psi_i(u) u^p du.
struct MomentCheck {
  int psi = 0;    // 1..4
  int power = 0;
  Rational target;
  Rational exact;            // from the exact coefficients
  double quadrature = 0.0;   // 64-node Gauss on [-1/2,1/2]
  std::optional<Rational> printed_lemma;  // value the product-moment lemma prints, where it states one
};

/// psi_1 .. psi_4 on [-1/2,1/2]:
///   psi1 = a11 + a12 u^2 + a13 u^4     psi2 = a21 u^2 + a22 u^4 + a23 u^6
///   psi3 = b11 u + b12 u^3             psi4 = b21 u^3 + b22 u^5
/// with coefficients solving A_n^(m,p) x = rhs, where
/// A_n^(m,p)_ij = c_ij(m) / 4^(p+i+j-2), c_ij(m) = 1/(m + 2(i-1) + 2(j-1)).
struct MomentSystem {
  std::array<RationalMatrix, 4> matrices;       // A_3^(1,0), A_3^(3,1), A_2^(5,2), A_2^(7,3)
  std::array<RationalVector, 4> rhs;
  std::array<RationalVector, 4> coefficients;  // (a1j), (a2j), (b1j), (b2j)
  std::array<std::vector<long double>, 4> coefficients_ld;
  OddTargets odd_targets = OddTargets::swapped;
  std::vector<MomentCheck> moments;

  /// Lowest power of u in psi_i; successive terms step by 2.
  static constexpr std::array<int, 4> lowest_power{0, 2, 1, 3};

  template <typename Scalar>
  Scalar psi(int i, Scalar u) const {
    const auto& c = coefficients_ld.at(static_cast<std::size_t>(i - 1));
    Scalar u2 = u * u;
    Scalar term = 1;
    for (int p = 0; p < lowest_power[static_cast<std::size_t>(i - 1)]; ++p) term *= u;
    Scalar acc = 0;
    for (long double coef : c) {
      acc += Scalar(coef) * term;
      term *= u2;
    }
    return acc;
  }
};

/// A_n^(m,p) with exact entries.
RationalMatrix moment_matrix(int n, int m, int p);

/// Solves the four systems exactly. The odd right-hand sides are the ones
/// under which ((t-1/2)^3+1)^(1/k) and ((t-1/2)^5+1)^(1/k) form a 2-cycle of
/// the Hammerstein operator, decided by a quadrature check of both options.
/// Throws std::domain_error on a singular matrix or when neither option
/// produces the 2-cycle.
MomentSystem solve_moment_system();

/// Same, with the odd right-hand sides forced.
MomentSystem solve_moment_system(OddTargets odd_targets);

/// Profiles paired with psi_1..psi_4, as functions of s = t - 1/2:
/// 20 s^4 + 3/4, 6 s^2 + 1/2, s^3 + 1, s^5 + 1.
template <typename Scalar>
std::array<Scalar, 4> four_cycle_profiles(Scalar s) {
  const Scalar s2 = s * s;
  return {20 * s2 * s2 + Scalar(0.75), 6 * s2 + Scalar(0.5), s2 * s + 1, s2 * s2 * s + 1};
}

/// x^(1/k) - 1 without cancellation for large k.
template <typename Scalar>
Scalar root_minus_one(Scalar x, int k) {
  using std::expm1;
  using std::log;
  return expm1(log(x) / Scalar(k));
}

/// K~(t - 1/2, u - 1/2; k) = 1 + K1 + K2 on [0,1]^2.
template <typename Scalar>
Scalar four_cycle_value(const MomentSystem& ms, int k, Scalar t, Scalar u) {
  const Scalar s = t - Scalar(0.5);
  const Scalar v = u - Scalar(0.5);
  const auto prof = four_cycle_profiles(s);
  Scalar acc = 1;
  for (int i = 0; i < 4; ++i) acc += ms.psi(i + 1, v) * root_minus_one(prof[static_cast<std::size_t>(i)], k);
  return acc;
}

template <typename Scalar>
Kernel<Scalar> build_four_cycle_kernel(RulePtr<Scalar> rule, int k, const MomentSystem& ms,
                                       Index scan_points = 1001) {
  if (k < 2) throw std::invalid_argument("four-cycle family needs k >= 2");
  KernelParams params;
  params.k = k;
  auto eval = [ms, k](Scalar t, Scalar u) { return four_cycle_value(ms, k, t, u); };
  return Kernel<Scalar>(KernelFamily::four_cycle_family, std::move(params), std::move(rule), eval,
                        scan_points);
}

/// Minimum of K~ over the points x points scan grid, evaluated as a rank-4
/// product of profile and psi tables.
double four_cycle_scan_min(const MomentSystem& ms, int k, Index points = 1001);

struct K0Search {
  std::optional<int> k0;
  double min_at_k0 = 0.0;               // scan minimum at k0
  std::optional<double> min_before_k0;  // scan minimum at k0 - 1 when k0 - 1 >= 2
};

/// Smallest k in [2, k_max] whose scan minimum of K~ is positive.
K0Search find_k0(const MomentSystem& ms, int k_max, Index points = 1001);

}  // namespace perigibbs

#endif  // PERIGIBBS_KERNELS_HPP
