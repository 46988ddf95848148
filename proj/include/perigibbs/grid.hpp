#ifndef PERIGIBBS_GRID_HPP
#define PERIGIBBS_GRID_HPP

// Quadrature rules on the spin space [0,1] and functions sampled on their
// nodes. Every integral in the library is a weighted sum over one of these
// rules (Nystrom discretization).

#include <Eigen/Dense>
#include <algorithm>

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace perigibbs {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Scheme { gauss_legendre, gauss_legendre_split, composite_simpson };

inline std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::gauss_legendre: return "gauss_legendre";
    case Scheme::gauss_legendre_split: return "gauss_legendre_split";
    case Scheme::composite_simpson: return "composite_simpson";
  }
  return "unknown";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "gauss_legendre" || name == "gauss") return Scheme::gauss_legendre;
  if (name == "gauss_legendre_split" || name == "split") return Scheme::gauss_legendre_split;
  if (name == "composite_simpson" || name == "simpson") return Scheme::composite_simpson;
  return std::nullopt;
}

template <typename Scalar>
class QuadratureRule {
 public:
  QuadratureRule(Vector<Scalar> nodes, Vector<Scalar> weights, Scheme scheme,
                 int exactness_degree)
      : nodes_(std::move(nodes)),
        weights_(std::move(weights)),
        scheme_(scheme),
        exactness_degree_(exactness_degree) {
    if (nodes_.size() != weights_.size()) {
      throw std::invalid_argument("quadrature rule: node/weight count mismatch");
    }
  }

  const Vector<Scalar>& nodes() const { return nodes_; }
  const Vector<Scalar>& weights() const { return weights_; }
  Scheme scheme() const { return scheme_; }
  Index size() const { return nodes_.size(); }
  /// Highest polynomial degree integrated exactly.
  int exactness_degree() const { return exactness_degree_; }

 private:
  Vector<Scalar> nodes_;
  Vector<Scalar> weights_;
  Scheme scheme_;
  int exactness_degree_;
};

template <typename Scalar>
using RulePtr = std::shared_ptr<const QuadratureRule<Scalar>>;

namespace detail {

// Gauss-Legendre nodes and weights on [a,b] by Newton iteration on P_n.
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> gauss_legendre(Index n, Scalar a, Scalar b) {
  using std::abs;
  using std::cos;
  Vector<Scalar> x(n), w(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar eps = Scalar(4) * std::numeric_limits<Scalar>::epsilon();
  const Scalar mid = (a + b) / 2;
  const Scalar half = (b - a) / 2;
  const Index m = (n + 1) / 2;
  for (Index i = 0; i < m; ++i) {
    Scalar z = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p1 = 1, p2 = 0;
      for (Index j = 1; j <= n; ++j) {
        const Scalar p3 = p2;
        p2 = p1;
        p1 = ((Scalar(2 * j) - 1) * z * p2 - Scalar(j - 1) * p3) / Scalar(j);
      }
      dp = Scalar(n) * (z * p1 - p2) / (z * z - 1);
      const Scalar step = p1 / dp;
      z -= step;
      if (abs(step) <= eps) break;
    }
    // refresh the derivative at the converged root
    Scalar p1 = 1, p2 = 0;
    for (Index j = 1; j <= n; ++j) {
      const Scalar p3 = p2;
      p2 = p1;
      p1 = ((Scalar(2 * j) - 1) * z * p2 - Scalar(j - 1) * p3) / Scalar(j);
    }
    dp = Scalar(n) * (z * p1 - p2) / (z * z - 1);
    const Scalar wi = Scalar(2) / ((1 - z * z) * dp * dp);
    x(i) = mid - half * z;
    x(n - 1 - i) = mid + half * z;
    w(i) = half * wi;
    w(n - 1 - i) = half * wi;
  }
  if (n % 2 == 1) x(m - 1) = mid;
  return {std::move(x), std::move(w)};
}

}  // namespace detail

/// Builds a rule on [0,1] whose weights sum to one.
///
/// gauss_legendre needs node_count >= 2, gauss_legendre_split an even
/// node_count >= 2 (two panels meeting at 1/2), composite_simpson an odd
/// node_count >= 3.
template <typename Scalar = double>
RulePtr<Scalar> build_rule(Index node_count, Scheme scheme = Scheme::gauss_legendre) {
  switch (scheme) {
    case Scheme::gauss_legendre: {
      if (node_count < 2) throw std::invalid_argument("gauss_legendre rule needs at least 2 nodes");
      auto [x, w] = detail::gauss_legendre<Scalar>(node_count, Scalar(0), Scalar(1));
      return std::make_shared<const QuadratureRule<Scalar>>(std::move(x), std::move(w), scheme,
                                                            int(2 * node_count - 1));
    }
    case Scheme::gauss_legendre_split: {
      if (node_count < 2 || node_count % 2 != 0) {
        throw std::invalid_argument("gauss_legendre_split rule needs an even node count >= 2");
      }
      const Index half = node_count / 2;
      auto [xl, wl] = detail::gauss_legendre<Scalar>(half, Scalar(0), Scalar(0.5));
      auto [xr, wr] = detail::gauss_legendre<Scalar>(half, Scalar(0.5), Scalar(1));
      Vector<Scalar> x(node_count), w(node_count);
      x << xl, xr;
      w << wl, wr;
      return std::make_shared<const QuadratureRule<Scalar>>(std::move(x), std::move(w), scheme,
                                                            int(2 * half - 1));
    }
    case Scheme::composite_simpson: {
      if (node_count < 3 || node_count % 2 == 0) {
        throw std::invalid_argument("composite_simpson rule needs an odd node count >= 3");
      }
      const Scalar h = Scalar(1) / Scalar(node_count - 1);
      Vector<Scalar> x(node_count), w(node_count);
      for (Index i = 0; i < node_count; ++i) {
        x(i) = h * Scalar(i);
        const bool end = (i == 0 || i == node_count - 1);
        w(i) = h / 3 * (end ? Scalar(1) : (i % 2 == 1 ? Scalar(4) : Scalar(2)));
      }
      x(node_count - 1) = 1;
      return std::make_shared<const QuadratureRule<Scalar>>(std::move(x), std::move(w), scheme, 3);
    }
  }
  throw std::invalid_argument("unknown quadrature scheme");
}

/// Equispaced points on [0,1] including both endpoints; used for positivity
/// scans and kernel extremes, since Gauss nodes miss the endpoints.
template <typename Scalar = double>
Vector<Scalar> scan_grid(Index points = 1001) {
  if (points < 2) throw std::invalid_argument("scan grid needs at least 2 points");
  return Vector<Scalar>::LinSpaced(points, Scalar(0), Scalar(1));
}

/// sign(x)|x|^(1/n) for every n, so odd roots of negative numbers come out
/// real and even n continue the same way.
template <typename Scalar>
Scalar signed_root(Scalar x, int n) {
  using std::abs;
  using std::pow;
  if (n <= 0) throw std::invalid_argument("signed_root: n must be positive");
  if (x == Scalar(0)) return Scalar(0);
  if (n == 1) return x;
  const Scalar r = pow(abs(x), Scalar(1) / Scalar(n));
  return x < 0 ? -r : r;
}

/// Values of a function at the nodes of a rule. The optional origin value is
/// f(0): the boundary-law normalization happens at t = 0, which no Gauss
/// node hits, so functions built from kernels carry it along explicitly.
template <typename Scalar>
class GridFunction {
 public:
  GridFunction(RulePtr<Scalar> rule, Vector<Scalar> values,
               std::optional<Scalar> origin = std::nullopt, std::string tag = {})
      : rule_(std::move(rule)), values_(std::move(values)), origin_(origin), tag_(std::move(tag)) {
    if (!rule_) throw std::invalid_argument("grid function without a rule");
    if (values_.size() != rule_->size()) {
      throw std::invalid_argument("grid function: value count differs from node count");
    }
  }

  template <typename Fn>
  static GridFunction sample(RulePtr<Scalar> rule, Fn&& fn, std::string tag = {}) {
    Vector<Scalar> v(rule->size());
    for (Index i = 0; i < v.size(); ++i) v(i) = fn(rule->nodes()(i));
    const Scalar at_zero = fn(Scalar(0));
    return GridFunction(std::move(rule), std::move(v), at_zero, std::move(tag));
  }

  static GridFunction constant(RulePtr<Scalar> rule, Scalar c, std::string tag = {}) {
    const Index n = rule->size();
    return GridFunction(std::move(rule), Vector<Scalar>::Constant(n, c), c, std::move(tag));
  }

  const RulePtr<Scalar>& rule() const { return rule_; }
  const Vector<Scalar>& values() const { return values_; }
  const std::optional<Scalar>& origin() const { return origin_; }
  const std::string& tag() const { return tag_; }
  Index size() const { return values_.size(); }
  Scalar operator[](Index i) const { return values_(i); }

  bool positive() const {
    return (values_.array() > Scalar(0)).all() && (!origin_ || *origin_ > Scalar(0));
  }

  GridFunction with_tag(std::string tag) const {
    return GridFunction(rule_, values_, origin_, std::move(tag));
  }

 private:
  RulePtr<Scalar> rule_;
  Vector<Scalar> values_;
  std::optional<Scalar> origin_;
  std::string tag_;
};

template <typename Scalar>
bool same_rule(const QuadratureRule<Scalar>& a, const QuadratureRule<Scalar>& b) {
  return &a == &b || (a.size() == b.size() && a.nodes() == b.nodes() && a.weights() == b.weights());
}

template <typename Scalar>
void require_same_rule(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  if (!same_rule(*f.rule(), *g.rule())) {
    throw std::invalid_argument("grid functions live on different quadrature rules");
  }
}

template <typename Scalar>
Scalar integrate(const GridFunction<Scalar>& f) {
  return f.rule()->weights().dot(f.values());
}

template <typename Scalar>
Scalar sup_norm(const GridFunction<Scalar>& f) {
  return f.values().cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar sup_distance(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  require_same_rule(f, g);
  return (f.values() - g.values()).cwiseAbs().maxCoeff();
}

/// Pointwise power; the origin value follows.
template <typename Scalar>
GridFunction<Scalar> pow(const GridFunction<Scalar>& f, Scalar p) {
  using std::pow;
  std::optional<Scalar> origin;
  if (f.origin()) origin = pow(*f.origin(), p);
  return GridFunction<Scalar>(f.rule(), f.values().array().pow(p).matrix(), origin);
}

template <typename Scalar>
GridFunction<Scalar> scaled(const GridFunction<Scalar>& f, Scalar c) {
  std::optional<Scalar> origin;
  if (f.origin()) origin = *f.origin() * c;
  return GridFunction<Scalar>(f.rule(), f.values() * c, origin, f.tag());
}

template <typename Scalar>
GridFunction<Scalar> difference(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  require_same_rule(f, g);
  std::optional<Scalar> origin;
  if (f.origin() && g.origin()) origin = *f.origin() - *g.origin();
  return GridFunction<Scalar>(f.rule(), f.values() - g.values(), origin);
}

}  // namespace perigibbs

#endif  // PERIGIBBS_GRID_HPP
