#ifndef PERIGIBBS_OPERATORS_HPP
#define PERIGIBBS_OPERATORS_HPP

// Integral operators of the period-2 boundary-law system on a Nystrom grid:
//   (W f)(t)   = int K(t,u) f(u) du
//   omega(f)   = (W f)(0)
//   (A_k f)(t) = ((W f)(t) / (W f)(0))^k
//   (H_k f)(t) = int K(t,u) f(u)^k du
// and the maps between the three equivalent forms of a 2-cycle.

#include "perigibbs/grid.hpp"
#include "perigibbs/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string_view>
#include <utility>

namespace perigibbs {

enum class PairForm {
  a_form,               // A_k f = g, A_k g = f
  hammerstein_lambda,   // H_k f = l1 g, H_k g = l2 f, f(0) = g(0) = 1
  hammerstein           // H_k f = g, H_k g = f
};

inline std::string_view to_string(PairForm form) {
  switch (form) {
    case PairForm::a_form: return "a_form";
    case PairForm::hammerstein_lambda: return "hammerstein_lambda";
    case PairForm::hammerstein: return "hammerstein";
  }
  return "unknown";
}

template <typename Scalar>
struct CyclePair {
  GridFunction<Scalar> f;
  GridFunction<Scalar> g;
  int k = 1;
  PairForm form = PairForm::hammerstein;
  Scalar lambda1 = 1;  // meaningful for hammerstein_lambda only
  Scalar lambda2 = 1;
  Scalar residual_f = 0;  // sup |first equation|
  Scalar residual_g = 0;  // sup |second equation|

  Scalar residual() const { return std::max(residual_f, residual_g); }
  CyclePair swapped() const {
    CyclePair s = *this;
    std::swap(s.f, s.g);
    std::swap(s.lambda1, s.lambda2);
    std::swap(s.residual_f, s.residual_g);
    return s;
  }
};

namespace detail {
template <typename Scalar>
void require_kernel_rule(const Kernel<Scalar>& kernel, const GridFunction<Scalar>& f) {
  if (!same_rule(*kernel.rule(), *f.rule())) {
    throw std::invalid_argument("grid function and kernel use different quadrature rules");
  }
}
}  // namespace detail

template <typename Scalar>
GridFunction<Scalar> apply_W(const Kernel<Scalar>& kernel, const GridFunction<Scalar>& f) {
  detail::require_kernel_rule(kernel, f);
  const Vector<Scalar> wf = kernel.rule()->weights().cwiseProduct(f.values());
  return GridFunction<Scalar>(f.rule(), kernel.matrix() * wf, kernel.origin_row().dot(wf));
}

template <typename Scalar>
Scalar omega(const Kernel<Scalar>& kernel, const GridFunction<Scalar>& f) {
  detail::require_kernel_rule(kernel, f);
  return kernel.origin_row().dot(kernel.rule()->weights().cwiseProduct(f.values()));
}

/// Result is 1 at t = 0 by construction.
template <typename Scalar>
GridFunction<Scalar> apply_A(const Kernel<Scalar>& kernel, const GridFunction<Scalar>& f, int k) {
  if (k < 1) throw std::invalid_argument("apply_A: k must be positive");
  const GridFunction<Scalar> wf = apply_W(kernel, f);
  const Scalar norm = *wf.origin();
  if (!(norm > Scalar(0))) throw std::domain_error("apply_A: omega(f) is not positive");
  Vector<Scalar> v = (wf.values() / norm).array().pow(Scalar(k)).matrix();
  return GridFunction<Scalar>(f.rule(), std::move(v), Scalar(1));
}

template <typename Scalar>
GridFunction<Scalar> apply_H(const Kernel<Scalar>& kernel, const GridFunction<Scalar>& f, int k) {
  if (k < 1) throw std::invalid_argument("apply_H: k must be positive");
  detail::require_kernel_rule(kernel, f);
  const Vector<Scalar> fk = f.values().array().pow(Scalar(k)).matrix();
  const Vector<Scalar> wf = kernel.rule()->weights().cwiseProduct(fk);
  return GridFunction<Scalar>(f.rule(), kernel.matrix() * wf, kernel.origin_row().dot(wf));
}

/// Nystrom interpolant of H_k f at arbitrary points (needs an evaluator).
template <typename Scalar>
Vector<Scalar> apply_H_at(const Kernel<Scalar>& kernel, const GridFunction<Scalar>& f, int k,
                          const Vector<Scalar>& points) {
  detail::require_kernel_rule(kernel, f);
  const Vector<Scalar> wf =
      kernel.rule()->weights().cwiseProduct(f.values().array().pow(Scalar(k)).matrix());
  Vector<Scalar> out(points.size());
  for (Index i = 0; i < points.size(); ++i) out(i) = kernel.row(points(i)).dot(wf);
  return out;
}

/// C1, C2 with l1 C2 = C1^k and l2 C1 = C2^k:
///   C1 = l1^(1/(k+1)) (l1 l2)^(1/(k^2-1)),  C2 = l2^(1/(k+1)) (l1 l2)^(1/(k^2-1)).
template <typename Scalar>
std::pair<Scalar, Scalar> rescale_constants(Scalar lambda1, Scalar lambda2, int k) {
  using std::pow;
  if (k < 2) throw std::invalid_argument("rescaling needs k >= 2");
  if (!(lambda1 > Scalar(0)) || !(lambda2 > Scalar(0))) {
    throw std::domain_error("rescaling needs positive lambdas");
  }
  const Scalar kk = Scalar(k);
  const Scalar common = pow(lambda1 * lambda2, Scalar(1) / (kk * kk - 1));
  return {pow(lambda1, Scalar(1) / (kk + 1)) * common, pow(lambda2, Scalar(1) / (kk + 1)) * common};
}

/// (f0, g0) in a_form -> (f0^(1/k), g0^(1/k)) with l1 = omega(f0), l2 = omega(g0).
template <typename Scalar>
CyclePair<Scalar> a_to_hammerstein(const Kernel<Scalar>& kernel, const CyclePair<Scalar>& pair) {
  if (pair.form != PairForm::a_form) throw std::invalid_argument("a_to_hammerstein expects an a_form pair");
  if (pair.k < 2) throw std::invalid_argument("a_to_hammerstein needs k >= 2");
  if (!pair.f.positive() || !pair.g.positive()) throw std::domain_error("a_to_hammerstein: pair is not positive");
  const Scalar inv = Scalar(1) / Scalar(pair.k);
  CyclePair<Scalar> out{perigibbs::pow(pair.f, inv), perigibbs::pow(pair.g, inv), pair.k,
                        PairForm::hammerstein_lambda};
  out.lambda1 = omega(kernel, pair.f);
  out.lambda2 = omega(kernel, pair.g);
  return out;
}

/// Inverse of a_to_hammerstein: the k-th power map back to a_form.
template <typename Scalar>
CyclePair<Scalar> hammerstein_to_a(const CyclePair<Scalar>& pair) {
  if (pair.form == PairForm::a_form) return pair;
  auto normalize = [&](const GridFunction<Scalar>& h) {
    if (!h.origin()) throw std::invalid_argument("hammerstein_to_a needs values at t = 0");
    return perigibbs::pow(scaled(h, Scalar(1) / *h.origin()), Scalar(pair.k));
  };
  return CyclePair<Scalar>{normalize(pair.f), normalize(pair.g), pair.k, PairForm::a_form};
}

/// (f/C1, g/C2): a solution of H f = l1 g, H g = l2 f becomes one of H f = g, H g = f.
template <typename Scalar>
CyclePair<Scalar> rescale_pair(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g,
                               Scalar lambda1, Scalar lambda2, int k) {
  const auto [c1, c2] = rescale_constants(lambda1, lambda2, k);
  return CyclePair<Scalar>{scaled(f, Scalar(1) / c1), scaled(g, Scalar(1) / c2), k, PairForm::hammerstein};
}

template <typename Scalar>
CyclePair<Scalar> rescale_pair(const CyclePair<Scalar>& pair) {
  if (pair.form != PairForm::hammerstein_lambda) {
    throw std::invalid_argument("rescale_pair expects a hammerstein_lambda pair");
  }
  return rescale_pair(pair.f, pair.g, pair.lambda1, pair.lambda2, pair.k);
}

/// Residuals of the pair in its own form, stored back into the pair.
/// a_form pairs with k >= 2 are measured after conversion to the plain
/// Hammerstein form; for k = 1 the A-equations themselves are measured.
template <typename Scalar>
std::pair<Scalar, Scalar> cycle_residual(const Kernel<Scalar>& kernel, CyclePair<Scalar>& pair) {
  require_same_rule(pair.f, pair.g);
  auto sup = [](const Vector<Scalar>& v) { return v.cwiseAbs().maxCoeff(); };
  Scalar r1 = 0, r2 = 0;
  switch (pair.form) {
    case PairForm::hammerstein: {
      r1 = sup(apply_H(kernel, pair.f, pair.k).values() - pair.g.values());
      r2 = sup(apply_H(kernel, pair.g, pair.k).values() - pair.f.values());
      break;
    }
    case PairForm::hammerstein_lambda: {
      r1 = sup(apply_H(kernel, pair.f, pair.k).values() - pair.lambda1 * pair.g.values());
      r2 = sup(apply_H(kernel, pair.g, pair.k).values() - pair.lambda2 * pair.f.values());
      break;
    }
    case PairForm::a_form: {
      if (pair.k == 1) {
        r1 = sup(apply_A(kernel, pair.f, 1).values() - pair.g.values());
        r2 = sup(apply_A(kernel, pair.g, 1).values() - pair.f.values());
      } else {
        auto plain = rescale_pair(a_to_hammerstein(kernel, pair));
        std::tie(r1, r2) = cycle_residual(kernel, plain);
      }
      break;
    }
  }
  pair.residual_f = r1;
  pair.residual_g = r2;
  return {r1, r2};
}

}  // namespace perigibbs

#endif  // PERIGIBBS_OPERATORS_HPP
