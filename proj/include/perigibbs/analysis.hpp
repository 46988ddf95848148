#ifndef PERIGIBBS_ANALYSIS_HPP
#define PERIGIBBS_ANALYSIS_HPP

// Quantitative conditions on a kernel and structural checks on solutions:
// kernel extremes M and m, the sufficient non-existence condition
// (M/m)^k - (m/M)^k < 1/k, the a priori band P_k, sign changes of f - g and
// the shifted-norm inequality ||phi - a|| >= ||phi|| / 2.

#include "perigibbs/grid.hpp"
#include "perigibbs/kernels.hpp"
#include "perigibbs/operators.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace perigibbs {

enum class ExtremesSource { dense_scan, nodes };

inline std::string_view to_string(ExtremesSource s) {
  return s == ExtremesSource::dense_scan ? "dense_scan" : "nodes";
}

template <typename Scalar>
struct Extremes {
  Scalar M = 0;
  Scalar m = 0;
  ExtremesSource source = ExtremesSource::dense_scan;
  Index scan_points = 0;
};

/// Extremes over the dense scan grid when the kernel can be evaluated off the
/// nodes, otherwise over the node matrix and the t = 0 row.
template <typename Scalar>
Extremes<Scalar> extremes(const Kernel<Scalar>& kernel, Index scan_points = 1001) {
  Extremes<Scalar> out;
  if (kernel.scan() && kernel.scan()->points == scan_points) {
    out.M = kernel.scan()->max;
    out.m = kernel.scan()->min;
    out.scan_points = scan_points;
  } else if (kernel.has_evaluator()) {
    const Vector<Scalar> g = scan_grid<Scalar>(scan_points);
    out.M = -std::numeric_limits<Scalar>::infinity();
    out.m = std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < g.size(); ++i) {
      for (Index j = 0; j < g.size(); ++j) {
        const Scalar v = kernel(g(i), g(j));
        out.M = std::max(out.M, v);
        out.m = std::min(out.m, v);
      }
    }
    out.scan_points = scan_points;
  } else {
    out.M = kernel.node_max();
    out.m = kernel.node_min();
    out.source = ExtremesSource::nodes;
  }
  if (!(out.m > Scalar(0))) throw std::domain_error("kernel is not positive: minimum " + std::to_string(double(out.m)));
  return out;
}

enum class Verdict { no_period2_guaranteed, inconclusive };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::no_period2_guaranteed ? "no_period2_guaranteed" : "inconclusive";
}

template <typename Scalar>
struct KernelReport {
  KernelFamily family = KernelFamily::generic_xi;
  int k = 2;
  Extremes<Scalar> ext;
  Scalar ratio = 1;           // M/m
  Scalar uniqueness_lhs = 0;  // (M/m)^k - (m/M)^k
  Scalar threshold = 0;       // 1/k
  Verdict verdict = Verdict::inconclusive;
};

template <typename Scalar>
KernelReport<Scalar> uniqueness_condition(const Kernel<Scalar>& kernel, int k, Index scan_points = 1001) {
  using std::pow;
  if (k < 2) throw std::invalid_argument("uniqueness condition needs k >= 2");
  KernelReport<Scalar> r;
  r.family = kernel.family();
  r.k = k;
  r.ext = extremes(kernel, scan_points);
  r.ratio = r.ext.M / r.ext.m;
  r.uniqueness_lhs = pow(r.ratio, Scalar(k)) - pow(Scalar(1) / r.ratio, Scalar(k));
  r.threshold = Scalar(1) / Scalar(k);
  r.verdict = r.uniqueness_lhs < r.threshold ? Verdict::no_period2_guaranteed : Verdict::inconclusive;
  return r;
}

template <typename Scalar>
struct BandCheck {
  Scalar lower = 0;  // (m/M) (1/M)^(1/(k-1))
  Scalar upper = 0;  // (M/m) (1/m)^(1/(k-1))
  bool pass = false;
  Scalar observed_min = 0;
  Scalar observed_max = 0;
};

template <typename Scalar>
BandCheck<Scalar> pk_band(const Extremes<Scalar>& ext, int k, const GridFunction<Scalar>& f,
                          Scalar slack = Scalar(1e-9)) {
  using std::pow;
  if (k < 2) throw std::invalid_argument("P_k band needs k >= 2");
  BandCheck<Scalar> b;
  const Scalar e = Scalar(1) / Scalar(k - 1);
  b.lower = ext.m / ext.M * pow(Scalar(1) / ext.M, e);
  b.upper = ext.M / ext.m * pow(Scalar(1) / ext.m, e);
  b.observed_min = f.values().minCoeff();
  b.observed_max = f.values().maxCoeff();
  b.pass = b.observed_min >= b.lower - slack && b.observed_max <= b.upper + slack;
  return b;
}

template <typename Scalar>
BandCheck<Scalar> pk_band(const Kernel<Scalar>& kernel, int k, const GridFunction<Scalar>& f) {
  return pk_band(extremes(kernel), k, f);
}

/// f - g takes both signs on the nodes.
template <typename Scalar>
bool sign_change(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  require_same_rule(f, g);
  const auto d = (f.values() - g.values()).array();
  return (d > Scalar(0)).any() && (d < Scalar(0)).any();
}

/// ||phi - a|| >= ||phi|| / 2 for every sampled shift a. phi must change sign.
template <typename Scalar>
bool shift_norm_check(const GridFunction<Scalar>& phi, std::span<const Scalar> shifts) {
  const auto v = phi.values().array();
  if (!((v > Scalar(0)).any() && (v < Scalar(0)).any())) {
    throw std::invalid_argument("shift_norm_check: phi does not change sign");
  }
  const Scalar half_norm = sup_norm(phi) / 2;
  for (Scalar a : shifts) {
    if ((v - a).abs().maxCoeff() < half_norm) return false;
  }
  return true;
}

/// K(x_i, u_j) for the scan points x_i and the rule's nodes u_j.
template <typename Scalar>
Matrix<Scalar> dense_rows(const Kernel<Scalar>& kernel, Index points = 1001) {
  const Vector<Scalar> x = scan_grid<Scalar>(points);
  Matrix<Scalar> rows(points, kernel.rule()->size());
  for (Index i = 0; i < points; ++i) rows.row(i) = kernel.row(x(i)).transpose();
  return rows;
}

/// M min(phi) >= m max(phi) for phi = H_k f sampled through precomputed dense rows.
template <typename Scalar>
bool in_range_cone(const Matrix<Scalar>& rows, const Kernel<Scalar>& kernel, const Extremes<Scalar>& ext,
                   const GridFunction<Scalar>& f, int k, Scalar rel_slack = Scalar(1e-12)) {
  detail::require_kernel_rule(kernel, f);
  const Vector<Scalar> wf = kernel.rule()->weights().cwiseProduct(f.values().array().pow(Scalar(k)).matrix());
  const Vector<Scalar> phi = rows * wf;
  return ext.M * phi.minCoeff() >= ext.m * phi.maxCoeff() * (1 - rel_slack);
}

/// M min(phi) >= m max(phi) for phi = H_k f sampled on the scan grid.
template <typename Scalar>
bool in_range_cone(const Kernel<Scalar>& kernel, const Extremes<Scalar>& ext, const GridFunction<Scalar>& f,
                   int k, Index points = 1001, Scalar rel_slack = Scalar(1e-12)) {
  return in_range_cone(dense_rows(kernel, points), kernel, ext, f, k, rel_slack);
}

}  // namespace perigibbs

#endif  // PERIGIBBS_ANALYSIS_HPP
