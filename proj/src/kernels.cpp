#include "perigibbs/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace perigibbs {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::generic_xi: return "generic_xi";
    case KernelFamily::k2_family: return "k2_family";
    case KernelFamily::k3_family: return "k3_family";
    case KernelFamily::k_ge4_family: return "k_ge4_family";
    case KernelFamily::four_cycle_family: return "four_cycle_family";
    case KernelFamily::file: return "file";
  }
  return "unknown";
}

std::optional<KernelFamily> parse_family(std::string_view name) {
  for (auto f : {KernelFamily::generic_xi, KernelFamily::k2_family, KernelFamily::k3_family,
                 KernelFamily::k_ge4_family, KernelFamily::four_cycle_family, KernelFamily::file}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

std::string_view to_string(OddTargets t) {
  return t == OddTargets::as_printed ? "as_printed" : "swapped";
}

Rational ck_exact(int k) {
  if (k < 4) throw std::invalid_argument("c_k is defined for k >= 4");
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::pow;
  const Rational third_km1(cpp_int(1), pow(cpp_int(3), static_cast<unsigned>(k - 1)));
  const Rational third_km2(cpp_int(1), pow(cpp_int(3), static_cast<unsigned>(k - 2)));
  const Rational p1 = 1 - third_km1;
  const Rational p2 = 1 - third_km2;
  const Rational den = Rational(k - 1, k - 2) * p2 - 2 * p1;
  return 2 * p1 / den;
}

RationalMatrix moment_matrix(int n, int m, int p) {
  RationalMatrix a(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      using boost::multiprecision::cpp_int;
      const cpp_int scale = boost::multiprecision::pow(cpp_int(4), static_cast<unsigned>(p + i + j - 2));
      a(i - 1, j - 1) = Rational(cpp_int(1), cpp_int(m + 2 * (i - 1) + 2 * (j - 1)) * scale);
    }
  }
  return a;
}

namespace {

// int_{-1/2}^{1/2} u^p du
Rational centered_monomial_integral(int p) {
  if (p % 2 != 0) return Rational(0);
  using boost::multiprecision::cpp_int;
  return Rational(cpp_int(1), boost::multiprecision::pow(cpp_int(4), static_cast<unsigned>(p / 2)) * (p + 1));
}

RationalVector make_rhs(std::initializer_list<Rational> values) {
  RationalVector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const auto& x : values) v(i++) = x;
  return v;
}

// Residual of the odd 2-cycle ((s^3+1)^(1/k), (s^5+1)^(1/k)) under K~ at
// k = 3. The u-integrands are polynomials of degree <= 11, so a 64-node
// Gauss rule integrates them exactly.
double odd_cycle_residual(const MomentSystem& ms) {
  constexpr int k = 3;
  auto [u, w] = detail::gauss_legendre<double>(64, 0.0, 1.0);
  double worst = 0.0;
  for (int it = 0; it <= 8; ++it) {
    const double t = it / 8.0;
    double h1 = 0.0, h2 = 0.0;
    for (Index j = 0; j < u.size(); ++j) {
      const double v = u(j) - 0.5;
      const double kv = four_cycle_value(ms, k, t, u(j));
      h1 += w(j) * kv * (v * v * v + 1);
      h2 += w(j) * kv * (v * v * v * v * v + 1);
    }
    const double s = t - 0.5;
    const double g1 = std::cbrt(s * s * s + 1);
    const double g2 = std::cbrt(s * s * s * s * s + 1);
    worst = std::max({worst, std::abs(h1 - g2), std::abs(h2 - g1)});
  }
  return worst;
}

}  // namespace

MomentSystem solve_moment_system(OddTargets odd_targets) {
  MomentSystem ms;
  ms.odd_targets = odd_targets;
  ms.matrices = {moment_matrix(3, 1, 0), moment_matrix(3, 3, 1), moment_matrix(2, 5, 2),
                 moment_matrix(2, 7, 3)};
  const Rational zero(0), one(1);
  const RationalVector odd_first = make_rhs({one, zero});
  const RationalVector odd_second = make_rhs({zero, one});
  ms.rhs = {make_rhs({zero, Rational(1, 6), zero}), make_rhs({zero, zero, Rational(1, 20)}),
            odd_targets == OddTargets::as_printed ? odd_first : odd_second,
            odd_targets == OddTargets::as_printed ? odd_second : odd_first};

  for (std::size_t s = 0; s < 4; ++s) {
    if (determinant(ms.matrices[s]) == 0) throw std::domain_error("moment matrix is singular");
    ms.coefficients[s] = solve_partial_pivot(ms.matrices[s], ms.rhs[s]);
    ms.coefficients_ld[s].clear();
    for (Index i = 0; i < ms.coefficients[s].size(); ++i) {
      ms.coefficients_ld[s].push_back(ms.coefficients[s](i).convert_to<long double>());
    }
  }

  // Record every defining moment, exactly and by quadrature.
  auto [q, qw] = detail::gauss_legendre<double>(64, -0.5, 0.5);
  auto add = [&](int psi, int power, Rational target, std::optional<Rational> printed) {
    MomentCheck m;
    m.psi = psi;
    m.power = power;
    m.target = std::move(target);
    const auto& c = ms.coefficients[static_cast<std::size_t>(psi - 1)];
    const int low = MomentSystem::lowest_power[static_cast<std::size_t>(psi - 1)];
    Rational exact(0);
    for (Index j = 0; j < c.size(); ++j) exact += c(j) * centered_monomial_integral(low + 2 * int(j) + power);
    m.exact = exact;
    double quad = 0.0;
    for (Index j = 0; j < q.size(); ++j) quad += qw(j) * ms.psi(psi, q(j)) * std::pow(q(j), power);
    m.quadrature = quad;
    m.printed_lemma = std::move(printed);
    ms.moments.push_back(std::move(m));
  };
  const Rational sixth(1, 6);
  const auto& r = ms.rhs;
  add(1, 0, r[0](0), std::nullopt);
  add(1, 2, r[0](1), sixth);
  add(1, 4, r[0](2), zero);
  add(2, 0, r[1](0), std::nullopt);
  add(2, 2, r[1](1), zero);
  add(2, 4, r[1](2), sixth);
  add(3, 3, r[2](0), zero);
  add(3, 5, r[2](1), sixth);
  add(4, 3, r[3](0), sixth);
  add(4, 5, r[3](1), zero);
  return ms;
}

MomentSystem solve_moment_system() {
  constexpr double tol = 1e-10;
  MomentSystem swapped = solve_moment_system(OddTargets::swapped);
  MomentSystem printed = solve_moment_system(OddTargets::as_printed);
  const bool swapped_ok = odd_cycle_residual(swapped) < tol;
  const bool printed_ok = odd_cycle_residual(printed) < tol;
  if (swapped_ok == printed_ok) {
    throw std::domain_error("odd moment targets: expected exactly one assignment to give the 2-cycle");
  }
  return swapped_ok ? swapped : printed;
}

double four_cycle_scan_min(const MomentSystem& ms, int k, Index points) {
  if (k < 1) throw std::invalid_argument("four_cycle_scan_min needs k >= 1");
  const Vector<double> g = scan_grid<double>(points);
  Matrix<double> profiles(points, 4);  // rows: t, cols: profile i
  Matrix<double> psis(4, points);      // rows: psi i, cols: u
  for (Index j = 0; j < points; ++j) {
    const auto prof = four_cycle_profiles(g(j) - 0.5);
    for (int i = 0; i < 4; ++i) {
      profiles(j, i) = root_minus_one(prof[static_cast<std::size_t>(i)], k);
      psis(i, j) = ms.psi(i + 1, g(j) - 0.5);
    }
  }
  return 1.0 + (profiles * psis).minCoeff();
}

K0Search find_k0(const MomentSystem& ms, int k_max, Index points) {
  if (k_max < 2) throw std::invalid_argument("find_k0 needs k_max >= 2");
  K0Search out;
  std::optional<double> previous;
  for (int k = 2; k <= k_max; ++k) {
    const double m = four_cycle_scan_min(ms, k, points);
    if (m > 0.0) {
      out.k0 = k;
      out.min_at_k0 = m;
      out.min_before_k0 = previous;
      return out;
    }
    previous = m;
  }
  return out;
}

}  // namespace perigibbs
