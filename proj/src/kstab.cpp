#include "conevol/kstab.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <type_traits>

#include "conevol/errors.hpp"
#include "conevol/ratgeom.hpp"

namespace conevol::kstab {

namespace {

template <class S>
S from_rational(const Rational& q) {
  if constexpr (std::is_same_v<S, double>) {
    return to_double(q);
  } else {
    return q;
  }
}

template <class S>
double to_plain(const S& x) {
  if constexpr (std::is_same_v<S, double>) {
    return x;
  } else {
    return to_double(x);
  }
}

template <class S>
std::vector<S> gauge_impl(const toric::ToricConeVariety& C, const std::vector<S>& xi,
                          const QVec& eta) {
  if (static_cast<int>(xi.size()) != C.n || static_cast<int>(eta.size()) != C.n)
    throw InvalidParams("gauge_fixed_eta: xi and eta must have the ambient dimension");
  const S A = toric::log_discrepancy(C, xi);
  const S Aeta = from_rational<S>(toric::log_discrepancy(C, eta));
  const S n = from_rational<S>(Rational(C.n));
  std::vector<S> T(C.n);
  for (int i = 0; i < C.n; ++i) T[i] = (A * from_rational<S>(eta[i]) - Aeta * xi[i]) / n;
  return T;
}

template <class S>
DFReport df_routes(const toric::ToricConeVariety& C, const std::vector<S>& xi, const QVec& eta,
                   double band) {
  const std::vector<S> T = gauge_impl<S>(C, xi, eta);
  const std::vector<S> g0 = toric::grad_a0(C, xi);
  const std::vector<S> g1 = toric::grad_a1(C, xi);
  const S A0 = toric::a0(C, xi);
  const S A1 = toric::a1(C, xi);
  S B0 = from_rational<S>(Rational(0));
  S B1 = B0;
  for (int i = 0; i < C.n; ++i) {
    B0 += g0[i] * T[i];
    B1 += g1[i] * T[i];
  }
  const S np1 = from_rational<S>(Rational(C.n + 1));
  const S nn = from_rational<S>(Rational(C.n));
  DFReport r;
  r.df_volume_route = to_plain<S>(-B0);
  r.df_ab_route = to_plain<S>(np1 * A1 * B0 - nn * A0 * B1);
  r.gauge_eta.resize(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) r.gauge_eta[i] = to_plain<S>(T[i]);
  if (r.df_volume_route > band)
    r.sign = 1;
  else if (r.df_volume_route < -band)
    r.sign = -1;
  else
    r.sign = 0;
  return r;
}

DHMeasure finalize_exact(const std::map<Rational, Rational>& acc, double cutoff) {
  DHMeasure mu;
  mu.cutoff = cutoff;
  mu.atoms.reserve(acc.size());
  for (const auto& [loc, mass] : acc) mu.atoms.push_back({to_double(loc), to_double(mass)});
  return mu;
}

DHMeasure finalize_float(std::vector<DHAtom>& raw, double cutoff) {
  std::sort(raw.begin(), raw.end(),
            [](const DHAtom& a, const DHAtom& b) { return a.location < b.location; });
  DHMeasure mu;
  mu.cutoff = cutoff;
  for (const DHAtom& a : raw) {
    if (!mu.atoms.empty() && std::abs(a.location - mu.atoms.back().location) <= 1e-12)
      mu.atoms.back().mass += a.mass;
    else
      mu.atoms.push_back(a);
  }
  return mu;
}

// Groups the (m, lambda) pairs of a moment monoid into atoms: each lambda of
// a weight m contributes mass 1/#{lambda for m}, renormalized by the number
// of contributing weights, at location lambda / den(m).
DHMeasure emit_groups(const std::vector<std::pair<Rational, std::vector<Rational>>>& per_m,
                      double cutoff, bool exact, const std::vector<double>& dens_f) {
  if (per_m.empty()) {
    DHMeasure mu;
    mu.cutoff = cutoff;
    return mu;
  }
  const long long M = static_cast<long long>(per_m.size());
  if (exact) {
    std::map<Rational, Rational> acc;
    for (const auto& [den, lambdas] : per_m) {
      const Rational w =
          Rational(1) / (Rational(static_cast<long long>(lambdas.size())) * Rational(M));
      for (const Rational& l : lambdas) acc[l / den] += w;
    }
    return finalize_exact(acc, cutoff);
  }
  std::vector<DHAtom> raw;
  for (std::size_t g = 0; g < per_m.size(); ++g) {
    const auto& lambdas = per_m[g].second;
    const double w = 1.0 / (static_cast<double>(lambdas.size()) * static_cast<double>(M));
    for (const Rational& l : lambdas) raw.push_back({to_double(l) / dens_f[g], w});
  }
  return finalize_float(raw, cutoff);
}

}  // namespace

SpecialTestConfig product_config(const toric::ToricConeVariety& X, const std::vector<double>& xi,
                                 const QVec& eta, const std::optional<QVec>& xi_exact) {
  if (static_cast<int>(xi.size()) != X.n || static_cast<int>(eta.size()) != X.n)
    throw InvalidParams("product_config: xi and eta must have the ambient dimension");
  for (const Rational& e : eta)
    if (!is_integral(e)) throw InvalidParams("product_config: eta must be an integer vector");
  if (xi_exact) {
    if (static_cast<int>(xi_exact->size()) != X.n)
      throw InvalidParams("product_config: exact xi has the wrong dimension");
    if (!toric::reeb_contains(X, *xi_exact))
      throw ReebConeViolation("product_config: xi is not an interior Reeb field");
  } else if (!toric::reeb_contains(X, xi)) {
    throw ReebConeViolation("product_config: xi is not an interior Reeb field");
  }
  SpecialTestConfig tc;
  tc.central = X;
  tc.xi_lift = xi;
  tc.xi_lift_exact = xi_exact;
  tc.eta = eta;
  tc.product = true;
  std::ostringstream os;
  os << "product eta=(";
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (i) os << ",";
    os << format_rational(eta[i]);
  }
  os << ")";
  tc.source = os.str();
  return tc;
}

std::vector<double> gauge_fixed_eta(const toric::ToricConeVariety& central,
                                    const std::vector<double>& xi, const QVec& eta) {
  return gauge_impl<double>(central, xi, eta);
}

QVec gauge_fixed_eta(const toric::ToricConeVariety& central, const QVec& xi, const QVec& eta) {
  return gauge_impl<Rational>(central, xi, eta);
}

DFReport df_report(const SpecialTestConfig& tc, double band) {
  if (tc.xi_lift_exact) return df_routes<Rational>(tc.central, *tc.xi_lift_exact, tc.eta, band);
  return df_routes<double>(tc.central, tc.xi_lift, tc.eta, band);
}

double df_volume_route(const SpecialTestConfig& tc) { return df_report(tc).df_volume_route; }

double df_ab_route(const SpecialTestConfig& tc) { return df_report(tc).df_ab_route; }

DHMeasure dh_measure(const SpecialTestConfig& tc, double cutoff) {
  if (!(cutoff > 0)) throw InvalidParams("dh_measure: cutoff must be positive");
  std::vector<QVec> pts;
  if (tc.xi_lift_exact)
    pts = ratgeom::lattice_points_under_level(tc.central.dual, *tc.xi_lift_exact,
                                              rational_from_double(cutoff));
  else
    pts = ratgeom::lattice_points_under_level(tc.central.dual, tc.xi_lift, cutoff);

  const bool exact = tc.xi_lift_exact.has_value();
  std::vector<std::pair<Rational, std::vector<Rational>>> per_m;
  std::vector<double> dens_f;

  if (tc.product) {
    // Weight spaces of a product configuration are one-dimensional: each
    // nonzero m contributes the single height <m, eta>.
    for (const QVec& m : pts) {
      if (ratgeom::is_zero(m)) continue;
      const Rational lam = ratgeom::dot(m, tc.eta);
      if (exact) {
        per_m.push_back({ratgeom::dot(m, *tc.xi_lift_exact), {lam}});
      } else {
        double den = 0;
        for (int i = 0; i < tc.central.n; ++i) den += to_double(m[i]) * tc.xi_lift[i];
        per_m.push_back({Rational(0), {lam}});
        dens_f.push_back(den);
      }
    }
    return emit_groups(per_m, cutoff, exact, dens_f);
  }

  // Degeneration: lattice points of the lifted dual cone are (m, lambda)
  // with m the first n-1 coordinates. The level of (m, lambda) under
  // (xi, 0) equals <m, xi>, so grouping by m recovers the weight spaces.
  const int n = tc.central.n;
  std::map<QVec, std::vector<Rational>> groups;
  for (const QVec& p : pts) {
    QVec m(p.begin(), p.end() - 1);
    if (ratgeom::is_zero(m)) continue;
    groups[m].push_back(p[n - 1]);
  }
  for (const auto& [m, lambdas] : groups) {
    if (exact) {
      Rational den(0);
      for (int i = 0; i + 1 < n; ++i) den += m[i] * (*tc.xi_lift_exact)[i];
      per_m.push_back({den, lambdas});
    } else {
      double den = 0;
      for (int i = 0; i + 1 < n; ++i) den += to_double(m[i]) * tc.xi_lift[i];
      per_m.push_back({Rational(0), lambdas});
      dens_f.push_back(den);
    }
  }
  return emit_groups(per_m, cutoff, exact, dens_f);
}

DHMeasure dh_measure(const cxone::PolyhedralDivisor& D, const cxone::MarkedPoint& y,
                     const QVec& xi, const Rational& cutoff) {
  if (cutoff <= 0) throw InvalidParams("dh_measure: cutoff must be positive");
  if (static_cast<int>(xi.size()) != D.rank)
    throw InvalidParams("dh_measure: xi must have the tail dimension");
  const ratgeom::RationalPolyhedron Dy = cxone::term_at(D, y);
  const ratgeom::RationalPolyhedron rest = cxone::sum_away_from(D, y);
  const std::vector<QVec> pts = ratgeom::lattice_points_under_level(D.dual_tail, xi, cutoff);
  std::vector<std::pair<Rational, std::vector<Rational>>> per_m;
  for (const QVec& m : pts) {
    if (ratgeom::is_zero(m)) continue;
    const auto lo = ratgeom::support_eval(Dy, m);
    const auto hi = ratgeom::support_eval(rest, m);
    if (!lo || !hi) continue;
    const Integer lam_lo = -floor_q(*lo);  // ceil(-lo)
    const Integer lam_hi = floor_q(*hi);
    if (lam_lo > lam_hi) continue;
    std::vector<Rational> lambdas;
    for (Integer l = lam_lo; l <= lam_hi; ++l) lambdas.push_back(Rational(l));
    per_m.push_back({ratgeom::dot(m, xi), std::move(lambdas)});
  }
  return emit_groups(per_m, to_double(cutoff), /*exact=*/true, {});
}

double jna_norm(const DHMeasure& mu) {
  if (mu.atoms.empty()) throw EmptyMeasure("jna_norm: measure has no atoms");
  double mean = 0;
  for (const DHAtom& a : mu.atoms) mean += a.mass * a.location;
  return mu.atoms.back().location - mean;
}

Rational liu_bound(int n, const Rational& vhat) {
  if (n < 1) throw InvalidParams("liu_bound: dimension must be positive");
  if (vhat <= 0) throw InvalidParams("liu_bound: normalized volume must be positive");
  const Rational r(n + 1, n);
  Rational out = vhat;
  for (int i = 0; i < n; ++i) out *= r;
  return out;
}

double liu_bound(int n, double vhat) {
  if (n < 1) throw InvalidParams("liu_bound: dimension must be positive");
  if (!(vhat > 0)) throw InvalidParams("liu_bound: normalized volume must be positive");
  return std::pow((n + 1.0) / n, n) * vhat;
}

Rational bishop_gromov_bound(int n, const Integer& gamma_order) {
  if (n < 1) throw InvalidParams("bishop_gromov_bound: dimension must be positive");
  if (gamma_order < 1) throw InvalidParams("bishop_gromov_bound: group order must be positive");
  Integer num = 2;
  for (int i = 0; i < n; ++i) num *= Integer(2 * n - 1);
  for (int i = 2; i <= n; ++i) num *= Integer(i);
  Integer dfact = 1;
  for (int i = 3; i <= 2 * n - 1; i += 2) dfact *= Integer(i);
  return Rational(num) / (Rational(dfact) * Rational(gamma_order));
}

std::string status_name(Status s) {
  switch (s) {
    case Status::unstable:
      return "unstable";
    case Status::semistable_not_polystable:
      return "semistable_not_polystable";
    case Status::polystable_relative:
      return "polystable_relative";
    case Status::product_only:
      return "product_only";
  }
  return "unknown";
}

StabilityVerdict verdict(const toric::ToricConeVariety& X, const reebopt::MinimizerReport& rep) {
  StabilityVerdict v;
  v.status = Status::product_only;
  for (int i = 0; i < X.n; ++i) {
    QVec eta(static_cast<std::size_t>(X.n), Rational(0));
    eta[static_cast<std::size_t>(i)] = 1;
    const SpecialTestConfig tc = product_config(X, rep.xi_star, eta, rep.quasiregular);
    const DFReport r = df_report(tc);
    v.witnesses.push_back({tc.source, r.sign, "product"});
  }
  return v;
}

StabilityVerdict verdict(const cxone::PolyhedralDivisor& D, const reebopt::MinimizerReport& rep,
                         const Rational& constancy_cutoff, double dh_cutoff) {
  StabilityVerdict v;
  const QVec gate = cxone::interior_sample(D);
  bool any_negative = false;
  bool any_zero = false;
  for (const cxone::MarkedPoint& y : cxone::candidate_points(D)) {
    SpecialTestConfig tc;
    try {
      tc = cxone::degenerate_at(D, y, rep.xi_star, rep.quasiregular);
    } catch (const ImproperDegeneration&) {
      v.witnesses.push_back({y.str(), 0, "improper"});
      continue;
    }
    if (!cxone::hilbert_constancy_check(D, tc, gate, constancy_cutoff).ok) {
      v.witnesses.push_back({y.str(), 0, "nonflat"});
      continue;
    }
    const DFReport r = df_report(tc);
    const DHMeasure mu = dh_measure(tc, dh_cutoff);
    const bool is_product = !mu.atoms.empty() && jna_norm(mu) <= 1e-12;
    v.witnesses.push_back({y.str(), r.sign, is_product ? "product" : ""});
    if (is_product) continue;
    if (r.sign < 0) any_negative = true;
    if (r.sign == 0) any_zero = true;
  }
  if (any_negative)
    v.status = Status::unstable;
  else if (any_zero)
    v.status = Status::semistable_not_polystable;
  else
    v.status = Status::polystable_relative;
  return v;
}

}  // namespace conevol::kstab
