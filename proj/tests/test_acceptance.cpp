// Acceptance gate: one line per criterion, PASS or FAIL with measured values.
// Exits nonzero when any criterion fails.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "conevol/cxone.hpp"
#include "conevol/errors.hpp"
#include "conevol/kstab.hpp"
#include "conevol/ratgeom.hpp"
#include "conevol/reebopt.hpp"
#include "conevol/toric.hpp"

using namespace conevol;
using ratgeom::make_cone;
using ratgeom::qvec;
using toric::make_toric;
using toric::ToricConeVariety;
using cxone::MarkedPoint;
using cxone::PolyhedralDivisor;
using cxone::SpecialTestConfig;
using reebopt::MinimizerReport;
using reebopt::VolumeModel;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %02d %s  %s%s%s\n", idx, ok ? "PASS" : "FAIL", name,
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double now_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

QVec qvec_r(std::initializer_list<std::pair<long, long>> v) {
  QVec out;
  for (const auto& [p, q] : v) out.emplace_back(Rational(p, q));
  return out;
}

std::vector<double> dvec(const QVec& v) {
  std::vector<double> out;
  for (const Rational& q : v) out.push_back(q.convert_to<double>());
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Regularized lower incomplete gamma P(n, x) for integer n (P(n <= 0, x) = 1).
double reg_gamma_p(int n, double x) {
  if (n <= 0) return 1.0;
  double term = 1.0, sum = 1.0;
  for (int j = 1; j < n; ++j) {
    term *= x / j;
    sum += term;
  }
  return 1.0 - std::exp(-x) * sum;
}

// Three-point fit of t^n F(t) = a0 P(n, ct) + b1 t P(n-1, ct) + b2 t^2 P(n-2, ct)
// at t in {0.1, 0.05, 0.025}: each power of t keeps the incomplete-gamma
// factor describing how much of its Mellin mass the level cutoff c retains.
double fit_a0(const ToricConeVariety& X, const std::vector<double>& xi, double c) {
  const double ts[3] = {0.1, 0.05, 0.025};
  Eigen::Matrix3d A;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    const double F = toric::truncated_index_character(X, xi, ts[i], c);
    A(i, 0) = reg_gamma_p(X.n, c * ts[i]);
    A(i, 1) = ts[i] * reg_gamma_p(X.n - 1, c * ts[i]);
    A(i, 2) = ts[i] * ts[i] * reg_gamma_p(X.n - 2, c * ts[i]);
    rhs(i) = std::pow(ts[i], X.n) * F;
  }
  return A.fullPivLu().solve(rhs)(0);
}

PolyhedralDivisor suss(int k, int m, int mp) {
  cxone::SussFamilyParams p;
  p.k = k;
  p.m = m;
  p.mp = mp;
  for (int i = 1; i <= k - m - mp; ++i) p.generic_positions.emplace_back(i);
  return cxone::suss_family(p);
}

PolyhedralDivisor mirror_pair() {
  ratgeom::RationalCone tail = make_cone(2, {qvec({1, 0}), qvec({0, 1})});
  std::vector<std::pair<MarkedPoint, ratgeom::RationalPolyhedron>> terms;
  terms.emplace_back(MarkedPoint::zero(),
                     ratgeom::make_polyhedron(2, {qvec({0, 1})}, tail));
  terms.emplace_back(MarkedPoint::infinity(),
                     ratgeom::make_polyhedron(2, {qvec({0, 1})}, tail));
  return cxone::make_divisor(std::move(tail), std::move(terms));
}

struct MinimizerEntry {
  std::string name;
  MinimizerReport rep;
  const ToricConeVariety* X = nullptr;  // set for toric inputs
};

struct ShippedConfig {
  std::string name;
  SpecialTestConfig tc;
};

}  // namespace

int main() {
  std::vector<MinimizerEntry> minimizers;
  std::vector<ShippedConfig> shipped;

  // Geometry reused across criteria.
  const ToricConeVariety c2 = make_toric(make_cone(2, {qvec({1, 0}), qvec({0, 1})}));
  const ToricConeVariety c3 =
      make_toric(make_cone(3, {qvec({1, 0, 0}), qvec({0, 1, 0}), qvec({0, 0, 1})}));
  const ToricConeVariety conifold = make_toric(make_cone(
      3, {qvec({0, 0, 1}), qvec({1, 0, 1}), qvec({0, 1, 1}), qvec({1, 1, 1})}));
  const ToricConeVariety a1 = make_toric(make_cone(2, {qvec({1, 0}), qvec({1, 2})}));
  const ToricConeVariety dblsq = make_toric(make_cone(
      3, {qvec({0, 0, 1}), qvec({2, 0, 1}), qvec({0, 1, 1}), qvec({2, 1, 1})}));

  // ---------------------------------------------------------- criterion 1
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    try {
      const MinimizerReport rep = reebopt::minimize_volume(c3);
      const double ms = now_ms(t0);
      for (double x : rep.xi_star) ok = ok && std::abs(x - 1.0) <= 1e-8;
      ok = ok && std::abs(rep.vhat - 27.0) <= 1e-8 && ms < 1000.0;
      detail = "xi*=(" + fmt(rep.xi_star[0]) + "," + fmt(rep.xi_star[1]) + "," +
               fmt(rep.xi_star[2]) + "), vhat=" + fmt(rep.vhat) + ", " + fmt(ms) + " ms";
      minimizers.push_back({"c3", rep, &c3});
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(1, "smooth-point volume anchor", ok, detail);
  }

  // ---------------------------------------------------------- criterion 2
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    try {
      const MinimizerReport rep = reebopt::minimize_volume(conifold);
      const double ms = now_ms(t0);
      const double want[3] = {1.5, 1.5, 3.0};
      for (int i = 0; i < 3; ++i)
        ok = ok && std::abs(rep.xi_star[static_cast<std::size_t>(i)] - want[i]) <= 1e-6;
      ok = ok && std::abs(rep.vhat - 16.0) <= 1e-6;
      ok = ok && rep.quasiregular.has_value() &&
           *rep.quasiregular == qvec_r({{3, 2}, {3, 2}, {3, 1}});
      ok = ok && ms < 5000.0;
      detail = "vhat=" + fmt(rep.vhat) +
               ", quasiregular=" + (rep.quasiregular ? "certified" : "missing") + ", " +
               fmt(ms) + " ms";
      minimizers.push_back({"conifold", rep, &conifold});
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(2, "conifold volume anchor with exact certification", ok, detail);
  }

  // ---------------------------------------------------------- criterion 3
  {
    bool ok = true;
    std::string detail;
    try {
      const Rational a1_plane = toric::a1(c2, qvec({1, 1}));
      const Rational a1_space = toric::a1(c3, qvec({1, 1, 1}));
      ok = a1_plane == Rational(-2) && a1_space == Rational(-3);
      detail = "a1(C2,(1,1))=" + format_rational(a1_plane) +
               ", a1(C3,(1,1,1))=" + format_rational(a1_space);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(3, "exact second coefficient identities", ok, detail);
  }

  // ---------------------------------------------------------- criterion 4
  {
    bool ok = true;
    std::string detail;
    try {
      struct Case {
        const ToricConeVariety* X;
        QVec xi;
      };
      const std::vector<Case> cases = {
          {&c2, qvec({1, 1})},
          {&c3, qvec({1, 1, 1})},
          {&conifold, qvec_r({{3, 2}, {3, 2}, {3, 1}})},
          {&a1, qvec({2, 2})},
          {&dblsq, qvec({2, 1, 2})},
      };
      double worst_fit = 0, worst_lv = 0;
      for (const Case& cs : cases) {
        const double exact = toric::a0(*cs.X, cs.xi).convert_to<double>();
        const double fitted = fit_a0(*cs.X, dvec(cs.xi), 200.0);
        const double lv = toric::local_volume_truncated(*cs.X, dvec(cs.xi), 200.0);
        worst_fit = std::max(worst_fit, std::abs(fitted / exact - 1.0));
        worst_lv = std::max(worst_lv, std::abs(lv / exact - 1.0));
      }
      ok = worst_fit < 0.01 && worst_lv < 0.05;
      detail = "5 cones, worst series error " + fmt(worst_fit * 100) +
               "%, worst truncated-volume error " + fmt(worst_lv * 100) + "%";
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(4, "series oracle consistency at cutoff 200", ok, detail);
  }

  // ---------------------------------------------------------- criteria 5+6
  // The one-parameter family with k = 2: degeneration signs at both poles,
  // the uncollided verdict, and flatness of every degeneration used.
  std::vector<std::pair<PolyhedralDivisor, SpecialTestConfig>> family_degens;
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    try {
      struct Pole {
        int m, mp;
        bool at_zero;
        int want_sign;
      };
      const std::vector<Pole> poles = {
          {1, 0, true, -1},  // collision count 1 at zero: destabilizes
          {2, 0, true, -1},  // collision count 2 at zero: destabilizes
          {0, 1, false, 1},  // one collision at infinity: positive there
          {0, 2, false, -1}, // two collisions at infinity: negative there
      };
      std::string signs;
      for (const Pole& p : poles) {
        PolyhedralDivisor D = suss(2, p.m, p.mp);
        const MinimizerReport rep = reebopt::minimize_volume(cxone::cx1_model(D));
        const MarkedPoint y = p.at_zero ? MarkedPoint::zero() : MarkedPoint::infinity();
        const SpecialTestConfig tc = cxone::degenerate_at(D, y, rep.xi_star);
        const kstab::DFReport r = kstab::df_report(tc);
        ok = ok && r.sign == p.want_sign;
        signs += (signs.empty() ? "" : ",");
        signs += (r.sign > 0 ? "+" : r.sign < 0 ? "-" : "0");
        shipped.push_back({"suss(2," + std::to_string(p.m) + "," + std::to_string(p.mp) +
                               ")@" + y.str(),
                           tc});
        family_degens.emplace_back(std::move(D), tc);
        minimizers.push_back({"suss", rep, nullptr});
      }
      PolyhedralDivisor D0 = suss(2, 0, 0);
      const MinimizerReport rep0 = reebopt::minimize_volume(cxone::cx1_model(D0));
      const kstab::StabilityVerdict v = kstab::verdict(D0, rep0);
      ok = ok && v.status == kstab::Status::polystable_relative;
      for (const MarkedPoint& y : {MarkedPoint::zero(), MarkedPoint::infinity()}) {
        const SpecialTestConfig tc = cxone::degenerate_at(D0, y, rep0.xi_star);
        shipped.push_back({"suss(2,0,0)@" + y.str(), tc});
        family_degens.emplace_back(D0, tc);
      }
      minimizers.push_back({"suss", rep0, nullptr});
      const double ms = now_ms(t0);
      ok = ok && ms < 60000.0;
      detail = "pole signs " + signs + ", uncollided " + kstab::status_name(v.status) +
               ", " + fmt(ms) + " ms";
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(5, "worked family reproduction at k=2", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    try {
      std::size_t mismatches = 0;
      for (const auto& [D, tc] : family_degens) {
        const cxone::ConstancyReport cr =
            cxone::hilbert_constancy_check(D, tc, cxone::interior_sample(D), Rational(50));
        if (!cr.ok) mismatches += cr.mismatches.empty() ? 1 : cr.mismatches.size();
      }
      ok = mismatches == 0 && !family_degens.empty();
      detail = std::to_string(family_degens.size()) +
               " degenerations, mismatching weights: " + std::to_string(mismatches);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(6, "Hilbert constancy of every degeneration used", ok, detail);
  }

  // ---------------------------------------------------------- criterion 7
  {
    bool ok = true;
    std::string detail;
    try {
      std::mt19937_64 rng(12345);
      const std::vector<const ToricConeVariety*> pool = {&c2, &c3, &conifold, &a1, &dblsq};
      const std::vector<std::vector<QVec>> uni2 = {
          {qvec({1, 1}), qvec({0, 1})},
          {qvec({0, 1}), qvec({1, 0})},
          {qvec({1, 0}), qvec({2, 1})},
      };
      const std::vector<std::vector<QVec>> uni3 = {
          {qvec({1, 1, 0}), qvec({0, 1, 0}), qvec({0, 0, 1})},
          {qvec({1, 0, 1}), qvec({0, 1, -1}), qvec({0, 0, 1})},
          {qvec({0, 1, 0}), qvec({0, 0, 1}), qvec({1, 0, 0})},
      };
      auto matvec = [](const std::vector<QVec>& U, const QVec& v) {
        QVec out;
        for (const QVec& row : U) out.push_back(ratgeom::dot(row, v));
        return out;
      };
      int checks = 0;
      int bad = 0;
      for (int round = 0; round < 40; ++round) {
        const ToricConeVariety& X = *pool[static_cast<std::size_t>(round) % pool.size()];
        const int n = X.n;
        // random interior Reeb field: positive combination of all rays
        QVec xi(static_cast<std::size_t>(n), Rational(0));
        for (const QVec& r : X.sigma.rays) {
          const long c = 1 + static_cast<long>(rng() % 4);
          for (int i = 0; i < n; ++i)
            xi[static_cast<std::size_t>(i)] += Rational(c) * r[static_cast<std::size_t>(i)];
        }
        const Rational s(1 + static_cast<long>(rng() % 7), 1 + static_cast<long>(rng() % 3));
        QVec sxi = xi;
        for (Rational& x : sxi) x *= s;

        // 1. a0 is homogeneous of degree -n
        Rational lhs = toric::a0(X, sxi);
        Rational rhs = toric::a0(X, xi);
        for (int i = 0; i < n; ++i) lhs *= s;
        ++checks;
        if (lhs != rhs) ++bad;

        // 2. a1 is homogeneous of degree 1-n
        lhs = toric::a1(X, sxi);
        rhs = toric::a1(X, xi);
        for (int i = 0; i < n - 1; ++i) lhs *= s;
        ++checks;
        if (lhs != rhs) ++bad;

        // 3. the normalized volume is scale invariant
        ++checks;
        if (toric::normalized_volume(X, sxi) != toric::normalized_volume(X, xi)) ++bad;

        // 4. dualizing twice returns the original cone
        ++checks;
        if (ratgeom::dual_cone(X.dual) != X.sigma) ++bad;

        // 5. DF of a product configuration is unimodular invariant
        QVec eta(static_cast<std::size_t>(n), Rational(0));
        eta[rng() % static_cast<std::size_t>(n)] = 1;
        const SpecialTestConfig tc = kstab::product_config(X, dvec(xi), eta, xi);
        const auto& us = n == 2 ? uni2 : uni3;
        const std::vector<QVec>& U = us[static_cast<std::size_t>(rng() % us.size())];
        std::vector<QVec> trays;
        for (const QVec& r : X.sigma.rays) trays.push_back(matvec(U, r));
        const ToricConeVariety XT = make_toric(make_cone(n, trays));
        const QVec txi = matvec(U, xi);
        const SpecialTestConfig ttc = kstab::product_config(XT, dvec(txi), matvec(U, eta), txi);
        const kstab::DFReport r1 = kstab::df_report(tc);
        const kstab::DFReport r2 = kstab::df_report(ttc);
        ++checks;
        if (!close_rel(r1.df_volume_route, r2.df_volume_route, 1e-9) ||
            !close_rel(r1.df_ab_route, r2.df_ab_route, 1e-9))
          ++bad;
      }
      ok = checks == 200 && bad == 0;
      detail = std::to_string(checks) + " randomized checks, " + std::to_string(bad) +
               " failures";
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(7, "homogeneity and invariance property suite", ok, detail);
  }

  // ---------------------------------------------------------- criterion 8
  {
    bool ok = true;
    std::string detail;
    try {
      // add the remaining toric minimizers so "every computed minimizer"
      // spans all shipped inputs
      minimizers.push_back({"a1", reebopt::minimize_volume(a1), &a1});
      minimizers.push_back({"dblsq", reebopt::minimize_volume(dblsq), &dblsq});
      double worst_grad = 0, worst_df = 0;
      for (const MinimizerEntry& e : minimizers) {
        worst_grad = std::max(worst_grad, e.rep.grad_residual);
        if (!e.X) continue;
        for (int i = 0; i < e.X->n; ++i) {
          QVec eta(static_cast<std::size_t>(e.X->n), Rational(0));
          eta[static_cast<std::size_t>(i)] = 1;
          const SpecialTestConfig tc =
              kstab::product_config(*e.X, e.rep.xi_star, eta, e.rep.quasiregular);
          const kstab::DFReport r = kstab::df_report(tc);
          worst_df = std::max({worst_df, std::abs(r.df_volume_route), std::abs(r.df_ab_route)});
          shipped.push_back({e.name + " product e" + std::to_string(i + 1), tc});
        }
      }
      ok = worst_grad <= 1e-8 && worst_df <= 1e-8;
      detail = std::to_string(minimizers.size()) + " minimizers, worst slice gradient " +
               fmt(worst_grad) + ", worst product DF " + fmt(worst_df);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(8, "first-order optimality and toric product directions", ok, detail);
  }

  // ---------------------------------------------------------- criterion 9
  {
    bool ok = true;
    std::string detail;
    try {
      const QVec cstar = qvec_r({{3, 2}, {3, 2}, {3, 1}});
      std::vector<SpecialTestConfig> trivial;
      trivial.push_back(kstab::product_config(conifold, dvec(cstar),
                                              qvec({0, 0, 0}), cstar));
      trivial.push_back(kstab::product_config(conifold, dvec(cstar),
                                              qvec({3, 3, 6}), cstar));  // 2*xi
      trivial.push_back(kstab::product_config(c3, {1.0, 1.0, 1.0}, qvec({1, 1, 1}),
                                              qvec({1, 1, 1})));  // xi itself
      double worst_mass = 0;
      std::size_t diracs = 0;
      for (const SpecialTestConfig& tc : trivial) {
        const kstab::DHMeasure mu = kstab::dh_measure(tc, 12.0);
        double mass = 0;
        for (const kstab::DHAtom& a : mu.atoms) mass += a.mass;
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
        if (mu.atoms.size() == 1 && kstab::jna_norm(mu) == 0.0) ++diracs;
      }
      ok = diracs == trivial.size();

      // every nonproduct shipped configuration: the family degenerations and
      // the mirror divisor's poles
      PolyhedralDivisor mp = mirror_pair();
      const MinimizerReport mrep = reebopt::minimize_volume(cxone::cx1_model(mp));
      std::vector<SpecialTestConfig> nonproduct;
      for (const auto& [D, tc] : family_degens) nonproduct.push_back(tc);
      for (const MarkedPoint& y : {MarkedPoint::zero(), MarkedPoint::infinity()}) {
        const SpecialTestConfig tc =
            cxone::degenerate_at(mp, y, mrep.xi_star, mrep.quasiregular);
        nonproduct.push_back(tc);
        shipped.push_back({"mirror@" + y.str(), tc});
      }
      minimizers.push_back({"mirror", mrep, nullptr});
      double min_jna = 1e300;
      for (const SpecialTestConfig& tc : nonproduct) {
        const kstab::DHMeasure mu = kstab::dh_measure(tc, 50.0);
        double mass = 0;
        for (const kstab::DHAtom& a : mu.atoms) mass += a.mass;
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
        min_jna = std::min(min_jna, kstab::jna_norm(mu));
      }
      ok = ok && min_jna > 1e-9 && worst_mass <= 1e-12;
      detail = std::to_string(diracs) + "/" + std::to_string(trivial.size()) +
               " trivial products Dirac with jna 0, min nonproduct jna " + fmt(min_jna) +
               ", worst mass defect " + fmt(worst_mass);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(9, "spectral measure and J-norm suite", ok, detail);
  }

  // --------------------------------------------------------- criterion 10
  {
    bool ok = true;
    std::string detail;
    try {
      const Rational l = kstab::liu_bound(3, Rational(27));
      const Rational b1 = kstab::bishop_gromov_bound(2, Integer(1));
      const Rational b2 = kstab::bishop_gromov_bound(2, Integer(2));
      ok = l == Rational(64) && b1 == Rational(12) && b2 == Rational(6);
      detail = "liu(3,27)=" + format_rational(l) + ", bg(2,1)=" + format_rational(b1) +
               ", bg(2,2)=" + format_rational(b2);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(10, "exact volume bound calculators", ok, detail);
  }

  // --------------------------------------------------------- criterion 11
  {
    bool ok = true;
    std::string detail;
    try {
      std::size_t agreements = 0, disagreements = 0;
      for (const ShippedConfig& s : shipped) {
        const kstab::DFReport r = kstab::df_report(s.tc);
        const auto band_sign = [](double x) { return x > 1e-9 ? 1 : x < -1e-9 ? -1 : 0; };
        if (band_sign(r.df_volume_route) == band_sign(r.df_ab_route))
          ++agreements;
        else
          ++disagreements;
      }
      ok = shipped.size() >= 10 && disagreements == 0;
      detail = std::to_string(agreements) + "/" + std::to_string(shipped.size()) +
               " configurations agree across both routes";
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(11, "Donaldson-Futaki route cross-validation", ok, detail);
  }

  if (failures == 0)
    std::printf("acceptance: 11/11 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
