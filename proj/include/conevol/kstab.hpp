#pragma once

// Stability layer: Donaldson-Futaki invariants of special test
// configurations along two independently computed routes (volume derivative
// and coefficient pairing), Duistermaat-Heckman measures with the
// non-Archimedean J-norm, stability verdicts over candidate degenerations,
// and the classical volume bound calculators. Only signs of DF values are
// contractual; magnitudes omit dimensional constants.

#include <string>
#include <vector>

#include "conevol/cxone.hpp"
#include "conevol/reebopt.hpp"

namespace conevol::kstab {

using cxone::SpecialTestConfig;

// Product configuration of a toric cone: the central fiber is the variety
// itself and the degeneration direction eta is an integer vector of N.
SpecialTestConfig product_config(const toric::ToricConeVariety& X,
                                 const std::vector<double>& xi, const QVec& eta,
                                 const std::optional<QVec>& xi_exact = std::nullopt);

// T_xi(eta) = (A(xi) eta - A(eta) xi) / n. Its A-pairing vanishes, so the
// first-order volume variation along it stays on the gauge slice.
std::vector<double> gauge_fixed_eta(const toric::ToricConeVariety& central,
                                    const std::vector<double>& xi, const QVec& eta);
QVec gauge_fixed_eta(const toric::ToricConeVariety& central, const QVec& xi, const QVec& eta);

// Sign classification band: |df| <= band reports sign 0.
inline constexpr double kSignBand = 1e-9;

struct DFReport {
  double df_volume_route = 0;
  double df_ab_route = 0;
  std::vector<double> gauge_eta;
  int sign = 0;  // -1 | 0 | +1 of the volume route under the band
};

// Volume route: -<grad a0(xi), T_xi(eta)>, the derivative of the central
// fiber's normalized volume against the degeneration (up to a positive
// dimensional constant).
double df_volume_route(const SpecialTestConfig& tc);

// Coefficient route: (n+1) A1 B0 - n A0 B1 with B_i = <grad A_i(xi),
// T_xi(eta)>. Independently exercises a1 and its gradient; agrees in sign
// with the volume route on every valid configuration.
double df_ab_route(const SpecialTestConfig& tc);

// Both routes at once (single evaluation of the shared data), with the
// gauge-fixed direction and the sign classification.
DFReport df_report(const SpecialTestConfig& tc, double band = kSignBand);

// --------------------------------------------------------------- DH measure

struct DHAtom {
  double location = 0;
  double mass = 0;
};

struct DHMeasure {
  std::vector<DHAtom> atoms;  // sorted by location, equal locations merged
  double cutoff = 0;
};

// Spectral measure of the degeneration: one atom at lambda / <m, xi> for
// every lattice point (m, lambda) of the central moment monoid with
// 0 < <m, xi> < cutoff, weighted 1/#{lambda for this m} and renormalized by
// the number of contributing weights m; total mass 1. For product
// configurations lambda = <m, eta>.
DHMeasure dh_measure(const SpecialTestConfig& tc, double cutoff);

// The same measure computed from the divisor data alone (the monoid is
// -support_eval(D_y, m) <= lambda <= support_eval of the summed others):
// cross-check for degenerations, and the only route for two-point divisors
// whose lifted cone is degenerate.
DHMeasure dh_measure(const cxone::PolyhedralDivisor& D, const cxone::MarkedPoint& y,
                     const QVec& xi, const Rational& cutoff);

// sup supp - mean; zero exactly when the measure is a single Dirac atom.
// Throws EmptyMeasure on an atomless measure.
double jna_norm(const DHMeasure& mu);

// ------------------------------------------------------------------- bounds

// (1 + 1/n)^n * vhat: upper bound for the anticanonical degree of a
// semistable Fano given the normalized volume of a cone point.
Rational liu_bound(int n, const Rational& vhat);
double liu_bound(int n, double vhat);

// 2 (2n-1)^n n! / ((2n-1)!! |Gamma|): normalized-volume bound at a finite
// quotient singularity of order |Gamma|.
Rational bishop_gromov_bound(int n, const Integer& gamma_order);

// ------------------------------------------------------------------ verdict

enum class Status { unstable, semistable_not_polystable, polystable_relative, product_only };

std::string status_name(Status s);

struct Witness {
  std::string point;  // candidate degeneration point, or the product direction
  int sign = 0;       // DF sign at this candidate
  std::string note;   // "", "product", "improper", "nonflat"
};

struct StabilityVerdict {
  Status status = Status::product_only;
  std::vector<Witness> witnesses;
};

// Toric cones admit only product configurations: semistable at the
// minimizer, polystable relative to torus-equivariant degenerations. The
// witnesses record DF signs along the coordinate directions (all zero at a
// true minimizer).
StabilityVerdict verdict(const toric::ToricConeVariety& X, const reebopt::MinimizerReport& rep);

// Complexity-one verdict relative to point-degenerations: evaluates DF at
// every support point and one generic point, skipping candidates whose
// degeneration is improper or fails the constancy proxy (recorded in the
// witness list). Product-like candidates (Dirac DH measure) do not block
// polystability.
StabilityVerdict verdict(const cxone::PolyhedralDivisor& D, const reebopt::MinimizerReport& rep,
                         const Rational& constancy_cutoff = Rational(50),
                         double dh_cutoff = 50.0);

}  // namespace conevol::kstab
