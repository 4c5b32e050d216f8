#pragma once

// Complexity-one T-varieties over the projective line, encoded as polyhedral
// divisors: finitely many rational polyhedra with a common tail cone attached
// to marked points. Provides the worked one-parameter family with collisions,
// the Hilbert function of the multigraded section ring, toric degenerations
// at points of the line (special test configurations), a flatness proxy by
// Hilbert-function constancy, and the volume model of the general fiber for
// Reeb-field optimization.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conevol/errors.hpp"
#include "conevol/ratgeom.hpp"
#include "conevol/reebopt.hpp"
#include "conevol/toric.hpp"

namespace conevol::cxone {

// Point of the projective line: 0, a finite rational position, or infinity.
struct MarkedPoint {
  enum class Kind { Zero, Finite, Infinity };
  Kind kind = Kind::Zero;
  Rational value;  // meaningful only when kind == Finite

  static MarkedPoint zero();
  static MarkedPoint infinity();
  static MarkedPoint finite(const Rational& v);  // v == 0 canonicalizes to zero()
  static MarkedPoint parse(const std::string& s);  // "0" | "inf" | "p/q"
  std::string str() const;

  bool operator==(const MarkedPoint& o) const;
  bool operator<(const MarkedPoint& o) const;  // Zero < Finite(by value) < Infinity
};

// Polyhedral divisor on the projective line: tail cone sigma in N and one
// polyhedron per marked point, every term carrying sigma as its tail.
// Canonical form: terms sorted by point, trivial terms (the tail itself)
// dropped, so the term keys are exactly the support.
struct PolyhedralDivisor {
  ratgeom::RationalCone tail;       // sigma, full-dimensional, strictly convex
  ratgeom::RationalCone dual_tail;  // sigma^vee, the ambient moment cone
  std::vector<std::pair<MarkedPoint, ratgeom::RationalPolyhedron>> terms;
  int rank = 0;  // dim N
};

// Validating constructor. Throws TailMismatch when a term's tail differs
// from sigma, InvalidParams on duplicate points, NotFullDimensional /
// DegenerateGenerators for a bad tail, and ImproperDivisor when the degree
// deg D(m) = sum_y support_eval(D_y, m) fails to be nonnegative on the
// Hilbert basis of sigma^vee or to be positive at an interior sample.
PolyhedralDivisor make_divisor(
    ratgeom::RationalCone tail,
    std::vector<std::pair<MarkedPoint, ratgeom::RationalPolyhedron>> terms);

// The term at y; the trivial polyhedron {0} + sigma off the support.
ratgeom::RationalPolyhedron term_at(const PolyhedralDivisor& D, const MarkedPoint& y);

// Minkowski sum of all terms away from y (trivial when none remain).
ratgeom::RationalPolyhedron sum_away_from(const PolyhedralDivisor& D, const MarkedPoint& y);

// deg D(m): sum of support evaluations of all terms at m. Throws
// OutsideMomentCone unless m lies in sigma^vee.
Rational degree_eval(const PolyhedralDivisor& D, const QVec& m);

// ------------------------------------------------------ the worked family

// One-parameter family with collision counts: tail cone spanned by (-1,1)
// and (15k-4, 8); fractional vertex terms at 0 and infinity; a lattice unit
// segment at each of the k - m - mp generic positions; m (resp. mp) further
// unit segments collided onto the 0 (resp. infinity) term by Minkowski sum.
struct SussFamilyParams {
  int k = 1;
  int m = 0;
  int mp = 0;
  std::vector<Rational> generic_positions;  // k - m - mp distinct nonzero finite points
};

PolyhedralDivisor suss_family(const SussFamilyParams& p);

// ---------------------------------------------------------- Hilbert function

// Dimension of the weight-m piece of the section ring:
// max(0, 1 + sum_y floor(support_eval(D_y, m))), the space of global
// sections of the rounded-down evaluation divisor on the projective line.
// Throws OutsideMomentCone unless m lies in sigma^vee.
long long hilbert_dim(const PolyhedralDivisor& D, const QVec& m);

// ------------------------------------------------------------- degenerations

// Special test configuration: a toric central fiber in N + Z together with
// the lifted Reeb field, the degeneration direction, and provenance. Product
// configurations (central fiber equal to the general fiber, direction in the
// original N) reuse the same record with product = true.
struct SpecialTestConfig {
  toric::ToricConeVariety central;
  std::vector<double> xi_lift;        // (xi, 0) for degenerations; xi for products
  std::optional<QVec> xi_lift_exact;  // set when the Reeb field is rational
  QVec eta;                           // (0_N, -1) for degenerations; eta in N for products
  bool product = false;
  std::string source;
};

// Degeneration of the complexity-one variety at the point y: the central
// fiber is the toric variety of the cone generated by the y-term lifted to
// height +1, the Minkowski sum of all other terms lifted to height -1, and
// the tail rays at height 0. Its moment monoid is
//   { (m, lambda) : m in sigma^vee, -support_eval(D_y, m) <= lambda
//                                     <= support_eval(sum_away_from(D,y), m) }.
// xi is the Reeb field on the general fiber (rank components); the exact
// variant, when supplied, must agree with it. Throws ImproperDegeneration
// when the lifted cone is not strictly convex or its Gorenstein solve fails.
SpecialTestConfig degenerate_at(const PolyhedralDivisor& D, const MarkedPoint& y,
                                const std::vector<double>& xi,
                                const std::optional<QVec>& xi_exact = std::nullopt);

// ------------------------------------------------------------ flatness proxy

struct ConstancyReport {
  bool ok = false;
  std::vector<QVec> mismatches;  // weights m with differing dimensions
};

// Compares, for every lattice weight m of sigma^vee with <m, xi> < cutoff,
// hilbert_dim(D, m) against the number of lattice heights lambda with
// (m, lambda) in the central fiber's moment monoid (enumerated independently
// from the lifted cone's dual). Equality for all m certifies the
// degeneration as flat for this toolkit; mismatches are reported.
ConstancyReport hilbert_constancy_check(const PolyhedralDivisor& D, const SpecialTestConfig& tc,
                                        const QVec& xi, const Rational& cutoff);

// --------------------------------------------------------- candidate points

// First positive integer position outside the support.
MarkedPoint pick_generic(const PolyhedralDivisor& D);

// Support points followed by one generic point: the candidate degeneration
// points examined by stability verdicts.
std::vector<MarkedPoint> candidate_points(const PolyhedralDivisor& D);

// Primitive interior point of the tail cone (ray sum), the default gate for
// constancy checks.
QVec interior_sample(const PolyhedralDivisor& D);

// ------------------------------------------------- general fiber quantities

// a0 of the general fiber at the rational Reeb field xi, computed as a0 of
// the central fiber of the first candidate degeneration that passes the
// constancy check at level cutoff. Throws NoFlatDegeneration when every
// candidate fails (improper or non-flat).
Rational general_fiber_a0(const PolyhedralDivisor& D, const QVec& xi,
                          const Rational& cutoff = Rational(50));

// Volume model of the general fiber: pieces of the first flat degeneration's
// central fiber projected back to N (the lifted Reeb field (xi, 0) pairs
// trivially with the extra coordinate), gauge covector the projection of the
// central Gorenstein covector, domain rays those of the tail cone. Throws
// NoFlatDegeneration when no candidate passes, NotFano when the projected
// gauge vanishes.
reebopt::VolumeModel cx1_model(const PolyhedralDivisor& D,
                               const Rational& cutoff = Rational(50));

}  // namespace conevol::cxone
