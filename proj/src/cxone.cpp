#include "conevol/cxone.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace conevol::cxone {

using ratgeom::RationalCone;
using ratgeom::RationalPolyhedron;

// ----------------------------------------------------------- marked points

MarkedPoint MarkedPoint::zero() { return MarkedPoint{Kind::Zero, Rational(0)}; }

MarkedPoint MarkedPoint::infinity() { return MarkedPoint{Kind::Infinity, Rational(0)}; }

MarkedPoint MarkedPoint::finite(const Rational& v) {
  if (v == 0) return zero();
  return MarkedPoint{Kind::Finite, v};
}

MarkedPoint MarkedPoint::parse(const std::string& s) {
  if (s == "inf") return infinity();
  return finite(parse_rational(s));
}

std::string MarkedPoint::str() const {
  switch (kind) {
    case Kind::Zero:
      return "0";
    case Kind::Infinity:
      return "inf";
    default:
      return format_rational(value);
  }
}

bool MarkedPoint::operator==(const MarkedPoint& o) const {
  return kind == o.kind && (kind != Kind::Finite || value == o.value);
}

bool MarkedPoint::operator<(const MarkedPoint& o) const {
  auto order = [](Kind k) { return k == Kind::Zero ? 0 : (k == Kind::Finite ? 1 : 2); };
  if (order(kind) != order(o.kind)) return order(kind) < order(o.kind);
  return kind == Kind::Finite && value < o.value;
}

// ---------------------------------------------------------------- divisors

namespace {

RationalPolyhedron trivial_term(const RationalCone& tail) {
  return ratgeom::make_polyhedron(tail.dim, {QVec(tail.dim, Rational(0))}, tail);
}

Rational support_or_throw(const RationalPolyhedron& p, const QVec& m) {
  auto v = ratgeom::support_eval(p, m);
  if (!v) throw OutsideMomentCone("support evaluation unbounded below");
  return *v;
}

// Nonzero lattice points of the closed fundamental parallelogram of the two
// dual rays, plus the rays themselves: a superset of the Hilbert basis of a
// two-dimensional cone, and contained in it. deg D is a sum of minima of
// linear functions, hence concave and positively homogeneous, hence
// superadditive; nonnegativity on these points therefore certifies
// nonnegativity on the whole dual cone.
std::vector<QVec> properness_probes(const RationalCone& dual) {
  std::vector<QVec> probes = dual.rays;
  if (dual.dim == 2 && dual.rays.size() == 2) {
    for (const QVec& p :
         ratgeom::fundamental_parallelepiped(dual.rays, {false, false}))
      if (!ratgeom::is_zero(p)) probes.push_back(p);
  }
  return probes;
}

}  // namespace

PolyhedralDivisor make_divisor(
    RationalCone tail, std::vector<std::pair<MarkedPoint, RationalPolyhedron>> terms) {
  if (!ratgeom::is_full_dimensional(tail))
    throw NotFullDimensional("tail cone must be full-dimensional");
  if (!ratgeom::is_strictly_convex(tail))
    throw DegenerateGenerators("tail cone must be strictly convex");

  PolyhedralDivisor D;
  D.tail = tail;
  D.dual_tail = ratgeom::dual_cone(tail);
  D.rank = tail.dim;

  const RationalPolyhedron trivial = trivial_term(tail);
  for (auto& [y, poly] : terms) {
    if (poly.tail != tail) throw TailMismatch("term at y=" + y.str() + " has a different tail");
    if (poly == trivial) continue;  // implicit off-support term
    D.terms.emplace_back(y, poly);
  }
  std::sort(D.terms.begin(), D.terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < D.terms.size(); ++i)
    if (D.terms[i - 1].first == D.terms[i].first)
      throw InvalidParams("duplicate term at y=" + D.terms[i].first.str());

  for (const QVec& m : properness_probes(D.dual_tail))
    if (degree_eval(D, m) < 0)
      throw ImproperDivisor("deg D negative at a Hilbert basis point");
  QVec sample(D.rank, Rational(0));
  for (const QVec& r : D.dual_tail.rays) sample = ratgeom::add(sample, r);
  if (degree_eval(D, sample) <= 0)
    throw ImproperDivisor("deg D not positive in the interior of the dual tail");

  return D;
}

RationalPolyhedron term_at(const PolyhedralDivisor& D, const MarkedPoint& y) {
  for (const auto& [p, poly] : D.terms)
    if (p == y) return poly;
  return trivial_term(D.tail);
}

RationalPolyhedron sum_away_from(const PolyhedralDivisor& D, const MarkedPoint& y) {
  RationalPolyhedron acc = trivial_term(D.tail);
  for (const auto& [p, poly] : D.terms)
    if (!(p == y)) acc = ratgeom::minkowski_sum(acc, poly);
  return acc;
}

Rational degree_eval(const PolyhedralDivisor& D, const QVec& m) {
  if (!ratgeom::cone_contains(D.dual_tail, m))
    throw OutsideMomentCone("weight outside the dual tail cone");
  Rational deg(0);
  for (const auto& [p, poly] : D.terms) deg += support_or_throw(poly, m);
  return deg;
}

// ------------------------------------------------------------ worked family

PolyhedralDivisor suss_family(const SussFamilyParams& p) {
  if (p.k < 1) throw InvalidParams("k must be positive");
  if (p.m < 0 || p.mp < 0 || p.m + p.mp > p.k)
    throw InvalidParams("collision counts must satisfy 0 <= m + mp <= k");
  const int generic = p.k - p.m - p.mp;
  if (static_cast<int>(p.generic_positions.size()) != generic)
    throw InvalidParams("expected exactly k - m - mp generic positions");
  {
    std::set<Rational> seen;
    for (const Rational& y : p.generic_positions) {
      if (y == 0) throw InvalidParams("generic positions must avoid the marked point 0");
      if (!seen.insert(y).second) throw InvalidParams("generic positions must be distinct");
    }
  }

  RationalCone sigma =
      ratgeom::make_cone(2, {ratgeom::qvec({-1, 1}), ratgeom::qvec({15L * p.k - 4, 8})});
  const RationalPolyhedron segment =
      ratgeom::make_polyhedron(2, {ratgeom::qvec({0, 0}), ratgeom::qvec({1, 0})}, sigma);

  auto collide = [&](QVec vertex, int copies) {
    RationalPolyhedron poly = ratgeom::make_polyhedron(2, {std::move(vertex)}, sigma);
    for (int i = 0; i < copies; ++i) poly = ratgeom::minkowski_sum(poly, segment);
    return poly;
  };

  std::vector<std::pair<MarkedPoint, RationalPolyhedron>> terms;
  terms.emplace_back(MarkedPoint::zero(),
                     collide(ratgeom::qvec_r({Rational(2, 5), Rational(1, 5)}), p.m));
  terms.emplace_back(MarkedPoint::infinity(),
                     collide(ratgeom::qvec_r({Rational(-2, 3), Rational(1, 3)}), p.mp));
  for (const Rational& y : p.generic_positions)
    terms.emplace_back(MarkedPoint::finite(y), segment);

  return make_divisor(std::move(sigma), std::move(terms));
}

// ---------------------------------------------------------- Hilbert function

long long hilbert_dim(const PolyhedralDivisor& D, const QVec& m) {
  if (!ratgeom::cone_contains(D.dual_tail, m))
    throw OutsideMomentCone("weight outside the dual tail cone");
  Integer total(1);
  for (const auto& [p, poly] : D.terms) total += floor_q(support_or_throw(poly, m));
  if (total < 0) return 0;
  return total.convert_to<long long>();
}

// ------------------------------------------------------------- degenerations

namespace {

QVec lift(const QVec& v, long height) {
  QVec out = v;
  out.emplace_back(height);
  return out;
}

}  // namespace

SpecialTestConfig degenerate_at(const PolyhedralDivisor& D, const MarkedPoint& y,
                                const std::vector<double>& xi,
                                const std::optional<QVec>& xi_exact) {
  if (static_cast<int>(xi.size()) != D.rank)
    throw InvalidParams("Reeb field must have one entry per tail coordinate");
  if (xi_exact && static_cast<int>(xi_exact->size()) != D.rank)
    throw InvalidParams("exact Reeb field must match the tail rank");

  const RationalPolyhedron dy = term_at(D, y);
  const RationalPolyhedron rest = sum_away_from(D, y);

  std::vector<QVec> rays;
  for (const QVec& v : dy.vertices) rays.push_back(lift(v, 1));
  for (const QVec& w : rest.vertices) rays.push_back(lift(w, -1));
  for (const QVec& r : D.tail.rays) rays.push_back(lift(r, 0));

  RationalCone lifted = ratgeom::make_cone(D.rank + 1, std::move(rays));
  if (!ratgeom::is_strictly_convex(lifted))
    throw ImproperDegeneration("lifted cone at y=" + y.str() + " is not strictly convex");

  SpecialTestConfig tc;
  tc.central = toric::make_toric(std::move(lifted));
  if (!tc.central.gorenstein_u)
    throw ImproperDegeneration("central fiber at y=" + y.str() +
                               " fails the Q-Gorenstein solve");
  tc.xi_lift = xi;
  tc.xi_lift.push_back(0.0);
  if (xi_exact) {
    QVec e = *xi_exact;
    e.emplace_back(0);
    tc.xi_lift_exact = std::move(e);
  }
  // Degeneration direction: minus the lift coordinate. The one-parameter
  // subgroup contracting the family onto the y-fiber weights the section of
  // height lambda by -lambda, so the volume derivative carries the sign
  // matching the normalized-volume monotonicity of the worked family.
  tc.eta = QVec(D.rank + 1, Rational(0));
  tc.eta.back() = -1;
  tc.source = "y=" + y.str();
  return tc;
}

// ------------------------------------------------------------ flatness proxy

ConstancyReport hilbert_constancy_check(const PolyhedralDivisor& D, const SpecialTestConfig& tc,
                                        const QVec& xi, const Rational& cutoff) {
  if (tc.product) throw InvalidParams("constancy check applies to degenerations");
  if (tc.central.n != D.rank + 1)
    throw InvalidParams("test configuration does not match the divisor rank");

  QVec xi_lift = xi;
  xi_lift.emplace_back(0);
  std::map<QVec, long long> central_counts;
  for (const QVec& p : ratgeom::lattice_points_under_level(tc.central.dual, xi_lift, cutoff))
    ++central_counts[QVec(p.begin(), p.begin() + D.rank)];

  ConstancyReport rep;
  rep.ok = true;
  std::set<QVec> general_weights;
  for (const QVec& m : ratgeom::lattice_points_under_level(D.dual_tail, xi, cutoff)) {
    general_weights.insert(m);
    const long long want = hilbert_dim(D, m);
    const auto it = central_counts.find(m);
    const long long got = it == central_counts.end() ? 0 : it->second;
    if (want != got) {
      rep.ok = false;
      rep.mismatches.push_back(m);
    }
  }
  for (const auto& [m, count] : central_counts)
    if (count > 0 && !general_weights.count(m)) {
      rep.ok = false;
      rep.mismatches.push_back(m);
    }
  return rep;
}

// --------------------------------------------------------- candidate points

MarkedPoint pick_generic(const PolyhedralDivisor& D) {
  for (long i = 1;; ++i) {
    MarkedPoint y = MarkedPoint::finite(Rational(i));
    bool used = false;
    for (const auto& [p, poly] : D.terms) used = used || p == y;
    if (!used) return y;
  }
}

std::vector<MarkedPoint> candidate_points(const PolyhedralDivisor& D) {
  std::vector<MarkedPoint> pts;
  pts.reserve(D.terms.size() + 1);
  for (const auto& [p, poly] : D.terms) pts.push_back(p);
  pts.push_back(pick_generic(D));
  return pts;
}

QVec interior_sample(const PolyhedralDivisor& D) {
  QVec s(D.rank, Rational(0));
  for (const QVec& r : D.tail.rays) s = ratgeom::add(s, r);
  return ratgeom::primitivize(s);
}

// ------------------------------------------------- general fiber quantities

namespace {

template <class Visit>
auto first_flat_degeneration(const PolyhedralDivisor& D, const QVec& gate,
                             const Rational& cutoff, Visit&& visit) {
  std::vector<double> gate_f(gate.size());
  for (std::size_t i = 0; i < gate.size(); ++i) gate_f[i] = to_double(gate[i]);
  for (const MarkedPoint& y : candidate_points(D)) {
    SpecialTestConfig tc;
    try {
      tc = degenerate_at(D, y, gate_f, gate);
    } catch (const ImproperDegeneration&) {
      continue;
    }
    if (!hilbert_constancy_check(D, tc, gate, cutoff).ok) continue;
    return visit(tc);
  }
  throw NoFlatDegeneration("no candidate point passes the constancy check at cutoff " +
                           format_rational(cutoff));
}

}  // namespace

Rational general_fiber_a0(const PolyhedralDivisor& D, const QVec& xi, const Rational& cutoff) {
  return first_flat_degeneration(
      D, xi, cutoff, [](const SpecialTestConfig& tc) {
        return toric::a0(tc.central, *tc.xi_lift_exact);
      });
}

reebopt::VolumeModel cx1_model(const PolyhedralDivisor& D, const Rational& cutoff) {
  return first_flat_degeneration(
      D, interior_sample(D), cutoff, [&](const SpecialTestConfig& tc) {
        reebopt::VolumeModel M;
        M.n = D.rank + 1;
        M.rank = D.rank;
        M.gauge = QVec(tc.central.gorenstein_u->begin(),
                       tc.central.gorenstein_u->begin() + D.rank);
        if (ratgeom::is_zero(M.gauge))
          throw NotFano("gauge covector vanishes on the base lattice");
        M.pieces = toric::project_pieces(tc.central.pieces, D.rank);
        M.domain_rays = D.tail.rays;
        return M;
      });
}

}  // namespace conevol::cxone
