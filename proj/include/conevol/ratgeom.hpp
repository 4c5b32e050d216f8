#pragma once

// Exact rational polyhedral kernel: cones, polyhedra with common tail cone,
// dual cones by double description, half-open triangulations with
// fundamental parallelepipeds, support evaluation, Minkowski sums, and
// lattice-point enumeration below a Reeb level. Everything combinatorial is
// exact; doubles appear only in the float enumeration overload.

#include <functional>
#include <optional>
#include <vector>

#include "conevol/rational.hpp"

namespace conevol::ratgeom {

// ---------------------------------------------------------------- vectors

QVec qvec(std::initializer_list<long> v);
QVec qvec_r(std::initializer_list<Rational> v);
Rational dot(const QVec& a, const QVec& b);
QVec add(const QVec& a, const QVec& b);
QVec sub(const QVec& a, const QVec& b);
QVec scale(const QVec& a, const Rational& c);
bool is_zero(const QVec& a);
bool lex_less(const QVec& a, const QVec& b);

// Scales a nonzero rational vector to the primitive integer vector on the
// same ray (gcd of entries 1, direction preserved).
QVec primitivize(const QVec& v);

// ----------------------------------------------------- exact linear algebra

// Rank of the span of the given vectors.
int rank_of(const std::vector<QVec>& vecs);

// Solves A x = b exactly (A given as rows); nullopt if inconsistent. When
// the solution space is positive-dimensional an arbitrary member is
// returned and *unique is set to false.
std::optional<QVec> solve_linear(const QMat& rows, const QVec& rhs, bool* unique = nullptr);

// Basis of the kernel of the single covector u (vectors x with <u,x> = 0).
std::vector<QVec> kernel_basis(const QVec& u);

// Determinant of a square matrix given as columns.
Rational det_columns(const std::vector<QVec>& cols);

// Inverse of a square nonsingular matrix given as columns.
QMat inverse_columns(const std::vector<QVec>& cols);

// ------------------------------------------------------------------- cones

// Cone spanned by finitely many rays. Canonical form: rays are nonzero,
// primitive integer, irredundant (none lies in the cone of the others) and
// lexicographically sorted. Strict convexity is queryable, not assumed.
struct RationalCone {
  int dim = 0;
  std::vector<QVec> rays;

  bool operator==(const RationalCone& o) const { return dim == o.dim && rays == o.rays; }
};

// Canonicalizing constructor: primitivizes, dedupes, prunes redundant rays,
// sorts. Throws DegenerateGenerators on a zero ray.
RationalCone make_cone(int dim, std::vector<QVec> rays);

// Membership v in cone(rays), exact (Caratheodory enumeration over
// linearly independent ray subsets; ambient dimensions here are tiny).
bool cone_contains(const RationalCone& c, const QVec& v);

bool is_full_dimensional(const RationalCone& c);

// {x : <x, r> >= 0 for all rays r of c}. Lineality directions of the dual
// (present when c is not full-dimensional) are emitted as opposite ray
// pairs. Involutive on full-dimensional strictly convex cones.
RationalCone dual_cone(const RationalCone& c);

// c is strictly convex iff its dual is full-dimensional.
bool is_strictly_convex(const RationalCone& c);

// ----------------------------------------------------------------- polyhedra

// conv(vertices) + tail. Canonical form: vertices irredundant and sorted;
// tail canonical.
struct RationalPolyhedron {
  int dim = 0;
  std::vector<QVec> vertices;
  RationalCone tail;

  bool operator==(const RationalPolyhedron& o) const {
    return dim == o.dim && vertices == o.vertices && tail == o.tail;
  }
};

RationalPolyhedron make_polyhedron(int dim, std::vector<QVec> vertices, RationalCone tail);

// min over the polyhedron of <m, .>; nullopt encodes -infinity (m negative
// on some tail direction). Attained at a vertex otherwise.
std::optional<Rational> support_eval(const RationalPolyhedron& p, const QVec& m);

// Vertex-sum Minkowski sum; throws TailMismatch unless tails agree.
RationalPolyhedron minkowski_sum(const RationalPolyhedron& a, const RationalPolyhedron& b);

// --------------------------------------------- half-open simplicial pieces

// Simplicial cone with generators g_1..g_d (linearly independent primitive
// integer vectors); excluded[j] marks the facet spanned by the generators
// other than g_j as open. parallelepiped holds the lattice points of
// { sum t_j g_j : t_j in [0,1), or (0,1] when excluded[j] }.
struct HalfOpenSimplicialCone {
  std::vector<QVec> generators;
  std::vector<bool> excluded;
  std::vector<QVec> parallelepiped;
};

// Lattice points of the half-open fundamental parallelepiped. The count
// always equals |det(generators)|.
std::vector<QVec> fundamental_parallelepiped(const std::vector<QVec>& generators,
                                             const std::vector<bool>& excluded);

// Half-open triangulation of a full-dimensional strictly convex cone: the
// pieces' lattice points partition the lattice points of c. Facet openness
// comes from visibility against a symbolically perturbed interior reference
// point (the ray sum), so shared facets land in exactly one piece.
// apex_last selects a different pulling order, giving an independent
// triangulation of the same cone for cross-checks.
std::vector<HalfOpenSimplicialCone> triangulate_halfopen(const RationalCone& c,
                                                         bool apex_last = false);

// -------------------------------------------------------------- enumeration

// Lattice points m of c with <xi, m> < cutoff; requires xi strictly
// positive on c minus the origin (throws NonPositiveDirection otherwise).
std::vector<QVec> lattice_points_under_level(const RationalCone& c, const QVec& xi,
                                             const Rational& cutoff);

// Float-level variant for irrational Reeb fields: the same enumeration with
// the level inequality tested in doubles.
std::vector<QVec> lattice_points_under_level(const RationalCone& c,
                                             const std::vector<double>& xi, double cutoff);

// Streaming variant for large cutoffs: visits the level <xi, m> of every
// lattice point m of c with level < cutoff, without materializing m. Same
// domain guard as above.
void for_each_level_under(const RationalCone& c, const std::vector<double>& xi,
                          double cutoff, const std::function<void(double)>& fn);

}  // namespace conevol::ratgeom
