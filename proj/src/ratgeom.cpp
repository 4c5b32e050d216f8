#include "conevol/ratgeom.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <numeric>

namespace conevol {

Rational parse_rational(const std::string& s) {
  // [+-]? digits ( '/' digits )?   -- anything else (notably decimals) is rejected.
  auto fail = [&] { throw ParseError("not a rational literal: '" + s + "'"); };
  if (s.empty()) fail();
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (digits == 0) fail();
  if (i == s.size()) return Rational(s[0] == '+' ? s.substr(1) : s);
  if (s[i] != '/') fail();
  ++i;
  std::size_t ddigits = 0;
  std::size_t dstart = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++ddigits;
  if (ddigits == 0 || i != s.size()) fail();
  Integer den(s.substr(dstart));
  if (den == 0) fail();
  std::size_t nstart = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  Rational q(Integer(s.substr(nstart, dstart - 1 - nstart)), den);
  return s[0] == '-' ? -q : q;
}

std::string format_rational(const Rational& q) { return q.str(); }

Rational rational_reconstruct(double x, const Integer& max_den) {
  Rational r(x);
  // Continued-fraction convergents of the exact dyadic value; return the
  // last convergent whose denominator fits the cap.
  Integer h0 = 1, h1 = floor_q(r);   // numerators
  Integer k0 = 0, k1 = 1;            // denominators
  Rational frac = r - Rational(h1);
  Rational best = Rational(h1);
  while (frac != 0) {
    Rational inv = Rational(1) / frac;
    Integer a = floor_q(inv);
    frac = inv - Rational(a);
    Integer h2 = a * h1 + h0;
    Integer k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    best = Rational(h1) / Rational(k1);
  }
  return best;
}

}  // namespace conevol

namespace conevol::ratgeom {

// ---------------------------------------------------------------- vectors

QVec qvec(std::initializer_list<long> v) {
  QVec out;
  out.reserve(v.size());
  for (long x : v) out.emplace_back(x);
  return out;
}

QVec qvec_r(std::initializer_list<Rational> v) { return QVec(v); }

Rational dot(const QVec& a, const QVec& b) {
  assert(a.size() == b.size());
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

QVec add(const QVec& a, const QVec& b) {
  QVec out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

QVec sub(const QVec& a, const QVec& b) {
  QVec out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

QVec scale(const QVec& a, const Rational& c) {
  QVec out(a);
  for (auto& x : out) x *= c;
  return out;
}

bool is_zero(const QVec& a) {
  return std::all_of(a.begin(), a.end(), [](const Rational& x) { return x == 0; });
}

bool lex_less(const QVec& a, const QVec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

QVec primitivize(const QVec& v) {
  if (is_zero(v)) throw DegenerateGenerators("zero vector has no primitive representative");
  Integer l = 1;
  for (const auto& x : v) l = boost::multiprecision::lcm(l, den(x));
  Integer g = 0;
  for (const auto& x : v) g = boost::multiprecision::gcd(g, Integer(num(x) * (l / den(x))));
  QVec out(v);
  Rational f = Rational(l) / Rational(g);
  for (auto& x : out) x *= f;
  return out;
}

// ----------------------------------------------------- exact linear algebra

namespace {

// Row echelon reduction in place; returns pivot column per row consumed.
std::vector<int> echelon(QMat& m) {
  std::vector<int> pivots;
  if (m.empty()) return pivots;
  std::size_t cols = m[0].size();
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
    std::size_t sel = row;
    while (sel < m.size() && m[sel][col] == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[row], m[sel]);
    Rational inv = Rational(1) / m[row][col];
    for (auto& x : m[row]) x *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][col] == 0) continue;
      Rational f = m[r][col];
      for (std::size_t c2 = 0; c2 < cols; ++c2) m[r][c2] -= f * m[row][c2];
    }
    pivots.push_back(static_cast<int>(col));
    ++row;
  }
  return pivots;
}

}  // namespace

int rank_of(const std::vector<QVec>& vecs) {
  QMat m(vecs);
  return static_cast<int>(echelon(m).size());
}

std::optional<QVec> solve_linear(const QMat& rows, const QVec& rhs, bool* unique) {
  assert(rows.size() == rhs.size());
  std::size_t n = rows.empty() ? 0 : rows[0].size();
  QMat aug(rows);
  for (std::size_t i = 0; i < aug.size(); ++i) aug[i].push_back(rhs[i]);
  std::vector<int> pivots = echelon(aug);
  // Inconsistent iff a pivot lands in the rhs column.
  for (int p : pivots)
    if (p == static_cast<int>(n)) return std::nullopt;
  QVec x(n, Rational(0));
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug[r][n];
  if (unique) *unique = pivots.size() == n;
  return x;
}

std::vector<QVec> kernel_basis(const QVec& u) {
  std::size_t n = u.size();
  std::size_t lead = n;
  for (std::size_t i = 0; i < n; ++i)
    if (u[i] != 0) { lead = i; break; }
  std::vector<QVec> basis;
  if (lead == n) {  // zero covector: kernel is everything
    for (std::size_t i = 0; i < n; ++i) {
      QVec e(n, Rational(0));
      e[i] = 1;
      basis.push_back(e);
    }
    return basis;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i == lead) continue;
    QVec v(n, Rational(0));
    v[i] = u[lead];
    v[lead] = -u[i];
    basis.push_back(primitivize(v));
  }
  return basis;
}

Rational det_columns(const std::vector<QVec>& cols) {
  std::size_t d = cols.size();
  assert(d > 0 && cols[0].size() == d);
  QMat m(d, QVec(d, Rational(0)));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) m[i][j] = cols[j][i];
  Rational det = 1;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t sel = col;
    while (sel < d && m[sel][col] == 0) ++sel;
    if (sel == d) return Rational(0);
    if (sel != col) {
      std::swap(m[col], m[sel]);
      det = -det;
    }
    det *= m[col][col];
    Rational inv = Rational(1) / m[col][col];
    for (std::size_t r = col + 1; r < d; ++r) {
      if (m[r][col] == 0) continue;
      Rational f = m[r][col] * inv;
      for (std::size_t c2 = col; c2 < d; ++c2) m[r][c2] -= f * m[col][c2];
    }
  }
  return det;
}

QMat inverse_columns(const std::vector<QVec>& cols) {
  std::size_t d = cols.size();
  assert(d > 0 && cols[0].size() == d);
  // Augment [G | I] with G's columns given; reduce; read off rows of G^{-1}.
  QMat aug(d, QVec(2 * d, Rational(0)));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) aug[i][j] = cols[j][i];
  for (std::size_t i = 0; i < d; ++i) aug[i][d + i] = 1;
  std::vector<int> pivots = echelon(aug);
  if (pivots.size() != d || pivots.back() >= static_cast<int>(d))
    throw DegenerateGenerators("matrix is singular");
  QMat inv(d, QVec(d, Rational(0)));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) inv[i][j] = aug[i][d + j];
  return inv;
}

// ------------------------------------------------------------------- cones

namespace {

// Membership via conic Caratheodory: v lies in cone(rays) iff it is a
// nonnegative combination of some linearly independent subset.
bool contains_impl(int dim, const std::vector<QVec>& rays, const QVec& v) {
  if (is_zero(v)) return true;
  std::size_t k = rays.size();
  std::size_t maxs = std::min<std::size_t>(k, static_cast<std::size_t>(dim));
  std::vector<std::size_t> idx;
  std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t want) {
    if (want == 0) {
      QMat cols;
      for (std::size_t i : idx) cols.push_back(rays[i]);
      if (rank_of(cols) != static_cast<int>(idx.size())) return false;
      // Solve sum c_i rays[idx[i]] = v with the rays as matrix columns.
      QMat rows(v.size(), QVec(idx.size(), Rational(0)));
      for (std::size_t j = 0; j < idx.size(); ++j)
        for (std::size_t i = 0; i < v.size(); ++i) rows[i][j] = rays[idx[j]][i];
      auto sol = solve_linear(rows, v);
      if (!sol) return false;
      for (const auto& c : *sol)
        if (c < 0) return false;
      return true;
    }
    for (std::size_t i = start; i + want <= k; ++i) {
      idx.push_back(i);
      if (rec(i + 1, want - 1)) return true;
      idx.pop_back();
    }
    return false;
  };
  for (std::size_t s = 1; s <= maxs; ++s)
    if (rec(0, s)) return true;
  return false;
}

}  // namespace

bool cone_contains(const RationalCone& c, const QVec& v) {
  return contains_impl(c.dim, c.rays, v);
}

RationalCone make_cone(int dim, std::vector<QVec> rays) {
  for (auto& r : rays) {
    if (static_cast<int>(r.size()) != dim)
      throw InvalidParams("ray dimension mismatch");
    r = primitivize(r);  // throws on a zero ray
  }
  std::sort(rays.begin(), rays.end(), lex_less);
  rays.erase(std::unique(rays.begin(), rays.end()), rays.end());
  // Prune rays interior to the cone of the others, to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; j < rays.size(); ++j) {
      std::vector<QVec> others;
      for (std::size_t i = 0; i < rays.size(); ++i)
        if (i != j) others.push_back(rays[i]);
      if (contains_impl(dim, others, rays[j])) {
        rays.erase(rays.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  return RationalCone{dim, std::move(rays)};
}

bool is_full_dimensional(const RationalCone& c) { return rank_of(c.rays) == c.dim; }

// --------------------------------------------------- double description

namespace {

struct DDRay {
  QVec v;
  std::vector<char> tight;  // tight[i]: <normals[i], v> == 0
};

struct DDResult {
  std::vector<QVec> lineality;
  std::vector<DDRay> rays;
};

// Extreme rays (modulo lineality) of {x : <n, x> >= 0 for all n in normals}.
DDResult dd_intersect(int dim, const std::vector<QVec>& normals_in) {
  std::vector<QVec> normals;
  for (const auto& n : normals_in)
    if (!is_zero(n)) normals.push_back(n);

  DDResult st;
  for (int i = 0; i < dim; ++i) {
    QVec e(static_cast<std::size_t>(dim), Rational(0));
    e[static_cast<std::size_t>(i)] = 1;
    st.lineality.push_back(e);
  }

  for (std::size_t i = 0; i < normals.size(); ++i) {
    const QVec& a = normals[i];
    // Lineality reduction first: rotate one basis vector into a ray.
    std::size_t hit = st.lineality.size();
    for (std::size_t l = 0; l < st.lineality.size(); ++l)
      if (dot(a, st.lineality[l]) != 0) { hit = l; break; }
    if (hit != st.lineality.size()) {
      QVec l0 = st.lineality[hit];
      if (dot(a, l0) < 0) l0 = scale(l0, Rational(-1));
      Rational al0 = dot(a, l0);
      std::vector<QVec> newlin;
      for (std::size_t l = 0; l < st.lineality.size(); ++l) {
        if (l == hit) continue;
        newlin.push_back(sub(st.lineality[l], scale(l0, dot(a, st.lineality[l]) / al0)));
      }
      st.lineality = std::move(newlin);
      for (auto& r : st.rays) {
        r.v = sub(r.v, scale(l0, dot(a, r.v) / al0));
        r.tight.push_back(1);
      }
      DDRay nr;
      nr.v = primitivize(l0);
      nr.tight.assign(i, 1);  // a lineality vector was tight on everything before
      nr.tight.push_back(0);
      st.rays.push_back(std::move(nr));
      continue;
    }
    // Motzkin step.
    std::vector<DDRay> pos, zero, neg;
    for (auto& r : st.rays) {
      Rational s = dot(a, r.v);
      if (s > 0) pos.push_back(std::move(r));
      else if (s == 0) zero.push_back(std::move(r));
      else neg.push_back(std::move(r));
    }
    auto adjacent = [&](const DDRay& p, const DDRay& n) {
      std::vector<char> meet(i, 0);
      for (std::size_t t = 0; t < i; ++t) meet[t] = p.tight[t] && n.tight[t];
      for (const auto& grp : {std::cref(pos), std::cref(zero), std::cref(neg)}) {
        for (const DDRay& r : grp.get()) {
          if (&r == &p || &r == &n) continue;
          bool super = true;
          for (std::size_t t = 0; t < i; ++t)
            if (meet[t] && !r.tight[t]) { super = false; break; }
          if (super) return false;
        }
      }
      return true;
    };
    std::vector<DDRay> fresh;
    for (const auto& p : pos) {
      for (const auto& n : neg) {
        // The combinatorial adjacency oracle stays valid modulo the current
        // lineality space: all processed normals vanish on it, so tight
        // sets describe the quotient cone, whose representation is minimal.
        if (adjacent(p, n)) {
          QVec w = sub(scale(n.v, dot(a, p.v)), scale(p.v, dot(a, n.v)));
          if (is_zero(w)) continue;
          DDRay nr;
          nr.v = primitivize(w);
          nr.tight.resize(i + 1, 0);
          for (std::size_t t = 0; t < i; ++t) nr.tight[t] = p.tight[t] && n.tight[t];
          nr.tight[i] = 1;
          fresh.push_back(std::move(nr));
        }
      }
    }
    std::vector<DDRay> out;
    for (auto& r : pos) { r.tight.push_back(0); out.push_back(std::move(r)); }
    for (auto& r : zero) { r.tight.push_back(1); out.push_back(std::move(r)); }
    for (auto& r : fresh) out.push_back(std::move(r));
    st.rays = std::move(out);
  }
  return st;
}

}  // namespace

RationalCone dual_cone(const RationalCone& c) {
  DDResult dd = dd_intersect(c.dim, c.rays);
  std::vector<QVec> rays;
  for (const auto& r : dd.rays) rays.push_back(r.v);
  for (const auto& l : dd.lineality) {
    rays.push_back(l);
    rays.push_back(scale(l, Rational(-1)));
  }
  // make_cone prunes any non-extreme leftovers exactly.
  return make_cone(c.dim, std::move(rays));
}

bool is_strictly_convex(const RationalCone& c) {
  return is_full_dimensional(dual_cone(c));
}

// ----------------------------------------------------------------- polyhedra

RationalPolyhedron make_polyhedron(int dim, std::vector<QVec> vertices, RationalCone tail) {
  if (vertices.empty()) throw InvalidParams("polyhedron needs at least one vertex");
  if (tail.dim != dim) throw InvalidParams("tail dimension mismatch");
  for (const auto& v : vertices)
    if (static_cast<int>(v.size()) != dim) throw InvalidParams("vertex dimension mismatch");
  std::sort(vertices.begin(), vertices.end(), lex_less);
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  // v is redundant iff (v,1) lies in cone({(v',1)} u {(t,0)}).
  bool changed = true;
  while (changed && vertices.size() > 1) {
    changed = false;
    for (std::size_t j = 0; j < vertices.size(); ++j) {
      std::vector<QVec> gens;
      for (std::size_t i = 0; i < vertices.size(); ++i) {
        if (i == j) continue;
        QVec g = vertices[i];
        g.push_back(1);
        gens.push_back(std::move(g));
      }
      for (const auto& t : tail.rays) {
        QVec g = t;
        g.push_back(0);
        gens.push_back(std::move(g));
      }
      QVec target = vertices[j];
      target.push_back(1);
      if (contains_impl(dim + 1, gens, target)) {
        vertices.erase(vertices.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  return RationalPolyhedron{dim, std::move(vertices), std::move(tail)};
}

std::optional<Rational> support_eval(const RationalPolyhedron& p, const QVec& m) {
  for (const auto& r : p.tail.rays)
    if (dot(m, r) < 0) return std::nullopt;
  std::optional<Rational> best;
  for (const auto& v : p.vertices) {
    Rational val = dot(m, v);
    if (!best || val < *best) best = val;
  }
  return best;
}

RationalPolyhedron minkowski_sum(const RationalPolyhedron& a, const RationalPolyhedron& b) {
  if (!(a.tail == b.tail))
    throw TailMismatch("Minkowski sum requires identical tail cones");
  std::vector<QVec> verts;
  for (const auto& va : a.vertices)
    for (const auto& vb : b.vertices) verts.push_back(add(va, vb));
  return make_polyhedron(a.dim, std::move(verts), a.tail);
}

// --------------------------------------------- half-open simplicial pieces

std::vector<QVec> fundamental_parallelepiped(const std::vector<QVec>& generators,
                                             const std::vector<bool>& excluded) {
  std::size_t d = generators.size();
  assert(excluded.size() == d);
  Rational detv = det_columns(generators);
  if (detv == 0) throw DegenerateGenerators("parallelepiped generators are dependent");
  QMat inv = inverse_columns(generators);
  // Bounding box over the 2^d parallelepiped corners.
  QVec lo(d, Rational(0)), hi(d, Rational(0));
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    QVec corner(d, Rational(0));
    for (std::size_t j = 0; j < d; ++j)
      if (mask & (std::size_t{1} << j)) corner = add(corner, generators[j]);
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], corner[i]);
      hi[i] = std::max(hi[i], corner[i]);
    }
  }
  std::vector<Integer> lob(d), hib(d);
  for (std::size_t i = 0; i < d; ++i) {
    lob[i] = floor_q(lo[i]);
    hib[i] = floor_q(hi[i]) + 1;
  }
  std::vector<QVec> points;
  std::vector<Integer> x(d);
  std::function<void(std::size_t)> scan = [&](std::size_t axis) {
    if (axis == d) {
      QVec xq(d);
      for (std::size_t i = 0; i < d; ++i) xq[i] = Rational(x[i]);
      for (std::size_t j = 0; j < d; ++j) {
        Rational t = dot(inv[j], xq);
        bool ok = excluded[j] ? (t > 0 && t <= 1) : (t >= 0 && t < 1);
        if (!ok) return;
      }
      points.push_back(xq);
      return;
    }
    for (Integer v = lob[axis]; v <= hib[axis]; ++v) {
      x[axis] = v;
      scan(axis + 1);
    }
  };
  scan(0);
  assert(Integer(points.size()) == boost::multiprecision::abs(num(detv)));
  std::sort(points.begin(), points.end(), lex_less);
  return points;
}

namespace {

// Pulling triangulation into simplicial pieces spanned by the input rays;
// returns index sets into `rays`. `rays` must generate a pointed cone of
// the given rank with irredundant generators.
std::vector<std::vector<int>> pull_triangulate(const std::vector<QVec>& rays, int rank,
                                               bool apex_last) {
  if (static_cast<int>(rays.size()) == rank) {
    std::vector<int> all(rays.size());
    std::iota(all.begin(), all.end(), 0);
    return {all};
  }
  int apex = apex_last ? static_cast<int>(rays.size()) - 1 : 0;
  std::vector<std::vector<int>> out;
  // Facet normals: extreme rays of the dual within the span. First express
  // the rays in a basis of their span so the dual computation is full-rank.
  std::vector<QVec> basis;
  for (const auto& r : rays) {
    std::vector<QVec> trial = basis;
    trial.push_back(r);
    if (rank_of(trial) > static_cast<int>(basis.size())) basis.push_back(r);
  }
  assert(static_cast<int>(basis.size()) == rank);
  QMat rows(rays[0].size(), QVec(basis.size(), Rational(0)));
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t i = 0; i < rays[0].size(); ++i) rows[i][j] = basis[j][i];
  std::vector<QVec> coords;
  for (const auto& r : rays) {
    auto c = solve_linear(rows, r);
    assert(c);
    coords.push_back(*c);
  }
  DDResult dd = dd_intersect(rank, coords);
  assert(dd.lineality.empty());
  for (const auto& h : dd.rays) {
    // Facet {x : <h,x> = 0} of the coordinate cone; skip facets through the apex.
    if (dot(h.v, coords[static_cast<std::size_t>(apex)]) == 0) continue;
    std::vector<int> fidx;
    std::vector<QVec> fcoords;
    for (std::size_t r = 0; r < coords.size(); ++r) {
      if (dot(h.v, coords[r]) == 0) {
        fidx.push_back(static_cast<int>(r));
        fcoords.push_back(coords[r]);
      }
    }
    assert(rank_of(fcoords) == rank - 1);
    for (const auto& sub : pull_triangulate(fcoords, rank - 1, apex_last)) {
      std::vector<int> simplex;
      simplex.reserve(sub.size() + 1);
      for (int s : sub) simplex.push_back(fidx[static_cast<std::size_t>(s)]);
      simplex.push_back(apex);
      std::sort(simplex.begin(), simplex.end());
      out.push_back(std::move(simplex));
    }
  }
  return out;
}

// Sign of <h, w + (eps, eps^2, ...)> for infinitesimal eps > 0.
int perturbed_sign(const QVec& h, const QVec& w) {
  Rational base = dot(h, w);
  if (base != 0) return base > 0 ? 1 : -1;
  for (const auto& x : h) {
    if (x != 0) return x > 0 ? 1 : -1;
  }
  return 0;
}

}  // namespace

std::vector<HalfOpenSimplicialCone> triangulate_halfopen(const RationalCone& c, bool apex_last) {
  if (!is_full_dimensional(c))
    throw NotFullDimensional("triangulation requires a full-dimensional cone");
  if (!is_strictly_convex(c))
    throw NotFullDimensional("triangulation requires a strictly convex cone");
  std::vector<std::vector<int>> simplices =
      pull_triangulate(c.rays, c.dim, apex_last);
  QVec w(static_cast<std::size_t>(c.dim), Rational(0));
  for (const auto& r : c.rays) w = add(w, r);  // interior reference point
  std::vector<HalfOpenSimplicialCone> out;
  for (const auto& simplex : simplices) {
    HalfOpenSimplicialCone piece;
    for (int i : simplex) piece.generators.push_back(c.rays[static_cast<std::size_t>(i)]);
    QMat inv = inverse_columns(piece.generators);
    piece.excluded.resize(piece.generators.size());
    for (std::size_t j = 0; j < piece.generators.size(); ++j) {
      QVec h = primitivize(inv[j]);  // inward normal of the facet opposite g_j
      int s = perturbed_sign(h, w);
      assert(s != 0);
      piece.excluded[j] = s < 0;
    }
    piece.parallelepiped = fundamental_parallelepiped(piece.generators, piece.excluded);
    out.push_back(std::move(piece));
  }
  return out;
}

// -------------------------------------------------------------- enumeration

namespace {

template <typename Scalar, typename VecT>
std::vector<QVec> enumerate_impl(const RationalCone& c, const VecT& xi, Scalar cutoff) {
  for (const auto& r : c.rays) {
    Scalar p{};
    for (std::size_t i = 0; i < r.size(); ++i) {
      if constexpr (std::is_same_v<Scalar, double>)
        p += to_double(r[i]) * xi[i];
      else
        p += r[i] * xi[i];
    }
    if (!(p > Scalar(0)))
      throw NonPositiveDirection("direction is not strictly positive on the cone");
  }
  std::vector<QVec> out;
  if (!(Scalar(0) < cutoff)) return out;
  auto pieces = triangulate_halfopen(c);
  std::size_t d = static_cast<std::size_t>(c.dim);
  auto pair_with = [&](const QVec& v) {
    Scalar p{};
    for (std::size_t i = 0; i < d; ++i) {
      if constexpr (std::is_same_v<Scalar, double>)
        p += to_double(v[i]) * xi[i];
      else
        p += v[i] * xi[i];
    }
    return p;
  };
  for (const auto& piece : pieces) {
    std::vector<Scalar> a;
    for (const auto& g : piece.generators) a.push_back(pair_with(g));
    for (const auto& p : piece.parallelepiped) {
      Scalar base = pair_with(p);
      QVec point = p;
      // Odometer over nonnegative combinations below the cutoff.
      std::function<void(std::size_t, const QVec&, Scalar)> rec =
          [&](std::size_t j, const QVec& cur, Scalar lvl) {
            if (j == d) {
              if (lvl < cutoff) out.push_back(cur);
              return;
            }
            QVec next = cur;
            Scalar l2 = lvl;
            while (l2 < cutoff) {
              rec(j + 1, next, l2);
              next = add(next, piece.generators[j]);
              l2 += a[j];
            }
          };
      rec(0, point, base);
    }
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

}  // namespace

std::vector<QVec> lattice_points_under_level(const RationalCone& c, const QVec& xi,
                                             const Rational& cutoff) {
  return enumerate_impl<Rational>(c, xi, cutoff);
}

std::vector<QVec> lattice_points_under_level(const RationalCone& c,
                                             const std::vector<double>& xi, double cutoff) {
  return enumerate_impl<double>(c, xi, cutoff);
}

void for_each_level_under(const RationalCone& c, const std::vector<double>& xi,
                          double cutoff, const std::function<void(double)>& fn) {
  std::size_t d = static_cast<std::size_t>(c.dim);
  auto pair_with = [&](const QVec& v) {
    double p = 0;
    for (std::size_t i = 0; i < d; ++i) p += to_double(v[i]) * xi[i];
    return p;
  };
  for (const auto& r : c.rays)
    if (!(pair_with(r) > 0))
      throw NonPositiveDirection("direction is not strictly positive on the cone");
  if (!(cutoff > 0)) return;
  for (const auto& piece : triangulate_halfopen(c)) {
    std::vector<double> a;
    for (const auto& g : piece.generators) a.push_back(pair_with(g));
    for (const auto& p : piece.parallelepiped) {
      // Odometer over nonnegative combinations below the cutoff, levels only.
      std::function<void(std::size_t, double)> rec = [&](std::size_t j, double lvl) {
        if (j == d) {
          fn(lvl);
          return;
        }
        for (double l2 = lvl; l2 < cutoff; l2 += a[j]) rec(j + 1, l2);
      };
      rec(0, pair_with(p));
    }
  }
}

}  // namespace conevol::ratgeom
