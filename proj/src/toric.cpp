#include "conevol/toric.hpp"

#include <cmath>

namespace conevol::toric {

using ratgeom::RationalCone;

std::vector<Piece> make_pieces(const std::vector<ratgeom::HalfOpenSimplicialCone>& tri) {
  std::vector<Piece> out;
  for (const auto& t : tri) out.push_back({t.generators, t.parallelepiped});
  return out;
}

std::vector<Piece> project_pieces(const std::vector<Piece>& pieces, int keep) {
  std::vector<Piece> out;
  for (const auto& pc : pieces) {
    Piece q;
    for (const auto& g : pc.generators)
      q.generators.emplace_back(g.begin(), g.begin() + keep);
    for (const auto& p : pc.points) q.points.emplace_back(p.begin(), p.begin() + keep);
    out.push_back(std::move(q));
  }
  return out;
}

namespace {

template <class S>
std::vector<S> piece_pairings(const Piece& pc, const std::vector<S>& xi) {
  std::vector<S> s;
  for (const auto& g : pc.generators) {
    s.push_back(pair_with(g, xi));
    if (!(s.back() > S(0)))
      throw ReebConeViolation("Reeb field is not strictly positive on a piece generator");
  }
  return s;
}

}  // namespace

template <class S>
S pieces_a0(const std::vector<Piece>& pieces, const std::vector<S>& xi) {
  S total{};
  for (const auto& pc : pieces) {
    auto s = piece_pairings(pc, xi);
    S prod{1};
    for (const auto& v : s) prod *= v;
    total += S(static_cast<long>(pc.points.size())) / prod;
  }
  return total;
}

template <class S>
S pieces_a1(const std::vector<Piece>& pieces, const std::vector<S>& xi) {
  S total{};
  for (const auto& pc : pieces) {
    auto s = piece_pairings(pc, xi);
    S prod{1}, gensum{};
    for (const auto& v : s) prod *= v, gensum += v;
    S ptsum{};
    for (const auto& p : pc.points) ptsum += pair_with(p, xi);
    total += (S(2) * ptsum - S(static_cast<long>(pc.points.size())) * gensum) / prod;
  }
  return total;
}

template <class S>
std::vector<S> pieces_grad_a0(const std::vector<Piece>& pieces, const std::vector<S>& xi) {
  std::vector<S> g(xi.size(), S{});
  for (const auto& pc : pieces) {
    auto s = piece_pairings(pc, xi);
    S prod{1};
    for (const auto& v : s) prod *= v;
    S term = S(static_cast<long>(pc.points.size())) / prod;
    // d/dxi_k of N/prod = -term * sum_j u_jk / s_j.
    for (std::size_t k = 0; k < xi.size(); ++k) {
      S acc{};
      for (std::size_t j = 0; j < s.size(); ++j) {
        if constexpr (std::is_same_v<S, double>)
          acc += to_double(pc.generators[j][k]) / s[j];
        else
          acc += pc.generators[j][k] / s[j];
      }
      g[k] -= term * acc;
    }
  }
  return g;
}

template <class S>
std::vector<S> pieces_grad_a1(const std::vector<Piece>& pieces, const std::vector<S>& xi) {
  std::vector<S> g(xi.size(), S{});
  for (const auto& pc : pieces) {
    auto s = piece_pairings(pc, xi);
    S prod{1}, gensum{};
    for (const auto& v : s) prod *= v, gensum += v;
    S ptsum{};
    for (const auto& p : pc.points) ptsum += pair_with(p, xi);
    S count = S(static_cast<long>(pc.points.size()));
    S numer = S(2) * ptsum - count * gensum;
    for (std::size_t k = 0; k < xi.size(); ++k) {
      S psum_k{}, gsum_k{}, logd{};
      for (const auto& p : pc.points) {
        if constexpr (std::is_same_v<S, double>)
          psum_k += to_double(p[k]);
        else
          psum_k += p[k];
      }
      for (std::size_t j = 0; j < s.size(); ++j) {
        if constexpr (std::is_same_v<S, double>) {
          gsum_k += to_double(pc.generators[j][k]);
          logd += to_double(pc.generators[j][k]) / s[j];
        } else {
          gsum_k += pc.generators[j][k];
          logd += pc.generators[j][k] / s[j];
        }
      }
      g[k] += (S(2) * psum_k - count * gsum_k - numer * logd) / prod;
    }
  }
  return g;
}

Eigen::MatrixXd pieces_hess_a0(const std::vector<Piece>& pieces,
                               const std::vector<double>& xi) {
  auto d = static_cast<Eigen::Index>(xi.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (const auto& pc : pieces) {
    auto s = piece_pairings(pc, xi);
    double prod = 1;
    for (double v : s) prod *= v;
    double term = static_cast<double>(pc.points.size()) / prod;
    Eigen::VectorXd l = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t j = 0; j < s.size(); ++j) {
      Eigen::VectorXd u(d);
      for (Eigen::Index k = 0; k < d; ++k)
        u[k] = to_double(pc.generators[j][static_cast<std::size_t>(k)]);
      l += u / s[j];
      q += (u * u.transpose()) / (s[j] * s[j]);
    }
    H += term * (l * l.transpose() + q);
  }
  return H;
}

template Rational pieces_a0<Rational>(const std::vector<Piece>&, const std::vector<Rational>&);
template double pieces_a0<double>(const std::vector<Piece>&, const std::vector<double>&);
template Rational pieces_a1<Rational>(const std::vector<Piece>&, const std::vector<Rational>&);
template double pieces_a1<double>(const std::vector<Piece>&, const std::vector<double>&);
template std::vector<Rational> pieces_grad_a0<Rational>(const std::vector<Piece>&,
                                                        const std::vector<Rational>&);
template std::vector<double> pieces_grad_a0<double>(const std::vector<Piece>&,
                                                    const std::vector<double>&);
template std::vector<Rational> pieces_grad_a1<Rational>(const std::vector<Piece>&,
                                                        const std::vector<Rational>&);
template std::vector<double> pieces_grad_a1<double>(const std::vector<Piece>&,
                                                    const std::vector<double>&);

// ------------------------------------------------------------------ variety

std::optional<QVec> gorenstein_covector(const RationalCone& sigma) {
  QVec rhs(sigma.rays.size(), Rational(1));
  return ratgeom::solve_linear(sigma.rays, rhs);
}

ToricConeVariety make_toric(RationalCone sigma) {
  if (!ratgeom::is_full_dimensional(sigma))
    throw NotFullDimensional("toric cone must be full-dimensional");
  if (!ratgeom::is_strictly_convex(sigma))
    throw DegenerateGenerators("toric cone must be strictly convex");
  ToricConeVariety X;
  X.n = sigma.dim;
  X.dual = ratgeom::dual_cone(sigma);
  X.pieces = make_pieces(ratgeom::triangulate_halfopen(X.dual));
  X.gorenstein_u = gorenstein_covector(sigma);
  X.sigma = std::move(sigma);
  return X;
}

namespace {

const QVec& require_gorenstein(const ToricConeVariety& X) {
  if (!X.gorenstein_u)
    throw NotQGorenstein("cone admits no rational Gorenstein covector");
  return *X.gorenstein_u;
}

}  // namespace

bool reeb_contains(const ToricConeVariety& X, const QVec& xi) {
  for (const auto& m : X.dual.rays)
    if (!(ratgeom::dot(m, xi) > 0)) return false;
  return true;
}

bool reeb_contains(const ToricConeVariety& X, const std::vector<double>& xi) {
  for (const auto& m : X.dual.rays)
    if (!(pair_with(m, xi) > 0)) return false;
  return true;
}

Rational log_discrepancy(const ToricConeVariety& X, const QVec& xi) {
  return ratgeom::dot(require_gorenstein(X), xi);
}

double log_discrepancy(const ToricConeVariety& X, const std::vector<double>& xi) {
  return pair_with(require_gorenstein(X), xi);
}

Rational a0(const ToricConeVariety& X, const QVec& xi) { return pieces_a0(X.pieces, xi); }
double a0(const ToricConeVariety& X, const std::vector<double>& xi) {
  return pieces_a0(X.pieces, xi);
}
Rational a1(const ToricConeVariety& X, const QVec& xi) { return pieces_a1(X.pieces, xi); }
double a1(const ToricConeVariety& X, const std::vector<double>& xi) {
  return pieces_a1(X.pieces, xi);
}

QVec grad_a0(const ToricConeVariety& X, const QVec& xi) {
  return pieces_grad_a0(X.pieces, xi);
}
std::vector<double> grad_a0(const ToricConeVariety& X, const std::vector<double>& xi) {
  return pieces_grad_a0(X.pieces, xi);
}
QVec grad_a1(const ToricConeVariety& X, const QVec& xi) {
  return pieces_grad_a1(X.pieces, xi);
}
std::vector<double> grad_a1(const ToricConeVariety& X, const std::vector<double>& xi) {
  return pieces_grad_a1(X.pieces, xi);
}
Eigen::MatrixXd hess_a0(const ToricConeVariety& X, const std::vector<double>& xi) {
  return pieces_hess_a0(X.pieces, xi);
}

double truncated_index_character(const ToricConeVariety& X, const std::vector<double>& xi,
                                 double t, double cutoff) {
  if (!(t > 0)) throw InvalidParams("t must be positive");
  if (!reeb_contains(X, xi))
    throw ReebConeViolation("Reeb field outside the Reeb cone");
  double sum = 0;
  ratgeom::for_each_level_under(X.dual, xi, cutoff,
                                [&](double lvl) { sum += std::exp(-t * lvl); });
  return sum;
}

double local_volume_truncated(const ToricConeVariety& X, const std::vector<double>& xi,
                              double c) {
  if (!reeb_contains(X, xi))
    throw ReebConeViolation("Reeb field outside the Reeb cone");
  long long count = 0;
  ratgeom::for_each_level_under(X.dual, xi, c, [&](double) { ++count; });
  double nf = 1;
  for (int k = 2; k <= X.n; ++k) nf *= k;
  return nf * static_cast<double>(count) / std::pow(c, X.n);
}

Rational normalized_volume(const ToricConeVariety& X, const QVec& xi) {
  Rational A = log_discrepancy(X, xi);
  Rational v = a0(X, xi);
  Rational out = v;
  for (int k = 0; k < X.n; ++k) out *= A;
  return out;
}

double normalized_volume(const ToricConeVariety& X, const std::vector<double>& xi) {
  return std::pow(log_discrepancy(X, xi), X.n) * a0(X, xi);
}

Rational monomial_valuation(const ToricConeVariety&, const QVec& xi,
                            const std::vector<QVec>& support) {
  if (support.empty()) throw EmptySupport("valuation needs a nonempty support");
  Rational best = ratgeom::dot(support[0], xi);
  for (const auto& m : support) best = std::min(best, ratgeom::dot(m, xi));
  return best;
}

double monomial_valuation(const ToricConeVariety&, const std::vector<double>& xi,
                          const std::vector<QVec>& support) {
  if (support.empty()) throw EmptySupport("valuation needs a nonempty support");
  double best = pair_with(support[0], xi);
  for (const auto& m : support) best = std::min(best, pair_with(m, xi));
  return best;
}

}  // namespace conevol::toric
