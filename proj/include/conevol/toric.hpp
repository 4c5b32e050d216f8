#pragma once

// Toric Fano cone model: Gorenstein covector and log discrepancy, closed-form
// index-character coefficients a0/a1 with gradients and Hessian, truncated
// series and truncated local volume oracles, normalized volume, monomial
// valuations. The closed forms run over the half-open triangulation of the
// moment cone; each piece contributes rational functions of the Reeb field,
// evaluated either exactly (rational Reeb fields) or in doubles.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "conevol/errors.hpp"
#include "conevol/ratgeom.hpp"

namespace conevol::toric {

// Piece data for the coefficient formulas: generators u_j of a half-open
// simplicial piece and the lattice points p of its fundamental
// parallelepiped. Coordinates may be projections of a higher-dimensional
// triangulation (used by degenerations, where the Reeb field has a zero
// component); the formulas only consume pairings, so projected data
// evaluates the original coefficient at the embedded Reeb field.
struct Piece {
  std::vector<QVec> generators;
  std::vector<QVec> points;
};

std::vector<Piece> make_pieces(const std::vector<ratgeom::HalfOpenSimplicialCone>& tri);

// Drops all but the first `keep` coordinates of every generator and point.
std::vector<Piece> project_pieces(const std::vector<Piece>& pieces, int keep);

// Pairing helper shared by the exact and float paths.
template <class S>
S pair_with(const QVec& v, const std::vector<S>& xi) {
  S p{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if constexpr (std::is_same_v<S, double>)
      p += to_double(v[i]) * xi[i];
    else
      p += v[i] * xi[i];
  }
  return p;
}

// a0(xi) = sum over pieces of N / prod_j <u_j, xi>. Throws ReebConeViolation
// unless every generator pairing is strictly positive.
template <class S>
S pieces_a0(const std::vector<Piece>& pieces, const std::vector<S>& xi);

// a1(xi) = sum over pieces of
//   (2 sum_p <p, xi> - N sum_j <u_j, xi>) / prod_j <u_j, xi>,
// the coefficient pairing in F(xi,t) = a0/t^n - a1/(2 t^(n-1)) + O(t^(2-n)).
template <class S>
S pieces_a1(const std::vector<Piece>& pieces, const std::vector<S>& xi);

template <class S>
std::vector<S> pieces_grad_a0(const std::vector<Piece>& pieces, const std::vector<S>& xi);

template <class S>
std::vector<S> pieces_grad_a1(const std::vector<Piece>& pieces, const std::vector<S>& xi);

Eigen::MatrixXd pieces_hess_a0(const std::vector<Piece>& pieces, const std::vector<double>& xi);

// ------------------------------------------------------------------ variety

struct ToricConeVariety {
  ratgeom::RationalCone sigma;              // in N
  ratgeom::RationalCone dual;               // moment cone in M
  std::vector<Piece> pieces;                // half-open triangulation of dual
  std::optional<QVec> gorenstein_u;         // <ray, u> = 1 when consistent
  int n = 0;                                // ambient dimension
};

// Validates full-dimensionality and strict convexity, caches the dual cone,
// its half-open triangulation and the Gorenstein solve.
ToricConeVariety make_toric(ratgeom::RationalCone sigma);

// The unique u with <v, u> = 1 on all primitive rays v of sigma, when the
// system is consistent; nullopt otherwise.
std::optional<QVec> gorenstein_covector(const ratgeom::RationalCone& sigma);

// Reeb cone membership: xi interior to sigma, i.e. strictly positive against
// every ray of the moment cone.
bool reeb_contains(const ToricConeVariety& X, const QVec& xi);
bool reeb_contains(const ToricConeVariety& X, const std::vector<double>& xi);

// A(xi) = <xi, gorenstein_u>. Throws NotQGorenstein when no covector exists.
Rational log_discrepancy(const ToricConeVariety& X, const QVec& xi);
double log_discrepancy(const ToricConeVariety& X, const std::vector<double>& xi);

Rational a0(const ToricConeVariety& X, const QVec& xi);
double a0(const ToricConeVariety& X, const std::vector<double>& xi);
Rational a1(const ToricConeVariety& X, const QVec& xi);
double a1(const ToricConeVariety& X, const std::vector<double>& xi);

QVec grad_a0(const ToricConeVariety& X, const QVec& xi);
std::vector<double> grad_a0(const ToricConeVariety& X, const std::vector<double>& xi);
QVec grad_a1(const ToricConeVariety& X, const QVec& xi);
std::vector<double> grad_a1(const ToricConeVariety& X, const std::vector<double>& xi);
Eigen::MatrixXd hess_a0(const ToricConeVariety& X, const std::vector<double>& xi);

// Partial sum of F(xi, t) = sum exp(-t <m, xi>) over lattice points of the
// moment cone with <m, xi> < cutoff.
double truncated_index_character(const ToricConeVariety& X, const std::vector<double>& xi,
                                 double t, double cutoff);

// n! #{m : <m, xi> < c} / c^n; converges to a0 as c grows.
double local_volume_truncated(const ToricConeVariety& X, const std::vector<double>& xi,
                              double c);

// A(xi)^n a0(xi); scale-invariant.
Rational normalized_volume(const ToricConeVariety& X, const QVec& xi);
double normalized_volume(const ToricConeVariety& X, const std::vector<double>& xi);

// val_xi of a function with the given monomial support: min <m, xi>.
Rational monomial_valuation(const ToricConeVariety& X, const QVec& xi,
                            const std::vector<QVec>& support);
double monomial_valuation(const ToricConeVariety& X, const std::vector<double>& xi,
                          const std::vector<QVec>& support);

}  // namespace conevol::toric
