#pragma once

// Strictly convex minimization of the normalized volume over the gauge slice
// {A(xi) = n} of the Reeb cone. The objective is a0 restricted to the slice
// (A is constant there, so vhat = n^n a0). Works on a VolumeModel so the
// same Newton drive serves toric cones (Reeb parameters = all of N) and
// complexity-one models (Reeb parameters = the torus factor, with the pieces
// of a flat central fiber projected onto those coordinates).

#include <cstdint>
#include <optional>
#include <utility>

#include "conevol/toric.hpp"

namespace conevol::reebopt {

struct VolumeModel {
  int n = 0;                          // homogeneity order of a0 (= dim of the variety)
  int rank = 0;                       // number of Reeb parameters
  QVec gauge;                         // covector u of the log discrepancy, rank entries
  std::vector<toric::Piece> pieces;   // coefficient data in rank coordinates
  std::vector<QVec> domain_rays;      // rays whose positive spans give interior starts
};

// Model of a toric Fano cone; throws NotFano when the Gorenstein solve fails.
VolumeModel toric_model(const toric::ToricConeVariety& X);

double model_a0(const VolumeModel& M, const std::vector<double>& xi);
Rational model_a0(const VolumeModel& M, const QVec& xi);
double model_a1(const VolumeModel& M, const std::vector<double>& xi);
Rational model_a1(const VolumeModel& M, const QVec& xi);
std::vector<double> model_grad_a0(const VolumeModel& M, const std::vector<double>& xi);
QVec model_grad_a0(const VolumeModel& M, const QVec& xi);
std::vector<double> model_grad_a1(const VolumeModel& M, const std::vector<double>& xi);
QVec model_grad_a1(const VolumeModel& M, const QVec& xi);

// Analytic gradient and Hessian of a0, for the optimizer and its audits.
std::pair<std::vector<double>, Eigen::MatrixXd> volume_gradient_hessian(
    const VolumeModel& M, const std::vector<double>& xi);
std::pair<std::vector<double>, Eigen::MatrixXd> volume_gradient_hessian(
    const toric::ToricConeVariety& X, const std::vector<double>& xi);

struct MinimizerReport {
  std::vector<double> xi_star;
  double vhat = 0;
  double grad_residual = 0;           // slice-projected gradient norm at xi_star
  double hessian_min_eigen = 0;       // of the slice-restricted Hessian at xi_star
  int iterations = 0;                 // Newton steps summed over starts
  int starts = 0;
  bool all_starts_agree = false;
  std::optional<QVec> quasiregular;   // exactly certified rational minimizer
};

// Projected Newton with backtracking line search from `starts` interior
// points (first the ray-sum, then seeded random mixtures). Terminates each
// start when the slice-projected gradient norm is <= tol; throws
// NonConvergence past the iteration cap. All starts must land within
// 10*tol of each other (strict convexity makes the minimizer unique).
MinimizerReport minimize_volume(const VolumeModel& M, double tol = 1e-10, int starts = 8,
                                std::uint64_t seed = 0x5eeb);

MinimizerReport minimize_volume(const toric::ToricConeVariety& X, double tol = 1e-10,
                                int starts = 8, std::uint64_t seed = 0x5eeb);

// Continued-fraction reconstruction of the minimizer with denominators up to
// max_denominator, scaled exactly onto the gauge slice, then certified by
// exact vanishing of the slice-projected gradient. Returns the certified
// rational Reeb field, or nothing when reconstruction or certification fails
// (irregular minimizers are genuinely irrational).
std::optional<QVec> quasiregular_detect(const VolumeModel& M,
                                        const std::vector<double>& xi_star,
                                        const Integer& max_denominator = 1000000);

}  // namespace conevol::reebopt
