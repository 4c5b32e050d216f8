#include "conevol/reebopt.hpp"

#include <cmath>
#include <random>

namespace conevol::reebopt {

VolumeModel toric_model(const toric::ToricConeVariety& X) {
  if (!X.gorenstein_u)
    throw NotFano("cone admits no Gorenstein covector, not a Fano cone");
  VolumeModel M;
  M.n = X.n;
  M.rank = X.n;
  M.gauge = *X.gorenstein_u;
  M.pieces = X.pieces;
  M.domain_rays = X.sigma.rays;
  return M;
}

double model_a0(const VolumeModel& M, const std::vector<double>& xi) {
  return toric::pieces_a0(M.pieces, xi);
}
Rational model_a0(const VolumeModel& M, const QVec& xi) {
  return toric::pieces_a0(M.pieces, xi);
}
double model_a1(const VolumeModel& M, const std::vector<double>& xi) {
  return toric::pieces_a1(M.pieces, xi);
}
Rational model_a1(const VolumeModel& M, const QVec& xi) {
  return toric::pieces_a1(M.pieces, xi);
}
std::vector<double> model_grad_a0(const VolumeModel& M, const std::vector<double>& xi) {
  return toric::pieces_grad_a0(M.pieces, xi);
}
QVec model_grad_a0(const VolumeModel& M, const QVec& xi) {
  return toric::pieces_grad_a0(M.pieces, xi);
}
std::vector<double> model_grad_a1(const VolumeModel& M, const std::vector<double>& xi) {
  return toric::pieces_grad_a1(M.pieces, xi);
}
QVec model_grad_a1(const VolumeModel& M, const QVec& xi) {
  return toric::pieces_grad_a1(M.pieces, xi);
}

std::pair<std::vector<double>, Eigen::MatrixXd> volume_gradient_hessian(
    const VolumeModel& M, const std::vector<double>& xi) {
  return {toric::pieces_grad_a0(M.pieces, xi), toric::pieces_hess_a0(M.pieces, xi)};
}

std::pair<std::vector<double>, Eigen::MatrixXd> volume_gradient_hessian(
    const toric::ToricConeVariety& X, const std::vector<double>& xi) {
  return {toric::grad_a0(X, xi), toric::hess_a0(X, xi)};
}

namespace {

// Orthonormal basis (columns) of the slice tangent space {x : <gauge, x> = 0}.
Eigen::MatrixXd slice_basis(const VolumeModel& M) {
  auto kernel = ratgeom::kernel_basis(M.gauge);
  Eigen::MatrixXd K(M.rank, static_cast<Eigen::Index>(kernel.size()));
  for (Eigen::Index j = 0; j < K.cols(); ++j)
    for (Eigen::Index i = 0; i < K.rows(); ++i)
      K(i, j) = to_double(kernel[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(K.rows(), K.cols());
  return Q;
}

bool interior(const VolumeModel& M, const std::vector<double>& xi) {
  for (const auto& pc : M.pieces)
    for (const auto& g : pc.generators)
      if (!(toric::pair_with(g, xi) > 0)) return false;
  return true;
}

// Positive mixture of the domain rays scaled onto the gauge slice.
std::vector<double> slice_start(const VolumeModel& M, const std::vector<double>& weights) {
  std::vector<double> x(static_cast<std::size_t>(M.rank), 0.0);
  for (std::size_t r = 0; r < M.domain_rays.size(); ++r)
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += weights[r] * to_double(M.domain_rays[r][i]);
  double level = toric::pair_with(M.gauge, x);
  for (auto& v : x) v *= M.n / level;
  return x;
}

struct StartResult {
  std::vector<double> x;
  int iterations;
};

// A couple of full Newton steps past the tolerance: quadratic convergence
// pushes the iterate to machine precision, so independent starts land on
// bitwise-close points even when the slice Hessian is poorly scaled.
std::vector<double> polish(const VolumeModel& M, const Eigen::MatrixXd& V,
                           std::vector<double> x) {
  auto sd = static_cast<std::size_t>(M.rank);
  auto slice_grad = [&](const std::vector<double>& p) {
    auto [g, H] = volume_gradient_hessian(M, p);
    Eigen::VectorXd gd(M.rank);
    for (Eigen::Index i = 0; i < M.rank; ++i) gd[i] = g[static_cast<std::size_t>(i)];
    return std::pair{Eigen::VectorXd(V.transpose() * gd),
                     Eigen::MatrixXd(V.transpose() * H * V)};
  };
  for (int round = 0; round < 3; ++round) {
    auto [gs, Hs] = slice_grad(x);
    Eigen::VectorXd step = Hs.ldlt().solve(-gs);
    if (!step.allFinite()) break;
    Eigen::VectorXd dir = V * step;
    std::vector<double> xn(sd);
    for (std::size_t i = 0; i < sd; ++i)
      xn[i] = x[i] + dir[static_cast<Eigen::Index>(i)];
    if (!interior(M, xn)) break;
    if (slice_grad(xn).first.norm() >= gs.norm()) break;
    x = std::move(xn);
  }
  return x;
}

StartResult newton_from(const VolumeModel& M, const Eigen::MatrixXd& V,
                        std::vector<double> x, double tol) {
  const int cap = 200;
  auto sd = static_cast<std::size_t>(M.rank);
  for (int it = 1; it <= cap; ++it) {
    auto [g, H] = volume_gradient_hessian(M, x);
    Eigen::VectorXd gd(M.rank);
    for (Eigen::Index i = 0; i < M.rank; ++i) gd[i] = g[static_cast<std::size_t>(i)];
    Eigen::VectorXd gs = V.transpose() * gd;
    if (gs.norm() <= tol) return {polish(M, V, x), it - 1};
    Eigen::MatrixXd Hs = V.transpose() * H * V;
    Eigen::VectorXd step = Hs.ldlt().solve(-gs);
    if (!step.allFinite() || step.dot(gs) >= 0) step = -gs;
    Eigen::VectorXd dir = V * step;
    double f0 = model_a0(M, x);
    double slope = gs.dot(step);
    double alpha = 1.0;
    bool moved = false;
    while (alpha > 1e-18) {
      std::vector<double> xn(sd);
      for (std::size_t i = 0; i < sd; ++i)
        xn[i] = x[i] + alpha * dir[static_cast<Eigen::Index>(i)];
      if (interior(M, xn) && model_a0(M, xn) <= f0 + 1e-4 * alpha * slope) {
        x = std::move(xn);
        moved = true;
        break;
      }
      alpha /= 2;
    }
    if (!moved) {
      if (gs.norm() <= 10 * tol) return {polish(M, V, x), it};
      throw NonConvergence("line search stalled before reaching the tolerance");
    }
  }
  throw NonConvergence("iteration cap reached before the gradient tolerance");
}

}  // namespace

MinimizerReport minimize_volume(const VolumeModel& M, double tol, int starts,
                                std::uint64_t seed) {
  if (starts < 1 || !(tol >= 0)) throw InvalidParams("bad minimizer parameters");
  Eigen::MatrixXd V = slice_basis(M);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);

  MinimizerReport rep;
  rep.starts = starts;
  std::vector<std::vector<double>> found;
  for (int s = 0; s < starts; ++s) {
    std::vector<double> w(M.domain_rays.size(), 1.0);
    if (s > 0)
      for (auto& v : w) v = unif(rng);
    auto res = newton_from(M, V, slice_start(M, w), tol);
    rep.iterations += res.iterations;
    found.push_back(std::move(res.x));
  }
  rep.all_starts_agree = true;
  for (const auto& x : found)
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(x[i] - found[0][i]) > 10 * tol) rep.all_starts_agree = false;

  rep.xi_star = found[0];
  auto [g, H] = volume_gradient_hessian(M, rep.xi_star);
  Eigen::VectorXd gd(M.rank);
  for (Eigen::Index i = 0; i < M.rank; ++i) gd[i] = g[static_cast<std::size_t>(i)];
  rep.grad_residual = (V.transpose() * gd).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V.transpose() * H * V);
  rep.hessian_min_eigen = es.eigenvalues().minCoeff();
  rep.vhat = std::pow(static_cast<double>(M.n), M.n) * model_a0(M, rep.xi_star);
  rep.quasiregular = quasiregular_detect(M, rep.xi_star);
  return rep;
}

MinimizerReport minimize_volume(const toric::ToricConeVariety& X, double tol, int starts,
                                std::uint64_t seed) {
  return minimize_volume(toric_model(X), tol, starts, seed);
}

std::optional<QVec> quasiregular_detect(const VolumeModel& M,
                                        const std::vector<double>& xi_star,
                                        const Integer& max_denominator) {
  auto slice_kernel = ratgeom::kernel_basis(M.gauge);
  // Small caps first: the honest rational minimizers have small denominators,
  // while a large cap overfits float noise (and then fails certification).
  std::vector<Integer> caps;
  for (Integer c(10); c < max_denominator; c *= 100) caps.push_back(c);
  caps.push_back(max_denominator);
  for (const auto& cap : caps) {
    QVec q;
    for (double v : xi_star) q.push_back(rational_reconstruct(v, cap));
    // Exact projection onto the gauge slice.
    Rational level = ratgeom::dot(M.gauge, q);
    if (!(level > 0)) continue;
    q = ratgeom::scale(q, Rational(M.n) / level);
    bool ok = true;
    for (const auto& pc : M.pieces) {
      for (const auto& g : pc.generators)
        if (!(ratgeom::dot(g, q) > 0)) { ok = false; break; }
      if (!ok) break;
    }
    if (!ok) continue;
    QVec grad = model_grad_a0(M, q);
    for (const auto& k : slice_kernel)
      if (ratgeom::dot(grad, k) != 0) { ok = false; break; }
    if (ok) return q;
  }
  return std::nullopt;
}

}  // namespace conevol::reebopt
