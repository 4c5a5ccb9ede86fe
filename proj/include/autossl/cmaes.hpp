#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "autossl/error.hpp"
#include "autossl/rng.hpp"

namespace autossl {

// (mu/mu_w, lambda)-CMA-ES maximizing a black-box fitness over the box [lo, hi]^n.
//
// Strategy parameters are the default values of Hansen's CMA-ES tutorial.
// Samples outside the box are clipped, and the clipped points are what gets
// evaluated and fed back into the update.
class CmaEs {
 public:
  CmaEs(Eigen::VectorXd mean, double sigma0, int population, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
      : n_(static_cast<int>(mean.size())), lambda_(population), seed_(seed), lo_(lo), hi_(hi),
        mean_(std::move(mean)), sigma_(sigma0) {
    if (n_ < 1) throw ConfigError("CMA-ES: dimension must be >= 1");
    if (lambda_ < 2) throw ConfigError("CMA-ES: population must be >= 2");
    if (!(sigma0 > 0.0)) throw ConfigError("CMA-ES: sigma0 must be positive");
    const double n = n_;
    mu_ = lambda_ / 2;
    weights_.resize(mu_);
    for (int i = 0; i < mu_; ++i) weights_(i) = std::log(mu_ + 0.5) - std::log(i + 1.0);
    weights_ /= weights_.sum();
    mu_eff_ = 1.0 / weights_.squaredNorm();
    c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
    d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
    c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
    c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
    c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
    chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    p_sigma_ = Eigen::VectorXd::Zero(n_);
    p_c_ = Eigen::VectorXd::Zero(n_);
    cov_ = Eigen::MatrixXd::Identity(n_, n_);
    basis_ = Eigen::MatrixXd::Identity(n_, n_);
    scales_ = Eigen::VectorXd::Ones(n_);
  }

  int dimension() const { return n_; }
  int population() const { return lambda_; }
  int generation() const { return generation_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  double sigma() const { return sigma_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  Eigen::VectorXd eigenvalues() const { return scales_.array().square(); }

  // Samples `population` candidates from N(m, sigma^2 C), clipped to the box.
  // Deterministic in (seed, generation); does not mutate the state.
  std::vector<Eigen::VectorXd> ask() const {
    RngStream rng = RngStream(seed_).derive(static_cast<std::uint64_t>(generation_));
    std::vector<Eigen::VectorXd> out;
    out.reserve(lambda_);
    Eigen::VectorXd z(n_);
    for (int k = 0; k < lambda_; ++k) {
      for (int i = 0; i < n_; ++i) z(i) = rng.normal();
      Eigen::VectorXd x = mean_ + sigma_ * (basis_ * scales_.cwiseProduct(z));
      out.push_back(x.cwiseMax(lo_).cwiseMin(hi_));
    }
    return out;
  }

  // Rank-based update from candidate fitnesses (higher is better).
  void tell(const std::vector<Eigen::VectorXd>& candidates, std::span<const double> fitness) {
    if (static_cast<int>(candidates.size()) != lambda_ || static_cast<int>(fitness.size()) != lambda_) {
      throw DimensionError("CMA-ES tell: expected " + std::to_string(lambda_) + " candidates and fitnesses");
    }
    const double n = n_;
    std::vector<int> order(lambda_);
    std::iota(order.begin(), order.end(), 0);
    // NaN ranks with -inf; ties broken by the candidate vector so evaluation order is irrelevant.
    auto key = [&](int i) { return std::isnan(fitness[i]) ? -INFINITY : fitness[i]; };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (key(a) != key(b)) return key(a) > key(b);
      const auto& ca = candidates[a];
      const auto& cb = candidates[b];
      return std::lexicographical_compare(ca.data(), ca.data() + ca.size(), cb.data(), cb.data() + cb.size());
    });
    ++generation_;
    if (key(order.front()) == key(order.back())) {
      // Flat fitness: keep the distribution, widen the step.
      sigma_ = std::min(sigma_ * std::exp(0.2 + c_sigma_ / d_sigma_), kMaxSigma);
      return;
    }

    const Eigen::VectorXd old_mean = mean_;
    Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < mu_; ++i) new_mean += weights_(i) * candidates[order[i]];
    mean_ = new_mean;
    const Eigen::VectorXd y_w = (mean_ - old_mean) / sigma_;

    const Eigen::MatrixXd inv_sqrt_c = basis_ * scales_.cwiseInverse().asDiagonal() * basis_.transpose();
    p_sigma_ = (1.0 - c_sigma_) * p_sigma_ + std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * (inv_sqrt_c * y_w);
    const double ps_norm = p_sigma_.norm();
    const double denom = std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
    const bool h_sigma = ps_norm / denom < (1.4 + 2.0 / (n + 1.0)) * chi_n_;
    p_c_ = (1.0 - c_c_) * p_c_;
    if (h_sigma) p_c_ += std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < mu_; ++i) {
      const Eigen::VectorXd y = (candidates[order[i]] - old_mean) / sigma_;
      rank_mu += weights_(i) * y * y.transpose();
    }
    const double delta_h = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
    cov_ = (1.0 - c_1_ - c_mu_) * cov_ + c_1_ * (p_c_ * p_c_.transpose() + delta_h * cov_) + c_mu_ * rank_mu;

    sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
    sigma_ = std::clamp(sigma_, kMinSigma, kMaxSigma);
    decompose();
  }

 private:
  static constexpr double kMinSigma = 1e-300;
  static constexpr double kMaxSigma = 1e6;

  // Symmetrize C, then floor its eigenvalues so it stays positive definite.
  void decompose() {
    cov_ = 0.5 * (cov_ + cov_.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
    Eigen::VectorXd vals = eig.eigenvalues();
    const double floor = std::max(vals.maxCoeff(), 1e-300) * 1e-14;
    bool repaired = false;
    for (int i = 0; i < n_; ++i) {
      if (!(vals(i) > floor)) {
        vals(i) = floor;
        repaired = true;
      }
    }
    basis_ = eig.eigenvectors();
    if (repaired) {
      cov_ = basis_ * vals.asDiagonal() * basis_.transpose();
      cov_ = 0.5 * (cov_ + cov_.transpose());
    }
    scales_ = vals.cwiseSqrt();
  }

  int n_;
  int lambda_;
  int mu_ = 0;
  std::uint64_t seed_;
  double lo_, hi_;
  Eigen::VectorXd weights_;
  double mu_eff_ = 0, c_sigma_ = 0, d_sigma_ = 0, c_c_ = 0, c_1_ = 0, c_mu_ = 0, chi_n_ = 0;
  Eigen::VectorXd mean_;
  double sigma_;
  Eigen::VectorXd p_sigma_, p_c_;
  Eigen::MatrixXd cov_, basis_;
  Eigen::VectorXd scales_;
  int generation_ = 0;
};

}  // namespace autossl
