#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "rebol/common.hpp"
#include "rebol/embedding.hpp"

namespace rebol::gp {

struct KernelParams {
  double signal_variance = 1.0;  // sigma_s^2
  double length_scale = 1.0;     // ell
  double noise_variance = 1.0;   // sigma_n^2
  double jitter = 1e-8;          // numerical stabilizer on the diagonal

  void validate() const;
};

enum class Provenance { initial_query, reformulation, oracle };

const char* to_string(Provenance p);

struct Observation {
  Eigen::VectorXd location;  // z^i, dimension m
  double value = 0.0;        // y^i, within [0, value_bound]
  Provenance provenance = Provenance::oracle;
  std::string doc_id;  // present iff provenance == oracle
};

/// RBF kernel: signal_variance * exp(-||a-b||^2 / (2 * length_scale^2)).
double rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
           const KernelParams& params);
double rbf(std::span<const float> a, std::span<const float> b,
           const KernelParams& params);

/// Zero-mean Gaussian-process regression over embedding space.
///
/// Maintains the lower Cholesky factor of (K + (noise_variance+jitter)·I)
/// and the cached solve alpha = (K + noise·I)^{-1} y. Batches are
/// appended with a block Cholesky update; the result matches a
/// from-scratch factorization to round-off. Mean and variance follow the
/// standard predictive equations:
///   mean(x')     = k'ᵀ (K + noise·I)^{-1} y
///   variance(x') = k(x',x') - k'ᵀ (K + noise·I)^{-1} k'
/// The jitter stabilizes the factorization only; solves refine it away,
/// so predictions track the jitter-free equations to round-off whenever
/// (K + noise·I) is well conditioned.
///
/// A posterior with zero observations predicts mean 0 and variance
/// signal_variance everywhere. Value-semantic: copy to get a scratch
/// posterior (Kriging Believer does exactly that). Not internally
/// synchronized; one writer at a time, reads see a complete state because
/// insert fully replaces the factor before returning.
class GpPosterior {
 public:
  explicit GpPosterior(KernelParams params = {}, double value_bound = 3.0);

  /// Appends a batch of observations. Throws on dimension mismatch,
  /// non-finite input, value outside [0, value_bound], or Cholesky
  /// breakdown (after one automatic retry with 10x jitter).
  void insert(const std::vector<Observation>& batch);

  /// Predictive mean at each row of `points` (n×m).
  Eigen::VectorXd predict_mean(const Eigen::Ref<const Eigen::MatrixXd>& points) const;
  /// Predictive variance at each row of `points`; clamped into
  /// [0, signal_variance] against round-off.
  Eigen::VectorXd predict_variance(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

  /// Mean/variance over every row of an embedding store.
  std::vector<double> predict_mean(const EmbeddingStore& store) const;
  std::vector<double> predict_variance(const EmbeddingStore& store) const;

  double predict_mean_at(const Eigen::VectorXd& point) const;
  double predict_variance_at(const Eigen::VectorXd& point) const;

  std::size_t size() const { return observations_.size(); }
  const std::vector<Observation>& observations() const { return observations_; }
  const KernelParams& params() const { return params_; }
  double value_bound() const { return value_bound_; }
  /// Lower-triangular factor of (K + (noise+jitter)·I); t×t.
  const Eigen::MatrixXd& cholesky_factor() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

 private:
  void refresh_alpha();
  Eigen::MatrixXd solve_gram(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;
  Eigen::MatrixXd cross_kernel(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

  KernelParams params_;
  double value_bound_;
  std::vector<Observation> observations_;
  Eigen::MatrixXd locations_;  // t×m, rows mirror observations_
  Eigen::MatrixXd chol_;       // t×t lower triangular
  Eigen::VectorXd alpha_;      // (K + noise·I)^{-1} y
};

}  // namespace rebol::gp
