#pragma once

// Test-only reference implementations, deliberately naive and independent
// of the production code path: the GP predictions use an explicit matrix
// inverse at long double precision (no Cholesky, no jitter), and the
// Kriging Believer reference rebuilds that dense solve from scratch at
// every step.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rebol/acquisition.hpp"
#include "rebol/embedding.hpp"
#include "rebol/gp.hpp"

namespace rebol_test {

class NaiveGp {
 public:
  explicit NaiveGp(rebol::gp::KernelParams params) : params_(params) {}

  void add(const Eigen::VectorXd& location, double value);
  double mean_at(const Eigen::VectorXd& x) const;
  double variance_at(const Eigen::VectorXd& x) const;
  std::size_t size() const { return locations_.size(); }

 private:
  long double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> inverse_gram() const;

  rebol::gp::KernelParams params_;
  std::vector<Eigen::VectorXd> locations_;
  std::vector<double> values_;
};

/// Full-refactorization Kriging Believer: at each of B steps, scores all
/// eligible docs with a fresh dense solve, picks the argmax (ties to the
/// smaller id), and adds the clamped posterior mean as a pretend
/// observation. Supports greedy and ucb kinds.
std::vector<std::string> naive_kriging_believer(
    const NaiveGp& seeded, const rebol::EmbeddingStore& store,
    const rebol::acq::IdSet& excluded, const rebol::acq::AcquisitionConfig& config,
    double value_bound);

}  // namespace rebol_test
