#include "support/naive_gp.hpp"

#include <algorithm>
#include <cmath>

namespace rebol_test {

using MatrixLd = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorLd = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

void NaiveGp::add(const Eigen::VectorXd& location, double value) {
  locations_.push_back(location);
  values_.push_back(value);
}

long double NaiveGp::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  long double sq = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
    sq += d * d;
  }
  long double ell = static_cast<long double>(params_.length_scale);
  return static_cast<long double>(params_.signal_variance) *
         std::exp(-sq / (2.0L * ell * ell));
}

MatrixLd NaiveGp::inverse_gram() const {
  const Eigen::Index t = static_cast<Eigen::Index>(locations_.size());
  MatrixLd gram(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) {
      gram(i, j) = kernel(locations_[static_cast<std::size_t>(i)],
                          locations_[static_cast<std::size_t>(j)]);
    }
    gram(i, i) += static_cast<long double>(params_.noise_variance);
  }
  return gram.inverse();
}

double NaiveGp::mean_at(const Eigen::VectorXd& x) const {
  if (locations_.empty()) return 0.0;
  const Eigen::Index t = static_cast<Eigen::Index>(locations_.size());
  VectorLd k(t), y(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    k[i] = kernel(x, locations_[static_cast<std::size_t>(i)]);
    y[i] = static_cast<long double>(values_[static_cast<std::size_t>(i)]);
  }
  return static_cast<double>(k.dot(inverse_gram() * y));
}

double NaiveGp::variance_at(const Eigen::VectorXd& x) const {
  if (locations_.empty()) return params_.signal_variance;
  const Eigen::Index t = static_cast<Eigen::Index>(locations_.size());
  VectorLd k(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    k[i] = kernel(x, locations_[static_cast<std::size_t>(i)]);
  }
  long double var = kernel(x, x) - k.dot(inverse_gram() * k);
  return static_cast<double>(var);
}

std::vector<std::string> naive_kriging_believer(
    const NaiveGp& seeded, const rebol::EmbeddingStore& store,
    const rebol::acq::IdSet& excluded, const rebol::acq::AcquisitionConfig& config,
    double value_bound) {
  NaiveGp gp = seeded;
  rebol::acq::IdSet taken = excluded;
  std::vector<std::string> out;

  auto embedding_of = [&](std::size_t row) {
    auto span = store.row(row);
    Eigen::VectorXd v(static_cast<Eigen::Index>(span.size()));
    for (std::size_t j = 0; j < span.size(); ++j) v[static_cast<Eigen::Index>(j)] = span[j];
    return v;
  };

  for (int step = 0; step < config.batch_size; ++step) {
    bool found = false;
    double best_score = 0.0;
    std::size_t best_row = 0;
    for (std::size_t i = 0; i < store.count(); ++i) {
      if (taken.count(store.id(i))) continue;
      Eigen::VectorXd x = embedding_of(i);
      double score = gp.mean_at(x);
      if (config.kind == rebol::acq::Kind::ucb) {
        score += std::sqrt(config.beta) * std::sqrt(std::max(0.0, gp.variance_at(x)));
      }
      bool wins = !found || score > best_score ||
                  (score == best_score && store.id(i) < store.id(best_row));
      if (wins) {
        found = true;
        best_score = score;
        best_row = i;
      }
    }
    if (!found) break;

    const std::string& id = store.id(best_row);
    out.push_back(id);
    taken.insert(id);
    if (step + 1 < config.batch_size) {
      Eigen::VectorXd x = embedding_of(best_row);
      gp.add(x, std::clamp(gp.mean_at(x), 0.0, value_bound));
    }
  }
  return out;
}

}  // namespace rebol_test
