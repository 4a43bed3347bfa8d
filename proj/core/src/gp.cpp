#include "rebol/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace rebol::gp {

void KernelParams::validate() const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw Error("signal_variance must be positive");
  }
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw Error("length_scale must be positive");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw Error("noise_variance must be non-negative");
  }
  if (!(jitter > 0.0) || !std::isfinite(jitter)) {
    throw Error("jitter must be positive");
  }
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::initial_query: return "initial-query";
    case Provenance::reformulation: return "reformulation";
    case Provenance::oracle: return "oracle";
  }
  return "?";
}

double rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params) {
  if (a.size() != b.size()) {
    throw Error("rbf: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  double sq = (a - b).squaredNorm();
  return params.signal_variance *
         std::exp(-sq / (2.0 * params.length_scale * params.length_scale));
}

double rbf(std::span<const float> a, std::span<const float> b, const KernelParams& params) {
  if (a.size() != b.size()) {
    throw Error("rbf: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - b[i];
    sq += d * d;
  }
  return params.signal_variance *
         std::exp(-sq / (2.0 * params.length_scale * params.length_scale));
}

GpPosterior::GpPosterior(KernelParams params, double value_bound)
    : params_(params), value_bound_(value_bound) {
  params_.validate();
  if (!(value_bound_ > 0.0)) throw Error("value bound must be positive");
}

namespace {

/// sigma_s^2 * exp(-||p_i - x_j||^2 / (2 l^2)) for all row pairs.
Eigen::MatrixXd kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& rows,
                              const Eigen::Ref<const Eigen::MatrixXd>& cols,
                              const KernelParams& params) {
  Eigen::VectorXd rn = rows.rowwise().squaredNorm();
  Eigen::VectorXd cn = cols.rowwise().squaredNorm();
  Eigen::MatrixXd sq = (-2.0 * rows * cols.transpose());
  sq.colwise() += rn;
  sq.rowwise() += cn.transpose();
  sq = sq.cwiseMax(0.0);  // round-off can push tiny distances negative
  double inv = 1.0 / (2.0 * params.length_scale * params.length_scale);
  return params.signal_variance * (-inv * sq).array().exp();
}

}  // namespace

void GpPosterior::insert(const std::vector<Observation>& batch) {
  if (batch.empty()) return;

  const Eigen::Index m = locations_.cols() > 0
                             ? locations_.cols()
                             : static_cast<Eigen::Index>(batch.front().location.size());
  for (const auto& obs : batch) {
    if (obs.location.size() != m) {
      throw Error("insert: observation dimension " + std::to_string(obs.location.size()) +
                  " does not match " + std::to_string(m));
    }
    if (!obs.location.allFinite() || !std::isfinite(obs.value)) {
      throw Error("insert: non-finite observation");
    }
    if (obs.value < 0.0 || obs.value > value_bound_) {
      throw Error("insert: value " + std::to_string(obs.value) + " outside [0, " +
                  std::to_string(value_bound_) + "]");
    }
    bool is_oracle = obs.provenance == Provenance::oracle;
    if (is_oracle != !obs.doc_id.empty()) {
      throw Error("insert: doc_id must be present exactly for oracle observations");
    }
  }

  const Eigen::Index t = static_cast<Eigen::Index>(observations_.size());
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());

  Eigen::MatrixXd all_locations(t + b, m);
  if (t > 0) all_locations.topRows(t) = locations_;
  for (Eigen::Index i = 0; i < b; ++i) {
    all_locations.row(t + i) = batch[i].location.transpose();
  }
  auto new_rows = all_locations.bottomRows(b);

  Eigen::MatrixXd d = kernel_matrix(new_rows, new_rows, params_);
  d.diagonal().array() += params_.noise_variance + params_.jitter;

  bool ok = false;
  Eigen::MatrixXd extended(t + b, t + b);
  if (t == 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(d);
    if (llt.info() == Eigen::Success) {
      extended = llt.matrixL();
      ok = true;
    }
  } else {
    // Block update: the new factor is [[L, 0], [Mᵀ, chol(D - MᵀM)]]
    // with M = L⁻¹ k(old, new).
    Eigen::MatrixXd cross = kernel_matrix(locations_, new_rows, params_);  // t×b
    Eigen::MatrixXd mid = chol_.triangularView<Eigen::Lower>().solve(cross);
    Eigen::MatrixXd schur = d - mid.transpose() * mid;
    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (llt.info() == Eigen::Success) {
      extended.setZero();
      extended.topLeftCorner(t, t) = chol_;
      extended.bottomLeftCorner(b, t) = mid.transpose();
      extended.bottomRightCorner(b, b) = llt.matrixL();
      ok = true;
    }
  }

  double jitter = params_.jitter;
  if (!ok) {
    // One recovery attempt: refactor everything at 10x jitter. The state
    // is committed only once a factor exists, so a throw leaves the
    // posterior as it was.
    jitter *= 10.0;
    Eigen::MatrixXd k = kernel_matrix(all_locations, all_locations, params_);
    k.diagonal().array() += params_.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
      throw Error("Cholesky breakdown with " + std::to_string(t + b) +
                  " observations (jitter " + std::to_string(jitter) + ")");
    }
    extended = llt.matrixL();
  }

  params_.jitter = jitter;
  locations_ = std::move(all_locations);
  observations_.insert(observations_.end(), batch.begin(), batch.end());
  chol_ = std::move(extended);
  refresh_alpha();
}

Eigen::MatrixXd GpPosterior::solve_gram(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  // Solve (K + noise·I) x = rhs through the jittered factor, then remove
  // the jitter bias with one refinement step: the residual of the
  // jitter-free system is exactly jitter·x0.
  auto solve_jittered = [&](const Eigen::MatrixXd& b) {
    Eigen::MatrixXd x = chol_.triangularView<Eigen::Lower>().solve(b);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  };
  Eigen::MatrixXd x = solve_jittered(rhs);
  x += solve_jittered(Eigen::MatrixXd(params_.jitter * x));
  return x;
}

void GpPosterior::refresh_alpha() {
  Eigen::VectorXd y(static_cast<Eigen::Index>(observations_.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = observations_[i].value;
  alpha_ = solve_gram(y);
}

Eigen::MatrixXd GpPosterior::cross_kernel(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (points.cols() != locations_.cols()) {
    throw Error("predict: point dimension " + std::to_string(points.cols()) +
                " does not match " + std::to_string(locations_.cols()));
  }
  return kernel_matrix(points, locations_, params_);
}

Eigen::VectorXd GpPosterior::predict_mean(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (observations_.empty()) return Eigen::VectorXd::Zero(points.rows());
  return cross_kernel(points) * alpha_;
}

Eigen::VectorXd GpPosterior::predict_variance(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (observations_.empty()) {
    return Eigen::VectorXd::Constant(points.rows(), params_.signal_variance);
  }
  Eigen::MatrixXd kstar = cross_kernel(points);              // n×t
  Eigen::MatrixXd w = solve_gram(kstar.transpose());         // t×n
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double var = params_.signal_variance - kstar.row(i).dot(w.col(i));
    out[i] = std::clamp(var, 0.0, params_.signal_variance);
  }
  return out;
}

namespace {

constexpr std::size_t kChunkRows = 1024;

Eigen::MatrixXd chunk_to_matrix(const EmbeddingStore& store, std::size_t begin,
                                std::size_t end) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(end - begin),
                       static_cast<Eigen::Index>(store.dim()));
  for (std::size_t i = begin; i < end; ++i) {
    auto r = store.row(i);
    for (std::size_t j = 0; j < store.dim(); ++j) {
      rows(static_cast<Eigen::Index>(i - begin), static_cast<Eigen::Index>(j)) = r[j];
    }
  }
  return rows;
}

}  // namespace

std::vector<double> GpPosterior::predict_mean(const EmbeddingStore& store) const {
  std::vector<double> out(store.count(), 0.0);
  if (observations_.empty()) return out;
  for (std::size_t begin = 0; begin < store.count(); begin += kChunkRows) {
    std::size_t end = std::min(begin + kChunkRows, store.count());
    Eigen::VectorXd mu = predict_mean(chunk_to_matrix(store, begin, end));
    for (std::size_t i = begin; i < end; ++i) out[i] = mu[static_cast<Eigen::Index>(i - begin)];
  }
  return out;
}

std::vector<double> GpPosterior::predict_variance(const EmbeddingStore& store) const {
  std::vector<double> out(store.count(), params_.signal_variance);
  if (observations_.empty()) return out;
  for (std::size_t begin = 0; begin < store.count(); begin += kChunkRows) {
    std::size_t end = std::min(begin + kChunkRows, store.count());
    Eigen::VectorXd var = predict_variance(chunk_to_matrix(store, begin, end));
    for (std::size_t i = begin; i < end; ++i) out[i] = var[static_cast<Eigen::Index>(i - begin)];
  }
  return out;
}

double GpPosterior::predict_mean_at(const Eigen::VectorXd& point) const {
  return predict_mean(Eigen::MatrixXd(point.transpose()))[0];
}

double GpPosterior::predict_variance_at(const Eigen::VectorXd& point) const {
  return predict_variance(Eigen::MatrixXd(point.transpose()))[0];
}

}  // namespace rebol::gp
