// Copyright 2026 The Storyloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "storyloop/error.hpp"
#include "storyloop/topics.hpp"

namespace storyloop::topics {
namespace {

Eigen::VectorXd unit(const Eigen::VectorXd& v, const char* what) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kZeroVector, std::string(what) + " has zero norm");
  }
  return v / n;
}

}  // namespace

void validate(const TopicModelConfig& c) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (c.topics < 2) fail("topics must be >= 2");
  if (!(c.margin > 0)) fail("margin must be positive");
  if (c.negatives < 1) fail("negatives must be >= 1");
  if (c.ortho_weight < 0) fail("ortho_weight must be >= 0");
  if (!(c.learning_rate > 0)) fail("learning_rate must be positive");
  if (c.epochs < 0) fail("epochs must be >= 0");
}

Eigen::VectorXd topic_weights(const Eigen::VectorXd& x, const Eigen::MatrixXd& r) {
  if (x.size() != r.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input width " + std::to_string(x.size()) +
                    " differs from dictionary width " + std::to_string(r.cols()));
  }
  Eigen::VectorXd logits = r * x;
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd w = logits.array().exp();
  return w / w.sum();
}

Eigen::VectorXd reconstruct(const Eigen::VectorXd& weights,
                            const Eigen::MatrixXd& r) {
  if (weights.size() != r.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "weight count " + std::to_string(weights.size()) +
                    " differs from topic count " + std::to_string(r.rows()));
  }
  return r.transpose() * weights;
}

int argmax_topic(const Eigen::VectorXd& x, const Eigen::MatrixXd& r) {
  Eigen::Index best = 0;
  topic_weights(x, r).maxCoeff(&best);
  return static_cast<int>(best);
}

LossResult loss_and_gradient(const Eigen::VectorXd& x,
                             const std::vector<Eigen::VectorXd>& negatives,
                             const Eigen::MatrixXd& r,
                             const TopicModelConfig& config) {
  if (negatives.empty()) {
    throw Error(ErrorCode::kEmptyInput, "at least one negative is required");
  }
  const Eigen::VectorXd xh = unit(x, "input");
  const Eigen::VectorXd w = topic_weights(xh, r);
  const Eigen::VectorXd rec = r.transpose() * w;

  LossResult out;
  out.gradient = Eigen::MatrixXd::Zero(r.rows(), r.cols());

  // Hinge part. Active terms contribute r.(n^ - x^) = w^T R u.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(r.cols());
  const double pos = rec.dot(xh);
  for (const Eigen::VectorXd& n : negatives) {
    if (n.size() != x.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "negative width mismatch");
    }
    const Eigen::VectorXd nh = unit(n, "negative");
    const double h = config.margin - pos + rec.dot(nh);
    if (h > 0) {
      out.hinge += h;
      u += nh - xh;
    }
  }
  if (out.hinge > 0) {
    const Eigen::VectorXd g = r * u;  // dL/dw
    const Eigen::VectorXd dlogits = w.array() * (g.array() - w.dot(g));
    out.gradient += w * u.transpose() + dlogits * xh.transpose();
  }

  // Orthogonality penalty on the row-normalised dictionary.
  if (config.ortho_weight > 0) {
    Eigen::VectorXd rho(r.rows());
    Eigen::MatrixXd rt(r.rows(), r.cols());
    for (Eigen::Index k = 0; k < r.rows(); ++k) {
      rho(k) = r.row(k).norm();
      if (!(rho(k) > 0)) {
        throw Error(ErrorCode::kZeroVector,
                    "dictionary row " + std::to_string(k) + " has zero norm");
      }
      rt.row(k) = r.row(k) / rho(k);
    }
    const Eigen::MatrixXd gram =
        rt * rt.transpose() - Eigen::MatrixXd::Identity(r.rows(), r.rows());
    out.ortho = config.ortho_weight * gram.squaredNorm();
    const Eigen::MatrixXd gt = 4.0 * config.ortho_weight * gram * rt;
    for (Eigen::Index k = 0; k < r.rows(); ++k) {
      const double along = gt.row(k).dot(rt.row(k));
      out.gradient.row(k) += (gt.row(k) - along * rt.row(k)) / rho(k);
    }
  }
  out.value = out.hinge + out.ortho;
  return out;
}

double loss(const Eigen::VectorXd& x,
            const std::vector<Eigen::VectorXd>& negatives,
            const Eigen::MatrixXd& r, const TopicModelConfig& config) {
  return loss_and_gradient(x, negatives, r, config).value;
}

Eigen::MatrixXd initialize_dictionary(int topics, int dim, std::uint64_t seed) {
  if (topics < 1 || dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "dictionary shape must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd r(topics, dim);
  for (int k = 0; k < topics; ++k) {
    double norm = 0.0;
    while (!(norm > 0.0)) {
      for (int j = 0; j < dim; ++j) r(k, j) = normal(rng);
      norm = r.row(k).norm();
    }
    r.row(k) /= norm;
  }
  return r;
}

}  // namespace storyloop::topics
