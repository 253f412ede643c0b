#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "thermoface/eigenspace.hpp"

namespace thermoface {

struct MlpConfig {
  std::vector<std::size_t> layer_sizes = {40, 25, 16};
  double learning_rate = 0.02;
  double momentum = 0.9;
  std::size_t max_epochs = 500;
  double target_loss = 1e-3;
  std::uint64_t seed = 0;
  double init_scale = 0.5;

  // Throws InvalidParameter.
  void validate() const;
  bool operator==(const MlpConfig&) const = default;
};

/// Fully connected tansig network. weights[l] is fan_out x fan_in for the
/// l-th non-input layer; velocity mirrors every parameter for momentum.
struct MlpModel {
  MlpConfig config;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Eigen::MatrixXd> weight_velocity;
  std::vector<Eigen::VectorXd> bias_velocity;
  std::uint64_t epochs_completed = 0;

  std::size_t num_inputs() const { return config.layer_sizes.front(); }
  std::size_t num_classes() const { return config.layer_sizes.back(); }
};

struct Prediction {
  Eigen::VectorXd scores;
  std::vector<std::size_t> ranking;  // descending score, lower label first on ties
};

struct TrainingSample {
  FeatureVector input;
  std::size_t label = 0;
  // Explicit output target; when unset the one-hot encoding of label is used.
  std::optional<Eigen::VectorXd> target;
};

/// Parameter gradients of the squared-error loss for one sample.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double loss = 0.0;
};

/// 2 / (1 + exp(-2x)) - 1, evaluated as tanh for accuracy near zero.
double tansig(double x);

/// Weights uniform in +-init_scale / sqrt(fan_in); biases and velocity zero.
MlpModel init_model(const MlpConfig& cfg);

Prediction forward(const MlpModel& model, const FeatureVector& input);

/// +1 at the label, -1 elsewhere.
Eigen::VectorXd one_hot_target(std::size_t label, std::size_t num_classes);

/// Backpropagated gradients of 1/2 * |output - target|^2.
Gradients compute_gradients(const MlpModel& model, const Eigen::VectorXd& input, const Eigen::VectorXd& target);

/// One online pass in a shuffled order seeded by (seed, epochs_completed).
/// Each step: velocity = momentum * velocity - rate * grad; param += velocity.
/// Returns the mean of the per-sample losses measured before their updates.
/// Throws DimensionMismatch, InvalidLabel, NonFiniteLoss.
double train_epoch(MlpModel& model, std::span<const TrainingSample> samples);

/// Runs epochs until the epoch loss reaches config.target_loss or
/// config.max_epochs have run. Returns the loss history.
std::vector<double> train(MlpModel& model, std::span<const TrainingSample> samples);

/// First k labels of the ranking. Throws InvalidK unless 1 <= k <= classes.
std::vector<std::size_t> predict_topk(const MlpModel& model, const FeatureVector& input, std::size_t k);

}  // namespace thermoface
