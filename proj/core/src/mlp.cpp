#include "thermoface/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thermoface/error.hpp"
#include "thermoface/random.hpp"

namespace thermoface {

void MlpConfig::validate() const {
  if (layer_sizes.size() < 2) throw Error(ErrorCode::InvalidParameter, "mlp needs at least 2 layers");
  for (auto s : layer_sizes) {
    if (s == 0) throw Error(ErrorCode::InvalidParameter, "mlp layer sizes must be >= 1");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidParameter, "mlp.learning_rate must be non-negative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::InvalidParameter, "mlp.momentum must be in [0,1)");
  if (!(target_loss >= 0.0)) throw Error(ErrorCode::InvalidParameter, "mlp.target_loss must be non-negative");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
    throw Error(ErrorCode::InvalidParameter, "mlp.init_scale must be positive");
  }
}

double tansig(double x) { return std::tanh(x); }

MlpModel init_model(const MlpConfig& cfg) {
  cfg.validate();
  MlpModel model;
  model.config = cfg;
  Rng rng(cfg.seed);
  for (std::size_t l = 1; l < cfg.layer_sizes.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(cfg.layer_sizes[l - 1]);
    const auto fan_out = static_cast<Eigen::Index>(cfg.layer_sizes[l]);
    const double bound = cfg.init_scale / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    model.weight_velocity.push_back(Eigen::MatrixXd::Zero(fan_out, fan_in));
    model.bias_velocity.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

namespace {

void check_input(const MlpModel& model, const Eigen::VectorXd& input) {
  if (static_cast<std::size_t>(input.size()) != model.num_inputs()) {
    throw Error(ErrorCode::DimensionMismatch, "network expects " + std::to_string(model.num_inputs()) +
                                                  " inputs, got " + std::to_string(input.size()));
  }
}

// activations[0] is the input; activations[l] the output of layer l.
std::vector<Eigen::VectorXd> activations(const MlpModel& model, const Eigen::VectorXd& input) {
  std::vector<Eigen::VectorXd> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(input);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Eigen::VectorXd z = model.weights[l] * acts.back() + model.biases[l];
    acts.push_back(z.unaryExpr([](double v) { return tansig(v); }));
  }
  return acts;
}

bool all_finite(const MlpModel& m) {
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    if (!m.weights[l].allFinite() || !m.biases[l].allFinite()) return false;
  }
  return true;
}

}  // namespace

Prediction forward(const MlpModel& model, const FeatureVector& input) {
  check_input(model, input.values);
  Prediction p;
  p.scores = activations(model, input.values).back();
  p.ranking.resize(static_cast<std::size_t>(p.scores.size()));
  std::iota(p.ranking.begin(), p.ranking.end(), std::size_t{0});
  std::stable_sort(p.ranking.begin(), p.ranking.end(), [&](std::size_t a, std::size_t b) {
    return p.scores(static_cast<Eigen::Index>(a)) > p.scores(static_cast<Eigen::Index>(b));
  });
  return p;
}

Eigen::VectorXd one_hot_target(std::size_t label, std::size_t num_classes) {
  Eigen::VectorXd t = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(num_classes), -1.0);
  t(static_cast<Eigen::Index>(label)) = 1.0;
  return t;
}

Gradients compute_gradients(const MlpModel& model, const Eigen::VectorXd& input, const Eigen::VectorXd& target) {
  check_input(model, input);
  const auto acts = activations(model, input);
  const std::size_t layers = model.weights.size();

  Gradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  const Eigen::VectorXd error = acts.back() - target;
  g.loss = 0.5 * error.squaredNorm();

  // tansig'(z) = 1 - tansig(z)^2
  Eigen::VectorXd delta = error.array() * (1.0 - acts.back().array().square());
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.biases[l] = delta;
    if (l > 0) {
      delta = (model.weights[l].transpose() * delta).array() * (1.0 - acts[l].array().square());
    }
  }
  return g;
}

double train_epoch(MlpModel& model, std::span<const TrainingSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::TooFewSamples, "train_epoch needs at least one sample");
  const std::size_t classes = model.num_classes();
  for (const auto& s : samples) {
    check_input(model, s.input.values);
    if (s.target) {
      if (static_cast<std::size_t>(s.target->size()) != classes) {
        throw Error(ErrorCode::DimensionMismatch, "target length does not match output size");
      }
    } else if (s.label >= classes) {
      throw Error(ErrorCode::InvalidLabel,
                  "label " + std::to_string(s.label) + " >= output size " + std::to_string(classes));
    }
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(model.config.seed, model.epochs_completed));
  rng.shuffle(std::span(order));

  const double rate = model.config.learning_rate;
  const double mu = model.config.momentum;
  double total = 0.0;
  for (std::size_t idx : order) {
    const auto& s = samples[idx];
    const Gradients g =
        compute_gradients(model, s.input.values, s.target ? *s.target : one_hot_target(s.label, classes));
    if (!std::isfinite(g.loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "loss became non-finite at epoch " + std::to_string(model.epochs_completed));
    }
    total += g.loss;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      model.weight_velocity[l] = mu * model.weight_velocity[l] - rate * g.weights[l];
      model.bias_velocity[l] = mu * model.bias_velocity[l] - rate * g.biases[l];
      model.weights[l] += model.weight_velocity[l];
      model.biases[l] += model.bias_velocity[l];
    }
  }
  if (!all_finite(model)) {
    throw Error(ErrorCode::NonFiniteLoss, "parameters diverged at epoch " + std::to_string(model.epochs_completed));
  }
  ++model.epochs_completed;
  const double loss = total / static_cast<double>(samples.size());
  if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "epoch loss is non-finite");
  return loss;
}

std::vector<double> train(MlpModel& model, std::span<const TrainingSample> samples) {
  std::vector<double> history;
  for (std::size_t e = 0; e < model.config.max_epochs; ++e) {
    const double loss = train_epoch(model, samples);
    history.push_back(loss);
    if (loss <= model.config.target_loss) break;
  }
  return history;
}

std::vector<std::size_t> predict_topk(const MlpModel& model, const FeatureVector& input, std::size_t k) {
  if (k < 1 || k > model.num_classes()) {
    throw Error(ErrorCode::InvalidK, "k=" + std::to_string(k) + " must be in 1.." + std::to_string(model.num_classes()));
  }
  auto ranking = forward(model, input).ranking;
  ranking.resize(k);
  return ranking;
}

}  // namespace thermoface
