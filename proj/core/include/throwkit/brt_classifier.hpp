#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "throwkit/flight_dynamics.hpp"

namespace throwkit {

/// Training hyperparameters. Defaults follow the experiment setup: ten
/// epochs of Adam over a 70/30 split.
struct TrainConfig {
  int epochs = 10;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
};

/// 4-64-64-2 sigmoid network realizing the level-set function of the BRT.
/// Class 0 = outside, class 1 = inside; inputs are standardized per feature.
struct MlpClassifier {
  std::vector<int> layer_sizes{4, 64, 64, 2};
  std::vector<Eigen::MatrixXd> weights;  // weights[l] has shape (out, in)
  std::vector<Eigen::VectorXd> biases;
  Eigen::Vector4d norm_mean = Eigen::Vector4d::Zero();
  Eigen::Vector4d norm_scale = Eigen::Vector4d::Ones();

  struct Metadata {
    TrainConfig config;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
  };
  Metadata meta;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainMetrics {
  std::vector<EpochMetrics> epochs;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

/// Mini-batch Adam on cross-entropy over the two output logits.
/// Deterministic under cfg.seed. Throws DegenerateDataset when one class
/// is absent.
std::pair<MlpClassifier, TrainMetrics> train(const BrtDataset& dataset, const TrainConfig& cfg);

/// Raw output logits for one state (after input standardization).
Eigen::Vector2d logits(const MlpClassifier& model, const FlyingState& x);

/// Level-set value: logit(outside) - logit(inside). Negative inside the BRT.
double f_brt(const MlpClassifier& model, const FlyingState& x);

/// Classification decision; equals the sign test f_brt(x) <= 0 exactly.
bool predict_inside(const MlpClassifier& model, const FlyingState& x);

struct Evaluation {
  double accuracy = 0.0;
  long true_positive = 0;
  long true_negative = 0;
  long false_positive = 0;
  long false_negative = 0;
};

/// Exact counting; throws EmptyInput on empty or mismatched inputs.
Evaluation evaluate(const MlpClassifier& model, const std::vector<FlyingState>& states,
                    const std::vector<int>& labels);

/// Mean cross-entropy of a raw feature batch (rows are states r,z,rd,zd).
double batch_loss(const MlpClassifier& model, const Eigen::MatrixXd& features,
                  const std::vector<int>& labels);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Back-propagated gradients of batch_loss at the model's parameters.
Gradients batch_gradients(const MlpClassifier& model, const Eigen::MatrixXd& features,
                          const std::vector<int>& labels, double* loss_out = nullptr);

/// Model file: JSON with layer sizes, row-major weights, biases,
/// normalization stats, and training metadata.
void save_classifier(const MlpClassifier& model, const std::string& path);
MlpClassifier load_classifier(const std::string& path);

}  // namespace throwkit
