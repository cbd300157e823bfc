#include "throwkit/brt_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "throwkit/errors.hpp"
#include "throwkit/io_util.hpp"
#include "throwkit/version.hpp"

namespace throwkit {

namespace {

Eigen::MatrixXd standardize(const MlpClassifier& model, const Eigen::MatrixXd& features) {
  Eigen::MatrixXd out = features;
  for (int c = 0; c < 4; ++c) {
    out.col(c) = (out.col(c).array() - model.norm_mean[c]) / model.norm_scale[c];
  }
  return out;
}

struct ForwardPass {
  Eigen::MatrixXd a1;      // sigmoid activations, hidden layer 1
  Eigen::MatrixXd a2;      // sigmoid activations, hidden layer 2
  Eigen::MatrixXd logits;  // linear output layer
};

ForwardPass forward(const MlpClassifier& m, const Eigen::MatrixXd& x_std) {
  const auto sigmoid = [](Eigen::MatrixXd z) -> Eigen::MatrixXd {
    return 1.0 / (1.0 + (-z.array()).exp());
  };
  ForwardPass fp;
  fp.a1 = sigmoid((x_std * m.weights[0].transpose()).rowwise() + m.biases[0].transpose());
  fp.a2 = sigmoid((fp.a1 * m.weights[1].transpose()).rowwise() + m.biases[1].transpose());
  fp.logits = (fp.a2 * m.weights[2].transpose()).rowwise() + m.biases[2].transpose();
  return fp;
}

// Row-wise softmax probabilities, numerically stabilized.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd shifted = logits.colwise() - logits.rowwise().maxCoeff();
  Eigen::MatrixXd ex = shifted.array().exp();
  return ex.array().colwise() / ex.rowwise().sum().array();
}

double cross_entropy(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    loss -= std::log(std::max(probs(i, labels[static_cast<std::size_t>(i)]), 1e-300));
  }
  return loss / static_cast<double>(probs.rows());
}

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;
};

void adam_update(MlpClassifier& model, AdamState& adam, const Gradients& grads,
                 const TrainConfig& cfg) {
  ++adam.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.step));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    adam.mw[l] = cfg.beta1 * adam.mw[l] + (1.0 - cfg.beta1) * grads.weights[l];
    adam.vw[l] = cfg.beta2 * adam.vw[l].array() +
                 (1.0 - cfg.beta2) * grads.weights[l].array().square();
    model.weights[l].array() -= cfg.learning_rate * (adam.mw[l].array() / bc1) /
                                ((adam.vw[l].array() / bc2).sqrt() + cfg.eps);

    adam.mb[l] = cfg.beta1 * adam.mb[l] + (1.0 - cfg.beta1) * grads.biases[l];
    adam.vb[l] =
        cfg.beta2 * adam.vb[l].array() + (1.0 - cfg.beta2) * grads.biases[l].array().square();
    model.biases[l].array() -= cfg.learning_rate * (adam.mb[l].array() / bc1) /
                               ((adam.vb[l].array() / bc2).sqrt() + cfg.eps);
  }
}

Gradients gradients_standardized(const MlpClassifier& m, const Eigen::MatrixXd& x_std,
                                 const std::vector<int>& labels, double* loss_out) {
  const ForwardPass fp = forward(m, x_std);
  const Eigen::MatrixXd probs = softmax(fp.logits);
  if (loss_out != nullptr) {
    *loss_out = cross_entropy(probs, labels);
  }

  const double n = static_cast<double>(x_std.rows());
  Eigen::MatrixXd dz3 = probs;
  for (Eigen::Index i = 0; i < dz3.rows(); ++i) {
    dz3(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  dz3 /= n;

  Gradients g;
  g.weights.resize(3);
  g.biases.resize(3);

  g.weights[2] = dz3.transpose() * fp.a2;
  g.biases[2] = dz3.colwise().sum().transpose();

  Eigen::MatrixXd dz2 =
      (dz3 * m.weights[2]).array() * (fp.a2.array() * (1.0 - fp.a2.array()));
  g.weights[1] = dz2.transpose() * fp.a1;
  g.biases[1] = dz2.colwise().sum().transpose();

  Eigen::MatrixXd dz1 =
      (dz2 * m.weights[1]).array() * (fp.a1.array() * (1.0 - fp.a1.array()));
  g.weights[0] = dz1.transpose() * x_std;
  g.biases[0] = dz1.colwise().sum().transpose();
  return g;
}

double accuracy_standardized(const MlpClassifier& m, const Eigen::MatrixXd& x_std,
                             const std::vector<int>& labels,
                             const std::vector<std::size_t>& subset) {
  if (subset.empty()) return 0.0;
  long correct = 0;
  constexpr Eigen::Index kChunk = 8192;
  Eigen::MatrixXd buf;
  for (std::size_t begin = 0; begin < subset.size(); begin += kChunk) {
    const Eigen::Index rows =
        static_cast<Eigen::Index>(std::min<std::size_t>(kChunk, subset.size() - begin));
    buf.resize(rows, 4);
    for (Eigen::Index i = 0; i < rows; ++i) {
      buf.row(i) = x_std.row(static_cast<Eigen::Index>(subset[begin + i]));
    }
    const ForwardPass fp = forward(m, buf);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const int pred = fp.logits(i, 1) >= fp.logits(i, 0) ? 1 : 0;
      if (pred == labels[subset[begin + i]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(subset.size());
}

}  // namespace

std::pair<MlpClassifier, TrainMetrics> train(const BrtDataset& dataset, const TrainConfig& cfg) {
  if (dataset.positives.empty() || dataset.negatives.empty()) {
    throw DegenerateDataset("training requires both classes present");
  }
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }

  const std::size_t total = dataset.positives.size() + dataset.negatives.size();
  Eigen::MatrixXd features(static_cast<Eigen::Index>(total), 4);
  std::vector<int> labels(total);
  std::size_t row = 0;
  const auto push = [&](const std::vector<FlyingState>& states, int label) {
    for (const FlyingState& x : states) {
      features.row(static_cast<Eigen::Index>(row)) << x.r, x.z, x.rd, x.zd;
      labels[row] = label;
      ++row;
    }
  };
  push(dataset.positives, 1);
  push(dataset.negatives, 0);

  std::mt19937_64 rng(cfg.seed);

  // Split, then standardize from the training portion only.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t train_count =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.train_fraction * total));
  std::vector<std::size_t> train_idx(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(train_count));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(train_count),
                                    order.end());

  MlpClassifier model;
  for (int c = 0; c < 4; ++c) {
    double mean = 0.0;
    for (std::size_t i : train_idx) mean += features(static_cast<Eigen::Index>(i), c);
    mean /= static_cast<double>(train_idx.size());
    double var = 0.0;
    for (std::size_t i : train_idx) {
      const double d = features(static_cast<Eigen::Index>(i), c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(train_idx.size());
    model.norm_mean[c] = mean;
    model.norm_scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }

  // Seeded Xavier-style init.
  model.weights.resize(3);
  model.biases.resize(3);
  for (int l = 0; l < 3; ++l) {
    const int fan_in = model.layer_sizes[static_cast<std::size_t>(l)];
    const int fan_out = model.layer_sizes[static_cast<std::size_t>(l) + 1];
    std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / fan_in));
    model.weights[l].resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) {
        model.weights[l](r, c) = dist(rng);
      }
    }
    model.biases[l] = Eigen::VectorXd::Zero(fan_out);
  }

  const Eigen::MatrixXd x_std = standardize(model, features);

  AdamState adam;
  adam.mw.resize(3);
  adam.vw.resize(3);
  adam.mb.resize(3);
  adam.vb.resize(3);
  for (int l = 0; l < 3; ++l) {
    adam.mw[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
    adam.vw[l] = adam.mw[l];
    adam.mb[l] = Eigen::VectorXd::Zero(model.biases[l].size());
    adam.vb[l] = adam.mb[l];
  }

  TrainMetrics metrics;
  const int batch = std::max(1, cfg.batch_size);
  Eigen::MatrixXd batch_x;
  std::vector<int> batch_y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double loss_sum = 0.0;
    long batches = 0;
    for (std::size_t begin = 0; begin < train_idx.size(); begin += batch) {
      const Eigen::Index rows = static_cast<Eigen::Index>(
          std::min<std::size_t>(batch, train_idx.size() - begin));
      batch_x.resize(rows, 4);
      batch_y.resize(static_cast<std::size_t>(rows));
      for (Eigen::Index i = 0; i < rows; ++i) {
        const std::size_t src = train_idx[begin + static_cast<std::size_t>(i)];
        batch_x.row(i) = x_std.row(static_cast<Eigen::Index>(src));
        batch_y[static_cast<std::size_t>(i)] = labels[src];
      }
      double loss = 0.0;
      const Gradients grads = gradients_standardized(model, batch_x, batch_y, &loss);
      adam_update(model, adam, grads, cfg);
      loss_sum += loss;
      ++batches;
    }

    EpochMetrics em;
    em.epoch = epoch + 1;
    em.train_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    em.train_accuracy = accuracy_standardized(model, x_std, labels, train_idx);
    em.test_accuracy = accuracy_standardized(model, x_std, labels, test_idx);
    metrics.epochs.push_back(em);
  }

  metrics.train_accuracy = accuracy_standardized(model, x_std, labels, train_idx);
  metrics.test_accuracy = accuracy_standardized(model, x_std, labels, test_idx);
  metrics.train_count = train_idx.size();
  metrics.test_count = test_idx.size();

  model.meta.config = cfg;
  model.meta.train_accuracy = metrics.train_accuracy;
  model.meta.test_accuracy = metrics.test_accuracy;
  model.meta.train_count = metrics.train_count;
  model.meta.test_count = metrics.test_count;
  return {std::move(model), std::move(metrics)};
}

Eigen::Vector2d logits(const MlpClassifier& model, const FlyingState& x) {
  Eigen::MatrixXd features(1, 4);
  features << x.r, x.z, x.rd, x.zd;
  const ForwardPass fp = forward(model, standardize(model, features));
  return fp.logits.row(0).transpose();
}

double f_brt(const MlpClassifier& model, const FlyingState& x) {
  const Eigen::Vector2d l = logits(model, x);
  return l[0] - l[1];
}

bool predict_inside(const MlpClassifier& model, const FlyingState& x) {
  return f_brt(model, x) <= 0.0;
}

Evaluation evaluate(const MlpClassifier& model, const std::vector<FlyingState>& states,
                    const std::vector<int>& labels) {
  if (states.empty() || states.size() != labels.size()) {
    throw EmptyInput("evaluate needs equal-length nonempty states and labels");
  }
  Evaluation ev;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const bool inside = predict_inside(model, states[i]);
    if (labels[i] == 1) {
      (inside ? ev.true_positive : ev.false_negative) += 1;
    } else {
      (inside ? ev.false_positive : ev.true_negative) += 1;
    }
  }
  ev.accuracy = static_cast<double>(ev.true_positive + ev.true_negative) /
                static_cast<double>(states.size());
  return ev;
}

double batch_loss(const MlpClassifier& model, const Eigen::MatrixXd& features,
                  const std::vector<int>& labels) {
  const ForwardPass fp = forward(model, standardize(model, features));
  return cross_entropy(softmax(fp.logits), labels);
}

Gradients batch_gradients(const MlpClassifier& model, const Eigen::MatrixXd& features,
                          const std::vector<int>& labels, double* loss_out) {
  return gradients_standardized(model, standardize(model, features), labels, loss_out);
}

void save_classifier(const MlpClassifier& model, const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["generator"] = kVersionString;
  j["layer_sizes"] = model.layer_sizes;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(model.weights[l].size()));
    for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c) {
        w.push_back(model.weights[l](r, c));
      }
    }
    j["weights"].push_back(w);
    j["biases"].push_back(
        std::vector<double>(model.biases[l].data(), model.biases[l].data() + model.biases[l].size()));
  }
  j["norm_mean"] = std::vector<double>(model.norm_mean.data(), model.norm_mean.data() + 4);
  j["norm_scale"] = std::vector<double>(model.norm_scale.data(), model.norm_scale.data() + 4);
  j["metadata"] = {{"seed", model.meta.config.seed},
                   {"epochs", model.meta.config.epochs},
                   {"batch_size", model.meta.config.batch_size},
                   {"learning_rate", model.meta.config.learning_rate},
                   {"beta1", model.meta.config.beta1},
                   {"beta2", model.meta.config.beta2},
                   {"eps", model.meta.config.eps},
                   {"train_fraction", model.meta.config.train_fraction},
                   {"train_accuracy", model.meta.train_accuracy},
                   {"test_accuracy", model.meta.test_accuracy},
                   {"train_count", model.meta.train_count},
                   {"test_count", model.meta.test_count}};
  atomic_write_file(path, j.dump() + "\n");
}

MlpClassifier load_classifier(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("classifier " + path + ": " + e.what());
  }

  MlpClassifier model;
  try {
    model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    const std::size_t layers = model.layer_sizes.size() - 1;
    model.weights.resize(layers);
    model.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      const int rows = model.layer_sizes[l + 1];
      const int cols = model.layer_sizes[l];
      const auto w = j.at("weights").at(l).get<std::vector<double>>();
      if (static_cast<int>(w.size()) != rows * cols) {
        throw ConfigError("classifier " + path + ": weight shape mismatch");
      }
      model.weights[l].resize(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          model.weights[l](r, c) = w[static_cast<std::size_t>(r * cols + c)];
        }
      }
      const auto b = j.at("biases").at(l).get<std::vector<double>>();
      model.biases[l] = Eigen::Map<const Eigen::VectorXd>(b.data(),
                                                          static_cast<Eigen::Index>(b.size()));
    }
    const auto mean = j.at("norm_mean").get<std::vector<double>>();
    const auto scale = j.at("norm_scale").get<std::vector<double>>();
    for (int c = 0; c < 4; ++c) {
      model.norm_mean[c] = mean.at(static_cast<std::size_t>(c));
      model.norm_scale[c] = scale.at(static_cast<std::size_t>(c));
      if (!(model.norm_scale[c] > 0.0)) {
        throw ConfigError("classifier " + path + ": non-positive normalization scale");
      }
    }
    if (j.contains("metadata")) {
      const auto& m = j["metadata"];
      model.meta.config.seed = m.value("seed", std::uint64_t{0});
      model.meta.config.epochs = m.value("epochs", 10);
      model.meta.config.batch_size = m.value("batch_size", 256);
      model.meta.config.learning_rate = m.value("learning_rate", 1e-3);
      model.meta.config.train_fraction = m.value("train_fraction", 0.7);
      model.meta.train_accuracy = m.value("train_accuracy", 0.0);
      model.meta.test_accuracy = m.value("test_accuracy", 0.0);
      model.meta.train_count = m.value("train_count", std::size_t{0});
      model.meta.test_count = m.value("test_count", std::size_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("classifier " + path + ": " + e.what());
  }
  return model;
}

}  // namespace throwkit
