// Feedforward regression network that maps an encoded damage vector to
// per-node repair steps, trained with ADAM on mean squared error.

#ifndef RESTORO_SURROGATE_H_
#define RESTORO_SURROGATE_H_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "restoro/scenario.h"

namespace restoro {

enum class Activation { kRelu, kIdentity };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

struct SurrogateModel {
  std::vector<int> dims;                 // n_i, h_1..h_L, n_o
  std::vector<Eigen::MatrixXd> weights;  // layer l: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;
  std::vector<Activation> activations;   // one per hidden layer
  Encoding encoding = Encoding::kDamagedIs1;
  int resource_cap = 0;
  int horizon = kDefaultHorizon;

  int layer_count() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
  friend bool operator==(const SurrogateModel&, const SurrogateModel&) = default;
};

struct ModelShape {
  std::vector<int> dims;
  Activation hidden_activation = Activation::kRelu;
  Encoding encoding = Encoding::kDamagedIs1;
  int resource_cap = 0;
  int horizon = kDefaultHorizon;
};

// Glorot-uniform weights, zero biases. Throws std::invalid_argument for fewer
// than two dims or a non-positive width.
SurrogateModel init_model(const ModelShape& shape, std::uint64_t seed);

Eigen::VectorXd forward(const SurrogateModel& model, const Eigen::VectorXd& x);
// Column-per-sample batch version.
Eigen::MatrixXd forward_batch(const SurrogateModel& model,
                              const Eigen::MatrixXd& inputs);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Gradients zeros_like(const SurrogateModel& model);
};

struct LossAndGradients {
  double mse = 0.0;
  Gradients gradients;
};

// MSE over all batch entries, or only over entries with mask != 0 when a mask
// of the targets' shape is given. Columns are samples.
LossAndGradients loss_and_gradients(const SurrogateModel& model,
                                    const Eigen::MatrixXd& inputs,
                                    const Eigen::MatrixXd& targets,
                                    const Eigen::MatrixXd* mask = nullptr);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  long step = 0;
  Gradients first_moment;
  Gradients second_moment;
  AdamConfig config;

  static AdamState for_model(const SurrogateModel& model, AdamConfig config);
};

void adam_step(SurrogateModel& model, AdamState& state,
               const Gradients& gradients);

struct TrainConfig {
  AdamConfig adam;
  int batch_size = 32;
  int max_epochs = 200;
  int patience = 10;
  double validation_fraction = 0.1;
  bool masked_loss = false;  // damaged nodes only
  std::uint64_t seed = 0;
};

struct TrainingHistory {
  std::vector<double> train_mse;
  std::vector<double> validation_mse;  // empty when no validation split
  int best_epoch = -1;
};

// Mini-batch ADAM with per-epoch seeded shuffling and early stopping on the
// validation split; the model ends at its best validation epoch.
TrainingHistory train(SurrogateModel& model, const Dataset& dataset,
                      const TrainConfig& config);

// Predicted repair step per node: 0 for nodes the input marks undamaged,
// otherwise round(y) clamped to [1, horizon].
std::vector<int> predict_plan(const SurrogateModel& model,
                              std::span<const std::uint8_t> encoded_input);
std::vector<int> predict_plan(const SurrogateModel& model, const Network& net,
                              const DamageScenario& scenario);

// Pooled over all damaged nodes (truth > 0) of all pairs: share with
// |prediction - truth| <= margin. Throws std::invalid_argument when the
// evaluation set has no damaged node.
double ar_accuracy(std::span<const std::vector<int>> predictions,
                   std::span<const std::vector<int>> truths, int margin);

void save_model(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_model(const std::filesystem::path& path);

}  // namespace restoro

#endif  // RESTORO_SURROGATE_H_
