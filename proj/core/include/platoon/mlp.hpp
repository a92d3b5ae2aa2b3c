#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "platoon/dataset.hpp"

namespace platoon {

struct DenseLayer {
  std::size_t out = 0;
  std::size_t in = 0;
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> biases;   // out
};

/// Min-max statistics fitted on the training split. Feature order is the
/// n speeds followed by the n lead-rebased positions.
struct NormStats {
  std::vector<double> feat_min;
  std::vector<double> feat_max;
  double label_min = 0.0;
  double label_max = 1.0;
};

/// Split-branch regressor: speeds and positions first pass through separate
/// dense+ReLU layers, the concatenated branch outputs feed a ReLU merge layer
/// and an affine scalar head. Inputs and the label are min-max normalized.
struct MlpModel {
  std::size_t vehicle_count = 0;
  std::size_t branch_width = 0;  // h1, per branch
  std::size_t merge_width = 0;   // h2
  DenseLayer speed_layer;
  DenseLayer position_layer;
  DenseLayer merge_layer;
  DenseLayer output_layer;
  NormStats norm;
};

struct TrainConfig {
  double learning_rate = 0.00075;
  int epochs = 400;
  int batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t branch_width = 32;
  std::size_t merge_width = 64;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_mse;  // one entry per epoch
  std::vector<double> val_mse;
  int best_epoch = 0;  // 1-based epoch of the returned snapshot
};

/// Normalization helpers. Positions are rebased to the lead vehicle before
/// scaling; a degenerate feature (max == min) maps to the constant 0.5.
std::vector<double> normalize_features(const NormStats& stats, std::span<const double> speeds,
                                       std::span<const double> positions);
double normalize_label(const NormStats& stats, double gain);
double denormalize_label(const NormStats& stats, double y);
NormStats fit_norm_stats(const Dataset& data);

/// Intermediate activations of one forward pass on normalized features.
struct ForwardTrace {
  std::vector<double> speed_act;
  std::vector<double> position_act;
  std::vector<double> merge_act;
  double output = 0.0;  // normalized
};

ForwardTrace forward_trace(const MlpModel& model, std::span<const double> features);

/// Predicted gain for raw initial conditions: normalize, forward, denormalize,
/// clamp into (0, kGainDomainMax] via the kGainFloor floor.
double predict_gain(const MlpModel& model, std::span<const double> speeds,
                    std::span<const double> positions);

/// Mean squared error over the batch plus its gradient, both in normalized
/// label space. Layout of grads mirrors the model. Used by training and by
/// the finite-difference checks.
struct MlpGradients {
  DenseLayer speed_layer;
  DenseLayer position_layer;
  DenseLayer merge_layer;
  DenseLayer output_layer;
};

double loss_and_gradients(const MlpModel& model, const std::vector<std::vector<double>>& features,
                          const std::vector<double>& labels, MlpGradients& grads);

/// Seeded Glorot-uniform initialization of a model for n vehicles.
MlpModel init_model(std::size_t vehicle_count, const TrainConfig& cfg, const NormStats& stats);

/// Mini-batch gradient descent on MSE. Returns the epoch snapshot with the
/// lowest validation MSE; history records both curves. Throws on a non-finite
/// loss.
MlpModel train_mlp(const Dataset& data, const TrainConfig& cfg, TrainHistory* history = nullptr);

struct EvalResult {
  double mse = 0.0;            // normalized label space
  double mean_abs_dev = 0.0;   // raw gain units
};

enum class Split { kTrain, kValidation, kTest };

EvalResult evaluate_mlp(const MlpModel& model, const Dataset& data, Split split);

/// Portable text model file; load(save(m)) is bit-exact.
void save_model(const std::string& path, const MlpModel& model);
MlpModel load_model(const std::string& path);

/// CSV `epoch,train_mse,val_mse`.
void write_history_csv(const std::string& path, const TrainHistory& history);

}  // namespace platoon
