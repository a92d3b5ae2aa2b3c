#include "platoon/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "platoon/csv.hpp"
#include "platoon/rng.hpp"

namespace platoon {

namespace {

void affine(const DenseLayer& layer, std::span<const double> input, std::vector<double>& out) {
  out.resize(layer.out);
  for (std::size_t r = 0; r < layer.out; ++r) {
    double acc = layer.biases[r];
    const double* w = layer.weights.data() + r * layer.in;
    for (std::size_t c = 0; c < layer.in; ++c) acc += w[c] * input[c];
    out[r] = acc;
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v)
    if (x < 0.0) x = 0.0;
}

DenseLayer zeros_like(const DenseLayer& layer) {
  DenseLayer g;
  g.out = layer.out;
  g.in = layer.in;
  g.weights.assign(layer.weights.size(), 0.0);
  g.biases.assign(layer.biases.size(), 0.0);
  return g;
}

// d(loss)/d(pre-activation) arrives in delta; accumulates the layer gradient
// and returns d(loss)/d(input).
void backprop_layer(const DenseLayer& layer, std::span<const double> input,
                    std::span<const double> delta, DenseLayer& grad,
                    std::vector<double>* input_delta) {
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double d = delta[r];
    double* gw = grad.weights.data() + r * layer.in;
    for (std::size_t c = 0; c < layer.in; ++c) gw[c] += d * input[c];
    grad.biases[r] += d;
  }
  if (input_delta) {
    input_delta->assign(layer.in, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double d = delta[r];
      const double* w = layer.weights.data() + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) (*input_delta)[c] += d * w[c];
    }
  }
}

DenseLayer glorot_layer(std::size_t out, std::size_t in, Rng& rng) {
  DenseLayer layer;
  layer.out = out;
  layer.in = in;
  layer.weights.resize(out * in);
  layer.biases.assign(out, 0.0);
  const double r = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : layer.weights) w = rng.uniform(-r, r);
  return layer;
}

void check_widths(const MlpModel& model, std::size_t feature_count) {
  if (feature_count != 2 * model.vehicle_count)
    throw std::invalid_argument("mlp: feature width does not match the model's vehicle count");
}

std::vector<double> sample_features(const MlpModel& model, const Sample& s) {
  return normalize_features(model.norm, s.speeds, s.positions);
}

double split_mse(const MlpModel& model, const Dataset& data,
                 const std::vector<std::size_t>& idx) {
  double acc = 0.0;
  for (std::size_t i : idx) {
    const Sample& s = data.samples[i];
    const ForwardTrace t = forward_trace(model, sample_features(model, s));
    const double err = t.output - normalize_label(model.norm, s.gain);
    acc += err * err;
  }
  return idx.empty() ? 0.0 : acc / static_cast<double>(idx.size());
}

void apply_update(DenseLayer& layer, const DenseLayer& grad, double lr) {
  for (std::size_t k = 0; k < layer.weights.size(); ++k) layer.weights[k] -= lr * grad.weights[k];
  for (std::size_t k = 0; k < layer.biases.size(); ++k) layer.biases[k] -= lr * grad.biases[k];
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (branch_width < 1 || merge_width < 1)
    throw std::invalid_argument("layer widths must be >= 1");
}

NormStats fit_norm_stats(const Dataset& data) {
  if (data.train_idx.empty()) throw std::invalid_argument("fit_norm_stats: empty training split");
  const std::size_t n = data.vehicle_count;

  NormStats stats;
  stats.feat_min.assign(2 * n, std::numeric_limits<double>::infinity());
  stats.feat_max.assign(2 * n, -std::numeric_limits<double>::infinity());
  stats.label_min = std::numeric_limits<double>::infinity();
  stats.label_max = -std::numeric_limits<double>::infinity();

  for (std::size_t i : data.train_idx) {
    const Sample& s = data.samples[i];
    for (std::size_t k = 0; k < n; ++k) {
      stats.feat_min[k] = std::min(stats.feat_min[k], s.speeds[k]);
      stats.feat_max[k] = std::max(stats.feat_max[k], s.speeds[k]);
      const double rebased = s.positions[k] - s.positions[0];
      stats.feat_min[n + k] = std::min(stats.feat_min[n + k], rebased);
      stats.feat_max[n + k] = std::max(stats.feat_max[n + k], rebased);
    }
    stats.label_min = std::min(stats.label_min, s.gain);
    stats.label_max = std::max(stats.label_max, s.gain);
  }
  return stats;
}

std::vector<double> normalize_features(const NormStats& stats, std::span<const double> speeds,
                                       std::span<const double> positions) {
  const std::size_t n = speeds.size();
  if (positions.size() != n || stats.feat_min.size() != 2 * n)
    throw std::invalid_argument("normalize_features: width mismatch");

  std::vector<double> features(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double span = stats.feat_max[k] - stats.feat_min[k];
    features[k] = span == 0.0 ? 0.5 : (speeds[k] - stats.feat_min[k]) / span;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double rebased = positions[k] - positions[0];
    const double span = stats.feat_max[n + k] - stats.feat_min[n + k];
    features[n + k] = span == 0.0 ? 0.5 : (rebased - stats.feat_min[n + k]) / span;
  }
  return features;
}

double normalize_label(const NormStats& stats, double gain) {
  const double span = stats.label_max - stats.label_min;
  return span == 0.0 ? 0.5 : (gain - stats.label_min) / span;
}

double denormalize_label(const NormStats& stats, double y) {
  const double span = stats.label_max - stats.label_min;
  return span == 0.0 ? stats.label_min : stats.label_min + y * span;
}

ForwardTrace forward_trace(const MlpModel& model, std::span<const double> features) {
  check_widths(model, features.size());
  const std::size_t n = model.vehicle_count;

  ForwardTrace trace;
  affine(model.speed_layer, features.subspan(0, n), trace.speed_act);
  relu_inplace(trace.speed_act);
  affine(model.position_layer, features.subspan(n, n), trace.position_act);
  relu_inplace(trace.position_act);

  std::vector<double> merged(2 * model.branch_width);
  std::copy(trace.speed_act.begin(), trace.speed_act.end(), merged.begin());
  std::copy(trace.position_act.begin(), trace.position_act.end(),
            merged.begin() + static_cast<std::ptrdiff_t>(model.branch_width));

  affine(model.merge_layer, merged, trace.merge_act);
  relu_inplace(trace.merge_act);

  std::vector<double> out;
  affine(model.output_layer, trace.merge_act, out);
  trace.output = out[0];
  return trace;
}

double predict_gain(const MlpModel& model, std::span<const double> speeds,
                    std::span<const double> positions) {
  const auto features = normalize_features(model.norm, speeds, positions);
  const ForwardTrace trace = forward_trace(model, features);
  const double raw = denormalize_label(model.norm, trace.output);
  return std::clamp(raw, kGainFloor, kGainDomainMax);
}

double loss_and_gradients(const MlpModel& model, const std::vector<std::vector<double>>& features,
                          const std::vector<double>& labels, MlpGradients& grads) {
  if (features.size() != labels.size() || features.empty())
    throw std::invalid_argument("loss_and_gradients: batch size mismatch");

  grads.speed_layer = zeros_like(model.speed_layer);
  grads.position_layer = zeros_like(model.position_layer);
  grads.merge_layer = zeros_like(model.merge_layer);
  grads.output_layer = zeros_like(model.output_layer);

  const std::size_t n = model.vehicle_count;
  const std::size_t h1 = model.branch_width;
  const double inv_batch = 1.0 / static_cast<double>(features.size());

  double loss = 0.0;
  std::vector<double> merged(2 * h1);
  std::vector<double> delta_out(1), delta_merge, delta_concat, delta_branch;

  for (std::size_t s = 0; s < features.size(); ++s) {
    const std::vector<double>& x = features[s];
    const ForwardTrace trace = forward_trace(model, x);
    const double err = trace.output - labels[s];
    loss += err * err * inv_batch;

    std::copy(trace.speed_act.begin(), trace.speed_act.end(), merged.begin());
    std::copy(trace.position_act.begin(), trace.position_act.end(),
              merged.begin() + static_cast<std::ptrdiff_t>(h1));

    // d(mse)/d(output)
    delta_out[0] = 2.0 * err * inv_batch;
    backprop_layer(model.output_layer, trace.merge_act, delta_out, grads.output_layer,
                   &delta_merge);
    for (std::size_t r = 0; r < delta_merge.size(); ++r)
      if (trace.merge_act[r] <= 0.0) delta_merge[r] = 0.0;

    backprop_layer(model.merge_layer, merged, delta_merge, grads.merge_layer, &delta_concat);

    delta_branch.assign(delta_concat.begin(), delta_concat.begin() + static_cast<std::ptrdiff_t>(h1));
    for (std::size_t r = 0; r < h1; ++r)
      if (trace.speed_act[r] <= 0.0) delta_branch[r] = 0.0;
    backprop_layer(model.speed_layer, std::span<const double>(x).subspan(0, n), delta_branch,
                   grads.speed_layer, nullptr);

    delta_branch.assign(delta_concat.begin() + static_cast<std::ptrdiff_t>(h1),
                        delta_concat.end());
    for (std::size_t r = 0; r < h1; ++r)
      if (trace.position_act[r] <= 0.0) delta_branch[r] = 0.0;
    backprop_layer(model.position_layer, std::span<const double>(x).subspan(n, n), delta_branch,
                   grads.position_layer, nullptr);
  }
  return loss;
}

MlpModel init_model(std::size_t vehicle_count, const TrainConfig& cfg, const NormStats& stats) {
  cfg.validate();
  MlpModel model;
  model.vehicle_count = vehicle_count;
  model.branch_width = cfg.branch_width;
  model.merge_width = cfg.merge_width;
  model.norm = stats;

  Rng rng(Rng::substream(cfg.seed, 0x1417));
  model.speed_layer = glorot_layer(cfg.branch_width, vehicle_count, rng);
  model.position_layer = glorot_layer(cfg.branch_width, vehicle_count, rng);
  model.merge_layer = glorot_layer(cfg.merge_width, 2 * cfg.branch_width, rng);
  model.output_layer = glorot_layer(1, cfg.merge_width, rng);
  return model;
}

MlpModel train_mlp(const Dataset& data, const TrainConfig& cfg, TrainHistory* history) {
  cfg.validate();
  if (data.train_idx.empty() || data.val_idx.empty())
    throw std::invalid_argument("train_mlp: dataset split is empty");

  MlpModel model = init_model(data.vehicle_count, cfg, fit_norm_stats(data));

  // Normalize once up front.
  std::vector<std::vector<double>> features(data.samples.size());
  std::vector<double> labels(data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    features[i] = normalize_features(model.norm, data.samples[i].speeds,
                                     data.samples[i].positions);
    labels[i] = normalize_label(model.norm, data.samples[i].gain);
  }

  std::vector<std::size_t> order = data.train_idx;
  Rng shuffle_rng(Rng::substream(cfg.seed, 0x0bac));

  MlpModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  MlpGradients grads;
  std::vector<std::vector<double>> batch_x;
  std::vector<double> batch_y;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(shuffle_rng.uniform(0.0, static_cast<double>(i)));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch_x.clear();
      batch_y.clear();
      for (std::size_t k = start; k < stop; ++k) {
        batch_x.push_back(features[order[k]]);
        batch_y.push_back(labels[order[k]]);
      }
      const double loss = loss_and_gradients(model, batch_x, batch_y, grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("train_mlp: non-finite loss at epoch " + std::to_string(epoch));
      apply_update(model.speed_layer, grads.speed_layer, cfg.learning_rate);
      apply_update(model.position_layer, grads.position_layer, cfg.learning_rate);
      apply_update(model.merge_layer, grads.merge_layer, cfg.learning_rate);
      apply_update(model.output_layer, grads.output_layer, cfg.learning_rate);
    }

    const double train_mse = split_mse(model, data, data.train_idx);
    const double val_mse = split_mse(model, data, data.val_idx);
    if (history) {
      history->train_mse.push_back(train_mse);
      history->val_mse.push_back(val_mse);
    }
    if (val_mse < best_val) {
      best_val = val_mse;
      best = model;
      best_epoch = epoch;
    }
  }

  if (history) history->best_epoch = best_epoch;
  return best;
}

EvalResult evaluate_mlp(const MlpModel& model, const Dataset& data, Split split) {
  const std::vector<std::size_t>& idx = split == Split::kTrain       ? data.train_idx
                                        : split == Split::kValidation ? data.val_idx
                                                                      : data.test_idx;
  if (idx.empty()) throw std::invalid_argument("evaluate_mlp: empty split");

  EvalResult result;
  for (std::size_t i : idx) {
    const Sample& s = data.samples[i];
    const ForwardTrace t = forward_trace(model, sample_features(model, s));
    const double err = t.output - normalize_label(model.norm, s.gain);
    result.mse += err * err;
    const double predicted =
        std::clamp(denormalize_label(model.norm, t.output), kGainFloor, kGainDomainMax);
    result.mean_abs_dev += std::abs(predicted - s.gain);
  }
  result.mse /= static_cast<double>(idx.size());
  result.mean_abs_dev /= static_cast<double>(idx.size());
  return result;
}

namespace {

void write_layer(std::ostream& out, const DenseLayer& layer) {
  out << layer.out << ' ' << layer.in << '\n';
  for (std::size_t k = 0; k < layer.weights.size(); ++k)
    out << (k ? " " : "") << csv::num17(layer.weights[k]);
  out << '\n';
  for (std::size_t k = 0; k < layer.biases.size(); ++k)
    out << (k ? " " : "") << csv::num17(layer.biases[k]);
  out << '\n';
}

DenseLayer read_layer(std::istream& in, const std::string& path) {
  DenseLayer layer;
  if (!(in >> layer.out >> layer.in)) throw std::runtime_error(path + ": truncated layer header");
  layer.weights.resize(layer.out * layer.in);
  layer.biases.resize(layer.out);
  for (double& w : layer.weights)
    if (!(in >> w)) throw std::runtime_error(path + ": truncated layer weights");
  for (double& b : layer.biases)
    if (!(in >> b)) throw std::runtime_error(path + ": truncated layer biases");
  return layer;
}

}  // namespace

void save_model(const std::string& path, const MlpModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  out << model.vehicle_count << ' ' << model.branch_width << ' ' << model.merge_width << '\n';
  for (std::size_t k = 0; k < model.norm.feat_min.size(); ++k)
    out << (k ? " " : "") << csv::num17(model.norm.feat_min[k]) << ' '
        << csv::num17(model.norm.feat_max[k]);
  out << ' ' << csv::num17(model.norm.label_min) << ' ' << csv::num17(model.norm.label_max)
      << '\n';
  write_layer(out, model.speed_layer);
  write_layer(out, model.position_layer);
  write_layer(out, model.merge_layer);
  write_layer(out, model.output_layer);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  MlpModel model;
  if (!(in >> model.vehicle_count >> model.branch_width >> model.merge_width))
    throw std::runtime_error(path + ": truncated model header");

  const std::size_t feature_count = 2 * model.vehicle_count;
  model.norm.feat_min.resize(feature_count);
  model.norm.feat_max.resize(feature_count);
  for (std::size_t k = 0; k < feature_count; ++k)
    if (!(in >> model.norm.feat_min[k] >> model.norm.feat_max[k]))
      throw std::runtime_error(path + ": truncated normalization stats");
  if (!(in >> model.norm.label_min >> model.norm.label_max))
    throw std::runtime_error(path + ": truncated label stats");

  model.speed_layer = read_layer(in, path);
  model.position_layer = read_layer(in, path);
  model.merge_layer = read_layer(in, path);
  model.output_layer = read_layer(in, path);

  if (model.speed_layer.in != model.vehicle_count ||
      model.position_layer.in != model.vehicle_count ||
      model.merge_layer.in != 2 * model.branch_width || model.output_layer.out != 1)
    throw std::runtime_error(path + ": layer shapes do not match the header");
  return model;
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "epoch,train_mse,val_mse\n";
  for (std::size_t e = 0; e < history.train_mse.size(); ++e)
    out << (e + 1) << ',' << csv::num17(history.train_mse[e]) << ','
        << csv::num17(history.val_mse[e]) << '\n';
}

}  // namespace platoon
