#include "restoro/surrogate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "restoro/random.h"
#include "restoro/text_util.h"

namespace restoro {
namespace {

void check_input(const SurrogateModel& model, Eigen::Index rows) {
  if (rows != model.dims.front()) {
    throw std::invalid_argument("input has " + std::to_string(rows) +
                                " entries, model expects " +
                                std::to_string(model.dims.front()));
  }
}

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
  return a == Activation::kRelu ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
}

bool is_damaged(Encoding encoding, std::uint8_t bit) {
  return encoding == Encoding::kDamagedIs1 ? bit != 0 : bit == 0;
}

void to_matrices(const Dataset& data, const std::vector<std::size_t>& idx,
                 Eigen::MatrixXd& x, Eigen::MatrixXd& y, Eigen::MatrixXd& mask) {
  const int n = data.node_count();
  const auto cols = static_cast<Eigen::Index>(idx.size());
  x.resize(n, cols);
  y.resize(n, cols);
  mask.resize(n, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const DatasetRecord& r = data.records[idx[c]];
    for (int i = 0; i < n; ++i) {
      x(i, c) = r.input[i];
      y(i, c) = r.target[i];
      mask(i, c) = is_damaged(data.encoding, r.input[i]) ? 1.0 : 0.0;
    }
  }
}

}  // namespace

std::string to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::size_t SurrogateModel::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < layer_count(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

SurrogateModel init_model(const ModelShape& shape, std::uint64_t seed) {
  if (shape.dims.size() < 2) {
    throw std::invalid_argument("a model needs at least input and output dims");
  }
  for (int d : shape.dims) {
    if (d < 1) throw std::invalid_argument("layer widths must be positive");
  }
  SurrogateModel model;
  model.dims = shape.dims;
  model.encoding = shape.encoding;
  model.resource_cap = shape.resource_cap;
  model.horizon = shape.horizon;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < shape.dims.size(); ++l) {
    const int in = shape.dims[l];
    const int out = shape.dims[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = limit * (2.0 * uniform01(rng) - 1.0);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(out));
    if (l + 2 < shape.dims.size()) {
      model.activations.push_back(shape.hidden_activation);
    }
  }
  return model;
}

Eigen::MatrixXd forward_batch(const SurrogateModel& model,
                              const Eigen::MatrixXd& inputs) {
  check_input(model, inputs.rows());
  Eigen::MatrixXd a = inputs;
  for (int l = 0; l < model.layer_count(); ++l) {
    Eigen::MatrixXd z = model.weights[l] * a;
    z.colwise() += model.biases[l];
    a = l + 1 < model.layer_count() ? activate(model.activations[l], z)
                                    : std::move(z);
  }
  return a;
}

Eigen::VectorXd forward(const SurrogateModel& model, const Eigen::VectorXd& x) {
  return forward_batch(model, x);
}

Gradients Gradients::zeros_like(const SurrogateModel& model) {
  Gradients g;
  for (int l = 0; l < model.layer_count(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(),
                                              model.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return g;
}

LossAndGradients loss_and_gradients(const SurrogateModel& model,
                                    const Eigen::MatrixXd& inputs,
                                    const Eigen::MatrixXd& targets,
                                    const Eigen::MatrixXd* mask) {
  check_input(model, inputs.rows());
  if (inputs.cols() == 0) throw std::invalid_argument("empty batch");
  if (targets.rows() != model.dims.back() || targets.cols() != inputs.cols()) {
    throw std::invalid_argument("target shape does not match model/batch");
  }
  const int n_layers = model.layer_count();
  std::vector<Eigen::MatrixXd> acts{inputs};  // a_0 .. a_{L-1}
  std::vector<Eigen::MatrixXd> pre;           // z_1 .. z_L
  for (int l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = model.weights[l] * acts.back();
    z.colwise() += model.biases[l];
    if (l + 1 < n_layers) acts.push_back(activate(model.activations[l], z));
    pre.push_back(std::move(z));
  }
  Eigen::MatrixXd err = pre.back() - targets;
  double count = static_cast<double>(err.size());
  if (mask) {
    err = err.cwiseProduct(*mask);
    count = mask->sum();
  }
  LossAndGradients out;
  out.gradients = Gradients::zeros_like(model);
  if (count == 0.0) return out;
  out.mse = err.squaredNorm() / count;

  Eigen::MatrixXd delta = (2.0 / count) * err;
  for (int l = n_layers - 1; l >= 0; --l) {
    out.gradients.weights[l].noalias() = delta * acts[l].transpose();
    out.gradients.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = model.weights[l].transpose() * delta;
    if (model.activations[l - 1] == Activation::kRelu) {
      back = back.cwiseProduct(
          (pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    delta = std::move(back);
  }
  return out;
}

AdamState AdamState::for_model(const SurrogateModel& model, AdamConfig config) {
  AdamState s;
  s.first_moment = Gradients::zeros_like(model);
  s.second_moment = Gradients::zeros_like(model);
  s.config = config;
  return s;
}

void adam_step(SurrogateModel& model, AdamState& state,
               const Gradients& gradients) {
  const AdamConfig& c = state.config;
  ++state.step;
  const double correct1 = 1.0 - std::pow(c.beta1, state.step);
  const double correct2 = 1.0 - std::pow(c.beta2, state.step);
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    if (param.rows() != g.rows() || param.cols() != g.cols()) {
      throw std::invalid_argument("gradient shape does not match parameter");
    }
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    param.array() -= c.learning_rate * (m.array() / correct1) /
                     ((v.array() / correct2).sqrt() + c.epsilon);
  };
  if (static_cast<int>(gradients.weights.size()) != model.layer_count()) {
    throw std::invalid_argument("gradient layer count does not match model");
  }
  for (int l = 0; l < model.layer_count(); ++l) {
    update(model.weights[l], state.first_moment.weights[l],
           state.second_moment.weights[l], gradients.weights[l]);
    update(model.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l], gradients.biases[l]);
  }
}

TrainingHistory train(SurrogateModel& model, const Dataset& dataset,
                      const TrainConfig& config) {
  if (dataset.records.empty()) throw std::invalid_argument("empty dataset");
  if (dataset.encoding != model.encoding) {
    throw std::invalid_argument("dataset encoding " +
                                to_string(dataset.encoding) +
                                " does not match model encoding " +
                                to_string(model.encoding));
  }
  if (dataset.node_count() != model.dims.front() ||
      dataset.node_count() != model.dims.back()) {
    throw std::invalid_argument("dataset width does not match model dims");
  }
  if (config.batch_size < 1) throw std::invalid_argument("batch size < 1");

  Rng rng(config.seed);
  const std::size_t n = dataset.records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_int(rng, 0, static_cast<int>(i - 1))]);
  }
  const auto n_val = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(n)));
  std::vector<std::size_t> train_idx(order.begin(), order.end() - n_val);
  std::vector<std::size_t> val_idx(order.end() - n_val, order.end());

  Eigen::MatrixXd val_x, val_y, val_mask;
  if (!val_idx.empty()) to_matrices(dataset, val_idx, val_x, val_y, val_mask);
  auto validation_mse = [&] {
    return loss_and_gradients(model, val_x, val_y,
                              config.masked_loss ? &val_mask : nullptr)
        .mse;
  };

  AdamState adam = AdamState::for_model(model, config.adam);
  TrainingHistory history;
  SurrogateModel best = model;
  double best_score = std::numeric_limits<double>::infinity();
  int stale = 0;
  Eigen::MatrixXd bx, by, bmask;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i > 1; --i) {
      std::swap(train_idx[i - 1],
                train_idx[uniform_int(rng, 0, static_cast<int>(i - 1))]);
    }
    double weighted = 0.0;
    for (std::size_t start = 0; start < train_idx.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(train_idx.size(), start + config.batch_size);
      const std::vector<std::size_t> batch(train_idx.begin() + start,
                                           train_idx.begin() + end);
      to_matrices(dataset, batch, bx, by, bmask);
      const LossAndGradients lg =
          loss_and_gradients(model, bx, by, config.masked_loss ? &bmask : nullptr);
      weighted += lg.mse * static_cast<double>(batch.size());
      adam_step(model, adam, lg.gradients);
    }
    history.train_mse.push_back(weighted / static_cast<double>(train_idx.size()));
    double score = history.train_mse.back();
    if (!val_idx.empty()) {
      score = validation_mse();
      history.validation_mse.push_back(score);
    }
    if (score < best_score) {
      best_score = score;
      best = model;
      history.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  if (history.best_epoch >= 0) model = std::move(best);
  return history;
}

std::vector<int> predict_plan(const SurrogateModel& model,
                              std::span<const std::uint8_t> encoded_input) {
  check_input(model, static_cast<Eigen::Index>(encoded_input.size()));
  Eigen::VectorXd x(encoded_input.size());
  for (std::size_t i = 0; i < encoded_input.size(); ++i) x(i) = encoded_input[i];
  const Eigen::VectorXd y = forward(model, x);
  std::vector<int> steps(y.size(), 0);
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (k >= x.size() || !is_damaged(model.encoding, encoded_input[k])) continue;
    const double r = std::isfinite(y(k)) ? std::round(y(k)) : model.horizon;
    steps[k] = static_cast<int>(std::clamp(r, 1.0, double(model.horizon)));
  }
  return steps;
}

std::vector<int> predict_plan(const SurrogateModel& model, const Network& net,
                              const DamageScenario& scenario) {
  const auto x = encode_input(net, scenario, model.encoding);
  return predict_plan(model, x);
}

double ar_accuracy(std::span<const std::vector<int>> predictions,
                   std::span<const std::vector<int>> truths, int margin) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("prediction/truth count mismatch");
  }
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < truths.size(); ++s) {
    if (predictions[s].size() != truths[s].size()) {
      throw std::invalid_argument("prediction/truth length mismatch");
    }
    for (std::size_t k = 0; k < truths[s].size(); ++k) {
      if (truths[s][k] <= 0) continue;
      ++total;
      if (std::abs(predictions[s][k] - truths[s][k]) <= margin) ++hits;
    }
  }
  if (total == 0) {
    throw std::invalid_argument("evaluation set has no damaged nodes");
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

void save_model(const SurrogateModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path.string());
  out << "surrogate-v1\ndims";
  for (int d : model.dims) out << ' ' << d;
  out << "\nactivations";
  for (Activation a : model.activations) out << ' ' << to_string(a);
  out << "\nencoding " << to_string(model.encoding) << "\nrc "
      << model.resource_cap << "\ntmax " << model.horizon << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  };
  for (int l = 0; l < model.layer_count(); ++l) {
    const Eigen::MatrixXd& w = model.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) put(w(r, c));
    }
    for (Eigen::Index r = 0; r < model.biases[l].size(); ++r) {
      put(model.biases[l](r));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

SurrogateModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path.string());
  int line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) {
      throw ParseError(line_no + 1, "unexpected end of model file");
    }
    ++line_no;
    return trim(line);
  };
  auto keyed = [&](const std::string& key) {
    std::istringstream ss(next_line());
    std::string got;
    ss >> got;
    if (got != key) throw ParseError(line_no, "expected '" + key + "'");
    std::vector<std::string> values;
    for (std::string v; ss >> v;) values.push_back(v);
    return values;
  };
  if (next_line() != "surrogate-v1") {
    throw ParseError(line_no, "not a surrogate-v1 model file");
  }
  SurrogateModel model;
  for (const auto& v : keyed("dims")) {
    long long d = 0;
    if (!parse_int(v, d) || d < 1) throw ParseError(line_no, "bad dim '" + v + "'");
    model.dims.push_back(static_cast<int>(d));
  }
  if (model.dims.size() < 2) throw ParseError(line_no, "need at least two dims");
  const auto acts = keyed("activations");
  if (acts.size() + 2 != model.dims.size()) {
    throw ParseError(line_no, "activation count does not match dims");
  }
  for (const auto& a : acts) model.activations.push_back(parse_activation(a));
  const auto enc = keyed("encoding");
  if (enc.size() != 1) throw ParseError(line_no, "bad encoding line");
  model.encoding = parse_encoding(enc[0]);
  long long v = 0;
  const auto rc = keyed("rc");
  if (rc.size() != 1 || !parse_int(rc[0], v)) throw ParseError(line_no, "bad rc");
  model.resource_cap = static_cast<int>(v);
  const auto tmax = keyed("tmax");
  if (tmax.size() != 1 || !parse_int(tmax[0], v) || v < 1) {
    throw ParseError(line_no, "bad tmax");
  }
  model.horizon = static_cast<int>(v);
  auto value = [&] {
    double x = 0.0;
    const std::string s = next_line();
    if (!parse_double(s, x) || !std::isfinite(x)) {
      throw ParseError(line_no, "bad parameter value '" + s + "'");
    }
    return x;
  };
  for (std::size_t l = 0; l + 1 < model.dims.size(); ++l) {
    Eigen::MatrixXd w(model.dims[l + 1], model.dims[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = value();
    }
    Eigen::VectorXd b(model.dims[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = value();
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  return model;
}

}  // namespace restoro
