#include "ttnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ttnet/random.hpp"

namespace ttnet {

LossResult cross_entropy(std::span<const double> scores, std::size_t label) {
  if (label >= scores.size()) {
    throw std::invalid_argument("label " + std::to_string(label) + " out of range for " +
                                std::to_string(scores.size()) + " scores");
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  LossResult out;
  out.gradient.resize(scores.size());
  for (std::size_t y = 0; y < scores.size(); ++y) {
    out.gradient[y] = std::exp(scores[y] - mx);
    sum += out.gradient[y];
  }
  for (double& g : out.gradient) g /= sum;
  out.gradient[label] -= 1.0;
  out.loss = std::log(sum) - (scores[label] - mx);
  return out;
}

std::size_t argmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t y = 1; y < scores.size(); ++y)
    if (scores[y] > scores[best]) best = y;
  return best;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("Adam eps must be positive");
}

AdamState make_adam_state(std::span<const std::size_t> block_sizes) {
  AdamState s;
  for (std::size_t n : block_sizes) {
    s.m.emplace_back(n, 0.0);
    s.v.emplace_back(n, 0.0);
  }
  return s;
}

void adam_step(AdamState& state, std::span<const std::span<double>> params, const Gradients& grads,
               const TrainConfig& cfg) {
  if (params.size() != grads.blocks.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("Adam: parameter, gradient and state block counts differ");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads.blocks[b].size() || params[b].size() != state.m[b].size()) {
      throw std::invalid_argument("Adam: block " + std::to_string(b) + " sizes differ");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.m[b];
    auto& v = state.v[b];
    const auto& g = grads.blocks[b];
    for (std::size_t k = 0; k < g.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      params[b][k] -= cfg.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.eps);
    }
  }
}

Evaluation evaluate(const ScoreNetwork& net, const Dataset& data) {
  Evaluation e;
  if (data.size() == 0) return e;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto scores = net.scores(data.inputs[s]);
    e.loss += cross_entropy(scores, data.labels[s]).loss;
    if (argmax(scores) == data.labels[s]) ++correct;
  }
  e.loss /= static_cast<double>(data.size());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return e;
}

std::vector<EpochStats> train(ScoreNetwork& net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.num_classes != net.num_classes()) {
    throw std::invalid_argument("dataset has " + std::to_string(data.num_classes) + " classes, network has " +
                                std::to_string(net.num_classes()));
  }
  std::vector<EpochStats> history;
  if (cfg.epochs == 0 || data.size() == 0) return history;

  Rng rng(cfg.seed);
  AdamState adam = make_adam_state(net.parameter_block_sizes());
  Gradients grads = zero_gradients(net);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.index(k)]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      grads.set_zero();
      for (std::size_t p = start; p < stop; ++p) {
        const std::size_t s = order[p];
        const std::size_t label = data.labels[s];
        accumulate_gradients(
            net, data.inputs[s],
            [label](std::span<const double> scores) { return cross_entropy(scores, label).gradient; }, grads,
            scale);
      }
      const auto params = net.parameter_blocks();
      adam_step(adam, params, grads, cfg);
    }
    const Evaluation e = evaluate(net, data);
    history.push_back({epoch, e.loss, e.accuracy});
  }
  return history;
}

SweepOutcome train_best_rate(const ScoreNetwork& initial, const Dataset& data, const TrainConfig& cfg,
                             std::span<const double> rates) {
  return train_best_rate([&](std::size_t) { return initial; }, data, cfg, rates);
}

SweepOutcome train_best_rate(const InitFn& initial_for, const Dataset& data, const TrainConfig& cfg,
                             std::span<const double> rates) {
  if (rates.empty()) throw std::invalid_argument("learning-rate sweep needs at least one rate");
  SweepOutcome out{0, {}, initial_for(0)};
  double best_loss = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    ScoreNetwork net = k == 0 ? out.network : initial_for(k);
    TrainConfig run_cfg = cfg;
    run_cfg.learning_rate = rates[k];
    RateRun run{rates[k], train(net, data, run_cfg)};
    const double loss = run.history.empty() ? evaluate(net, data).loss : run.history.back().loss;
    // NaN losses never win.
    if (k == 0 || loss < best_loss || (std::isnan(best_loss) && !std::isnan(loss))) {
      best_loss = loss;
      out.best = k;
      out.network = std::move(net);
    }
    out.runs.push_back(std::move(run));
  }
  return out;
}

void write_history_csv(std::ostream& out, std::span<const EpochStats> history) {
  const auto old = out.precision(17);
  out << "epoch,loss,accuracy\n";
  for (const auto& h : history) out << h.epoch << ',' << h.loss << ',' << h.accuracy << '\n';
  out.precision(old);
}

// ---------------------------------------------------------------------------
// Decision grids

void GridBounds::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_min) || !std::isfinite(y_max)) {
    throw std::invalid_argument("grid bounds must be finite with min < max");
  }
}

double DecisionGrid::x_center(std::size_t i) const {
  return bounds.x_min + (static_cast<double>(i) + 0.5) * (bounds.x_max - bounds.x_min) / static_cast<double>(resolution);
}

double DecisionGrid::y_center(std::size_t j) const {
  return bounds.y_min + (static_cast<double>(j) + 0.5) * (bounds.y_max - bounds.y_min) / static_cast<double>(resolution);
}

std::size_t DecisionGrid::label_at(double x, double y) const {
  const auto cell = [this](double v, double lo, double hi) {
    const double f = std::floor((v - lo) / (hi - lo) * static_cast<double>(resolution));
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(resolution - 1)));
  };
  return labels[cell(y, bounds.y_min, bounds.y_max) * resolution + cell(x, bounds.x_min, bounds.x_max)];
}

Matrix point_input(const ScoreNetwork& net, double x, double y) {
  if (net.length() == 2 && net.input_dim() == 1) return Matrix(2, 1, {x, y});
  if (net.length() == 1 && net.input_dim() == 2) return Matrix(1, 2, {x, y});
  throw std::invalid_argument("decision grids need a network with 2-D input, this one takes " +
                              std::to_string(net.length()) + " inputs of length " + std::to_string(net.input_dim()));
}

DecisionGrid decision_grid(const ScoreNetwork& net, const GridBounds& bounds, std::size_t resolution) {
  bounds.validate();
  if (resolution == 0) throw std::invalid_argument("resolution must be >= 1");
  point_input(net, 0.0, 0.0);
  DecisionGrid grid{bounds, resolution, std::vector<std::size_t>(resolution * resolution)};
  for (std::size_t j = 0; j < resolution; ++j)
    for (std::size_t i = 0; i < resolution; ++i) {
      grid.labels[j * resolution + i] = argmax(net.scores(point_input(net, grid.x_center(i), grid.y_center(j))));
    }
  return grid;
}

double grid_accuracy(const DecisionGrid& grid, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto xy = data.inputs[s].data();
    if (xy.size() != 2) throw std::invalid_argument("grid accuracy needs 2-D samples");
    if (grid.label_at(xy[0], xy[1]) == data.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void write_grid_csv(std::ostream& out, const DecisionGrid& grid) {
  const auto old = out.precision(17);
  out << "x,y,label\n";
  for (std::size_t j = 0; j < grid.resolution; ++j)
    for (std::size_t i = 0; i < grid.resolution; ++i)
      out << grid.x_center(i) << ',' << grid.y_center(j) << ',' << grid.labels[j * grid.resolution + i] << '\n';
  out.precision(old);
}

namespace {

const char* kCellColors[] = {"#c6dbef", "#fdd0a2", "#c7e9c0", "#dadaeb", "#fcbba1",
                             "#d9d9d9", "#fee391", "#9ecae1", "#a1d99b", "#bcbddc"};
const char* kPointColors[] = {"#08519c", "#a63603", "#006d2c", "#54278f", "#a50f15",
                              "#252525", "#cc4c02", "#2171b5", "#238b45", "#6a51a3"};

}  // namespace

void write_grid_svg(std::ostream& out, const DecisionGrid& grid, const Dataset& points) {
  constexpr double kSize = 480.0;
  const GridBounds& b = grid.bounds;
  const double cell = kSize / static_cast<double>(grid.resolution);
  const auto px = [&](double x) { return (x - b.x_min) / (b.x_max - b.x_min) * kSize; };
  const auto py = [&](double y) { return kSize - (y - b.y_min) / (b.y_max - b.y_min) * kSize; };
  const auto old = out.precision(6);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  for (std::size_t j = 0; j < grid.resolution; ++j)
    for (std::size_t i = 0; i < grid.resolution; ++i) {
      // Row j = 0 is the bottom of the plot.
      out << "<rect x=\"" << static_cast<double>(i) * cell << "\" y=\""
          << kSize - static_cast<double>(j + 1) * cell << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << kCellColors[grid.labels[j * grid.resolution + i] % 10] << "\"/>\n";
    }
  for (std::size_t s = 0; s < points.size(); ++s) {
    const auto xy = points.inputs[s].data();
    if (xy.size() != 2) continue;
    out << "<circle cx=\"" << px(xy[0]) << "\" cy=\"" << py(xy[1]) << "\" r=\"2\" fill=\""
        << kPointColors[points.labels[s] % 10] << "\"/>\n";
  }
  out << "</svg>\n";
  out.precision(old);
}

}  // namespace ttnet
