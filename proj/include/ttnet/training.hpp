#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ttnet/datasets.hpp"
#include "ttnet/networks.hpp"

namespace ttnet {

struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;  // softmax - one_hot
};

/// -log softmax(scores)[label] via max-subtraction.
LossResult cross_entropy(std::span<const double> scores, std::size_t label);

/// Index of the largest score; ties go to the lowest index.
std::size_t argmax(std::span<const double> scores);

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Moment accumulators shaped like the parameter blocks; step counts updates.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

AdamState make_adam_state(std::span<const std::size_t> block_sizes);

/// One bias-corrected Adam update of every block.
void adam_step(AdamState& state, std::span<const std::span<double>> params, const Gradients& grads,
               const TrainConfig& cfg);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean cross-entropy over the whole set after the epoch
  double accuracy = 0.0;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const ScoreNetwork& net, const Dataset& data);

/// Mini-batch Adam on the mean batch cross-entropy. Samples are reshuffled
/// each epoch with a generator seeded from cfg.seed. Single-threaded and
/// bit-reproducible.
std::vector<EpochStats> train(ScoreNetwork& net, const Dataset& data, const TrainConfig& cfg);

inline constexpr std::array<double, 4> kSweepLearningRates = {4e-3, 2e-3, 1e-3, 5e-4};

struct RateRun {
  double learning_rate = 0.0;
  std::vector<EpochStats> history;
};

struct SweepOutcome {
  std::size_t best = 0;  // index into runs
  std::vector<RateRun> runs;
  ScoreNetwork network;  // trained with runs[best].learning_rate
};

/// Trains a copy of `initial` once per learning rate and keeps the run with
/// the lowest final training loss (first one on ties).
SweepOutcome train_best_rate(const ScoreNetwork& initial, const Dataset& data, const TrainConfig& cfg,
                             std::span<const double> rates = kSweepLearningRates);

/// Initial network for run k of a sweep.
using InitFn = std::function<ScoreNetwork(std::size_t run)>;

/// As above, but run k starts from initial_for(k), so every learning rate
/// gets its own initialization.
SweepOutcome train_best_rate(const InitFn& initial_for, const Dataset& data, const TrainConfig& cfg,
                             std::span<const double> rates = kSweepLearningRates);

/// Header: epoch,loss,accuracy
void write_history_csv(std::ostream& out, std::span<const EpochStats> history);

struct GridBounds {
  double x_min = -1.5, x_max = 2.5, y_min = -1.0, y_max = 1.5;
  void validate() const;
};

/// resolution x resolution lattice of predicted labels at cell centers.
/// labels[j * resolution + i] is column i (x) of row j (y).
struct DecisionGrid {
  GridBounds bounds;
  std::size_t resolution = 0;
  std::vector<std::size_t> labels;

  double x_center(std::size_t i) const;
  double y_center(std::size_t j) const;
  /// Label of the cell containing (x, y); points outside snap to the border.
  std::size_t label_at(double x, double y) const;
};

/// Needs a network whose input is two numbers (d = 2, n = 1 or d = 1, n = 2).
DecisionGrid decision_grid(const ScoreNetwork& net, const GridBounds& bounds, std::size_t resolution);

/// Fraction of 2-D samples whose label matches the grid cell they fall in.
double grid_accuracy(const DecisionGrid& grid, const Dataset& data);

/// Header: x,y,label
void write_grid_csv(std::ostream& out, const DecisionGrid& grid);

/// One rect per cell, then one circle per sample of `points` (may be empty).
void write_grid_svg(std::ostream& out, const DecisionGrid& grid, const Dataset& points);

/// Input matrix for the 2-D point (x, y) shaped for `net`.
Matrix point_input(const ScoreNetwork& net, double x, double y);

}  // namespace ttnet
