#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ttnet/patches.hpp"
#include "ttnet/tensor_core.hpp"

namespace ttnet {

/// Labelled samples. Each input is a d x n matrix whose row k is x_k; MNIST
/// images as loaded are height x width pixel grids until patched.
struct Dataset {
  std::size_t num_classes = 0;
  std::vector<Matrix> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return inputs.size(); }
  std::size_t length() const { return inputs.empty() ? 0 : inputs.front().rows(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().cols(); }
  /// Throws std::invalid_argument on ragged inputs or out-of-range labels.
  void validate() const;
};

/// Two interleaving half circles; class 0 on (cos t, sin t), class 1 on
/// (1 - cos t, 0.5 - sin t), t evenly spaced on [0, pi]. Class 0 gets
/// num_points / 2 points, class 1 the rest. Each point is two 1-D inputs.
Dataset make_moons(std::size_t num_points, double noise_sd, std::uint64_t seed);

/// Concentric circles: class 0 at radius 1, class 1 at radius `factor`,
/// angles evenly spaced on [0, 2 pi). Same split and layout as make_moons.
Dataset make_circles(std::size_t num_points, double noise_sd, double factor, std::uint64_t seed);

/// Big-endian IDX pair: images (magic 2051) and labels (magic 2049), ten
/// classes. Pixels are scaled to [0, 1]. FormatError on bad magic,
/// truncation or count mismatch; std::runtime_error if a file is missing.
Dataset load_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Inverse of load_mnist_idx; pixels are rounded from [0, 1] to bytes.
void save_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                    const Dataset& images);

/// Replaces every pixel grid by its patch sequence. `limit` keeps the first
/// samples only (0 keeps all).
Dataset to_patch_dataset(const Dataset& images, const PatchConfig& cfg, std::size_t limit = 0);

/// `count` samples spaced size/count apart starting at `offset`; keeps the
/// classes balanced when the file is sorted by label. `count` is clamped to
/// the dataset size; indices wrap around.
Dataset strided_subset(const Dataset& data, std::size_t count, std::size_t offset = 0);

}  // namespace ttnet
