#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ttnet/tensor_core.hpp"

namespace ttnet {

/// Pixel grid stored (row, column, channel) interleaved.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<double> pixels;

  double at(std::size_t row, std::size_t col, std::size_t channel = 0) const {
    return pixels[(row * width + col) * channels + channel];
  }
};

/// Sliding-window layout. Windows must tile the image exactly:
/// (image - patch) must be a multiple of stride along both axes.
struct PatchConfig {
  std::size_t image_height = 28;
  std::size_t image_width = 28;
  std::size_t patch_height = 7;
  std::size_t patch_width = 7;
  std::size_t stride = 7;
  std::size_t channels = 1;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  std::size_t grid_rows() const { return (image_height - patch_height) / stride + 1; }
  std::size_t grid_cols() const { return (image_width - patch_width) / stride + 1; }
  std::size_t num_patches() const { return grid_rows() * grid_cols(); }
  std::size_t patch_size() const { return patch_height * patch_width * channels; }
};

/// patch_size x num_patches matrix. Column j is patch j, patches scanned
/// row-major over the window grid; within a column, channel 0's window in
/// row-major order comes first, then channel 1, and so on.
Matrix extract_patches(const Image& image, const PatchConfig& cfg);

/// The same patches as one row per patch: the InputSequence (x_1, ..., x_d).
Matrix patch_sequence(const Image& image, const PatchConfig& cfg);

/// Reads a PGM (P2 or P5, single channel) or CSV (one image row per line)
/// file; pixel values are returned as stored, PGM scaled by 1/maxval.
Image load_image(const std::filesystem::path& path);

}  // namespace ttnet
