#include "ttnet/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ttnet/random.hpp"

namespace ttnet {

namespace {

Matrix point(double x, double y) { return Matrix(2, 1, {x, y}); }

void add_noise(Dataset& data, double noise_sd, std::uint64_t seed) {
  if (noise_sd < 0.0 || !std::isfinite(noise_sd)) throw std::invalid_argument("noise must be finite and >= 0");
  if (noise_sd == 0.0) return;
  Rng rng(seed);
  for (auto& m : data.inputs)
    for (double& v : m.data()) v += rng.normal(0.0, noise_sd);
}

// numpy.linspace semantics.
double linspace(double lo, double hi, std::size_t count, std::size_t k, bool endpoint) {
  const std::size_t div = endpoint ? count - 1 : count;
  if (div == 0) return lo;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(div);
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

void Dataset::validate() const {
  if (inputs.size() != labels.size()) throw std::invalid_argument("inputs and labels differ in count");
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    if (inputs[s].rows() != length() || inputs[s].cols() != input_dim()) {
      throw std::invalid_argument("sample " + std::to_string(s) + " has different dimensions");
    }
    if (labels[s] >= num_classes) {
      throw std::invalid_argument("sample " + std::to_string(s) + " has label " + std::to_string(labels[s]) +
                                  " but there are " + std::to_string(num_classes) + " classes");
    }
  }
}

Dataset make_moons(std::size_t num_points, double noise_sd, std::uint64_t seed) {
  if (num_points < 2) throw std::invalid_argument("moons need at least 2 points");
  const std::size_t n_out = num_points / 2, n_in = num_points - n_out;
  Dataset data;
  data.num_classes = 2;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = linspace(0.0, std::numbers::pi, n_out, k, true);
    data.inputs.push_back(point(std::cos(t), std::sin(t)));
    data.labels.push_back(0);
  }
  for (std::size_t k = 0; k < n_in; ++k) {
    const double t = linspace(0.0, std::numbers::pi, n_in, k, true);
    data.inputs.push_back(point(1.0 - std::cos(t), 0.5 - std::sin(t)));
    data.labels.push_back(1);
  }
  add_noise(data, noise_sd, seed);
  return data;
}

Dataset make_circles(std::size_t num_points, double noise_sd, double factor, std::uint64_t seed) {
  if (num_points < 2) throw std::invalid_argument("circles need at least 2 points");
  if (!(factor > 0.0 && factor < 1.0)) {
    throw std::invalid_argument("factor must lie in (0, 1), got " + std::to_string(factor));
  }
  const std::size_t n_out = num_points / 2, n_in = num_points - n_out;
  Dataset data;
  data.num_classes = 2;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = linspace(0.0, 2.0 * std::numbers::pi, n_out, k, false);
    data.inputs.push_back(point(std::cos(t), std::sin(t)));
    data.labels.push_back(0);
  }
  for (std::size_t k = 0; k < n_in; ++k) {
    const double t = linspace(0.0, 2.0 * std::numbers::pi, n_in, k, false);
    data.inputs.push_back(point(factor * std::cos(t), factor * std::sin(t)));
    data.labels.push_back(1);
  }
  add_noise(data, noise_sd, seed);
  return data;
}

Dataset load_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);
  const auto fail = [](const std::filesystem::path& p, const std::string& msg) {
    throw FormatError(p.string() + ": " + msg);
  };
  if (img.size() < 16) fail(images_path, "truncated header");
  if (lab.size() < 8) fail(labels_path, "truncated header");
  if (be32(img, 0) != 2051) fail(images_path, "bad magic " + std::to_string(be32(img, 0)) + ", expected 2051");
  if (be32(lab, 0) != 2049) fail(labels_path, "bad magic " + std::to_string(be32(lab, 0)) + ", expected 2049");
  const std::size_t count = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
  const std::size_t label_count = be32(lab, 4);
  if (rows == 0 || cols == 0) fail(images_path, "image dimensions must be positive");
  if (count != label_count) {
    fail(labels_path, std::to_string(label_count) + " labels for " + std::to_string(count) + " images");
  }
  if (img.size() < 16 + count * rows * cols) fail(images_path, "truncated pixel data");
  if (lab.size() < 8 + count) fail(labels_path, "truncated label data");

  Dataset data;
  data.num_classes = 10;
  data.inputs.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Matrix m(rows, cols);
    const unsigned char* px = img.data() + 16 + s * rows * cols;
    for (std::size_t k = 0; k < rows * cols; ++k) m.data()[k] = px[k] / 255.0;
    data.inputs.push_back(std::move(m));
    const std::size_t label = lab[8 + s];
    if (label >= data.num_classes) fail(labels_path, "label " + std::to_string(label) + " out of range");
    data.labels.push_back(label);
  }
  return data;
}

void save_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                    const Dataset& images) {
  images.validate();
  std::ofstream img(images_path, std::ios::binary), lab(labels_path, std::ios::binary);
  if (!img || !lab) throw std::runtime_error("cannot open IDX output files");
  put32(img, 2051);
  put32(img, static_cast<std::uint32_t>(images.size()));
  put32(img, static_cast<std::uint32_t>(images.length()));
  put32(img, static_cast<std::uint32_t>(images.input_dim()));
  put32(lab, 2049);
  put32(lab, static_cast<std::uint32_t>(images.size()));
  for (std::size_t s = 0; s < images.size(); ++s) {
    for (double v : images.inputs[s].data()) {
      img.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
    lab.put(static_cast<char>(images.labels[s]));
  }
  if (!img || !lab) throw std::runtime_error("failed to write IDX files");
}

Dataset to_patch_dataset(const Dataset& images, const PatchConfig& cfg, std::size_t limit) {
  cfg.validate();
  const std::size_t count = limit == 0 ? images.size() : std::min(limit, images.size());
  Dataset out;
  out.num_classes = images.num_classes;
  out.inputs.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const Matrix& grid = images.inputs[s];
    Image img;
    img.height = grid.rows();
    img.width = grid.cols() / cfg.channels;
    img.channels = cfg.channels;
    img.pixels.assign(grid.data().begin(), grid.data().end());
    out.inputs.push_back(patch_sequence(img, cfg));
    out.labels.push_back(images.labels[s]);
  }
  return out;
}

Dataset strided_subset(const Dataset& data, std::size_t count, std::size_t offset) {
  Dataset out;
  out.num_classes = data.num_classes;
  if (count == 0 || data.size() == 0) return out;
  count = std::min(count, data.size());
  const std::size_t stride = data.size() / count;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t s = (offset + k * stride) % data.size();
    out.inputs.push_back(data.inputs[s]);
    out.labels.push_back(data.labels[s]);
  }
  return out;
}

}  // namespace ttnet
