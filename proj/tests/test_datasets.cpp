#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ttnet/datasets.hpp"

using namespace ttnet;

namespace {

std::pair<double, double> point(const Dataset& data, std::size_t k) {
  return {data.inputs[k](0, 0), data.inputs[k](1, 0)};
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ttnet_datasets_" + name);
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> be32(std::uint32_t v) {
  return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 8),
          static_cast<unsigned char>(v)};
}

std::vector<unsigned char> concat(std::initializer_list<std::vector<unsigned char>> parts) {
  std::vector<unsigned char> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

/// Two 2x3 images (pixels 0..5 and 250..255) and labels 3, 7.
void write_tiny_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                    std::uint32_t label_magic = 2049, std::uint32_t label_count = 2) {
  write_bytes(images, concat({be32(2051), be32(2), be32(2), be32(3), {0, 1, 2, 3, 4, 5}, {250, 251, 252, 253, 254, 255}}));
  write_bytes(labels, concat({be32(label_magic), be32(label_count), {3, 7}}));
}

}  // namespace

TEST(Moons, NoiselessFourPoints) {
  const Dataset d = make_moons(4, 0.0, 1);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d.num_classes, 2u);
  EXPECT_EQ(d.length(), 2u);
  EXPECT_EQ(d.input_dim(), 1u);
  const std::vector<std::pair<double, double>> want{{1, 0}, {-1, 0}, {0, 0.5}, {2, 0.5}};
  const std::vector<std::size_t> labels{0, 0, 1, 1};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(point(d, k).first, want[k].first, 1e-15);
    EXPECT_NEAR(point(d, k).second, want[k].second, 1e-15);
    EXPECT_EQ(d.labels[k], labels[k]);
  }
}

TEST(Moons, NoiselessIsSeedIndependentAndBalanced) {
  const Dataset a = make_moons(101, 0.0, 1), b = make_moons(101, 0.0, 999);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.inputs[k], b.inputs[k]);
  const auto ones = std::count(a.labels.begin(), a.labels.end(), 1u);
  EXPECT_LE(std::abs(static_cast<long>(ones) - static_cast<long>(a.size() - ones)), 1);
}

TEST(Moons, NoiseHasRequestedSpread) {
  const Dataset clean = make_moons(2000, 0.0, 0), noisy = make_moons(2000, 0.1, 5);
  double sum = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < clean.size(); ++k)
    for (std::size_t j = 0; j < 2; ++j) {
      const double e = noisy.inputs[k](j, 0) - clean.inputs[k](j, 0);
      sum += e;
      sq += e * e;
    }
  const double n = 4000.0;
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(sq / n), 0.1, 0.01);
  const Dataset again = make_moons(2000, 0.1, 5);
  EXPECT_EQ(again.inputs[17], noisy.inputs[17]);
}

TEST(Circles, NoiselessFourPoints) {
  const Dataset d = make_circles(4, 0.0, 0.5, 1);
  const std::vector<std::pair<double, double>> want{{1, 0}, {-1, 0}, {0.5, 0}, {-0.5, 0}};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(point(d, k).first, want[k].first, 1e-15);
    EXPECT_NEAR(point(d, k).second, want[k].second, 1e-15);
    EXPECT_EQ(d.labels[k], k < 2 ? 0u : 1u);
  }
}

TEST(Circles, RadiiAndFactorRange) {
  const Dataset d = make_circles(50, 0.0, 0.3, 2);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto [x, y] = point(d, k);
    EXPECT_NEAR(std::hypot(x, y), d.labels[k] == 0 ? 1.0 : 0.3, 1e-14);
  }
  EXPECT_THROW(make_circles(10, 0.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(make_circles(10, 0.0, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(make_moons(1, 0.0, 0), std::invalid_argument);
}

TEST(Dataset, Validate) {
  Dataset d = make_moons(4, 0.0, 0);
  EXPECT_NO_THROW(d.validate());
  d.labels[0] = 2;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  d.labels[0] = 0;
  d.inputs[1] = Matrix(3, 1);
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(MnistIdx, ParsesHeaderAndScalesPixels) {
  const auto images = scratch("img"), labels = scratch("lbl");
  write_tiny_idx(images, labels);
  const Dataset d = load_mnist_idx(images, labels);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.num_classes, 10u);
  EXPECT_EQ(d.inputs[0].rows(), 2u);
  EXPECT_EQ(d.inputs[0].cols(), 3u);
  EXPECT_EQ(d.inputs[0](1, 2), 5.0 / 255.0);
  EXPECT_EQ(d.inputs[1](1, 2), 1.0);
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{3, 7}));
  std::filesystem::remove(images);
  std::filesystem::remove(labels);
}

TEST(MnistIdx, Errors) {
  const auto images = scratch("img_err"), labels = scratch("lbl_err");
  write_tiny_idx(images, labels, 2051);
  EXPECT_THROW(load_mnist_idx(images, labels), FormatError);
  write_tiny_idx(images, labels, 2049, 3);
  EXPECT_THROW(load_mnist_idx(images, labels), FormatError);
  write_tiny_idx(images, labels);
  write_bytes(images, {});
  EXPECT_THROW(load_mnist_idx(images, labels), FormatError);
  write_bytes(images, concat({be32(2051), be32(2), be32(2), be32(3), {0, 1, 2}}));
  EXPECT_THROW(load_mnist_idx(images, labels), FormatError);
  std::filesystem::remove(images);
  EXPECT_THROW(load_mnist_idx(images, labels), std::runtime_error);
  std::filesystem::remove(labels);
}

TEST(MnistIdx, SaveLoadRoundTrip) {
  const auto images = scratch("img_rt"), labels = scratch("lbl_rt");
  write_tiny_idx(images, labels);
  const Dataset d = load_mnist_idx(images, labels);
  const auto images2 = scratch("img_rt2"), labels2 = scratch("lbl_rt2");
  save_mnist_idx(images2, labels2, d);
  const Dataset back = load_mnist_idx(images2, labels2);
  EXPECT_EQ(back.inputs[1], d.inputs[1]);
  EXPECT_EQ(back.labels, d.labels);
  for (const auto& p : {images, labels, images2, labels2}) std::filesystem::remove(p);
}

TEST(MnistSubset, BundledFileIsBalanced) {
  const Dataset d = load_mnist_idx("data/mnist5k/images-idx3-ubyte", "data/mnist5k/labels-idx1-ubyte");
  ASSERT_EQ(d.size(), 5000u);
  EXPECT_EQ(d.inputs[0].rows(), 28u);
  std::vector<std::size_t> counts(10, 0);
  for (auto y : d.labels) ++counts[y];
  for (auto c : counts) EXPECT_EQ(c, 500u);
}

TEST(PatchDataset, ShapesAndLimit) {
  Dataset images;
  images.num_classes = 10;
  for (std::size_t k = 0; k < 5; ++k) {
    Matrix img(28, 28);
    img(0, 0) = static_cast<double>(k);
    images.inputs.push_back(img);
    images.labels.push_back(k);
  }
  const PatchConfig cfg{28, 28, 8, 8, 4, 1};
  const Dataset p = to_patch_dataset(images, cfg, 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.length(), 36u);
  EXPECT_EQ(p.input_dim(), 64u);
  EXPECT_EQ(p.inputs[2](0, 0), 2.0);
  EXPECT_EQ(to_patch_dataset(images, cfg).size(), 5u);
}

TEST(StridedSubset, SpacingAndBounds) {
  Dataset d = make_moons(10, 0.0, 0);
  const Dataset s = strided_subset(d, 5, 1);
  ASSERT_EQ(s.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(s.inputs[k], d.inputs[1 + 2 * k]);
  EXPECT_EQ(strided_subset(d, 11).size(), 10u);
  EXPECT_EQ(strided_subset(d, 0).size(), 0u);
}
