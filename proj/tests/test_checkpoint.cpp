#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "ttnet/checkpoint.hpp"

using namespace ttnet;

namespace {

NetworkSpec spec(Format f, std::size_t d, ClassMode mode) {
  NetworkSpec s;
  s.format = f;
  s.length = d;
  s.input_dim = 3;
  s.features = 2;
  s.rank = 3;
  s.classes = 3;
  s.class_mode = mode;
  s.activation = Activation::sigmoid;
  return s;
}

void expect_identical(ScoreNetwork a, ScoreNetwork b) {
  EXPECT_EQ(a.format(), b.format());
  EXPECT_EQ(a.class_mode(), b.class_mode());
  EXPECT_EQ(a.feature_map().activation(), b.feature_map().activation());
  EXPECT_EQ(a.input_order(), b.input_order());
  const auto pa = a.parameter_blocks(), pb = b.parameter_blocks();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t k = 0; k < pa.size(); ++k) EXPECT_TRUE(std::equal(pa[k].begin(), pa[k].end(), pb[k].begin(), pb[k].end()));
}

ScoreNetwork reload(const ScoreNetwork& net) {
  std::stringstream buf;
  save_checkpoint(buf, net);
  return load_checkpoint(buf);
}

}  // namespace

TEST(Checkpoint, RoundTripsEveryFormatExactly) {
  for (Format f : {Format::tt, Format::cp, Format::ht}) {
    for (ClassMode mode : {ClassMode::shared, ClassMode::per_class}) {
      if (f == Format::ht && mode == ClassMode::per_class) continue;
      const ScoreNetwork net = make_network(spec(f, 4, mode), 3);
      const ScoreNetwork back = reload(net);
      expect_identical(net, back);
      Rng rng(1);
      const Matrix x = oracle::random_matrix(4, 3, rng);
      EXPECT_EQ(net.scores(x), back.scores(x));
    }
  }
}

TEST(Checkpoint, KeepsInputOrder) {
  const ScoreNetwork net = build_similarity_network(4, 2);
  expect_identical(net, reload(net));
}

TEST(Checkpoint, HeaderAndErrors) {
  std::stringstream buf;
  save_checkpoint(buf, make_network(spec(Format::tt, 2, ClassMode::shared), 1));
  const std::string text = buf.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kCheckpointMagic);

  std::istringstream wrong_magic("ttnet-checkpoint 99\n");
  EXPECT_THROW(load_checkpoint(wrong_magic), FormatError);
  std::istringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_checkpoint(truncated), FormatError);
  std::string bad_format = text;
  bad_format.replace(bad_format.find("format: tt"), 10, "format: qq");
  std::istringstream bad(bad_format);
  EXPECT_THROW(load_checkpoint(bad), FormatError);
  EXPECT_THROW(load_checkpoint(std::filesystem::path("/nonexistent/ckpt.txt")), std::runtime_error);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "ttnet_checkpoint_test.txt";
  const ScoreNetwork net = make_network(spec(Format::cp, 3, ClassMode::shared), 9);
  save_checkpoint(path, net);
  expect_identical(net, load_checkpoint(path));
  std::filesystem::remove(path);
}
