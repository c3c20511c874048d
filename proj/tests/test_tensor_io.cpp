#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "ttnet/tensor_io.hpp"

using namespace ttnet;

namespace {

AnyTensor round_trip(const AnyTensor& x) {
  std::stringstream buf;
  write_tensor(buf, x);
  return read_tensor(buf);
}

AnyTensor parse(const std::string& text) {
  std::istringstream in(text);
  return read_tensor(in);
}

std::string format_error_message(const std::string& text) {
  try {
    parse(text);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

TEST(TensorIo, DenseRoundTripIsExact) {
  Rng rng(1);
  const DenseTensor x = oracle::random_dense(Shape{2, 3, 4}, rng);
  const auto back = std::get<DenseTensor>(round_trip(x));
  EXPECT_EQ(back.shape(), x.shape());
  EXPECT_TRUE(bit_equal(back.data(), x.data()));
}

TEST(TensorIo, FactorFormatsRoundTripExactly) {
  const TTTensor tt = tt_random(Shape{2, 3, 2}, {2, 3}, 4);
  const auto tt_back = std::get<TTTensor>(round_trip(tt));
  ASSERT_EQ(tt_back.order(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(tt_back.cores()[k], tt.cores()[k]);

  const CPTensor cp = cp_random(Shape{3, 2, 2}, 3, 5);
  const auto cp_back = std::get<CPTensor>(round_trip(cp));
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(cp_back.factors()[k], cp.factors()[k]);

  const HTTensor ht = ht_random(Shape{2, 2, 3, 2}, ht_uniform_ranks(4, 2), 6);
  const auto ht_back = std::get<HTTensor>(round_trip(ht));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(ht_back.tree().leaves[k], ht.tree().leaves[k]);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(ht_back.tree().transfers[k], ht.tree().transfers[k]);
}

TEST(TensorIo, ParsesHandWrittenDenseWithCommentsAndBlankLines) {
  const auto x = std::get<DenseTensor>(parse("# a 2x2 matrix\nshape: 2 2\n\n1\n2.5\n-3e-1\n  4  \n"));
  EXPECT_EQ(x.shape(), (Shape{2, 2}));
  EXPECT_EQ(std::vector<double>(x.data().begin(), x.data().end()), (std::vector<double>{1, 2.5, -0.3, 4}));
}

TEST(TensorIo, ToDenseAgreesWithFormatReconstruction) {
  const TTTensor tt = tt_delta_example(4, 2, 2);
  const DenseTensor a = to_dense(AnyTensor(tt)), b = tt_to_dense(tt);
  EXPECT_TRUE(bit_equal(a.data(), b.data()));
}

TEST(TensorIo, ErrorsCarryLineNumbers) {
  EXPECT_NE(format_error_message("shape: 2 2\n1\n2\nx\n4\n").find("line 4"), std::string::npos);
  EXPECT_NE(format_error_message("shape: 2 2\n1\n2\n3\n").find("line 4"), std::string::npos);
  EXPECT_NE(format_error_message("bogus: 1\n").find("line 1"), std::string::npos);
  EXPECT_NE(format_error_message("\n\nshape: 0 2\n").find("line 3"), std::string::npos);
  EXPECT_NE(format_error_message("ht: 3\n").find("line 1"), std::string::npos);
  EXPECT_FALSE(format_error_message("").empty());
}

TEST(TensorIo, RejectsInconsistentFactorFiles) {
  // Second core's left rank does not match the first core's right rank.
  EXPECT_THROW(parse("tt: 2\ncore: 1 1 2\n1\n1\ncore: 3 1 1\n1\n1\n1\n"), FormatError);
  // Factor with the wrong rank.
  EXPECT_THROW(parse("cp: 2 1\nfactor: 1 1\n1\nfactor: 1 2\n1\n1\n"), FormatError);
  EXPECT_THROW(parse("shape: 1\nnan\n"), FormatError);
}

TEST(TensorIo, FileHelpers) {
  const auto path = std::filesystem::temp_directory_path() / "ttnet_tensor_io_test.txt";
  const CPTensor cp = cp_random(Shape{2, 2}, 2, 3);
  save_tensor(path, cp);
  const auto back = std::get<CPTensor>(load_tensor(path));
  EXPECT_EQ(back.factors()[1], cp.factors()[1]);
  std::filesystem::remove(path);
  EXPECT_THROW(load_tensor(path), std::runtime_error);
}
