#include <cstring>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ifmsan/rng.hpp"
#include "ifmsan/tensor.hpp"
#include "ifmsan/tensor_io.hpp"

namespace {

using ifmsan::Dims;
using ifmsan::Tensor;
using ifmsan::ValueRng;

Tensor random_tensor(ValueRng& rng, Dims dims) {
  std::vector<float> values(ifmsan::element_count(dims));
  for (float& v : values) {
    v = rng.uniform() < 0.3 ? 0.0f : static_cast<float>(rng.uniform(-2.0, 2.0));
  }
  return Tensor(std::move(dims), std::move(values));
}

Dims random_dims(ValueRng& rng) {
  Dims dims(rng.integer(1, 3));
  for (auto& d : dims) {
    d = rng.integer(1, 6);
  }
  return dims;
}

TEST(Tensor, ElementCountRejectsBadDims) {
  EXPECT_THROW(ifmsan::element_count({}), ifmsan::DimensionError);
  EXPECT_THROW(ifmsan::element_count({3, 0, 2}), ifmsan::DimensionError);
  EXPECT_THROW(ifmsan::element_count({0xffffffffu, 0xffffffffu, 0xffffffffu}),
               ifmsan::DimensionError);
  EXPECT_EQ(ifmsan::element_count({3, 16, 16}), 768u);
}

TEST(Tensor, ConstructionChecksLength) {
  EXPECT_NO_THROW(Tensor({2, 2}, {1, 2, 3, 4}));
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), ifmsan::DimensionError);
}

TEST(Tensor, UnfoldIsWidthFastest) {
  const Tensor a({1, 2, 2}, {1, 2, 3, 4});
  const auto sa = ifmsan::unfold(a);
  EXPECT_EQ(std::vector<float>(sa.begin(), sa.end()),
            (std::vector<float>{1, 2, 3, 4}));
  EXPECT_EQ(a.at(0, 0, 1), 2.0f);
  EXPECT_EQ(a.at(0, 1, 0), 3.0f);

  const Tensor b({2, 1, 2}, {5, 6, 7, 8});
  const auto sb = ifmsan::unfold(b);
  EXPECT_EQ(std::vector<float>(sb.begin(), sb.end()),
            (std::vector<float>{5, 6, 7, 8}));
  EXPECT_EQ(b.at(1, 0, 0), 7.0f);
}

TEST(Tensor, UnfoldPreservesLength) {
  ValueRng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Tensor t = random_tensor(rng, random_dims(rng));
    EXPECT_EQ(ifmsan::unfold(t).size(), ifmsan::element_count(t.dims()));
  }
}

TEST(Tensor, FoldExamples) {
  const std::vector<float> s{1, 2, 3, 4};
  const Tensor t = ifmsan::fold(s, {1, 2, 2});
  EXPECT_EQ(t.at(0, 0, 0), 1.0f);
  EXPECT_EQ(t.at(0, 0, 1), 2.0f);
  EXPECT_EQ(t.at(0, 1, 0), 3.0f);
  EXPECT_EQ(t.at(0, 1, 1), 4.0f);

  const std::vector<float> three{1, 2, 3};
  EXPECT_THROW(ifmsan::fold(three, {2, 2}), ifmsan::DimensionError);
}

TEST(Tensor, FoldUnfoldRoundTrips) {
  ValueRng rng(12);
  for (int i = 0; i < 500; ++i) {
    const Tensor t = random_tensor(rng, random_dims(rng));
    const auto stream = ifmsan::unfold(t);
    const Tensor back = ifmsan::fold(stream, t.dims());
    ASSERT_TRUE(back.same_dims(t));
    const auto restored = ifmsan::unfold(back);
    ASSERT_EQ(restored.size(), stream.size());
    EXPECT_EQ(std::memcmp(restored.data(), stream.data(),
                          stream.size() * sizeof(float)),
              0);
  }
}

TEST(Tensor, UnfoldAfterFoldReturnsTheStream) {
  ValueRng rng(13);
  std::vector<float> stream(24);
  for (float& v : stream) {
    v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  const Tensor t = ifmsan::fold(stream, {2, 3, 4});
  const auto back = ifmsan::unfold(t);
  EXPECT_EQ(std::vector<float>(back.begin(), back.end()), stream);
}

TEST(Tensor, ZeroRatioCountsExactZeros) {
  EXPECT_DOUBLE_EQ(ifmsan::zero_ratio(Tensor({4}, {0, 1, 0, 2})), 0.5);
  EXPECT_DOUBLE_EQ(ifmsan::zero_ratio(Tensor::zeros({3, 2})), 1.0);
  // -0.0 compares equal to zero and counts as one.
  EXPECT_DOUBLE_EQ(ifmsan::zero_ratio(Tensor({2}, {-0.0f, 5.0f})), 0.5);
}

TEST(Tensor, ZeroRatioMatchesReportedIfmStatistics) {
  // 38128 zeros out of 43264 samples, and a dense map with none at all.
  std::vector<float> sparse(43264, 0.0f);
  for (std::size_t i = 0; i < 43264 - 38128; ++i) {
    sparse[i * 8 + 1] = 1.0f;
  }
  const double ratio = ifmsan::zero_ratio(Tensor({43264}, std::move(sparse)));
  EXPECT_NEAR(ratio, 0.88, 0.005);
  EXPECT_DOUBLE_EQ(ratio, 38128.0 / 43264.0);

  std::vector<float> dense(154587, 0.5f);
  EXPECT_DOUBLE_EQ(ifmsan::zero_ratio(Tensor({154587}, std::move(dense))), 0.0);
}

TEST(Tensor, ZeroRatioStaysInUnitInterval) {
  ValueRng rng(14);
  for (int i = 0; i < 200; ++i) {
    const double r = ifmsan::zero_ratio(random_tensor(rng, random_dims(rng)));
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

std::string serialized(const Tensor& t) {
  std::ostringstream out;
  ifmsan::write_tensor(out, t);
  return out.str();
}

Tensor parsed(const std::string& bytes) {
  std::istringstream in(bytes);
  return ifmsan::read_tensor(in, "buffer");
}

TEST(TensorIo, RoundTripIsBitIdentical) {
  ValueRng rng(15);
  for (int i = 0; i < 100; ++i) {
    const Tensor t = random_tensor(rng, random_dims(rng));
    const std::string bytes = serialized(t);
    const Tensor back = parsed(bytes);
    ASSERT_TRUE(back.same_dims(t));
    EXPECT_EQ(std::memcmp(back.values().data(), t.values().data(),
                          t.size() * sizeof(float)),
              0);
    // A second write is byte-identical too.
    EXPECT_EQ(serialized(back), bytes);
  }
}

TEST(TensorIo, HeaderLayout) {
  const std::string bytes = serialized(Tensor({1, 2}, {1.0f, 2.0f}));
  ASSERT_EQ(bytes.size(), 4 + 4 + 4 + 2 * 4 + 2 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "IFMT");
  // version 1, rank 2, dims 1 and 2, little-endian.
  const unsigned char expected[] = {1, 0, 0, 0, 2, 0, 0, 0,
                                    1, 0, 0, 0, 2, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 4, expected, sizeof(expected)), 0);
}

TEST(TensorIo, RejectsBadMagic) {
  std::string bytes = serialized(Tensor({2}, {1.0f, 2.0f}));
  bytes[0] = 'X';
  EXPECT_THROW(parsed(bytes), ifmsan::FormatError);
}

TEST(TensorIo, RejectsBadVersion) {
  std::string bytes = serialized(Tensor({2}, {1.0f, 2.0f}));
  bytes[4] = 2;
  EXPECT_THROW(parsed(bytes), ifmsan::FormatError);
}

TEST(TensorIo, RejectsTruncationAndTrailingBytes) {
  const std::string bytes = serialized(Tensor({2, 2}, {1, 2, 3, 4}));
  EXPECT_THROW(parsed(bytes.substr(0, bytes.size() - 1)), ifmsan::FormatError);
  EXPECT_THROW(parsed(bytes.substr(0, 10)), ifmsan::FormatError);
  EXPECT_THROW(parsed(bytes + '\0'), ifmsan::FormatError);
}

TEST(TensorIo, RejectsZeroRankZeroDimsAndHugeRank) {
  std::string bytes = serialized(Tensor({2}, {1.0f, 2.0f}));
  std::string zero_rank = bytes;
  zero_rank[8] = 0;
  EXPECT_THROW(parsed(zero_rank), ifmsan::FormatError);

  std::string zero_dim = bytes;
  zero_dim[12] = 0;
  EXPECT_THROW(parsed(zero_dim), ifmsan::FormatError);

  std::string huge_rank = bytes;
  huge_rank[8] = 33;
  EXPECT_THROW(parsed(huge_rank), ifmsan::FormatError);
}

TEST(TensorIo, DiagnosticsNameTheSource) {
  std::string bytes = serialized(Tensor({2}, {1.0f, 2.0f}));
  bytes[1] = '?';
  std::istringstream in(bytes);
  try {
    ifmsan::read_tensor(in, "activations.ifmt");
    FAIL() << "expected FormatError";
  } catch (const ifmsan::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("activations.ifmt"), std::string::npos);
  }
}

TEST(TensorIo, FileRoundTrip) {
  const auto path =
      std::filesystem::temp_directory_path() / "ifmsan_test_tensor.ifmt";
  const Tensor t({2, 3}, {1, 0, 3, 0, 5, 6});
  ifmsan::write_tensor(path, t);
  const Tensor back = ifmsan::read_tensor(path);
  EXPECT_TRUE(back.same_dims(t));
  EXPECT_EQ(std::memcmp(back.values().data(), t.values().data(),
                        t.size() * sizeof(float)),
            0);
  std::filesystem::remove(path);
  EXPECT_THROW(ifmsan::read_tensor(path), ifmsan::FormatError);
}

}  // namespace
