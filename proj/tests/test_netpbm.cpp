#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "saredge/netpbm.hpp"

using namespace saredge;

namespace {

FormatErrorKind error_kind(const std::string& text, bool pbm = false) {
  std::istringstream in(text);
  try {
    if (pbm) {
      (void)read_pbm(in);
    } else {
      (void)read_pgm(in);
    }
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no FormatError for: " << text;
  return FormatErrorKind::Io;
}

}  // namespace

TEST(Pgm, RandomRoundTripBothEncodings) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> byte(0, 255);
  ByteImage img(16, 16);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(byte(rng));
  for (auto enc : {PnmEncoding::Binary, PnmEncoding::Ascii}) {
    std::stringstream s;
    write_pgm(img, s, enc);
    EXPECT_EQ(read_pgm(s), img);
  }
}

TEST(Pgm, DecodesTwoByOneP5) {
  std::istringstream in(std::string("P5\n2 1\n255\n") + char(0) + char(255));
  const ByteImage img = read_pgm(in);
  ASSERT_EQ(img.width(), 2);
  ASSERT_EQ(img.height(), 1);
  EXPECT_EQ(img(0, 0), 0);
  EXPECT_EQ(img(0, 1), 255);
}

TEST(Pgm, HeaderComments) {
  std::istringstream in("P2\n# made by hand\n2 2 # size\n255\n1 2\n3 4\n");
  const ByteImage img = read_pgm(in);
  EXPECT_EQ(img(1, 1), 4);
}

TEST(Pgm, ErrorKinds) {
  EXPECT_EQ(error_kind("P2\n1 1\n65535\n0\n"), FormatErrorKind::UnsupportedMaxval);
  EXPECT_EQ(error_kind("P6\n1 1\n255\n"), FormatErrorKind::MalformedHeader);
  EXPECT_EQ(error_kind("P5\n0 3\n255\n"), FormatErrorKind::MalformedHeader);
  EXPECT_EQ(error_kind("P5\nx 3\n255\n"), FormatErrorKind::MalformedHeader);
  EXPECT_EQ(error_kind("P5\n4 4\n255\nabc"), FormatErrorKind::TruncatedPayload);
  EXPECT_EQ(error_kind("P2\n2 1\n255\n7\n"), FormatErrorKind::TruncatedPayload);
}

TEST(Pgm, UnsupportedMaxvalMessage) {
  std::istringstream in("P2\n1 1\n65535\n0\n");
  try {
    (void)read_pgm(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported maxval"), std::string::npos);
  }
}

TEST(Pgm, MissingFileIsIoError) {
  try {
    (void)read_pgm(std::filesystem::path("/nonexistent/dir/x.pgm"));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatErrorKind::Io);
  }
}

TEST(Pbm, RandomRoundTripBothEncodings) {
  std::mt19937_64 rng(11);
  for (int w : {1, 7, 8, 9, 17}) {
    const BinaryImage img = oracle::random_binary(rng, w, 5, 0.4);
    for (auto enc : {PnmEncoding::Binary, PnmEncoding::Ascii}) {
      std::stringstream s;
      write_pbm(img, s, enc);
      EXPECT_EQ(read_pbm(s), img) << "width " << w;
    }
  }
}

TEST(Pbm, AllFalseGivesZeroPayload) {
  std::ostringstream out;
  write_pbm(BinaryImage(10, 3), out);
  const std::string s = out.str();
  const std::string header = "P4\n10 3\n";
  ASSERT_EQ(s.substr(0, header.size()), header);
  EXPECT_EQ(s.substr(header.size()), std::string(6, '\0'));
}

TEST(Pbm, NinePixelRowPacksIntoTwoBytes) {
  BinaryImage img(9, 1);
  img(0, 0) = 1;
  img(0, 8) = 1;
  std::ostringstream out;
  write_pbm(img, out);
  const std::string s = out.str();
  const std::string header = "P4\n9 1\n";
  ASSERT_EQ(s.size(), header.size() + 2);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size()]), 0x80);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size() + 1]), 0x80);  // padding bits zero
}

TEST(Pbm, TruncatedPayload) {
  EXPECT_EQ(error_kind("P4\n9 2\n\x01\x02\x03", true), FormatErrorKind::TruncatedPayload);
  EXPECT_EQ(error_kind("P5\n9 2\n", true), FormatErrorKind::MalformedHeader);
}

TEST(MatrixCsv, SingleValueText) {
  std::ostringstream out;
  write_matrix_csv(GrayImage(1, 1, 0.25), out);
  EXPECT_EQ(out.str(), "0.250000000\n");
}

TEST(MatrixCsv, TwoByTwoLayout) {
  std::ostringstream out;
  write_matrix_csv(GrayImage(2, 2, std::vector<double>{0.1, 0.2, 0.3, 0.4}), out);
  EXPECT_EQ(out.str(), "0.100000000,0.200000000\n0.300000000,0.400000000\n");
}

TEST(MatrixCsv, RoundTripWithinNineDecimals) {
  std::mt19937_64 rng(3);
  const GrayImage img = oracle::random_gray(rng, 13, 7, 0.0, 1.0);
  std::stringstream s;
  write_matrix_csv(img, s);
  const GrayImage back = read_matrix_csv(s);
  ASSERT_TRUE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back.pixels()[i], img.pixels()[i], 1e-9);
}

TEST(MatrixCsv, RaggedRowsRejected) {
  std::istringstream in("0.1,0.2\n0.3\n");
  EXPECT_THROW((void)read_matrix_csv(in), FormatError);
}

TEST(Pgm, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "saredge_test_roundtrip.pgm";
  ByteImage img(3, 2, std::vector<std::uint8_t>{0, 1, 2, 253, 254, 255});
  write_pgm(img, path);
  EXPECT_EQ(read_pgm(path), img);
  std::filesystem::remove(path);
}
