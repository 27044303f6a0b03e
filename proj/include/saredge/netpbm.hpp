#pragma once

// PGM/PBM and CSV matrix I/O.
//
// Writers emit the binary variants (P5/P4) unless asked otherwise; readers
// accept both binary and ASCII. Only maxval 255 is supported for PGM.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "saredge/raster.hpp"

namespace saredge {

enum class FormatErrorKind { Io, MalformedHeader, UnsupportedMaxval, TruncatedPayload };

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

enum class PnmEncoding { Binary, Ascii };

namespace detail {

inline void skip_pnm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_header_int(std::istream& in, const char* field) {
  skip_pnm_space(in);
  int c = in.peek();
  if (c == EOF || !std::isdigit(c)) {
    throw FormatError(FormatErrorKind::MalformedHeader,
                      std::string("malformed header: expected ") + field);
  }
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (in.get() - '0');
    if (value > (1L << 30)) {
      throw FormatError(FormatErrorKind::MalformedHeader,
                        std::string("malformed header: ") + field + " out of range");
    }
    c = in.peek();
  }
  return static_cast<int>(value);
}

inline std::string read_magic(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2)) {
    throw FormatError(FormatErrorKind::MalformedHeader, "malformed header: missing magic number");
  }
  return std::string(magic, 2);
}

// Exactly one whitespace byte separates the header from a binary raster.
inline void consume_raster_separator(std::istream& in) {
  int c = in.get();
  if (c == EOF || !std::isspace(c)) {
    throw FormatError(FormatErrorKind::MalformedHeader,
                      "malformed header: missing whitespace before raster");
  }
}

inline int read_ascii_sample(std::istream& in, int limit) {
  skip_pnm_space(in);
  int c = in.peek();
  if (c == EOF) {
    throw FormatError(FormatErrorKind::TruncatedPayload, "truncated payload");
  }
  if (!std::isdigit(c)) {
    throw FormatError(FormatErrorKind::MalformedHeader, "malformed ASCII sample");
  }
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (in.get() - '0');
    if (value > limit) {
      throw FormatError(FormatErrorKind::MalformedHeader, "ASCII sample exceeds maxval");
    }
    c = in.peek();
  }
  return value;
}

// PBM ASCII samples need not be separated by whitespace.
inline int read_pbm_ascii_bit(std::istream& in) {
  skip_pnm_space(in);
  int c = in.get();
  if (c == EOF) throw FormatError(FormatErrorKind::TruncatedPayload, "truncated payload");
  if (c != '0' && c != '1') {
    throw FormatError(FormatErrorKind::MalformedHeader, "malformed PBM sample");
  }
  return c - '0';
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrorKind::Io, "cannot write " + path.string());
  return out;
}

inline void finish_output(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw FormatError(FormatErrorKind::Io, "write failed for " + path.string());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PGM

inline ByteImage read_pgm(std::istream& in) {
  const std::string magic = detail::read_magic(in);
  if (magic != "P5" && magic != "P2") {
    throw FormatError(FormatErrorKind::MalformedHeader, "malformed header: not a PGM (" + magic + ")");
  }
  const int width = detail::read_header_int(in, "width");
  const int height = detail::read_header_int(in, "height");
  const int maxval = detail::read_header_int(in, "maxval");
  if (width <= 0 || height <= 0) {
    throw FormatError(FormatErrorKind::MalformedHeader, "malformed header: zero dimension");
  }
  if (maxval != 255) {
    throw FormatError(FormatErrorKind::UnsupportedMaxval,
                      "unsupported maxval " + std::to_string(maxval) + " (only 255)");
  }
  ByteImage img(width, height);
  auto px = img.pixels();
  if (magic == "P5") {
    detail::consume_raster_separator(in);
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (static_cast<std::size_t>(in.gcount()) != px.size()) {
      throw FormatError(FormatErrorKind::TruncatedPayload, "truncated payload");
    }
  } else {
    for (auto& v : px) v = static_cast<std::uint8_t>(detail::read_ascii_sample(in, 255));
  }
  return img;
}

inline void write_pgm(const ByteImage& img, std::ostream& out,
                      PnmEncoding encoding = PnmEncoding::Binary) {
  if (encoding == PnmEncoding::Binary) {
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels().data()),
              static_cast<std::streamsize>(img.size()));
    return;
  }
  out << "P2\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (c > 0) out << ' ';
      out << static_cast<int>(img(r, c));
    }
    out << '\n';
  }
}

inline ByteImage read_pgm(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_pgm(in);
}

inline void write_pgm(const ByteImage& img, const std::filesystem::path& path,
                      PnmEncoding encoding = PnmEncoding::Binary) {
  auto out = detail::open_output(path);
  write_pgm(img, out, encoding);
  detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// PBM. Bit 1 (black) is foreground.

inline BinaryImage read_pbm(std::istream& in) {
  const std::string magic = detail::read_magic(in);
  if (magic != "P4" && magic != "P1") {
    throw FormatError(FormatErrorKind::MalformedHeader, "malformed header: not a PBM (" + magic + ")");
  }
  const int width = detail::read_header_int(in, "width");
  const int height = detail::read_header_int(in, "height");
  if (width <= 0 || height <= 0) {
    throw FormatError(FormatErrorKind::MalformedHeader, "malformed header: zero dimension");
  }
  BinaryImage img(width, height);
  if (magic == "P4") {
    detail::consume_raster_separator(in);
    const std::size_t row_bytes = (static_cast<std::size_t>(width) + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (int r = 0; r < height; ++r) {
      in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes));
      if (static_cast<std::size_t>(in.gcount()) != row_bytes) {
        throw FormatError(FormatErrorKind::TruncatedPayload, "truncated payload");
      }
      for (int c = 0; c < width; ++c) {
        img(r, c) = (row[static_cast<std::size_t>(c) / 8] >> (7 - c % 8)) & 1U;
      }
    }
  } else {
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(detail::read_pbm_ascii_bit(in));
  }
  return img;
}

inline void write_pbm(const BinaryImage& img, std::ostream& out,
                      PnmEncoding encoding = PnmEncoding::Binary) {
  if (encoding == PnmEncoding::Binary) {
    out << "P4\n" << img.width() << ' ' << img.height() << '\n';
    const std::size_t row_bytes = (static_cast<std::size_t>(img.width()) + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (int r = 0; r < img.height(); ++r) {
      std::fill(row.begin(), row.end(), 0);
      for (int c = 0; c < img.width(); ++c) {
        if (img(r, c)) row[static_cast<std::size_t>(c) / 8] |= static_cast<unsigned char>(0x80U >> (c % 8));
      }
      out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row_bytes));
    }
    return;
  }
  out << "P1\n" << img.width() << ' ' << img.height() << '\n';
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (c > 0) out << ' ';
      out << (img(r, c) ? '1' : '0');
    }
    out << '\n';
  }
}

inline BinaryImage read_pbm(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_pbm(in);
}

inline void write_pbm(const BinaryImage& img, const std::filesystem::path& path,
                      PnmEncoding encoding = PnmEncoding::Binary) {
  auto out = detail::open_output(path);
  write_pbm(img, out, encoding);
  detail::finish_output(out, path);
}

// ---------------------------------------------------------------------------
// CSV float matrices: one line per row, nine decimals.

inline void write_matrix_csv(const GrayImage& img, std::ostream& out) {
  char buf[64];
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (c > 0) out << ',';
      std::snprintf(buf, sizeof buf, "%.9f", img(r, c));
      out << buf;
    }
    out << '\n';
  }
}

inline void write_matrix_csv(const GrayImage& img, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_matrix_csv(img, out);
  detail::finish_output(out, path);
}

inline GrayImage read_matrix_csv(std::istream& in) {
  std::vector<double> values;
  int width = -1;
  int height = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(FormatErrorKind::MalformedHeader,
                          "malformed CSV value '" + cell + "' on row " + std::to_string(height + 1));
      }
      ++count;
    }
    if (width >= 0 && count != width) {
      throw FormatError(FormatErrorKind::MalformedHeader,
                        "ragged CSV matrix at row " + std::to_string(height + 1));
    }
    width = count;
    ++height;
  }
  if (height == 0 || width <= 0) throw FormatError(FormatErrorKind::TruncatedPayload, "empty CSV matrix");
  return GrayImage(width, height, std::move(values));
}

inline GrayImage read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string());
  return read_matrix_csv(in);
}

}  // namespace saredge
