#pragma once

// Plain (ASCII) PGM frames plus a float-valued variant used for activation
// grids. Row 0 is the first row in the file; no vertical flip is applied.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "srcloc/error.hpp"
#include "srcloc/io.hpp"

namespace srcloc {

/// Grayscale image with intensities normalized to [0, 1].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major, values[row * width + col]

  double at(std::size_t col, std::size_t row) const { return values[row * width + col]; }
};

namespace detail {

// Reads the next whitespace-separated token, skipping '#' comments.
inline bool next_token(std::istream& in, std::string& token) {
  token.clear();
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!token.empty()) return true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) return true;
      continue;
    }
    token.push_back(ch);
  }
  return !token.empty();
}

inline long parse_count(const std::string& token, ErrorCode code, const std::string& what) {
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size() || v < 0) {
    throw Error(code, what + ": expected a non-negative integer, got '" + token + "'");
  }
  return v;
}

}  // namespace detail

inline GrayImage decode_pgm(const std::string& text, const std::string& name = "frame") {
  std::istringstream in(text);
  std::string tok;
  if (!detail::next_token(in, tok) || tok != "P2") {
    throw Error(ErrorCode::FrameDecodeError, name + ": not a plain PGM (P2) file");
  }
  long dims[3];
  for (long& d : dims) {
    if (!detail::next_token(in, tok)) throw Error(ErrorCode::FrameDecodeError, name + ": truncated header");
    d = detail::parse_count(tok, ErrorCode::FrameDecodeError, name);
  }
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0 || dims[2] > 65535) {
    throw Error(ErrorCode::FrameDecodeError, name + ": invalid PGM dimensions or maxval");
  }
  GrayImage img;
  img.width = static_cast<std::size_t>(dims[0]);
  img.height = static_cast<std::size_t>(dims[1]);
  const double maxval = static_cast<double>(dims[2]);
  img.values.resize(img.width * img.height);
  for (auto& v : img.values) {
    if (!detail::next_token(in, tok)) throw Error(ErrorCode::FrameDecodeError, name + ": truncated pixel data");
    const long raw = detail::parse_count(tok, ErrorCode::FrameDecodeError, name);
    if (raw > dims[2]) throw Error(ErrorCode::FrameDecodeError, name + ": pixel exceeds maxval");
    v = static_cast<double>(raw) / maxval;
  }
  return img;
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::FrameDecodeError, "cannot read frame " + path.string());
  }
  return decode_pgm(text, path.string());
}

inline std::string encode_pgm(const GrayImage& img, int maxval = 255) {
  std::string out = "P2\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                    std::to_string(maxval) + "\n";
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double v = std::clamp(img.at(c, r), 0.0, 1.0);
      out += std::to_string(static_cast<long>(std::lround(v * maxval)));
      out += c + 1 < img.width ? ' ' : '\n';
    }
  }
  return out;
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval = 255) {
  write_text_file(path, encode_pgm(img, maxval));
}

// -- float grids ("P2F"): header, width height, then one row per line --------

inline std::string encode_float_grid(std::size_t width, std::size_t height, std::span<const double> values) {
  std::string out = "P2F\n" + std::to_string(width) + " " + std::to_string(height) + "\n";
  out.reserve(out.size() + values.size() * 10);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      out += format_double(values[r * width + c]);
      out += c + 1 < width ? ' ' : '\n';
    }
  }
  return out;
}

struct FloatGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
};

inline FloatGrid decode_float_grid(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string tok;
  if (!detail::next_token(in, tok) || tok != "P2F") throw Error(ErrorCode::ParseError, name + ": not a P2F grid");
  FloatGrid g;
  if (!detail::next_token(in, tok)) throw Error(ErrorCode::ParseError, name + ": truncated header");
  g.width = static_cast<std::size_t>(detail::parse_count(tok, ErrorCode::ParseError, name));
  if (!detail::next_token(in, tok)) throw Error(ErrorCode::ParseError, name + ": truncated header");
  g.height = static_cast<std::size_t>(detail::parse_count(tok, ErrorCode::ParseError, name));
  g.values.resize(g.width * g.height);
  for (auto& v : g.values) {
    if (!detail::next_token(in, tok)) throw Error(ErrorCode::ParseError, name + ": truncated grid");
    if (tok == "inf") {
      v = std::numeric_limits<double>::infinity();
      continue;
    }
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw Error(ErrorCode::ParseError, name + ": bad value '" + tok + "'");
  }
  return g;
}

}  // namespace srcloc
