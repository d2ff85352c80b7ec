#pragma once

// Lossless image codecs: binary PPM (P6, maxval 255) and 8-bit PNG
// (color types 2 and 6; alpha is dropped on load).

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mt/error.hpp"
#include "mt/imaging.hpp"

namespace mt {

enum class ImageFormat { ppm, png };

inline std::string_view to_string(ImageFormat f) { return f == ImageFormat::ppm ? "ppm" : "png"; }

inline std::optional<ImageFormat> parse_image_format(std::string_view s) {
  if (s == "ppm") return ImageFormat::ppm;
  if (s == "png") return ImageFormat::png;
  return std::nullopt;
}

namespace codec_detail {

inline constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                              '\r', '\n', 0x1A, '\n'};

inline std::string hex_prefix(std::span<const std::uint8_t> bytes, std::size_t n = 4) {
  std::string out;
  char buf[4];
  for (std::size_t i = 0; i < bytes.size() && i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%02X", bytes[i]);
    if (!out.empty()) out += ' ';
    out += buf;
  }
  return out.empty() ? "<empty>" : out;
}

// ---- PPM ----

class PpmReader {
 public:
  explicit PpmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  Image read() {
    pos_ = 2;  // magic already checked
    const long width = header_int("width");
    const long height = header_int("height");
    const long maxval = header_int("maxval");
    if (pos_ >= bytes_.size()) truncated("header");
    if (!std::isspace(bytes_[pos_]))
      throw Error(ErrorCode::CorruptInput, "PPM header must end with one whitespace byte");
    ++pos_;
    if (maxval != 255)
      throw Error(ErrorCode::UnsupportedFormat,
                  "PPM maxval " + std::to_string(maxval) + " (only 255 is supported)");
    if (width <= 0 || height <= 0 || width > kMaxImageDimension || height > kMaxImageDimension)
      throw Error(ErrorCode::DimensionBound,
                  "PPM dimensions " + std::to_string(width) + "x" + std::to_string(height));
    const std::size_t need = static_cast<std::size_t>(width) * height * 3;
    if (bytes_.size() - pos_ < need) truncated("pixel data");
    std::vector<std::uint8_t> px(bytes_.begin() + pos_, bytes_.begin() + pos_ + need);
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(px));
  }

 private:
  [[noreturn]] void truncated(const char* where) const {
    throw Error(ErrorCode::TruncatedInput,
                std::string("PPM ended inside ") + where + " after " +
                    std::to_string(bytes_.size()) + " bytes");
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long header_int(const char* what) {
    skip_space_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      if (value > 1'000'000) throw Error(ErrorCode::DimensionBound, std::string("PPM ") + what);
      value = value * 10 + (bytes_[pos_] - '0');
      ++pos_;
      ++digits;
    }
    if (pos_ >= bytes_.size()) truncated("header");
    if (digits == 0)
      throw Error(ErrorCode::CorruptInput, std::string("PPM header: expected ") + what);
    return value;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.bytes().begin(), img.bytes().end());
  return out;
}

// ---- PNG ----

inline std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

inline Image decode_png(std::span<const std::uint8_t> bytes) {
  std::size_t pos = kPngSignature.size();
  std::uint32_t width = 0, height = 0;
  int channels = 0;
  bool have_header = false, have_end = false;
  std::vector<std::uint8_t> idat;

  while (!have_end) {
    if (bytes.size() - pos < 12)
      throw Error(ErrorCode::TruncatedInput, "PNG ended before IEND at byte " + std::to_string(pos));
    const std::uint32_t length = read_be32(&bytes[pos]);
    const std::uint8_t* type = &bytes[pos + 4];
    if (length > bytes.size() || bytes.size() - pos - 12 < length)
      throw Error(ErrorCode::TruncatedInput, "PNG chunk overruns input at byte " + std::to_string(pos));
    const std::uint8_t* data = &bytes[pos + 8];
    const std::uint32_t stored_crc = read_be32(data + length);
    const auto crc = static_cast<std::uint32_t>(crc32(crc32(0L, type, 4), data, length));
    if (crc != stored_crc)
      throw Error(ErrorCode::CorruptInput, "PNG chunk CRC mismatch at byte " + std::to_string(pos));
    const std::string_view tag(reinterpret_cast<const char*>(type), 4);

    if (tag == "IHDR") {
      if (length != 13) throw Error(ErrorCode::CorruptInput, "PNG IHDR length");
      width = read_be32(data);
      height = read_be32(data + 4);
      const int depth = data[8], color_type = data[9];
      if (depth != 8)
        throw Error(ErrorCode::UnsupportedFormat,
                    "PNG bit depth " + std::to_string(depth) + " (only 8 is supported)");
      if (color_type == 2) channels = 3;
      else if (color_type == 6) channels = 4;
      else
        throw Error(ErrorCode::UnsupportedFormat,
                    "PNG color type " + std::to_string(color_type) + " (only 2 and 6)");
      if (data[10] != 0 || data[11] != 0)
        throw Error(ErrorCode::UnsupportedFormat, "PNG compression/filter method");
      if (data[12] != 0) throw Error(ErrorCode::UnsupportedFormat, "interlaced PNG");
      if (width == 0 || height == 0 || width > kMaxImageDimension || height > kMaxImageDimension)
        throw Error(ErrorCode::DimensionBound,
                    "PNG dimensions " + std::to_string(width) + "x" + std::to_string(height));
      have_header = true;
    } else if (!have_header) {
      throw Error(ErrorCode::CorruptInput, "PNG chunk before IHDR");
    } else if (tag == "IDAT") {
      idat.insert(idat.end(), data, data + length);
    } else if (tag == "IEND") {
      have_end = true;
    } else if ((type[0] & 0x20) == 0 && tag != "PLTE") {
      throw Error(ErrorCode::UnsupportedFormat, "PNG critical chunk " + std::string(tag));
    }
    pos += 12 + length;
  }

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  const std::size_t raw_size = (stride + 1) * height;
  std::vector<std::uint8_t> raw(raw_size);
  uLongf out_len = static_cast<uLongf>(raw_size);
  const int rc = uncompress(raw.data(), &out_len, idat.data(), static_cast<uLong>(idat.size()));
  if (rc == Z_BUF_ERROR && out_len == raw_size)
    throw Error(ErrorCode::CorruptInput, "PNG image data larger than declared dimensions");
  if (rc == Z_BUF_ERROR || (rc == Z_OK && out_len < raw_size))
    throw Error(ErrorCode::TruncatedInput, "PNG image data shorter than declared dimensions");
  if (rc != Z_OK) throw Error(ErrorCode::CorruptInput, "PNG zlib stream: error " + std::to_string(rc));

  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
  std::vector<std::uint8_t> prev(stride, 0), cur(stride);
  const std::size_t bpp = static_cast<std::size_t>(channels);
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t* row = &raw[y * (stride + 1)];
    const int filter = row[0];
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= bpp ? cur[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= bpp ? prev[i - bpp] : 0;
      int predicted = 0;
      switch (filter) {
        case 0: predicted = 0; break;
        case 1: predicted = a; break;
        case 2: predicted = b; break;
        case 3: predicted = (a + b) / 2; break;
        case 4: predicted = paeth(a, b, c); break;
        default:
          throw Error(ErrorCode::CorruptInput, "PNG filter type " + std::to_string(filter));
      }
      cur[i] = static_cast<std::uint8_t>(row[1 + i] + predicted);
    }
    for (std::uint32_t x = 0; x < width; ++x)
      for (int ch = 0; ch < 3; ++ch)
        rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch] = cur[x * bpp + ch];
    std::swap(prev, cur);
  }
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(rgb));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char* tag,
                      std::span<const std::uint8_t> data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const auto start = out.size();
  out.insert(out.end(), tag, tag + 4);
  out.insert(out.end(), data.begin(), data.end());
  put_be32(out, static_cast<std::uint32_t>(
                    crc32(0L, &out[start], static_cast<uInt>(out.size() - start))));
}

// Each row uses the Sub filter; output depends only on the pixels and the
// fixed compression level.
inline std::vector<std::uint8_t> encode_png(const Image& img) {
  const std::size_t stride = static_cast<std::size_t>(img.width()) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * img.height());
  const auto px = img.bytes();
  for (int y = 0; y < img.height(); ++y) {
    const std::uint8_t* row = &px[y * stride];
    raw.push_back(1);
    for (std::size_t i = 0; i < stride; ++i)
      raw.push_back(static_cast<std::uint8_t>(row[i] - (i >= 3 ? row[i - 3] : 0)));
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw Error(ErrorCode::Io, "zlib compression failed");
  z.resize(zlen);

  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());
  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width()));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height()));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", z);
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace codec_detail

inline std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return ImageFormat::ppm;
  if (bytes.size() >= 8 &&
      std::equal(codec_detail::kPngSignature.begin(), codec_detail::kPngSignature.end(),
                 bytes.begin()))
    return ImageFormat::png;
  return std::nullopt;
}

inline Image load_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2)
    throw Error(ErrorCode::TruncatedInput,
                "image document of " + std::to_string(bytes.size()) + " bytes");
  if (auto fmt = sniff_format(bytes)) {
    if (*fmt == ImageFormat::ppm) return codec_detail::PpmReader(bytes).read();
    return codec_detail::decode_png(bytes);
  }
  if (bytes[0] == 0x89 && bytes.size() < 8 &&
      std::equal(bytes.begin(), bytes.end(), codec_detail::kPngSignature.begin()))
    throw Error(ErrorCode::TruncatedInput, "PNG signature cut short");
  throw Error(ErrorCode::UnsupportedFormat,
              "magic bytes " + codec_detail::hex_prefix(bytes) + " are neither P6 nor PNG");
}

inline std::vector<std::uint8_t> save_image(const Image& img, ImageFormat format) {
  return format == ImageFormat::ppm ? codec_detail::encode_ppm(img) : codec_detail::encode_png(img);
}

}  // namespace mt
