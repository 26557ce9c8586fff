// Copyright 2026 The wxforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wxforge/image_io.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <fmt/format.h>
#include <jpeglib.h>
#include <png.h>

#include "wxforge/error.hpp"

namespace wxforge {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

struct MemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->pos + count > reader->bytes.size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, reader->bytes.data() + reader->pos, count);
  reader->pos += count;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

void png_error_to_longjmp(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message != nullptr) {
    *message = msg;
  }
  png_longjmp(png, 1);
}

void png_warning_silent(png_structp, png_const_charp) {}

enum class PngTarget { kRgb8, kGray };

struct PngDecoded {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  int channels = 0;
  std::vector<std::uint8_t> rows;  // packed, big-endian for 16-bit
};

// Keeps only trivially destructible state between setjmp and longjmp; the
// caller owns the output buffer.
bool decode_png_raw(std::span<const std::uint8_t> bytes, PngTarget target, PngDecoded& out,
                    std::string& message, bool& wrong_channels) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           png_error_to_longjmp, png_warning_silent);
  if (png == nullptr) {
    message = "cannot allocate PNG reader";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    message = "cannot allocate PNG info";
    return false;
  }
  MemoryReader reader{bytes, 0};
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (target == PngTarget::kRgb8) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
      png_set_palette_to_rgb(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
      png_set_tRNS_to_alpha(png);
    }
    if (bit_depth == 16) {
      png_set_strip_16(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    out.bit_depth = 8;
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_PALETTE) {
      wrong_channels = true;
      png_destroy_read_struct(&png, &info, nullptr);
      message = "expected a single-channel PNG";
      return false;
    }
    if (bit_depth < 8) {
      png_set_packing(png);
    }
    out.bit_depth = bit_depth == 16 ? 16 : 8;
  }
  png_read_update_info(png, info);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.rows.resize(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    row_ptrs[y] = out.rows.data() + y * rowbytes;
  }
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

PngDecoded decode_png_checked(std::span<const std::uint8_t> bytes, PngTarget target) {
  PngDecoded decoded;
  std::string message;
  bool wrong_channels = false;
  if (!decode_png_raw(bytes, target, decoded, message, wrong_channels)) {
    if (wrong_channels) {
      throw Error(errc::kChannel, message);
    }
    throw Error(errc::kDecode, fmt::format("PNG decode failed: {}", message));
  }
  if (decoded.width < 1 || decoded.height < 1) {
    throw Error(errc::kDecode, "PNG has zero size");
  }
  return decoded;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& pixels,
                     int& width, int& height, std::string& message) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    message = err.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  pixels.resize(stride * static_cast<std::size_t>(height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

bool encode_png_raw(int width, int height, int color_type, int bit_depth,
                    const std::vector<png_bytep>& rows, std::vector<std::uint8_t>& out,
                    std::string& message) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            png_error_to_longjmp, png_warning_silent);
  if (png == nullptr) {
    message = "cannot allocate PNG writer";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    message = "cannot allocate PNG info";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(errc::kIo, fmt::format("cannot open {} for writing", path.string()));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(errc::kIo, fmt::format("write to {} failed", path.string()));
  }
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(errc::kIo, fmt::format("cannot open {}", path.string()));
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageRgb decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) {
    PngDecoded d = decode_png_checked(bytes, PngTarget::kRgb8);
    return ImageRgb(d.width, d.height, std::move(d.rows));
  }
  if (is_jpeg(bytes)) {
    std::vector<std::uint8_t> pixels;
    int width = 0;
    int height = 0;
    std::string message;
    if (!decode_jpeg_raw(bytes, pixels, width, height, message)) {
      throw Error(errc::kDecode, fmt::format("JPEG decode failed: {}", message));
    }
    return ImageRgb(width, height, std::move(pixels));
  }
  throw Error(errc::kDecode, "not a PNG or JPEG stream");
}

ImageRgb load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::uint8_t> encode_png(const ImageRgb& img) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(img.at(0, y));
  }
  std::vector<std::uint8_t> out;
  std::string message;
  if (!encode_png_raw(img.width(), img.height(), PNG_COLOR_TYPE_RGB, 8, rows, out, message)) {
    throw Error(errc::kIo, fmt::format("PNG encode failed: {}", message));
  }
  return out;
}

void save_png(const ImageRgb& img, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(img));
}

GrayRaster decode_gray_png(std::span<const std::uint8_t> bytes) {
  if (!is_png(bytes)) {
    throw Error(errc::kDecode, "not a PNG stream");
  }
  PngDecoded d = decode_png_checked(bytes, PngTarget::kGray);
  if (d.channels != 1) {
    throw Error(errc::kChannel, fmt::format("expected 1 channel, found {}", d.channels));
  }
  GrayRaster r{d.width, d.height, d.bit_depth, {}};
  const std::size_t n = static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height);
  r.values.resize(n);
  if (d.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      r.values[i] = static_cast<std::uint16_t>((d.rows[2 * i] << 8) | d.rows[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      r.values[i] = d.rows[i];
    }
  }
  return r;
}

GrayRaster load_gray_png(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_gray_png(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_gray_png(const GrayRaster& raster, const std::filesystem::path& path) {
  if (raster.bit_depth != 8 && raster.bit_depth != 16) {
    throw Error(errc::kInvalidArgument, "gray PNG bit depth must be 8 or 16");
  }
  const std::size_t bpp = raster.bit_depth == 16 ? 2 : 1;
  const std::size_t stride = static_cast<std::size_t>(raster.width) * bpp;
  std::vector<std::uint8_t> packed(stride * static_cast<std::size_t>(raster.height));
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    if (bpp == 2) {
      packed[2 * i] = static_cast<std::uint8_t>(raster.values[i] >> 8);
      packed[2 * i + 1] = static_cast<std::uint8_t>(raster.values[i] & 0xFF);
    } else {
      packed[i] = static_cast<std::uint8_t>(std::min<std::uint16_t>(raster.values[i], 255));
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(raster.height));
  for (int y = 0; y < raster.height; ++y) {
    rows[static_cast<std::size_t>(y)] = packed.data() + static_cast<std::size_t>(y) * stride;
  }
  std::vector<std::uint8_t> out;
  std::string message;
  if (!encode_png_raw(raster.width, raster.height, PNG_COLOR_TYPE_GRAY, raster.bit_depth, rows,
                      out, message)) {
    throw Error(errc::kIo, fmt::format("PNG encode failed: {}", message));
  }
  write_file_bytes(path, out);
}

DepthMap depth_from_gray(const GrayRaster& raster, double max_range_m) {
  DepthMap depth;
  depth.width = raster.width;
  depth.height = raster.height;
  depth.max_range_m = max_range_m;
  const double stored_max = raster.bit_depth == 16 ? 65535.0 : 255.0;
  depth.depth.resize(raster.values.size());
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    const double d = 1.0 - raster.values[i] / stored_max;
    depth.depth[i] = static_cast<float>(std::clamp(d, 0.0, 1.0));
  }
  return depth;
}

DepthMap load_depth(const std::filesystem::path& path, double max_range_m) {
  return depth_from_gray(load_gray_png(path), max_range_m);
}

SegMap load_seg(const std::filesystem::path& path, ClassRoles roles) {
  const GrayRaster raster = load_gray_png(path);
  SegMap seg;
  seg.width = raster.width;
  seg.height = raster.height;
  seg.roles = std::move(roles);
  seg.class_ids.resize(raster.values.size());
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    seg.class_ids[i] = static_cast<std::uint8_t>(std::min<std::uint16_t>(raster.values[i], 255));
  }
  return seg;
}

}  // namespace wxforge
