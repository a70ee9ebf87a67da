/* Copyright 2026 The fundus-prep Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "fprep/image_io.hpp"

#include <png.h>

#include <array>
#include <cerrno>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <jpeglib.h>

namespace fprep {

namespace {

std::string kind_label(ImageIoError::Kind kind) {
  switch (kind) {
    case ImageIoError::Kind::io: return "I/O error";
    case ImageIoError::Kind::unsupported_format: return "unsupported format";
    case ImageIoError::Kind::corrupt_stream: return "corrupt stream";
    case ImageIoError::Kind::precondition: return "precondition violated";
  }
  return "error";
}

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  return FilePtr(std::fopen(path.c_str(), mode), &std::fclose);
}

Image load_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    std::string cause = png.message;
    png_image_free(&png);
    throw ImageIoError(ImageIoError::Kind::corrupt_stream, path, cause);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  // Zeroed buffer: alpha composites onto black.
  std::vector<std::uint8_t> samples(PNG_IMAGE_SIZE(png), 0);
  if (!png_image_finish_read(&png, nullptr, samples.data(), 0, nullptr)) {
    std::string cause = png.message;
    png_image_free(&png);
    throw ImageIoError(ImageIoError::Kind::corrupt_stream, path, cause);
  }
  return Image(static_cast<int>(png.width), static_cast<int>(png.height), channels,
               std::move(samples));
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_output_message(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
}

// Kept free of objects with non-trivial destructors between setjmp and the
// libjpeg calls that may longjmp.
bool decode_jpeg(std::FILE* file, std::vector<std::uint8_t>& samples, int& width, int& height,
                 int& channels, std::string& cause) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.pub.output_message = jpeg_output_message;
  jerr.message[0] = '\0';
  if (setjmp(jerr.jump)) {
    cause = jerr.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components == 1) {
    cinfo.out_color_space = JCS_GRAYSCALE;
  } else if (cinfo.jpeg_color_space == JCS_YCbCr || cinfo.jpeg_color_space == JCS_RGB) {
    cinfo.out_color_space = JCS_RGB;
  } else {
    std::snprintf(jerr.message, sizeof jerr.message, "unsupported JPEG color space %d",
                  static_cast<int>(cinfo.jpeg_color_space));
    std::longjmp(jerr.jump, 1);
  }
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  samples.assign(static_cast<std::size_t>(width) * height * channels, 0);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = samples.data() + static_cast<std::size_t>(cinfo.output_scanline) * width *
                                        channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  const bool warned = jerr.pub.num_warnings > 0;
  if (warned) cause = jerr.message;
  jpeg_destroy_decompress(&cinfo);
  return !warned;
}

bool read_jpeg_header(std::FILE* file, ImageInfo& info, std::string& cause) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.pub.output_message = jpeg_output_message;
  if (setjmp(jerr.jump)) {
    cause = jerr.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  info.width = static_cast<int>(cinfo.image_width);
  info.height = static_cast<int>(cinfo.image_height);
  info.channels = cinfo.num_components == 1 ? 1 : 3;
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Image load_jpeg(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  if (!file) throw ImageIoError(ImageIoError::Kind::io, path, std::strerror(errno));
  std::vector<std::uint8_t> samples;
  int width = 0, height = 0, channels = 0;
  std::string cause;
  if (!decode_jpeg(file.get(), samples, width, height, channels, cause)) {
    throw ImageIoError(ImageIoError::Kind::corrupt_stream, path, cause);
  }
  return Image(width, height, channels, std::move(samples));
}

bool encode_jpeg(std::FILE* file, const Image& image, int quality, std::string& cause) {
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.pub.output_message = jpeg_output_message;
  if (setjmp(jerr.jump)) {
    cause = jerr.message;
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file);
  cinfo.image_width = static_cast<JDIMENSION>(image.width());
  cinfo.image_height = static_cast<JDIMENSION>(image.height());
  cinfo.input_components = image.channels();
  cinfo.in_color_space = image.channels() == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const auto samples = image.u8();
  const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(samples.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace

ImageIoError::ImageIoError(Kind kind, const std::filesystem::path& path, const std::string& cause)
    : std::runtime_error(kind_label(kind) + ": " + path.string() + ": " + cause),
      kind_(kind),
      path_(path) {}

namespace {

ImageFormat sniff_format(const std::filesystem::path& path) {
  std::array<unsigned char, 8> magic{};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(ImageIoError::Kind::io, path, "cannot open file");
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  if (in.gcount() < 3) {
    throw ImageIoError(ImageIoError::Kind::corrupt_stream, path, "file too short");
  }
  static constexpr std::array<unsigned char, 8> kPng{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (std::equal(kPng.begin(), kPng.end(), magic.begin())) return ImageFormat::png;
  if (magic[0] == 0xff && magic[1] == 0xd8 && magic[2] == 0xff) return ImageFormat::jpeg;
  throw ImageIoError(ImageIoError::Kind::unsupported_format, path,
                     "not a PNG or JPEG file signature");
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  return sniff_format(path) == ImageFormat::png ? load_png(path) : load_jpeg(path);
}

ImageInfo probe_image(const std::filesystem::path& path) {
  ImageInfo info;
  if (sniff_format(path) == ImageFormat::png) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
      std::string cause = png.message;
      png_image_free(&png);
      throw ImageIoError(ImageIoError::Kind::corrupt_stream, path, cause);
    }
    info.width = static_cast<int>(png.width);
    info.height = static_cast<int>(png.height);
    info.channels = (png.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
    png_image_free(&png);
    return info;
  }
  FilePtr file = open_file(path, "rb");
  if (!file) throw ImageIoError(ImageIoError::Kind::io, path, std::strerror(errno));
  std::string cause;
  if (!read_jpeg_header(file.get(), info, cause)) {
    throw ImageIoError(ImageIoError::Kind::corrupt_stream, path, cause);
  }
  return info;
}

void save_image(const Image& image, const std::filesystem::path& path, ImageFormat format,
                int jpeg_quality) {
  if (image.kind() != SampleKind::u8) {
    throw ImageIoError(ImageIoError::Kind::precondition, path,
                       "real-sample image must be converted to 8-bit before saving");
  }
  const auto parent = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (!std::filesystem::is_directory(parent)) {
    throw ImageIoError(ImageIoError::Kind::io, path, "directory does not exist");
  }

  if (format == ImageFormat::png) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, image.u8().data(), 0, nullptr)) {
      std::string cause = png.message;
      png_image_free(&png);
      throw ImageIoError(ImageIoError::Kind::io, path, cause);
    }
    return;
  }

  FilePtr file = open_file(path, "wb");
  if (!file) throw ImageIoError(ImageIoError::Kind::io, path, std::strerror(errno));
  std::string cause;
  if (!encode_jpeg(file.get(), image, jpeg_quality, cause)) {
    throw ImageIoError(ImageIoError::Kind::io, path, cause);
  }
  if (std::fflush(file.get()) != 0) {
    throw ImageIoError(ImageIoError::Kind::io, path, std::strerror(errno));
  }
}

}  // namespace fprep
