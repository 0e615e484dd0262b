#include "moodisp/io.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "moodisp/inverse_isp.hpp"

namespace moodisp {

namespace {

constexpr Eigen::Index kMaxDimension = 1 << 16;
constexpr Eigen::Index kMaxPixels = Eigen::Index(1) << 28;

void check_dimensions(long long w, long long h) {
  if (w < 1 || h < 1) throw IoError("image has zero size");
  if (w > kMaxDimension || h > kMaxDimension || w * h > kMaxPixels)
    throw IoError("image dimensions overflow supported limits");
}

std::string lower_extension(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// ---------------------------------------------------------------------------
// PPM (binary P6, big-endian samples when maxval > 255)
// ---------------------------------------------------------------------------

template <typename Code>
std::vector<std::uint8_t> write_ppm(const CodeImage<Code>& img) {
  if (img.empty()) throw DomainError("cannot encode an empty image");
  constexpr int bytes = sizeof(Code);
  const std::string header = "P6\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" +
                             (bytes == 2 ? "65535" : "255") + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(img.r.size()) * 3 * bytes);
  for (Eigen::Index y = 0; y < img.height(); ++y)
    for (Eigen::Index x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const unsigned v = img.channel(c)(y, x);
        if constexpr (bytes == 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
      }
  return out;
}

class PpmReader {
 public:
  explicit PpmReader(const std::vector<std::uint8_t>& b) : buf_(b) {}

  long long next_int() {
    skip_space_and_comments();
    long long v = 0;
    bool any = false;
    while (pos_ < buf_.size() && std::isdigit(buf_[pos_])) {
      v = v * 10 + (buf_[pos_++] - '0');
      any = true;
      if (v > (1LL << 40)) throw IoError("PPM: header value overflow");
    }
    if (!any) throw IoError("PPM: malformed header");
    return v;
  }

  int decode(Srgb8Image& out8, Linear16Image& out16) {
    if (buf_.size() < 2 || buf_[0] != 'P' || buf_[1] != '6')
      throw IoError("PPM: only binary P6 is supported");
    pos_ = 2;
    const long long w = next_int(), h = next_int(), maxval = next_int();
    check_dimensions(w, h);
    if (pos_ >= buf_.size() || !std::isspace(buf_[pos_])) throw IoError("PPM: malformed header");
    ++pos_;
    int depth;
    if (maxval == 255)
      depth = 8;
    else if (maxval == 65535)
      depth = 16;
    else
      throw IoError("PPM: unsupported maxval " + std::to_string(maxval));
    const std::size_t need = static_cast<std::size_t>(w * h * 3 * (depth / 8));
    if (buf_.size() - pos_ < need) throw IoError("PPM: truncated pixel data");
    const std::uint8_t* p = buf_.data() + pos_;
    if (depth == 8) {
      out8 = Srgb8Image(w, h);
      for (long long y = 0; y < h; ++y)
        for (long long x = 0; x < w; ++x)
          for (int c = 0; c < 3; ++c) out8.channel(c)(y, x) = *p++;
    } else {
      out16 = Linear16Image(w, h);
      for (long long y = 0; y < h; ++y)
        for (long long x = 0; x < w; ++x)
          for (int c = 0; c < 3; ++c) {
            out16.channel(c)(y, x) = static_cast<std::uint16_t>((p[0] << 8) | p[1]);
            p += 2;
          }
    }
    return depth;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < buf_.size()) {
      if (std::isspace(buf_[pos_])) {
        ++pos_;
      } else if (buf_[pos_] == '#') {
        while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// PNG through libpng with in-memory callbacks
// ---------------------------------------------------------------------------

struct PngSink {
  std::vector<std::uint8_t>* out;
};

struct PngSource {
  const std::vector<std::uint8_t>* in;
  std::size_t pos;
};

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<PngSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + len);
}

void png_flush_cb(png_structp) {}

void png_read_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->in->size() - src->pos < len) png_error(png, "truncated PNG data");
  std::memcpy(data, src->in->data() + src->pos, len);
  src->pos += len;
}

template <typename Code>
std::vector<std::uint8_t> write_png(const CodeImage<Code>& img) {
  if (img.empty()) throw DomainError("cannot encode an empty image");
  constexpr int bytes = sizeof(Code);
  const auto w = static_cast<std::size_t>(img.width());
  const auto h = static_cast<std::size_t>(img.height());
  std::vector<std::uint8_t> pixels(w * h * 3 * bytes);
  std::size_t k = 0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const unsigned v = img.channel(c)(y, x);
        if constexpr (bytes == 2) pixels[k++] = static_cast<std::uint8_t>(v >> 8);
        pixels[k++] = static_cast<std::uint8_t>(v & 0xff);
      }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * w * 3 * bytes;

  std::vector<std::uint8_t> out;
  PngSink sink{&out};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("PNG: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG: encoding failed");
  }
  png_set_write_fn(png, &sink, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bytes * 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (bytes == 1) png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
  else png_set_gAMA(png, info, 1.0);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

int read_png(const std::vector<std::uint8_t>& bytes, Srgb8Image& out8, Linear16Image& out16) {
  PngSource src{&bytes, 0};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int depth = 0;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("PNG: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("PNG: malformed or truncated file");
  }
  png_set_read_fn(png, &src, png_read_cb);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (w < 1 || h < 1 || w > kMaxDimension || h > kMaxDimension ||
      Eigen::Index(w) * Eigen::Index(h) > kMaxPixels || png_get_channels(png, info) != 3 ||
      (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("PNG: unsupported dimensions or layout");
  }
  pixels.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (depth == 8) {
    out8 = Srgb8Image(w, h);
    for (png_uint_32 y = 0; y < h; ++y)
      for (png_uint_32 x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) out8.channel(c)(y, x) = rows[y][3 * x + c];
  } else {
    out16 = Linear16Image(w, h);
    for (png_uint_32 y = 0; y < h; ++y)
      for (png_uint_32 x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) {
          const png_bytep p = rows[y] + 6 * x + 2 * c;
          out16.channel(c)(y, x) = static_cast<std::uint16_t>((p[0] << 8) | p[1]);
        }
  }
  return depth;
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

ImageFormat format_for_path(const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw DomainError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  const auto ext = lower_extension(path);
  if (ext == ".png") return bit_depth == 16 ? ImageFormat::Png16 : ImageFormat::Png8;
  if (ext == ".ppm") return bit_depth == 16 ? ImageFormat::Ppm16 : ImageFormat::Ppm8;
  throw IoError("unsupported image extension '" + ext + "' (expected .ppm or .png)");
}

std::vector<std::uint8_t> encode_ppm(const Linear16Image& img) { return write_ppm(img); }
std::vector<std::uint8_t> encode_ppm(const Srgb8Image& img) { return write_ppm(img); }
std::vector<std::uint8_t> encode_png(const Linear16Image& img) { return write_png(img); }
std::vector<std::uint8_t> encode_png(const Srgb8Image& img) { return write_png(img); }

int decode_image(const std::vector<std::uint8_t>& bytes, Srgb8Image& out8, Linear16Image& out16) {
  if (is_png(bytes)) return read_png(bytes, out8, out16);
  if (bytes.size() >= 2 && bytes[0] == 'P') return PpmReader(bytes).decode(out8, out16);
  throw IoError("unsupported image format (expected P6 PPM or PNG)");
}

ImageFormat detect_format(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  Srgb8Image a;
  Linear16Image b;
  const int depth = decode_image(bytes, a, b);
  if (is_png(bytes)) return depth == 16 ? ImageFormat::Png16 : ImageFormat::Png8;
  return depth == 16 ? ImageFormat::Ppm16 : ImageFormat::Ppm8;
}

Linear16Image load_linear16(const std::string& path) {
  Srgb8Image a;
  Linear16Image b;
  if (decode_image(read_file_bytes(path), a, b) != 16)
    throw IoError("'" + path + "' is 8-bit sRGB, expected 16-bit linear");
  return b;
}

Srgb8Image load_srgb8(const std::string& path) {
  Srgb8Image a;
  Linear16Image b;
  if (decode_image(read_file_bytes(path), a, b) != 8)
    throw IoError("'" + path + "' is 16-bit linear, expected 8-bit sRGB");
  return a;
}

void save_linear16(const Linear16Image& img, const ImageFile& file) {
  if (colorspace_of(file.format) != Colorspace::Linear)
    throw DomainError("16-bit linear data cannot be stored in an 8-bit sRGB format");
  write_file_bytes(file.path, file.format == ImageFormat::Png16 ? encode_png(img) : encode_ppm(img));
}

void save_srgb8(const Srgb8Image& img, const ImageFile& file) {
  if (colorspace_of(file.format) != Colorspace::Srgb)
    throw DomainError("8-bit sRGB data cannot be stored in a 16-bit linear format");
  write_file_bytes(file.path, file.format == ImageFormat::Png8 ? encode_png(img) : encode_ppm(img));
}

Image load_image(const std::string& path) {
  Srgb8Image a;
  Linear16Image b;
  if (decode_image(read_file_bytes(path), a, b) == 16) return dequantize_linear16(b);
  return linearize(a, InverseConfig::srgb());
}

void save_image(const Image& img, const ImageFile& file) {
  img.validate();
  if (colorspace_of(file.format) == Colorspace::Linear)
    save_linear16(quantize_linear16(img), file);
  else
    save_srgb8(delinearize(img, InverseConfig::srgb()), file);
}

void save_encoded(const EncodedImage& img, const std::string& path) {
  const int depth = std::holds_alternative<Linear16Image>(img) ? 16 : 8;
  const ImageFile file{path, format_for_path(path, depth)};
  if (depth == 16)
    save_linear16(std::get<Linear16Image>(img), file);
  else
    save_srgb8(std::get<Srgb8Image>(img), file);
}

}  // namespace moodisp
