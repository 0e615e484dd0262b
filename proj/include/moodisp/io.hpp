#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moodisp/image_codes.hpp"
#include "moodisp/pipeline.hpp"

namespace moodisp {

/// On-disk image formats.  16-bit formats carry linear light, 8-bit formats
/// carry sRGB-encoded codes; there is no way to store one as the other.
enum class ImageFormat { Ppm16, Png16, Png8, Ppm8 };

enum class Colorspace { Linear, Srgb };

inline Colorspace colorspace_of(ImageFormat f) {
  return (f == ImageFormat::Ppm16 || f == ImageFormat::Png16) ? Colorspace::Linear
                                                              : Colorspace::Srgb;
}
inline int bit_depth_of(ImageFormat f) {
  return (f == ImageFormat::Ppm16 || f == ImageFormat::Png16) ? 16 : 8;
}

struct ImageFile {
  std::string path;
  ImageFormat format = ImageFormat::Ppm16;
};

/// Picks the format from the file extension (.ppm / .png) and bit depth.
ImageFormat format_for_path(const std::string& path, int bit_depth);

/// Sniffs the on-disk format from the file contents.
ImageFormat detect_format(const std::string& path);

// Integer-coded access.  Loading a file of the other bit depth throws IoError.
Linear16Image load_linear16(const std::string& path);
Srgb8Image load_srgb8(const std::string& path);
void save_linear16(const Linear16Image& img, const ImageFile& file);
void save_srgb8(const Srgb8Image& img, const ImageFile& file);

/// Any supported file as linear light: 16-bit samples map by sample/65535,
/// 8-bit codes go through the sRGB inverse transfer.
Image load_image(const std::string& path);
/// 16-bit formats store round(sample * 65535); 8-bit formats store the
/// sRGB-encoded, round-half-up code.  Empty images throw DomainError.
void save_image(const Image& img, const ImageFile& file);
/// Writes an encoded render; the container follows the extension (.png or .ppm).
void save_encoded(const EncodedImage& img, const std::string& path);

// In-memory codecs (bit-exact with the file paths above).
std::vector<std::uint8_t> encode_ppm(const Linear16Image& img);
std::vector<std::uint8_t> encode_ppm(const Srgb8Image& img);
std::vector<std::uint8_t> encode_png(const Linear16Image& img);
std::vector<std::uint8_t> encode_png(const Srgb8Image& img);

/// Decodes a PPM or PNG byte buffer; exactly one of the outputs is filled and
/// the return value is its bit depth (8 or 16).
int decode_image(const std::vector<std::uint8_t>& bytes, Srgb8Image& out8, Linear16Image& out16);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace moodisp
