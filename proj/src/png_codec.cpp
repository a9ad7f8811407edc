// libpng-backed PNG reading and writing for label masks and RGB images.

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <memory>

#include "morphocv/raster_io.hpp"
#include "morphocv/rendering.hpp"

namespace morphocv {
namespace {

constexpr std::size_t kSignatureBytes = 8;

struct ReadState {
  std::string_view src;
  std::size_t pos = 0;
  std::string error;
  png_structp png = nullptr;
  png_infop info = nullptr;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> row_pointers;

  ~ReadState() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

void on_read(png_structp png, png_bytep out, png_size_t n) {
  auto* state = static_cast<ReadState*>(png_get_io_ptr(png));
  if (state->src.size() - state->pos < n) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, state->src.data() + state->pos, n);
  state->pos += n;
}

void on_error(png_structp png, png_const_charp msg) {
  auto* state = static_cast<ReadState*>(png_get_error_ptr(png));
  state->error = msg ? msg : "unknown libpng error";
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

// Decodes into one byte per sample. Only the header is read when
// header_only is set. Returns false on a libpng error (message in state).
// Everything touched after setjmp lives in *state so the longjmp skips no
// destructors.
bool read_png(ReadState* state, bool header_only, bool to_rgb) {
  if (setjmp(png_jmpbuf(state->png))) return false;

  png_set_read_fn(state->png, state, on_read);
  png_read_info(state->png, state->info);
  png_get_IHDR(state->png, state->info, &state->width, &state->height,
               &state->bit_depth, &state->color_type, nullptr, nullptr, nullptr);
  if (header_only) return true;

  if (to_rgb) {
    png_set_expand(state->png);
    png_set_strip_16(state->png);
    png_set_strip_alpha(state->png);
    png_set_gray_to_rgb(state->png);
  } else {
    png_set_packing(state->png);
  }
  png_set_interlace_handling(state->png);
  png_read_update_info(state->png, state->info);

  const std::size_t row_bytes = png_get_rowbytes(state->png, state->info);
  state->pixels.resize(row_bytes * state->height);
  state->row_pointers.resize(state->height);
  for (png_uint_32 r = 0; r < state->height; ++r) {
    state->row_pointers[r] = state->pixels.data() + r * row_bytes;
  }
  png_read_image(state->png, state->row_pointers.data());
  png_read_end(state->png, nullptr);
  return true;
}

std::unique_ptr<ReadState> open_png(std::string_view bytes) {
  if (bytes.size() < kSignatureBytes ||
      png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0,
                  kSignatureBytes) != 0) {
    throw Error(Errc::kPngDecode, "not a PNG file");
  }
  auto state = std::make_unique<ReadState>();
  state->src = bytes;
  state->png = png_create_read_struct(PNG_LIBPNG_VER_STRING, state.get(), on_error,
                                      on_warning);
  if (!state->png) throw Error(Errc::kPngDecode, "png_create_read_struct failed");
  state->info = png_create_info_struct(state->png);
  if (!state->info) throw Error(Errc::kPngDecode, "png_create_info_struct failed");
  return state;
}

std::string write_png(const std::uint8_t* pixels, std::size_t rows, std::size_t cols,
                      png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(cols);
  image.height = static_cast<png_uint_32>(rows);
  image.format = format;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
    throw Error(Errc::kIo, std::string("PNG encode failed: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
    throw Error(Errc::kIo, std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

LabelGrid read_label_png(std::string_view bytes) {
  auto state = open_png(bytes);
  if (!read_png(state.get(), true, false)) {
    throw Error(Errc::kPngDecode, "PNG decode failed: " + state->error);
  }
  const bool single_channel = state->color_type == PNG_COLOR_TYPE_GRAY ||
                              state->color_type == PNG_COLOR_TYPE_PALETTE;
  if (!single_channel || state->bit_depth > 8) {
    throw Error(Errc::kUnsupportedPngFormat,
                "label PNG must be single-channel with at most 8 bits per pixel "
                "(got color type " + std::to_string(state->color_type) +
                    ", bit depth " + std::to_string(state->bit_depth) + ")");
  }

  // Header parsing consumed input; decode again from the start.
  state = open_png(bytes);
  if (!read_png(state.get(), false, false)) {
    throw Error(Errc::kPngDecode, "PNG decode failed: " + state->error);
  }
  LabelGrid labels(state->height, state->width);
  auto dst = labels.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = state->pixels[i];
  return labels;
}

std::string write_label_png(const LabelGrid& labels) {
  std::vector<std::uint8_t> pixels(labels.size());
  auto src = labels.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] > 255) {
      throw Error(Errc::kInvalidArgument,
                  "instance id " + std::to_string(src[i]) + " does not fit an 8-bit PNG");
    }
    pixels[i] = static_cast<std::uint8_t>(src[i]);
  }
  return write_png(pixels.data(), labels.rows(), labels.cols(), PNG_FORMAT_GRAY);
}

std::string encode_png(const RgbImage& img) {
  static_assert(sizeof(Rgb) == 3);
  return write_png(reinterpret_cast<const std::uint8_t*>(img.values().data()),
                   img.rows(), img.cols(), PNG_FORMAT_RGB);
}

RgbImage decode_png(std::string_view bytes) {
  auto state = open_png(bytes);
  if (!read_png(state.get(), false, true)) {
    throw Error(Errc::kPngDecode, "PNG decode failed: " + state->error);
  }
  RgbImage img(state->height, state->width);
  std::memcpy(img.values().data(), state->pixels.data(), img.size() * sizeof(Rgb));
  return img;
}

}  // namespace morphocv
