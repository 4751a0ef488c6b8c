#include "icd/pixelaug.hpp"

#include <cctype>
#include <cstdlib>

#include "icd/binary_io.hpp"
#include "icd/errors.hpp"

namespace icd {

RgbImage::RgbImage(int width, int height) : RgbImage(width, height, {}) {}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw ValidationError("image dimensions must be positive");
  const std::size_t expected = pixel_count() * 3;
  if (pixels_.empty()) pixels_.assign(expected, 0);
  if (pixels_.size() != expected) {
    throw ValidationError("pixel buffer holds " + std::to_string(pixels_.size()) + " bytes, expected " +
                          std::to_string(expected));
  }
}

namespace {

void check_channel(int channel) {
  if (channel < 0 || channel > 2) throw DomainError("channel must be 0, 1 or 2");
}

int wrap(int v, int n) { return ((v % n) + n) % n; }

}  // namespace

RgbImage invert_channel(const RgbImage& img, int channel) {
  check_channel(channel);
  RgbImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out.at(x, y, channel) = static_cast<std::uint8_t>(255 - img.at(x, y, channel));
  }
  return out;
}

RgbImage swap_channels(const RgbImage& img, const std::array<int, 3>& permutation) {
  std::array<bool, 3> used{};
  for (int c : permutation) {
    if (c < 0 || c > 2 || used[static_cast<std::size_t>(c)]) throw DomainError("permutation must be a bijection on {0,1,2}");
    used[static_cast<std::size_t>(c)] = true;
  }
  RgbImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, permutation[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

RgbImage shift_channels(const RgbImage& img, const std::array<ChannelOffset, 3>& offsets, ShiftMode mode) {
  for (const auto& o : offsets) {
    if (std::abs(o.dx) >= img.width() || std::abs(o.dy) >= img.height()) {
      throw DomainError("channel offset (" + std::to_string(o.dx) + ", " + std::to_string(o.dy) + ") out of range for " +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
    }
  }
  RgbImage out(img.width(), img.height());
  for (int c = 0; c < 3; ++c) {
    const auto& o = offsets[static_cast<std::size_t>(c)];
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        int sx = x - o.dx;
        int sy = y - o.dy;
        if (mode == ShiftMode::wrap) {
          sx = wrap(sx, img.width());
          sy = wrap(sy, img.height());
        } else if (sx < 0 || sy < 0 || sx >= img.width() || sy >= img.height()) {
          continue;
        }
        out.at(x, y, c) = img.at(sx, sy, c);
      }
    }
  }
  return out;
}

std::string encode_ppm(const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels().data()), img.pixels().size());
  return out;
}

namespace {

/// Header tokenizer: whitespace separated, '#' comments to end of line.
class PpmHeader {
 public:
  explicit PpmHeader(std::string_view data) : data_(data) {}

  std::string_view token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_])) && data_[pos_] != '#') ++pos_;
    if (start == pos_) throw FormatError("truncated PPM header");
    return data_.substr(start, pos_ - start);
  }

  int number() {
    const auto t = token();
    int v = 0;
    for (char ch : t) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) throw FormatError("bad PPM header number '" + std::string(t) + "'");
      v = v * 10 + (ch - '0');
      if (v > 1 << 24) throw FormatError("PPM header number too large");
    }
    return v;
  }

  /// Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      throw FormatError("missing whitespace before PPM raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

RgbImage decode_ppm(std::string_view bytes) {
  PpmHeader header(bytes);
  if (header.token() != "P6") throw FormatError("not a binary PPM (P6)");
  const int width = header.number();
  const int height = header.number();
  const int maxval = header.number();
  if (width < 1 || height < 1) throw FormatError("PPM dimensions must be positive");
  if (maxval != 255) throw FormatError("only maxval 255 PPM is supported");
  const std::size_t start = header.raster_start();
  const std::size_t size = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (bytes.size() - start < size) throw IoError("truncated PPM raster");
  const auto* raster = reinterpret_cast<const std::uint8_t*>(bytes.data() + start);
  return RgbImage(width, height, std::vector<std::uint8_t>(raster, raster + size));
}

RgbImage read_ppm(const std::string& path) { return decode_ppm(binary::read_file(path)); }

void write_ppm(const RgbImage& img, const std::string& path) { binary::write_file(path, encode_ppm(img)); }

}  // namespace icd
