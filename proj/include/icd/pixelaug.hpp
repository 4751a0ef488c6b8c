#ifndef ICD_PIXELAUG_HPP
#define ICD_PIXELAUG_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace icd {

/// 8-bit RGB raster, row-major, channels interleaved.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height);
  RgbImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  std::uint8_t at(int x, int y, int channel) const { return pixels_[index(x, y, channel)]; }
  std::uint8_t& at(int x, int y, int channel) { return pixels_[index(x, y, channel)]; }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t index(int x, int y, int channel) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3 +
           static_cast<std::size_t>(channel);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// v -> 255 - v on one channel.
RgbImage invert_channel(const RgbImage& img, int channel);

/// Output channel i takes input channel permutation[i].
RgbImage swap_channels(const RgbImage& img, const std::array<int, 3>& permutation);

struct ChannelOffset {
  int dx = 0;
  int dy = 0;
};

enum class ShiftMode { zero_fill, wrap };

/// Translates each channel independently: out(x, y) = in(x - dx, y - dy).
/// Pixels shifted in from outside the frame are 0 (or wrap around).
RgbImage shift_channels(const RgbImage& img, const std::array<ChannelOffset, 3>& offsets,
                        ShiftMode mode = ShiftMode::zero_fill);

/// Binary PPM (P6), maxval 255.
std::string encode_ppm(const RgbImage& img);
RgbImage decode_ppm(std::string_view bytes);
RgbImage read_ppm(const std::string& path);
void write_ppm(const RgbImage& img, const std::string& path);

}  // namespace icd

#endif  // ICD_PIXELAUG_HPP
