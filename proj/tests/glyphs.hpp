#pragma once

// Procedural 28x28 digit images for the end-to-end checks. Each sample
// renders a 5x7 bitmap glyph with a random scale, offset and intensity,
// then a box blur and pixel noise. The generator is pure: one seed, one
// dataset. Difficulty is controlled by the noise level and jitter ranges.

#include <array>
#include <cstdint>
#include <string>

#include "chal/data.hpp"
#include "chal/rng.hpp"
#include "chal/tensor.hpp"

namespace testutil {

inline const std::array<std::array<const char*, 7>, 10>& glyph_font() {
  static const std::array<std::array<const char*, 7>, 10> font = {{
      {"01110", "10001", "10011", "10101", "11001", "10001", "01110"},
      {"00100", "01100", "00100", "00100", "00100", "00100", "01110"},
      {"01110", "10001", "00001", "00010", "00100", "01000", "11111"},
      {"11111", "00010", "00100", "00010", "00001", "10001", "01110"},
      {"00010", "00110", "01010", "10010", "11111", "00010", "00010"},
      {"11111", "10000", "11110", "00001", "00001", "10001", "01110"},
      {"00110", "01000", "10000", "11110", "10001", "10001", "01110"},
      {"11111", "00001", "00010", "00100", "01000", "01000", "01000"},
      {"01110", "10001", "10001", "01110", "10001", "10001", "01110"},
      {"01110", "10001", "10001", "01111", "00001", "00010", "01100"},
  }};
  return font;
}

inline void render_glyph(double* pixels, std::size_t digit, chal::Rng& rng,
                         double noise) {
  constexpr std::size_t kSide = 28;
  const auto& rows = glyph_font()[digit];

  const double sx = 2.8 + rng.uniform() * 0.8;  // glyph cell size in pixels
  const double sy = 3.0 + rng.uniform() * 0.6;
  const double ox = (kSide - 5.0 * sx) / 2.0 + (rng.uniform() * 6.0 - 3.0);
  const double oy = (kSide - 7.0 * sy) / 2.0 + (rng.uniform() * 6.0 - 3.0);
  const double intensity = 0.75 + rng.uniform() * 0.25;

  std::array<double, kSide * kSide> ink{};
  for (std::size_t r = 0; r < kSide; ++r) {
    for (std::size_t c = 0; c < kSide; ++c) {
      const int gy = static_cast<int>((static_cast<double>(r) - oy) / sy);
      const int gx = static_cast<int>((static_cast<double>(c) - ox) / sx);
      if (gy >= 0 && gy < 7 && gx >= 0 && gx < 5 &&
          rows[static_cast<std::size_t>(gy)][gx] == '1') {
        ink[r * kSide + c] = intensity;
      }
    }
  }

  for (std::size_t r = 0; r < kSide; ++r) {
    for (std::size_t c = 0; c < kSide; ++c) {
      double sum = 0.0;
      int hits = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = static_cast<int>(r) + dr;
          const int cc = static_cast<int>(c) + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<int>(kSide) ||
              cc >= static_cast<int>(kSide)) {
            continue;
          }
          sum += ink[static_cast<std::size_t>(rr) * kSide +
                     static_cast<std::size_t>(cc)];
          hits += 1;
        }
      }
      double v = sum / hits + rng.normal() * noise;
      pixels[r * kSide + c] = std::min(1.0, std::max(0.0, v));
    }
  }
}

// per_class samples of each digit 0..9, classes interleaved 0,1,...,9,0,1,...
inline chal::Dataset glyph_digits(std::size_t per_class, std::uint64_t seed,
                                  double noise = 0.15) {
  chal::Dataset ds;
  const std::size_t n = per_class * 10;
  ds.inputs = chal::Tensor({n, 1, 28, 28});
  ds.labels.resize(n);
  ds.classes = 10;
  chal::Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t digit = i % 10;
    ds.labels[i] = digit;
    render_glyph(&ds.inputs.values()[i * 28 * 28], digit, rng, noise);
  }
  return ds;
}

}  // namespace testutil
