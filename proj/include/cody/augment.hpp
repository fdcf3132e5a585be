#pragma once

#include <utility>
#include <vector>

#include "cody/common.hpp"
#include "cody/replay.hpp"
#include "cody/rng.hpp"

namespace cody {

/// Random image-shift augmentation: pad by max_shift with edge replication,
/// crop back at a random offset. Works on uint8, before float conversion.
struct AugmentSpec {
  int max_shift = 4;
};

struct ShiftOffset {
  int dx = 0, dy = 0;
};

/// Shifts every row by its own (dx, dy); content moves by +dx right, +dy
/// down, out-of-range reads replicate the nearest edge pixel. All stacked
/// frames (channels) of one row share the row's offset.
inline ObsBatch shift_batch(const ObsBatch& in, const std::vector<ShiftOffset>& offsets) {
  check_shape(static_cast<int>(offsets.size()) == in.n, "shift_batch: one offset per row");
  ObsBatch out;
  out.resize(in.n, in.channels, in.height, in.width);
  for (int ni = 0; ni < in.n; ++ni) {
    const int dx = offsets[ni].dx, dy = offsets[ni].dy;
    for (int c = 0; c < in.channels; ++c)
      for (int y = 0; y < in.height; ++y) {
        const int sy = std::min(in.height - 1, std::max(0, y - dy));
        for (int x = 0; x < in.width; ++x) {
          const int sx = std::min(in.width - 1, std::max(0, x - dx));
          out.at(ni, c, y, x) = in.at(ni, c, sy, sx);
        }
      }
  }
  return out;
}

inline std::vector<ShiftOffset> draw_offsets(int n, const AugmentSpec& spec, Rng& rng) {
  std::vector<ShiftOffset> offs(static_cast<std::size_t>(n));
  for (auto& o : offs) {
    o.dx = rng.uniform_int(-spec.max_shift, spec.max_shift);
    o.dy = rng.uniform_int(-spec.max_shift, spec.max_shift);
  }
  return offs;
}

/// Independently shifts each batch row by integer offsets uniform on
/// [-max_shift, max_shift]^2. Output shape equals input shape.
inline ObsBatch random_shift(const ObsBatch& in, const AugmentSpec& spec, Rng& rng,
                             std::vector<ShiftOffset>* drawn = nullptr) {
  check_shape(in.height >= 2 * spec.max_shift + 1 && in.width >= 2 * spec.max_shift + 1,
              "random_shift: image smaller than 2*max_shift+1");
  auto offs = draw_offsets(in.n, spec, rng);
  if (drawn) *drawn = offs;
  return shift_batch(in, offs);
}

/// Two independent augmentations of the same batch.
inline std::pair<ObsBatch, ObsBatch> two_views(const ObsBatch& in, const AugmentSpec& spec,
                                               Rng& rng) {
  ObsBatch v1 = random_shift(in, spec, rng);
  ObsBatch v2 = random_shift(in, spec, rng);
  return {std::move(v1), std::move(v2)};
}

}  // namespace cody
