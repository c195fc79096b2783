#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chal/network.hpp"

namespace chal {

// Binary model format, little-endian throughout:
//   "CHLG"  u16 version  u16 layer_count  u16 input_rank  u32[rank] dims
//   per layer: u8 tag (1 dense, 2 conv, 3 relu, 4 maxpool, 5 flatten)
//     dense: u32 in, u32 out      conv: u32 in_ch, out_ch, kh, kw, stride
//   then all parameters as f64, layer order, weight before bias, row-major.
inline constexpr std::uint16_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, bad_version, truncated, malformed };

  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> checkpoint_bytes(const Network& net);
Network network_from_bytes(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace chal
