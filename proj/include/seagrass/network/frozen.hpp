#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>

#include "seagrass/network/model.hpp"

namespace seagrass::network {

inline constexpr int kFrozenFormatVersion = 1;

/// Frozen-model file layout:
///
///   SEAGRASS-FROZEN-MODEL
///   format_version 1
///   input_height <n>            input_width <n> (one field per line)
///   channel_widths <w1> .. <w5>
///   fc_channels <n> / fc_kernel <n> / num_classes <n> / width_divisor <n>
///   param_count <n>
///   param <name> <d0> <d1> <d2> <d3> <byte offset>   (one line per tensor)
///   blob_bytes <n>
///   checksum fnv1a64 <16 hex digits>
///   end
///
/// followed by every tensor as little-endian IEEE-754 float32 in table order. The
/// checksum is 64-bit FNV-1a over the blob section.
class FrozenModelError : public std::runtime_error {
 public:
  enum class Kind { Io, UnknownVersion, Truncated, ChecksumMismatch, Malformed };

  FrozenModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

void freeze(const Model& model, const std::filesystem::path& path);
Model load_frozen(const std::filesystem::path& path);

/// Upper bound on the frozen file size of a config: 4 bytes per parameter plus
/// 512 bytes of fixed header and 160 bytes per parameter-table line.
std::size_t frozen_size_bound(const NetworkConfig& config);

}  // namespace seagrass::network
