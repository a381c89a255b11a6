#include "seagrass/network/frozen.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace seagrass::network {

namespace {

using Kind = FrozenModelError::Kind;
constexpr const char* kMagic = "SEAGRASS-FROZEN-MODEL";

void put_le32(std::vector<unsigned char>& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

float get_le32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= std::uint32_t{p[i]} << (8 * i);
  return std::bit_cast<float>(bits);
}

[[noreturn]] void fail(Kind kind, const std::filesystem::path& path, const std::string& what) {
  throw FrozenModelError(kind, path.string() + ": " + what);
}

// Reads "<key> <values...>" and checks the key.
std::istringstream expect_line(std::istream& in, const std::string& key,
                               const std::filesystem::path& path) {
  std::string line;
  // Every header line ends in a newline; hitting end of file first means the file was cut.
  if (!std::getline(in, line) || in.eof()) fail(Kind::Truncated, path, "header ends before '" + key + "'");
  std::istringstream fields(line);
  std::string got;
  fields >> got;
  if (got != key) fail(Kind::Malformed, path, "expected '" + key + "', found '" + got + "'");
  return fields;
}

template <typename V>
V read_value(std::istream& in, const std::string& key, const std::filesystem::path& path) {
  auto fields = expect_line(in, key, path);
  V v{};
  if (!(fields >> v)) fail(Kind::Malformed, path, "bad value for '" + key + "'");
  return v;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void freeze(const Model& model, const std::filesystem::path& path) {
  const NetworkConfig& c = model.config();
  std::vector<unsigned char> blob;
  blob.reserve(model.parameter_count() * 4);
  std::ostringstream table;
  for (const auto& p : model.params()) {
    const auto& s = p.value.shape();
    table << "param " << p.name << ' ' << s.n << ' ' << s.c << ' ' << s.h << ' ' << s.w << ' '
          << blob.size() << '\n';
    for (float v : p.value.data()) put_le32(blob, v);
  }
  std::ostringstream header;
  header << kMagic << '\n'
         << "format_version " << kFrozenFormatVersion << '\n'
         << "input_height " << c.input_height << '\n'
         << "input_width " << c.input_width << '\n'
         << "channel_widths";
  for (auto w : c.channel_widths) header << ' ' << w;
  header << '\n'
         << "fc_channels " << c.fc_channels << '\n'
         << "fc_kernel " << c.fc_kernel << '\n'
         << "num_classes " << c.num_classes << '\n'
         << "width_divisor " << c.width_divisor << '\n'
         << "param_count " << model.params().size() << '\n'
         << table.str() << "blob_bytes " << blob.size() << '\n'
         << "checksum fnv1a64 " << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(blob)
         << std::dec << '\n'
         << "end\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Kind::Io, path, "cannot open for writing");
  const std::string text = header.str();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!out) fail(Kind::Io, path, "write failed");
}

Model load_frozen(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Kind::Io, path, "cannot open for reading");
  std::string magic;
  if (!std::getline(in, magic)) fail(Kind::Truncated, path, "empty file");
  if (magic != kMagic) fail(Kind::Malformed, path, "not a frozen model file");
  const int version = read_value<int>(in, "format_version", path);
  if (version != kFrozenFormatVersion) {
    fail(Kind::UnknownVersion, path, "unsupported format version " + std::to_string(version));
  }
  NetworkConfig config;
  config.input_height = read_value<std::size_t>(in, "input_height", path);
  config.input_width = read_value<std::size_t>(in, "input_width", path);
  {
    auto fields = expect_line(in, "channel_widths", path);
    for (auto& w : config.channel_widths) {
      if (!(fields >> w)) fail(Kind::Malformed, path, "bad channel_widths");
    }
  }
  config.fc_channels = read_value<std::size_t>(in, "fc_channels", path);
  config.fc_kernel = read_value<std::size_t>(in, "fc_kernel", path);
  config.num_classes = read_value<std::size_t>(in, "num_classes", path);
  config.width_divisor = read_value<std::size_t>(in, "width_divisor", path);

  Model model;
  try {
    model = Model::allocate(config);
  } catch (const std::invalid_argument& e) {
    fail(Kind::Malformed, path, e.what());
  }
  const auto count = read_value<std::size_t>(in, "param_count", path);
  if (count != model.params().size()) fail(Kind::Malformed, path, "parameter count does not match config");
  std::vector<std::size_t> offsets;
  for (auto& p : model.params()) {
    auto fields = expect_line(in, "param", path);
    std::string name;
    numerics::Shape s;
    std::size_t offset = 0;
    if (!(fields >> name >> s.n >> s.c >> s.h >> s.w >> offset)) {
      fail(Kind::Malformed, path, "bad parameter table entry");
    }
    if (name != p.name || !(s == p.value.shape())) {
      fail(Kind::Malformed, path, "parameter '" + name + "' does not match the config's layout");
    }
    offsets.push_back(offset);
  }
  const auto blob_bytes = read_value<std::size_t>(in, "blob_bytes", path);
  std::string checksum_text;
  {
    auto fields = expect_line(in, "checksum", path);
    std::string algo;
    if (!(fields >> algo >> checksum_text) || algo != "fnv1a64" || checksum_text.size() != 16) {
      fail(Kind::Malformed, path, "bad checksum line");
    }
  }
  expect_line(in, "end", path);
  if (blob_bytes != model.parameter_count() * 4) fail(Kind::Malformed, path, "blob size does not match parameters");

  std::vector<unsigned char> blob(blob_bytes);
  in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (static_cast<std::size_t>(in.gcount()) != blob.size()) {
    fail(Kind::Truncated, path, "parameter blob is truncated");
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(Kind::Malformed, path, "trailing bytes after blob");
  std::uint64_t expected = 0;
  try {
    expected = std::stoull(checksum_text, nullptr, 16);
  } catch (const std::exception&) {
    fail(Kind::Malformed, path, "bad checksum value");
  }
  if (fnv1a64(blob) != expected) fail(Kind::ChecksumMismatch, path, "checksum mismatch");

  for (std::size_t i = 0; i < model.params().size(); ++i) {
    auto& p = model.params()[i];
    if (offsets[i] + p.value.size() * 4 > blob.size()) fail(Kind::Malformed, path, "offset out of range");
    const unsigned char* src = blob.data() + offsets[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) p.value[j] = get_le32(src + 4 * j);
  }
  model.set_inference_only(true);
  return model;
}

std::size_t frozen_size_bound(const NetworkConfig& config) {
  const Model layout = Model::allocate(config);
  return 512 + 160 * layout.params().size() + 4 * layout.parameter_count();
}

}  // namespace seagrass::network
