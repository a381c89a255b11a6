#include "seagrass/data/pnm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace seagrass::data {

namespace {

struct PnmHeader {
  char kind = 0;  // '5' or '6'
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 0;
};

std::size_t read_header_number(std::istream& in, const std::filesystem::path& path) {
  int ch = in.peek();
  while (ch != EOF) {
    if (std::isspace(ch)) {
      in.get();
    } else if (ch == '#') {
      std::string comment;
      std::getline(in, comment);
    } else {
      break;
    }
    ch = in.peek();
  }
  std::size_t value = 0;
  bool any = false;
  while (in.peek() != EOF && std::isdigit(in.peek())) {
    value = value * 10 + static_cast<std::size_t>(in.get() - '0');
    any = true;
  }
  if (!any) throw PnmError("malformed header in " + path.string());
  return value;
}

PnmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw PnmError("not a binary PGM/PPM file: " + path.string());
  }
  PnmHeader h;
  h.kind = magic[1];
  h.width = read_header_number(in, path);
  h.height = read_header_number(in, path);
  const std::size_t maxval = read_header_number(in, path);
  if (maxval == 0 || maxval > 65535) throw PnmError("invalid maxval in " + path.string());
  h.maxval = static_cast<unsigned>(maxval);
  if (!std::isspace(in.get())) throw PnmError("malformed header in " + path.string());
  return h;
}

std::vector<float> read_samples(std::istream& in, std::size_t count, unsigned maxval,
                                const std::filesystem::path& path) {
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw PnmError("truncated pixel data in " + path.string());
  }
  std::vector<float> out(count);
  const float scale = 1.0f / static_cast<float>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bytes_per == 2 ? (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1] : raw[i];
    out[i] = std::min(static_cast<float>(v) * scale, 1.0f);
  }
  return out;
}

unsigned quantize(float v, unsigned maxval) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<unsigned>(std::lround(clamped * static_cast<float>(maxval)));
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PnmError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PnmError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const Image& image) {
  auto out = open_for_write(path);
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> raw(image.pixel_count() * 3);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        raw[(y * image.width + x) * 3 + c] = static_cast<unsigned char>(quantize(image.at(c, y, x), 255));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw PnmError("write failed: " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const PnmHeader h = read_header(in, path);
  if (h.kind != '6') throw PnmError("expected a PPM (P6) image: " + path.string());
  const auto samples = read_samples(in, h.width * h.height * 3, h.maxval, path);
  Image image(h.height, h.width);
  for (std::size_t y = 0; y < h.height; ++y) {
    for (std::size_t x = 0; x < h.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) image.at(c, y, x) = samples[(y * h.width + x) * 3 + c];
    }
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, std::size_t height, std::size_t width,
               std::span<const float> values, unsigned maxval) {
  if (maxval != 255 && maxval != 65535) throw PnmError("unsupported PGM maxval");
  if (values.size() != height * width) throw PnmError("PGM value count does not match extents");
  auto out = open_for_write(path);
  out << "P5\n" << width << " " << height << "\n" << maxval << "\n";
  std::vector<unsigned char> raw;
  raw.reserve(values.size() * (maxval > 255 ? 2 : 1));
  for (float v : values) {
    const unsigned q = quantize(v, maxval);
    if (maxval > 255) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw PnmError("write failed: " + path.string());
}

GrayMap read_pgm(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const PnmHeader h = read_header(in, path);
  if (h.kind != '5') throw PnmError("expected a PGM (P5) image: " + path.string());
  GrayMap map(h.height, h.width);
  map.values = read_samples(in, h.width * h.height, h.maxval, path);
  return map;
}

void write_label_pgm(const std::filesystem::path& path, const LabelMap& labels) {
  std::vector<float> values(labels.classes.size());
  std::transform(labels.classes.begin(), labels.classes.end(), values.begin(),
                 [](std::uint8_t c) { return c ? 1.0f : 0.0f; });
  write_pgm(path, labels.height, labels.width, values, 255);
}

LabelMap read_label_pgm(const std::filesystem::path& path) { return binarize_gray(read_pgm(path)); }

void write_probability_pgm(const std::filesystem::path& path, const ProbabilityMap& map) {
  write_pgm(path, map.height, map.width, map.values, 65535);
}

ProbabilityMap read_probability_pgm(const std::filesystem::path& path) {
  GrayMap g = read_pgm(path);
  ProbabilityMap p(g.height, g.width);
  p.values = std::move(g.values);
  return p;
}

}  // namespace seagrass::data
