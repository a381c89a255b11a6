#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "seagrass/data/raster.hpp"

namespace seagrass::data {

/// mix: used for training and cross-validated testing; extra: held-out camera set.
enum class SetKind { Mix, Extra };

std::string to_string(SetKind set);
SetKind parse_set_kind(const std::string& text);

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path label;
  std::string location;
  std::string camera;
  SetKind set = SetKind::Mix;
};

/// Relative entry paths resolve against base_dir (the manifest's directory on read).
struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;
};

struct SampleMeta {
  std::string location;
  std::string camera;
  SetKind set = SetKind::Mix;
};

struct Sample {
  std::string id;
  Image image;
  LabelMap label;
  SampleMeta meta;
};

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { Unreadable, SizeMismatch, DuplicateId, MalformedManifest };

  DatasetError(Kind kind, std::string sample_id, const std::string& what)
      : std::runtime_error(what), kind_(kind), sample_id_(std::move(sample_id)) {}

  Kind kind() const { return kind_; }
  const std::string& sample_id() const { return sample_id_; }

 private:
  Kind kind_;
  std::string sample_id_;
};

/// Manifest files are either JSON ({"samples": [{id, image, label, location, camera, set}]})
/// when the extension is .json, or tab-separated text with the same six columns in that
/// order; blank lines and lines starting with '#' are ignored.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

std::vector<Sample> load_dataset(const DatasetManifest& manifest);

}  // namespace seagrass::data
