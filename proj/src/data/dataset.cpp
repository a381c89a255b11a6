#include "seagrass/data/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "seagrass/data/pnm.hpp"

namespace seagrass::data {

namespace {

using Kind = DatasetError::Kind;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) fields.push_back(field);
  return fields;
}

std::filesystem::path resolve(const DatasetManifest& m, const std::filesystem::path& p) {
  return p.is_absolute() || m.base_dir.empty() ? p : m.base_dir / p;
}

}  // namespace

std::string to_string(SetKind set) { return set == SetKind::Mix ? "mix" : "extra"; }

SetKind parse_set_kind(const std::string& text) {
  if (text == "mix") return SetKind::Mix;
  if (text == "extra") return SetKind::Extra;
  throw DatasetError(Kind::MalformedManifest, "", "unknown set '" + text + "' (expected mix|extra)");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(Kind::Unreadable, "", "cannot read manifest " + path.string());
  DatasetManifest manifest;
  manifest.base_dir = path.parent_path();
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      in >> doc;
      for (const auto& s : doc.at("samples")) {
        manifest.entries.push_back({s.at("id").get<std::string>(), s.at("image").get<std::string>(),
                                    s.at("label").get<std::string>(), s.value("location", ""),
                                    s.value("camera", ""), parse_set_kind(s.value("set", "mix"))});
      }
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(Kind::MalformedManifest, "", "malformed manifest " + path.string() + ": " + e.what());
    }
    return manifest;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() != 6) {
      throw DatasetError(Kind::MalformedManifest, f.empty() ? "" : f[0],
                         path.string() + ":" + std::to_string(line_no) + ": expected 6 tab-separated fields");
    }
    manifest.entries.push_back({f[0], f[1], f[2], f[3], f[4], parse_set_kind(f[5])});
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DatasetError(Kind::Unreadable, "", "cannot write manifest " + path.string());
  if (path.extension() == ".json") {
    nlohmann::json doc;
    doc["samples"] = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
      doc["samples"].push_back({{"id", e.id}, {"image", e.image.generic_string()},
                                {"label", e.label.generic_string()}, {"location", e.location},
                                {"camera", e.camera}, {"set", to_string(e.set)}});
    }
    out << doc.dump(2) << "\n";
    return;
  }
  out << "# id\timage\tlabel\tlocation\tcamera\tset\n";
  for (const auto& e : manifest.entries) {
    out << e.id << '\t' << e.image.generic_string() << '\t' << e.label.generic_string() << '\t'
        << e.location << '\t' << e.camera << '\t' << to_string(e.set) << '\n';
  }
}

std::vector<Sample> load_dataset(const DatasetManifest& manifest) {
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.id).second) {
      throw DatasetError(Kind::DuplicateId, e.id, "duplicate sample id '" + e.id + "'");
    }
  }
  std::vector<Sample> samples;
  samples.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    Sample s;
    s.id = e.id;
    s.meta = {e.location, e.camera, e.set};
    try {
      s.image = read_ppm(resolve(manifest, e.image));
      s.label = read_label_pgm(resolve(manifest, e.label));
    } catch (const PnmError& err) {
      throw DatasetError(Kind::Unreadable, e.id, "sample '" + e.id + "': " + err.what());
    }
    if (!same_extents(s.image, s.label)) {
      throw DatasetError(Kind::SizeMismatch, e.id,
                         "sample '" + e.id + "': image " + std::to_string(s.image.height) + "x" +
                             std::to_string(s.image.width) + " vs label " +
                             std::to_string(s.label.height) + "x" + std::to_string(s.label.width));
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace seagrass::data
