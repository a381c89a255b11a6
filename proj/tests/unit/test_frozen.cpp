#include <catch_amalgamated.hpp>

#include <fstream>
#include <iterator>

#include "seagrass/data/synth.hpp"
#include "seagrass/error.hpp"
#include "seagrass/network/frozen.hpp"
#include "seagrass/network/train.hpp"
#include "support/temp_dir.hpp"

using namespace seagrass;
using namespace seagrass::network;
using Kind = FrozenModelError::Kind;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

Kind load_error(const std::filesystem::path& p) {
  try {
    load_frozen(p);
  } catch (const FrozenModelError& e) {
    return e.kind();
  }
  FAIL("load_frozen accepted a bad file");
  return Kind::Io;
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
  const std::string a = "a";
  CHECK(fnv1a64(std::span(reinterpret_cast<const unsigned char*>(a.data()), a.size())) == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("freeze and load round trip is bit-identical") {
  testing::TempDir dir("frozen");
  const auto config = NetworkConfig::toy(32, 64, 16);
  Model m(config, 11);
  const auto samples = data::synth_dataset(3, 32, 64, data::kDefaultBlobScale, 1);
  ExperimentConfig e;
  e.iterations = 3;
  train(m, samples, e, 2);

  const auto path = dir / "m.frozen";
  freeze(m, path);
  const Model loaded = load_frozen(path);
  CHECK(loaded.config() == config);
  CHECK(loaded.inference_only());
  REQUIRE(loaded.params().size() == m.params().size());
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    CHECK(loaded.params()[i].name == m.params()[i].name);
    CHECK(loaded.params()[i].value.values() == m.params()[i].value.values());
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto img = data::synth_sample(32, 64, data::kDefaultBlobScale, 100 + s).image;
    CHECK(predict(loaded, img) == predict(m, img));
  }
  CHECK(std::filesystem::file_size(path) <= frozen_size_bound(config));

  Model trainable = load_frozen(path);
  e.iterations = 1;
  CHECK_THROWS_AS(train(trainable, samples, e, 1), ContractViolation);
}

TEST_CASE("frozen files are validated on load") {
  testing::TempDir dir("frozen_bad");
  const auto good = dir / "good.frozen";
  freeze(Model(NetworkConfig::toy(32, 32, 16), 1), good);
  const std::string bytes = slurp(good);
  const auto bad = dir / "bad.frozen";

  SECTION("missing file") { CHECK(load_error(dir / "absent.frozen") == Kind::Io); }
  SECTION("flipped blob byte") {
    std::string b = bytes;
    b[b.size() - 3] ^= 0x10;
    spit(bad, b);
    CHECK(load_error(bad) == Kind::ChecksumMismatch);
  }
  SECTION("truncated blob") {
    spit(bad, bytes.substr(0, bytes.size() - 17));
    CHECK(load_error(bad) == Kind::Truncated);
  }
  SECTION("truncated header") {
    spit(bad, bytes.substr(0, 60));
    CHECK(load_error(bad) == Kind::Truncated);
  }
  SECTION("unknown version") {
    std::string b = bytes;
    b.replace(b.find("format_version 1"), 16, "format_version 9");
    spit(bad, b);
    CHECK(load_error(bad) == Kind::UnknownVersion);
  }
  SECTION("garbage") {
    spit(bad, "not a model\nat all\n");
    CHECK(load_error(bad) == Kind::Malformed);
  }
}
