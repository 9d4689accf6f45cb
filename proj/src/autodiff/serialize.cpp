#include "lcrl/autodiff/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace lcrl::ad {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'L', 'C', 'R', 'L', 'P', 'A', 'R', 'M'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw CheckpointError("truncated checkpoint " + path.string());
  }
  return v;
}

std::filesystem::path with_ext(const std::filesystem::path& stem,
                               const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

}  // namespace

void save_params(const ParamStore& store, const std::filesystem::path& stem) {
  const auto bin_path = with_ext(stem, ".bin");
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw CheckpointError("cannot write " + bin_path.string());
  std::ostringstream idx;
  idx << "lcrl-params " << kCheckpointVersion << ' ' << store.params().size()
      << '\n';

  bin.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(bin, kCheckpointVersion);
  put<std::int64_t>(bin, store.step());
  put<std::uint32_t>(bin, static_cast<std::uint32_t>(store.params().size()));
  for (const auto& p : store.params()) {
    put<std::uint32_t>(bin, static_cast<std::uint32_t>(p.name.size()));
    bin.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(bin, static_cast<std::uint32_t>(p.shape.size()));
    for (auto d : p.shape) put<std::uint64_t>(bin, d);
    idx << p.name << ' ';
    for (std::size_t i = 0; i < p.shape.size(); ++i) {
      idx << (i ? "x" : "") << p.shape[i];
    }
    idx << ' ' << static_cast<std::uint64_t>(bin.tellp()) << '\n';
    bin.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!bin) throw CheckpointError("write failed for " + bin_path.string());

  const auto idx_path = with_ext(stem, ".idx");
  std::ofstream idx_file(idx_path);
  if (!idx_file) throw CheckpointError("cannot write " + idx_path.string());
  idx_file << idx.str();
}

void load_params(ParamStore& store, const std::filesystem::path& stem) {
  const auto bin_path = with_ext(stem, ".bin");
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw CheckpointError("missing checkpoint " + bin_path.string());
  char magic[8];
  if (!bin.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw CheckpointError("not a parameter checkpoint: " + bin_path.string());
  }
  const auto version = get<std::uint32_t>(bin, bin_path);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version mismatch: file has v" +
                          std::to_string(version) + ", expected v" +
                          std::to_string(kCheckpointVersion));
  }
  const auto step = get<std::int64_t>(bin, bin_path);
  const auto count = get<std::uint32_t>(bin, bin_path);
  if (count != store.params().size()) {
    throw CheckpointError("checkpoint has " + std::to_string(count) +
                          " parameters, model expects " +
                          std::to_string(store.params().size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(bin, bin_path);
    std::string name(len, '\0');
    if (!bin.read(name.data(), len)) {
      throw CheckpointError("truncated checkpoint " + bin_path.string());
    }
    const auto rank = get<std::uint32_t>(bin, bin_path);
    Shape shape(rank);
    for (auto& d : shape) d = get<std::uint64_t>(bin, bin_path);
    if (!store.contains(name)) {
      throw CheckpointError("checkpoint parameter '" + name +
                            "' not in model");
    }
    auto& p = store.get(name);
    if (p.shape != shape) {
      throw CheckpointError("parameter '" + name + "' has shape " +
                            shape_str(shape) + " in checkpoint, model wants " +
                            shape_str(p.shape));
    }
    if (!bin.read(reinterpret_cast<char*>(p.value.data()),
                  static_cast<std::streamsize>(p.value.size() *
                                               sizeof(double)))) {
      throw CheckpointError("truncated checkpoint " + bin_path.string());
    }
  }
  store.set_step(step);
  store.touch();
}

}  // namespace lcrl::ad
