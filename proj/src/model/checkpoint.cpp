#include "ppg2ecg/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::model {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

constexpr char kMagic[8] = {'P', 'P', 'G', '2', 'E', 'C', 'G', 'K'};

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.tensors) {
    table.push_back({{"name", name}, {"shape", t.shape}, {"dtype", "f32"}});
  }
  const nlohmann::json header = {{"fingerprint", ckpt.fingerprint},
                                 {"seed", ckpt.seed},
                                 {"epoch", ckpt.epoch},
                                 {"meta", ckpt.meta},
                                 {"tensors", table}};
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write checkpoint " + path.string());
    const std::uint32_t version = kCheckpointVersion;
    const std::uint64_t len = text.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : ckpt.tensors) {
      out.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
    if (!out) throw InputError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw InputError("not a checkpoint file: " + path.string());
  }
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version) + " in " +
                     path.string());
  }
  if (len > (1ULL << 30)) throw InputError("corrupt checkpoint header in " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw InputError("truncated checkpoint header in " + path.string());

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.fingerprint = header.at("fingerprint").get<std::string>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.meta = header.value("meta", nlohmann::json::object());
    for (const auto& entry : header.at("tensors")) {
      StoredTensor t;
      t.shape = entry.at("shape").get<std::vector<int>>();
      t.data.resize(element_count(t.shape));
      in.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
      if (!in) throw InputError("truncated checkpoint data in " + path.string());
      ckpt.tensors.emplace(entry.at("name").get<std::string>(), std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
  return ckpt;
}

void require_fingerprint(const Checkpoint& ckpt, const std::string& expected) {
  if (ckpt.fingerprint != expected) {
    throw FingerprintMismatch("checkpoint fingerprint " + ckpt.fingerprint +
                              " does not match configuration " + expected);
  }
}

template <typename T>
void store(const ParameterSet<T>& params, const std::string& prefix, Checkpoint& ckpt) {
  for (std::size_t i = 0; i < params.count(); ++i) {
    const auto& info = params.info(i);
    const auto v = params.values(i);
    ckpt.tensors[prefix + info.name] = {info.shape, std::vector<float>(v.begin(), v.end())};
  }
}

template <typename T>
void restore(const Checkpoint& ckpt, const std::string& prefix, ParameterSet<T>& params) {
  for (std::size_t i = 0; i < params.count(); ++i) {
    const auto& info = params.info(i);
    const auto it = ckpt.tensors.find(prefix + info.name);
    if (it == ckpt.tensors.end()) throw InputError("checkpoint lacks tensor " + prefix + info.name);
    if (it->second.shape != info.shape) {
      throw InputError("checkpoint tensor " + prefix + info.name + " has the wrong shape");
    }
    auto dst = params.values(i);
    std::copy(it->second.data.begin(), it->second.data.end(), dst.begin());
  }
}

void store_flat(const std::string& name, const std::vector<float>& values, Checkpoint& ckpt) {
  ckpt.tensors[name] = {{static_cast<int>(values.size())}, values};
}

std::vector<float> restore_flat(const Checkpoint& ckpt, const std::string& name, std::size_t size) {
  const auto it = ckpt.tensors.find(name);
  if (it == ckpt.tensors.end() || it->second.data.size() != size) {
    throw InputError("checkpoint lacks tensor " + name + " of size " + std::to_string(size));
  }
  return it->second.data;
}

template void store<float>(const ParameterSet<float>&, const std::string&, Checkpoint&);
template void store<double>(const ParameterSet<double>&, const std::string&, Checkpoint&);
template void restore<float>(const Checkpoint&, const std::string&, ParameterSet<float>&);
template void restore<double>(const Checkpoint&, const std::string&, ParameterSet<double>&);

}  // namespace ppg2ecg::model
