#include "wavad/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "wavad/errors.hpp"

namespace wavad {

namespace {

constexpr char kMagic[8] = {'W', 'V', 'A', 'D', 'C', 'K', 'P', '\n'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ofstream& os, const void* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& is, void* data, std::size_t n, const std::string& what) {
  if (!is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n)))
    throw FormatError("truncated checkpoint while reading " + what);
}

}  // namespace

void save_checkpoint(VadNetwork& net, const std::filesystem::path& path,
                     const OptimizerStateSet* optimizer) {
  auto params = net.parameters();
  if (optimizer != nullptr && optimizer->size() != params.size())
    throw ConfigError("optimizer state count does not match parameter count");

  nlohmann::ordered_json header;
  header["config"] = nlohmann::ordered_json::parse(net.config.to_json());
  header["seed"] = net.init_seed;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& p : params)
    tensors.push_back({{"name", p.name}, {"kind", "param"}, {"size", p.values->size()}});
  if (optimizer != nullptr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      // Uninitialized slots behave as zeros; persist them that way.
      const std::size_t n = (*optimizer)[i].mean_sq.empty() ? params[i].values->size()
                                                            : (*optimizer)[i].mean_sq.size();
      tensors.push_back(
          {{"name", params[i].name + ".rmsprop_mean_sq"}, {"kind", "optimizer"}, {"size", n}});
    }
  }
  header["tensors"] = std::move(tensors);
  const std::string header_text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot create checkpoint: " + path.string());
  write_bytes(os, kMagic, sizeof(kMagic));
  write_bytes(os, &kVersion, sizeof(kVersion));
  const std::uint64_t header_len = header_text.size();
  write_bytes(os, &header_len, sizeof(header_len));
  write_bytes(os, header_text.data(), header_text.size());
  for (const auto& p : params)
    write_bytes(os, p.values->data(), p.values->size() * sizeof(double));
  if (optimizer != nullptr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& ms = (*optimizer)[i].mean_sq;
      if (ms.empty()) {
        const std::vector<double> zeros(params[i].values->size(), 0.0);
        write_bytes(os, zeros.data(), zeros.size() * sizeof(double));
      } else {
        write_bytes(os, ms.data(), ms.size() * sizeof(double));
      }
    }
  }
  if (!os) throw FormatError("failed writing checkpoint: " + path.string());
}

RestoredCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint: " + path.string());

  char magic[8];
  read_bytes(is, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a checkpoint file: " + path.string());
  std::uint32_t version = 0;
  read_bytes(is, &version, sizeof(version), "version");
  if (version != kVersion)
    throw FormatError("checkpoint format version " + std::to_string(version) +
                      " not supported (want " + std::to_string(kVersion) + ")");
  std::uint64_t header_len = 0;
  read_bytes(is, &header_len, sizeof(header_len), "header length");
  std::string header_text(header_len, '\0');
  read_bytes(is, header_text.data(), header_len, "header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint header: ") + e.what());
  }

  RestoredCheckpoint out{VadNetwork::build(NetworkConfig::from_json(header.at("config").dump())),
                         std::nullopt};
  out.net.init_seed = header.at("seed").get<std::uint64_t>();

  auto params = out.net.parameters();
  std::size_t next_param = 0;
  for (const auto& t : header.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const std::string kind = t.at("kind").get<std::string>();
    const std::size_t size = t.at("size").get<std::size_t>();
    std::vector<double> data(size);
    read_bytes(is, data.data(), size * sizeof(double), "tensor " + name);
    if (kind == "param") {
      if (next_param >= params.size() || params[next_param].name != name ||
          params[next_param].values->size() != size)
        throw FormatError("checkpoint tensor " + name + " does not match the network topology");
      *params[next_param].values = std::move(data);
      ++next_param;
    } else if (kind == "optimizer") {
      if (!out.optimizer.has_value()) out.optimizer.emplace(params.size());
      const std::string suffix = ".rmsprop_mean_sq";
      if (name.size() <= suffix.size() ||
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
        throw FormatError("unexpected optimizer tensor name: " + name);
      const std::string param_name = name.substr(0, name.size() - suffix.size());
      bool found = false;
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != param_name) continue;
        if (params[i].values->size() != size)
          throw FormatError("optimizer tensor " + name + " has the wrong size");
        (*out.optimizer)[i].mean_sq = std::move(data);
        found = true;
        break;
      }
      if (!found) throw FormatError("optimizer tensor for unknown parameter: " + name);
    } else {
      throw FormatError("unknown tensor kind '" + kind + "' in checkpoint");
    }
  }
  if (next_param != params.size())
    throw FormatError("checkpoint is missing parameter tensors (got " +
                      std::to_string(next_param) + " of " + std::to_string(params.size()) + ")");
  return out;
}

}  // namespace wavad
