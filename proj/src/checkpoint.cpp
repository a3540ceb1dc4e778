#include "tgqa/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "tgqa/error.hpp"
#include "tgqa/io/config.hpp"

namespace tgqa::training {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'T', 'G', 'Q', 'A'};

static_assert(std::endian::native == std::endian::little, "payload encoding assumes a little-endian host");

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& in, std::size_t at) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

uint32_t crc32_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks to stay portable for huge files.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  json manifest = json::array();
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    manifest.push_back({{"name", p.names[i]}, {"shape", p.tensors[i].shape}, {"dtype", "f32"}});
  }
  const json header = {{"model", io::to_json(p.config)},
                       {"train", io::to_json(ckpt.train)},
                       {"vocab", {{"words", ckpt.vocab.words()}, {"ids", ckpt.vocab.ids()}}},
                       {"tensors", manifest}};
  const std::string head = header.dump();

  std::string out(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<uint32_t>(head.size()));
  out += head;
  for (const auto& t : p.tensors) {
    out.append(reinterpret_cast<const char*>(t.data.data()), t.size() * sizeof(float));
  }
  put_u32(out, crc32_of(out.data(), out.size()));
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16) throw FormatError("checkpoint truncated: " + std::to_string(bytes.size()) + " bytes");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("not a checkpoint file (bad magic)");
  const uint32_t version = get_u32(bytes, 4);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + ", expected " +
                      std::to_string(kCheckpointVersion));
  }
  const uint32_t head_len = get_u32(bytes, 8);
  if (12ull + head_len + 4 > bytes.size()) throw FormatError("checkpoint truncated inside header");
  // Verify integrity before interpreting anything past the fixed preamble.
  if (get_u32(bytes, bytes.size() - 4) != crc32_of(bytes.data(), bytes.size() - 4)) {
    throw FormatError("checkpoint checksum mismatch (file truncated or corrupted)");
  }

  json header;
  try {
    header = json::parse(bytes.substr(12, head_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    const auto cfg = io::model_config_from_json(header.at("model"));
    cfg.validate();
    ckpt.train = io::train_config_from_json(header.at("train"));
    ckpt.vocab = text::Vocabulary::from_arrays(header.at("vocab").at("words").get<std::vector<std::string>>(),
                                               header.at("vocab").at("ids").get<std::vector<int>>());
    ckpt.params = model::ModelParameters<float>::zeros(cfg);
    const auto& manifest = header.at("tensors");
    if (manifest.size() != ckpt.params.tensors.size()) {
      throw FormatError("checkpoint has " + std::to_string(manifest.size()) + " tensors, layout expects " +
                        std::to_string(ckpt.params.tensors.size()));
    }
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const auto& entry = manifest[i];
      const auto& t = ckpt.params.tensors[i];
      if (entry.at("name").get<std::string>() != ckpt.params.names[i] ||
          entry.at("shape").get<std::vector<int>>() != t.shape || entry.at("dtype").get<std::string>() != "f32") {
        throw FormatError("checkpoint tensor " + std::to_string(i) + " does not match layout entry " +
                          ckpt.params.names[i] + " " + t.shape_string());
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint header invalid: ") + e.what());
  }

  std::size_t payload = 0;
  for (const auto& t : ckpt.params.tensors) payload += t.size() * sizeof(float);
  const std::size_t expected = 12ull + head_len + payload + 4;
  if (bytes.size() < expected) throw FormatError("checkpoint truncated inside tensor payload");
  if (bytes.size() > expected) throw FormatError("checkpoint has trailing bytes");

  std::size_t at = 12ull + head_len;
  for (auto& t : ckpt.params.tensors) {
    std::memcpy(t.data.data(), bytes.data() + at, t.size() * sizeof(float));
    at += t.size() * sizeof(float);
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace tgqa::training
