// SPDX-License-Identifier: Apache-2.0
#include "lgi/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lgi/errors.hpp"

namespace lgi {
namespace {

constexpr char kMagic[8] = {'L', 'G', 'I', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_values(std::string& out, std::span<const double> values) {
  for (double x : values) put_u64(out, std::bit_cast<std::uint64_t>(x));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const NamedParams params = checkpoint.params.named();
  const bool with_moments = checkpoint.optimizer.m.size() == params.size();

  std::string payload;
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& p : params) {
    layout.push_back({{"name", p.name}, {"shape", p.tensor.shape()}});
    put_values(payload, p.tensor.data());
  }
  if (with_moments) {
    for (const auto& m : checkpoint.optimizer.m) put_values(payload, m);
    for (const auto& v : checkpoint.optimizer.v) put_values(payload, v);
  }

  nlohmann::json header = {{"format", "lgi-checkpoint-1"},
                           {"config", checkpoint.config},
                           {"vocab", nlohmann::json::parse(checkpoint.vocab.to_json())},
                           {"params", layout},
                           {"optimizer", {{"step", checkpoint.optimizer.step}, {"moments", with_moments}}},
                           {"info", checkpoint.info},
                           {"payload_bytes", payload.size()},
                           {"digest", hex64(fnv1a64(payload))}};
  const std::string header_text = header.dump();

  std::string bytes(kMagic, sizeof kMagic);
  put_u64(bytes, header_text.size());
  bytes += header_text;
  bytes += payload;

  // Write to a sibling file first so a crash never leaves a torn checkpoint.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();

  if (bytes.size() < 16 || bytes.compare(0, 8, kMagic, 8) != 0) {
    throw FormatError("checkpoint: bad magic", 0);
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16) throw FormatError("checkpoint: truncated header", bytes.size());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what(), 16 + e.byte - 1);
  }

  Checkpoint ck;
  std::string_view payload(bytes.data() + 16 + header_len, bytes.size() - 16 - header_len);
  try {
    if (header.at("payload_bytes").get<std::uint64_t>() != payload.size()) {
      throw FormatError("checkpoint: payload length differs from header", 16 + header_len);
    }
    if (header.at("digest").get<std::string>() != hex64(fnv1a64(payload))) {
      throw InvariantViolation("checkpoint: payload digest mismatch");
    }
    ck.config = header.at("config").get<TrainConfig>();
    ck.vocab = Vocabulary::from_json(header.at("vocab").dump());
    ck.info = header.value("info", nlohmann::json::object());
    ck.optimizer.step = header.at("optimizer").at("step").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what(), 16);
  }

  ck.params = ModelParams::init(ck.config.model, ck.config.seed);
  NamedParams params = ck.params.named();
  const auto& layout = header.at("params");
  if (layout.size() != params.size()) {
    throw InvariantViolation("checkpoint: stores " + std::to_string(layout.size()) +
                             " tensors but the config builds " + std::to_string(params.size()));
  }

  std::size_t cursor = 0;
  auto take = [&](std::span<double> dst) {
    if (payload.size() - cursor < 8 * dst.size()) {
      throw FormatError("checkpoint: truncated payload", 16 + header_len + cursor);
    }
    for (double& x : dst) {
      x = std::bit_cast<double>(get_u64(payload.data() + cursor));
      cursor += 8;
    }
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = layout[i].at("name").get<std::string>();
    const Shape shape = layout[i].at("shape").get<Shape>();
    if (name != params[i].name || shape != params[i].tensor.shape()) {
      throw InvariantViolation("checkpoint: tensor " + std::to_string(i) + " is " + name + " " +
                               shape_str(shape) + ", expected " + params[i].name + " " +
                               shape_str(params[i].tensor.shape()));
    }
    take(params[i].tensor.mutable_data());
  }
  if (header.at("optimizer").value("moments", false)) {
    ck.optimizer = [&] {
      AdamState s = AdamState::zeros(params);
      s.step = ck.optimizer.step;
      return s;
    }();
    for (auto& m : ck.optimizer.m) take(m);
    for (auto& v : ck.optimizer.v) take(v);
  }
  if (cursor != payload.size()) {
    throw FormatError("checkpoint: trailing payload bytes", 16 + header_len + cursor);
  }
  return ck;
}

}  // namespace lgi
