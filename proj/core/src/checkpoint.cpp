#include "robocooklab/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "robocooklab/error.hpp"

namespace rcl::nn {

namespace {

// Serialized blobs are little-endian; that is also the only byte order this
// toolchain targets, so reads/writes are plain memcpy.
static_assert(sizeof(float) == 4, "f32 blob layout");

nlohmann::json header_json(const CheckpointHeader& h, std::size_t scalar_count) {
  nlohmann::json j;
  j["arch"] = h.arch;
  j["config"] = h.config;
  j["config_hash"] = h.config_hash;
  j["format_version"] = h.format_version;
  j["scalar_count"] = scalar_count;
  return j;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ParamStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IO, "cannot write " + path);
  out << header_json(header, params.total_scalars()).dump() << "\n";
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor& t = params.value(int(i));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              std::streamsize(t.numel() * sizeof(float)));
  }
  if (!out) throw Error(ErrorCode::IO, "short write to " + path);
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IO, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::PARSE, "missing checkpoint header");
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::PARSE, "malformed checkpoint header");
  CheckpointHeader h;
  h.arch = j.value("arch", "");
  h.config = j.value("config", nlohmann::json::object());
  h.config_hash = j.value("config_hash", "");
  h.format_version = j.value("format_version", -1);
  if (h.format_version != kCheckpointFormatVersion)
    throw Error(ErrorCode::FORMAT_VERSION,
                "checkpoint format " + std::to_string(h.format_version) +
                    ", expected " + std::to_string(kCheckpointFormatVersion));
  return h;
}

CheckpointHeader load_checkpoint(const std::string& path, ParamStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IO, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::PARSE, "missing checkpoint header");
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::PARSE, "malformed checkpoint header");

  CheckpointHeader h;
  h.arch = j.value("arch", "");
  h.config = j.value("config", nlohmann::json::object());
  h.config_hash = j.value("config_hash", "");
  h.format_version = j.value("format_version", -1);
  if (h.format_version != kCheckpointFormatVersion)
    throw Error(ErrorCode::FORMAT_VERSION,
                "checkpoint format " + std::to_string(h.format_version) +
                    ", expected " + std::to_string(kCheckpointFormatVersion));

  const std::size_t expected = j.value("scalar_count", std::size_t(0));
  if (expected != params.total_scalars())
    throw Error(ErrorCode::SHAPE, "checkpoint holds " + std::to_string(expected) +
                                      " scalars, architecture wants " +
                                      std::to_string(params.total_scalars()));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& t = params.value(int(i));
    in.read(reinterpret_cast<char*>(t.data.data()),
            std::streamsize(t.numel() * sizeof(float)));
    if (!in) throw Error(ErrorCode::PARSE, "truncated checkpoint blob in " + path);
  }
  return h;
}

}  // namespace rcl::nn
