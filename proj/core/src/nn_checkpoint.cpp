#include "etd/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <nlohmann/json.hpp>

namespace etd::nn {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'E', 'T', 'D', 'C', 'K', 'P', 'T', '1'};

void append_u32(std::string& out, std::uint32_t value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof(value));
}

void append_u64(std::string& out, std::uint64_t value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof(value));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  const char* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw ValidationError("truncated checkpoint: " + path_);
    }
    const char* ptr = bytes_.data() + pos_;
    pos_ += n;
    return ptr;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(sizeof(v)), sizeof(v));
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, take(sizeof(v)), sizeof(v));
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ParameterSet& params,
                     const std::function<bool(const std::string&)>& keep) {
  std::size_t tensor_count = 0;
  for (const auto& [name, tensor] : params.tensors()) {
    if (!keep || keep(name)) ++tensor_count;
  }

  ordered_json hdr;
  hdr["format_version"] = header.format_version;
  hdr["config_fingerprint"] = header.config_fingerprint;
  hdr["vocab_fingerprint"] = header.vocab_fingerprint;
  hdr["provenance"] = header.provenance;
  hdr["tensor_count"] = tensor_count;
  const std::string hdr_json = hdr.dump();

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  append_u32(out, static_cast<std::uint32_t>(hdr_json.size()));
  out += hdr_json;

  for (const auto& [name, tensor] : params.tensors()) {
    if (keep && !keep(name)) continue;
    append_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    append_u32(out, 2);
    append_u64(out, static_cast<std::uint64_t>(tensor.value.rows()));
    append_u64(out, static_cast<std::uint64_t>(tensor.value.cols()));
    for (Eigen::Index r = 0; r < tensor.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.value.cols(); ++c) {
        const float v = static_cast<float>(tensor.value(r, c));
        out.append(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
  }
  write_file(path, out);
}

namespace {

CheckpointHeader parse_header(Reader& reader, const std::string& path) {
  const char* magic = reader.take(sizeof(kMagic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("not a checkpoint file: " + path);
  }
  const std::uint32_t hdr_len = reader.u32();
  json hdr = json::parse(std::string(reader.take(hdr_len), hdr_len));
  CheckpointHeader header;
  header.format_version = hdr.at("format_version").get<int>();
  if (header.format_version != 1) {
    throw ValidationError("unsupported checkpoint version in " + path);
  }
  header.config_fingerprint = hdr.at("config_fingerprint").get<std::string>();
  header.vocab_fingerprint = hdr.at("vocab_fingerprint").get<std::string>();
  header.provenance = hdr.at("provenance").get<std::string>();
  return header;
}

}  // namespace

CheckpointHeader peek_checkpoint(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader reader(bytes, path);
  return parse_header(reader, path);
}

CheckpointHeader load_checkpoint(const std::string& path, ParameterSet& params,
                                 const std::string& expected_config_fingerprint,
                                 const std::string& expected_vocab_fingerprint,
                                 bool force) {
  const std::string bytes = read_file(path);
  Reader reader(bytes, path);
  CheckpointHeader header = parse_header(reader, path);

  if (!force) {
    if (!expected_config_fingerprint.empty() &&
        header.config_fingerprint != expected_config_fingerprint) {
      throw ValidationError("checkpoint " + path +
                            " was trained under a different configuration "
                            "(fingerprint " + header.config_fingerprint +
                            " != " + expected_config_fingerprint +
                            "); pass force to override");
    }
    if (!expected_vocab_fingerprint.empty() &&
        header.vocab_fingerprint != expected_vocab_fingerprint) {
      throw ValidationError("checkpoint " + path +
                            " was trained against a different vocabulary "
                            "(fingerprint " + header.vocab_fingerprint +
                            " != " + expected_vocab_fingerprint +
                            "); pass force to override");
    }
  }

  std::size_t seen = 0;
  while (!reader.done()) {
    const std::uint32_t name_len = reader.u32();
    std::string name(reader.take(name_len), name_len);
    const std::uint32_t rank = reader.u32();
    if (rank != 2) throw ValidationError("bad tensor rank in " + path);
    const auto rows = static_cast<Eigen::Index>(reader.u64());
    const auto cols = static_cast<Eigen::Index>(reader.u64());
    if (!params.contains(name)) {
      throw ValidationError("checkpoint tensor '" + name +
                            "' does not exist in the target model");
    }
    Tensor& tensor = params.at(name);
    if (tensor.value.rows() != rows || tensor.value.cols() != cols) {
      throw ValidationError("checkpoint tensor '" + name + "' has mismatched shape");
    }
    const char* data = reader.take(sizeof(float) * static_cast<std::size_t>(rows) *
                                   static_cast<std::size_t>(cols));
    std::size_t offset = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        float v;
        std::memcpy(&v, data + offset, sizeof(float));
        offset += sizeof(float);
        tensor.value(r, c) = static_cast<double>(v);
      }
    }
    ++seen;
  }
  if (seen != params.tensors().size()) {
    throw ValidationError("checkpoint " + path + " is missing tensors");
  }
  return header;
}

}  // namespace etd::nn
