#include "benefitml/model_file.hpp"

#include <zlib.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "benefitml/error.hpp"

namespace benefitml {

using nlohmann::json;

const TrainedClassifier& ModelFile::model() const {
  const auto* c = pipeline.classifier();
  if (!c) throw FormatError("model file pipeline has no classifier stage");
  return c->model;
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated model file (") + what + ")");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view a, std::string_view b) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(a.data()), static_cast<uInt>(a.size()));
  // zlib takes uInt lengths; feed large bodies in pieces.
  for (std::size_t off = 0; off < b.size(); off += 1u << 30) {
    const auto n = std::min<std::size_t>(b.size() - off, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(b.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

struct Parsed {
  ModelHeader header;
  std::string_view checked;  // version .. body length
  std::uint32_t crc = 0;
  Reader reader;
};

Parsed parse_header(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kModelMagic.size(), "magic") != kModelMagic) throw FormatError("not a model file (bad magic)");
  const std::size_t checked_begin = r.pos();
  ModelHeader h;
  h.version = r.get<std::uint32_t>("version");
  if (h.version != kModelFormatVersion)
    throw FormatError("unsupported model file version " + std::to_string(h.version) + " (this build reads version " +
                      std::to_string(kModelFormatVersion) + ")");
  const auto tag_len = r.get<std::uint8_t>("family tag");
  const auto tag = r.take(tag_len, "family tag");
  try {
    h.family = family_from_tag(tag);
  } catch (const std::exception&) {
    throw FormatError("model file has unknown family tag '" + std::string(tag) + "'");
  }
  h.body_size = r.get<std::uint64_t>("body length");
  const auto checked = bytes.substr(checked_begin, r.pos() - checked_begin);
  const auto crc = r.get<std::uint32_t>("checksum");
  return {h, checked, crc, r};
}

}  // namespace

std::string encode_model(const ModelFile& file) {
  const auto& model = file.model();
  const json body_json{{"params", params_to_json(model.params)},
                       {"pipeline", fitted_pipeline_to_json(file.pipeline)},
                       {"metadata", file.metadata}};
  const std::string body = body_json.dump();
  const auto tag = family_tag(model.family());
  std::string checked;
  put<std::uint32_t>(checked, kModelFormatVersion);
  put<std::uint8_t>(checked, static_cast<std::uint8_t>(tag.size()));
  checked += tag;
  put<std::uint64_t>(checked, body.size());
  std::string out(kModelMagic);
  out += checked;
  put<std::uint32_t>(out, crc32_of(checked, body));
  out += body;
  return out;
}

ModelHeader decode_model_header(std::string_view bytes) { return parse_header(bytes).header; }

ModelFile decode_model(std::string_view bytes) {
  auto p = parse_header(bytes);
  if (p.reader.remaining() < p.header.body_size) throw FormatError("truncated model file (body)");
  if (p.reader.remaining() > p.header.body_size) throw FormatError("model file has trailing bytes");
  const auto body = p.reader.take(static_cast<std::size_t>(p.header.body_size), "body");
  if (crc32_of(p.checked, body) != p.crc) throw FormatError("model file checksum mismatch");
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model file body is not valid JSON: ") + e.what());
  }
  ModelFile file;
  file.pipeline = fitted_pipeline_from_json(j.at("pipeline"));
  file.metadata = j.value("metadata", json::object());
  const auto& model = file.model();
  if (model.family() != p.header.family) throw FormatError("model file header and body disagree on the family");
  if (params_from_json(j.at("params")) != model.params)
    throw FormatError("model file params do not match the classifier stage");
  return file;
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  const auto bytes = encode_model(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace {

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

ModelFile load_model(const std::filesystem::path& path) { return decode_model(read_bytes(path)); }

ModelHeader read_model_header(const std::filesystem::path& path) { return decode_model_header(read_bytes(path)); }

}  // namespace benefitml
