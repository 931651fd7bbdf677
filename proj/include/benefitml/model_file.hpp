#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "benefitml/classifier.hpp"
#include "benefitml/pipeline.hpp"

namespace benefitml {

// Container layout, little-endian:
//   8 bytes   magic "BMLMODEL"
//   u32       format version
//   u8 + n    family tag
//   u64       body length
//   u32       CRC-32 of the version, tag and length fields followed by the body
//   body      JSON {"params", "pipeline", "metadata"}
inline constexpr std::string_view kModelMagic = "BMLMODEL";
inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelFile {
  FittedPipeline pipeline;  // must end in a classifier stage
  nlohmann::json metadata = nlohmann::json::object();  // seed, data fingerprint, ...

  const TrainedClassifier& model() const;
};

struct ModelHeader {
  std::uint32_t version = 0;
  Family family = Family::LR;
  std::uint64_t body_size = 0;
};

std::string encode_model(const ModelFile& file);
ModelFile decode_model(std::string_view bytes);
// Reads only the header; the body is not parsed or checksummed.
ModelHeader decode_model_header(std::string_view bytes);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);
ModelHeader read_model_header(const std::filesystem::path& path);

}  // namespace benefitml
