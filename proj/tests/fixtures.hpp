#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "benefitml/data_ops.hpp"
#include "benefitml/pipeline.hpp"
#include "benefitml/synth.hpp"

namespace fixtures {

// Benefits-style table with its derived label column.
inline benefitml::DataTable benefits(std::size_t rows = 10000, std::uint64_t seed = 1, double positive_rate = 0.81) {
  const auto spec = benefitml::default_benefits_spec(rows, positive_rate, seed);
  return benefitml::derive_label(benefitml::generate_synthetic(spec), spec.label_source, {spec.positive_text});
}

inline benefitml::DataTable interaction(std::size_t rows = 4000, std::uint64_t seed = 7) {
  const auto spec = benefitml::default_interaction_spec(rows, seed);
  return benefitml::derive_label(benefitml::generate_synthetic(spec), spec.label_source, {spec.positive_text});
}

inline benefitml::PipelineSpec interaction_pipeline(const benefitml::DataTable& t) {
  return benefitml::pipeline_for_schema(t.schema(), benefitml::kLabelColumn, {benefitml::kDefaultLabelSource});
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("benefitml_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
