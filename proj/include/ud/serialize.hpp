#pragma once

#include <map>
#include <string>

#include "ud/model.hpp"

namespace ud {

// Self-describing binary container: magic, format version, config echo,
// cue lexicon, vocabulary, then length-prefixed named tensors of
// little-endian 64-bit floats.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

std::map<std::string, std::string> config_to_map(const ModelConfig& cfg);
ModelConfig config_from_map(const std::map<std::string, std::string>& kv);

}  // namespace ud
