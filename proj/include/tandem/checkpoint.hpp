#pragma once

#include <string>

#include "tandem/classifier.hpp"

namespace tandem {

// Self-describing binary archive: magic, a JSON header with a format-version
// field and per-tensor shape metadata, then the raw 64-bit float payloads in
// header order (little-endian).
void save_model(const std::string& path, const ModelParams& params);
ModelParams load_model(const std::string& path);

void save_encoder(const std::string& path, const EncoderParams& params);
EncoderParams load_encoder(const std::string& path);

}  // namespace tandem
