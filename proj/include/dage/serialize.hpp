#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "dage/protocol.hpp"
#include "dage/spectral.hpp"
#include "dage/trainer.hpp"

namespace dage {

// Canonical form: keys sorted (nlohmann's ordered map), no whitespace,
// shortest round-trip decimals. Every artifact file and every hash input
// goes through this one function.
std::string canonical_dump(const nlohmann::json& j);

nlohmann::json embedding_to_json(const EmbeddingModel& model);
EmbeddingModel embedding_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json joint_model_to_json(const JointModel& model);
JointModel joint_model_from_json(const nlohmann::json& j);

// Manifest object without its hash field; manifest_hash() digests exactly
// these bytes. manifest_to_json adds the hash for file output.
nlohmann::json manifest_body_json(const SplitManifest& m);
nlohmann::json manifest_to_json(const SplitManifest& m);
SplitManifest manifest_from_json(const nlohmann::json& j);

// Write-temp-then-rename so concurrent runs never observe partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace dage
