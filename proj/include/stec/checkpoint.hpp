#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include <json.hpp>

#include "stec/baselines.hpp"
#include "stec/training.hpp"

namespace stec {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "stec-checkpoint";

using AnyModel = std::variant<Checkpoint, AnnBaseline, ForestBaseline>;

// Envelope: {"format", "version", "kind": deeponet|ann|forest, "model": {...}}.
// Doubles are written in shortest round-trip form, so loading restores every
// parameter bit for bit.
std::string serialize_model(const AnyModel& model);
AnyModel deserialize_model(const std::string& text, const std::string& source = "<memory>");

void save_checkpoint(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);
// Throws ValidationError if the file holds a baseline.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string model_kind(const AnyModel& model);
std::vector<Prediction> predict_any(const AnyModel& model, std::span<const RayRecord> rays);

nlohmann::json train_config_to_json(const TrainConfig& c);
// Missing keys keep their defaults; unknown keys throw ValidationError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = TrainConfig::desk());

}  // namespace stec
