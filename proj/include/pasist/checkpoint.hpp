#pragma once

#include <filesystem>

#include <json.hpp>

#include "pasist/discriminator.hpp"
#include "pasist/ppo.hpp"

namespace pasist {

nlohmann::ordered_json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

nlohmann::ordered_json adam_to_json(const AdamState& adam);
AdamState adam_from_json(const nlohmann::json& doc, std::size_t parameter_count);

nlohmann::ordered_json policy_to_json(const PolicyNet& policy);
PolicyNet policy_from_json(const nlohmann::json& doc);

nlohmann::ordered_json value_to_json(const ValueNet& value);
ValueNet value_from_json(const nlohmann::json& doc);

nlohmann::ordered_json discriminator_to_json(const Discriminator& disc);
Discriminator discriminator_from_json(const nlohmann::json& doc);

// Throws ConfigError if the network's layer sizes differ from `expected`.
void check_layers(const Mlp& net, const std::vector<int>& expected, const std::string& what);

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace pasist
