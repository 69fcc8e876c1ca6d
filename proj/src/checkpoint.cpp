#include "pasist/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "pasist/errors.hpp"

namespace pasist {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<double> doubles(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) throw ConfigError(std::string("checkpoint: missing array ") + key);
  return doc[key].get<std::vector<double>>();
}

AdamConfig adam_config_from_json(const json& doc) {
  AdamConfig c;
  c.learning_rate = doc.at("learning_rate").get<double>();
  c.beta1 = doc.at("beta1").get<double>();
  c.beta2 = doc.at("beta2").get<double>();
  c.epsilon = doc.at("epsilon").get<double>();
  return c;
}

std::string join(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace

ordered_json mlp_to_json(const Mlp& net) {
  ordered_json j;
  j["layer_sizes"] = net.layer_sizes();
  ordered_json weights = ordered_json::array();
  ordered_json biases = ordered_json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weight(l);
    const auto b = net.bias(l);
    weights.push_back(std::vector<double>(w.data(), w.data() + w.size()));
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Mlp mlp_from_json(const json& doc) {
  try {
    Mlp net(doc.at("layer_sizes").get<std::vector<int>>());
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != net.num_layers() || biases.size() != net.num_layers())
      throw ConfigError("checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const auto w = weights[l].get<std::vector<double>>();
      const auto b = biases[l].get<std::vector<double>>();
      auto wm = net.weight(l);
      auto bm = net.bias(l);
      if (static_cast<Eigen::Index>(w.size()) != wm.size() || static_cast<Eigen::Index>(b.size()) != bm.size())
        throw ConfigError("checkpoint: parameter shape mismatch in layer " + std::to_string(l));
      std::copy(w.begin(), w.end(), wm.data());
      std::copy(b.begin(), b.end(), bm.data());
    }
    return net;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed network: ") + e.what());
  }
}

ordered_json adam_to_json(const AdamState& adam) {
  ordered_json j;
  j["learning_rate"] = adam.config().learning_rate;
  j["beta1"] = adam.config().beta1;
  j["beta2"] = adam.config().beta2;
  j["epsilon"] = adam.config().epsilon;
  j["steps"] = adam.step_count();
  j["m"] = adam.first_moment();
  j["v"] = adam.second_moment();
  return j;
}

AdamState adam_from_json(const json& doc, std::size_t parameter_count) {
  try {
    AdamState adam(parameter_count, adam_config_from_json(doc));
    auto m = doubles(doc, "m");
    auto v = doubles(doc, "v");
    if (m.size() != parameter_count || v.size() != parameter_count)
      throw ConfigError("checkpoint: optimizer state size mismatch");
    adam.restore(doc.at("steps").get<std::size_t>(), std::move(m), std::move(v));
    return adam;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed optimizer: ") + e.what());
  }
}

ordered_json policy_to_json(const PolicyNet& policy) {
  ordered_json j;
  j["trunk"] = mlp_to_json(policy.trunk());
  const Vector& ls = policy.log_std();
  j["log_std"] = std::vector<double>(ls.data(), ls.data() + ls.size());
  j["trunk_optimizer"] = adam_to_json(policy.trunk_optimizer());
  j["log_std_optimizer"] = adam_to_json(policy.log_std_optimizer());
  return j;
}

PolicyNet policy_from_json(const json& doc) {
  Mlp trunk = mlp_from_json(doc.at("trunk"));
  const auto ls = doubles(doc, "log_std");
  const Vector log_std = Eigen::Map<const Vector>(ls.data(), static_cast<Eigen::Index>(ls.size()));
  const json& topt = doc.at("trunk_optimizer");
  PolicyNet policy(std::move(trunk), log_std, adam_config_from_json(topt));
  policy.trunk_optimizer() = adam_from_json(topt, policy.trunk().parameter_count());
  policy.log_std_optimizer() = adam_from_json(doc.at("log_std_optimizer"), ls.size());
  return policy;
}

ordered_json value_to_json(const ValueNet& value) {
  ordered_json j;
  j["net"] = mlp_to_json(value.net());
  j["optimizer"] = adam_to_json(value.optimizer());
  return j;
}

ValueNet value_from_json(const json& doc) {
  const json& opt = doc.at("optimizer");
  ValueNet value(mlp_from_json(doc.at("net")), adam_config_from_json(opt));
  value.optimizer() = adam_from_json(opt, value.net().parameter_count());
  return value;
}

ordered_json discriminator_to_json(const Discriminator& disc) {
  ordered_json j;
  j["net"] = mlp_to_json(disc.net());
  j["gp_weight"] = disc.gp_weight();
  j["optimizer"] = adam_to_json(disc.optimizer());
  return j;
}

Discriminator discriminator_from_json(const json& doc) {
  const json& opt = doc.at("optimizer");
  Discriminator disc(mlp_from_json(doc.at("net")), doc.at("gp_weight").get<double>(), adam_config_from_json(opt));
  disc.optimizer() = adam_from_json(opt, disc.net().parameter_count());
  return disc;
}

void check_layers(const Mlp& net, const std::vector<int>& expected, const std::string& what) {
  if (net.layer_sizes() != expected)
    throw ConfigError("checkpoint: " + what + " layer sizes " + join(net.layer_sizes()) +
                      " do not match the config " + join(expected));
}

void write_json_file(const std::filesystem::path& path, const ordered_json& doc) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << doc.dump(1) << '\n';
    if (!out) throw ConfigError("cannot write " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace pasist
