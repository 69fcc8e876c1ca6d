#include "pasist/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pasist/errors.hpp"

namespace pasist {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void toml_error(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && in_string) {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

json parse_value(const std::string& raw, std::size_t line);

std::vector<std::string> split_array(const std::string& body, std::size_t line) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  int depth = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (in_string) {
      cur += c;
      if (c == '\\' && i + 1 < body.size()) cur += body[++i];
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_string || depth != 0) toml_error(line, "unbalanced array");
  const std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  for (const auto& it : items)
    if (it.empty()) toml_error(line, "empty array element");
  return items;
}

json parse_value(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  if (s.empty()) toml_error(line, "missing value");
  if (s.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < s.size() && s[i] != '"'; ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) {
        const char n = s[++i];
        out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else {
        out += s[i];
      }
    }
    if (i + 1 != s.size()) toml_error(line, "malformed string");
    return out;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') toml_error(line, "unterminated array");
    json arr = json::array();
    for (const auto& item : split_array(s.substr(1, s.size() - 2), line)) arr.push_back(parse_value(item, line));
    return arr;
  }
  const bool looks_float = s.find_first_of(".eE") != std::string::npos;
  if (!looks_float) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return v;
  } else {
    double v = 0.0;
    const char* begin = s.data() + (s.front() == '+' ? 1 : 0);
    const auto [p, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size() && std::isfinite(v)) return v;
  }
  toml_error(line, "cannot parse value '" + s + "'");
}

// Field reader that records which keys were consumed so unknown keys can be
// reported.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    const json* node = &root;
    std::stringstream ss(name_);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part)) {
        node = nullptr;
        break;
      }
      node = &(*node)[part];
    }
    if (node && !node->is_object()) throw ConfigError(name_ + ": expected a section");
    node_ = node;
  }

  bool present() const { return node_ != nullptr; }
  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(key, "out of range");
      out = static_cast<int>(x);
    }
  }
  void get(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "expected a non-negative integer");
      out = static_cast<std::size_t>(v->get<long long>());
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, std::vector<int>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of integers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number_integer()) fail(key, "expected an array of integers");
        out.push_back(x.get<int>());
      }
    }
  }
  void get(const std::string& key, Range& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
        fail(key, "expected [lo, hi]");
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [k, v] : node_->items()) {
      if (!used_.count(k)) throw ConfigError(name_ + "." + k + ": unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(name_ + "." + key + ": " + what);
  }

 private:
  const json* find(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &(*node_)[key];
  }

  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

DtwNormalization parse_norm(Section& sec, const std::string& key, DtwNormalization def) {
  std::string s = def == DtwNormalization::kNone ? "none" : "length";
  sec.get(key, s);
  if (s == "none") return DtwNormalization::kNone;
  if (s == "length") return DtwNormalization::kLength;
  sec.fail(key, "expected \"none\" or \"length\"");
}

const char* norm_name(DtwNormalization n) { return n == DtwNormalization::kNone ? "none" : "length"; }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

std::string hex(const unsigned char* d, unsigned n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < n; ++i) {
    out += digits[d[i] >> 4];
    out += digits[d[i] & 15];
  }
  return out;
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  json root = json::object();
  json* current = &root;
  std::set<std::string> headers;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') toml_error(line_no, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) toml_error(line_no, "empty section name");
      if (!headers.insert(name).second) toml_error(line_no, "section [" + name + "] defined twice");
      current = &root;
      std::stringstream ss(name);
      std::string part;
      while (std::getline(ss, part, '.')) {
        part = trim(part);
        if (part.empty()) toml_error(line_no, "malformed section name");
        if (!current->contains(part)) (*current)[part] = json::object();
        current = &(*current)[part];
        if (!current->is_object()) toml_error(line_no, "section [" + name + "] conflicts with a key");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) toml_error(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) toml_error(line_no, "missing key");
    if (current->contains(key)) toml_error(line_no, "duplicate key '" + key + "'");
    (*current)[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

nlohmann::json parse_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_toml(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kFull: return "full";
    case Mode::kIlByTp: return "il-by-tp";
    case Mode::kNoDtw: return "no-dtw";
    case Mode::kNoSelector: return "no-selector";
  }
  return "full";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : kAllModes)
    if (mode_name(m) == name) return m;
  throw ConfigError("experiment.mode: expected one of full, il-by-tp, no-dtw, no-selector (got '" +
                    std::string(name) + "')");
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  const json doc = parse_toml_file(path);
  ExperimentConfig cfg = from_json(doc, path.parent_path());
  cfg.config_path = path;
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  static const std::set<std::string> kSections{"experiment", "env",      "network", "ppo",  "sil",
                                               "discriminator", "selector", "rewards", "eval", "skills"};
  if (!doc.is_object()) throw ConfigError("config: expected a table at top level");
  for (const auto& [k, v] : doc.items())
    if (!kSections.count(k)) throw ConfigError(k + ": unknown section");

  ExperimentConfig c;

  Section exp(doc, "experiment");
  std::string mode = "full";
  exp.get("mode", mode);
  c.mode = parse_mode(mode);
  exp.get("seed", c.seed);
  exp.get("iterations", c.iterations);
  exp.get("workers", c.workers);
  exp.get("checkpoint_every", c.checkpoint_every);
  exp.get("final_window", c.final_window);
  std::string poses;
  exp.get("target_poses", poses);
  if (poses.empty()) throw ConfigError("experiment.target_poses: required");
  c.target_poses_path = std::filesystem::path(poses).is_absolute() ? std::filesystem::path(poses) : base_dir / poses;
  exp.finish();

  Section env(doc, "env");
  env.get("joints", c.env.joints);
  env.get("dt", c.env.dt);
  env.get("joint_limit", c.env.joint_limit);
  env.get("action_limit", c.env.action_limit);
  env.get("link_scale", c.env.link_scale);
  env.get("episode_length", c.env.episode_length);
  env.get("gait_frequency", c.env.gait_frequency);
  env.get("reset_fraction", c.env.reset_fraction);
  env.get("tilt_limit", c.env.tilt_limit);
  env.get("imbalance_gain", c.env.imbalance_gain);
  env.get("randomize", c.env.randomize);
  env.get("damping", c.env.damping);
  env.get("inertia_offset", c.env.inertia_offset);
  env.get("motor_gain", c.env.motor_gain);
  env.get("push_interval", c.env.push_interval);
  env.get("push_velocity", c.env.push_velocity);
  env.finish();

  Section net(doc, "network");
  net.get("policy_hidden", c.ppo.policy_hidden);
  net.get("value_hidden", c.ppo.value_hidden);
  net.get("discriminator_hidden", c.discriminator.hidden);
  net.finish();

  Section ppo(doc, "ppo");
  ppo.get("num_envs", c.ppo.num_envs);
  ppo.get("horizon", c.ppo.horizon);
  ppo.get("gamma", c.ppo.gamma);
  ppo.get("lambda", c.ppo.lambda);
  ppo.get("clip", c.ppo.clip);
  ppo.get("epochs", c.ppo.epochs);
  ppo.get("minibatches", c.ppo.minibatches);
  ppo.get("entropy_coef", c.ppo.entropy_coef);
  ppo.get("value_coef", c.ppo.value_coef);
  ppo.get("learning_rate", c.ppo.learning_rate);
  ppo.get("value_learning_rate", c.ppo.value_learning_rate);
  ppo.get("max_grad_norm", c.ppo.max_grad_norm);
  ppo.get("init_log_std", c.ppo.init_log_std);
  ppo.finish();

  Section sil(doc, "sil");
  sil.get("capacity", c.sil_capacity);
  std::string rule = "subtract";
  sil.get("assessment", rule);
  if (rule == "subtract") c.assessment = AssessmentRule::kSubtractDtw;
  else if (rule == "add") c.assessment = AssessmentRule::kAddDtw;
  else sil.fail("assessment", "expected \"subtract\" or \"add\"");
  c.assessment_dtw = parse_norm(sil, "dtw_normalization", DtwNormalization::kNone);
  sil.finish();

  Section disc(doc, "discriminator");
  disc.get("gp_weight", c.discriminator.gp_weight);
  disc.get("learning_rate", c.discriminator.learning_rate);
  disc.get("batch_size", c.discriminator.batch_size);
  disc.get("epochs", c.discriminator.epochs);
  disc.finish();

  Section sel(doc, "selector");
  sel.get("window", c.selector.window);
  sel.get("delta", c.selector.delta);
  sel.finish();

  Section ev(doc, "eval");
  ev.get("episodes", c.eval.episodes);
  ev.get("transition_episodes", c.eval.transition_episodes);
  ev.get("transition_window", c.eval.transition_window);
  ev.get("success_factor", c.eval.success_factor);
  ev.finish();

  if (!doc.contains("skills") || !doc["skills"].is_object() || doc["skills"].empty())
    throw ConfigError("skills: at least one [skills.N] section is required");
  const auto& skills = doc["skills"];
  for (std::size_t i = 0; i < skills.size(); ++i) {
    const std::string id = std::to_string(i);
    if (!skills.contains(id)) throw ConfigError("skills." + id + ": missing (skill ids must be 0..N-1)");
    Section s(doc, "skills." + id);
    SkillSpec spec;
    s.get("name", spec.name);
    if (spec.name.empty()) s.fail("name", "required");
    s.get("base_height", spec.base_height);
    s.get("bipedal", spec.bipedal);
    s.get("optimal_reward", spec.optimal_reward);
    s.finish();
    c.skills.push_back(spec);
  }
  for (const auto& [k, v] : skills.items()) {
    const bool numeric = !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char ch) { return std::isdigit(ch); });
    if (!numeric || std::stoul(k) >= c.skills.size()) throw ConfigError("skills." + k + ": unexpected section");
  }

  Section rew(doc, "rewards");
  rew.get("sigma_sil", c.sigma_sil);
  double max_star = 0.0;
  for (const auto& s : c.skills) max_star = std::max(max_star, s.optimal_reward);
  c.sigma_task = 0.8 * max_star;
  rew.get("sigma_task", c.sigma_task);
  c.weight_dtw = parse_norm(rew, "dtw_normalization", DtwNormalization::kNone);
  rew.finish();

  c.targets = load_target_poses(c.target_poses_path, c.env.joints);
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  require(iterations >= 0, "experiment.iterations", "must be >= 0");
  require(workers >= 1, "experiment.workers", "must be >= 1");
  require(checkpoint_every >= 0, "experiment.checkpoint_every", "must be >= 0");
  require(final_window >= 1, "experiment.final_window", "must be >= 1");
  env.validate();

  auto hidden_ok = [](const std::vector<int>& h) {
    return std::all_of(h.begin(), h.end(), [](int x) { return x > 0; });
  };
  require(hidden_ok(ppo.policy_hidden), "network.policy_hidden", "sizes must be positive");
  require(hidden_ok(ppo.value_hidden), "network.value_hidden", "sizes must be positive");
  require(hidden_ok(discriminator.hidden), "network.discriminator_hidden", "sizes must be positive");

  require(ppo.num_envs >= 1, "ppo.num_envs", "must be >= 1");
  require(ppo.horizon >= 1, "ppo.horizon", "must be >= 1");
  require(ppo.gamma >= 0.0 && ppo.gamma <= 1.0, "ppo.gamma", "must be in [0, 1]");
  require(ppo.lambda >= 0.0 && ppo.lambda <= 1.0, "ppo.lambda", "must be in [0, 1]");
  require(ppo.clip > 0.0, "ppo.clip", "must be > 0");
  require(ppo.epochs >= 0, "ppo.epochs", "must be >= 0");
  require(ppo.minibatches >= 1, "ppo.minibatches", "must be >= 1");
  require(ppo.entropy_coef >= 0.0, "ppo.entropy_coef", "must be >= 0");
  require(ppo.learning_rate > 0.0, "ppo.learning_rate", "must be > 0");
  require(ppo.value_learning_rate > 0.0, "ppo.value_learning_rate", "must be > 0");
  require(ppo.init_log_std >= PolicyNet::kMinLogStd && ppo.init_log_std <= PolicyNet::kMaxLogStd,
          "ppo.init_log_std", "must be in [-5, 2]");

  require(sil_capacity >= 1, "sil.capacity", "must be >= 1");
  require(discriminator.gp_weight >= 0.0, "discriminator.gp_weight", "must be >= 0");
  require(discriminator.learning_rate > 0.0, "discriminator.learning_rate", "must be > 0");
  require(discriminator.batch_size >= 1, "discriminator.batch_size", "must be >= 1");
  require(discriminator.epochs >= 0, "discriminator.epochs", "must be >= 0");
  require(selector.window >= 1, "selector.window", "must be >= 1");
  require(selector.delta > 0.0, "selector.delta", "must be > 0");
  require(sigma_sil >= 0.0, "rewards.sigma_sil", "must be >= 0");
  require(std::isfinite(sigma_task), "rewards.sigma_task", "must be finite");
  require(eval.episodes >= 1, "eval.episodes", "must be >= 1");
  require(eval.transition_episodes >= 0, "eval.transition_episodes", "must be >= 0");
  require(eval.transition_window >= 2 && eval.transition_window < env.episode_length, "eval.transition_window",
          "must be in [2, episode_length)");
  require(eval.success_factor > 0.0, "eval.success_factor", "must be > 0");

  require(!skills.empty(), "skills", "at least one skill is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < skills.size(); ++i) {
    const auto& s = skills[i];
    const std::string f = "skills." + std::to_string(i);
    require(names.insert(s.name).second, f + ".name", "duplicate skill name");
    require(s.optimal_reward > 0.0, f + ".optimal_reward", "must be > 0");
    require(s.base_height >= 0.0 && s.base_height <= env.link_scale, f + ".base_height",
            "must lie in [0, link_scale]");
  }

  require(targets.size() == skills.size(), "experiment.target_poses",
          "expected exactly one pose per configured skill");
  const ToyEnv probe(env, skills);
  for (std::size_t i = 0; i < skills.size(); ++i) {
    const auto& t = targets[i];
    require(t.name == skills[i].name, "experiment.target_poses",
            "pose id " + std::to_string(i) + " is '" + t.name + "', expected '" + skills[i].name + "'");
    require(t.pose.size() == env.joints, "experiment.target_poses", "pose dimension mismatch for " + t.name);
    require(t.pose.cwiseAbs().maxCoeff() <= env.joint_limit + 1e-12, "experiment.target_poses",
            "pose for " + t.name + " violates joint limits");
    require(probe.pose_term(t.pose, static_cast<int>(i)) >= 0.45, "experiment.target_poses",
            "pose for " + t.name + " cannot reach 90% of the pose reward");
  }
}

AssessmentRule ExperimentConfig::effective_assessment() const {
  return mode == Mode::kNoDtw ? AssessmentRule::kTaskRewardOnly : assessment;
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  auto& e = j["experiment"];
  e["mode"] = std::string(mode_name(mode));
  e["seed"] = seed;
  e["iterations"] = iterations;
  e["workers"] = workers;
  e["checkpoint_every"] = checkpoint_every;
  e["final_window"] = final_window;
  e["target_poses"] = target_poses_path.string();

  auto& v = j["env"];
  v["joints"] = env.joints;
  v["dt"] = env.dt;
  v["joint_limit"] = env.joint_limit;
  v["action_limit"] = env.action_limit;
  v["link_scale"] = env.link_scale;
  v["episode_length"] = env.episode_length;
  v["gait_frequency"] = env.gait_frequency;
  v["reset_fraction"] = env.reset_fraction;
  v["tilt_limit"] = env.tilt_limit;
  v["imbalance_gain"] = env.imbalance_gain;
  v["randomize"] = env.randomize;
  v["damping"] = {env.damping.lo, env.damping.hi};
  v["inertia_offset"] = {env.inertia_offset.lo, env.inertia_offset.hi};
  v["motor_gain"] = {env.motor_gain.lo, env.motor_gain.hi};
  v["push_interval"] = env.push_interval;
  v["push_velocity"] = env.push_velocity;

  auto& n = j["network"];
  n["policy_hidden"] = ppo.policy_hidden;
  n["value_hidden"] = ppo.value_hidden;
  n["discriminator_hidden"] = discriminator.hidden;

  auto& p = j["ppo"];
  p["num_envs"] = ppo.num_envs;
  p["horizon"] = ppo.horizon;
  p["gamma"] = ppo.gamma;
  p["lambda"] = ppo.lambda;
  p["clip"] = ppo.clip;
  p["epochs"] = ppo.epochs;
  p["minibatches"] = ppo.minibatches;
  p["entropy_coef"] = ppo.entropy_coef;
  p["value_coef"] = ppo.value_coef;
  p["learning_rate"] = ppo.learning_rate;
  p["value_learning_rate"] = ppo.value_learning_rate;
  p["max_grad_norm"] = ppo.max_grad_norm;
  p["init_log_std"] = ppo.init_log_std;

  auto& s = j["sil"];
  s["capacity"] = sil_capacity;
  s["assessment"] = assessment == AssessmentRule::kAddDtw ? "add" : "subtract";
  s["dtw_normalization"] = norm_name(assessment_dtw);

  auto& d = j["discriminator"];
  d["gp_weight"] = discriminator.gp_weight;
  d["learning_rate"] = discriminator.learning_rate;
  d["batch_size"] = discriminator.batch_size;
  d["epochs"] = discriminator.epochs;

  auto& sel = j["selector"];
  sel["window"] = selector.window;
  sel["delta"] = selector.delta;

  auto& r = j["rewards"];
  r["sigma_sil"] = sigma_sil;
  r["sigma_task"] = sigma_task;
  r["dtw_normalization"] = norm_name(weight_dtw);

  auto& ev = j["eval"];
  ev["episodes"] = eval.episodes;
  ev["transition_episodes"] = eval.transition_episodes;
  ev["transition_window"] = eval.transition_window;
  ev["success_factor"] = eval.success_factor;

  auto& sk = j["skills"];
  for (std::size_t i = 0; i < skills.size(); ++i) {
    auto& o = sk[std::to_string(i)];
    o["name"] = skills[i].name;
    o["base_height"] = skills[i].base_height;
    o["bipedal"] = skills[i].bipedal;
    o["optimal_reward"] = skills[i].optimal_reward;
  }
  return j;
}

std::string config_hash(const nlohmann::json& resolved) {
  const std::string body = nlohmann::json(resolved).dump();  // std::map keys: sorted
  const std::string blob = "blob " + std::to_string(body.size()) + std::string(1, '\0') + body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("config hash: SHA-1 failed");
  return hex(digest, len);
}

}  // namespace pasist
