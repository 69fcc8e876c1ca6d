#include "pasist/skill_selector.hpp"

#include <algorithm>

#include "pasist/errors.hpp"

namespace pasist {

CommandBuffer::CommandBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("selector.window: must be >= 1");
}

void CommandBuffer::record_episode(int skill, double mean_task_reward) {
  if (skill < 0) throw InputError("command buffer: negative skill index");
  records_.push_back({skill, mean_task_reward});
  while (records_.size() > capacity_) records_.pop_front();
}

double CommandBuffer::average_reward(int skill) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records_) {
    if (r.skill == skill) {
      sum += r.mean_task_reward;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::size_t CommandBuffer::count(int skill) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [skill](const CommandRecord& r) { return r.skill == skill; }));
}

nlohmann::ordered_json CommandBuffer::to_json() const {
  nlohmann::ordered_json doc;
  doc["capacity"] = capacity_;
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& r : records_) recs.push_back({r.skill, r.mean_task_reward});
  doc["records"] = std::move(recs);
  return doc;
}

CommandBuffer CommandBuffer::from_json(const nlohmann::json& doc) {
  CommandBuffer buf(doc.at("capacity").get<std::size_t>());
  for (const auto& r : doc.at("records")) buf.record_episode(r.at(0).get<int>(), r.at(1).get<double>());
  return buf;
}

SkillProgress::SkillProgress(std::vector<double> average_rewards, std::vector<double> optimal_rewards)
    : average_(std::move(average_rewards)), optimal_(std::move(optimal_rewards)) {
  if (average_.size() != optimal_.size() || average_.empty())
    throw ConfigError("selector: need one optimal reward per skill");
  for (std::size_t i = 0; i < optimal_.size(); ++i)
    if (!(optimal_[i] > 0.0))
      throw ConfigError("skills." + std::to_string(i) + ".optimal_reward: must be > 0");
}

SkillProgress SkillProgress::from_buffer(const CommandBuffer& buffer, std::span<const double> optimal_rewards) {
  std::vector<double> avg;
  for (std::size_t m = 0; m < optimal_rewards.size(); ++m) avg.push_back(buffer.average_reward(static_cast<int>(m)));
  return SkillProgress(std::move(avg), {optimal_rewards.begin(), optimal_rewards.end()});
}

double SkillProgress::progress(int skill) const {
  return std::clamp(average_reward(skill) / optimal_reward(skill), 0.0, 1.0);
}

std::vector<double> SkillProgress::progress() const {
  std::vector<double> p;
  for (int m = 0; m < num_skills(); ++m) p.push_back(progress(m));
  return p;
}

std::vector<double> selection_probabilities(std::span<const double> progress, double delta) {
  if (progress.empty()) throw InputError("selector: no skills");
  std::vector<double> w;
  double total = 0.0;
  for (double p : progress) {
    w.push_back(1.0 - std::clamp(p, 0.0, 1.0) + delta);
    total += w.back();
  }
  for (double& x : w) x /= total;
  return w;
}

int sample_skill(std::span<const double> probabilities, Rng& rng) {
  const double u = uniform(rng, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probabilities.size()) - 1;
}

Command sample_command(const SkillProgress& stats, double delta, Rng& rng) {
  const auto p = stats.progress();
  const int skill = sample_skill(selection_probabilities(p, delta), rng);
  const double v = uniform(rng, -Command::kMaxVelocity, Command::kMaxVelocity);
  return Command(v, skill, stats.num_skills());
}

Command sample_uniform_command(int num_skills, Rng& rng) {
  const int skill = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(num_skills)));
  const double v = uniform(rng, -Command::kMaxVelocity, Command::kMaxVelocity);
  return Command(v, skill, num_skills);
}

}  // namespace pasist
