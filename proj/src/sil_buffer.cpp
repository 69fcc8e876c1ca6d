#include "pasist/sil_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pasist/errors.hpp"

namespace pasist {

PoseSequence poses_from_transitions(const ImitationFeatures& features) {
  const Eigen::Index n = features.size();
  if (n == 0 || features.transitions.cols() % 2 != 0) throw InputError("sil buffer: malformed transitions");
  const Eigen::Index j = features.transitions.cols() / 2;
  Matrix frames(n + 1, j);
  frames.topRows(n) = features.transitions.leftCols(j);
  frames.row(n) = features.transitions.row(n - 1).tail(j);
  return PoseSequence(std::move(frames));
}

SilBuffer::SilBuffer(int num_skills, std::size_t capacity)
    : capacity_(capacity),
      slots_(static_cast<std::size_t>(num_skills)),
      thresholds_(static_cast<std::size_t>(num_skills), -std::numeric_limits<double>::infinity()) {
  if (num_skills < 1) throw ConfigError("sil.num_skills: must be >= 1");
  if (capacity < 1) throw ConfigError("sil.capacity: must be >= 1");
}

void SilBuffer::check_skill(int skill) const {
  if (skill < 0 || skill >= num_skills()) throw InputError("sil buffer: skill index out of range");
}

void SilBuffer::store(int skill, const ImitationFeatures& features, double a_value) {
  auto& slot = slots_[static_cast<std::size_t>(skill)];
  SilEntry entry{features, poses_from_transitions(features), a_value};
  if (slot.size() >= capacity_) {
    auto worst = std::min_element(slot.begin(), slot.end(),
                                  [](const SilEntry& a, const SilEntry& b) { return a.a_value < b.a_value; });
    *worst = std::move(entry);
  } else {
    slot.push_back(std::move(entry));
  }
  thresholds_[static_cast<std::size_t>(skill)] = a_value;
}

bool SilBuffer::maybe_insert(int skill, const ImitationFeatures& features, double a_value) {
  check_skill(skill);
  if (!(a_value > thresholds_[static_cast<std::size_t>(skill)])) return false;
  store(skill, features, a_value);
  return true;
}

void SilBuffer::prefill(int skill, const ImitationFeatures& features, double a_value) {
  check_skill(skill);
  store(skill, features, a_value);
}

std::optional<Matrix> SilBuffer::sample_transitions(std::size_t batch, Rng& rng) const {
  std::vector<int> populated;
  for (int s = 0; s < num_skills(); ++s)
    if (!slots_[static_cast<std::size_t>(s)].empty()) populated.push_back(s);
  if (populated.empty()) return std::nullopt;

  const Eigen::Index width = slots_[static_cast<std::size_t>(populated.front())].front().features.transitions.cols();
  Matrix out(static_cast<Eigen::Index>(batch), width);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto& slot = slots_[static_cast<std::size_t>(populated[uniform_index(rng, populated.size())])];
    const auto& entry = slot[uniform_index(rng, slot.size())];
    const auto row = uniform_index(rng, static_cast<std::size_t>(entry.features.size()));
    out.row(static_cast<Eigen::Index>(b)) = entry.features.transitions.row(static_cast<Eigen::Index>(row));
  }
  return out;
}

const std::vector<SilEntry>& SilBuffer::entries(int skill) const {
  check_skill(skill);
  return slots_[static_cast<std::size_t>(skill)];
}

double SilBuffer::threshold(int skill) const {
  check_skill(skill);
  return thresholds_[static_cast<std::size_t>(skill)];
}

bool SilBuffer::empty() const { return total_entries() == 0; }

std::size_t SilBuffer::total_entries() const {
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.size();
  return n;
}

nlohmann::ordered_json SilBuffer::to_json() const {
  nlohmann::ordered_json doc;
  doc["capacity"] = capacity_;
  nlohmann::ordered_json eps = nlohmann::ordered_json::array();
  for (double e : thresholds_) {
    if (std::isfinite(e))
      eps.push_back(e);
    else
      eps.push_back(nullptr);  // -inf
  }
  doc["epsilon"] = std::move(eps);
  nlohmann::ordered_json skills = nlohmann::ordered_json::array();
  for (const auto& slot : slots_) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& e : slot) {
      nlohmann::ordered_json item;
      item["a_value"] = e.a_value;
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (Eigen::Index r = 0; r < e.features.transitions.rows(); ++r) {
        const auto row = e.features.transitions.row(r);
        rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
      }
      item["transitions"] = std::move(rows);
      entries.push_back(std::move(item));
    }
    skills.push_back(std::move(entries));
  }
  doc["skills"] = std::move(skills);
  return doc;
}

SilBuffer SilBuffer::from_json(const nlohmann::json& doc) {
  const auto& eps = doc.at("epsilon");
  const auto& skills = doc.at("skills");
  if (eps.size() != skills.size()) throw ConfigError("sil buffer snapshot: epsilon/skills size mismatch");
  SilBuffer buf(static_cast<int>(skills.size()), doc.at("capacity").get<std::size_t>());
  for (std::size_t s = 0; s < skills.size(); ++s) {
    for (const auto& item : skills[s]) {
      const auto& rows = item.at("transitions");
      if (rows.empty()) throw ConfigError("sil buffer snapshot: entry without transitions");
      ImitationFeatures f;
      f.transitions.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
          f.transitions(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
      buf.slots_[s].push_back(SilEntry{f, poses_from_transitions(f), item.at("a_value").get<double>()});
    }
    buf.thresholds_[s] = eps[s].is_null() ? -std::numeric_limits<double>::infinity() : eps[s].get<double>();
  }
  return buf;
}

}  // namespace pasist
