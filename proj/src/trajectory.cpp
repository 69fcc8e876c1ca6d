#include "pasist/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pasist/errors.hpp"

namespace pasist {

void Trajectory::validate(int num_skills) const {
  if (skill < 0 || skill >= num_skills) throw InputError("trajectory: skill id out of range");
  if (states.size() != actions.size() + 1 || states.size() != task_rewards.size() + 1)
    throw InputError("trajectory: need |states| = |actions| + 1 = |task rewards| + 1");
}

double Trajectory::total_task_reward() const {
  return std::accumulate(task_rewards.begin(), task_rewards.end(), 0.0);
}

double Trajectory::mean_task_reward() const {
  return task_rewards.empty() ? 0.0 : total_task_reward() / static_cast<double>(task_rewards.size());
}

PoseSequence pose_sequence(const Trajectory& traj) {
  if (traj.states.empty()) throw InputError("trajectory: no states");
  const Eigen::Index n = traj.states.front().q.size();
  Matrix frames(static_cast<Eigen::Index>(traj.states.size()), n);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    if (traj.states[t].q.size() != n) throw InputError("trajectory: inconsistent joint dimension");
    frames.row(static_cast<Eigen::Index>(t)) = traj.states[t].q.transpose();
  }
  return PoseSequence(std::move(frames));
}

ImitationFeatures transitions_from_poses(const PoseSequence& poses) {
  if (poses.size() < 2) throw InputError("feature map: need at least two frames");
  const Eigen::Index n = poses.size() - 1;
  const Eigen::Index j = poses.dim();
  ImitationFeatures out;
  out.transitions.resize(n, 2 * j);
  out.transitions.leftCols(j) = poses.frames().topRows(n);
  out.transitions.rightCols(j) = poses.frames().bottomRows(n);
  return out;
}

FeatureMapResult feature_map(const Trajectory& traj) {
  if (traj.states.size() < 2) throw InputError("feature map: trajectory needs at least two states");
  PoseSequence poses = pose_sequence(traj);
  ImitationFeatures feats = transitions_from_poses(poses);
  return {std::move(feats), std::move(poses)};
}

PoseSequence expand_target_pose(const TargetPose& target, Eigen::Index traj_len) {
  if (traj_len < 2) throw InputError("expand_target_pose: trajectory length must be >= 2");
  const Eigen::Index frames = std::max<Eigen::Index>(1, traj_len / 2);
  Matrix m = target.pose.transpose().replicate(frames, 1);
  return PoseSequence(std::move(m));
}

double dtw_to_target(const PoseSequence& poses, const TargetPose& target, DtwNormalization norm) {
  return dtw_distance(poses, expand_target_pose(target, poses.size()), norm);
}

Assessment assess(const Trajectory& traj, const TargetPose& target, AssessmentRule rule,
                  DtwNormalization norm) {
  if (traj.skill != target.skill) throw InputError("assess: trajectory and target skill differ");
  Assessment a;
  a.task_return = traj.total_task_reward();
  a.dtw = dtw_to_target(pose_sequence(traj), target, norm);
  switch (rule) {
    case AssessmentRule::kSubtractDtw: a.value = a.task_return - a.dtw; break;
    case AssessmentRule::kAddDtw: a.value = a.task_return + a.dtw; break;
    case AssessmentRule::kTaskRewardOnly: a.value = a.task_return; break;
  }
  return a;
}

std::vector<TargetPose> parse_target_poses(const nlohmann::json& doc, int joints) {
  if (!doc.is_array() || doc.empty()) throw ConfigError("target poses: expected a non-empty JSON array");
  std::vector<TargetPose> poses(doc.size());
  std::vector<bool> seen(doc.size(), false);
  std::set<std::string> names;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("skill") || !item.contains("id") || !item.contains("pose"))
      throw ConfigError("target poses: each entry needs skill, id and pose");
    if (!item["id"].is_number_integer()) throw ConfigError("target poses: id must be an integer");
    const auto id = item["id"].get<long long>();
    if (id < 0 || id >= static_cast<long long>(doc.size()))
      throw ConfigError("target poses: id " + std::to_string(id) + " out of range");
    if (seen[static_cast<std::size_t>(id)])
      throw ConfigError("target poses: more than one pose for skill id " + std::to_string(id));
    seen[static_cast<std::size_t>(id)] = true;
    TargetPose& p = poses[static_cast<std::size_t>(id)];
    p.skill = static_cast<int>(id);
    p.name = item["skill"].get<std::string>();
    if (!names.insert(p.name).second) throw ConfigError("target poses: duplicate skill name " + p.name);
    const auto& arr = item["pose"];
    if (!arr.is_array() || static_cast<int>(arr.size()) != joints)
      throw ConfigError("target poses: pose for " + p.name + " must have " + std::to_string(joints) +
                        " joint angles");
    p.pose.resize(joints);
    for (int j = 0; j < joints; ++j) {
      if (!arr[static_cast<std::size_t>(j)].is_number())
        throw ConfigError("target poses: non-numeric joint angle for " + p.name);
      p.pose(j) = arr[static_cast<std::size_t>(j)].get<double>();
    }
    if (!p.pose.allFinite()) throw ConfigError("target poses: non-finite joint angle for " + p.name);
  }
  return poses;
}

std::vector<TargetPose> load_target_poses(const std::filesystem::path& path, int joints) {
  std::ifstream in(path);
  if (!in) throw ConfigError("target poses: cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("target poses: " + path.string() + ": " + e.what());
  }
  return parse_target_poses(doc, joints);
}

nlohmann::ordered_json target_poses_to_json(const std::vector<TargetPose>& poses) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : poses) {
    nlohmann::ordered_json o;
    o["skill"] = p.name;
    o["id"] = p.skill;
    o["pose"] = std::vector<double>(p.pose.data(), p.pose.data() + p.pose.size());
    arr.push_back(std::move(o));
  }
  return arr;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("trace: cannot write " + path.string());
  const Eigen::Index j = traj.states.empty() ? 0 : traj.states.front().q.size();
  out << "step";
  for (Eigen::Index i = 0; i < j; ++i) out << ",q" << i;
  for (Eigen::Index i = 0; i < j; ++i) out << ",a" << i;
  out << ",r_task,r_reg\n";
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < j; ++i) {
      out << ',';
      put(out, traj.states[t].q(i));
    }
    const bool has_action = t < traj.actions.size();
    for (Eigen::Index i = 0; i < j; ++i) {
      out << ',';
      if (has_action) put(out, traj.actions[t](i));
    }
    out << ',';
    if (has_action) put(out, traj.task_rewards[t]);
    out << ',';
    if (has_action && t < traj.reg_rewards.size()) put(out, traj.reg_rewards[t]);
    out << '\n';
  }
}

PoseSequence read_trace_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("trace: cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  int joints = 0;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ','))
      if (!cell.empty() && cell[0] == 'q') ++joints;
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // step
    std::vector<double> q(static_cast<std::size_t>(joints));
    for (int i = 0; i < joints; ++i) {
      if (!std::getline(ss, cell, ',')) throw InputError("trace: truncated row in " + path.string());
      q[static_cast<std::size_t>(i)] = std::stod(cell);
    }
    rows.push_back(std::move(q));
  }
  Matrix frames(static_cast<Eigen::Index>(rows.size()), joints);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int i = 0; i < joints; ++i) frames(static_cast<Eigen::Index>(r), i) = rows[r][static_cast<std::size_t>(i)];
  return PoseSequence(std::move(frames));
}

}  // namespace pasist
