// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Long-running training criteria write their runs under --work.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "pasist/cli.hpp"
#include "pasist/discriminator.hpp"
#include "pasist/dtw.hpp"
#include "pasist/ppo.hpp"
#include "pasist/reward_shaper.hpp"
#include "pasist/sil_buffer.hpp"
#include "pasist/skill_selector.hpp"
#include "support.hpp"

using namespace pasist;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path configs;
  fs::path work;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome dtw_oracle(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  int mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + uniform_index(rng, 6));
    const auto m = static_cast<Eigen::Index>(1 + uniform_index(rng, 6));
    const auto j = static_cast<Eigen::Index>(1 + uniform_index(rng, 3));
    const Matrix a = testkit::random_matrix(n, j, rng, 2.0);
    const Matrix b = testkit::random_matrix(m, j, rng, 2.0);
    const double err = std::abs(dtw_distance(PoseSequence(a), PoseSequence(b)) - testkit::brute_force_dtw(a, b));
    worst = std::max(worst, err);
    if (!(err <= 1e-12)) ++mismatches;
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < 10.0,
          "200 pairs, max |diff| " + fmt(worst) + ", " + std::to_string(mismatches) + " mismatches, " +
              fmt(elapsed, 3) + " s"};
}

Outcome gradient_checks(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1002);
  double worst_disc = 0.0, worst_value = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    DiscriminatorConfig cfg;
    cfg.hidden = {1 + static_cast<int>(uniform_index(rng, 16)), 1 + static_cast<int>(uniform_index(rng, 16))};
    cfg.gp_weight = uniform(rng, 0.5, 10.0);
    const int dim = 2 + 2 * static_cast<int>(uniform_index(rng, 3));
    Discriminator d = Discriminator::create(dim, cfg, rng);
    for (double& p : d.net().parameters()) p += uniform(rng, -0.3, 0.3);
    const Matrix buf = testkit::random_matrix(6, dim, rng);
    const Matrix pol = testkit::random_matrix(5, dim, rng);
    const auto analytic = d.loss(buf, pol).grad;
    const auto fd = testkit::central_differences(d.net().parameters(), [&] { return d.loss(buf, pol).total; });
    worst_disc = std::max(worst_disc, testkit::relative_error(analytic, fd));
  }
  for (int trial = 0; trial < 20; ++trial) {
    PpoConfig cfg;
    cfg.value_hidden = {1 + static_cast<int>(uniform_index(rng, 16)), 1 + static_cast<int>(uniform_index(rng, 16))};
    const int dim = 1 + static_cast<int>(uniform_index(rng, 6));
    ValueNet v = ValueNet::create(dim, cfg, rng);
    for (double& p : v.net().parameters()) p += uniform(rng, -0.3, 0.3);
    const Matrix obs = testkit::random_matrix(7, dim, rng);
    std::vector<double> ret(7);
    for (double& r : ret) r = uniform(rng, -2.0, 2.0);
    const double coef = uniform(rng, 0.1, 2.0);
    const auto res = value_loss(v, obs, ret, coef);
    const auto fd =
        testkit::central_differences(v.net().parameters(), [&] { return value_loss(v, obs, ret, coef).loss; });
    worst_value = std::max(worst_value, testkit::relative_error(res.grad, fd));
  }
  const double elapsed = seconds_since(t0);
  return {worst_disc <= 1e-3 && worst_value <= 1e-4 && elapsed < 30.0,
          "discriminator max rel err " + fmt(worst_disc) + " (<= 1e-3), value max rel err " + fmt(worst_value) +
              " (<= 1e-4), " + fmt(elapsed, 3) + " s"};
}

Outcome sil_reward_range(const Context&) {
  int violations = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double d = -10.0 + 20.0 * i / 10000.0;
    const double r = sil_reward_from_score(d);
    if (!(r >= 0.0 && r <= 1.0)) ++violations;
    if (d <= -1.0 && r != 0.0) ++violations;
  }
  if (sil_reward_from_score(1.0) != 1.0) ++violations;
  if (sil_reward_from_score(-1.0) != 0.0) ++violations;
  return {violations == 0, "10001 grid points, " + std::to_string(violations) + " violations"};
}

Outcome buffer_invariants(const Context&) {
  Rng rng(1004);
  const std::size_t cap = 8;
  SilBuffer buf(4, cap);
  std::vector<double> eps(4, -std::numeric_limits<double>::infinity());
  int violations = 0, accepted_count = 0;
  for (int i = 0; i < 10000; ++i) {
    const int skill = static_cast<int>(uniform_index(rng, 4));
    const auto us = static_cast<std::size_t>(skill);
    const double a = std::round(uniform(rng, -50.0, 50.0) + 0.01 * i);
    const auto before = buf.to_json();
    std::vector<double> eps_before(4);
    for (int s = 0; s < 4; ++s) eps_before[static_cast<std::size_t>(s)] = buf.threshold(s);
    const auto feat = transitions_from_poses(PoseSequence(testkit::random_matrix(4, 2, rng)));
    const bool accepted = buf.maybe_insert(skill, feat, a);
    if (accepted != (a > eps_before[us])) ++violations;  // strict admission
    if (accepted) {
      eps[us] = a;
      ++accepted_count;
    }
    const auto after = buf.to_json();
    for (int s = 0; s < 4; ++s) {
      const auto u = static_cast<std::size_t>(s);
      if (buf.threshold(s) < eps_before[u]) ++violations;  // monotone
      if (buf.threshold(s) != eps[u]) ++violations;
      if (buf.entries(s).size() > cap) ++violations;       // capacity
      if (s != skill && (after["skills"][u] != before["skills"][u] || after["epsilon"][u] != before["epsilon"][u]))
        ++violations;  // isolation
      if (!before["skills"][u].empty() && buf.entries(s).empty()) ++violations;  // never emptied
      for (const auto& e : buf.entries(s))
        if (e.a_value > buf.threshold(s)) ++violations;
    }
  }
  return {violations == 0, "10000 inserts over 4 skills, " + std::to_string(accepted_count) + " admitted, " +
                               std::to_string(violations) + " violations"};
}

Outcome selector_law(const Context&) {
  Rng rng(1005);
  const double delta = 0.05;
  double worst_sum = 0.0;
  int monotone_violations = 0, pairs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 5);
    std::vector<double> p(n);
    for (double& x : p) x = uniform(rng, 0.0, 1.0);
    const auto probs = selection_probabilities(p, delta);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0));
    for (std::size_t i = 0; i < n; ++i) {
      auto higher = p;
      higher[i] = std::min(1.0, p[i] + uniform(rng, 0.01, 0.5));
      if (!(higher[i] > p[i])) continue;
      ++pairs;
      if (!(selection_probabilities(higher, delta)[i] < probs[i])) ++monotone_violations;
    }
  }
  const auto probs = selection_probabilities(std::vector<double>{1.0, 0.0}, delta);
  Rng draws(1006);
  int second = 0;
  for (int i = 0; i < 100000; ++i) second += sample_skill(probs, draws) == 1 ? 1 : 0;
  const double freq = second / 100000.0;
  const bool pass = worst_sum <= 1e-12 && monotone_violations == 0 && std::abs(freq - 1.05 / 1.10) <= 0.01;
  return {pass, "max |sum - 1| " + fmt(worst_sum) + ", " + std::to_string(monotone_violations) + "/" +
                    std::to_string(pairs) + " monotonicity violations, skill-2 frequency " + fmt(freq, 5) +
                    " vs " + fmt(1.05 / 1.10, 5)};
}

Outcome weight_formulas(const Context&) {
  Rng rng(1007);
  double worst = 0.0;
  int exact_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 4));
    const double sigma = uniform(rng, 0.1, 10.0);
    std::vector<std::optional<double>> e(static_cast<std::size_t>(n));
    double dev = 0.0;
    for (auto& x : e) {
      x = uniform(rng, 0.0, 20.0);
      dev += std::abs(*x - sigma);
    }
    worst = std::max(worst, std::abs(omega_sil(e, sigma, n) - std::exp(-dev) / n));
    const double rt = uniform(rng, -1.0, 2.0), st = uniform(rng, 0.1, 1.0);
    worst = std::max(worst, std::abs(omega_task(rt, st) - std::exp(-std::abs(rt - st))));
    if (omega_task(st, st) != 1.0) ++exact_violations;
  }
  return {worst <= 1e-12 && exact_violations == 0,
          "1000 inputs, max |diff| " + fmt(worst) + ", omega_task(sigma, sigma) != 1 in " +
              std::to_string(exact_violations) + " cases"};
}

// Mean of a per-skill metric over the final window; skips iterations without a value.
double final_mean(const std::vector<MetricsRecord>& records, int window,
                  const std::function<std::optional<double>(const MetricsRecord&)>& get) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = records.size() - std::min<std::size_t>(records.size(), static_cast<std::size_t>(window));
       i < records.size(); ++i)
    if (const auto v = get(records[i])) {
      sum += *v;
      ++n;
    }
  return n ? sum / n : std::nan("");
}

Outcome desk_learning(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = cli::load_config(ctx.configs / "walk.toml", {});
  if (cfg.num_skills() != 1 || cfg.iterations != 300 || cfg.ppo.num_envs != 64 || cfg.seed != 7)
    return {false, "walk.toml must hold 1 skill, 300 iterations, 64 envs, seed 7"};
  std::ostringstream log;
  const auto res = cli::train_run(cfg, ctx.work / "walk", {cfg.seed}, log, false);
  if (res.status != cli::kOk || res.records.empty()) return {false, "training failed: " + res.error};
  const auto first = res.records.front().expected_dtw[0];
  if (!first) return {false, "no episode completed in iteration 1"};
  const double final_dtw = final_mean(res.records, cfg.final_window, [](const MetricsRecord& r) { return r.expected_dtw[0]; });
  const double ratio = final_dtw / *first;
  const bool pass = ratio <= 0.5 && res.final_task_reward >= 0.6;
  return {pass, "E[DTW] " + fmt(*first) + " -> " + fmt(final_dtw) + " (ratio " + fmt(ratio, 3) +
                    ", need <= 0.5), final r^T " + fmt(res.final_task_reward, 4) + " (need >= 0.6), " +
                    fmt(seconds_since(t0), 4) + " s"};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Outcome ablation_direction(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path config = ctx.configs / "walk_bipedal.toml";
  const ExperimentConfig cfg = cli::load_config(config, {});
  if (cfg.num_skills() != 2 || cfg.iterations != 500) return {false, "walk_bipedal.toml must hold 2 skills, 500 iterations"};
  std::ostringstream log;
  const fs::path out = ctx.work / "ablation";
  const int status = cli::cmd_ablate(config, {1, 2}, {}, out, log, false);
  if (status != cli::kOk) return {false, "ablation exited with status " + std::to_string(status) + ": " + log.str()};

  std::ifstream csv(out / "ablation.csv");
  std::string line;
  std::getline(csv, line);
  const auto header = split(line, ',');
  auto column = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  const std::size_t c_mode = column("mode"), c_total = column("final_total_reward"), c_worst = column("worst_j_dtw");
  std::map<std::string, std::vector<double>> total, worst;
  while (std::getline(csv, line)) {
    const auto f = split(line, ',');
    total[f[c_mode]].push_back(std::stod(f[c_total]));
    worst[f[c_mode]].push_back(std::stod(f[c_worst]));
  }
  auto avg = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  bool pass = true;
  std::string detail = "mean final r:";
  for (Mode m : kAllModes) {
    const std::string name(mode_name(m));
    if (total[name].size() != 2) return {false, "missing rows for mode " + name};
    detail += " " + name + "=" + fmt(avg(total[name]));
    if (m != Mode::kFull && !(avg(total["full"]) > avg(total[name]))) pass = false;
  }
  const double jw_full = avg(worst["full"]), jw_nosel = avg(worst["no-selector"]);
  if (!(jw_full > jw_nosel)) pass = false;
  detail += "; mean worst-skill J_DTW full=" + fmt(jw_full) + " no-selector=" + fmt(jw_nosel) + "; " +
            fmt(seconds_since(t0), 4) + " s";
  return {pass, detail};
}

Outcome dtw_matrix_structure(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = cli::load_config(ctx.configs / "four_skills.toml", {});
  if (cfg.num_skills() != 4) return {false, "four_skills.toml must hold 4 skills"};
  std::ostringstream log;
  const fs::path out = ctx.work / "four_skills";
  const auto res = cli::train_run(cfg, out, {cfg.seed}, log, false);
  if (res.status != cli::kOk) return {false, "training failed: " + res.error};
  const EvalReport rep = evaluate(res.trainer->policy(), cfg, res.trainer->reference_dtw(), cfg.eval.episodes,
                                  out / "traces");
  const auto& m = rep.dtw_matrix;
  bool diag = true, sym = true;
  std::vector<double> row_mean(4, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    if (m[i][i] != 0.0) diag = false;
    for (std::size_t j = 0; j < 4; ++j) {
      if (std::abs(m[i][j] - m[j][i]) > 1e-9) sym = false;
      if (i != j) row_mean[i] += m[i][j] / 3.0;
    }
  }
  std::size_t bipedal = 4;
  for (std::size_t i = 0; i < 4; ++i)
    if (cfg.skills[i].bipedal) bipedal = i;
  if (bipedal == 4) return {false, "no bipedal skill configured"};
  bool largest = true;
  for (std::size_t i = 0; i < 4; ++i)
    if (i != bipedal && !(row_mean[bipedal] > row_mean[i])) largest = false;
  std::string detail = std::string("diagonal zero ") + (diag ? "yes" : "no") + ", symmetric " + (sym ? "yes" : "no") +
                       ", mean off-diagonal:";
  for (std::size_t i = 0; i < 4; ++i) detail += " " + cfg.skills[i].name + "=" + fmt(row_mean[i]);
  detail += ", " + fmt(seconds_since(t0), 4) + " s";
  return {diag && sym && largest, detail};
}

Outcome determinism(const Context& ctx) {
  cli::Overrides o;
  o.iterations = 20;
  o.workers = 2;
  std::ostringstream log;
  const fs::path config = ctx.configs / "walk.toml";
  const fs::path a = ctx.work / "determinism_a", b = ctx.work / "determinism_b";
  if (cli::cmd_train(config, o, a, log, false) != cli::kOk || cli::cmd_train(config, o, b, log, false) != cli::kOk)
    return {false, "training failed: " + log.str()};
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string ma = slurp(a / "metrics.jsonl"), mb = slurp(b / "metrics.jsonl");
  const bool same = !ma.empty() && ma == mb;
  return {same, std::string("walk.toml, 20 iterations, 2 workers: metrics.jsonl ") +
                    (same ? "byte-identical" : "differs") + " (" + std::to_string(ma.size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Context ctx;
  std::vector<int> only;
  app.add_option("--configs", ctx.configs, "Directory holding the experiment configs")->required();
  app.add_option("--work", ctx.work, "Scratch directory for training runs")->required();
  app.add_option("--only", only, "Run only these criterion numbers")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"dtw oracle equivalence", dtw_oracle},
      {"gradient checks", gradient_checks},
      {"sil reward range", sil_reward_range},
      {"buffer invariants", buffer_invariants},
      {"selector law", selector_law},
      {"weight formulas", weight_formulas},
      {"desk-scale walk learning", desk_learning},
      {"ablation direction", ablation_direction},
      {"cross-skill dtw matrix structure", dtw_matrix_structure},
      {"determinism", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  fs::create_directories(ctx.work);
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
