#include "mrx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mrx/error.hpp"

namespace mrx {

using nlohmann::json;

void EpisodeRecord::append(StepLog step) {
  if (step.t != static_cast<int>(steps_.size())) {
    throw std::logic_error("episode record: expected step " + std::to_string(steps_.size()) +
                           ", got " + std::to_string(step.t));
  }
  steps_.push_back(std::move(step));
}

void ObjectiveWeights::validate() const {
  if (!(alpha > lambda_overlap) || lambda_overlap < 0) {
    throw ConfigError("objective weights require alpha > lambda_overlap >= 0");
  }
}

double overlap(const EpisodeRecord& record) {
  const auto team = static_cast<std::size_t>(record.header.team_size);
  const auto width = static_cast<std::size_t>(record.header.width);
  const auto cells = width * static_cast<std::size_t>(record.header.height);
  // Per cell, which robots occupied it.
  std::vector<std::vector<bool>> visitors(cells);
  std::size_t visited = 0;
  std::size_t shared = 0;
  for (const auto& step : record.steps()) {
    for (std::size_t i = 0; i < step.robots.size(); ++i) {
      const Cell c = step.robots[i].pose;
      auto& seen = visitors.at(static_cast<std::size_t>(c.row) * width + static_cast<std::size_t>(c.col));
      if (seen.empty()) {
        seen.assign(team, false);
        ++visited;
      }
      if (seen[i]) continue;
      seen[i] = true;
      if (std::count(seen.begin(), seen.end(), true) == 2) ++shared;
    }
  }
  if (visited == 0) throw UndefinedMetric("overlap is undefined: no visited cells");
  return static_cast<double>(shared) / static_cast<double>(visited);
}

double objective(int t_star, double overlap_value, const ObjectiveWeights& weights) {
  return weights.alpha * t_star + weights.lambda_overlap * overlap_value;
}

int count_recoveries(const EpisodeRecord& record) {
  int count = 0;
  const auto& steps = record.steps();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    for (std::size_t i = 0; i < steps[t].robots.size(); ++i) {
      const bool now = steps[t].robots[i].recovery;
      const bool before = t > 0 && steps[t - 1].robots[i].recovery;
      if (now && !before) ++count;
    }
  }
  return count;
}

double planner_fraction(const EpisodeRecord& record) {
  long long planner = 0;
  long long total = 0;
  for (const auto& step : record.steps()) {
    for (const auto& r : step.robots) {
      planner += r.switch_state == 1 ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(planner) / static_cast<double>(total);
}

EpisodeMetrics compute_metrics(const EpisodeRecord& record, const ObjectiveWeights& weights) {
  EpisodeMetrics m;
  m.success = record.success();
  m.t_star = record.t_star;
  m.exploration_length = record.t_star ? *record.t_star : record.steps_taken();
  if (!record.steps().empty()) m.overlap = overlap(record);
  m.objective = objective(m.exploration_length, m.overlap.value_or(0.0), weights);
  m.recoveries = count_recoveries(record);
  m.planner_fraction = planner_fraction(record);
  for (const auto& step : record.steps()) {
    for (const auto& r : step.robots) m.collisions += r.collisions;
  }
  return m;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

Summary summarize(std::span<const EpisodeMetrics> episodes) {
  Summary s;
  s.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return s;
  std::vector<double> el, ov, rec, pf, obj;
  int successes = 0;
  for (const auto& e : episodes) {
    if (e.success) {
      ++successes;
      el.push_back(e.exploration_length);
    }
    if (e.overlap) ov.push_back(*e.overlap);
    rec.push_back(e.recoveries);
    pf.push_back(e.planner_fraction);
    obj.push_back(e.objective);
  }
  s.success_rate = static_cast<double>(successes) / static_cast<double>(episodes.size());
  s.exploration_length = mean_std(el);
  s.overlap = mean_std(ov);
  s.recoveries = mean_std(rec);
  s.planner_fraction = mean_std(pf);
  s.objective = mean_std(obj);
  return s;
}

// ---------------------------------------------------------------------------

std::string to_jsonl(const EpisodeRecord& record) {
  std::string out;
  const auto& h = record.header;
  json header = {{"type", "header"},
                 {"scenario", h.scenario},
                 {"variant", h.variant},
                 {"seed", h.seed},
                 {"width", h.width},
                 {"height", h.height},
                 {"team_size", h.team_size},
                 {"horizon", h.horizon},
                 {"initially_known", h.initially_known},
                 {"definitions",
                  {{"success", "no frontiers left within the horizon (and no contact in strict mode)"},
                   {"exploration_length", "t_star, averaged over successful episodes"}}}};
  out += header.dump();
  out.push_back('\n');
  for (const auto& step : record.steps()) {
    json robots = json::array();
    for (const auto& r : step.robots) {
      robots.push_back({{"r", r.pose.row},
                        {"c", r.pose.col},
                        {"a", std::string(to_string(r.action))},
                        {"s", r.switch_state},
                        {"p", r.fidelity},
                        {"rec", r.recovery ? 1 : 0},
                        {"col", r.collisions}});
    }
    json line = {{"type", "step"}, {"t", step.t}, {"newly_known", step.newly_known}, {"robots", robots}};
    out += line.dump();
    out.push_back('\n');
  }
  json end = {{"type", "end"}, {"collision_failure", record.collision_failure}};
  end["t_star"] = record.t_star ? json(*record.t_star) : json(nullptr);
  out += end.dump();
  out.push_back('\n');
  return out;
}

EpisodeRecord parse_jsonl(std::string_view text) {
  EpisodeRecord record;
  bool have_header = false;
  bool have_end = false;
  std::size_t line_no = 0;
  try {
    while (!text.empty()) {
      const auto nl = text.find('\n');
      const auto line = text.substr(0, nl);
      text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        auto& h = record.header;
        h.scenario = j.at("scenario").get<std::string>();
        h.variant = j.at("variant").get<std::string>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.width = j.at("width").get<int>();
        h.height = j.at("height").get<int>();
        h.team_size = j.at("team_size").get<int>();
        h.horizon = j.at("horizon").get<int>();
        h.initially_known = j.at("initially_known").get<int>();
        have_header = true;
      } else if (type == "step") {
        StepLog step;
        step.t = j.at("t").get<int>();
        step.newly_known = j.at("newly_known").get<int>();
        for (const auto& r : j.at("robots")) {
          RobotStep rs;
          rs.pose = {r.at("r").get<int>(), r.at("c").get<int>()};
          const auto action = parse_action(r.at("a").get<std::string>());
          if (!action) throw ConfigError("unknown action");
          rs.action = *action;
          rs.switch_state = r.at("s").get<int>();
          rs.fidelity = r.at("p").get<double>();
          rs.recovery = r.at("rec").get<int>() != 0;
          rs.collisions = r.at("col").get<int>();
          step.robots.push_back(rs);
        }
        record.append(std::move(step));
      } else if (type == "end") {
        record.collision_failure = j.at("collision_failure").get<bool>();
        if (!j.at("t_star").is_null()) record.t_star = j.at("t_star").get<int>();
        have_end = true;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("episode log line " + std::to_string(line_no) + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError("episode log line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header || !have_end) throw ConfigError("episode log is missing its header or end line");
  return record;
}

void save_episode_log(const EpisodeRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write episode log " + path.string());
  out << to_jsonl(record);
}

EpisodeRecord load_episode_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open episode log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_jsonl(buf.str());
}

std::vector<CoveragePoint> coverage_curve(const EpisodeRecord& record) {
  std::vector<CoveragePoint> out;
  const double total = static_cast<double>(record.header.width) * record.header.height;
  int known = record.header.initially_known;
  out.push_back({0, known, known / total});
  for (const auto& step : record.steps()) {
    known += step.newly_known;
    out.push_back({step.t + 1, known, known / total});
  }
  return out;
}

}  // namespace mrx
