// Copyright 2026 The hpf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hpf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hpf
{
using nlohmann::json;

std::string to_string(RunStatus s)
{
  return s == RunStatus::Ok ? "Ok" : "Fault";
}

std::optional<double> interior_distance_to_polyline(const Vec2 & p, const std::vector<Vec2> & polyline)
{
  if (polyline.size() < 2) {
    return std::nullopt;
  }
  double best = std::numeric_limits<double>::infinity();
  bool best_outside = true;
  const std::size_t last = polyline.size() - 2;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 ab = polyline[i + 1] - a;
    const double len2 = ab.squaredNorm();
    const double raw = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    const double u = std::clamp(raw, 0.0, 1.0);
    const double d = (a + u * ab - p).norm();
    const bool outside = (i == 0 && raw < 0.0) || (i == last && raw > 1.0);
    if (d < best || (d == best && !outside)) {
      best = d;
      best_outside = outside;
    }
  }
  if (best_outside) {
    return std::nullopt;
  }
  return best;
}

double percentile(std::vector<double> values, double q)
{
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Metrics compute_metrics(const RunLog & log)
{
  Metrics m;
  m.status = to_string(log.status);
  m.steps = log.steps.size();
  const int leader_id = log.agent_ids.at(log.leader_index);

  std::vector<Vec2> footsteps;
  for (const auto & s : log.steps) {
    const Vec2 p = s.agents.at(log.leader_index).position();
    if (footsteps.empty() || (p - footsteps.back()).norm() > 0.0) {
      footsteps.push_back(p);
    }
  }
  std::vector<double> lateral;
  double sq = 0.0;
  for (const auto & s : log.steps) {
    if (auto d = interior_distance_to_polyline(s.robot.position(), footsteps)) {
      lateral.push_back(*d);
      sq += *d * *d;
    }
  }
  m.lateral.count = lateral.size();
  if (!lateral.empty()) {
    m.lateral.max = *std::max_element(lateral.begin(), lateral.end());
    m.lateral.rms = std::sqrt(sq / static_cast<double>(lateral.size()));
    m.lateral.p95 = percentile(lateral, 0.95);
  }

  double err2 = 0.0;
  double mu_cv = 0.0;
  double mu_uni = 0.0;
  std::size_t hits = 0;
  std::map<std::string, std::size_t> modes;
  for (const auto & s : log.steps) {
    ++modes[std::string(to_string(s.mode))];
    if (s.estimate) {
      err2 += (s.estimate->position - s.agents.at(log.leader_index).position()).squaredNorm();
      mu_cv += s.estimate->mu_cv;
      mu_uni += s.estimate->mu_uni;
      ++m.tracker_samples;
    }
    if (s.target_truth) {
      ++m.identity_samples;
      hits += *s.target_truth == leader_id ? 1 : 0;
    }
    for (const auto & e : s.events) {
      ++m.event_counts[std::string(to_string(e.kind))];
    }
  }
  if (m.tracker_samples > 0) {
    const auto n = static_cast<double>(m.tracker_samples);
    m.tracker_rmse = std::sqrt(err2 / n);
    m.mean_mu_cv = mu_cv / n;
    m.mean_mu_uni = mu_uni / n;
  }
  if (m.identity_samples > 0) {
    m.identity_precision = static_cast<double>(hits) / static_cast<double>(m.identity_samples);
  }
  for (const auto & [name, count] : modes) {
    m.mode_occupancy[name] = static_cast<double>(count) / static_cast<double>(m.steps);
  }
  return m;
}

json metrics_to_json(const Metrics & m)
{
  json j;
  j["status"] = m.status;
  j["steps"] = m.steps;
  j["lateral_error"] = {
    {"count", m.lateral.count}, {"max", m.lateral.max}, {"p95", m.lateral.p95}, {"rms", m.lateral.rms}};
  j["tracker_rmse"] = m.tracker_rmse;
  j["tracker_samples"] = m.tracker_samples;
  j["identity_precision"] = m.identity_precision;
  j["identity_samples"] = m.identity_samples;
  j["mode_occupancy"] = m.mode_occupancy;
  j["mean_mu"] = {{"cv", m.mean_mu_cv}, {"unicycle", m.mean_mu_uni}};
  j["events"] = m.event_counts;
  return j;
}

namespace
{
json pose_json(const Pose2D & p)
{
  return json::array({p.x, p.y, p.theta});
}

Pose2D pose_from(const json & j)
{
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json vec_json(const Vec2 & v)
{
  return json::array({v.x(), v.y()});
}

Vec2 vec_from(const json & j)
{
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

FusionMode mode_from(const std::string & s)
{
  for (auto m : {FusionMode::Bootstrap, FusionMode::TrackedBoth, FusionMode::TrackedLidarOnly,
                 FusionMode::TrackedCameraOnly, FusionMode::Lost}) {
    if (to_string(m) == s) {
      return m;
    }
  }
  throw std::runtime_error("run log: unknown fusion mode " + s);
}

SafetyEventKind event_from(const std::string & s)
{
  for (auto k : {SafetyEventKind::SlowDown, SafetyEventKind::Stop, SafetyEventKind::SoundAlert}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw std::runtime_error("run log: unknown event " + s);
}

template <typename T>
json optional_json(const std::optional<T> & v)
{
  return v ? json(*v) : json(nullptr);
}
}  // namespace

json runlog_to_json(const RunLog & log)
{
  json j;
  j["scenario"] = log.scenario;
  j["seed"] = log.seed;
  j["dt"] = log.dt;
  j["agent_ids"] = log.agent_ids;
  j["leader_index"] = log.leader_index;
  j["status"] = to_string(log.status);
  j["fault_reason"] = log.fault_reason;
  j["summary"] = {
    {"init_attempts", log.summary.init_attempts},
    {"positives", log.summary.positives},
    {"negatives", log.summary.negatives},
    {"admitted_points", log.summary.admitted_points},
    {"spline_fit_failures", log.summary.spline_fit_failures},
    {"backtracks", log.summary.backtracks}};
  j["spline"] = spline_to_json(log.spline);

  json steps = json::array();
  for (const auto & s : log.steps) {
    json r;
    r["t"] = s.t;
    r["init"] = s.init_phase;
    r["robot"] = pose_json(s.robot);
    json agents = json::array();
    for (const auto & p : s.agents) {
      agents.push_back(pose_json(p));
    }
    r["agents"] = std::move(agents);
    r["mode"] = std::string(to_string(s.mode));
    r["measurement"] = s.measurement ? vec_json(*s.measurement) : json(nullptr);
    r["target"] = optional_json(s.target_truth);
    r["camera_used"] = s.camera_used;
    if (s.estimate) {
      const auto & e = *s.estimate;
      r["estimate"] = {
        {"p", vec_json(e.position)},
        {"v", vec_json(e.velocity)},
        {"cov", {e.cov_pos(0, 0), e.cov_pos(0, 1), e.cov_pos(1, 1)}},
        {"mu", {e.mu_cv, e.mu_uni}}};
    } else {
      r["estimate"] = nullptr;
    }
    r["spline_version"] = s.spline_version;
    r["v"] = s.v;
    r["omega"] = s.omega;
    r["lateral_error"] = optional_json(s.lateral_error);
    r["heading_error"] = optional_json(s.heading_error);
    json events = json::array();
    for (const auto & e : s.events) {
      events.push_back({{"kind", std::string(to_string(e.kind))}, {"t", e.timestamp}});
    }
    r["events"] = std::move(events);
    steps.push_back(std::move(r));
  }
  j["steps"] = std::move(steps);
  j["metrics"] = metrics_to_json(compute_metrics(log));
  return j;
}

RunLog runlog_from_json(const json & j)
{
  RunLog log;
  log.scenario = j.at("scenario").get<std::string>();
  log.seed = j.at("seed").get<std::uint64_t>();
  log.dt = j.at("dt").get<double>();
  log.agent_ids = j.at("agent_ids").get<std::vector<int>>();
  log.leader_index = j.at("leader_index").get<std::size_t>();
  log.status = j.at("status").get<std::string>() == "Fault" ? RunStatus::Fault : RunStatus::Ok;
  log.fault_reason = j.at("fault_reason").get<std::string>();
  const json & sm = j.at("summary");
  log.summary.init_attempts = sm.at("init_attempts").get<int>();
  log.summary.positives = sm.at("positives").get<std::size_t>();
  log.summary.negatives = sm.at("negatives").get<std::size_t>();
  log.summary.admitted_points = sm.at("admitted_points").get<std::size_t>();
  log.summary.spline_fit_failures = sm.at("spline_fit_failures").get<std::size_t>();
  log.summary.backtracks = sm.at("backtracks").get<std::size_t>();
  log.spline = spline_from_json(j.at("spline"));

  for (const auto & r : j.at("steps")) {
    StepRecord s;
    s.t = r.at("t").get<double>();
    s.init_phase = r.at("init").get<bool>();
    s.robot = pose_from(r.at("robot"));
    for (const auto & a : r.at("agents")) {
      s.agents.push_back(pose_from(a));
    }
    s.mode = mode_from(r.at("mode").get<std::string>());
    if (!r.at("measurement").is_null()) {
      s.measurement = vec_from(r.at("measurement"));
    }
    if (!r.at("target").is_null()) {
      s.target_truth = r.at("target").get<int>();
    }
    s.camera_used = r.at("camera_used").get<bool>();
    if (!r.at("estimate").is_null()) {
      const json & e = r.at("estimate");
      EstimateSummary es;
      es.position = vec_from(e.at("p"));
      es.velocity = vec_from(e.at("v"));
      const json & c = e.at("cov");
      es.cov_pos << c.at(0).get<double>(), c.at(1).get<double>(), c.at(1).get<double>(), c.at(2).get<double>();
      es.mu_cv = e.at("mu").at(0).get<double>();
      es.mu_uni = e.at("mu").at(1).get<double>();
      s.estimate = es;
    }
    s.spline_version = r.at("spline_version").get<std::uint64_t>();
    s.v = r.at("v").get<double>();
    s.omega = r.at("omega").get<double>();
    if (!r.at("lateral_error").is_null()) {
      s.lateral_error = r.at("lateral_error").get<double>();
    }
    if (!r.at("heading_error").is_null()) {
      s.heading_error = r.at("heading_error").get<double>();
    }
    for (const auto & e : r.at("events")) {
      s.events.push_back({event_from(e.at("kind").get<std::string>()), e.at("t").get<double>()});
    }
    log.steps.push_back(std::move(s));
  }
  return log;
}

RunLog read_runlog(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open run log " + path.string());
  }
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw std::runtime_error("run log " + path.string() + " is not valid JSON");
  }
  try {
    return runlog_from_json(j);
  } catch (const json::exception & e) {
    throw std::runtime_error("run log " + path.string() + ": " + e.what());
  }
}

namespace
{
std::ofstream open_out(const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << std::setprecision(12);
  return out;
}

void close_out(std::ofstream & out, const std::filesystem::path & path)
{
  out.close();
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

template <typename T>
void put_optional(std::ostream & os, const std::optional<T> & v)
{
  if (v) {
    os << *v;
  }
}
}  // namespace

void write_plot_data(const RunLog & log, const std::filesystem::path & out_dir)
{
  std::filesystem::create_directories(out_dir);
  {
    const auto path = out_dir / "truth_leader.csv";
    auto out = open_out(path);
    out << "t,x,y,theta\n";
    for (const auto & s : log.steps) {
      const Pose2D & p = s.agents.at(log.leader_index);
      out << s.t << ',' << p.x << ',' << p.y << ',' << p.theta << '\n';
    }
    close_out(out, path);
  }
  {
    const auto path = out_dir / "robot.csv";
    auto out = open_out(path);
    out << "t,x,y,theta,v,omega,lateral_error,heading_error,events\n";
    for (const auto & s : log.steps) {
      out << s.t << ',' << s.robot.x << ',' << s.robot.y << ',' << s.robot.theta << ',' << s.v << ',' << s.omega
          << ',';
      put_optional(out, s.lateral_error);
      out << ',';
      put_optional(out, s.heading_error);
      out << ',';
      for (std::size_t i = 0; i < s.events.size(); ++i) {
        out << (i ? ";" : "") << to_string(s.events[i].kind);
      }
      out << '\n';
    }
    close_out(out, path);
  }
  {
    const auto path = out_dir / "estimates.csv";
    auto out = open_out(path);
    out << "t,mode,meas_x,meas_y,target,est_x,est_y,est_vx,est_vy,mu_cv,mu_uni\n";
    for (const auto & s : log.steps) {
      out << s.t << ',' << to_string(s.mode) << ',';
      if (s.measurement) {
        out << s.measurement->x() << ',' << s.measurement->y();
      } else {
        out << ',';
      }
      out << ',';
      put_optional(out, s.target_truth);
      out << ',';
      if (s.estimate) {
        const auto & e = *s.estimate;
        out << e.position.x() << ',' << e.position.y() << ',' << e.velocity.x() << ',' << e.velocity.y() << ','
            << e.mu_cv << ',' << e.mu_uni;
      } else {
        out << ",,,,,";
      }
      out << '\n';
    }
    close_out(out, path);
  }
  {
    const auto path = out_dir / "spline.json";
    auto out = open_out(path);
    out << spline_to_json(log.spline).dump(2) << '\n';
    close_out(out, path);
  }
}

void write_outputs(const RunLog & log, const std::filesystem::path & out_dir)
{
  std::filesystem::create_directories(out_dir);
  const json j = runlog_to_json(log);
  {
    const auto path = out_dir / "run.json";
    auto out = open_out(path);
    out << j.dump() << '\n';
    close_out(out, path);
  }
  {
    const auto path = out_dir / "metrics.json";
    auto out = open_out(path);
    out << j.at("metrics").dump(2) << '\n';
    close_out(out, path);
  }
  write_plot_data(log, out_dir);
}

}  // namespace hpf
