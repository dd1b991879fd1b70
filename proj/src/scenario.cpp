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

#include "hpf/scenario.hpp"

#include "hpf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace hpf
{
using nlohmann::json;

namespace
{
constexpr double kDeg = std::numbers::pi / 180.0;

// Reads fields from one JSON object and rejects keys nobody asked for.
class ObjectReader
{
public:
  ObjectReader(const json & j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) {
      throw ScenarioError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  std::string key(const std::string & k) const { return path_.empty() ? k : path_ + "." + k; }

  bool has(const std::string & k) const { return j_.contains(k); }

  const json & raw(const std::string & k)
  {
    seen_.insert(k);
    return j_.at(k);
  }

  void number(const std::string & k, double & out)
  {
    if (!has(k)) {
      return;
    }
    const json & v = raw(k);
    if (!v.is_number()) {
      throw ScenarioError(key(k), "expected a number");
    }
    out = v.get<double>();
    if (!std::isfinite(out)) {
      throw ScenarioError(key(k), "must be finite");
    }
  }

  void positive(const std::string & k, double & out)
  {
    number(k, out);
    if (has(k) && !(out > 0.0)) {
      throw ScenarioError(key(k), "must be positive");
    }
  }

  void angle_deg(const std::string & k, double & out_rad)
  {
    double deg = out_rad / kDeg;
    positive(k, deg);
    out_rad = deg * kDeg;
  }

  template <typename Int>
  void integer(const std::string & k, Int & out, long long min_value = 0)
  {
    if (!has(k)) {
      return;
    }
    const json & v = raw(k);
    if (!v.is_number_integer()) {
      throw ScenarioError(key(k), "expected an integer");
    }
    const long long x = v.get<long long>();
    if (x < min_value) {
      throw ScenarioError(key(k), "must be at least " + std::to_string(min_value));
    }
    out = static_cast<Int>(x);
  }

  void unsigned64(const std::string & k, std::uint64_t & out)
  {
    if (!has(k)) {
      return;
    }
    const json & v = raw(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ScenarioError(key(k), "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void string(const std::string & k, std::string & out)
  {
    if (!has(k)) {
      return;
    }
    const json & v = raw(k);
    if (!v.is_string()) {
      throw ScenarioError(key(k), "expected a string");
    }
    out = v.get<std::string>();
  }

  std::optional<ObjectReader> object(const std::string & k)
  {
    if (!has(k)) {
      return std::nullopt;
    }
    return ObjectReader(raw(k), key(k));
  }

  void finish() const
  {
    for (const auto & [k, v] : j_.items()) {
      if (!seen_.count(k)) {
        throw ScenarioError(key(k), "unknown key");
      }
    }
  }

private:
  const json & j_;
  std::string path_;
  std::set<std::string> seen_;
};

Pose2D read_pose(ObjectReader r)
{
  Pose2D p;
  r.number("x", p.x);
  r.number("y", p.y);
  r.number("theta", p.theta);
  r.finish();
  return make_pose(p.x, p.y, p.theta);
}

Vec2 read_point(const json & j, const std::string & key)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ScenarioError(key, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

void fill_headings(AgentSpec & a)
{
  auto & wp = a.waypoints;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    if (a.waypoint_has_theta[i]) {
      continue;
    }
    // Direction of travel towards the next distinct position, else from the previous one.
    std::optional<double> heading;
    for (std::size_t j = i + 1; j < wp.size() && !heading; ++j) {
      const Vec2 d = wp[j].pose.position() - wp[i].pose.position();
      if (d.norm() > 1e-9) {
        heading = std::atan2(d.y(), d.x());
      }
    }
    for (std::size_t j = i; j-- > 0 && !heading;) {
      const Vec2 d = wp[i].pose.position() - wp[j].pose.position();
      if (d.norm() > 1e-9) {
        heading = std::atan2(d.y(), d.x());
      }
    }
    wp[i].pose.theta = normalize_angle(heading.value_or(0.0));
  }
}

AgentSpec read_agent(ObjectReader r)
{
  AgentSpec a;
  if (!r.has("id")) {
    throw ScenarioError(r.key("id"), "required");
  }
  r.integer("id", a.id, -1000000);
  std::string role = "pedestrian";
  r.string("role", role);
  if (role == "leader") {
    a.role = AgentRole::Leader;
  } else if (role == "pedestrian") {
    a.role = AgentRole::Pedestrian;
  } else {
    throw ScenarioError(r.key("role"), "expected \"leader\" or \"pedestrian\"");
  }
  r.positive("body_radius", a.body_radius);
  if (r.has("appearance_seed")) {
    std::uint64_t s = 0;
    r.unsigned64("appearance_seed", s);
    a.appearance_seed = s;
  }
  if (r.has("embedding_mean")) {
    if (a.appearance_seed) {
      throw ScenarioError(r.key("embedding_mean"), "conflicts with appearance_seed");
    }
    const json & e = r.raw("embedding_mean");
    if (!e.is_array() || e.empty()) {
      throw ScenarioError(r.key("embedding_mean"), "expected a non-empty array of numbers");
    }
    std::vector<double> mean;
    for (const auto & x : e) {
      if (!x.is_number()) {
        throw ScenarioError(r.key("embedding_mean"), "expected numbers");
      }
      mean.push_back(x.get<double>());
    }
    a.embedding_mean = std::move(mean);
  }
  if (!r.has("waypoints")) {
    throw ScenarioError(r.key("waypoints"), "required");
  }
  const json & wps = r.raw("waypoints");
  const std::string wkey = r.key("waypoints");
  if (!wps.is_array() || wps.empty()) {
    throw ScenarioError(wkey, "expected a non-empty array");
  }
  for (std::size_t i = 0; i < wps.size(); ++i) {
    ObjectReader w(wps[i], wkey + "." + std::to_string(i));
    TimedPose tp;
    if (!w.has("t") || !w.has("x") || !w.has("y")) {
      throw ScenarioError(w.key("t"), "waypoints need t, x and y");
    }
    w.number("t", tp.t);
    w.number("x", tp.pose.x);
    w.number("y", tp.pose.y);
    const bool has_theta = w.has("theta");
    w.number("theta", tp.pose.theta);
    w.finish();
    if (!a.waypoints.empty() && !(tp.t > a.waypoints.back().t)) {
      throw ScenarioError(w.key("t"), "waypoint times must increase strictly");
    }
    tp.pose.theta = normalize_angle(tp.pose.theta);
    a.waypoints.push_back(tp);
    a.waypoint_has_theta.push_back(has_theta);
  }
  r.finish();
  fill_headings(a);
  return a;
}

std::vector<Embedding> generate_pool(const Scenario & s)
{
  Rng rng(stream_seed(s.seed, "negative_pool"));
  std::vector<Embedding> pool;
  pool.reserve(s.embeddings.negative_pool_size);
  for (std::size_t i = 0; i < s.embeddings.negative_pool_size; ++i) {
    Embedding e(s.embeddings.dim);
    for (int k = 0; k < s.embeddings.dim; ++k) {
      e(k) = rng.normal(0.0, s.embeddings.population_sigma);
    }
    pool.push_back(std::move(e));
  }
  return pool;
}
}  // namespace

std::size_t Scenario::leader_index() const
{
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].role == AgentRole::Leader) {
      return i;
    }
  }
  throw std::logic_error("scenario has no leader");
}

std::size_t Scenario::step_count() const
{
  return static_cast<std::size_t>(std::llround(duration / dt));
}

Scenario scenario_from_json(const json & j, const std::filesystem::path & base_dir)
{
  Scenario s;
  ObjectReader r(j, "");
  r.string("name", s.name);
  r.positive("duration", s.duration);
  if (r.has("dt")) {
    r.number("dt", s.dt);
    if (!(s.dt > 0.0)) {
      throw ScenarioError("dt", "must be positive");
    }
  }
  r.unsigned64("seed", s.seed);
  if (auto o = r.object("robot_start")) {
    s.robot_start = read_pose(*o);
  }

  if (!r.has("agents")) {
    throw ScenarioError("agents", "required");
  }
  const json & agents = r.raw("agents");
  if (!agents.is_array()) {
    throw ScenarioError("agents", "expected an array");
  }
  std::set<int> ids;
  int leaders = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentSpec a = read_agent(ObjectReader(agents[i], "agents." + std::to_string(i)));
    if (!ids.insert(a.id).second) {
      throw ScenarioError("agents." + std::to_string(i) + ".id", "duplicate agent id");
    }
    leaders += a.role == AgentRole::Leader ? 1 : 0;
    s.agents.push_back(std::move(a));
  }
  if (leaders != 1) {
    throw ScenarioError("agents", "exactly one agent must have role \"leader\", found " + std::to_string(leaders));
  }

  if (r.has("obstacles")) {
    const json & obs = r.raw("obstacles");
    if (!obs.is_array()) {
      throw ScenarioError("obstacles", "expected an array");
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
      ObjectReader o(obs[i], "obstacles." + std::to_string(i));
      if (!o.has("a") || !o.has("b")) {
        throw ScenarioError(o.key("a"), "segments need a and b");
      }
      Segment seg{read_point(o.raw("a"), o.key("a")), read_point(o.raw("b"), o.key("b"))};
      o.finish();
      s.obstacles.push_back(seg);
    }
  }

  if (auto o = r.object("lidar")) {
    o->angle_deg("angular_resolution_deg", s.lidar.angular_resolution);
    o->positive("r_max", s.lidar.r_max);
    o->number("sigma_r", s.lidar.sigma_r);
    o->finish();
  }
  if (auto o = r.object("camera")) {
    auto & c = s.camera;
    o->angle_deg("hfov_deg", c.hfov);
    o->integer("image_width", c.image_width, 1);
    o->integer("image_height", c.image_height, 1);
    o->positive("min_depth", c.min_depth);
    o->positive("max_depth", c.max_depth);
    o->number("mount_height", c.mount_height);
    o->positive("person_height", c.person_height);
    if (auto m = o->object("mount")) {
      c.mount = FrameTransform::from_pose(read_pose(*m));
    }
    o->number("p_miss", c.p_miss);
    o->number("sigma_px", c.sigma_px);
    o->number("sigma_z", c.sigma_z);
    o->number("sigma_e", c.sigma_e);
    o->finish();
    if (c.p_miss < 0.0 || c.p_miss > 1.0) {
      throw ScenarioError("camera.p_miss", "must lie in [0, 1]");
    }
    if (!(c.min_depth < c.max_depth)) {
      throw ScenarioError("camera.max_depth", "must exceed camera.min_depth");
    }
  }
  if (auto o = r.object("embeddings")) {
    o->integer("dim", s.embeddings.dim, 1);
    o->positive("population_sigma", s.embeddings.population_sigma);
    o->string("negative_pool", s.embeddings.negative_pool_file);
    o->integer("negative_pool_size", s.embeddings.negative_pool_size, 1);
    o->finish();
  }
  if (auto o = r.object("recognition")) {
    auto & p = s.recognition;
    o->integer("k", p.k, 1);
    if (p.k % 2 == 0) {
      throw ScenarioError("recognition.k", "must be odd");
    }
    o->positive("drift_s", p.drift_s);
    o->positive("drift_time_scale", p.drift_time_scale);
    o->integer("negative_cap", p.negative_cap, 1);
    o->integer("frames_per_cycle", p.frames_per_cycle, 1);
    o->positive("init_window", p.init_window);
    o->number("init_min_fraction", p.init_min_fraction);
    o->number("tracker_drift_px", p.tracker_drift_px);
    o->finish();
  }
  if (auto o = r.object("clustering")) {
    o->positive("d_max", s.clustering.d_max);
    o->integer("n_min", s.clustering.n_min, 1);
    o->finish();
  }
  if (auto o = r.object("fusion")) {
    o->positive("gate", s.fusion.gate);
    o->integer("n_ttl", s.fusion.n_ttl, 1);
    o->integer("n_boot", s.fusion.n_boot, 1);
    o->finish();
  }
  if (auto o = r.object("perception")) {
    o->number("target_radius", s.perception.target_radius);
    o->positive("measurement_sigma", s.perception.measurement_sigma);
    o->finish();
  }
  if (auto o = r.object("tracker")) {
    auto & m = s.tracker.mm;
    double stay_cv = m.transition(0, 0);
    double stay_uni = m.transition(1, 1);
    o->number("p_stay_cv", stay_cv);
    o->number("p_stay_uni", stay_uni);
    if (stay_cv < 0.0 || stay_cv > 1.0 || stay_uni < 0.0 || stay_uni > 1.0) {
      throw ScenarioError("tracker.p_stay_cv", "transition probabilities must lie in [0, 1]");
    }
    m.transition << stay_cv, 1.0 - stay_cv, 1.0 - stay_uni, stay_uni;
    o->positive("cv_accel_sigma", m.cv_accel_sigma);
    o->positive("uni_accel_sigma", m.uni_accel_sigma);
    o->positive("uni_angular_sigma", m.uni_angular_sigma);
    o->positive("init_speed_sigma", m.init_speed_sigma);
    o->positive("init_omega_sigma", m.init_omega_sigma);
    o->positive("min_heading_speed", m.min_heading_speed);
    o->positive("fault_limit", s.tracker.fault_limit);
    o->finish();
  }
  if (auto o = r.object("path")) {
    o->positive("epsilon_d", s.path.epsilon_d);
    o->positive("loess_span", s.path.loess_span);
    if (s.path.loess_span > 1.0) {
      throw ScenarioError("path.loess_span", "must lie in (0, 1]");
    }
    o->positive("spacing", s.path.spacing);
    o->integer("window", s.path.window, 3);
    o->finish();
  }
  if (auto o = r.object("control")) {
    auto & c = s.control;
    o->number("k_lat", c.k_lat);
    o->number("k_head", c.k_head);
    o->number("v_nominal", c.v_nominal);
    o->number("a_max", c.a_max);
    o->number("follow_distance", c.follow_distance);
    o->number("v_curv_coeff", c.v_curv_coeff);
    o->number("curvature_scale", c.curvature_scale);
    o->number("d_slow", c.d_slow);
    o->number("d_stop", c.d_stop);
    o->number("t_alert", c.t_alert);
    o->number("stop_release", c.stop_release);
    o->number("corridor_half_width", c.corridor_half_width);
    o->number("projection_step", c.projection_step);
    o->finish();
    try {
      c.validate();
    } catch (const std::invalid_argument & e) {
      const std::string msg = e.what();
      throw ScenarioError(msg.substr(0, msg.find(' ')), msg.substr(msg.find(' ') + 1));
    }
  }
  r.finish();

  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto & m = s.agents[i].embedding_mean;
    if (m && static_cast<int>(m->size()) != s.embeddings.dim) {
      throw ScenarioError("agents." + std::to_string(i) + ".embedding_mean", "length differs from embeddings.dim");
    }
  }
  if (!s.embeddings.negative_pool_file.empty()) {
    std::filesystem::path p(s.embeddings.negative_pool_file);
    if (p.is_relative() && !base_dir.empty()) {
      p = base_dir / p;
    }
    s.embeddings.negative_pool_file = p.lexically_normal().string();
    s.negative_pool = read_negative_pool(p);
    for (const auto & e : s.negative_pool) {
      if (e.size() != s.embeddings.dim) {
        throw ScenarioError("embeddings.negative_pool", "embedding length differs from embeddings.dim");
      }
    }
  } else {
    s.negative_pool = generate_pool(s);
  }
  return s;
}

json scenario_to_json(const Scenario & s)
{
  json j;
  j["name"] = s.name;
  j["duration"] = s.duration;
  j["dt"] = s.dt;
  j["seed"] = s.seed;
  j["robot_start"] = {{"x", s.robot_start.x}, {"y", s.robot_start.y}, {"theta", s.robot_start.theta}};
  j["agents"] = json::array();
  for (const auto & a : s.agents) {
    json ja;
    ja["id"] = a.id;
    ja["role"] = a.role == AgentRole::Leader ? "leader" : "pedestrian";
    ja["body_radius"] = a.body_radius;
    if (a.appearance_seed) {
      ja["appearance_seed"] = *a.appearance_seed;
    }
    if (a.embedding_mean) {
      ja["embedding_mean"] = *a.embedding_mean;
    }
    ja["waypoints"] = json::array();
    for (const auto & w : a.waypoints) {
      ja["waypoints"].push_back({{"t", w.t}, {"x", w.pose.x}, {"y", w.pose.y}, {"theta", w.pose.theta}});
    }
    j["agents"].push_back(ja);
  }
  j["obstacles"] = json::array();
  for (const auto & o : s.obstacles) {
    j["obstacles"].push_back({{"a", {o.a.x(), o.a.y()}}, {"b", {o.b.x(), o.b.y()}}});
  }
  j["lidar"] = {
    {"angular_resolution_deg", s.lidar.angular_resolution / kDeg},
    {"r_max", s.lidar.r_max},
    {"sigma_r", s.lidar.sigma_r}};
  const auto & c = s.camera;
  const Pose2D mount = c.mount.to_pose();
  j["camera"] = {
    {"hfov_deg", c.hfov / kDeg},
    {"image_width", c.image_width},
    {"image_height", c.image_height},
    {"min_depth", c.min_depth},
    {"max_depth", c.max_depth},
    {"mount_height", c.mount_height},
    {"person_height", c.person_height},
    {"mount", {{"x", mount.x}, {"y", mount.y}, {"theta", mount.theta}}},
    {"p_miss", c.p_miss},
    {"sigma_px", c.sigma_px},
    {"sigma_z", c.sigma_z},
    {"sigma_e", c.sigma_e}};
  j["embeddings"] = {
    {"dim", s.embeddings.dim},
    {"population_sigma", s.embeddings.population_sigma},
    {"negative_pool_size", s.embeddings.negative_pool_size}};
  if (!s.embeddings.negative_pool_file.empty()) {
    j["embeddings"]["negative_pool"] = s.embeddings.negative_pool_file;
  }
  const auto & rp = s.recognition;
  j["recognition"] = {
    {"k", rp.k},
    {"drift_s", rp.drift_s},
    {"drift_time_scale", rp.drift_time_scale},
    {"negative_cap", rp.negative_cap},
    {"frames_per_cycle", rp.frames_per_cycle},
    {"init_window", rp.init_window},
    {"init_min_fraction", rp.init_min_fraction},
    {"tracker_drift_px", rp.tracker_drift_px}};
  j["clustering"] = {{"d_max", s.clustering.d_max}, {"n_min", s.clustering.n_min}};
  j["fusion"] = {{"gate", s.fusion.gate}, {"n_ttl", s.fusion.n_ttl}, {"n_boot", s.fusion.n_boot}};
  j["perception"] = {
    {"target_radius", s.perception.target_radius}, {"measurement_sigma", s.perception.measurement_sigma}};
  const auto & m = s.tracker.mm;
  j["tracker"] = {
    {"p_stay_cv", m.transition(0, 0)},
    {"p_stay_uni", m.transition(1, 1)},
    {"cv_accel_sigma", m.cv_accel_sigma},
    {"uni_accel_sigma", m.uni_accel_sigma},
    {"uni_angular_sigma", m.uni_angular_sigma},
    {"init_speed_sigma", m.init_speed_sigma},
    {"init_omega_sigma", m.init_omega_sigma},
    {"min_heading_speed", m.min_heading_speed},
    {"fault_limit", s.tracker.fault_limit}};
  j["path"] = {
    {"epsilon_d", s.path.epsilon_d},
    {"loess_span", s.path.loess_span},
    {"spacing", s.path.spacing},
    {"window", s.path.window}};
  const auto & k = s.control;
  j["control"] = {
    {"k_lat", k.k_lat},
    {"k_head", k.k_head},
    {"v_nominal", k.v_nominal},
    {"a_max", k.a_max},
    {"follow_distance", k.follow_distance},
    {"v_curv_coeff", k.v_curv_coeff},
    {"curvature_scale", k.curvature_scale},
    {"d_slow", k.d_slow},
    {"d_stop", k.d_stop},
    {"t_alert", k.t_alert},
    {"stop_release", k.stop_release},
    {"corridor_half_width", k.corridor_half_width},
    {"projection_step", k.projection_step}};
  return j;
}

void apply_override(json & doc, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ScenarioError(assignment, "override must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) {
    value = text;
  }

  json * node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) {
      throw ScenarioError(key, "empty key segment");
    }
    parts.push_back(part);
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[i]);
      } catch (const std::exception &) {
        throw ScenarioError(key, "array index expected at '" + parts[i] + "'");
      }
      if (idx >= node->size()) {
        throw ScenarioError(key, "array index out of range");
      }
      node = &(*node)[idx];
    } else {
      if (node->is_null()) {
        *node = json::object();
      }
      if (!node->is_object()) {
        throw ScenarioError(key, "cannot descend into a scalar");
      }
      node = &(*node)[parts[i]];
    }
    if (last) {
      *node = value;
    }
  }
}

Scenario load_scenario(const std::filesystem::path & path, const std::vector<std::string> & overrides)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scenario file " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw ScenarioError("<root>", "file " + path.string() + " is not valid JSON");
  }
  for (const auto & o : overrides) {
    apply_override(doc, o);
  }
  return scenario_from_json(doc, path.parent_path());
}

void save_scenario(const Scenario & s, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write scenario file " + path.string());
  }
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("failed writing scenario file " + path.string());
  }
}

std::vector<Embedding> read_negative_pool(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError("embeddings.negative_pool", "cannot open " + path.string());
  }
  std::vector<Embedding> pool;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_array() || j.empty()) {
      throw ScenarioError(
        "embeddings.negative_pool", path.string() + ":" + std::to_string(line_no) + ": expected a JSON array");
    }
    Embedding e(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (!j[k].is_number()) {
        throw ScenarioError(
          "embeddings.negative_pool", path.string() + ":" + std::to_string(line_no) + ": non-numeric entry");
      }
      e(static_cast<Eigen::Index>(k)) = j[k].get<double>();
    }
    pool.push_back(std::move(e));
  }
  return pool;
}

std::vector<Agent> build_agents(const Scenario & s)
{
  std::vector<Agent> out;
  for (const auto & spec : s.agents) {
    Agent a;
    a.id = spec.id;
    a.role = spec.role;
    a.body_radius = spec.body_radius;
    a.trajectory = spec.waypoints;
    a.embedding_mean = Embedding(s.embeddings.dim);
    if (spec.embedding_mean) {
      for (int k = 0; k < s.embeddings.dim; ++k) {
        a.embedding_mean(k) = (*spec.embedding_mean)[static_cast<std::size_t>(k)];
      }
    } else {
      const std::uint64_t seed = spec.appearance_seed.value_or(static_cast<std::uint64_t>(static_cast<std::int64_t>(spec.id)));
      Rng rng(stream_seed(seed, "appearance"));
      for (int k = 0; k < s.embeddings.dim; ++k) {
        a.embedding_mean(k) = rng.normal(0.0, s.embeddings.population_sigma);
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace hpf
