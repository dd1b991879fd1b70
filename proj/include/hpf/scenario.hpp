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

#pragma once

#include "hpf/control.hpp"
#include "hpf/lidar_fusion.hpp"
#include "hpf/path.hpp"
#include "hpf/recognition.hpp"
#include "hpf/sim_world.hpp"
#include "hpf/tracker.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpf
{
/// Schema violation; key() is the dotted path of the offending entry.
class ScenarioError : public std::runtime_error
{
public:
  ScenarioError(const std::string & key, const std::string & message)
  : std::runtime_error("scenario key '" + key + "': " + message), key_(key)
  {
  }
  const std::string & key() const { return key_; }

private:
  std::string key_;
};

struct AgentSpec
{
  int id{0};
  AgentRole role{AgentRole::Pedestrian};
  double body_radius{0.25};
  std::vector<TimedPose> waypoints;
  std::vector<bool> waypoint_has_theta;  // parallel to waypoints; false means heading follows motion
  std::optional<std::uint64_t> appearance_seed;
  std::optional<std::vector<double>> embedding_mean;
};

struct EmbeddingParams
{
  int dim{64};
  double population_sigma{0.125};  // per dimension spread of identity means
  std::string negative_pool_file;  // JSONL; empty means generated from the population
  std::size_t negative_pool_size{500};
};

struct ClusteringParams
{
  double d_max{0.3};
  std::size_t n_min{4};
};

struct PerceptionParams
{
  // Sensors see the near side of a person. The camera point is pushed back
  // by this radius and the LIDAR centroid by pi/4 of it (mean depth of a
  // uniformly sampled half circle) so that both estimate the body centre.
  double target_radius{0.25};
  double measurement_sigma{0.05};
};

struct TrackerConfig
{
  MmParams mm;
  double fault_limit{1.0};  // m, position standard deviation that halts the run
};

struct Scenario
{
  std::string name{"unnamed"};
  double duration{30.0};
  double dt{0.05};
  std::uint64_t seed{1};
  Pose2D robot_start;
  std::vector<AgentSpec> agents;
  std::vector<Segment> obstacles;
  LidarConfig lidar;
  CameraConfig camera;
  EmbeddingParams embeddings;
  RecognitionParams recognition;
  ClusteringParams clustering;
  FusionParams fusion;
  PerceptionParams perception;
  TrackerConfig tracker;
  PathParams path;
  ControllerConfig control;

  // Resolved at load time.
  std::vector<Embedding> negative_pool;

  std::size_t leader_index() const;
  std::size_t step_count() const;
};

/// Validates and fills defaults. Relative pool paths resolve against base_dir.
Scenario scenario_from_json(const nlohmann::json & j, const std::filesystem::path & base_dir = {});
nlohmann::json scenario_to_json(const Scenario & s);

/// Applies "dotted.key=value" to a raw scenario document. The value is parsed
/// as JSON when possible and taken as a string otherwise. Array elements are
/// addressed by index ("agents.0.body_radius").
void apply_override(nlohmann::json & doc, const std::string & assignment);

Scenario load_scenario(const std::filesystem::path & path, const std::vector<std::string> & overrides = {});
void save_scenario(const Scenario & s, const std::filesystem::path & path);

std::vector<Embedding> read_negative_pool(const std::filesystem::path & path);

/// Simulator agents with resolved appearance means.
std::vector<Agent> build_agents(const Scenario & s);

}  // namespace hpf
