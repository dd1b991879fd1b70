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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace hpf
{
namespace
{
using nlohmann::json;

json minimal()
{
  return json::parse(R"({
    "agents": [
      {"id": 1, "role": "leader", "appearance_seed": 7,
       "waypoints": [{"t": 0, "x": 2, "y": 0}, {"t": 10, "x": 8, "y": 0}]}
    ]
  })");
}

std::string error_key(const json & j)
{
  try {
    scenario_from_json(j);
  } catch (const ScenarioError & e) {
    return e.key();
  }
  return "";
}

std::filesystem::path temp_dir(const std::string & name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("hpf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Scenario, MinimalFileTakesDefaults)
{
  const Scenario s = scenario_from_json(minimal());
  const Scenario d;
  EXPECT_EQ(s.dt, d.dt);
  EXPECT_EQ(s.duration, d.duration);
  EXPECT_EQ(s.step_count(), 600u);
  ASSERT_EQ(s.agents.size(), 1u);
  EXPECT_EQ(s.leader_index(), 0u);
  EXPECT_EQ(s.agents[0].body_radius, 0.25);
  EXPECT_EQ(s.control.v_nominal, d.control.v_nominal);
  EXPECT_EQ(s.recognition.k, d.recognition.k);
  EXPECT_EQ(s.negative_pool.size(), s.embeddings.negative_pool_size);
  for (const auto & e : s.negative_pool) {
    EXPECT_EQ(e.size(), s.embeddings.dim);
  }
}

TEST(Scenario, GeneratedPoolDependsOnSeedOnly)
{
  json a = minimal();
  json b = minimal();
  a["seed"] = 5;
  b["seed"] = 5;
  b["name"] = "other";
  const Scenario sa = scenario_from_json(a);
  const Scenario sb = scenario_from_json(b);
  ASSERT_EQ(sa.negative_pool.size(), sb.negative_pool.size());
  for (std::size_t i = 0; i < sa.negative_pool.size(); ++i) {
    EXPECT_EQ(sa.negative_pool[i], sb.negative_pool[i]);
  }
  b["seed"] = 6;
  EXPECT_NE(scenario_from_json(b).negative_pool[0], sa.negative_pool[0]);
}

TEST(Scenario, RejectsBadValues)
{
  json j = minimal();
  j["dt"] = 0.0;
  EXPECT_EQ(error_key(j), "dt");
  j["dt"] = -0.1;
  EXPECT_EQ(error_key(j), "dt");

  j = minimal();
  j["camera"] = {{"p_miss", 1.5}};
  EXPECT_EQ(error_key(j), "camera.p_miss");

  j = minimal();
  j["recognition"] = {{"k", 4}};
  EXPECT_EQ(error_key(j), "recognition.k");

  j = minimal();
  j["control"] = {{"d_stop", 2.0}};
  EXPECT_NE(error_key(j), "");
}

TEST(Scenario, UnknownKeyIsNamedWithItsPath)
{
  json j = minimal();
  j["agents"][0]["colour"] = "red";
  EXPECT_EQ(error_key(j), "agents.0.colour");
  j = minimal();
  j["tracker"] = {{"p_stay", 0.9}};
  EXPECT_EQ(error_key(j), "tracker.p_stay");
}

TEST(Scenario, AgentConsistency)
{
  json j = minimal();
  j["agents"].push_back(j["agents"][0]);
  j["agents"][1]["id"] = 2;
  EXPECT_EQ(error_key(j), "agents");

  j = minimal();
  j["agents"].push_back(j["agents"][0]);
  j["agents"][1]["role"] = "pedestrian";
  EXPECT_EQ(error_key(j), "agents.1.id");

  j = minimal();
  j["agents"][0]["waypoints"][1]["t"] = 0;
  EXPECT_NE(error_key(j), "");

  j = minimal();
  j["agents"][0]["role"] = "pedestrian";
  EXPECT_EQ(error_key(j), "agents");
}

TEST(Scenario, Overrides)
{
  json j = minimal();
  apply_override(j, "control.v_nominal=0.5");
  apply_override(j, "agents.0.body_radius=0.3");
  apply_override(j, "name=renamed");
  const Scenario s = scenario_from_json(j);
  EXPECT_EQ(s.control.v_nominal, 0.5);
  EXPECT_EQ(s.agents[0].body_radius, 0.3);
  EXPECT_EQ(s.name, "renamed");

  EXPECT_THROW(apply_override(j, "novalue"), ScenarioError);
  EXPECT_THROW(apply_override(j, "agents.5.id=3"), ScenarioError);
  EXPECT_THROW(apply_override(j, "agents.x.id=3"), ScenarioError);
  EXPECT_THROW(apply_override(j, "name.deeper=1"), ScenarioError);

  json k = minimal();
  apply_override(k, "control.bogus=1");
  EXPECT_EQ(error_key(k), "control.bogus");
}

TEST(Scenario, SaveLoadRoundTrip)
{
  json j = minimal();
  j["agents"].push_back(json::parse(R"({"id": 4, "role": "pedestrian", "embedding_mean": [0.5, 0.25],
    "waypoints": [{"t": 0, "x": 5, "y": 1, "theta": 1.0}, {"t": 4, "x": 5, "y": 1}]})"));
  j["embeddings"] = {{"dim", 2}, {"negative_pool_size", 20}};
  j["agents"][0].erase("appearance_seed");
  j["agents"][0]["embedding_mean"] = {1.0, -1.0};
  j["obstacles"] = json::parse(R"([{"a": [0, 1], "b": [4, 1]}])");
  j["seed"] = 99;
  const Scenario s = scenario_from_json(j);

  const auto dir = temp_dir("scenario_roundtrip");
  save_scenario(s, dir / "s.json");
  const Scenario t = load_scenario(dir / "s.json");
  EXPECT_EQ(scenario_to_json(s), scenario_to_json(t));
  ASSERT_EQ(t.agents.size(), 2u);
  EXPECT_EQ(t.agents[1].waypoints.size(), 2u);
  EXPECT_EQ(t.obstacles.size(), 1u);
  ASSERT_EQ(t.negative_pool.size(), s.negative_pool.size());
  for (std::size_t i = 0; i < s.negative_pool.size(); ++i) {
    EXPECT_EQ(t.negative_pool[i], s.negative_pool[i]);
  }
}

TEST(Scenario, LoadAppliesOverridesAndRejectsBadJson)
{
  const auto dir = temp_dir("scenario_load");
  {
    std::ofstream out(dir / "a.json");
    out << minimal().dump();
  }
  const Scenario s = load_scenario(dir / "a.json", {"seed=42", "control.a_max=0.25"});
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.control.a_max, 0.25);
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  EXPECT_THROW(load_scenario(dir / "bad.json"), ScenarioError);
  EXPECT_THROW(load_scenario(dir / "missing.json"), std::runtime_error);
}

TEST(Scenario, NegativePoolFileRelativeToScenario)
{
  const auto dir = temp_dir("scenario_pool");
  {
    std::ofstream out(dir / "pool.jsonl");
    out << "[0.1, 0.2]\n\n[0.3, 0.4]\n";
  }
  json j = minimal();
  j["embeddings"] = {{"dim", 2}, {"negative_pool", "pool.jsonl"}};
  {
    std::ofstream out(dir / "p.json");
    out << j.dump();
  }
  const Scenario s = load_scenario(dir / "p.json");
  ASSERT_EQ(s.negative_pool.size(), 2u);
  EXPECT_EQ(s.negative_pool[1](0), 0.3);
  EXPECT_EQ(s.negative_pool[1](1), 0.4);

  {
    std::ofstream out(dir / "pool.jsonl");
    out << "[0.1, 0.2, 0.3]\n";
  }
  EXPECT_THROW(load_scenario(dir / "p.json"), ScenarioError);
  {
    std::ofstream out(dir / "pool.jsonl");
    out << "[0.1, \"x\"]\n";
  }
  EXPECT_THROW(load_scenario(dir / "p.json"), ScenarioError);
}

TEST(Scenario, BuildAgents)
{
  json j = minimal();
  j["agents"].push_back(json::parse(R"({"id": 4, "role": "pedestrian", "appearance_seed": 8,
    "waypoints": [{"t": 0, "x": 5, "y": 1}]})"));
  const Scenario s = scenario_from_json(j);
  const auto agents = build_agents(s);
  ASSERT_EQ(agents.size(), 2u);
  EXPECT_EQ(agents[0].id, 1);
  EXPECT_EQ(agents[0].role, AgentRole::Leader);
  EXPECT_EQ(agents[1].embedding_mean.size(), s.embeddings.dim);
  EXPECT_NE(agents[0].embedding_mean, agents[1].embedding_mean);
  const auto again = build_agents(s);
  EXPECT_EQ(again[0].embedding_mean, agents[0].embedding_mean);
}

}  // namespace
}  // namespace hpf
