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

#include "hpf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace hpf
{
namespace
{
bool is_tracking(FusionMode m)
{
  return m == FusionMode::TrackedBoth || m == FusionMode::TrackedLidarOnly || m == FusionMode::TrackedCameraOnly;
}

const Detection * largest_detection(const std::vector<Detection> & dets)
{
  const Detection * best = nullptr;
  for (const auto & d : dets) {
    if (best == nullptr || d.bbox.area() > best->bbox.area()) {
      best = &d;
    }
  }
  return best;
}

Vec2 push_along_bearing(const Vec2 & p, double amount)
{
  const double r = p.norm();
  return r > 0.0 ? Vec2(p * ((r + amount) / r)) : p;
}

int majority_hit(const Scan & scan, const Cluster & c)
{
  std::map<int, int> votes;
  for (std::size_t m : c.members) {
    ++votes[scan.points[m].hit_id];
  }
  int best = -1;
  int best_votes = -1;
  for (const auto & [id, n] : votes) {
    if (n > best_votes) {
      best = id;
      best_votes = n;
    }
  }
  return best;
}

EstimateSummary summarize(const MmEstimate & e)
{
  EstimateSummary s;
  s.position = e.fused_position;
  s.velocity = e.fused_velocity;
  s.cov_pos = e.fused_cov_pos;
  s.mu_cv = e.mu(0);
  s.mu_uni = e.mu(1);
  return s;
}
}  // namespace

RunLog run(const Scenario & sc)
{
  RunLog log;
  log.scenario = sc.name;
  log.seed = sc.seed;
  log.dt = sc.dt;
  log.leader_index = sc.leader_index();
  for (const auto & a : sc.agents) {
    log.agent_ids.push_back(a.id);
  }

  const double dt = sc.dt;
  const std::size_t steps = sc.step_count();
  const double half_height = 0.5 * sc.camera.person_height;
  const double lidar_push = 0.25 * std::numbers::pi * sc.perception.target_radius;
  const Mat2 R = Mat2::Identity() * sc.perception.measurement_sigma * sc.perception.measurement_sigma;

  WorldState world = WorldState::create(build_agents(sc), sc.obstacles, 0.0);
  Pose2D robot = sc.robot_start;
  Pose2D prev_robot = robot;

  RecognitionState rec;
  rec.init_deadline = sc.recognition.init_window;
  std::vector<std::vector<Detection>> init_frames;
  std::optional<KnnModel> model;
  ImageTrackerSim image_tracker;
  Rng tracker_rng(stream_seed(sc.seed, "image_tracker"));

  FusionState fusion;
  std::optional<MmEstimate> est;
  PathBuilder builder(sc.path);
  SafetyState safety;
  double v_prev = 0.0;

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    world.time = t;
    for (std::size_t a = 0; a < world.agents.size(); ++a) {
      world.agent_poses[a] = pose_at(world.agents[a], t);
    }

    StepRecord rec_step;
    rec_step.t = t;
    rec_step.robot = robot;
    rec_step.agents = world.agent_poses;

    const Scan scan = simulate_lidar(world, robot, sc.lidar, stream_seed(sc.seed, "lidar", k));
    const std::vector<Detection> dets = simulate_camera(world, robot, sc.camera, stream_seed(sc.seed, "camera", k));
    std::vector<Cluster> clusters = cluster_scan(scan, sc.clustering.d_max, sc.clustering.n_min);
    for (auto & c : clusters) {
      c.centroid = push_along_bearing(c.centroid, lidar_push);
    }
    const Pose2D motion = relative_pose(prev_robot, robot);

    std::optional<Vec2> predicted_w;
    if (est) {
      predicted_w = est->fused_position + dt * est->fused_velocity;
    }

    // Recognition.
    std::optional<Detection> leader_det;
    if (rec.phase == RecognitionPhase::Initialising) {
      rec_step.init_phase = true;
      init_frames.push_back(dets);
      if (const Detection * d = largest_detection(dets)) {
        leader_det = *d;
      }
      if (t + dt >= rec.init_deadline - 1e-9) {
        ++log.summary.init_attempts;
        try {
          model = run_initialisation(
            init_frames, sc.negative_pool, sc.recognition,
            stream_seed(sc.seed, "initialisation", static_cast<std::uint64_t>(log.summary.init_attempts)));
          rec.phase = RecognitionPhase::Following;
          for (std::size_t f = init_frames.size(); f-- > 0;) {
            if (const Detection * d = largest_detection(init_frames[f])) {
              rec.last_bbox = d->bbox;
              rec.last_detection_time = d->timestamp;
              break;
            }
          }
        } catch (const InitialisationError &) {
          rec.init_deadline = t + dt + sc.recognition.init_window;
        }
        init_frames.clear();
      }
    } else {
      rec_step.init_phase = false;
      std::optional<Vec2> feedback;
      if (predicted_w && is_tracking(fusion.mode)) {
        feedback = project_to_image(world_to_local(*predicted_w, robot), half_height, sc.camera);
      }
      if (!image_tracker.active() || image_tracker.frames_since_start() >= sc.recognition.frames_per_cycle - 1) {
        const FollowingResult res = following_step(dets, rec, *model, t, sc.recognition, feedback);
        if (res.leader) {
          image_tracker.start(*res.leader);
          leader_det = res.leader;
        } else {
          image_tracker.stop();
        }
      } else {
        leader_det = image_tracker.step(dets, sc.camera, sc.recognition, tracker_rng);
      }
    }

    std::optional<Vec2> camera_local;
    if (leader_det) {
      camera_local =
        push_along_bearing(camera_to_lidar(leader_det->centroid_c, sc.camera.mount), sc.perception.target_radius);
    }

    // Fusion, with the tracker prediction as the prior while tracking.
    FusionState prior = fusion;
    if (predicted_w && is_tracking(fusion.mode)) {
      prior.leader_local = world_to_local(*predicted_w, prev_robot);
    }
    const FusionOutput fused = fuse_step(clusters, camera_local, prior, motion, sc.fusion);
    fusion = fused.state;
    rec_step.mode = fusion.mode;
    rec_step.camera_used = fused.camera_used;

    std::optional<Measurement> z;
    if (fused.measurement) {
      Measurement m;
      m.z = local_to_world(*fused.measurement, robot);
      m.R = R;
      m.timestamp = t;
      z = m;
      rec_step.measurement = m.z;
      if (fused.camera_used && leader_det) {
        rec_step.target_truth = leader_det->agent_truth;
      } else if (fused.cluster_index) {
        rec_step.target_truth = majority_hit(scan, clusters[*fused.cluster_index]);
      }
    }

    // Global tracking.
    bool fault = false;
    try {
      if (est) {
        est = gpb1_step(*est, z, dt, sc.tracker.mm);
      } else if (z) {
        est = mm_initialize(*z, sc.tracker.mm);
      }
    } catch (const NumericalFault & e) {
      fault = true;
      log.fault_reason = e.what();
    }
    if (!fault && est && check_fault(*est, sc.tracker.fault_limit) == FaultStatus::Fault) {
      fault = true;
      log.fault_reason = "leader position uncertainty exceeded the fault limit";
    }
    if (est) {
      rec_step.estimate = summarize(*est);
    }

    if (fault) {
      log.status = RunStatus::Fault;
      rec_step.v = 0.0;
      rec_step.omega = 0.0;
      rec_step.spline_version = builder.version();
      log.steps.push_back(std::move(rec_step));
      break;
    }

    // Path reconstruction.
    if (z && est && is_tracking(fusion.mode)) {
      builder.add({est->fused_position, t});
    }
    const auto snapshot = builder.snapshot();
    rec_step.spline_version = builder.version();

    // Control.
    double v = 0.0;
    double omega = 0.0;
    if (rec.phase == RecognitionPhase::Following && !rec_step.init_phase) {
      double gap = 0.0;
      double kappa = 0.0;
      double scale = 1.0;
      double chi = 0.0;
      if (snapshot && snapshot->spline.length() > 0.0) {
        const ClothoidSpline & spline = snapshot->spline;
        const PathProjection proj = project_to_path(robot, spline, sc.control.projection_step);
        rec_step.lateral_error = proj.lateral_error;
        rec_step.heading_error = proj.heading_error;

        gap = spline.length() - proj.s;
        kappa = proj.kappa;
        std::optional<Vec2> leader_local;
        if (est) {
          gap += (est->fused_position - spline.eval(spline.length()).pose.position()).norm();
          leader_local = world_to_local(est->fused_position, robot);
        }

        std::vector<Vec2> obstacle_points;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
          if (fused.cluster_index && *fused.cluster_index == c) {
            continue;
          }
          if (leader_local && (clusters[c].centroid - *leader_local).norm() <= sc.fusion.gate) {
            continue;
          }
          for (std::size_t m : clusters[c].members) {
            obstacle_points.push_back(local_to_world(scan_point_xy(scan.points[m]), robot));
          }
        }
        const auto obstacle = obstacle_distance_on_path(spline, proj.s, obstacle_points, sc.control);
        const SafetyOutput so = safety_step(safety, obstacle, gap, dt, t, sc.control);
        rec_step.events = so.events;

        scale = so.scale;
        chi = steer(proj.lateral_error, proj.heading_error, proj.kappa, sc.control);
      }
      v = velocity_policy(gap, kappa, v_prev, dt, sc.control, scale);
      omega = std::isfinite(chi) ? v * chi : 0.0;
    }
    rec_step.v = v;
    rec_step.omega = omega;
    log.steps.push_back(std::move(rec_step));

    prev_robot = robot;
    robot = step_unicycle(robot, {v, omega}, dt);
    v_prev = v;
  }

  if (auto snap = builder.snapshot()) {
    log.spline = snap->spline;
  }
  if (model) {
    log.summary.positives = model->positive_count();
    log.summary.negatives = model->negative_count();
  }
  log.summary.admitted_points = builder.dataset().points.size();
  log.summary.spline_fit_failures = builder.fit_failures();
  log.summary.backtracks = builder.backtracks();
  return log;
}

}  // namespace hpf
