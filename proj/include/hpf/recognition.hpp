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

#include "hpf/sim_world.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hpf
{
class Rng;

struct RecognitionParams
{
  int k{5};
  double drift_s{0.05};
  // Multiplier turning elapsed seconds into the time unit of the drift radius.
  // The radius formula yields pixels with t in milliseconds.
  double drift_time_scale{1000.0};
  std::size_t negative_cap{500};
  int frames_per_cycle{10};  // m
  double init_window{5.0};   // Delta_t, s
  double init_min_fraction{0.8};
  double tracker_drift_px{1.0};  // per-frame random walk of the simulated image tracker
};

/// Drift-tolerance radius d = t s (w / 100)^2.
inline double drift_radius(double t, double w, double s)
{
  const double r = w / 100.0;
  return t * s * (r * r);
}

enum class Label { Leader, NotLeader };

struct Classification
{
  Label label{Label::NotLeader};
  double margin{0.0};  // (leader votes - k/2) / k
  int leader_votes{0};
};

class UninitialisedRecogniser : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// KNN over appearance embeddings. Distance ties resolve to the older sample.
class KnnModel
{
public:
  explicit KnnModel(int k = 5, std::size_t negative_cap = 500);

  void add_positive(const Embedding & e);
  void add_negative(const Embedding & e);

  Classification classify(const Embedding & e) const;

  std::size_t positive_count() const { return positives_.size(); }
  std::size_t negative_count() const { return negatives_.size(); }
  int k() const { return k_; }

  struct Sample
  {
    Embedding e;
    std::uint64_t seq{0};
  };
  const std::deque<Sample> & positives() const { return positives_; }
  const std::deque<Sample> & negatives() const { return negatives_; }

private:
  int k_;
  std::size_t negative_cap_;
  std::uint64_t next_seq_{0};
  std::deque<Sample> positives_;
  std::deque<Sample> negatives_;
};

class InitialisationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Builds the initial model from the detections of the initialisation window
/// (one inner vector per frame). The largest box of each frame is a positive;
/// one negative is drawn from the pool per positive.
KnnModel run_initialisation(
  const std::vector<std::vector<Detection>> & frames, const std::vector<Embedding> & negative_pool,
  const RecognitionParams & params, std::uint64_t seed);

enum class RecognitionPhase { Initialising, Following, Fault };

struct RecognitionState
{
  RecognitionPhase phase{RecognitionPhase::Initialising};
  std::optional<BBox> last_bbox;
  double last_detection_time{0.0};
  double init_deadline{0.0};
};

enum class GateResult { Accept, RejectTooFar };

/// Accepts a candidate whose centroid lies inside the drift circle around the
/// reference centroid (the last box unless `reference` is given).
GateResult gate_detection(
  const BBox & candidate, const RecognitionState & state, double now, const RecognitionParams & params,
  const std::optional<Vec2> & reference = std::nullopt);

struct FollowingResult
{
  std::optional<Detection> leader;
  std::size_t gated_out{0};
  std::size_t classified_negative{0};
};

/// One detection-and-recognition cycle of the following phase. Mutates the
/// state (last box, last detection time) and the model (positive feedback,
/// negatives) in place.
FollowingResult following_step(
  const std::vector<Detection> & detections, RecognitionState & state, KnnModel & model, double now,
  const RecognitionParams & params, const std::optional<Vec2> & fused_feedback = std::nullopt);

/// Stand-in for the image tracker run between detections: it stays locked on
/// the blob it was started on and reports that blob with a slowly drifting
/// pixel offset. It fails when the blob is not in the frame.
class ImageTrackerSim
{
public:
  void start(const Detection & d);
  void stop() { active_ = false; }
  bool active() const { return active_; }
  int frames_since_start() const { return frames_; }

  /// Tracker output for this frame, or nullopt on tracking failure.
  std::optional<Detection> step(
    const std::vector<Detection> & frame, const CameraConfig & camera, const RecognitionParams & params, Rng & rng);

private:
  bool active_{false};
  int locked_id_{-1};
  int frames_{0};
  Vec2 drift_{Vec2::Zero()};
};

}  // namespace hpf
