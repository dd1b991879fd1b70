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

#include "hpf/recognition.hpp"

#include "hpf/rng.hpp"

#include <algorithm>
#include <numeric>

namespace hpf
{
KnnModel::KnnModel(int k, std::size_t negative_cap) : k_(k), negative_cap_(negative_cap)
{
  if (k_ <= 0 || k_ % 2 == 0) {
    throw std::invalid_argument("KnnModel: k must be a positive odd number");
  }
}

void KnnModel::add_positive(const Embedding & e)
{
  positives_.push_back({e, next_seq_++});
}

void KnnModel::add_negative(const Embedding & e)
{
  negatives_.push_back({e, next_seq_++});
  while (negatives_.size() > negative_cap_) {
    negatives_.pop_front();
  }
}

Classification KnnModel::classify(const Embedding & e) const
{
  const std::size_t total = positives_.size() + negatives_.size();
  if (total == 0) {
    throw UninitialisedRecogniser("KnnModel::classify: recogniser has no samples");
  }
  if (static_cast<std::size_t>(k_) > total) {
    throw UninitialisedRecogniser("KnnModel::classify: fewer samples than k");
  }
  struct Candidate
  {
    double d2;
    std::uint64_t seq;
    bool positive;
  };
  std::vector<Candidate> cands;
  cands.reserve(total);
  for (const auto & s : positives_) {
    cands.push_back({(s.e - e).squaredNorm(), s.seq, true});
  }
  for (const auto & s : negatives_) {
    cands.push_back({(s.e - e).squaredNorm(), s.seq, false});
  }
  const auto k = static_cast<std::ptrdiff_t>(k_);
  std::partial_sort(cands.begin(), cands.begin() + k, cands.end(), [](const Candidate & a, const Candidate & b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.seq < b.seq);
  });
  const int votes = static_cast<int>(std::count_if(cands.begin(), cands.begin() + k, [](const Candidate & c) {
    return c.positive;
  }));
  Classification out;
  out.leader_votes = votes;
  out.margin = (votes - 0.5 * k_) / k_;
  out.label = out.margin > 0.0 ? Label::Leader : Label::NotLeader;
  return out;
}

KnnModel run_initialisation(
  const std::vector<std::vector<Detection>> & frames, const std::vector<Embedding> & negative_pool,
  const RecognitionParams & params, std::uint64_t seed)
{
  if (negative_pool.empty()) {
    throw InitialisationError("run_initialisation: empty negative pool");
  }
  const auto with_detections = static_cast<std::size_t>(
    std::count_if(frames.begin(), frames.end(), [](const auto & f) { return !f.empty(); }));
  if (frames.empty() ||
      static_cast<double>(with_detections) < params.init_min_fraction * static_cast<double>(frames.size())) {
    throw InitialisationError("run_initialisation: too few frames with detections");
  }
  Rng rng(seed);
  KnnModel model(params.k, params.negative_cap);
  for (const auto & frame : frames) {
    if (frame.empty()) {
      continue;
    }
    const auto largest = std::max_element(frame.begin(), frame.end(), [](const Detection & a, const Detection & b) {
      return a.bbox.area() < b.bbox.area();
    });
    model.add_positive(largest->embedding);
    model.add_negative(negative_pool[rng.index(negative_pool.size())]);
  }
  if (model.positive_count() + model.negative_count() < static_cast<std::size_t>(params.k)) {
    throw InitialisationError("run_initialisation: not enough samples for k");
  }
  return model;
}

GateResult gate_detection(
  const BBox & candidate, const RecognitionState & state, double now, const RecognitionParams & params,
  const std::optional<Vec2> & reference)
{
  if (!state.last_bbox) {
    throw std::logic_error("gate_detection: no reference bounding box");
  }
  const Vec2 ref = reference ? *reference : state.last_bbox->center();
  const double elapsed = std::max(0.0, now - state.last_detection_time) * params.drift_time_scale;
  const double radius = drift_radius(elapsed, state.last_bbox->w, params.drift_s);
  return (candidate.center() - ref).norm() <= radius ? GateResult::Accept : GateResult::RejectTooFar;
}

FollowingResult following_step(
  const std::vector<Detection> & detections, RecognitionState & state, KnnModel & model, double now,
  const RecognitionParams & params, const std::optional<Vec2> & fused_feedback)
{
  FollowingResult result;
  if (state.phase != RecognitionPhase::Following || !state.last_bbox) {
    return result;
  }
  const Detection * best = nullptr;
  double best_margin = 0.0;
  std::vector<const Detection *> negatives;
  for (const auto & d : detections) {
    if (gate_detection(d.bbox, state, now, params, fused_feedback) == GateResult::RejectTooFar) {
      ++result.gated_out;
      continue;
    }
    const Classification c = model.classify(d.embedding);
    if (c.label == Label::Leader) {
      if (best == nullptr || c.margin > best_margin) {
        best = &d;
        best_margin = c.margin;
      }
    } else {
      negatives.push_back(&d);
    }
  }
  // Model updates happen after all candidates were classified against the
  // same snapshot.
  for (const Detection * d : negatives) {
    model.add_negative(d->embedding);
    ++result.classified_negative;
  }
  if (best != nullptr) {
    model.add_positive(best->embedding);
    state.last_bbox = best->bbox;
    state.last_detection_time = now;
    result.leader = *best;
  }
  return result;
}

void ImageTrackerSim::start(const Detection & d)
{
  active_ = true;
  locked_id_ = d.agent_truth;
  frames_ = 0;
  drift_ = Vec2::Zero();
}

std::optional<Detection> ImageTrackerSim::step(
  const std::vector<Detection> & frame, const CameraConfig & camera, const RecognitionParams & params, Rng & rng)
{
  if (!active_) {
    return std::nullopt;
  }
  ++frames_;
  drift_ += Vec2(rng.normal(0.0, params.tracker_drift_px), rng.normal(0.0, params.tracker_drift_px));
  const auto it = std::find_if(frame.begin(), frame.end(), [&](const Detection & d) {
    return d.agent_truth == locked_id_;
  });
  if (it == frame.end()) {
    active_ = false;
    return std::nullopt;
  }
  Detection out = *it;
  out.bbox.x += drift_.x();
  out.bbox.y += drift_.y();
  const double f = camera.focal_px();
  out.centroid_c.x() += drift_.x() * out.centroid_c.z() / f;
  out.centroid_c.y() += drift_.y() * out.centroid_c.z() / f;
  return out;
}

}  // namespace hpf
