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

// Runs the acceptance checks and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include "hpf/clothoid.hpp"
#include "hpf/harness.hpp"
#include "hpf/lidar_fusion.hpp"
#include "hpf/path.hpp"
#include "hpf/recognition.hpp"
#include "hpf/tracker.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

namespace
{
using namespace hpf;
namespace fs = std::filesystem;

const fs::path kScenarios = HPF_SCENARIO_DIR;
const std::vector<std::string> kBundled{"straight", "s_curve", "sharp_turn_fov_loss", "corridor_crossing", "obstacle_stop"};

struct Outcome
{
  bool pass{true};
  std::string detail;
};

std::string fmt(const char * f, double a, double b = 0, double c = 0, double d = 0)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Bundled
{
  Scenario scenario;
  RunLog log;
  double seconds{0.0};
};

std::map<std::string, Bundled> & runs()
{
  static std::map<std::string, Bundled> cache;
  if (cache.empty()) {
    for (const auto & name : kBundled) {
      Bundled b;
      b.scenario = load_scenario(kScenarios / (name + ".json"));
      const auto t0 = std::chrono::steady_clock::now();
      b.log = run(b.scenario);
      b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      cache.emplace(name, std::move(b));
    }
  }
  return cache;
}

Outcome lateral_accuracy()
{
  const Bundled & b = runs().at("s_curve");
  const Metrics m = compute_metrics(b.log);
  Outcome o;
  o.pass = b.log.status == RunStatus::Ok && m.lateral.count > 0 && m.lateral.p95 <= 0.25 && m.lateral.max <= 0.40 &&
           b.seconds <= 30.0;
  o.detail = fmt("s_curve p95 %.4f m, max %.4f m, runtime %.2f s", m.lateral.p95, m.lateral.max, b.seconds);
  return o;
}

// Noise-free visibility of agent `a` from the robot camera.
bool in_fov(const Pose2D & robot, const Pose2D & agent, const CameraConfig & cam)
{
  const Vec2 l = world_to_local(agent.position(), robot);
  const Vec2 m = transform_point(inverse(cam.mount), l);
  return m.x() > 0.0 && std::abs(std::atan2(m.y(), m.x())) <= 0.5 * cam.hfov;
}

bool visible(const StepRecord & st, std::size_t a, const Scenario & sc)
{
  const CameraConfig & cam = sc.camera;
  if (!in_fov(st.robot, st.agents[a], cam)) {
    return false;
  }
  const Vec2 cam_w = local_to_world(cam.mount.translation, st.robot);
  const Vec2 centre = st.agents[a].position();
  const double range = (centre - cam_w).norm();
  const Vec2 m = transform_point(inverse(cam.mount), world_to_local(centre, st.robot));
  const double depth = m.x() * (range - sc.agents[a].body_radius) / range;
  if (depth < cam.min_depth || depth > cam.max_depth) {
    return false;
  }
  for (std::size_t o = 0; o < st.agents.size(); ++o) {
    if (o == a) {
      continue;
    }
    const Vec2 ab = centre - cam_w;
    const double u = std::clamp((st.agents[o].position() - cam_w).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    if ((cam_w + u * ab - st.agents[o].position()).norm() < sc.agents[o].body_radius) {
      return false;
    }
  }
  return true;
}

Outcome fov_loss()
{
  const Bundled & b = runs().at("sharp_turn_fov_loss");
  const RunLog & log = b.log;
  const std::size_t leader = log.leader_index;
  double best = 0.0;
  double start = -1.0;
  double best_from = 0.0;
  double best_to = 0.0;
  double out_first = -1.0;
  double out_last = -1.0;
  for (const auto & st : log.steps) {
    const bool leader_out = !in_fov(st.robot, st.agents[leader], b.scenario.camera);
    bool distractor = false;
    for (std::size_t a = 0; a < st.agents.size(); ++a) {
      distractor = distractor || (a != leader && visible(st, a, b.scenario));
    }
    if (leader_out && !st.init_phase) {
      out_first = out_first < 0.0 ? st.t : out_first;
      out_last = st.t;
    }
    if (leader_out && distractor && !st.init_phase) {
      start = start < 0.0 ? st.t : start;
      if (st.t - start + log.dt > best) {
        best = st.t - start + log.dt;
        best_from = start;
        best_to = st.t;
      }
    } else {
      start = -1.0;
    }
  }

  bool lost = false;
  bool lidar_only_while_out = false;
  bool both_after = false;
  for (const auto & st : log.steps) {
    lost = lost || st.mode == FusionMode::Lost;
    if (st.t >= out_first && st.t <= out_last) {
      lidar_only_while_out = lidar_only_while_out || st.mode == FusionMode::TrackedLidarOnly;
    }
    if (st.t > out_last) {
      both_after = both_after || st.mode == FusionMode::TrackedBoth;
    }
  }
  const Metrics m = compute_metrics(log);
  Outcome o;
  o.pass = log.status == RunStatus::Ok && best >= 1.0 && m.identity_precision >= 0.99 && !lost &&
           lidar_only_while_out && both_after;
  o.detail = fmt("leader out of view with distractor visible %.2f s (t %.2f to %.2f), identity %.4f", best, best_from,
                 best_to, m.identity_precision);
  o.detail += std::string(", LidarOnly ") + (lidar_only_while_out ? "yes" : "no") + ", back to Both " +
              (both_after ? "yes" : "no") + ", Lost " + (lost ? "yes" : "no");
  return o;
}

Outcome corridor_identity()
{
  const Bundled & b = runs().at("corridor_crossing");
  const RunLog & log = b.log;
  const auto agents = build_agents(b.scenario);
  double separation = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (a != log.leader_index) {
      separation = std::min(
        separation, (agents[a].embedding_mean - agents[log.leader_index].embedding_mean).norm() / b.scenario.camera.sigma_e);
    }
  }
  const int leader_id = log.agent_ids[log.leader_index];
  bool bootstrapped = false;
  std::size_t wrong = 0;
  std::size_t coasting = 0;
  std::size_t checked = 0;
  double worst = 0.0;
  for (const auto & st : log.steps) {
    bootstrapped = bootstrapped || (st.mode != FusionMode::Bootstrap && !st.init_phase);
    if (!bootstrapped) {
      continue;
    }
    ++checked;
    if (!st.target_truth) {
      ++coasting;
    } else if (*st.target_truth != leader_id) {
      ++wrong;
    }
    if (st.estimate) {
      worst = std::max(worst, (st.estimate->position - st.agents[log.leader_index].position()).norm());
    }
  }
  Outcome o;
  o.pass = log.status == RunStatus::Ok && separation >= 6.0 && checked > 0 && wrong == 0 && worst < 0.5;
  o.detail = fmt("separation %.1f sigma, %.0f steps after bootstrap, %.0f non-leader targets, %.0f coasting",
                 separation, static_cast<double>(checked), static_cast<double>(wrong), static_cast<double>(coasting));
  o.detail += fmt(", max estimate error %.3f m", worst);
  return o;
}

Outcome filters()
{
  const oracle::NeesResult nees = oracle::cv_position_nees(100, 100, 4001);
  const bool nees_ok = nees.mean_nees >= nees.lo && nees.mean_nees <= nees.hi;

  Rng rng(4002);
  double jac_err = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    Vec5 x;
    x << rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-3.1, 3.1), rng.uniform(-2, 2), rng.uniform(-2, 2);
    const double dt = rng.uniform(0.01, 0.2);
    const Mat5 j = uni_jacobian(x, dt);
    for (int c = 0; c < 5; ++c) {
      Vec5 xp = x;
      Vec5 xm = x;
      xp(c) += h;
      xm(c) -= h;
      const Vec5 col = (uni_transition(xp, dt) - uni_transition(xm, dt)) / (2.0 * h);
      for (int r = 0; r < 5; ++r) {
        jac_err = std::max(jac_err, std::abs(col(r) - j(r, c)) / std::max(1.0, std::abs(j(r, c))));
      }
    }
  }

  const MmParams params;
  double mu_err = 0.0;
  Measurement m;
  m.R = Mat2::Identity() * 0.0025;
  m.z = Vec2::Zero();
  MmEstimate est = mm_initialize(m, params);
  Vec2 p = Vec2::Zero();
  double heading = 0.0;
  for (int k = 1; k <= 10000; ++k) {
    heading += rng.normal(0.0, 0.1);
    p += 0.05 * 0.8 * Vec2(std::cos(heading), std::sin(heading));
    std::optional<Measurement> z;
    if (!rng.bernoulli(0.1)) {
      m.z = p + Vec2(rng.normal(0.0, 0.05), rng.normal(0.0, 0.05));
      m.timestamp = k * 0.05;
      z = m;
    }
    est = gpb1_step(est, z, 0.05, params);
    mu_err = std::max(mu_err, std::abs(est.mu.sum() - 1.0));
  }

  const double mu_cv = oracle::mean_mu_cv_on_cv_truth(2000, 100, 4003);
  Outcome o;
  o.pass = nees_ok && jac_err <= 1e-6 && mu_err <= 1e-12 && mu_cv > 0.5;
  o.detail = fmt("NEES %.3f in [%.3f, %.3f], Jacobian err %.2e", nees.mean_nees, nees.lo, nees.hi, jac_err);
  o.detail += fmt(", mu sum err %.1e, mean mu_cv %.6f", mu_err, mu_cv);
  return o;
}

// Replays the path builder on the points the pipeline fed it.
double replayed_spline_mismatch(const Bundled & b, std::size_t & splines, bool & consistent)
{
  PathBuilder builder(b.scenario.path);
  double worst = 0.0;
  std::uint64_t last = 0;
  consistent = true;
  for (const auto & st : b.log.steps) {
    const bool tracking = st.mode == FusionMode::TrackedBoth || st.mode == FusionMode::TrackedLidarOnly ||
                          st.mode == FusionMode::TrackedCameraOnly;
    if (st.measurement && st.estimate && tracking) {
      builder.add({st.estimate->position, st.t});
    }
    consistent = consistent && builder.version() == st.spline_version;
    if (builder.version() != last) {
      last = builder.version();
      ++splines;
      const JointMismatch jm = joint_mismatch(builder.snapshot()->spline);
      worst = std::max({worst, jm.position, jm.heading, jm.curvature});
    }
  }
  return worst;
}

Outcome clothoid_numerics()
{
  double fres = 0.0;
  for (int i = -300; i <= 300; ++i) {
    const double x = i / 100.0;
    const FresnelCS got = fresnel(x);
    const FresnelCS want = oracle::fresnel_series(x);
    fres = std::max({fres, std::abs(got.c - want.c), std::abs(got.s - want.s)});
  }

  Rng rng(5001);
  double g1 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 p0(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Vec2 p1 = p0 + rng.uniform(0.2, 4.0) * Vec2(std::cos(rng.uniform(-3.1, 3.1)), std::sin(rng.uniform(-3.1, 3.1)));
    const double chord = std::atan2(p1.y() - p0.y(), p1.x() - p0.x());
    const double t0 = chord + rng.uniform(-1.5, 1.5);
    const double t1 = chord + rng.uniform(-1.5, 1.5);
    const ClothoidSegment seg = clothoid_g1_fit(p0, t0, p1, t1);
    const Pose2D end = oracle::rk4_clothoid(seg, seg.length);
    g1 = std::max({g1, (end.position() - p1).norm(), std::abs(normalize_angle(end.theta - t1))});
  }

  std::size_t splines = 0;
  double joints = 0.0;
  bool consistent = true;
  for (const auto & [name, b] : runs()) {
    bool ok = true;
    joints = std::max(joints, replayed_spline_mismatch(b, splines, ok));
    consistent = consistent && ok;
  }
  Outcome o;
  o.pass = fres <= 1e-10 && g1 <= 1e-6 && joints <= 1e-6 && consistent && splines > 0;
  o.detail = fmt("fresnel err %.2e, G1 residual %.2e, joint mismatch %.2e over %.0f splines", fres, g1, joints,
                 static_cast<double>(splines));
  if (!consistent) {
    o.detail += " (replay diverged from run)";
  }
  return o;
}

Outcome loess()
{
  Rng rng(6001);
  double err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> pts;
    Vec2 p = Vec2::Zero();
    double heading = rng.uniform(-3.1, 3.1);
    for (int i = 0; i < 50; ++i) {
      heading += rng.normal(0.0, 0.3);
      p += rng.uniform(0.02, 0.3) * Vec2(std::cos(heading), std::sin(heading));
      pts.push_back(p + Vec2(rng.normal(0.0, 0.03), rng.normal(0.0, 0.03)));
    }
    const auto got = loess_smooth(pts, 0.3);
    const auto want = oracle::loess_wls(pts, 0.3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      err = std::max(err, (got[i] - want[i]).cwiseAbs().maxCoeff());
    }
  }
  double fixed = 0.0;
  std::vector<Vec2> line;
  double s = 0.0;
  for (int i = 0; i < 50; ++i) {
    s += rng.uniform(0.01, 0.4);
    line.push_back(Vec2(2.0, 1.0) + s * Vec2(0.28, -0.96));
  }
  const auto out = loess_smooth(line, 0.3);
  for (std::size_t i = 0; i < line.size(); ++i) {
    fixed = std::max(fixed, (out[i] - line[i]).norm());
  }
  Outcome o;
  o.pass = err <= 1e-9 && fixed <= 1e-9;
  o.detail = fmt("max deviation from WLS oracle %.2e, collinear drift %.2e", err, fixed);
  return o;
}

bool vec2_less(const Vec2 & p, const Vec2 & q)
{
  return p.x() != q.x() ? p.x() < q.x() : p.y() < q.y();
}

// Clusters as sorted point lists, themselves sorted, so that index order does not matter.
std::vector<std::vector<Vec2>> cluster_point_sets(const std::vector<Cluster> & clusters, const std::vector<Vec2> & pts)
{
  std::vector<std::vector<Vec2>> out;
  for (const auto & c : clusters) {
    std::vector<Vec2> members;
    for (std::size_t i : c.members) {
      members.push_back(pts[i]);
    }
    std::sort(members.begin(), members.end(), vec2_less);
    out.push_back(members);
  }
  std::sort(out.begin(), out.end(), [](const auto & a, const auto & b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), vec2_less);
  });
  return out;
}

std::vector<Vec2> scan_points(const Scan & scan)
{
  std::vector<Vec2> pts;
  for (const auto & p : scan.points) {
    pts.push_back(Vec2(p.r * std::cos(p.alpha), p.r * std::sin(p.alpha)));
  }
  return pts;
}

Outcome clustering()
{
  Rng rng(7001);
  int mismatches = 0;
  int perm_mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Scan scan = oracle::random_scan(rng);
    const double d_max = rng.uniform(0.1, 0.6);
    const std::size_t n_min = 1 + rng.index(5);
    const auto clusters = cluster_scan(scan, d_max, n_min);
    const auto pts = scan_points(scan);
    std::set<std::vector<std::size_t>> got;
    for (const auto & c : clusters) {
      std::vector<std::size_t> m = c.members;
      std::sort(m.begin(), m.end());
      got.insert(m);
    }
    mismatches += got == oracle::union_find_clusters(pts, d_max, n_min) ? 0 : 1;

    std::vector<std::size_t> perm(scan.points.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[rng.index(i)]);
    }
    Scan shuffled;
    for (std::size_t i : perm) {
      shuffled.points.push_back(scan.points[i]);
    }
    const auto a = cluster_scan(shuffled, d_max, n_min);
    const auto spts = scan_points(shuffled);
    const auto sa = cluster_point_sets(a, spts);
    const auto sb = cluster_point_sets(clusters, pts);
    bool same = sa.size() == sb.size();
    for (std::size_t i = 0; same && i < sa.size(); ++i) {
      same = sa[i] == sb[i];
    }
    perm_mismatches += same ? 0 : 1;
  }
  Outcome o;
  o.pass = mismatches == 0 && perm_mismatches == 0;
  o.detail = fmt("1000 scans, %.0f oracle mismatches, %.0f permutation mismatches", mismatches, perm_mismatches);
  return o;
}

Outcome drift()
{
  Rng rng(8001);
  int inexact = 0;
  int non_monotone = 0;
  for (int i = 0; i < 100000; ++i) {
    const double t = rng.uniform(0.0, 5000.0);
    const double w = rng.uniform(1.0, 640.0);
    const double s = rng.uniform(0.0, 1.0);
    const double r = w / 100.0;
    inexact += drift_radius(t, w, s) == t * s * (r * r) ? 0 : 1;
    const double dt = rng.uniform(0.0, 1.0);
    const double dw = rng.uniform(0.0, 50.0);
    non_monotone += drift_radius(t, w, s) <= drift_radius(t + dt, w, s) ? 0 : 1;
    non_monotone += drift_radius(t, w, s) <= drift_radius(t, w + dw, s) ? 0 : 1;
  }
  Outcome o;
  o.pass = inexact == 0 && non_monotone == 0;
  o.detail = fmt("1e5 samples, %.0f inexact, %.0f monotonicity violations", inexact, non_monotone);
  return o;
}

Outcome control()
{
  double worst_dv = 0.0;
  int spin_in_place = 0;
  bool bounded = true;
  for (const auto & [name, b] : runs()) {
    const double limit = b.scenario.control.a_max * b.log.dt;
    double v_prev = 0.0;
    for (const auto & st : b.log.steps) {
      const double dv = std::abs(st.v - v_prev);
      worst_dv = std::max(worst_dv, dv / limit);
      bounded = bounded && dv <= limit * (1.0 + 1e-12);
      spin_in_place += st.v == 0.0 && st.omega != 0.0 ? 1 : 0;
      v_prev = st.v;
    }
  }
  std::vector<SafetyEventKind> events;
  for (const auto & st : runs().at("obstacle_stop").log.steps) {
    for (const auto & e : st.events) {
      events.push_back(e.kind);
    }
  }
  const auto alerts = std::count(events.begin(), events.end(), SafetyEventKind::SoundAlert);
  const auto first_stop = std::find(events.begin(), events.end(), SafetyEventKind::Stop);
  const auto first_alert = std::find(events.begin(), events.end(), SafetyEventKind::SoundAlert);
  const bool order = !events.empty() && events.front() == SafetyEventKind::SlowDown && first_stop != events.end() &&
                     first_alert != events.end() && first_stop < first_alert;
  std::string seq;
  for (const auto k : events) {
    seq += (seq.empty() ? "" : " ") + std::string(to_string(k));
  }
  Outcome o;
  o.pass = bounded && spin_in_place == 0 && order && alerts == 1;
  o.detail = fmt("max |dv| / (a_max dt) %.4f, %.0f steps with v = 0 and omega != 0", worst_dv, spin_in_place);
  o.detail += ", obstacle_stop events: " + seq;
  return o;
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism()
{
  const fs::path root = fs::temp_directory_path() / "hpf_acceptance";
  int differing = 0;
  for (const auto & name : kBundled) {
    const Scenario s = load_scenario(kScenarios / (name + ".json"));
    write_outputs(run(s), root / name / "a");
    write_outputs(run(s), root / name / "b");
    const std::string a = slurp(root / name / "a" / "run.json");
    differing += a.empty() || a != slurp(root / name / "b" / "run.json") ? 1 : 0;
  }
  Outcome o;
  o.pass = differing == 0;
  o.detail = fmt("%.0f bundled scenarios, %.0f run.json pairs differ", static_cast<double>(kBundled.size()), differing);
  return o;
}

}  // namespace

int main()
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    {"lateral accuracy", lateral_accuracy},
    {"field of view loss", fov_loss},
    {"crossing identity", corridor_identity},
    {"filters", filters},
    {"clothoid numerics", clothoid_numerics},
    {"loess", loess},
    {"clustering", clustering},
    {"drift radius", drift},
    {"control", control},
    {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception & e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
