#include "spatial_arena/eval.hpp"

#include <fmt/format.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "spatial_arena/error.hpp"
#include "spatial_arena/protocol.hpp"
#include "spatial_arena/rng.hpp"

namespace arena {

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::OracleCoarseToFine: return "oracle";
    case PolicyKind::RandomExplorer: return "random";
    case PolicyKind::BEVOnlyGuesser: return "bev-only";
    case PolicyKind::ExternalClient: return "external";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view s) {
  if (s == "oracle" || s == "OracleCoarseToFine") return PolicyKind::OracleCoarseToFine;
  if (s == "random" || s == "RandomExplorer") return PolicyKind::RandomExplorer;
  if (s == "bev-only" || s == "BEVOnlyGuesser") return PolicyKind::BEVOnlyGuesser;
  if (s == "external" || s == "ExternalClient") return PolicyKind::ExternalClient;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown policy '{}'", s));
}

namespace {

// Scripted policies read what they observed from the renderer's id buffers.
class Sight {
 public:
  explicit Sight(const Scene& scene) : zoom_(scene.objects.size(), 0), view_(scene.objects.size(), 0) {}

  void zoom(const Scene& scene, const EnvConfig& cfg, const ZoomIn& z) {
    try {
      add(zoom_, render_zoom_raster(scene, z.floor, z.bbox, cfg.zoom_resolution, cfg.bev_resolution));
    } catch (const Error&) {
    }
  }
  void view(const Scene& scene, const EnvConfig& cfg, CameraPose p) {
    p.fov = cfg.fov;
    try {
      add(view_, render_view_raster(scene, p, cfg.view_resolution));
    } catch (const Error&) {
    }
  }
  std::string answer(const Scene& scene, const QAItem& qa) const { return read_answer_from(scene, qa, zoom_, view_); }

 private:
  static void add(std::vector<int>& acc, const Raster& r) {
    const auto h = r.ids.histogram(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += h[i];
  }
  std::vector<int> zoom_;
  std::vector<int> view_;
};

BBox2D scaled_gt_bbox(const QAItem& qa, int bev_resolution) {
  const double s = static_cast<double>(bev_resolution) / qa.bev_resolution;
  return {qa.gt_bbox.x_min * s, qa.gt_bbox.y_min * s, qa.gt_bbox.x_max * s, qa.gt_bbox.y_max * s};
}

class OraclePolicy final : public Policy {
 public:
  void run(const Environment& env, EpisodeState& state, std::uint64_t) override {
    const Scene& scene = env.scene(state.scene_id);
    const QAItem& qa = env.qa(state.qa_id);
    Sight sight(scene);
    const ZoomIn z{qa.gt_floor, scaled_gt_bbox(qa, env.config().bev_resolution)};
    env.step(state, ToolCall{z, 0});
    sight.zoom(scene, env.config(), z);
    env.step(state, ToolCall{RenderView{qa.gt_pose}, 0});
    sight.view(scene, env.config(), qa.gt_pose);
    env.step(state, ToolCall{Answer{sight.answer(scene, qa)}, 0});
  }
};

std::string guess(const Scene& scene, const QAItem& qa, Rng& rng) {
  auto pick = [&](const auto& all) { return std::string(to_string(all[rng.uniform_int(0, all.size() - 1)])); };
  switch (qa.qtype) {
    case QuestionType::Color: return pick(kAllColors);
    case QuestionType::Material: return pick(kAllMaterials);
    case QuestionType::Shape: return pick(kAllShapes);
    case QuestionType::State: return pick(std::array{ObjectState::Open, ObjectState::Closed, ObjectState::On,
                                                      ObjectState::Off, ObjectState::Folded, ObjectState::Unfolded});
    case QuestionType::Counting: return std::to_string(rng.uniform_int(1, 4));
    case QuestionType::Position: {
      const auto room = kAllRoomCategories[rng.uniform_int(0, kAllRoomCategories.size() - 1)];
      return position_phrase(room, static_cast<int>(rng.uniform_int(0, scene.floor_count() - 1)));
    }
  }
  return {};
}

class RandomPolicy final : public Policy {
 public:
  void run(const Environment& env, EpisodeState& state, std::uint64_t seed) override {
    Rng rng(seed);
    const Scene& scene = env.scene(state.scene_id);
    const QAItem& qa = env.qa(state.qa_id);
    const EnvConfig& cfg = env.config();
    Sight sight(scene);
    const int calls = static_cast<int>(rng.uniform_int(1, 4));
    for (int k = 0; k < calls; ++k) {
      if (rng.bernoulli(0.5)) {
        const double res = cfg.bev_resolution;
        const double w = rng.uniform(0.1, 0.5) * res, h = rng.uniform(0.1, 0.5) * res;
        const double x0 = rng.uniform(0.0, res - w), y0 = rng.uniform(0.0, res - h);
        const ZoomIn z{static_cast<int>(rng.uniform_int(0, scene.floor_count() - 1)), BBox2D{x0, y0, x0 + w, y0 + h}};
        env.step(state, ToolCall{z, 0});
        sight.zoom(scene, cfg, z);
      } else {
        const auto& fl = scene.floors[static_cast<std::size_t>(rng.uniform_int(0, scene.floor_count() - 1))];
        const Rect area = fl.footprint.inset(0.3);
        CameraPose p;
        p.position = {rng.uniform(area.x0, area.x1), rng.uniform(area.y0, area.y1),
                      fl.elevation_z + rng.uniform(1.2, 1.7)};
        p.yaw = rng.uniform(-180.0, 180.0);
        p.pitch = rng.uniform(-30.0, 10.0);
        env.step(state, ToolCall{RenderView{p}, 0});
        sight.view(scene, cfg, p);
      }
    }
    std::string answer = sight.answer(scene, qa);
    if (answer.empty() || (qa.qtype == QuestionType::Counting && answer == "0")) answer = guess(scene, qa, rng);
    env.step(state, ToolCall{Answer{answer}, 0});
  }
};

class BevOnlyPolicy final : public Policy {
 public:
  void run(const Environment& env, EpisodeState& state, std::uint64_t) override {
    const QAItem& qa = env.qa(state.qa_id);
    std::string answer;
    switch (qa.qtype) {
      case QuestionType::Color: answer = modal_color(state.current.images); break;
      case QuestionType::Material: answer = "wood"; break;
      case QuestionType::Shape: answer = "rectangular"; break;
      case QuestionType::State: answer = "closed"; break;
      case QuestionType::Counting: answer = "1"; break;
      case QuestionType::Position: answer = position_phrase(RoomCategory::Living, 0); break;
    }
    env.step(state, ToolCall{Answer{answer}, 0});
  }

 private:
  // Most frequent palette color among BEV pixels; room and wall fills are not
  // palette entries.
  static std::string modal_color(const std::vector<Image>& bevs) {
    std::array<long, kAllColors.size()> counts{};
    for (const auto& img : bevs) {
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          if (auto c = palette_lookup(img.at(x, y))) ++counts[static_cast<std::size_t>(*c)];
        }
      }
    }
    const auto best = std::ranges::max_element(counts) - counts.begin();
    return std::string(to_string(kAllColors[static_cast<std::size_t>(best)]));
  }
};

// Child process speaking the NDJSON protocol on its stdin/stdout. The harness
// sends a "task" per episode and relays observations until the client
// answers; the child must open with {"type":"hello","v":1}.
class ExternalPolicy final : public Policy {
 public:
  explicit ExternalPolicy(std::string command) : command_(std::move(command)) {}
  ~ExternalPolicy() override { stop(); }

  bool disconnected() const override { return disconnected_; }

  void run(const Environment& env, EpisodeState& state, std::uint64_t seed) override {
    disconnected_ = false;
    if (!alive_ && !start()) return lost(env, state);
    Json task{{"v", kProtocolVersion},
              {"type", "task"},
              {"episode", state.episode_id},
              {"scene", state.scene_id},
              {"qa", state.qa_id},
              {"question", state.question},
              {"seed", seed},
              {"budget", env.config().step_budget}};
    task["images"] = images_json(state.current.images);
    if (!send(task)) return lost(env, state);
    while (!state.terminated) {
      const auto line = receive();
      if (!line) return lost(env, state);
      Json reply;
      try {
        const Json msg = parse_json(*line);
        const ToolCall call = parse_client_call(msg);
        const Observation obs = env.step(state, call);
        reply = observation_message(obs);
      } catch (const Error& e) {
        reply = error_message(e);
      }
      if (state.terminated) {
        reply = Json{{"v", kProtocolVersion}, {"type", "done"}, {"correct", state.correct}};
      }
      if (!send(reply)) return lost(env, state);
    }
  }

 private:
  bool start() {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0) return false;
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      return false;
    }
    pid_ = fork();
    if (pid_ < 0) return false;
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    out_ = fdopen(to_child[1], "w");
    in_ = fdopen(from_child[0], "r");
    alive_ = out_ && in_;
    if (!alive_) return false;
    const auto hello = receive();
    try {
      const Json h = hello ? parse_json(*hello) : Json();
      alive_ = h.is_object() && h.value("type", "") == "hello" && h.value("v", 0) == kProtocolVersion;
    } catch (const Error&) {
      alive_ = false;
    }
    if (alive_) alive_ = send(Json{{"v", kProtocolVersion}, {"type", "hello"}, {"role", "harness"}});
    return alive_;
  }

  void stop() {
    if (out_) fclose(out_);
    if (in_) fclose(in_);
    out_ = in_ = nullptr;
    if (pid_ > 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
    alive_ = false;
  }

  bool send(const Json& j) {
    if (!out_) return false;
    const std::string line = j.dump() + "\n";
    return fwrite(line.data(), 1, line.size(), out_) == line.size() && fflush(out_) == 0;
  }

  std::optional<std::string> receive() {
    if (!in_) return std::nullopt;
    std::string line;
    int c;
    while ((c = fgetc(in_)) != EOF && c != '\n') line += static_cast<char>(c);
    if (c == EOF && line.empty()) return std::nullopt;
    return line;
  }

  void lost(const Environment& env, EpisodeState& state) {
    disconnected_ = true;
    stop();
    if (!state.terminated) env.step(state, ToolCall{Answer{""}, 0});
    state.correct = false;
  }

  std::string command_;
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
  FILE* in_ = nullptr;
  bool alive_ = false;
  bool disconnected_ = false;
};

EpisodeLog run_one(const Environment& env, const QAItem& qa, Policy& policy, std::uint64_t seed,
                   const RewardConfig& reward) {
  EpisodeState state = env.start_episode(qa.scene_id, qa.qa_id);
  policy.run(env, state, seed);
  if (!state.terminated) env.step(state, ToolCall{Answer{""}, 0});
  EpisodeLog log;
  log.qa_id = qa.qa_id;
  log.scene_id = qa.scene_id;
  log.qtype = qa.qtype;
  log.trajectory = to_trajectory(state);
  log.tool_calls = state.tool_calls();
  log.correct = state.correct;
  log.disconnected = policy.disconnected();
  const TrajectoryFeatures f = extract_features(state, env.config().bev_resolution, reward);
  log.reward = total_reward(f, state.correct ? 1.0 : 0.0, qa, reward);
  return log;
}

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::OracleCoarseToFine: return std::make_unique<OraclePolicy>();
    case PolicyKind::RandomExplorer: return std::make_unique<RandomPolicy>();
    case PolicyKind::BEVOnlyGuesser: return std::make_unique<BevOnlyPolicy>();
    case PolicyKind::ExternalClient:
      if (spec.command.empty()) throw Error(ErrorCode::InvalidArgument, "external policy needs a command");
      return std::make_unique<ExternalPolicy>(spec.command);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy kind");
}

Json to_json(const EpisodeLog& e) {
  return Json{{"qa_id", e.qa_id},
              {"scene_id", e.scene_id},
              {"qtype", to_string(e.qtype)},
              {"correct", e.correct},
              {"tool_calls", e.tool_calls},
              {"disconnected", e.disconnected},
              {"trajectory", to_json(e.trajectory)},
              {"reward", to_json(e.reward)}};
}

EvalReport run_eval(const Environment& env, const std::vector<QAItem>& items, const PolicySpec& spec,
                    const RewardConfig& reward, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& qa : items) env.scene(qa.scene_id);
  EvalReport report;
  report.policy = std::string(to_string(spec.kind));
  report.log.resize(items.size());
  if (spec.kind == PolicyKind::ExternalClient) workers = 1;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(items.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    try {
      auto policy = make_policy(spec);
      for (std::size_t i = next++; i < items.size(); i = next++) {
        report.log[i] = run_one(env, items[i], *policy, derive_seed(spec.seed, items[i].qa_id), reward);
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::ranges::sort(report.log, {}, &EpisodeLog::qa_id);
  std::map<QuestionType, int> correct;
  int total_correct = 0;
  long total_calls = 0;
  for (const auto& e : report.log) {
    ++report.counts[e.qtype];
    correct[e.qtype] += e.correct;
    total_correct += e.correct;
    total_calls += e.tool_calls;
    report.disconnects += e.disconnected;
  }
  for (const auto& [t, n] : report.counts) report.accuracy[t] = static_cast<double>(correct[t]) / n;
  report.episodes = static_cast<int>(report.log.size());
  if (report.episodes > 0) {
    report.overall = static_cast<double>(total_correct) / report.episodes;
    report.avg_tool_calls = static_cast<double>(total_calls) / report.episodes;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

Json to_json(const EvalReport& r) {
  Json acc = Json::object(), counts = Json::object();
  for (QuestionType t : kReportColumns) {
    const auto it = r.accuracy.find(t);
    acc[std::string(to_string(t))] = it == r.accuracy.end() ? Json() : Json(it->second);
    counts[std::string(to_string(t))] = r.counts.count(t) ? r.counts.at(t) : 0;
  }
  acc["overall"] = r.overall;
  return Json{{"policy", r.policy},   {"episodes", r.episodes},
              {"accuracy", acc},      {"counts", counts},
              {"avg_tool_calls", r.avg_tool_calls}, {"disconnects", r.disconnects},
              {"wall_seconds", r.wall_seconds}};
}

std::string render_table(const EvalReport& r) {
  std::string header = fmt::format("{:<10}", "Policy");
  std::string row = fmt::format("{:<10}", r.policy);
  for (QuestionType t : kReportColumns) {
    std::string name(to_string(t));
    name[0] = static_cast<char>(std::toupper(name[0]));
    header += fmt::format(" {:>9}", name);
    const auto it = r.accuracy.find(t);
    row += it == r.accuracy.end() ? fmt::format(" {:>9}", "-") : fmt::format(" {:>9.3f}", it->second);
  }
  header += fmt::format(" {:>9} {:>13}\n", "Overall", "Avg.Toolcall");
  row += fmt::format(" {:>9.3f} {:>13.2f}\n", r.overall, r.avg_tool_calls);
  return header + row;
}

std::string episode_log_jsonl(const EvalReport& r) {
  std::string out;
  for (const auto& e : r.log) out += canonical_dump(to_json(e)) + "\n";
  return out;
}

RolloutGroup rollout_group(const Environment& env, const QAItem& qa, const PolicySpec& spec, int G,
                           const RewardConfig& reward) {
  if (G < 2) throw Error(ErrorCode::InvalidArgument, fmt::format("rollout groups need G >= 2 (got {})", G));
  auto policy = make_policy(spec);
  RolloutGroup group;
  std::vector<TrajectoryFeatures> features;
  for (int i = 0; i < G; ++i) {
    EpisodeState state = env.start_episode(qa.scene_id, qa.qa_id, fmt::format("{}#{}", qa.qa_id, i));
    policy->run(env, state, derive_seed(spec.seed, fmt::format("{}/{}", qa.qa_id, i)));
    if (!state.terminated) env.step(state, ToolCall{Answer{""}, 0});
    features.push_back(extract_features(state, env.config().bev_resolution, reward));
    group.trajectories.push_back(to_trajectory(state));
  }
  group.rewards = score_group(features, qa, reward);
  return group;
}

}  // namespace arena
