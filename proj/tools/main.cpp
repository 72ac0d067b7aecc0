#include <fmt/format.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "settings.hpp"
#include "spatial_arena/config.hpp"
#include "spatial_arena/error.hpp"
#include "spatial_arena/eval.hpp"
#include "spatial_arena/json_io.hpp"
#include "spatial_arena/protocol.hpp"
#include "spatial_arena/rng.hpp"

namespace fs = std::filesystem;
using namespace arena;
using arena::cli::Settings;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string config;
  int workers = 1;
  bool force = false;
};

Settings resolve_settings(const Common& c) {
  return cli::load_settings(c.config.empty() ? std::nullopt : std::optional<fs::path>(c.config));
}

void announce(const std::string& command, const Common& c, Json resolved) {
  resolved["command"] = command;
  resolved["seed"] = c.seed;
  fmt::print(stderr, "seed={} config_sha256={}\n", c.seed, config_hash(resolved));
}

void check_writable(const fs::path& out, bool force) {
  if (fs::exists(out) && !force) {
    throw Error(ErrorCode::Io, fmt::format("{} exists; pass --force to overwrite", out.string()));
  }
}

template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<Scene> load_scenes(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, fmt::format("scene directory {} not found", dir.string()));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() > 11 && name.ends_with(".scene.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Scene> scenes;
  for (const auto& f : files) scenes.push_back(deserialize_scene(read_text_file(f)));
  return scenes;
}

std::vector<Json> read_jsonl(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::vector<Json> out;
  std::size_t start = 0;
  int line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line(text.data() + start, end - start);
    if (!line.empty()) {
      try {
        out.push_back(parse_json(line));
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
      }
    }
    start = end + 1;
  }
  return out;
}

std::vector<QAItem> load_qa(const fs::path& path) {
  std::vector<QAItem> items;
  for (const auto& j : read_jsonl(path)) items.push_back(qa_from_json(j));
  return items;
}

Environment make_env(const Settings& s, const std::string& scenes_dir, const std::string& qa_path,
                     std::vector<QAItem>* items_out = nullptr) {
  Environment env(s.env);
  for (auto& scene : load_scenes(scenes_dir)) env.add_scene(std::move(scene));
  std::vector<QAItem> items = load_qa(qa_path);
  for (const auto& qa : items) {
    env.scene(qa.scene_id);  // NotFound for dangling references
    env.add_qa(qa);
  }
  if (items_out) *items_out = std::move(items);
  return env;
}

// gen-scenes

struct GenScenesArgs {
  int n = 10;
  std::string out;
};

int gen_scenes(const Common& c, const GenScenesArgs& a) {
  const Settings s = resolve_settings(c);
  announce("gen-scenes", c, Json{{"generator", to_json(s.generator)}, {"n", a.n}});
  if (a.n < 1) throw Error(ErrorCode::InvalidArgument, "--n must be >= 1");
  const fs::path out(a.out);
  check_writable(out, c.force);

  std::vector<Scene> scenes(a.n);
  parallel_for(a.n, c.workers, [&](int i) {
    scenes[i] = generate_scene(derive_seed(c.seed, static_cast<std::uint64_t>(i)), s.generator);
  });

  // Build next to the target, then swap it in with one rename.
  const fs::path staging = out.string() + fmt::format(".tmp-{}", ::getpid());
  fs::remove_all(staging);
  fs::create_directories(staging);
  for (const auto& scene : scenes) {
    write_text_atomic(staging / (scene.scene_id + ".scene.json"), serialize_scene(scene));
  }
  std::error_code ec;
  if (fs::exists(out)) fs::remove_all(out, ec);
  fs::rename(staging, out, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot move {} into place: {}", out.string(), ec.message()));
  fmt::print("{} scenes written to {}\n", scenes.size(), out.string());
  return 0;
}

// gen-qa

struct GenQaArgs {
  std::string scenes;
  std::string out;
  std::string stats;
  std::string target_dist;
  int per_scene = 0;
  bool no_filter = false;
};

int gen_qa(const Common& c, const GenQaArgs& a) {
  Settings s = resolve_settings(c);
  if (!a.target_dist.empty()) s.qa.type_weights = parse_type_distribution(a.target_dist);
  if (a.per_scene > 0) s.qa_per_scene = a.per_scene;
  announce("gen-qa", c, Json{{"qa", cli::to_json(s.qa, s.qa_per_scene)}, {"filter", !a.no_filter}});
  check_writable(a.out, c.force);
  if (!a.stats.empty()) check_writable(a.stats, c.force);

  const std::vector<Scene> scenes = load_scenes(a.scenes);
  if (scenes.empty()) throw Error(ErrorCode::InvalidArgument, fmt::format("no scenes in {}", a.scenes));
  std::vector<FilterResult> results(scenes.size());
  parallel_for(static_cast<int>(scenes.size()), c.workers, [&](int i) {
    const Scene& scene = scenes[i];
    auto items = generate_qa(scene, s.qa_per_scene, derive_seed(c.seed, scene.scene_id), s.qa);
    if (a.no_filter) {
      results[i].kept = std::move(items);
      return;
    }
    std::vector<ReplayedItem> replayed;
    for (auto& qa : items) {
      std::string answer = replay_answer(scene, qa);
      replayed.push_back({std::move(qa), std::move(answer)});
    }
    results[i] = quality_filter(scene, replayed, s.qa.min_visible_pixels, s.qa.view_resolution);
  });

  std::vector<QAItem> kept;
  std::vector<Rejection> rejected;
  std::string text;
  for (auto& r : results) {
    for (auto& qa : r.kept) {
      text += canonical_dump(to_json(qa)) + "\n";
      kept.push_back(std::move(qa));
    }
    rejected.insert(rejected.end(), r.rejected.begin(), r.rejected.end());
  }
  write_text_atomic(a.out, text);
  const std::string stats = canonical_dump(to_json(qa_stats(kept, rejected))) + "\n";
  if (!a.stats.empty()) write_text_atomic(a.stats, stats);
  std::cout << stats;
  return 0;
}

// gen-traj

struct GenTrajArgs {
  std::string scenes;
  std::string qa;
  std::string out;
  std::string stats;
  std::optional<double> inject_rate;
  std::optional<double> progressive_share;
  bool zero_jitter = false;
};

int gen_traj(const Common& c, const GenTrajArgs& a) {
  Settings s = resolve_settings(c);
  if (a.inject_rate) s.forge.inject_rate = *a.inject_rate;
  if (a.progressive_share) s.forge.progressive_share = *a.progressive_share;
  if (a.zero_jitter) s.forge.zero_jitter = true;
  s.forge.workers = c.workers;
  for (double p : {s.forge.inject_rate, s.forge.progressive_share}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "injection rates must lie in [0, 1]");
  }
  announce("gen-traj", c, Json{{"forge", cli::to_json(s.forge)}, {"env", cli::to_json(s.env)}});
  check_writable(a.out, c.force);
  if (!a.stats.empty()) check_writable(a.stats, c.force);

  std::vector<QAItem> items;
  const Environment env = make_env(s, a.scenes, a.qa, &items);
  if (items.empty()) throw Error(ErrorCode::InvalidArgument, "QA set is empty");
  const auto records = synth_corpus(env, items, c.seed, s.forge);
  std::string text;
  for (const auto& r : records) text += canonical_dump(to_json(r)) + "\n";
  write_text_atomic(a.out, text);
  const std::string stats = canonical_dump(to_json(corpus_stats(records))) + "\n";
  if (!a.stats.empty()) write_text_atomic(a.stats, stats);
  std::cout << stats;
  return 0;
}

// serve

struct ServeArgs {
  std::string scenes;
  std::string qa;
  bool stdio = false;
  std::string bind;
};

int serve(const Common& c, const ServeArgs& a) {
  const Settings s = resolve_settings(c);
  announce("serve", c, Json{{"env", cli::to_json(s.env)}, {"reward", to_json(s.reward)}});
  const Environment env = make_env(s, a.scenes, a.qa);
  if (a.stdio == !a.bind.empty()) throw Error(ErrorCode::InvalidArgument, "pass exactly one of --stdio or --bind");
  if (a.stdio) {
    serve_stream(env, s.reward, std::cin, std::cout);
    return 0;
  }
  TcpOptions opts;
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--bind expects host:port");
  opts.host = a.bind.substr(0, colon);
  try {
    opts.port = std::stoi(a.bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad port in '{}'", a.bind));
  }
  opts.on_listen = [&](int port) { fmt::print(stderr, "listening on {}:{}\n", opts.host, port); };
  serve_tcp(env, s.reward, opts);
  return 0;
}

// eval

struct EvalArgs {
  std::string scenes;
  std::string qa;
  std::string policy = "oracle";
  std::string client;
  std::string report;
  std::string log;
};

int eval(const Common& c, const EvalArgs& a) {
  const Settings s = resolve_settings(c);
  PolicySpec spec{parse_policy_kind(a.policy), c.seed, a.client};
  if (spec.kind == PolicyKind::ExternalClient && spec.command.empty()) {
    throw Error(ErrorCode::InvalidArgument, "--policy external needs --client");
  }
  announce("eval", c,
           Json{{"env", cli::to_json(s.env)}, {"reward", to_json(s.reward)}, {"policy", to_string(spec.kind)}});
  if (!a.report.empty()) check_writable(a.report, c.force);
  if (!a.log.empty()) check_writable(a.log, c.force);
  std::vector<QAItem> items;
  const Environment env = make_env(s, a.scenes, a.qa, &items);
  const EvalReport report = run_eval(env, items, spec, s.reward, c.workers);
  if (!a.report.empty()) write_text_atomic(a.report, to_json(report).dump(2) + "\n");
  if (!a.log.empty()) write_text_atomic(a.log, episode_log_jsonl(report));
  std::cout << render_table(report);
  return 0;
}

// reward-check

int reward_check(const Common& c) {
  const Settings s = resolve_settings(c);
  announce("reward-check", c, Json{{"reward", to_json(s.reward)}});
  const RewardConfig& cfg = s.reward;
  struct Case {
    std::string name;
    double got;
    double want;
  };
  const double ratio[] = {2.0}, adv[] = {1.0}, kl[] = {0.0};
  const std::vector<Case> cases = {
      {"explore_reward(c=0.1, n_u=3)", explore_reward(0.1, 3, cfg), 0.3},
      {"explore_reward(c=0.9, n_u=6)", explore_reward(0.9, 6, cfg), -0.2},
      {"explore_reward(c=0.5, n_u=5)", explore_reward(0.5, 5, cfg), 0.2},
      {"bbox_goal_reward(d=0.2)", bbox_goal_reward(0.2, cfg), std::exp(-0.5)},
      {"repetition_penalty(n=3)", repetition_penalty(3, cfg), -1.2},
      {"grpo_objective(ratio=2, A=1)", grpo_objective(ratio, adv, kl, cfg), 1.2},
  };
  bool ok = true;
  for (const auto& k : cases) {
    const bool pass = std::abs(k.got - k.want) < 1e-9;
    ok = ok && pass;
    fmt::print("{:<32} got {:>12.9f} want {:>12.9f}  {}\n", k.name, k.got, k.want, pass ? "PASS" : "FAIL");
  }
  fmt::print("{}\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

// stats

struct StatsArgs {
  std::string scenes;
  std::string qa;
  std::string traj;
};

int stats(const Common& c, const StatsArgs& a) {
  announce("stats", c, Json::object());
  Json out = Json::object();
  if (!a.scenes.empty()) {
    const auto scenes = load_scenes(a.scenes);
    int ok = 0;
    Json floors = Json::object(), rooms = Json::array(), area = Json::array();
    for (const auto& sc : scenes) {
      const bool valid = sc.floor_count() <= 3 && sc.room_count() >= 10 && sc.room_count() <= 20 && sc.total_area > 300.0;
      ok += valid;
      const std::string key = std::to_string(sc.floor_count());
      floors[key] = floors.value(key, 0) + 1;
      rooms.push_back(sc.room_count());
      area.push_back(sc.total_area);
    }
    out["scenes"] = Json{{"count", scenes.size()},
                         {"floors", floors},
                         {"rooms", rooms},
                         {"total_area", area},
                         {"within_bounds", ok},
                         {"within_bounds_fraction", scenes.empty() ? 0.0 : static_cast<double>(ok) / scenes.size()}};
  }
  if (!a.qa.empty()) out["qa"] = to_json(qa_stats(load_qa(a.qa)));
  if (!a.traj.empty()) {
    std::vector<TrainingRecord> records;
    for (const auto& j : read_jsonl(a.traj)) records.push_back(record_from_json(j));
    out["trajectories"] = to_json(corpus_stats(records));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "pass --scenes, --qa or --traj");
  std::cout << canonical_dump(out) << "\n";
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ProtocolError:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural house scenes, QA and trajectory synthesis, an episode server, and GRPO-style rewards."};
  app.name("spatial-arena");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Root seed")->envname("SPATIAL_ARENA_SEED");
    sub->add_option("--config", common.config, "TOML or JSON config")->envname("SPATIAL_ARENA_CONFIG");
    sub->add_option("--workers", common.workers, "Worker threads")
        ->envname("SPATIAL_ARENA_WORKERS")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--force", common.force, "Overwrite existing outputs");
  };
  auto scenes_opt = [](CLI::App* sub, std::string& dst, bool required) {
    auto* o = sub->add_option("--scenes", dst, "Directory of .scene.json files")->envname("SPATIAL_ARENA_SCENES");
    if (required) o->required();
  };
  auto qa_opt = [](CLI::App* sub, std::string& dst, bool required) {
    auto* o = sub->add_option("--qa", dst, "QA set (.jsonl)")->envname("SPATIAL_ARENA_QA");
    if (required) o->required();
  };

  GenScenesArgs gs;
  auto* cmd_scenes = app.add_subcommand("gen-scenes", "Generate procedural scenes");
  add_common(cmd_scenes);
  cmd_scenes->add_option("--n", gs.n, "Number of scenes");
  cmd_scenes->add_option("--out", gs.out, "Output directory")->required();

  GenQaArgs gq;
  auto* cmd_qa = app.add_subcommand("gen-qa", "Generate and quality-filter QA items");
  add_common(cmd_qa);
  scenes_opt(cmd_qa, gq.scenes, true);
  cmd_qa->add_option("--out", gq.out, "Output .jsonl")->required();
  cmd_qa->add_option("--stats", gq.stats, "Also write stats JSON here");
  cmd_qa->add_option("--per-scene", gq.per_scene, "Items generated per scene");
  cmd_qa->add_option("--target-dist", gq.target_dist,
                     "Type weights: position,color,material,counting,shape,state");
  cmd_qa->add_flag("--no-filter", gq.no_filter, "Skip the quality filter");

  GenTrajArgs gt;
  auto* cmd_traj = app.add_subcommand("gen-traj", "Synthesize training trajectories");
  add_common(cmd_traj);
  scenes_opt(cmd_traj, gt.scenes, true);
  qa_opt(cmd_traj, gt.qa, true);
  cmd_traj->add_option("--out", gt.out, "Output .traj.jsonl")->required();
  cmd_traj->add_option("--stats", gt.stats, "Also write stats JSON here");
  cmd_traj->add_option("--inject-rate", gt.inject_rate, "Fraction of records with an injected error");
  cmd_traj->add_option("--progressive-share", gt.progressive_share, "Progressive share of injected records");
  cmd_traj->add_flag("--zero-jitter", gt.zero_jitter, "Clean calls use the exact ground truth");

  ServeArgs sv;
  auto* cmd_serve = app.add_subcommand("serve", "Run the NDJSON episode server");
  add_common(cmd_serve);
  scenes_opt(cmd_serve, sv.scenes, true);
  qa_opt(cmd_serve, sv.qa, true);
  cmd_serve->add_flag("--stdio", sv.stdio, "Serve on stdin/stdout");
  cmd_serve->add_option("--bind", sv.bind, "host:port for TCP")->envname("SPATIAL_ARENA_BIND");

  EvalArgs ev;
  auto* cmd_eval = app.add_subcommand("eval", "Evaluate a policy on a QA set");
  add_common(cmd_eval);
  scenes_opt(cmd_eval, ev.scenes, true);
  qa_opt(cmd_eval, ev.qa, true);
  cmd_eval->add_option("--policy", ev.policy, "oracle | random | bev-only | external");
  cmd_eval->add_option("--client", ev.client, "Command for --policy external");
  cmd_eval->add_option("--report", ev.report, "Write the JSON report here");
  cmd_eval->add_option("--log", ev.log, "Write the episode log (.jsonl) here");

  auto* cmd_check = app.add_subcommand("reward-check", "Evaluate the reward kernels on worked examples");
  add_common(cmd_check);

  StatsArgs st;
  auto* cmd_stats = app.add_subcommand("stats", "Summarize scenes, QA sets or trajectory corpora");
  add_common(cmd_stats);
  scenes_opt(cmd_stats, st.scenes, false);
  qa_opt(cmd_stats, st.qa, false);
  cmd_stats->add_option("--traj", st.traj, "Trajectory corpus (.traj.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*cmd_scenes) return gen_scenes(common, gs);
    if (*cmd_qa) return gen_qa(common, gq);
    if (*cmd_traj) return gen_traj(common, gt);
    if (*cmd_serve) return serve(common, sv);
    if (*cmd_eval) return eval(common, ev);
    if (*cmd_check) return reward_check(common);
    if (*cmd_stats) return stats(common, st);
  } catch (const Error& e) {
    std::cerr << Json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "io"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 2;
}
