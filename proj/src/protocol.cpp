#include "spatial_arena/protocol.hpp"

#include <arpa/inet.h>
#include <fmt/format.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <istream>
#include <ostream>
#include <thread>

namespace arena {

Json images_json(const std::vector<Image>& images) {
  Json out = Json::array();
  for (const auto& img : images) {
    out.push_back(Json{{"b64_ppm", base64_encode(to_ppm(img))}, {"hash", content_hash(img)}});
  }
  return out;
}

std::vector<Image> images_from_json(const Json& images) {
  std::vector<Image> out;
  for (const auto& j : images) out.push_back(from_ppm(base64_decode(j.at("b64_ppm").get<std::string>())));
  return out;
}

ToolCall parse_client_call(const Json& msg) {
  const std::string type = msg.is_object() && msg.contains("type") && msg["type"].is_string()
                               ? msg["type"].get<std::string>()
                               : std::string();
  if (type == "tool") return tool_call_from_json(msg);
  if (type == "answer") {
    if (!msg.contains("text") || !msg["text"].is_string()) {
      throw Error(ErrorCode::ProtocolError, "answer needs a string \"text\"");
    }
    return ToolCall{Answer{msg["text"].get<std::string>()}, 0};
  }
  throw Error(ErrorCode::ProtocolError, fmt::format("expected a tool or answer message, got type '{}'", type));
}

Json observation_message(const Observation& obs) {
  Json j{{"v", kProtocolVersion}, {"type", "obs"}, {"images", images_json(obs.images)}, {"note", obs.note}};
  j["clamped"] = obs.clamped;
  j["error"] = obs.error;
  return j;
}

Json error_message(const Error& e) {
  return Json{{"v", kProtocolVersion}, {"type", "error"}, {"code", to_string(e.code())}, {"message", e.what()}};
}

ProtocolConnection::ProtocolConnection(const Environment& env, const RewardConfig& reward)
    : env_(env), reward_(reward) {}

std::string ProtocolConnection::handle_line(std::string_view line) {
  Json response;
  try {
    response = handle(parse_json(line));
  } catch (const Error& e) {
    response = error_message(Error(ErrorCode::ProtocolError, e.what()));
  }
  return response.dump();
}

Json ProtocolConnection::handle(const Json& msg) {
  Json out;
  try {
    if (!msg.is_object()) throw Error(ErrorCode::ProtocolError, "message must be a JSON object");
    if (msg.contains("v") && msg["v"] != kProtocolVersion) {
      throw Error(ErrorCode::ProtocolError, fmt::format("unsupported protocol version {}", msg["v"].dump()));
    }
    const std::string type = msg.contains("type") && msg["type"].is_string() ? msg["type"].get<std::string>() : "";
    if (type == "hello") {
      out = Json{{"v", kProtocolVersion}, {"type", "hello"}, {"server", "spatial-arena"}};
    } else if (type == "start") {
      out = start(msg);
    } else if (type == "tool" || type == "answer") {
      out = step(msg, parse_client_call(msg));
    } else if (type == "group") {
      out = group(msg);
    } else {
      throw Error(ErrorCode::ProtocolError, fmt::format("unknown message type '{}'", type));
    }
  } catch (const Error& e) {
    out = error_message(e);
  }
  if (msg.is_object() && msg.contains("id")) out["id"] = msg["id"];
  return out;
}

Json ProtocolConnection::start(const Json& msg) {
  if (!msg.contains("scene") || !msg["scene"].is_string() || !msg.contains("qa") || !msg["qa"].is_string()) {
    throw Error(ErrorCode::ProtocolError, "start needs string \"scene\" and \"qa\"");
  }
  const std::string id = fmt::format("s{}", ++counter_);
  Session s;
  s.state = env_.start_episode(msg["scene"].get<std::string>(), msg["qa"].get<std::string>(), id);
  if (msg.contains("group")) {
    if (!msg["group"].is_string()) throw Error(ErrorCode::ProtocolError, "group label must be a string");
    s.group = msg["group"].get<std::string>();
  }
  Json out = observation_message(s.state.current);
  out["session"] = id;
  out["step"] = 0;
  out["budget"] = env_.config().step_budget;
  out["question"] = s.state.question;
  sessions_.emplace(id, std::move(s));
  order_.push_back(id);
  last_ = id;
  return out;
}

ProtocolConnection::Session& ProtocolConnection::session_for(const Json& msg) {
  std::string id = last_;
  if (msg.contains("session")) {
    if (!msg["session"].is_string()) throw Error(ErrorCode::ProtocolError, "session must be a string");
    id = msg["session"].get<std::string>();
  }
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::ProtocolError, id.empty() ? "no session started" : fmt::format("unknown session '{}'", id));
  }
  return it->second;
}

Json ProtocolConnection::step(const Json& msg, const ToolCall& call) {
  Session& s = session_for(msg);
  const Observation obs = env_.step(s.state, call);
  if (s.state.terminated) return done_message(s.state.episode_id, s);
  Json out = observation_message(obs);
  out["session"] = s.state.episode_id;
  out["step"] = s.state.t;
  out["history"] = Json::array();
  for (const auto& h : s.state.history) {
    Json entry = to_json(h.call);
    entry["obs"] = h.digest;
    out["history"].push_back(std::move(entry));
  }
  return out;
}

Json ProtocolConnection::done_message(const std::string& id, const Session& s) const {
  const QAItem& qa = env_.qa(s.state.qa_id);
  const TrajectoryFeatures f = extract_features(s.state, env_.config().bev_resolution, reward_);
  const RewardBreakdown b = total_reward(f, s.state.correct ? 1.0 : 0.0, qa, reward_);
  Json out{{"v", kProtocolVersion}, {"type", "done"}, {"session", id}, {"correct", s.state.correct}};
  out["answer"] = s.state.answer.value_or("");
  out["termination"] = to_string(s.state.termination);
  out["tool_calls"] = s.state.tool_calls();
  out["reward"] = to_json(b);
  out["trajectory"] = to_json(to_trajectory(s.state));
  return out;
}

Json ProtocolConnection::group(const Json& msg) {
  if (!msg.contains("group") || !msg["group"].is_string()) {
    throw Error(ErrorCode::ProtocolError, "group request needs a string \"group\"");
  }
  const std::string label = msg["group"].get<std::string>();
  std::vector<TrajectoryFeatures> features;
  Json ids = Json::array();
  const QAItem* qa = nullptr;
  for (const auto& id : order_) {
    const Session& s = sessions_.at(id);
    if (s.group != label) continue;
    if (!s.state.terminated) throw Error(ErrorCode::ProtocolError, fmt::format("session {} has not finished", id));
    const QAItem& item = env_.qa(s.state.qa_id);
    if (qa && qa->qa_id != item.qa_id) {
      throw Error(ErrorCode::ProtocolError, fmt::format("group '{}' mixes QA items", label));
    }
    qa = &item;
    features.push_back(extract_features(s.state, env_.config().bev_resolution, reward_));
    ids.push_back(id);
  }
  if (features.size() < 2) {
    throw Error(ErrorCode::ProtocolError, fmt::format("group '{}' has {} finished sessions, need >= 2", label,
                                                      features.size()));
  }
  const GroupRewards g = score_group(features, *qa, reward_);
  Json out = to_json(g);
  out["v"] = kProtocolVersion;
  out["type"] = "group_rewards";
  out["group"] = label;
  out["sessions"] = ids;
  return out;
}

void serve_stream(const Environment& env, const RewardConfig& reward, std::istream& in, std::ostream& out) {
  ProtocolConnection conn(env, reward);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    out << conn.handle_line(line) << '\n' << std::flush;
  }
}

namespace {

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

void serve_connection(const Environment& env, const RewardConfig& reward, int fd) {
  ProtocolConnection conn(env, reward);
  std::string buffer;
  char chunk[65536];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!send_all(fd, conn.handle_line(line) + "\n")) {
        ::close(fd);
        return;
      }
    }
  }
  ::close(fd);
}

}  // namespace

void serve_tcp(const Environment& env, const RewardConfig& reward, const TcpOptions& opts) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw Error(ErrorCode::Io, "cannot create socket");
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(opts.port));
  if (::inet_pton(AF_INET, opts.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listener);
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad IPv4 address '{}'", opts.host));
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listener, 64) != 0) {
    ::close(listener);
    throw Error(ErrorCode::Io, fmt::format("cannot bind {}:{}", opts.host, opts.port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (opts.on_listen) opts.on_listen(ntohs(addr.sin_port));

  std::vector<std::thread> workers;
  while (!(opts.stop && opts.stop->load())) {
    pollfd p{listener, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    workers.emplace_back(serve_connection, std::cref(env), std::cref(reward), fd);
  }
  ::close(listener);
  for (auto& t : workers) t.join();
}

}  // namespace arena
