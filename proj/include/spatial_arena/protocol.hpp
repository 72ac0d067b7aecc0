#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spatial_arena/episode.hpp"
#include "spatial_arena/error.hpp"
#include "spatial_arena/reward.hpp"

namespace arena {

inline constexpr int kProtocolVersion = 1;

/// {"b64_ppm": ..., "hash": ...} per image.
Json images_json(const std::vector<Image>& images);
/// Decodes the images of an obs message.
std::vector<Image> images_from_json(const Json& images);

/// Tool call from a client message: {"type":"tool","name":...} or {"type":"answer","text":...}.
/// Throws Error{ProtocolError}.
ToolCall parse_client_call(const Json& msg);
Json observation_message(const Observation& obs);
Json error_message(const Error& e);

/// Per-connection protocol state: the sessions a client started, keyed by
/// connection-local ids "s1", "s2", ... Messages are handled strictly in order.
class ProtocolConnection {
 public:
  ProtocolConnection(const Environment& env, const RewardConfig& reward);

  /// One request line in, one response line out (no trailing newline).
  std::string handle_line(std::string_view line);
  Json handle(const Json& msg);

 private:
  struct Session {
    EpisodeState state;
    std::string group;
  };

  Json start(const Json& msg);
  Json step(const Json& msg, const ToolCall& call);
  Json group(const Json& msg);
  Session& session_for(const Json& msg);
  Json done_message(const std::string& id, const Session& s) const;

  const Environment& env_;
  RewardConfig reward_;
  std::map<std::string, Session> sessions_;
  std::vector<std::string> order_;
  std::string last_;
  int counter_ = 0;
};

/// Serves one NDJSON stream until EOF.
void serve_stream(const Environment& env, const RewardConfig& reward, std::istream& in, std::ostream& out);

struct TcpOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  /// Called once with the bound port before accepting.
  std::function<void(int)> on_listen;
  /// Polled between accepts; set to stop the server.
  const std::atomic<bool>* stop = nullptr;
};

/// Thread per connection. Returns after `stop` is set and open connections close.
/// Throws Error{Io} if the address cannot be bound.
void serve_tcp(const Environment& env, const RewardConfig& reward, const TcpOptions& opts);

}  // namespace arena
