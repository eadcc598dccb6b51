#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "edd/engine.hpp"

namespace edd {

inline constexpr std::string_view kProtocolName = "edd-session";
inline constexpr std::string_view kSchemaVersion = "1.0.0";

// The JSON schema describing every message, as shipped in protocol/.
std::string_view protocol_schema();

struct SessionOptions {
  EngineConfig engine{};
  // Evolve on a worker thread. When false the owner drives generations with
  // Session::tick(), which makes the event stream deterministic.
  bool background = true;
};

// One designer session: the dungeon being edited plus the evolution engine
// fed by it. Requests arrive as single JSON lines; responses and events leave
// through the writer, one JSON document per call, without a trailing newline.
// The writer is called from the caller's thread and, in background mode, from
// the engine worker; calls never overlap.
class Session {
 public:
  using Writer = std::function<void(const std::string&)>;

  Session(SessionOptions options, Writer writer);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Sends the hello event carrying the schema version.
  void open();
  // Handles one request line; always answers with exactly one response.
  void handle(std::string_view line);
  // Foreground mode only: applies queued commands and runs one generation if
  // evolution is started. Returns whether a generation ran.
  bool tick();
  // Stops the engine worker; later requests are still answered.
  void close();

  static const std::vector<std::string>& operations();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace edd
