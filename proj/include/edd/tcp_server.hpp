#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "edd/session.hpp"

namespace edd {

// Serves one designer session at a time over TCP. A client either speaks
// newline-delimited JSON directly or opens with an HTTP WebSocket upgrade, in
// which case every text message carries one JSON document. A client that sends
// nothing within the sniffing window is treated as a line client. Further
// clients are refused with a "session-busy" error while a session is open.
class SessionServer {
 public:
  // Binds immediately; port 0 picks a free port.
  SessionServer(SessionOptions options, std::uint16_t port, const std::string& address = "127.0.0.1");
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  std::uint16_t port() const noexcept;
  // Blocks serving clients until stop().
  void run();
  // Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace edd
