#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "edd/engine.hpp"

namespace edd {

struct UpdateTarget {
  Room room;
};
struct SetDimensions {
  std::vector<DimensionDescriptor> dims;
};
struct Start {};
struct Stop {};

struct Snapshot {
  std::uint64_t generation = 0;
  bool running = false;
  Room target;
  Archive archive;
};

struct RequestSnapshot {
  // When set, the snapshot is delivered here instead of as an event.
  std::shared_ptr<std::promise<Snapshot>> reply;
};

using EngineCommand = std::variant<UpdateTarget, SetDimensions, Start, Stop, RequestSnapshot>;

struct CellUpdates {
  std::uint64_t generation = 0;
  std::vector<DimensionDescriptor> dims;  // layout the indices refer to
  bool complete = false;                  // lists every occupied cell
  std::vector<CellUpdate> cells;
};

struct CommandRejected {
  std::uint64_t generation = 0;
  std::string message;
};

using EngineEvent = std::variant<ElitesBroadcast, CellUpdates, Snapshot, CommandRejected>;
using EventSink = std::function<void(EngineEvent)>;

// Deterministic driver: commands queue up and are applied in order at the
// next generation boundary. Same seed + same command schedule gives the same
// event sequence.
class EvolutionLoop {
 public:
  EvolutionLoop(EngineConfig cfg, Room target, EventSink sink);

  void submit(EngineCommand command);
  // Applies queued commands in order without running a generation.
  void apply_pending();
  // Applies pending commands, then runs one generation if running. Returns
  // whether a generation ran.
  bool tick();

  bool running() const noexcept { return running_; }
  const Engine& engine() const noexcept { return engine_; }
  Engine& engine() noexcept { return engine_; }

 private:
  void apply(EngineCommand& command);
  void emit(EngineEvent event);

  Engine engine_;
  EventSink sink_;
  std::deque<EngineCommand> pending_;
  bool running_ = false;
};

// Runs an EvolutionLoop on a worker thread. Commands can be submitted from any
// thread; events are delivered on the worker thread.
class ContinuousRunner {
 public:
  ContinuousRunner(EngineConfig cfg, Room target, EventSink sink);
  ~ContinuousRunner();

  ContinuousRunner(const ContinuousRunner&) = delete;
  ContinuousRunner& operator=(const ContinuousRunner&) = delete;

  void submit(EngineCommand command);
  std::future<Snapshot> request_snapshot();
  // Blocks until the worker has exited; queued commands are dropped.
  void shutdown();

 private:
  void run();

  std::mutex mutex_;
  std::condition_variable wake_;
  std::deque<EngineCommand> inbox_;
  bool running_ = false;
  bool quit_ = false;
  std::unique_ptr<EvolutionLoop> loop_;
  std::thread worker_;
};

}  // namespace edd
