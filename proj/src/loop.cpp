#include "edd/loop.hpp"

#include "edd/errors.hpp"

namespace edd {

EvolutionLoop::EvolutionLoop(EngineConfig cfg, Room target, EventSink sink)
    : engine_(std::move(cfg), std::move(target)), sink_(std::move(sink)) {}

void EvolutionLoop::submit(EngineCommand command) { pending_.push_back(std::move(command)); }

void EvolutionLoop::emit(EngineEvent event) {
  if (sink_) sink_(std::move(event));
}

void EvolutionLoop::apply(EngineCommand& command) {
  std::visit(
      [this](auto& cmd) {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, UpdateTarget>) {
          try {
            engine_.update_target(std::move(cmd.room));
          } catch (const Error& e) {
            emit(CommandRejected{engine_.generation(), e.what()});
          }
        } else if constexpr (std::is_same_v<T, SetDimensions>) {
          try {
            engine_.set_dimensions(std::move(cmd.dims));
          } catch (const Error& e) {
            emit(CommandRejected{engine_.generation(), e.what()});
          }
        } else if constexpr (std::is_same_v<T, Start>) {
          running_ = true;
        } else if constexpr (std::is_same_v<T, Stop>) {
          running_ = false;
        } else {
          Snapshot snap{engine_.generation(), running_, engine_.target(), engine_.archive()};
          if (cmd.reply) {
            cmd.reply->set_value(std::move(snap));
          } else {
            emit(std::move(snap));
          }
        }
      },
      command);
}

void EvolutionLoop::apply_pending() {
  while (!pending_.empty()) {
    auto command = std::move(pending_.front());
    pending_.pop_front();
    apply(command);
  }
}

bool EvolutionLoop::tick() {
  apply_pending();
  if (!running_) return false;
  engine_.step();
  const bool complete = engine_.cell_updates_complete();
  auto updates = engine_.take_cell_updates();
  if (engine_.broadcast_due()) {
    // The broadcast carries the full grid; incremental updates for this
    // generation are folded into it.
    emit(engine_.broadcast_and_reseed());
  } else if (complete || !updates.empty()) {
    emit(CellUpdates{engine_.generation(), engine_.dimensions(), complete, std::move(updates)});
  }
  return true;
}

ContinuousRunner::ContinuousRunner(EngineConfig cfg, Room target, EventSink sink)
    : loop_(std::make_unique<EvolutionLoop>(std::move(cfg), std::move(target), std::move(sink))),
      worker_([this] { run(); }) {}

ContinuousRunner::~ContinuousRunner() { shutdown(); }

namespace {

void fail_snapshot(EngineCommand& command) {
  if (auto* req = std::get_if<RequestSnapshot>(&command); req && req->reply) {
    req->reply->set_exception(std::make_exception_ptr(PreconditionError("runner stopped")));
  }
}

}  // namespace

void ContinuousRunner::submit(EngineCommand command) {
  {
    std::lock_guard lock(mutex_);
    if (quit_) {
      fail_snapshot(command);
      return;
    }
    inbox_.push_back(std::move(command));
  }
  wake_.notify_one();
}

std::future<Snapshot> ContinuousRunner::request_snapshot() {
  auto promise = std::make_shared<std::promise<Snapshot>>();
  auto future = promise->get_future();
  submit(RequestSnapshot{std::move(promise)});
  return future;
}

void ContinuousRunner::shutdown() {
  {
    std::lock_guard lock(mutex_);
    quit_ = true;
  }
  wake_.notify_one();
  if (worker_.joinable()) worker_.join();
}

void ContinuousRunner::run() {
  for (;;) {
    std::deque<EngineCommand> batch;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [this] { return quit_ || !inbox_.empty() || loop_->running(); });
      if (quit_) break;
      batch.swap(inbox_);
    }
    for (auto& command : batch) loop_->submit(std::move(command));
    loop_->tick();
  }
  // Unblock anyone still waiting on a snapshot.
  std::lock_guard lock(mutex_);
  for (auto& command : inbox_) fail_snapshot(command);
  inbox_.clear();
}

}  // namespace edd
