#include "edd/tcp_server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <optional>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "edd/errors.hpp"
#include "json.hpp"

namespace edd {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using boost::system::error_code;

namespace {

constexpr auto kSniffWindow = std::chrono::milliseconds(200);
constexpr std::size_t kMaxLine = 16u << 20;

std::string busy_message() {
  return nlohmann::json{{"kind", "response"},
                        {"seq", nullptr},
                        {"op", ""},
                        {"ok", false},
                        {"error", {{"code", "session-busy"}, {"message", "another designer session is active"}}}}
      .dump();
}

// One client connection. All members are touched on the io_context thread
// only; the session worker reaches it through posted sends.
class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, asio::io_context& io, const SessionOptions& options, bool refuse,
             std::function<void()> on_closed)
      : io_(io),
        socket_(std::move(socket)),
        timer_(io),
        options_(options),
        refuse_(refuse),
        on_closed_(std::move(on_closed)) {}

  ~Connection() {
    if (session_) session_->close();
  }

  void start() {
    timer_.expires_after(kSniffWindow);
    timer_.async_wait([self = shared_from_this()](error_code ec) {
      if (!ec && self->mode_ == Mode::Unknown) self->become_line();
    });
    read_line_mode();
  }

  void send(std::string message) {
    if (closed_) return;
    outbox_.push_back(std::move(message));
    if (outbox_.size() == 1) write_next();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    error_code ignored;
    if (ws_) {
      beast::get_lowest_layer(*ws_).shutdown(tcp::socket::shutdown_both, ignored);
      beast::get_lowest_layer(*ws_).close(ignored);
    } else {
      socket_.shutdown(tcp::socket::shutdown_both, ignored);
      socket_.close(ignored);
    }
    if (session_) session_->close();
    if (on_closed_) std::exchange(on_closed_, nullptr)();
  }

 private:
  enum class Mode { Unknown, Line, WebSocket };

  void read_line_mode() {
    socket_.async_read_some(asio::buffer(chunk_), [self = shared_from_this()](error_code ec, std::size_t n) {
      if (ec || self->closed_) return self->close();
      self->inbox_.append(self->chunk_.data(), n);
      if (self->inbox_.size() > kMaxLine) return self->close();
      if (self->mode_ == Mode::Unknown) {
        const std::string_view get = "GET ";
        const auto head = std::string_view(self->inbox_).substr(0, get.size());
        if (head == get) return self->become_websocket();
        if (get.substr(0, head.size()) != head) self->become_line();
        // Otherwise still a prefix of "GET ": keep sniffing.
      }
      if (self->mode_ == Mode::Line) self->drain_lines();
      if (!self->closed_) self->read_line_mode();
    });
  }

  void become_line() {
    mode_ = Mode::Line;
    timer_.cancel();
    open_session();
  }

  void drain_lines() {
    for (auto nl = inbox_.find('\n'); nl != std::string::npos && !closed_; nl = inbox_.find('\n')) {
      std::string line = inbox_.substr(0, nl);
      inbox_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || !session_) continue;
      session_->handle(line);
    }
  }

  void become_websocket() {
    mode_ = Mode::WebSocket;
    timer_.cancel();
    ws_.emplace(std::move(socket_));
    ws_->text(true);
    ws_->async_accept(asio::buffer(inbox_), [self = shared_from_this()](error_code ec) {
      self->inbox_.clear();
      if (ec) return self->close();
      self->open_session();
      self->read_websocket();
    });
  }

  void read_websocket() {
    ws_->async_read(frame_, [self = shared_from_this()](error_code ec, std::size_t) {
      if (ec || self->closed_) return self->close();
      const std::string message = beast::buffers_to_string(self->frame_.data());
      self->frame_.consume(self->frame_.size());
      if (self->session_) self->session_->handle(message);
      self->read_websocket();
    });
  }

  void open_session() {
    if (refuse_) {
      send(busy_message());
      closing_after_write_ = true;
      return;
    }
    std::weak_ptr<Connection> weak = shared_from_this();
    auto& io = io_;
    session_ = std::make_unique<Session>(options_, [weak, &io](const std::string& message) {
      asio::post(io, [weak, message] {
        if (auto self = weak.lock()) self->send(message);
      });
    });
    session_->open();
  }

  void write_next() {
    auto done = [self = shared_from_this()](error_code ec, std::size_t) {
      if (ec) return self->close();
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) return self->write_next();
      if (self->closing_after_write_) self->close();
    };
    if (ws_) {
      ws_->async_write(asio::buffer(outbox_.front()), std::move(done));
    } else {
      outbox_.front().push_back('\n');
      asio::async_write(socket_, asio::buffer(outbox_.front()), std::move(done));
    }
  }

  asio::io_context& io_;
  tcp::socket socket_;
  std::optional<websocket::stream<tcp::socket>> ws_;
  asio::steady_timer timer_;
  SessionOptions options_;
  bool refuse_;
  std::function<void()> on_closed_;
  std::unique_ptr<Session> session_;

  Mode mode_ = Mode::Unknown;
  bool closed_ = false;
  bool closing_after_write_ = false;
  std::array<char, 4096> chunk_{};
  std::string inbox_;
  beast::flat_buffer frame_;
  std::deque<std::string> outbox_;
};

}  // namespace

struct SessionServer::Impl {
  SessionOptions options;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::weak_ptr<Connection> active;
  bool busy = false;

  Impl(SessionOptions opts, std::uint16_t port, const std::string& address)
      : options(std::move(opts)), acceptor(io) {
    validate(options.engine);
    error_code ec;
    const auto ip = asio::ip::make_address(address, ec);
    if (ec) throw PreconditionError("invalid listen address '" + address + "'");
    const tcp::endpoint endpoint(ip, port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw IoError("cannot listen on " + address + ":" + std::to_string(port) + ": " + ec.message());
  }

  void accept() {
    acceptor.async_accept([this](error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      const bool refuse = busy;
      std::function<void()> on_closed;
      if (!refuse) {
        busy = true;
        on_closed = [this] { busy = false; };
      }
      auto conn = std::make_shared<Connection>(std::move(socket), io, options, refuse, std::move(on_closed));
      if (!refuse) active = conn;
      conn->start();
      accept();
    });
  }
};

SessionServer::SessionServer(SessionOptions options, std::uint16_t port, const std::string& address)
    : impl_(std::make_unique<Impl>(std::move(options), port, address)) {}

SessionServer::~SessionServer() = default;

std::uint16_t SessionServer::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::run() {
  impl_->accept();
  impl_->io.run();
}

void SessionServer::stop() {
  asio::post(impl_->io, [impl = impl_.get()] {
    error_code ignored;
    impl->acceptor.close(ignored);
    if (auto conn = impl->active.lock()) conn->close();
    impl->io.stop();
  });
}

}  // namespace edd
