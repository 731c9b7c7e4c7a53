#include "guided/session/server.hpp"

#include <deque>
#include <mutex>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace guided::session {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection;

// The only path from manager threads back into a connection. Once the server
// closes it, replies are dropped, so nothing outside the io threads touches
// a connection or its executor after shutdown begins.
struct Outlet {
  std::mutex mu;
  bool open = true;
  std::weak_ptr<Connection> connection;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, SessionManager& manager, std::shared_ptr<Outlet> outlet)
      : ws_(std::move(socket)), manager_(manager), outlet_(std::move(outlet)) {}

  void start() {
    {
      std::lock_guard lock(outlet_->mu);
      outlet_->connection = weak_from_this();
    }
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(64 * 1024 * 1024);
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  // Thread-safe; writes are queued on the connection's strand.
  void send_text(std::string text) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->queue_.push_back(std::move(text));
      if (self->queue_.size() == 1) self->write_next();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (ec != websocket::error::closed) spdlog::debug("connection closed: {}", ec.message());
      return;
    }
    const auto data = buffer_.cdata();
    const auto* bytes = static_cast<const std::uint8_t*>(data.data());
    try {
      if (ws_.got_binary()) {
        frames_.put(decode_frame({bytes, data.size()}));
      } else {
        dispatch(decode_control({reinterpret_cast<const char*>(bytes), data.size()}));
      }
    } catch (const Error& e) {
      send_text(encode_control(error_message({}, e)));
    }
    buffer_.consume(buffer_.size());
    read_next();
  }

  void dispatch(ProtocolMessage m) {
    if (!is_client_kind(m.kind)) {
      throw Error(ErrorCode::kProtocolError, fmt::format("{} is a server message", kind_name(m.kind)));
    }
    FrameStore frames = referenced_frames(m, frames_);
    manager_.submit(std::move(m), std::move(frames), [outlet = outlet_](const ProtocolMessage& reply) {
      std::lock_guard lock(outlet->mu);
      if (!outlet->open) return;
      if (auto self = outlet->connection.lock()) self->send_text(encode_control(reply));
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->queue_.clear();
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write_next();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  SessionManager& manager_;
  std::shared_ptr<Outlet> outlet_;
  beast::flat_buffer buffer_;
  FrameStore frames_;
  std::deque<std::string> queue_;
};

}  // namespace

struct GuidanceServer::Impl {
  Impl(SessionManager& m, ServerOptions o) : manager(m), options(std::move(o)), acceptor(ioc) {}

  void accept_next() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto outlet = std::make_shared<Outlet>();
      {
        std::lock_guard lock(outlets_mu);
        std::erase_if(outlets, [](const auto& o) { return o.expired(); });
        outlets.push_back(outlet);
      }
      std::make_shared<Connection>(std::move(socket), manager, std::move(outlet))->start();
      accept_next();
    });
  }

  void close_outlets() {
    std::lock_guard lock(outlets_mu);
    for (const auto& weak : outlets) {
      if (auto o = weak.lock()) {
        std::lock_guard outlet_lock(o->mu);
        o->open = false;
      }
    }
  }

  SessionManager& manager;
  std::mutex outlets_mu;
  std::vector<std::weak_ptr<Outlet>> outlets;
  ServerOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::thread> threads;
};

GuidanceServer::GuidanceServer(SessionManager& manager, ServerOptions options)
    : impl_(std::make_unique<Impl>(manager, std::move(options))) {
  beast::error_code ec;
  const tcp::endpoint ep(asio::ip::make_address(impl_->options.address, ec), impl_->options.port);
  if (ec) throw Error(ErrorCode::kConfigError, "bad listen address " + impl_->options.address);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep, ec);
  if (ec) throw Error(ErrorCode::kIoError, fmt::format("cannot listen on {}: {}", impl_->options.address, ec.message()));
  impl_->acceptor.listen();
}

GuidanceServer::~GuidanceServer() { stop(); }

void GuidanceServer::start() {
  impl_->accept_next();
  for (std::size_t i = 0; i < std::max<std::size_t>(1, impl_->options.io_threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  }
  spdlog::info("gr/1 server listening on {}:{}", impl_->options.address, port());
}

void GuidanceServer::stop() {
  impl_->close_outlets();
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

unsigned short GuidanceServer::port() const { return impl_->acceptor.local_endpoint().port(); }

struct GuidanceClient::Impl {
  asio::io_context ioc;
  std::optional<websocket::stream<beast::tcp_stream>> ws;
  beast::flat_buffer buffer;
  bool reading = false;
  bool read_done = false;
  beast::error_code read_ec;
};

GuidanceClient::GuidanceClient() : impl_(std::make_unique<Impl>()) {}
GuidanceClient::~GuidanceClient() { close(); }

void GuidanceClient::connect(const std::string& host, unsigned short port) {
  try {
    tcp::resolver resolver(impl_->ioc);
    impl_->ws.emplace(impl_->ioc);
    beast::get_lowest_layer(*impl_->ws).connect(resolver.resolve(host, std::to_string(port)));
    impl_->ws->read_message_max(64 * 1024 * 1024);
    impl_->ws->handshake(host, "/");
  } catch (const std::exception& e) {
    impl_->ws.reset();
    throw Error(ErrorCode::kRelayUnavailable, fmt::format("cannot reach {}:{}: {}", host, port, e.what()));
  }
}

void GuidanceClient::close() {
  if (!impl_->ws) return;
  beast::error_code ec;
  beast::get_lowest_layer(*impl_->ws).socket().close(ec);
  impl_->ioc.restart();
  impl_->ioc.poll();
  impl_->ws.reset();
  impl_->reading = false;
}

bool GuidanceClient::connected() const { return impl_->ws.has_value() && impl_->ws->is_open(); }

void GuidanceClient::send(const Envelope& e) {
  if (const auto* m = std::get_if<ProtocolMessage>(&e.body)) {
    send_message(*m);
  } else {
    send_frame(std::get<BinaryFrame>(e.body));
  }
}

void GuidanceClient::send_message(const ProtocolMessage& m) {
  if (!connected()) throw Error(ErrorCode::kRelayUnavailable, "not connected");
  impl_->ws->text(true);
  impl_->ws->write(asio::buffer(encode_control(m)));
}

void GuidanceClient::send_frame(const BinaryFrame& f) {
  if (!connected()) throw Error(ErrorCode::kRelayUnavailable, "not connected");
  impl_->ws->binary(true);
  impl_->ws->write(asio::buffer(encode_frame(f)));
}

std::optional<ProtocolMessage> GuidanceClient::receive(std::chrono::milliseconds timeout) {
  if (!connected()) throw Error(ErrorCode::kRelayUnavailable, "not connected");
  if (!impl_->reading) {
    impl_->reading = true;
    impl_->read_done = false;
    impl_->ws->async_read(impl_->buffer, [this](beast::error_code ec, std::size_t) {
      impl_->read_ec = ec;
      impl_->read_done = true;
    });
  }
  impl_->ioc.restart();
  impl_->ioc.run_for(timeout);
  if (!impl_->read_done) return std::nullopt;
  impl_->reading = false;
  if (impl_->read_ec) throw Error(ErrorCode::kRelayUnavailable, "connection lost: " + impl_->read_ec.message());
  const std::string text = beast::buffers_to_string(impl_->buffer.cdata());
  impl_->buffer.consume(impl_->buffer.size());
  return decode_control(text);
}

}  // namespace guided::session
