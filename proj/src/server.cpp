#include <atomic>
#include <limits>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "kinesphere/error.hpp"
#include "kinesphere/service.hpp"

namespace kinesphere {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct TeleopServer::Impl {
  Impl(SessionManager& s, const std::string& address, unsigned short port)
      : sessions(s), acceptor(ioc, {net::ip::make_address(address), port}) {}

  void accept_loop();
  void serve(std::shared_ptr<tcp::socket> socket);
  void stream(tcp::socket& socket, http::request<http::string_body>& req, const std::string& session);

  SessionManager& sessions;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::atomic<bool> stopping{false};
  std::thread accept_thread;
  std::mutex mutex;
  std::vector<std::thread> workers;
  std::vector<std::weak_ptr<tcp::socket>> sockets;
};

TeleopServer::TeleopServer(SessionManager& sessions, const std::string& address, unsigned short port)
    : impl_(std::make_unique<Impl>(sessions, address, port)) {}

TeleopServer::~TeleopServer() { stop(); }

unsigned short TeleopServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void TeleopServer::start() {
  if (impl_->accept_thread.joinable()) return;
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

void TeleopServer::stop() {
  if (!impl_ || impl_->stopping.exchange(true)) return;
  if (impl_->accept_thread.joinable()) {
    // Wake the blocking accept with a throwaway connection.
    beast::error_code ec;
    net::io_context wake_ctx;
    tcp::socket wake(wake_ctx);
    auto endpoint = impl_->acceptor.local_endpoint();
    if (endpoint.address().is_unspecified()) endpoint.address(net::ip::make_address("127.0.0.1"));
    wake.connect(endpoint, ec);
    impl_->accept_thread.join();
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& weak : impl_->sockets)
      if (auto s = weak.lock()) {
        beast::error_code ec;
        s->shutdown(tcp::socket::shutdown_both, ec);
      }
    workers.swap(impl_->workers);
  }
  for (auto& t : workers) t.join();
  beast::error_code ec;
  impl_->acceptor.close(ec);
}

void TeleopServer::Impl::accept_loop() {
  while (!stopping) {
    auto socket = std::make_shared<tcp::socket>(ioc);
    beast::error_code ec;
    acceptor.accept(*socket, ec);
    if (stopping) break;
    if (ec) continue;
    std::lock_guard lock(mutex);
    sockets.push_back(socket);
    workers.emplace_back([this, socket] { serve(socket); });
  }
}

void TeleopServer::Impl::serve(std::shared_ptr<tcp::socket> socket) {
  beast::flat_buffer buffer;
  for (;;) {
    http::request<http::string_body> req;
    beast::error_code ec;
    http::read(*socket, buffer, req, ec);
    if (ec) break;

    std::string target(req.target());
    if (websocket::is_upgrade(req)) {
      auto q = target.find('?');
      std::string path = target.substr(0, q);
      const std::string prefix = "/sessions/", suffix = "/stream";
      if (path.size() > prefix.size() + suffix.size() && path.starts_with(prefix) && path.ends_with(suffix)) {
        std::string id = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
        try {
          sessions.state(id);
          stream(*socket, req, id);
          return;
        } catch (const Error&) {
        }
      }
      http::response<http::string_body> res{http::status::not_found, req.version()};
      res.set(http::field::content_type, "application/json");
      res.body() = R"({"error":{"code":"UnknownSession","message":"no stream at )" + path + R"("},"v":1})";
      res.prepare_payload();
      http::write(*socket, res, ec);
      break;
    }

    HttpReply reply = handle_request(sessions, std::string(req.method_string()), target, req.body());
    http::response<http::string_body> res{static_cast<http::status>(reply.status), req.version()};
    res.set(http::field::content_type, "application/json");
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.body() = reply.body.dump();
    res.prepare_payload();
    http::write(*socket, res, ec);
    if (ec || !res.keep_alive()) break;
  }
  beast::error_code ec;
  socket->shutdown(tcp::socket::shutdown_send, ec);
}

void TeleopServer::Impl::stream(tcp::socket& socket, http::request<http::string_body>& req, const std::string& id) {
  websocket::stream<tcp::socket&> ws(socket);
  beast::error_code ec;
  ws.accept(req, ec);
  if (ec) return;
  ws.text(true);
  const auto period = std::chrono::duration<double>(1.0 / sessions.options().tick_hz);
  std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
  while (!stopping) {
    // Client frames are only control traffic; reading them lets a close
    // handshake complete.
    if (socket.available(ec) > 0) {
      beast::flat_buffer incoming;
      ws.read(incoming, ec);
      if (ec) return;
      continue;
    }
    SessionState state;
    try {
      state = sessions.state(id);
    } catch (const Error&) {
      break;
    }
    if (last == std::numeric_limits<std::uint64_t>::max() || state.seq > last) {
      ws.write(net::buffer(sessions.state_message(id, state).dump()), ec);
      if (ec) return;
      last = state.seq;
    }
    std::this_thread::sleep_for(period / 4);
  }
  ws.close(websocket::close_code::going_away, ec);
}

}  // namespace kinesphere
