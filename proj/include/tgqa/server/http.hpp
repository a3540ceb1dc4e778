#pragma once

#include <memory>
#include <string>

#include "tgqa/server/sessions.hpp"

namespace httplib {
class Server;
}

namespace tgqa::server {

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Directory served at "/" when non-empty.
  std::string static_dir;
};

/// JSON endpoints over a SessionManager:
///   GET /tables, GET /tables/{id}
///   POST /sessions, POST /sessions/{id}/ask, POST /sessions/{id}/reset
///   DELETE /sessions/{id}, GET /sessions/{id}/debug/graph
/// Errors are {"error", "detail"} objects with 4xx/5xx statuses.
class HttpServer {
 public:
  HttpServer(std::shared_ptr<SessionManager> sessions, HttpOptions options);
  ~HttpServer();

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind();
  /// Serves until stop() is called. bind() must have succeeded.
  void listen();
  void stop();
  int port() const { return port_; }

 private:
  std::shared_ptr<SessionManager> sessions_;
  HttpOptions options_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = -1;
};

}  // namespace tgqa::server
