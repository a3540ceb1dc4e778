#include "tgqa/server/http.hpp"

#include <spdlog/spdlog.h>

#include "httplib.h"

#include "tgqa/io/graph_dump.hpp"

namespace tgqa::server {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& error, const std::string& detail) {
  send_json(res, status, {{"error", error}, {"detail", detail}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw InvalidExampleError(std::string("request body is not valid JSON: ") + e.what());
  }
}

/// Runs `fn`, mapping domain exceptions onto status codes.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const ModelUnavailableError& e) {
      send_error(res, 503, "model_not_loaded", e.what());
    } catch (const InvalidTableError& e) {
      send_error(res, 400, "invalid_table", e.what());
    } catch (const InvalidExampleError& e) {
      send_error(res, 400, "invalid_request", e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<SessionManager> sessions, HttpOptions options)
    : sessions_(std::move(sessions)), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  auto& s = *http_;
  auto sessions_ptr = sessions_;
  SessionManager& m = *sessions_ptr;
  // Handlers hold a reference; the manager outlives the server through sessions_.

  s.Get("/tables", guarded([&m](const httplib::Request&, httplib::Response& res) {
          json tables = json::array();
          for (const auto& id : m.tables().ids()) {
            const auto t = m.tables().get(id);
            tables.push_back({{"id", id}, {"num_rows", t->num_rows()}, {"num_cols", t->num_cols()}});
          }
          send_json(res, 200, {{"tables", tables}});
        }));

  s.Get(R"(/tables/(.+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          if (!m.tables().contains(id)) throw NotFoundError("unknown table '" + id + "'");
          send_json(res, 200, table_to_json(*m.tables().get(id)));
        }));

  s.Post("/sessions", guarded([&m](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           std::string id;
           if (body.contains("table")) {
             id = m.create_session(table_from_json(body.at("table"), body.value("table_name", "inline")));
           } else if (body.contains("table_id") && body.at("table_id").is_string()) {
             id = m.create_session(body.at("table_id").get<std::string>());
           } else {
             throw InvalidExampleError("request needs 'table_id' or 'table'");
           }
           send_json(res, 201, {{"session_id", id}, {"table", table_to_json(*m.session_table(id))}});
         }));

  s.Post(R"(/sessions/([^/]+)/ask)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           if (!body.contains("question") || !body.at("question").is_string()) {
             throw InvalidExampleError("request needs a string 'question'");
           }
           send_json(res, 200, to_json(m.ask(req.matches[1], body.at("question").get<std::string>())));
         }));

  s.Post(R"(/sessions/([^/]+)/reset)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
           m.reset(req.matches[1]);
           send_json(res, 200, {{"session_id", std::string(req.matches[1])}, {"turns", 0}});
         }));

  s.Delete(R"(/sessions/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
             m.remove(req.matches[1]);
             send_json(res, 200, {{"session_id", std::string(req.matches[1])}, {"deleted", true}});
           }));

  s.Get(R"(/sessions/([^/]+)/debug/graph)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
          const auto g = m.last_graph(req.matches[1]);
          if (!g) throw NotFoundError("session has no turns yet");
          const auto h = m.history(req.matches[1]);
          json j = io::graph_to_json(*g);
          j["example_id"] = std::string(req.matches[1]) + "#" + std::to_string(h.size());
          j["position"] = static_cast<int>(h.size());
          send_json(res, 200, j);
        }));

  s.Get(R"(/sessions/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
          json turns = json::array();
          for (const auto& t : m.history(req.matches[1])) turns.push_back(to_json(t));
          send_json(res, 200, {{"session_id", std::string(req.matches[1])}, {"turns", turns}});
        }));

  if (!options_.static_dir.empty() && !s.set_mount_point("/", options_.static_dir)) {
    throw Error("static directory " + options_.static_dir + " does not exist");
  }
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                 req.method + " " + req.path);
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  port_ = options_.port == 0 ? http_->bind_to_any_port(options_.host) : options_.port;
  if (options_.port != 0 && !http_->bind_to_port(options_.host, options_.port)) port_ = -1;
  if (port_ < 0) throw Error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  return port_;
}

void HttpServer::listen() {
  if (port_ < 0) throw Error("listen called before bind");
  http_->listen_after_bind();
}

void HttpServer::stop() {
  if (http_) http_->stop();
}

}  // namespace tgqa::server
