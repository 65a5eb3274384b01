#include "awaire/service.hpp"

#include <httplib.h>

namespace awaire {

namespace {

void send_json(httplib::Response& res, int code, const Json& body) {
  res.status = code;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int code, const std::string& message) {
  send_json(res, code, Json{{"error", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFound& e) {
    send_error(res, 404, e.what());
  } catch (const SessionClosed& e) {
    send_error(res, 409, e.what());
  } catch (const Json::parse_error& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

struct AuditService::Impl {
  explicit Impl(SessionStore& s) : store(s) {}

  SessionStore& store;
  httplib::Server server;
};

AuditService::AuditService(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto& server = impl_->server;
  auto& store_ref = impl_->store;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  server.Post("/sessions", [&store_ref](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 201, store_ref.create(Json::parse(req.body))); });
  });
  server.Get(R"(/sessions/([0-9A-Za-z_-]+))",
             [&store_ref](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, store_ref.status(req.matches[1])); });
             });
  server.Post(R"(/sessions/([0-9A-Za-z_-]+)/ballots)",
              [&store_ref](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  send_json(res, 200, store_ref.submit(req.matches[1], Json::parse(req.body)));
                });
              });
  server.Get(R"(/sessions/([0-9A-Za-z_-]+)/log)",
             [&store_ref](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 res.status = 200;
                 res.set_content(store_ref.log(req.matches[1]), "application/x-ndjson");
               });
             });
}

AuditService::~AuditService() { stop(); }

int AuditService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool AuditService::listen() { return impl_->server.listen_after_bind(); }

void AuditService::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace awaire
