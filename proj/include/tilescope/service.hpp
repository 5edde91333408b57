#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tilescope/explorer.hpp"
#include "tilescope/json_io.hpp"

namespace tilescope {

struct ServiceResponse {
  int status = 200;
  Json body;
};

struct ServiceOptions {
  EngineConfig engine;  // defaults for sessions that do not override them
  InitConfig init;
  std::size_t max_points = 20'000;
};

// Request handling without the transport. Sessions are independent; queries
// within one session never overlap (a second concurrent one gets 409).
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();

  ServiceResponse health() const;
  ServiceResponse register_dataset(const std::string& body);
  ServiceResponse create_session(const std::string& body);
  ServiceResponse query(const std::string& session_id, const std::string& body);
  ServiceResponse index_stats(const std::string& session_id);

  // Called with the session id while that session's execution lock is held.
  void set_before_execute(std::function<void(const std::string&)> hook) { before_execute_ = std::move(hook); }

 private:
  struct Session;
  std::shared_ptr<Session> find_session(const std::string& id);

  ServiceOptions options_;
  std::mutex mutex_;
  std::map<std::string, DatasetDescriptor> datasets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_dataset_ = 1;
  std::uint64_t next_session_ = 1;
  std::function<void(const std::string&)> before_execute_;
};

// HTTP/1.1 front end over a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Uniformly thinned axis values of the objects inside the window.
Json region_points(const TileIndex& index, const Interval& qx, const Interval& qy, std::size_t cap);

}  // namespace tilescope
