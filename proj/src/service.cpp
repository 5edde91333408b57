#include "tilescope/service.hpp"

#include <filesystem>

#include "httplib.h"
#include "tilescope/error.hpp"

namespace tilescope {

struct Service::Session {
  std::string id;
  std::string dataset_id;
  std::mutex exec;
  Explorer explorer;
  std::vector<Json> history;

  Session(std::string sid, std::string did, const DatasetDescriptor& d, const EngineConfig& e, const InitConfig& i)
      : id(std::move(sid)), dataset_id(std::move(did)), explorer(d, e, i) {}
};

namespace {

ServiceResponse error_response(int status, const std::string& message) { return {status, Json{{"error", message}}}; }

Json parse_body(const std::string& body) {
  try {
    return body.empty() ? Json::object() : Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

template <typename Fn>
ServiceResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const NotFound& e) {
    return error_response(404, e.what());
  } catch (const InvalidArgument& e) {
    return error_response(400, e.what());
  } catch (const EmptyRegion& e) {
    return error_response(400, e.what());
  } catch (const Json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  options_.engine.validate();
  options_.init.validate();
}

Service::~Service() = default;

ServiceResponse Service::health() const { return {200, Json{{"status", "ok"}}}; }

ServiceResponse Service::register_dataset(const std::string& body) {
  return guarded([&]() -> ServiceResponse {
    const Json j = parse_body(body);
    if (j.is_object() && j.contains("file_path") && j.at("file_path").is_string() &&
        !std::filesystem::is_regular_file(j.at("file_path").get<std::string>())) {
      return error_response(404, "no such file: " + j.at("file_path").get<std::string>());
    }
    DatasetDescriptor d = dataset_from_json(j);
    std::lock_guard lock(mutex_);
    const std::string id = "d" + std::to_string(next_dataset_++);
    datasets_.emplace(id, d);
    return {201, Json{{"id", id}, {"dataset", to_json(d)}}};
  });
}

ServiceResponse Service::create_session(const std::string& body) {
  return guarded([&]() -> ServiceResponse {
    const Json j = parse_body(body);
    if (!j.is_object() || !j.contains("dataset_id") || !j.at("dataset_id").is_string())
      throw InvalidArgument("dataset_id is required");
    const std::string did = j.at("dataset_id").get<std::string>();
    EngineConfig ecfg = options_.engine;
    InitConfig icfg = options_.init;
    if (j.contains("engine")) ecfg = engine_config_from_json(j.at("engine"), ecfg);
    if (j.contains("init")) icfg = init_config_from_json(j.at("init"), icfg);
    ecfg.validate();
    icfg.validate();

    std::lock_guard lock(mutex_);
    auto it = datasets_.find(did);
    if (it == datasets_.end()) return error_response(404, "unknown dataset '" + did + "'");
    const std::string sid = "s" + std::to_string(next_session_++);
    sessions_.emplace(sid, std::make_shared<Session>(sid, did, it->second, ecfg, icfg));
    return {201, Json{{"id", sid}, {"dataset_id", did}, {"engine", to_json(ecfg)}, {"init", to_json(icfg)}}};
  });
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ServiceResponse Service::query(const std::string& session_id, const std::string& body) {
  auto session = find_session(session_id);
  if (!session) return error_response(404, "unknown session '" + session_id + "'");
  return guarded([&]() -> ServiceResponse {
    const Json j = parse_body(body);
    if (!j.is_object()) throw InvalidArgument("query must be a JSON object");
    ExploratoryQuery q = query_from_json(j, session->explorer.dataset());
    q.validate(session->explorer.dataset());
    bool include_points = false;
    std::size_t cap = options_.max_points;
    if (j.contains("include_points")) include_points = j.at("include_points").get<bool>();
    if (j.contains("max_points")) cap = std::min(cap, j.at("max_points").get<std::size_t>());

    std::unique_lock lock(session->exec, std::try_to_lock);
    if (!lock.owns_lock()) return error_response(409, "a query is already running in this session");
    if (before_execute_) before_execute_(session_id);
    QueryResult res = session->explorer.query(q);
    Json out = to_json(res);
    if (include_points) out["points"] = region_points(*session->explorer.index(), q.ix, q.iy, cap);
    session->history.push_back(Json{{"query", to_json(q)}, {"stats", out.at("stats")}});
    out["query_index"] = session->history.size() - 1;
    return {200, out};
  });
}

ServiceResponse Service::index_stats(const std::string& session_id) {
  auto session = find_session(session_id);
  if (!session) return error_response(404, "unknown session '" + session_id + "'");
  return guarded([&]() -> ServiceResponse {
    std::unique_lock lock(session->exec, std::try_to_lock);
    if (!lock.owns_lock()) return error_response(409, "a query is running in this session");
    const TileIndex* index = session->explorer.index();
    if (index == nullptr) return {200, Json{{"initialized", false}, {"leaves", Json::array()}}};
    Json out = index_stats_json(*index, session->explorer.dataset());
    out["initialized"] = true;
    out["queries"] = session->history.size();
    return {200, out};
  });
}

Json region_points(const TileIndex& index, const Interval& qx, const Interval& qy, std::size_t cap) {
  std::vector<std::pair<double, double>> pts;
  auto& mutable_index = const_cast<TileIndex&>(index);
  for (const LeafHit& hit : mutable_index.locate_overlapping_leaves(qx, qy)) {
    for (std::uint32_t i : objects_in_region(*hit.tile, qx, qy)) {
      const ObjectEntry& o = hit.tile->objects[i];
      pts.emplace_back(o.x, o.y);
    }
  }
  const std::size_t total = pts.size();
  Json xs = Json::array(), ys = Json::array();
  const std::size_t keep = std::min(total, cap);
  for (std::size_t k = 0; k < keep; ++k) {
    const auto& p = pts[keep == total ? k : k * total / keep];
    xs.push_back(p.first);
    ys.push_back(p.second);
  }
  return {{"x", xs}, {"y", ys}, {"total", total}, {"returned", keep}};
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    auto reply = [](httplib::Response& res, const ServiceResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, service.health());
    });
    server.Post("/datasets", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.register_dataset(req.body));
    });
    server.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.create_session(req.body));
    });
    server.Post(R"(/sessions/([^/]+)/query)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.query(req.matches[1], req.body));
    });
    server.Get(R"(/sessions/([^/]+)/index-stats)", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.index_stats(req.matches[1]));
    });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }
void HttpServer::stop() { impl_->server.stop(); }

}  // namespace tilescope
