#include "tilescope/json_io.hpp"

#include <set>

#include "tilescope/error.hpp"

namespace tilescope {

namespace {

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("field '") + key + "': " + e.what());
  }
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
}

}  // namespace

Json to_json(const DatasetDescriptor& d) {
  Json attrs = Json::array();
  for (const auto& a : d.attributes) {
    attrs.push_back({{"name", a.name}, {"kind", a.kind == AttributeKind::Numeric ? "numeric" : "other"}});
  }
  return {{"file_path", d.file_path.string()}, {"delimiter", std::string(1, d.delimiter)},
          {"has_header", d.has_header},        {"attributes", attrs},
          {"axis_x", d.axis_x},                {"axis_y", d.axis_y}};
}

DatasetDescriptor dataset_from_json(const Json& j) {
  require_object(j, "dataset descriptor");
  if (!j.contains("file_path") || !j.at("file_path").is_string()) throw InvalidArgument("file_path is required");
  DatasetDescriptor d;
  d.file_path = j.at("file_path").get<std::string>();
  std::string delim = ",";
  read_opt(j, "delimiter", delim);
  if (delim.size() != 1) throw InvalidArgument("delimiter must be a single character");
  d.delimiter = delim[0];
  read_opt(j, "has_header", d.has_header);

  auto axis = [&](const char* key, std::size_t fallback) -> std::size_t {
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (v.is_number_unsigned() || v.is_number_integer()) {
      if (v.get<long long>() < 0) throw InvalidArgument(std::string(key) + " must be non-negative");
      return v.get<std::size_t>();
    }
    if (v.is_string()) {
      auto idx = d.find(v.get<std::string>());
      if (!idx) throw InvalidArgument(std::string(key) + " names an unknown attribute");
      return *idx;
    }
    throw InvalidArgument(std::string(key) + " must be an index or an attribute name");
  };

  if (j.contains("attributes")) {
    if (!j.at("attributes").is_array()) throw InvalidArgument("attributes must be an array");
    for (const Json& a : j.at("attributes")) {
      Attribute attr;
      if (a.is_string()) {
        attr.name = a.get<std::string>();
      } else {
        require_object(a, "attribute");
        read_opt(a, "name", attr.name);
        std::string kind = "numeric";
        read_opt(a, "kind", kind);
        if (kind != "numeric" && kind != "other") throw InvalidArgument("attribute kind must be numeric or other");
        attr.kind = kind == "numeric" ? AttributeKind::Numeric : AttributeKind::Other;
      }
      d.attributes.push_back(std::move(attr));
    }
    d.axis_x = axis("axis_x", 0);
    d.axis_y = axis("axis_y", 1);
    d.validate();
  } else {
    // Schema from the header line; every column numeric.
    d = DatasetDescriptor::from_header(d.file_path, d.delimiter);
    d.axis_x = axis("axis_x", 0);
    d.axis_y = axis("axis_y", 1);
    d.validate();
  }
  return d;
}

Json to_json(const EngineConfig& c) {
  return {{"initial_rate", c.initial_rate},   {"rate_cap", c.rate_cap},
          {"rate_floor", c.rate_floor},       {"min_batch", c.min_batch},
          {"split_threshold", c.split_threshold}, {"max_depth", c.max_depth},
          {"rng_seed", c.rng_seed},           {"adapt", c.adapt},
          {"reuse_metadata", c.reuse_metadata}, {"exact_only", c.exact_only}};
}

EngineConfig engine_config_from_json(const Json& j, EngineConfig c) {
  if (j.is_null()) return c;
  require_object(j, "engine config");
  read_opt(j, "initial_rate", c.initial_rate);
  read_opt(j, "rate_cap", c.rate_cap);
  read_opt(j, "rate_floor", c.rate_floor);
  read_opt(j, "min_batch", c.min_batch);
  read_opt(j, "split_threshold", c.split_threshold);
  read_opt(j, "max_depth", c.max_depth);
  read_opt(j, "rng_seed", c.rng_seed);
  read_opt(j, "adapt", c.adapt);
  read_opt(j, "reuse_metadata", c.reuse_metadata);
  read_opt(j, "exact_only", c.exact_only);
  c.validate();
  return c;
}

Json to_json(const Interval& i) { return {{"lo", i.lo}, {"hi", i.hi}}; }

Interval interval_from_json(const Json& j) {
  require_object(j, "interval");
  if (!j.contains("lo") || !j.contains("hi") || !j.at("lo").is_number() || !j.at("hi").is_number()) {
    throw InvalidArgument("interval needs numeric lo and hi");
  }
  Interval i{j.at("lo").get<double>(), j.at("hi").get<double>()};
  if (i.lo > i.hi) throw InvalidArgument("interval has lo > hi");
  return i;
}

Json to_json(const InitConfig& c) {
  Json j = {{"grid_x", c.grid_x}, {"grid_y", c.grid_y}, {"extra_budget_fraction", c.extra_budget_fraction},
            {"strict", c.scan.strict}};
  if (c.init_attributes) j["init_attributes"] = *c.init_attributes;
  if (c.bounds_x) j["bounds_x"] = to_json(*c.bounds_x);
  if (c.bounds_y) j["bounds_y"] = to_json(*c.bounds_y);
  return j;
}

InitConfig init_config_from_json(const Json& j, InitConfig c) {
  if (j.is_null()) return c;
  require_object(j, "init config");
  read_opt(j, "grid_x", c.grid_x);
  read_opt(j, "grid_y", c.grid_y);
  read_opt(j, "extra_budget_fraction", c.extra_budget_fraction);
  read_opt(j, "strict", c.scan.strict);
  if (j.contains("init_attributes") && !j.at("init_attributes").is_null()) {
    std::vector<std::size_t> attrs;
    read_opt(j, "init_attributes", attrs);
    c.init_attributes = attrs;
  }
  if (j.contains("bounds_x") && !j.at("bounds_x").is_null()) c.bounds_x = interval_from_json(j.at("bounds_x"));
  if (j.contains("bounds_y") && !j.at("bounds_y").is_null()) c.bounds_y = interval_from_json(j.at("bounds_y"));
  c.validate();
  return c;
}

Json to_json(const ExploratoryQuery& q) {
  Json aggs = Json::array();
  for (const auto& a : q.aggs) aggs.push_back({{"func", to_string(a.func)}, {"attribute", a.attribute}});
  return {{"ix", to_json(q.ix)}, {"iy", to_json(q.iy)}, {"aggregates", aggs}, {"eps_max", q.eps_max},
          {"gamma", q.gamma}};
}

ExploratoryQuery query_from_json(const Json& j, const DatasetDescriptor& dataset) {
  require_object(j, "query");
  ExploratoryQuery q;
  if (!j.contains("ix") || !j.contains("iy")) throw InvalidArgument("query needs ix and iy");
  q.ix = interval_from_json(j.at("ix"));
  q.iy = interval_from_json(j.at("iy"));
  const char* key = j.contains("aggregates") ? "aggregates" : "aggs";
  if (!j.contains(key) || !j.at(key).is_array()) throw InvalidArgument("query needs an aggregates array");
  for (const Json& a : j.at(key)) {
    require_object(a, "aggregate");
    if (!a.contains("func") || !a.at("func").is_string()) throw InvalidArgument("aggregate needs func");
    AggregateSpec spec;
    spec.func = parse_aggregate_func(a.at("func").get<std::string>());
    if (a.contains("attribute")) {
      const Json& attr = a.at("attribute");
      if (attr.is_string()) {
        auto idx = dataset.find(attr.get<std::string>());
        if (!idx) throw InvalidArgument("unknown attribute '" + attr.get<std::string>() + "'");
        spec.attribute = *idx;
      } else if (attr.is_number_integer() && attr.get<long long>() >= 0) {
        spec.attribute = attr.get<std::size_t>();
      } else {
        throw InvalidArgument("aggregate attribute must be an index or a name");
      }
    } else if (spec.func != AggregateFunc::Count) {
      throw InvalidArgument("aggregate needs an attribute");
    } else {
      spec.attribute = dataset.axis_x;
    }
    q.aggs.push_back(spec);
  }
  read_opt(j, "eps_max", q.eps_max);
  read_opt(j, "gamma", q.gamma);
  q.validate(dataset);
  return q;
}

Json to_json(const InitStats& s) {
  return {{"elapsed_ms", s.elapsed_ms}, {"objects_scanned", s.objects_scanned}, {"rows_rejected", s.rows_rejected},
          {"file_passes", s.file_passes}, {"tiles", s.tiles},                    {"extra_tiles", s.extra_tiles}};
}

Json to_json(const QueryResult& r) {
  Json aggs = Json::array();
  for (const auto& a : r.aggregates) {
    Json e = {{"func", to_string(a.spec.func)}, {"attribute", a.spec.attribute}, {"exact", a.exact}};
    if (a.estimate) {
      e["value"] = a.estimate->value;
      e["variance"] = a.estimate->variance;
      e["ci_lo"] = a.estimate->ci_lo;
      e["ci_hi"] = a.estimate->ci_hi;
      e["eps_est"] = a.estimate->eps_est;  // +inf serializes as null
      e["gamma"] = a.estimate->gamma;
    } else {
      e["error"] = a.error;
    }
    aggs.push_back(std::move(e));
  }
  const QueryStats& s = r.stats;
  Json j = {{"aggregates", aggs},
            {"stats",
             {{"io_reads", s.io_reads},
              {"sampling_iterations", s.sampling_iterations},
              {"tiles_full", s.tiles_full},
              {"tiles_partial", s.tiles_partial},
              {"tiles_split", s.tiles_split},
              {"case_counts",
               {{"case1", s.case_counts[0]}, {"case2", s.case_counts[1]}, {"case3", s.case_counts[2]},
                {"case4", s.case_counts[3]}}},
              {"region_objects", s.region_objects},
              {"elapsed_ms", s.elapsed_ms}}}};
  if (r.init) j["init"] = to_json(*r.init);
  return j;
}

Json index_stats_json(const TileIndex& index, const DatasetDescriptor& dataset) {
  Json leaves = Json::array();
  index.for_each_leaf([&](const Tile& t) {
    Json status = Json::object();
    for (const auto& [attr, meta] : t.metadata) {
      const std::string name = attr < dataset.attributes.size() ? dataset.attributes[attr].name : std::to_string(attr);
      status[name] = to_string(metadata_status(t, attr));
    }
    leaves.push_back({{"ix", to_json(t.ix)},
                      {"iy", to_json(t.iy)},
                      {"depth", t.depth},
                      {"objects", t.objects.size()},
                      {"sampled", t.bitmap.popcount()},
                      {"status", status}});
  });
  return {{"grid", {{"x", index.grid_x()}, {"y", index.grid_y()}}},
          {"domain", {{"x", to_json(index.domain_x())}, {"y", to_json(index.domain_y())}}},
          {"leaf_count", index.leaf_count()},
          {"tile_count", index.tile_count()},
          {"object_count", index.object_count()},
          {"tiles_split", index.splits()},
          {"leaves", leaves}};
}

}  // namespace tilescope
