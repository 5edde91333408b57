#include "tilescope/bench.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <random>

#include "tilescope/error.hpp"
#include "tilescope/explorer.hpp"

namespace tilescope::bench {

void SynthSpec::validate() const {
  if (n_attributes < 3) throw InvalidArgument("synthetic data needs at least 3 attributes");
  if (!(value_range.lo < value_range.hi)) throw InvalidArgument("value range must satisfy lo < hi");
  if (decimals < 0 || decimals > 12) throw InvalidArgument("decimals must lie in [0,12]");
}

FileStats gen_data(const SynthSpec& spec, const std::filesystem::path& out) {
  spec.validate();
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + out.string());
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> dist(spec.value_range.lo, spec.value_range.hi);

  std::string buf;
  buf.reserve(1 << 20);
  for (std::size_t a = 0; a < spec.n_attributes; ++a) {
    if (a > 0) buf.push_back(',');
    buf += "a" + std::to_string(a);
  }
  buf.push_back('\n');
  FileStats stats;
  char num[64];
  for (std::uint64_t r = 0; r < spec.n_objects; ++r) {
    for (std::size_t a = 0; a < spec.n_attributes; ++a) {
      if (a > 0) buf.push_back(',');
      auto res = std::to_chars(num, num + sizeof num, dist(rng), std::chars_format::fixed, spec.decimals);
      buf.append(num, res.ptr);
    }
    buf.push_back('\n');
    if (buf.size() > (1 << 20) - 4096) {
      f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      stats.bytes += buf.size();
      buf.clear();
    }
  }
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  stats.bytes += buf.size();
  if (!f) throw IoError("write failed on " + out.string());
  stats.rows = spec.n_objects;
  return stats;
}

DatasetDescriptor synth_descriptor(const std::filesystem::path& path, std::size_t n_attributes) {
  DatasetDescriptor d;
  d.file_path = path;
  for (std::size_t a = 0; a < n_attributes; ++a) d.attributes.push_back({"a" + std::to_string(a), AttributeKind::Numeric});
  d.axis_x = 0;
  d.axis_y = 1;
  d.validate();
  return d;
}

void WorkloadSpec::validate() const {
  if (n_queries == 0) throw InvalidArgument("workload needs at least one query");
  if (!(width > 0.0 && height > 0.0)) throw InvalidArgument("window must have positive size");
  if (!(shift_fraction > 0.0 && shift_fraction < 1.0)) throw InvalidArgument("shift_fraction must lie in (0,1)");
  if (!(trajectory_bias >= 0.0 && trajectory_bias <= 1.0)) throw InvalidArgument("trajectory_bias must lie in [0,1]");
  if (heading && (*heading < 0 || *heading > 7)) throw InvalidArgument("heading must lie in [0,7]");
  if (aggs.empty()) throw InvalidArgument("workload needs aggregates");
}

double window_side_for(std::uint64_t n_objects, std::uint64_t target, const Interval& domain) {
  if (n_objects == 0) throw InvalidArgument("empty dataset");
  double frac = std::min(1.0, static_cast<double>(target) / static_cast<double>(n_objects));
  return domain.width() * std::sqrt(frac);
}

std::vector<ExploratoryQuery> gen_workload(const WorkloadSpec& spec, const Interval& domain_x,
                                           const Interval& domain_y) {
  spec.validate();
  static constexpr std::array<std::array<int, 2>, 8> kDirs = {
      {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  auto dir_index = [](int dx, int dy) {
    for (int i = 0; i < 8; ++i) {
      if (kDirs[i][0] == dx && kDirs[i][1] == dy) return i;
    }
    return 0;
  };

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> any_dir(0, 7);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  int heading = spec.heading ? *spec.heading : any_dir(rng);

  const double w = std::min(spec.width, domain_x.width());
  const double h = std::min(spec.height, domain_y.width());
  auto clamp_lo = [](double lo, double size, const Interval& d) { return std::clamp(lo, d.lo, d.hi - size); };
  auto random_center = [&](const Interval& d, double size) {
    return std::uniform_real_distribution<double>(d.lo + size / 2, d.hi - size / 2)(rng);
  };
  const double cx = spec.start_x ? *spec.start_x : random_center(domain_x, w);
  const double cy = spec.start_y ? *spec.start_y : random_center(domain_y, h);
  double x0 = clamp_lo(cx - w / 2, w, domain_x);
  double y0 = clamp_lo(cy - h / 2, h, domain_y);

  std::vector<ExploratoryQuery> out;
  out.reserve(spec.n_queries);
  for (std::size_t k = 0; k < spec.n_queries; ++k) {
    if (k > 0) {
      int d = coin(rng) < spec.trajectory_bias ? heading : any_dir(rng);
      int dx = kDirs[d][0], dy = kDirs[d][1];
      const double sx = spec.shift_fraction * w, sy = spec.shift_fraction * h;
      if (x0 + dx * sx < domain_x.lo || x0 + dx * sx > domain_x.hi - w) {
        dx = -dx;
        if (d == heading) heading = dir_index(-kDirs[heading][0], kDirs[heading][1]);
      }
      if (y0 + dy * sy < domain_y.lo || y0 + dy * sy > domain_y.hi - h) {
        dy = -dy;
        if (d == heading) heading = dir_index(kDirs[heading][0], -kDirs[heading][1]);
      }
      x0 = clamp_lo(x0 + dx * sx, w, domain_x);
      y0 = clamp_lo(y0 + dy * sy, h, domain_y);
    }
    ExploratoryQuery q;
    q.ix = {x0, x0 + w};
    q.iy = {y0, y0 + h};
    q.aggs = spec.aggs;
    q.eps_max = spec.eps_max;
    q.gamma = spec.gamma;
    out.push_back(q);
  }
  return out;
}

std::vector<std::vector<std::optional<double>>> exact_answers(const DatasetDescriptor& dataset,
                                                              const std::vector<ExploratoryQuery>& queries) {
  struct Acc {
    std::uint64_t count = 0;
    std::vector<long double> sum, min, max;
  };
  std::vector<std::size_t> attrs;
  for (const auto& q : queries) {
    for (const auto& a : q.aggs) attrs.push_back(a.attribute);
  }
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
  auto slot = [&](std::size_t a) { return static_cast<std::size_t>(std::lower_bound(attrs.begin(), attrs.end(), a) - attrs.begin()); };

  std::vector<Acc> acc(queries.size());
  for (auto& a : acc) {
    a.sum.assign(attrs.size(), 0.0L);
    a.min.assign(attrs.size(), std::numeric_limits<long double>::infinity());
    a.max.assign(attrs.size(), -std::numeric_limits<long double>::infinity());
  }

  std::ifstream in(dataset.file_path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + dataset.file_path.string());
  std::string line;
  bool header = dataset.has_header;
  std::vector<double> cols(dataset.attributes.size());
  std::vector<double> vals(attrs.size());
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    first = false;
    if (header) {
      header = false;
      continue;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.c_str();
    bool ok = true;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      char* end = nullptr;
      cols[c] = std::strtod(p, &end);
      if (end == p) {
        ok = false;
        break;
      }
      p = end;
      if (*p == dataset.delimiter) ++p;
    }
    if (!ok) continue;
    const double x = cols[dataset.axis_x], y = cols[dataset.axis_y];
    for (std::size_t k = 0; k < attrs.size(); ++k) vals[k] = cols[attrs[k]];
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto& q = queries[i];
      if (x < q.ix.lo || x > q.ix.hi || y < q.iy.lo || y > q.iy.hi) continue;
      Acc& a = acc[i];
      ++a.count;
      for (std::size_t k = 0; k < attrs.size(); ++k) {
        a.sum[k] += vals[k];
        a.min[k] = std::min<long double>(a.min[k], vals[k]);
        a.max[k] = std::max<long double>(a.max[k], vals[k]);
      }
    }
  }

  std::vector<std::vector<std::optional<double>>> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const Acc& a = acc[i];
    for (const auto& spec : queries[i].aggs) {
      const std::size_t k = slot(spec.attribute);
      std::optional<double> v;
      switch (spec.func) {
        case AggregateFunc::Count: v = static_cast<double>(a.count); break;
        case AggregateFunc::Sum: v = static_cast<double>(a.sum[k]); break;
        case AggregateFunc::Mean:
          if (a.count > 0) v = static_cast<double>(a.sum[k] / static_cast<long double>(a.count));
          break;
        case AggregateFunc::Min:
          if (a.count > 0) v = static_cast<double>(a.min[k]);
          break;
        case AggregateFunc::Max:
          if (a.count > 0) v = static_cast<double>(a.max[k]);
          break;
      }
      out[i].push_back(v);
    }
  }
  return out;
}

const char* to_string(EngineKind k) {
  switch (k) {
    case EngineKind::Val: return "VAL";
    case EngineKind::ValS: return "VAL-S";
    case EngineKind::ValA: return "VAL-A";
  }
  return "?";
}

EngineKind parse_engine_kind(const std::string& name) {
  if (name == "VAL" || name == "exact") return EngineKind::Val;
  if (name == "VAL-S" || name == "sampling") return EngineKind::ValS;
  if (name == "VAL-A" || name == "adaptive") return EngineKind::ValA;
  throw InvalidArgument("unknown engine '" + name + "'");
}

EngineConfig engine_config_for(EngineKind kind, EngineConfig base) {
  base.exact_only = kind == EngineKind::Val;
  base.reuse_metadata = kind != EngineKind::ValS;
  return base;
}

namespace {

constexpr double kSameValue = 1e-12;

std::string agg_label(const AggregateSpec& a, const DatasetDescriptor& d) {
  return std::string(to_string(a.func)) + "(" + d.attributes.at(a.attribute).name + ")";
}

bool is_moment(AggregateFunc f) { return f == AggregateFunc::Sum || f == AggregateFunc::Mean; }

EngineSummary summarize(const std::string& engine, double eps, const std::vector<ReportRow>& rows,
                        const std::vector<AggregateSpec>& aggs) {
  EngineSummary s;
  s.engine = engine;
  s.eps_max = eps;
  std::vector<double> actual;
  std::size_t covered = 0, within = 0;
  for (const ReportRow& r : rows) {
    if (r.engine != engine || r.eps_max != eps) continue;
    if (r.agg_index == 0) {
      ++s.queries;
      s.total_ms += r.elapsed_ms;
      s.total_io += r.io_reads;
      if (r.query_id == 0) s.init_ms = r.elapsed_ms;
    }
    if (r.query_id == 0 || !is_moment(aggs[r.agg_index].func) || !r.value || !r.exact_value) continue;
    ++s.estimated;
    covered += r.covered;
    within += r.eps_actual <= eps;
    actual.push_back(r.eps_actual);
  }
  if (s.estimated > 0) {
    s.coverage = static_cast<double>(covered) / static_cast<double>(s.estimated);
    s.within_bound = static_cast<double>(within) / static_cast<double>(s.estimated);
    std::sort(actual.begin(), actual.end());
    const std::size_t n = actual.size();
    s.median_eps_actual = n % 2 ? actual[n / 2] : (actual[n / 2 - 1] + actual[n / 2]) / 2;
  }
  return s;
}

}  // namespace

RunReport run(const RunConfig& cfg, const std::vector<ExploratoryQuery>& workload,
              const std::vector<std::vector<std::optional<double>>>& exact) {
  if (workload.empty()) throw InvalidArgument("empty workload");
  if (exact.size() != workload.size()) throw InvalidArgument("exact answers do not match the workload");
  RunReport report;
  const auto& aggs = workload.front().aggs;
  for (const auto& q : workload) {
    if (q.aggs != aggs) throw InvalidArgument("all workload queries must request the same aggregates");
  }

  for (EngineKind kind : cfg.engines) {
    const std::vector<double> eps_values = kind == EngineKind::Val ? std::vector<double>{0.0} : cfg.eps_values;
    for (double eps : eps_values) {
      const std::string name = to_string(kind);
      std::vector<ReportRow> rows;
      std::string error;
      try {
        Explorer explorer(cfg.dataset, engine_config_for(kind, cfg.engine), cfg.init);
        for (std::size_t qi = 0; qi < workload.size(); ++qi) {
          ExploratoryQuery q = workload[qi];
          q.eps_max = eps;
          QueryResult res = explorer.query(q);
          for (std::size_t k = 0; k < res.aggregates.size(); ++k) {
            const AggregateResult& a = res.aggregates[k];
            ReportRow row;
            row.query_id = qi;
            row.engine = name;
            row.eps_max = eps;
            row.agg_index = k;
            row.aggregate = agg_label(a.spec, cfg.dataset);
            row.elapsed_ms = res.stats.elapsed_ms;
            row.io_reads = res.stats.io_reads;
            row.iterations = res.stats.sampling_iterations;
            row.exact = a.exact;
            row.exact_value = exact[qi][k];
            if (a.estimate) {
              row.value = a.estimate->value;
              row.eps_est = a.estimate->eps_est;
              row.ci_lo = a.estimate->ci_lo;
              row.ci_hi = a.estimate->ci_hi;
            }
            if (row.value && row.exact_value) {
              const double v = *row.exact_value, est = *row.value;
              const double dev = std::abs(est - v);
              const double scale = std::max(std::abs(v), std::numeric_limits<double>::min());
              row.eps_actual = dev <= kSameValue * std::abs(v) ? 0.0 : (v == 0.0 ? std::numeric_limits<double>::infinity() : dev / scale);
              const double tol = 1e-9 * std::max(1.0, std::abs(v));
              row.covered = row.ci_lo - tol <= v && v <= row.ci_hi + tol;
            } else {
              row.covered = !row.value && !row.exact_value;
            }
            rows.push_back(std::move(row));
          }
        }
      } catch (const std::exception& e) {
        error = e.what();
      }
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
      EngineSummary s = summarize(name, eps, report.rows, aggs);
      s.error = error;
      report.summary.push_back(s);
    }
  }

  double exact_ms = 0.0;
  bool have_exact = false;
  for (const auto& s : report.summary) {
    if (s.engine == "VAL" && s.error.empty()) {
      exact_ms = s.total_ms;
      have_exact = true;
    }
  }
  if (have_exact) {
    for (auto& s : report.summary) s.speedup_vs_exact = s.total_ms > 0 ? exact_ms / s.total_ms : 0.0;
  }
  return report;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::trunc);
  if (!f) throw IoError("cannot create " + p.string());
  f.precision(17);
  return f;
}

std::string opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, *v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<std::filesystem::path> report(const RunReport& run, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  {
    auto p = out_dir / "queries.csv";
    auto f = open_out(p);
    f << "query_id,engine,eps_max,aggregate,elapsed_ms,io_reads,iterations,value,eps_est,eps_actual,ci_lo,ci_hi,"
         "exact_value,covered,exact\n";
    for (const auto& r : run.rows) {
      f << r.query_id << ',' << r.engine << ',' << r.eps_max << ',' << r.aggregate << ',' << r.elapsed_ms << ','
        << r.io_reads << ',' << r.iterations << ',' << opt(r.value) << ',' << r.eps_est << ',' << r.eps_actual << ','
        << r.ci_lo << ',' << r.ci_hi << ',' << opt(r.exact_value) << ',' << (r.covered ? 1 : 0) << ','
        << (r.exact ? 1 : 0) << '\n';
    }
    written.push_back(p);
  }
  {
    auto p = out_dir / "summary.json";
    auto f = open_out(p);
    f << to_json(run)["summary"].dump(2) << '\n';
    written.push_back(p);
  }
  {
    auto p = out_dir / "time_per_query.csv";
    auto f = open_out(p);
    f << "query_id,engine,eps_max,elapsed_ms\n";
    for (const auto& r : run.rows) {
      if (r.agg_index == 0) f << r.query_id << ',' << r.engine << ',' << r.eps_max << ',' << r.elapsed_ms << '\n';
    }
    written.push_back(p);
  }
  {
    auto p = out_dir / "io_per_query.csv";
    auto f = open_out(p);
    f << "query_id,engine,eps_max,io_reads\n";
    for (const auto& r : run.rows) {
      if (r.agg_index == 0) f << r.query_id << ',' << r.engine << ',' << r.eps_max << ',' << r.io_reads << '\n';
    }
    written.push_back(p);
  }
  {
    auto p = out_dir / "total_time_vs_eps.csv";
    auto f = open_out(p);
    f << "engine,eps_max,total_ms,total_io,init_ms\n";
    for (const auto& s : run.summary) {
      f << s.engine << ',' << s.eps_max << ',' << s.total_ms << ',' << s.total_io << ',' << s.init_ms << '\n';
    }
    written.push_back(p);
  }
  {
    auto p = out_dir / "ci_vs_exact.csv";
    auto f = open_out(p);
    f << "query_id,engine,eps_max,aggregate,value,ci_lo,ci_hi,exact_value\n";
    for (const auto& r : run.rows) {
      f << r.query_id << ',' << r.engine << ',' << r.eps_max << ',' << r.aggregate << ',' << opt(r.value) << ','
        << r.ci_lo << ',' << r.ci_hi << ',' << opt(r.exact_value) << '\n';
    }
    written.push_back(p);
  }
  return written;
}

namespace {

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
std::optional<double> opt_from(const Json& j) {
  return j.is_number() ? std::optional<double>(j.get<double>()) : std::nullopt;
}

}  // namespace

Json to_json(const RunReport& r) {
  Json rows = Json::array();
  for (const auto& x : r.rows) {
    rows.push_back({{"query_id", x.query_id},   {"engine", x.engine},       {"eps_max", x.eps_max},
                    {"agg_index", x.agg_index}, {"aggregate", x.aggregate}, {"elapsed_ms", x.elapsed_ms},
                    {"io_reads", x.io_reads},   {"iterations", x.iterations}, {"value", opt_json(x.value)},
                    {"eps_est", x.eps_est},     {"eps_actual", x.eps_actual}, {"ci_lo", x.ci_lo},
                    {"ci_hi", x.ci_hi},         {"exact_value", opt_json(x.exact_value)},
                    {"covered", x.covered},     {"exact", x.exact}});
  }
  Json summary = Json::array();
  for (const auto& s : r.summary) {
    summary.push_back({{"engine", s.engine},
                       {"eps_max", s.eps_max},
                       {"queries", s.queries},
                       {"init_ms", s.init_ms},
                       {"total_ms", s.total_ms},
                       {"total_io", s.total_io},
                       {"estimated", s.estimated},
                       {"coverage", s.coverage},
                       {"within_bound", s.within_bound},
                       {"median_eps_actual", s.median_eps_actual},
                       {"speedup_vs_exact", s.speedup_vs_exact},
                       {"error", s.error}});
  }
  return {{"rows", rows}, {"summary", summary}};
}

RunReport run_report_from_json(const Json& j) {
  RunReport r;
  try {
    for (const Json& x : j.at("rows")) {
      ReportRow row;
      row.query_id = x.at("query_id").get<std::size_t>();
      row.engine = x.at("engine").get<std::string>();
      row.eps_max = x.at("eps_max").get<double>();
      row.agg_index = x.at("agg_index").get<std::size_t>();
      row.aggregate = x.at("aggregate").get<std::string>();
      row.elapsed_ms = x.at("elapsed_ms").get<double>();
      row.io_reads = x.at("io_reads").get<std::uint64_t>();
      row.iterations = x.at("iterations").get<std::size_t>();
      row.value = opt_from(x.at("value"));
      row.eps_est = x.at("eps_est").is_number() ? x.at("eps_est").get<double>() : std::numeric_limits<double>::infinity();
      row.eps_actual = x.at("eps_actual").is_number() ? x.at("eps_actual").get<double>() : std::numeric_limits<double>::infinity();
      row.ci_lo = x.at("ci_lo").get<double>();
      row.ci_hi = x.at("ci_hi").get<double>();
      row.exact_value = opt_from(x.at("exact_value"));
      row.covered = x.at("covered").get<bool>();
      row.exact = x.at("exact").get<bool>();
      r.rows.push_back(std::move(row));
    }
    for (const Json& x : j.at("summary")) {
      EngineSummary s;
      s.engine = x.at("engine").get<std::string>();
      s.eps_max = x.at("eps_max").get<double>();
      s.queries = x.at("queries").get<std::size_t>();
      s.init_ms = x.at("init_ms").get<double>();
      s.total_ms = x.at("total_ms").get<double>();
      s.total_io = x.at("total_io").get<std::uint64_t>();
      s.estimated = x.at("estimated").get<std::size_t>();
      s.coverage = x.at("coverage").get<double>();
      s.within_bound = x.at("within_bound").get<double>();
      s.median_eps_actual = x.at("median_eps_actual").get<double>();
      s.speedup_vs_exact = x.at("speedup_vs_exact").get<double>();
      s.error = x.at("error").get<std::string>();
      r.summary.push_back(std::move(s));
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed run report: ") + e.what());
  }
  return r;
}

Json workload_to_json(const std::vector<ExploratoryQuery>& queries) {
  Json arr = Json::array();
  for (const auto& q : queries) arr.push_back(tilescope::to_json(q));
  return {{"queries", arr}};
}

std::vector<ExploratoryQuery> workload_from_json(const Json& j, const DatasetDescriptor& dataset) {
  const Json& arr = j.is_array() ? j : j.at("queries");
  std::vector<ExploratoryQuery> out;
  for (const Json& q : arr) out.push_back(query_from_json(q, dataset));
  return out;
}

}  // namespace tilescope::bench
