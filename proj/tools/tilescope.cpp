#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tilescope/bench.hpp"
#include "tilescope/error.hpp"
#include "tilescope/service.hpp"

using namespace tilescope;

namespace {

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out << j.dump(2) << '\n';
}

DatasetDescriptor open_dataset(const std::string& data, const std::string& descriptor) {
  if (!descriptor.empty()) return dataset_from_json(load_json(descriptor));
  return DatasetDescriptor::from_header(data, ',', 0, 1);
}

AggregateSpec parse_agg(const std::string& text, const DatasetDescriptor& d) {
  const auto colon = text.find(':');
  AggregateSpec a;
  a.func = parse_aggregate_func(text.substr(0, colon));
  if (colon == std::string::npos) {
    if (a.func != AggregateFunc::Count) throw InvalidArgument("aggregate '" + text + "' needs an attribute");
    return a;
  }
  auto idx = d.find(text.substr(colon + 1));
  if (!idx) throw InvalidArgument("unknown attribute in '" + text + "'");
  a.attribute = *idx;
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate in-situ queries over raw CSV files"};
  app.require_subcommand(1);

  bench::SynthSpec synth;
  std::string data_out = "synth.csv";
  auto* gen_data = app.add_subcommand("gen-data", "Write a uniform synthetic CSV");
  gen_data->add_option("-o,--out", data_out, "Output CSV path");
  gen_data->add_option("-n,--rows", synth.n_objects, "Number of objects")->capture_default_str();
  gen_data->add_option("-d,--attributes", synth.n_attributes, "Number of attributes")->capture_default_str();
  gen_data->add_option("--lo", synth.value_range.lo, "Smallest value")->capture_default_str();
  gen_data->add_option("--hi", synth.value_range.hi, "Largest value")->capture_default_str();
  gen_data->add_option("--decimals", synth.decimals, "Digits after the decimal point")->capture_default_str();
  gen_data->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();

  bench::WorkloadSpec wl;
  std::string wl_data, wl_descriptor, wl_out = "workload.json";
  std::vector<std::string> wl_aggs;
  Interval wl_x{0.0, 1000.0}, wl_y{0.0, 1000.0};
  std::uint64_t target_objects = 0;
  auto* gen_wl = app.add_subcommand("gen-workload", "Write a pan-trajectory query workload as JSON");
  gen_wl->add_option("--data", wl_data, "CSV file (header names the attributes)");
  gen_wl->add_option("--descriptor", wl_descriptor, "Dataset descriptor JSON instead of --data");
  gen_wl->add_option("-o,--out", wl_out, "Output JSON path");
  gen_wl->add_option("-n,--queries", wl.n_queries)->capture_default_str();
  gen_wl->add_option("--width", wl.width)->capture_default_str();
  gen_wl->add_option("--height", wl.height)->capture_default_str();
  gen_wl->add_option("--target-objects", target_objects, "Size windows for about this many objects (uniform data)");
  gen_wl->add_option("--rows", synth.n_objects, "Object count used with --target-objects")->capture_default_str();
  gen_wl->add_option("--x-lo", wl_x.lo)->capture_default_str();
  gen_wl->add_option("--x-hi", wl_x.hi)->capture_default_str();
  gen_wl->add_option("--y-lo", wl_y.lo)->capture_default_str();
  gen_wl->add_option("--y-hi", wl_y.hi)->capture_default_str();
  gen_wl->add_option("--shift", wl.shift_fraction)->capture_default_str();
  gen_wl->add_option("--bias", wl.trajectory_bias)->capture_default_str();
  gen_wl->add_option("--heading", wl.heading, "0 = east, counter-clockwise in 45 degree steps");
  gen_wl->add_option("--start-x", wl.start_x);
  gen_wl->add_option("--start-y", wl.start_y);
  gen_wl->add_option("--agg", wl_aggs, "func:attribute, e.g. sum:a2 (repeatable)");
  gen_wl->add_option("--eps", wl.eps_max)->capture_default_str();
  gen_wl->add_option("--gamma", wl.gamma)->capture_default_str();
  gen_wl->add_option("--seed", wl.seed)->capture_default_str();

  std::string run_data, run_descriptor, run_workload, run_out = "run.json", run_config, run_report_dir;
  std::vector<std::string> run_engines;
  std::vector<double> run_eps;
  auto* run = app.add_subcommand("run", "Run engines over a workload and score them against exact answers");
  run->add_option("--data", run_data, "CSV file");
  run->add_option("--descriptor", run_descriptor, "Dataset descriptor JSON instead of --data");
  run->add_option("-w,--workload", run_workload, "Workload JSON")->required();
  run->add_option("-o,--out", run_out, "Run report JSON")->capture_default_str();
  run->add_option("--engines", run_engines, "VAL, VAL-S, VAL-A")->delimiter(',');
  run->add_option("--eps", run_eps, "eps_max values for the approximate engines")->delimiter(',');
  run->add_option("--config", run_config, "JSON with optional engine, init, engines, eps_values overrides");
  run->add_option("--report-dir", run_report_dir, "Also write report files here");

  std::string rep_in = "run.json", rep_dir = "report";
  auto* rep = app.add_subcommand("report", "Write CSV/JSON report files from a run");
  rep->add_option("-i,--run", rep_in)->capture_default_str();
  rep->add_option("-o,--out", rep_dir)->capture_default_str();

  std::string host = "127.0.0.1", serve_config;
  int port = 8080;
  if (const char* env = std::getenv("TILESCOPE_PORT")) port = std::atoi(env);
  auto* serve = app.add_subcommand("serve", "Start the HTTP JSON service");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("-p,--port", port, "Port (env TILESCOPE_PORT)")->capture_default_str();
  serve->add_option("--config", serve_config, "JSON with optional engine, init, max_points defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_data) {
      auto stats = bench::gen_data(synth, data_out);
      std::cout << "wrote " << stats.rows << " rows, " << stats.bytes << " bytes to " << data_out << '\n';
    } else if (*gen_wl) {
      if (wl_data.empty() && wl_descriptor.empty()) throw InvalidArgument("--data or --descriptor is required");
      DatasetDescriptor d = open_dataset(wl_data, wl_descriptor);
      if (!wl_aggs.empty()) {
        wl.aggs.clear();
        for (const auto& a : wl_aggs) wl.aggs.push_back(parse_agg(a, d));
      }
      if (target_objects > 0) {
        wl.width = bench::window_side_for(synth.n_objects, target_objects, wl_x);
        wl.height = bench::window_side_for(synth.n_objects, target_objects, wl_y);
      }
      auto queries = bench::gen_workload(wl, wl_x, wl_y);
      for (auto& q : queries) q.validate(d);
      save_json(wl_out, bench::workload_to_json(queries));
      std::cout << "wrote " << queries.size() << " queries to " << wl_out << '\n';
    } else if (*run) {
      if (run_data.empty() && run_descriptor.empty()) throw InvalidArgument("--data or --descriptor is required");
      bench::RunConfig cfg;
      cfg.dataset = open_dataset(run_data, run_descriptor);
      if (!run_config.empty()) {
        const Json c = load_json(run_config);
        if (c.contains("engine")) cfg.engine = engine_config_from_json(c.at("engine"), cfg.engine);
        if (c.contains("init")) cfg.init = init_config_from_json(c.at("init"), cfg.init);
        if (c.contains("eps_values")) cfg.eps_values = c.at("eps_values").get<std::vector<double>>();
        if (c.contains("engines")) {
          cfg.engines.clear();
          for (const auto& e : c.at("engines")) cfg.engines.push_back(bench::parse_engine_kind(e.get<std::string>()));
        }
      }
      if (!run_engines.empty()) {
        cfg.engines.clear();
        for (const auto& e : run_engines) cfg.engines.push_back(bench::parse_engine_kind(e));
      }
      if (!run_eps.empty()) cfg.eps_values = run_eps;
      cfg.engine.validate();
      cfg.init.validate();
      auto workload = bench::workload_from_json(load_json(run_workload), cfg.dataset);
      auto exact = bench::exact_answers(cfg.dataset, workload);
      auto result = bench::run(cfg, workload, exact);
      save_json(run_out, bench::to_json(result));
      for (const auto& s : result.summary) {
        std::cout << s.engine << " eps_max=" << s.eps_max << " total_ms=" << s.total_ms << " io=" << s.total_io
                  << " coverage=" << s.coverage << " speedup=" << s.speedup_vs_exact
                  << (s.error.empty() ? "" : " error=" + s.error) << '\n';
      }
      if (!run_report_dir.empty()) bench::report(result, run_report_dir);
    } else if (*rep) {
      auto files = bench::report(bench::run_report_from_json(load_json(rep_in)), rep_dir);
      for (const auto& f : files) std::cout << f.string() << '\n';
    } else if (*serve) {
      ServiceOptions opts;
      if (!serve_config.empty()) {
        const Json c = load_json(serve_config);
        if (c.contains("engine")) opts.engine = engine_config_from_json(c.at("engine"), opts.engine);
        if (c.contains("init")) opts.init = init_config_from_json(c.at("init"), opts.init);
        if (c.contains("max_points")) opts.max_points = c.at("max_points").get<std::size_t>();
      }
      Service service(opts);
      HttpServer server(service);
      const int bound = server.bind(host, port);
      std::cout << "listening on " << host << ':' << bound << std::endl;
      server.listen();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
