#include "reach/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "reach/csv.hpp"
#include "reach/errors.hpp"
#include "reach/nearest.hpp"
#include "reach/osm.hpp"
#include "reach/output.hpp"
#include "reach/sampling.hpp"
#include "reach/transit.hpp"

namespace fs = std::filesystem;

namespace reach {

namespace {

// Usage/configuration problems map to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path.string());
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Removes the registered files unless commit() is called.
class OutputGuard {
 public:
  void add(fs::path p) { paths_.push_back(std::move(p)); }
  void commit() { paths_.clear(); }
  ~OutputGuard() {
    std::error_code ec;
    for (const auto& p : paths_) fs::remove(p, ec);
  }

 private:
  std::vector<fs::path> paths_;
};

struct IngestOptions {
  std::string osm;
  std::string out_dir;
  std::string profiles;
  std::vector<std::string> modes{"foot", "bike", "car"};
};

struct TransitOptions {
  std::string gtfs;
  std::string car_graph;
  std::string out;
  double multiplier = 1.0;
};

struct SampleOptions {
  std::string districts;
  std::string out;
  long long n = 0;
  std::uint64_t seed = 1;
};

struct ComputeOptions {
  std::string origins;
  std::string destinations;
  std::string graph_dir;
  std::string graph;
  std::string foot_graph;
  std::string transit_cache;
  std::string out_dir;
  std::string mode = "foot";
  std::string metric = "time_s";
  std::size_t k = 10;
  double walk_radius_m = 500.0;
  int classes = 5;
  std::size_t bins = 20;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
};

struct ExportOptions {
  std::string results;
  std::string origins;
  std::string out;
  std::string hist;
  int classes = 5;
  std::size_t bins = 20;
};

int cmd_ingest_osm(const IngestOptions& o, std::ostream& out) {
  require_file(o.osm, "OSM file");
  if (o.out_dir.empty()) throw UsageError("missing --out-dir");
  std::vector<ModeProfile> profiles;
  if (!o.profiles.empty()) {
    require_file(o.profiles, "profiles file");
    const auto loaded = load_profiles(o.profiles);
    for (const auto& name : o.modes) {
      const Mode m = parse_mode(name);
      auto it = std::find_if(loaded.begin(), loaded.end(), [&](const ModeProfile& p) { return p.mode == m; });
      if (it == loaded.end()) throw UsageError("profiles file has no entry for " + name);
      profiles.push_back(*it);
    }
  } else {
    for (const auto& name : o.modes) profiles.push_back(ModeProfile::defaults(parse_mode(name)));
  }

  const RawOsmData raw = parse_osm_file(o.osm);
  fs::create_directories(o.out_dir);
  OutputGuard guard;
  std::vector<CompressionReport> reports;
  for (const auto& profile : profiles) {
    const StreetGraph graph = extract_street_graph(raw, profile);
    const fs::path path = fs::path(o.out_dir) / (std::string(to_string(profile.mode)) + ".graph");
    guard.add(path);
    save_graph(graph, path);
    reports.push_back(compression_report(raw, graph));
    out << "wrote " << path.string() << " (" << graph.node_count() << " nodes, " << graph.edge_count()
        << " edges)\n";
  }
  out << format_compression_table(reports);
  guard.commit();
  return kExitOk;
}

int cmd_prepare_transit(const TransitOptions& o, std::ostream& out) {
  require_file(o.gtfs, "GTFS directory");
  require_file(o.car_graph, "car graph");
  if (o.out.empty()) throw UsageError("missing --out");
  if (!(o.multiplier > 0.0)) throw UsageError("--multiplier must be positive");

  TransitFeed feed = parse_gtfs(o.gtfs);
  const StreetGraph car = load_graph(o.car_graph);
  if (car.mode() != Mode::car) throw UsageError(o.car_graph + " is not a car graph");
  auto estimated = estimate_missing_timetables(std::move(feed.lines), car, o.multiplier);
  const LineIndex index(estimated.lines);  // validates every line

  TransitCache cache{o.multiplier, std::move(estimated.lines), std::move(estimated.excluded)};
  OutputGuard guard;
  guard.add(o.out);
  save_transit_cache(cache, o.out);
  guard.commit();

  std::size_t stop_total = 0, from_gtfs = 0;
  for (const auto& l : cache.lines) {
    stop_total += l.stops.size();
    from_gtfs += l.timetable_source == TimetableSource::gtfs_stop_times;
  }
  out << "lines: " << cache.lines.size() << '\n';
  out << "mean stops per line: "
      << (cache.lines.empty() ? 0.0 : static_cast<double>(stop_total) / cache.lines.size()) << '\n';
  out << "timetables from gtfs_stop_times: " << from_gtfs << '\n';
  out << "timetables estimated: " << cache.lines.size() - from_gtfs << '\n';
  out << "excluded lines: " << cache.excluded.size() << '\n';
  for (const auto& id : cache.excluded) out << "  " << id << '\n';
  return kExitOk;
}

int cmd_sample(const SampleOptions& o, std::ostream& out) {
  require_file(o.districts, "districts file");
  if (o.out.empty()) throw UsageError("missing --out");
  if (o.n <= 0) throw UsageError("-n must be positive");
  const auto districts = load_districts_geojson(o.districts);
  const auto origins = sample_origins(districts, static_cast<std::size_t>(o.n), o.seed);
  OutputGuard guard;
  guard.add(o.out);
  write_origins_csv(origins, o.out);
  guard.commit();
  const auto counts = allocate_counts(districts, static_cast<std::size_t>(o.n), o.seed);
  out << "sampled " << origins.size() << " origins in " << districts.size() << " districts\n";
  for (const auto& [id, c] : counts) out << "  " << id << ": " << c << '\n';
  return kExitOk;
}

std::string echo_config(const ComputeOptions& o) {
  std::ostringstream s;
  s << "origins=" << o.origins << '\n'
    << "destinations=" << o.destinations << '\n'
    << "graph-dir=" << o.graph_dir << '\n'
    << "graph=" << o.graph << '\n'
    << "foot-graph=" << o.foot_graph << '\n'
    << "transit-cache=" << o.transit_cache << '\n'
    << "out-dir=" << o.out_dir << '\n'
    << "mode=" << o.mode << '\n'
    << "metric=" << o.metric << '\n'
    << "candidates=" << o.k << '\n'
    << "walk-radius-m=" << format_double(o.walk_radius_m) << '\n'
    << "classes=" << o.classes << '\n'
    << "bins=" << o.bins << '\n'
    << "seed=" << o.seed << '\n'
    << "workers=" << o.workers << '\n';
  return s.str();
}

int cmd_compute(ComputeOptions o, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  NearestConfig config;
  try {
    config.mode = parse_travel_mode(o.mode);
    config.metric = parse_metric(o.metric);
    config.k = o.k;
    config.walk_radius_m = o.walk_radius_m;
    config.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  if (o.classes < 2) throw UsageError("--classes must be at least 2");
  if (o.bins == 0) throw UsageError("--bins must be positive");
  if (o.workers == 0) throw UsageError("--workers must be positive");
  require_file(o.origins, "origins file");
  require_file(o.destinations, "destinations file");
  if (o.out_dir.empty()) throw UsageError("missing --out-dir");

  fs::path graph_path;
  if (is_street_mode(config.mode)) {
    graph_path = !o.graph.empty() ? fs::path(o.graph) : fs::path(o.graph_dir) / (o.mode + ".graph");
    if (o.graph.empty() && o.graph_dir.empty()) throw UsageError("missing --graph or --graph-dir");
    require_file(graph_path, "street graph");
  } else {
    if (o.transit_cache.empty()) {
      throw UsageError("public_transport needs --transit-cache (build it with prepare-transit)");
    }
    require_file(o.transit_cache, "transit cache");
    graph_path = !o.foot_graph.empty() ? fs::path(o.foot_graph) : fs::path(o.graph_dir) / "foot.graph";
    if (o.foot_graph.empty() && o.graph_dir.empty()) throw UsageError("missing --foot-graph or --graph-dir");
    require_file(graph_path, "foot graph");
  }

  const auto origins = load_origins_csv(o.origins);
  const auto opportunities = load_opportunities_csv(o.destinations);
  if (opportunities.empty()) throw UsageError("destinations file has no rows");
  const StreetGraph graph = load_graph(graph_path);
  const Mode expected = is_street_mode(config.mode) ? street_mode(config.mode) : Mode::foot;
  if (graph.mode() != expected) {
    throw UsageError(graph_path.string() + " was built for " + std::string(to_string(graph.mode())) +
                     ", expected " + std::string(to_string(expected)));
  }

  std::optional<LineIndex> lines;
  std::unique_ptr<NearestEngine> engine;
  if (is_street_mode(config.mode)) {
    engine = std::make_unique<NetworkNearest>(graph, opportunities);
  } else {
    lines.emplace(load_transit_cache(o.transit_cache).lines);
    engine = std::make_unique<TransitNearest>(graph, *lines, opportunities, config.walk_radius_m);
  }

  QueryCounters counters;
  const auto results = batch_compute(origins, *engine, config, o.workers, &counters);
  const auto values = ok_values(results);
  if (!values.empty() && values.size() < static_cast<std::size_t>(o.classes)) {
    throw ArgumentError("only " + std::to_string(values.size()) + " reachable origins; need at least " +
                        std::to_string(o.classes) + " for the quantile classes");
  }
  QuantileClassification classes{o.classes, {}, {}};
  if (!values.empty()) classes = classify_quantiles(values, o.classes);

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  OutputGuard guard;
  guard.add(dir / "results.csv");
  write_results_csv(results, dir / "results.csv");
  guard.add(dir / "heatmap.geojson");
  write_heatmap_geojson(results, classes, dir / "heatmap.geojson");
  guard.add(dir / "histogram.csv");
  if (values.empty()) {
    std::ofstream(dir / "histogram.csv", std::ios::binary | std::ios::trunc) << "bin_start,bin_end,count\n";
  } else {
    write_histogram_csv(histogram(values, o.bins), dir / "histogram.csv");
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::ostringstream summary;
  summary << "# effective configuration\n" << echo_config(o);
  summary << "# run\n";
  summary << "origins: " << origins.size() << '\n';
  summary << "destinations: " << opportunities.size() << '\n';
  summary << "ok: " << values.size() << '\n';
  summary << "unreachable: " << results.size() - values.size() << '\n';
  summary << "routing evaluations: " << counters.candidates_evaluated << '\n';
  summary << "wall time s: " << std::fixed << std::setprecision(3) << seconds << '\n';
  guard.add(dir / "summary.txt");
  std::ofstream(dir / "summary.txt", std::ios::trunc) << summary.str();
  guard.commit();
  out << summary.str();
  return kExitOk;
}

int cmd_export_heatmap(const ExportOptions& o, std::ostream& out) {
  require_file(o.results, "results file");
  require_file(o.origins, "origins file");
  if (o.out.empty()) throw UsageError("missing --out");
  if (o.classes < 2) throw UsageError("--classes must be at least 2");

  auto results = read_results_csv(o.results);
  std::map<std::string, GeoPoint> locations;
  for (const auto& origin : load_origins_csv(o.origins)) locations.emplace(origin.id, origin.location);
  for (auto& r : results) {
    auto it = locations.find(r.origin_id);
    if (it == locations.end()) throw UsageError("origin '" + r.origin_id + "' missing from " + o.origins);
    r.origin = it->second;
  }
  const auto values = ok_values(results);
  QuantileClassification classes{o.classes, {}, {}};
  if (!values.empty()) classes = classify_quantiles(values, o.classes);

  OutputGuard guard;
  guard.add(o.out);
  write_heatmap_geojson(results, classes, o.out);
  if (!o.hist.empty() && !values.empty()) {
    guard.add(o.hist);
    write_histogram_csv(histogram(values, o.bins), o.hist);
  }
  guard.commit();
  out << "wrote " << o.out << " (" << values.size() << " features, " << results.size() - values.size()
      << " unreachable)\n";
  return kExitOk;
}

// Merges `--config FILE` (TOML or key=value lines, keys named after the long
// flags) into the subcommand's arguments. Flags on the command line win.
std::vector<std::string> merge_config_file(const CLI::App& app, std::vector<std::string> args) {
  if (args.empty() || args[0].starts_with('-')) return args;
  const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;

  std::string config_path;
  bool found = false;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      found = true;
      break;
    }
    if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      found = true;
      break;
    }
  }
  if (!found) return args;
  if (!fs::is_regular_file(config_path)) throw UsageError("config file not found: " + config_path);

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(config_path);
  } catch (const CLI::Error& e) {
    throw UsageError("cannot read config file " + config_path + ": " + e.what());
  }
  auto given_on_command_line = [&](const CLI::Option* opt) {
    for (std::size_t i = 1; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (!a.starts_with('-')) continue;
      if (opt->check_name(a.substr(0, a.find('=')))) return true;
    }
    return false;
  };
  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == args[0])) continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw UsageError("unknown key '" + item.name + "' in " + config_path);
    }
    if (given_on_command_line(opt)) continue;
    extra.push_back("--" + item.name);
    for (const auto& v : item.inputs) extra.push_back(v);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nearest-opportunity accessibility engine over OSM and GTFS data", "reach"};
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest-osm", "Build per-mode street graph snapshots from OSM XML");
  c_ingest->add_option("--osm", ingest.osm, "OSM XML extract")->required();
  c_ingest->add_option("--out-dir", ingest.out_dir, "Directory for <mode>.graph files")->required();
  c_ingest->add_option("--profiles", ingest.profiles, "Profiles JSON (defaults built in)");
  c_ingest->add_option("--modes", ingest.modes, "Street modes to build")->delimiter(',');

  TransitOptions transit;
  auto* c_transit = app.add_subcommand("prepare-transit", "Parse GTFS, estimate missing timetables, cache lines");
  c_transit->add_option("--gtfs", transit.gtfs, "GTFS feed directory")->required();
  c_transit->add_option("--car-graph", transit.car_graph, "car.graph snapshot")->required();
  c_transit->add_option("--multiplier", transit.multiplier, "Bus time = multiplier x car time")
      ->capture_default_str();
  c_transit->add_option("--out", transit.out, "Transit cache file")->required();

  SampleOptions sample;
  auto* c_sample = app.add_subcommand("sample", "Sample origins by district population");
  c_sample->add_option("--districts", sample.districts, "GeoJSON districts")->required();
  c_sample->add_option("-n,--count", sample.n, "Number of origins")->required();
  c_sample->add_option("--seed", sample.seed, "Random seed")->capture_default_str();
  c_sample->add_option("--out", sample.out, "Origins CSV")->required();

  ComputeOptions compute;
  auto* c_compute = app.add_subcommand("compute", "Nearest opportunity for every origin");
  c_compute->add_option("--origins", compute.origins, "Origins CSV (id,lat,lon)")->required();
  c_compute->add_option("--destinations", compute.destinations, "Destinations CSV (dest_id,lat,lon)")->required();
  c_compute->add_option("--graph-dir", compute.graph_dir, "Directory holding <mode>.graph");
  c_compute->add_option("--graph", compute.graph, "Street graph snapshot for the mode");
  c_compute->add_option("--foot-graph", compute.foot_graph, "Foot graph for public transport walks");
  c_compute->add_option("--transit-cache", compute.transit_cache, "Output of prepare-transit");
  c_compute->add_option("--out-dir", compute.out_dir, "Output directory")->required();
  c_compute->add_option("--mode", compute.mode, "foot | bike | car | public_transport")->capture_default_str();
  c_compute->add_option("--metric", compute.metric, "time_s | distance_m")->capture_default_str();
  c_compute->add_option("-k,--candidates", compute.k, "Geodesic candidates per origin")->capture_default_str();
  c_compute->add_option("--walk-radius-m", compute.walk_radius_m, "Max walk to a stop (m)")->capture_default_str();
  c_compute->add_option("--classes", compute.classes, "Quantile classes")->capture_default_str();
  c_compute->add_option("--bins", compute.bins, "Histogram bins")->capture_default_str();
  c_compute->add_option("--seed", compute.seed, "Recorded in the summary")->capture_default_str();
  c_compute->add_option("--workers", compute.workers, "Worker threads")->capture_default_str();

  ExportOptions exporter;
  auto* c_export = app.add_subcommand("export-heatmap", "Classify a results CSV into heatmap GeoJSON");
  c_export->add_option("--results", exporter.results, "results.csv from compute")->required();
  c_export->add_option("--origins", exporter.origins, "Origins CSV with coordinates")->required();
  c_export->add_option("--out", exporter.out, "GeoJSON output")->required();
  c_export->add_option("--hist", exporter.hist, "Optional histogram CSV output");
  c_export->add_option("--classes", exporter.classes, "Quantile classes")->capture_default_str();
  c_export->add_option("--bins", exporter.bins, "Histogram bins")->capture_default_str();

  std::string config_help;
  for (auto* sub : {c_ingest, c_transit, c_sample, c_compute, c_export}) {
    sub->add_option("--config", config_help, "TOML or key=value file; keys are long flag names");
  }

  std::vector<std::string> merged;
  try {
    merged = merge_config_file(app, std::vector<std::string>(args.begin() + (args.empty() ? 0 : 1), args.end()));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::vector<std::string> reversed(merged.rbegin(), merged.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest_osm(ingest, out);
    if (c_transit->parsed()) return cmd_prepare_transit(transit, out);
    if (c_sample->parsed()) return cmd_sample(sample, out);
    if (c_compute->parsed()) return cmd_compute(compute, out);
    if (c_export->parsed()) return cmd_export_heatmap(exporter, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace reach
