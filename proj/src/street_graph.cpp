#include "reach/street_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "reach/errors.hpp"

namespace reach {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::foot: return "foot";
    case Mode::bike: return "bike";
    case Mode::car: return "car";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "foot") return Mode::foot;
  if (name == "bike") return Mode::bike;
  if (name == "car") return Mode::car;
  throw ArgumentError("unknown street mode '" + std::string(name) + "'");
}

double ModeProfile::speed_for(const std::string& highway) const {
  auto it = speed_kmh.find(highway);
  return it == speed_kmh.end() ? fallback_speed_kmh : it->second;
}

double ModeProfile::max_speed_kmh() const {
  double best = fallback_speed_kmh;
  for (const auto& [tag, speed] : speed_kmh) best = std::max(best, speed);
  return best;
}

ModeProfile ModeProfile::defaults(Mode mode) {
  ModeProfile p;
  p.mode = mode;
  switch (mode) {
    case Mode::foot:
      p.allowed_highways = {"primary",   "primary_link",  "secondary",   "secondary_link",
                            "tertiary",  "tertiary_link", "unclassified", "residential",
                            "living_street", "service",   "pedestrian",  "footway",
                            "path",      "steps",         "track",       "cycleway",
                            "road",      "trunk",         "trunk_link"};
      p.fallback_speed_kmh = 5.0;
      p.respects_oneway = false;
      p.respects_maxspeed = false;
      p.access_tags = {"access", "foot"};
      break;
    case Mode::bike:
      p.allowed_highways = {"primary",   "primary_link",  "secondary",    "secondary_link",
                            "tertiary",  "tertiary_link", "unclassified", "residential",
                            "living_street", "service",   "cycleway",     "path",
                            "track",     "road"};
      p.fallback_speed_kmh = 15.0;
      p.respects_oneway = true;
      p.respects_maxspeed = false;
      p.access_tags = {"access", "vehicle", "bicycle"};
      break;
    case Mode::car:
      p.allowed_highways = {"motorway",  "motorway_link", "trunk",         "trunk_link",
                            "primary",   "primary_link",  "secondary",     "secondary_link",
                            "tertiary",  "tertiary_link", "unclassified",  "residential",
                            "living_street", "service",   "road"};
      p.speed_kmh = {{"motorway", 100.0}, {"primary", 60.0}, {"secondary", 50.0}, {"residential", 40.0}};
      p.fallback_speed_kmh = 30.0;
      p.respects_oneway = true;
      p.respects_maxspeed = true;
      p.access_tags = {"access", "vehicle", "motor_vehicle", "motorcar"};
      break;
  }
  return p;
}

StreetGraph::StreetGraph(ModeProfile profile, std::vector<GeoPoint> nodes,
                         std::vector<std::int64_t> osm_ids, std::vector<DirectedEdge> edges)
    : profile_(std::move(profile)), nodes_(std::move(nodes)), osm_ids_(std::move(osm_ids)) {
  if (osm_ids_.size() != nodes_.size()) throw ArgumentError("osm id table size mismatch");
  const std::size_t n = nodes_.size();
  for (const auto& de : edges) {
    if (de.source >= n || de.edge.target >= n) throw ArgumentError("edge endpoint out of range");
    if (!(de.edge.length_m > 0.0) || !(de.edge.time_s > 0.0) || !std::isfinite(de.edge.length_m) ||
        !std::isfinite(de.edge.time_s)) {
      throw ArgumentError("edge weights must be positive and finite");
    }
    max_edge_speed_kmh_ = std::max(max_edge_speed_kmh_, de.edge.length_m / de.edge.time_s * 3.6);
  }

  auto build = [&](bool reverse, std::vector<std::uint32_t>& offsets, std::vector<Edge>& out) {
    offsets.assign(n + 1, 0);
    for (const auto& de : edges) ++offsets[(reverse ? de.edge.target : de.source) + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    out.resize(edges.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& de : edges) {
      const NodeIndex from = reverse ? de.edge.target : de.source;
      const NodeIndex to = reverse ? de.source : de.edge.target;
      out[cursor[from]++] = Edge{to, de.edge.length_m, de.edge.time_s};
    }
  };
  build(false, forward_offsets_, forward_);
  build(true, reverse_offsets_, reverse_);

  std::vector<QuadTreeEntry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) entries.push_back({nodes_[i], i});
  node_index_ = QuadTree(std::move(entries));
}

std::vector<DirectedEdge> StreetGraph::edges() const {
  std::vector<DirectedEdge> out;
  out.reserve(forward_.size());
  for (NodeIndex v = 0; v < node_count(); ++v) {
    for (const Edge& e : out_edges(v)) out.push_back({v, e});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles as JSON

namespace {

nlohmann::ordered_json profile_json(const ModeProfile& p) {
  nlohmann::ordered_json j;
  j["highways"] = std::vector<std::string>(p.allowed_highways.begin(), p.allowed_highways.end());
  j["speed_kmh"] = p.speed_kmh;
  j["default_speed_kmh"] = p.fallback_speed_kmh;
  j["oneway"] = p.respects_oneway;
  j["maxspeed"] = p.respects_maxspeed;
  j["access_tags"] = p.access_tags;
  return j;
}

ModeProfile profile_from(Mode mode, const nlohmann::json& j) {
  try {
    ModeProfile p;
    p.mode = mode;
    for (const auto& h : j.at("highways")) p.allowed_highways.insert(h.get<std::string>());
    if (j.contains("speed_kmh")) p.speed_kmh = j.at("speed_kmh").get<std::map<std::string, double>>();
    p.fallback_speed_kmh = j.at("default_speed_kmh").get<double>();
    p.respects_oneway = j.at("oneway").get<bool>();
    p.respects_maxspeed = j.at("maxspeed").get<bool>();
    if (j.contains("access_tags")) p.access_tags = j.at("access_tags").get<std::vector<std::string>>();
    if (!(p.fallback_speed_kmh > 0.0)) throw ArgumentError("default speed must be positive");
    for (const auto& [tag, v] : p.speed_kmh) {
      if (!(v > 0.0)) throw ArgumentError("speed for '" + tag + "' must be positive");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid profile for mode ") + std::string(to_string(mode)) +
                        ": " + e.what());
  }
}

}  // namespace

std::string profile_to_json(const ModeProfile& profile) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(profile.mode);
  j.update(profile_json(profile));
  return j.dump();
}

ModeProfile profile_from_json(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("mode")) {
    throw ArgumentError("malformed profile JSON");
  }
  return profile_from(parse_mode(j.at("mode").get<std::string>()), j);
}

std::vector<ModeProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profiles file " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ArgumentError("malformed profiles file " + path.string());
  std::vector<ModeProfile> out;
  for (Mode m : {Mode::foot, Mode::bike, Mode::car}) {
    const auto key = std::string(to_string(m));
    if (j.contains(key)) out.push_back(profile_from(m, j.at(key)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary snapshot (little-endian)

namespace {

constexpr char kGraphMagic[8] = {'R', 'E', 'A', 'C', 'H', 'S', 'G', '\0'};

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little-endian");

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw CacheError("truncated graph snapshot " + path.string());
  }
  return value;
}

}  // namespace

void save_graph(const StreetGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write graph snapshot " + path.string());
  out.write(kGraphMagic, sizeof kGraphMagic);
  put<std::uint32_t>(out, kGraphFormatVersion);
  const std::string profile = profile_to_json(graph.profile());
  put<std::uint64_t>(out, profile.size());
  out.write(profile.data(), static_cast<std::streamsize>(profile.size()));
  put<std::uint64_t>(out, graph.node_count());
  put<std::uint64_t>(out, graph.edge_count());
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    put(out, graph.node(v).lat());
    put(out, graph.node(v).lon());
    put(out, graph.osm_id(v));
  }
  for (const auto& de : graph.edges()) {
    put(out, de.source);
    put(out, de.edge.target);
    put(out, de.edge.length_m);
    put(out, de.edge.time_s);
  }
  if (!out) throw IoError("failed writing graph snapshot " + path.string());
}

StreetGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open graph snapshot " + path.string());
  char magic[sizeof kGraphMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kGraphMagic, sizeof magic) != 0) {
    throw CacheError(path.string() + " is not a street graph snapshot; re-run ingest-osm");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kGraphFormatVersion) {
    throw CacheError("graph snapshot " + path.string() + " has format version " +
                     std::to_string(version) + ", expected " + std::to_string(kGraphFormatVersion) +
                     "; re-run ingest-osm");
  }
  const auto profile_size = get<std::uint64_t>(in, path);
  std::string profile(profile_size, '\0');
  if (!in.read(profile.data(), static_cast<std::streamsize>(profile_size))) {
    throw CacheError("truncated graph snapshot " + path.string());
  }
  const auto node_count = get<std::uint64_t>(in, path);
  const auto edge_count = get<std::uint64_t>(in, path);

  std::vector<GeoPoint> nodes;
  std::vector<std::int64_t> osm_ids;
  nodes.reserve(node_count);
  osm_ids.reserve(node_count);
  for (std::uint64_t i = 0; i < node_count; ++i) {
    const auto lat = get<double>(in, path);
    const auto lon = get<double>(in, path);
    nodes.emplace_back(lat, lon);
    osm_ids.push_back(get<std::int64_t>(in, path));
  }
  std::vector<DirectedEdge> edges;
  edges.reserve(edge_count);
  for (std::uint64_t i = 0; i < edge_count; ++i) {
    DirectedEdge de;
    de.source = get<NodeIndex>(in, path);
    de.edge.target = get<NodeIndex>(in, path);
    de.edge.length_m = get<double>(in, path);
    de.edge.time_s = get<double>(in, path);
    edges.push_back(de);
  }
  try {
    return StreetGraph(profile_from_json(profile), std::move(nodes), std::move(osm_ids), std::move(edges));
  } catch (const ArgumentError& e) {
    throw CacheError("corrupt graph snapshot " + path.string() + ": " + e.what());
  }
}

}  // namespace reach
