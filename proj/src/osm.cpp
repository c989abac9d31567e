#include "reach/osm.hpp"

#include <expat.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <sstream>
#include <unordered_set>

#include "reach/errors.hpp"
#include "reach/log.hpp"

namespace reach {

namespace {

// Edges shorter than this (coincident nodes) are clamped to keep weights positive.
constexpr double kMinEdgeLengthM = 1e-3;

const char* find_attr(const XML_Char** attrs, const char* name) {
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    if (std::strcmp(attrs[i], name) == 0) return attrs[i + 1];
  }
  return nullptr;
}

class OsmXmlReader {
 public:
  OsmXmlReader() : parser_(XML_ParserCreate(nullptr), &XML_ParserFree) {
    XML_SetUserData(parser_.get(), this);
    XML_SetElementHandler(parser_.get(), &OsmXmlReader::on_start, &OsmXmlReader::on_end);
  }

  RawOsmData read(std::istream& in) {
    std::vector<char> buffer(1 << 16);
    while (true) {
      in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      const auto got = in.gcount();
      const bool last = got < static_cast<std::streamsize>(buffer.size());
      if (XML_Parse(parser_.get(), buffer.data(), static_cast<int>(got), last) == XML_STATUS_ERROR) {
        if (!error_.empty()) throw IngestError(error_);
        throw IngestError("OSM XML parse error at line " +
                          std::to_string(XML_GetCurrentLineNumber(parser_.get())) + ": " +
                          XML_ErrorString(XML_GetErrorCode(parser_.get())));
      }
      if (last) break;
    }
    return std::move(data_);
  }

 private:
  static void on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<OsmXmlReader*>(self)->start(name, attrs);
  }
  static void on_end(void* self, const XML_Char* name) { static_cast<OsmXmlReader*>(self)->end(name); }

  void fail(const std::string& what) {
    if (error_.empty()) {
      error_ = "OSM XML error at line " + std::to_string(XML_GetCurrentLineNumber(parser_.get())) +
               ": " + what;
    }
    XML_StopParser(parser_.get(), XML_FALSE);
  }

  template <typename T>
  bool number_attr(const XML_Char** attrs, const char* name, const char* element, T& out) {
    const char* text = find_attr(attrs, name);
    if (text == nullptr) {
      fail(std::string("<") + element + "> without '" + name + "' attribute");
      return false;
    }
    const char* end = text + std::strlen(text);
    auto [ptr, ec] = std::from_chars(text, end, out);
    if (ec != std::errc() || ptr != end) {
      fail(std::string("<") + element + "> has invalid '" + name + "' value '" + text + "'");
      return false;
    }
    return true;
  }

  void start(const XML_Char* name, const XML_Char** attrs) {
    if (std::strcmp(name, "node") == 0) {
      std::int64_t id = 0;
      double lat = 0.0;
      double lon = 0.0;
      if (!number_attr(attrs, "id", "node", id) || !number_attr(attrs, "lat", "node", lat) ||
          !number_attr(attrs, "lon", "node", lon)) {
        return;
      }
      try {
        data_.nodes.insert_or_assign(id, GeoPoint(lat, lon));
      } catch (const ArgumentError& e) {
        fail("node " + std::to_string(id) + ": " + e.what());
      }
    } else if (std::strcmp(name, "way") == 0) {
      in_way_ = true;
      way_ = OsmWay{};
      number_attr(attrs, "id", "way", way_.id);
    } else if (in_way_ && std::strcmp(name, "nd") == 0) {
      std::int64_t ref = 0;
      if (number_attr(attrs, "ref", "nd", ref)) way_.node_refs.push_back(ref);
    } else if (in_way_ && std::strcmp(name, "tag") == 0) {
      const char* k = find_attr(attrs, "k");
      const char* v = find_attr(attrs, "v");
      if (k == nullptr || v == nullptr) {
        fail("<tag> without k/v in way " + std::to_string(way_.id));
        return;
      }
      way_.tags.insert_or_assign(k, v);
    } else if (std::strcmp(name, "relation") == 0) {
      ++data_.relation_count;
    }
  }

  void end(const XML_Char* name) {
    if (std::strcmp(name, "way") == 0 && in_way_) {
      in_way_ = false;
      if (way_.tags.contains("highway")) data_.ways.push_back(std::move(way_));
    }
  }

  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser_;
  RawOsmData data_;
  OsmWay way_;
  bool in_way_ = false;
  std::string error_;
};

enum class Direction { both, forward, backward };

Direction way_direction(const OsmWay& way, const ModeProfile& profile) {
  if (!profile.respects_oneway) return Direction::both;
  auto it = way.tags.find("oneway");
  if (it == way.tags.end()) {
    auto junction = way.tags.find("junction");
    if (junction != way.tags.end() && junction->second == "roundabout") return Direction::forward;
    return Direction::both;
  }
  const std::string& v = it->second;
  if (v == "yes") return Direction::forward;
  if (v == "-1") return Direction::backward;
  if (v != "no") {
    log_warning("way " + std::to_string(way.id) + ": unrecognised oneway='" + v +
                "', treating as two-way");
  }
  return Direction::both;
}

bool access_allowed(const OsmWay& way, const ModeProfile& profile) {
  bool allowed = true;
  for (const auto& key : profile.access_tags) {
    auto it = way.tags.find(key);
    if (it != way.tags.end()) allowed = it->second != "no" && it->second != "private";
  }
  return allowed;
}

// Parses "50", "50 km/h", "30 mph"; nullopt otherwise.
std::optional<double> parse_maxspeed(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || !(value > 0.0)) return std::nullopt;
  std::string unit(ptr, end);
  unit.erase(0, unit.find_first_not_of(' '));
  if (unit.empty() || unit == "km/h" || unit == "kmh" || unit == "kph") return value;
  if (unit == "mph") return value * 1.609344;
  return std::nullopt;
}

double way_speed_kmh(const OsmWay& way, const ModeProfile& profile) {
  const std::string& highway = way.tags.at("highway");
  if (profile.respects_maxspeed) {
    if (auto it = way.tags.find("maxspeed"); it != way.tags.end()) {
      if (auto v = parse_maxspeed(it->second)) return *v;
    }
  }
  return profile.speed_for(highway);
}

struct RetainedWay {
  const OsmWay* way;
  std::vector<std::int64_t> refs;  // consecutive duplicates removed
  Direction direction;
  double speed_ms;
};

std::vector<RetainedWay> retained_ways(const RawOsmData& raw, const ModeProfile& profile) {
  std::vector<RetainedWay> out;
  for (const auto& way : raw.ways) {
    auto hw = way.tags.find("highway");
    if (hw == way.tags.end() || !profile.allowed_highways.contains(hw->second)) continue;
    if (!access_allowed(way, profile)) continue;
    for (auto ref : way.node_refs) {
      if (!raw.nodes.contains(ref)) {
        throw IngestError("way " + std::to_string(way.id) + " references missing node " +
                          std::to_string(ref));
      }
    }
    RetainedWay rw{&way, {}, way_direction(way, profile), way_speed_kmh(way, profile) / 3.6};
    for (auto ref : way.node_refs) {
      if (rw.refs.empty() || rw.refs.back() != ref) rw.refs.push_back(ref);
    }
    if (rw.refs.size() >= 2) out.push_back(std::move(rw));
  }
  return out;
}

struct RoutableCounts {
  std::size_t nodes = 0;
  std::size_t segments = 0;  // directed
};

RoutableCounts count_routable(const std::vector<RetainedWay>& ways) {
  std::unordered_set<std::int64_t> seen;
  RoutableCounts c;
  for (const auto& w : ways) {
    for (auto ref : w.refs) seen.insert(ref);
    c.segments += (w.refs.size() - 1) * (w.direction == Direction::both ? 2 : 1);
  }
  c.nodes = seen.size();
  return c;
}

}  // namespace

RawOsmData parse_osm_xml(std::istream& input) { return OsmXmlReader().read(input); }

RawOsmData parse_osm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open OSM file " + path.string());
  return parse_osm_xml(in);
}

StreetGraph extract_street_graph(const RawOsmData& raw, const ModeProfile& profile,
                                 ExtractOptions options) {
  const auto ways = retained_ways(raw, profile);

  // Occurrences across retained ways. A node seen twice (shared by two ways,
  // or revisited within one) is an intersection; way endpoints are kept too.
  std::unordered_map<std::int64_t, int> occurrences;
  for (const auto& w : ways) {
    for (auto ref : w.refs) ++occurrences[ref];
  }
  auto is_kept = [&](const RetainedWay& w, std::size_t pos) {
    if (!options.compress) return true;
    return pos == 0 || pos + 1 == w.refs.size() || occurrences.at(w.refs[pos]) >= 2;
  };

  std::unordered_map<std::int64_t, NodeIndex> index_of;
  std::vector<GeoPoint> nodes;
  std::vector<std::int64_t> osm_ids;
  auto index_for = [&](std::int64_t ref) {
    auto [it, inserted] = index_of.try_emplace(ref, static_cast<NodeIndex>(nodes.size()));
    if (inserted) {
      nodes.push_back(raw.nodes.at(ref));
      osm_ids.push_back(ref);
    }
    return it->second;
  };

  std::vector<DirectedEdge> edges;
  for (const auto& w : ways) {
    NodeIndex from = index_for(w.refs.front());
    double length = 0.0;
    double time = 0.0;
    for (std::size_t pos = 1; pos < w.refs.size(); ++pos) {
      const double seg = haversine_m(raw.nodes.at(w.refs[pos - 1]), raw.nodes.at(w.refs[pos]));
      length += seg;
      time += seg / w.speed_ms;
      if (!is_kept(w, pos)) continue;
      const NodeIndex to = index_for(w.refs[pos]);
      if (to != from) {
        if (length < kMinEdgeLengthM) {
          length = kMinEdgeLengthM;
          time = kMinEdgeLengthM / w.speed_ms;
        }
        if (w.direction != Direction::backward) edges.push_back({from, Edge{to, length, time}});
        if (w.direction != Direction::forward) edges.push_back({to, Edge{from, length, time}});
      }
      from = to;
      length = 0.0;
      time = 0.0;
    }
  }
  if (edges.empty()) {
    throw IngestError("no routable ways for mode " + std::string(to_string(profile.mode)));
  }
  return StreetGraph(profile, std::move(nodes), std::move(osm_ids), std::move(edges));
}

CompressionReport compression_report(const RawOsmData& raw, const StreetGraph& graph) {
  const auto counts = count_routable(retained_ways(raw, graph.profile()));
  CompressionReport r;
  r.mode = graph.mode();
  r.raw_node_count = counts.nodes;
  r.raw_edge_count = counts.segments;
  r.graph_node_count = graph.node_count();
  r.graph_edge_count = graph.edge_count();
  r.node_ratio = counts.nodes == 0 ? 1.0 : static_cast<double>(r.graph_node_count) / counts.nodes;
  r.edge_ratio = counts.segments == 0 ? 1.0 : static_cast<double>(r.graph_edge_count) / counts.segments;
  return r;
}

std::string format_compression_table(const std::vector<CompressionReport>& reports) {
  std::ostringstream out;
  char buf[64];
  out << "                        ";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%12s", std::string(to_string(r.mode)).c_str());
    out << buf;
  }
  out << '\n';
  auto row = [&](const char* label, auto field) {
    std::snprintf(buf, sizeof buf, "%-24s", label);
    out << buf;
    for (const auto& r : reports) {
      std::snprintf(buf, sizeof buf, "%12.6f", field(r));
      out << buf;
    }
    out << '\n';
  };
  auto count_row = [&](const char* label, auto field) {
    std::snprintf(buf, sizeof buf, "%-24s", label);
    out << buf;
    for (const auto& r : reports) {
      std::snprintf(buf, sizeof buf, "%12zu", field(r));
      out << buf;
    }
    out << '\n';
  };
  row("Node compression ratio", [](const CompressionReport& r) { return r.node_ratio; });
  row("Edge compression ratio", [](const CompressionReport& r) { return r.edge_ratio; });
  count_row("Raw nodes", [](const CompressionReport& r) { return r.raw_node_count; });
  count_row("Graph nodes", [](const CompressionReport& r) { return r.graph_node_count; });
  count_row("Raw edges", [](const CompressionReport& r) { return r.raw_edge_count; });
  count_row("Graph edges", [](const CompressionReport& r) { return r.graph_edge_count; });
  return out.str();
}

}  // namespace reach
