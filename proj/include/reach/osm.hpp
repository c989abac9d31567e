#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "reach/geodesy.hpp"
#include "reach/street_graph.hpp"

namespace reach {

struct OsmWay {
  std::int64_t id = 0;
  std::vector<std::int64_t> node_refs;
  std::map<std::string, std::string> tags;
};

/// Nodes and highway-tagged ways of an OSM XML document. Relations are
/// counted but not kept.
struct RawOsmData {
  std::unordered_map<std::int64_t, GeoPoint> nodes;
  std::vector<OsmWay> ways;  // document order
  std::size_t relation_count = 0;
};

/// Streaming parse of OSM XML (Overpass or osmium output). Ways may precede
/// the nodes they reference; references are resolved after the whole
/// document has been read.
RawOsmData parse_osm_xml(std::istream& input);
RawOsmData parse_osm_file(const std::filesystem::path& path);

struct ExtractOptions {
  bool compress = true;  // merge degree-2 chains
};

/// Builds the directed street graph a profile allows. Graph node indices
/// follow the first appearance of each node in the retained ways.
StreetGraph extract_street_graph(const RawOsmData& raw, const ModeProfile& profile,
                                 ExtractOptions options = {});

struct CompressionReport {
  Mode mode = Mode::foot;
  std::size_t raw_node_count = 0;  // routable nodes before compression
  std::size_t graph_node_count = 0;
  std::size_t raw_edge_count = 0;  // directed segments before compression
  std::size_t graph_edge_count = 0;
  double node_ratio = 1.0;
  double edge_ratio = 1.0;
};

CompressionReport compression_report(const RawOsmData& raw, const StreetGraph& graph);

/// Renders reports as a ratio table, one column per mode.
std::string format_compression_table(const std::vector<CompressionReport>& reports);

}  // namespace reach
