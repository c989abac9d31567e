#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reach/geodesy.hpp"
#include "reach/quadtree.hpp"

namespace reach {

enum class Mode { foot, bike, car };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

/// How one transport mode uses the street network.
struct ModeProfile {
  Mode mode = Mode::foot;
  std::set<std::string> allowed_highways;
  std::map<std::string, double> speed_kmh;  // per highway tag
  double fallback_speed_kmh = 5.0;          // tags missing from speed_kmh
  bool respects_oneway = false;
  bool respects_maxspeed = false;
  // Access keys checked in order; the last one present on a way decides.
  std::vector<std::string> access_tags;

  double speed_for(const std::string& highway) const;
  double max_speed_kmh() const;

  /// Built-in profiles; identical to config/profiles.json.
  static ModeProfile defaults(Mode mode);

  friend bool operator==(const ModeProfile&, const ModeProfile&) = default;
};

using NodeIndex = std::uint32_t;

struct Edge {
  NodeIndex target = 0;  // for in_edges(): the edge source
  double length_m = 0.0;
  double time_s = 0.0;
};

struct DirectedEdge {
  NodeIndex source = 0;
  Edge edge;
};

/// Immutable per-mode street graph in compressed sparse row form, with both
/// forward and reverse adjacency and a quadtree over node coordinates.
class StreetGraph {
 public:
  StreetGraph() = default;
  StreetGraph(ModeProfile profile, std::vector<GeoPoint> nodes, std::vector<std::int64_t> osm_ids,
              std::vector<DirectedEdge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return forward_.size(); }
  bool empty() const { return nodes_.empty(); }

  const GeoPoint& node(NodeIndex v) const { return nodes_[v]; }
  std::span<const GeoPoint> nodes() const { return nodes_; }
  std::int64_t osm_id(NodeIndex v) const { return osm_ids_[v]; }

  std::span<const Edge> out_edges(NodeIndex v) const {
    return {forward_.data() + forward_offsets_[v], forward_.data() + forward_offsets_[v + 1]};
  }
  std::span<const Edge> in_edges(NodeIndex v) const {
    return {reverse_.data() + reverse_offsets_[v], reverse_.data() + reverse_offsets_[v + 1]};
  }

  /// All edges in (source, insertion) order.
  std::vector<DirectedEdge> edges() const;

  /// Fastest edge speed actually present; bounds network time from below.
  double max_edge_speed_kmh() const { return max_edge_speed_kmh_; }

  const ModeProfile& profile() const { return profile_; }
  Mode mode() const { return profile_.mode; }
  const QuadTree& node_index() const { return node_index_; }

 private:
  ModeProfile profile_;
  std::vector<GeoPoint> nodes_;
  std::vector<std::int64_t> osm_ids_;
  std::vector<std::uint32_t> forward_offsets_;
  std::vector<Edge> forward_;
  std::vector<std::uint32_t> reverse_offsets_;
  std::vector<Edge> reverse_;
  QuadTree node_index_;
  double max_edge_speed_kmh_ = 0.0;
};

inline constexpr std::uint32_t kGraphFormatVersion = 1;

/// Binary snapshot: magic, format version, profile, node table, edge table.
void save_graph(const StreetGraph& graph, const std::filesystem::path& path);
StreetGraph load_graph(const std::filesystem::path& path);

}  // namespace reach

namespace reach {

std::string profile_to_json(const ModeProfile& profile);
ModeProfile profile_from_json(std::string_view json_text);

/// Reads a profiles file: a JSON object keyed by mode name.
std::vector<ModeProfile> load_profiles(const std::filesystem::path& path);

}  // namespace reach
