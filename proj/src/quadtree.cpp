#include "reach/quadtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "reach/errors.hpp"

namespace reach {

namespace {

// Closest point of a meridian segment [min_lat, max_lat] at longitude `lon`.
double meridian_segment_distance(const GeoPoint& p, double lon, double min_lat, double max_lat) {
  const double cos_dl = std::cos(deg_to_rad(p.lon() - lon));
  if (cos_dl <= 0.0) {
    // The foot of the perpendicular lies on the opposite half-meridian; on
    // this half the distance rises then falls, so an endpoint is closest.
    return std::min(haversine_m(p, GeoPoint(min_lat, lon)), haversine_m(p, GeoPoint(max_lat, lon)));
  }
  const double foot_lat = std::atan(std::tan(deg_to_rad(p.lat())) / cos_dl) * 180.0 / std::numbers::pi;
  return haversine_m(p, GeoPoint(std::clamp(foot_lat, min_lat, max_lat), lon));
}

bool hit_less(double d1, std::uint64_t id1, double d2, std::uint64_t id2) {
  return std::tie(d1, id1) < std::tie(d2, id2);
}

void check_limit(double limit_m) {
  if (!(limit_m > 0.0)) throw ArgumentError("query radius must be positive");
}

}  // namespace

double min_distance_m(const GeoBox& box, const GeoPoint& p) {
  if (box.contains(p)) return 0.0;
  double d;
  if (p.lon() >= box.min_lon && p.lon() <= box.max_lon) {
    d = haversine_m(p, GeoPoint(std::clamp(p.lat(), box.min_lat, box.max_lat), p.lon()));
  } else {
    d = std::min(meridian_segment_distance(p, box.min_lon, box.min_lat, box.max_lat),
                 meridian_segment_distance(p, box.max_lon, box.min_lat, box.max_lat));
  }
  return d * (1.0 - 1e-9);
}

QuadTree::QuadTree(std::vector<QuadTreeEntry> entries, std::size_t capacity, int max_depth)
    : entries_(std::move(entries)), capacity_(capacity), max_depth_(max_depth) {
  if (capacity_ == 0) throw ArgumentError("quadtree capacity must be positive");
  if (entries_.empty()) return;

  GeoBox root{entries_[0].point.lat(), entries_[0].point.lon(), entries_[0].point.lat(),
              entries_[0].point.lon()};
  for (const auto& e : entries_) {
    root.min_lat = std::min(root.min_lat, e.point.lat());
    root.max_lat = std::max(root.max_lat, e.point.lat());
    root.min_lon = std::min(root.min_lon, e.point.lon());
    root.max_lon = std::max(root.max_lon, e.point.lon());
  }
  nodes_.push_back(Node{root, -1, 0, static_cast<std::uint32_t>(entries_.size()), 0});

  // nodes_ grows while we walk it; children are appended after their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.end - n.begin > capacity_ && n.depth < max_depth_) split(i);
  }
}

void QuadTree::split(std::size_t node_index) {
  const Node parent = nodes_[node_index];
  const double mid_lat = (parent.box.min_lat + parent.box.max_lat) / 2.0;
  const double mid_lon = (parent.box.min_lon + parent.box.max_lon) / 2.0;
  auto quadrant = [&](const QuadTreeEntry& e) {
    return (e.point.lat() >= mid_lat ? 2 : 0) + (e.point.lon() >= mid_lon ? 1 : 0);
  };

  auto first = entries_.begin() + parent.begin;
  auto last = entries_.begin() + parent.end;
  std::stable_sort(first, last, [&](const QuadTreeEntry& a, const QuadTreeEntry& b) {
    return quadrant(a) < quadrant(b);
  });

  const std::array<GeoBox, 4> boxes = {
      GeoBox{parent.box.min_lat, parent.box.min_lon, mid_lat, mid_lon},
      GeoBox{parent.box.min_lat, mid_lon, mid_lat, parent.box.max_lon},
      GeoBox{mid_lat, parent.box.min_lon, parent.box.max_lat, mid_lon},
      GeoBox{mid_lat, mid_lon, parent.box.max_lat, parent.box.max_lon},
  };

  const auto first_child = static_cast<std::int32_t>(nodes_.size());
  auto cursor = first;
  for (int q = 0; q < 4; ++q) {
    auto stop = std::find_if(cursor, last, [&](const QuadTreeEntry& e) { return quadrant(e) > q; });
    nodes_.push_back(Node{boxes[q], -1, static_cast<std::uint32_t>(cursor - entries_.begin()),
                          static_cast<std::uint32_t>(stop - entries_.begin()), parent.depth + 1});
    cursor = stop;
  }
  nodes_[node_index].first_child = first_child;
}

std::optional<QuadTreeHit> QuadTree::nearest_within(const GeoPoint& p, double limit_m,
                                                    QueryStats* stats) const {
  check_limit(limit_m);
  if (entries_.empty()) return std::nullopt;

  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  frontier.emplace(min_distance_m(nodes_[0].box, p), 0);

  std::optional<QuadTreeHit> best;
  while (!frontier.empty()) {
    const auto [bound, index] = frontier.top();
    frontier.pop();
    if (bound >= limit_m || (best && bound > best->distance_m)) break;
    if (stats) ++stats->nodes_visited;

    const Node& n = nodes_[index];
    if (n.first_child < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const auto& e = entries_[i];
        const double d = haversine_m(p, e.point);
        if (d >= limit_m) continue;
        if (!best || hit_less(d, e.id, best->distance_m, best->id)) best = QuadTreeHit{e.id, e.point, d};
      }
      continue;
    }
    for (int c = 0; c < 4; ++c) {
      const Node& child = nodes_[n.first_child + c];
      if (child.begin == child.end) continue;
      const double lb = min_distance_m(child.box, p);
      if (lb >= limit_m || (best && lb > best->distance_m)) continue;
      frontier.emplace(lb, n.first_child + c);
    }
  }
  return best;
}

std::vector<QuadTreeHit> QuadTree::within_radius(const GeoPoint& p, double limit_m,
                                                 QueryStats* stats) const {
  check_limit(limit_m);
  std::vector<QuadTreeHit> hits;
  if (entries_.empty()) return hits;

  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.begin == n.end || min_distance_m(n.box, p) >= limit_m) continue;
    if (stats) ++stats->nodes_visited;
    if (n.first_child < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d = haversine_m(p, entries_[i].point);
        if (d < limit_m) hits.push_back(QuadTreeHit{entries_[i].id, entries_[i].point, d});
      }
    } else {
      for (int c = 3; c >= 0; --c) stack.push_back(n.first_child + c);
    }
  }
  std::sort(hits.begin(), hits.end(), [](const QuadTreeHit& a, const QuadTreeHit& b) {
    return hit_less(a.distance_m, a.id, b.distance_m, b.id);
  });
  return hits;
}

std::vector<QuadTreeHit> QuadTree::k_nearest(const GeoPoint& p, std::size_t k,
                                             QueryStats* stats) const {
  std::vector<QuadTreeHit> best;  // max-heap on (distance, id)
  if (entries_.empty() || k == 0) return best;
  auto worse = [](const QuadTreeHit& a, const QuadTreeHit& b) {
    return hit_less(a.distance_m, a.id, b.distance_m, b.id);
  };

  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  frontier.emplace(min_distance_m(nodes_[0].box, p), 0);
  while (!frontier.empty()) {
    const auto [bound, index] = frontier.top();
    frontier.pop();
    if (best.size() == k && bound > best.front().distance_m) break;
    if (stats) ++stats->nodes_visited;

    const Node& n = nodes_[index];
    if (n.first_child < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const auto& e = entries_[i];
        QuadTreeHit hit{e.id, e.point, haversine_m(p, e.point)};
        if (best.size() < k) {
          best.push_back(hit);
          std::push_heap(best.begin(), best.end(), worse);
        } else if (worse(hit, best.front())) {
          std::pop_heap(best.begin(), best.end(), worse);
          best.back() = hit;
          std::push_heap(best.begin(), best.end(), worse);
        }
      }
      continue;
    }
    for (int c = 0; c < 4; ++c) {
      const Node& child = nodes_[n.first_child + c];
      if (child.begin == child.end) continue;
      const double lb = min_distance_m(child.box, p);
      if (best.size() == k && lb > best.front().distance_m) continue;
      frontier.emplace(lb, n.first_child + c);
    }
  }
  std::sort_heap(best.begin(), best.end(), worse);
  return best;
}

std::vector<QuadTreeEntry> QuadTree::entries() const { return entries_; }

bool QuadTree::check_invariants() const {
  if (entries_.empty()) return nodes_.empty();
  std::size_t leaf_points = 0;
  for (const Node& n : nodes_) {
    if (n.first_child < 0) {
      if (n.end - n.begin > capacity_ && n.depth < max_depth_) return false;
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        if (!n.box.contains(entries_[i].point)) return false;
      }
      leaf_points += n.end - n.begin;
      continue;
    }
    const Node* c = &nodes_[n.first_child];
    if (c[0].begin != n.begin || c[3].end != n.end) return false;
    for (int q = 0; q < 3; ++q) {
      if (c[q].end != c[q + 1].begin) return false;
    }
    // Children tile the parent box.
    if (c[0].box.min_lat != n.box.min_lat || c[0].box.min_lon != n.box.min_lon ||
        c[3].box.max_lat != n.box.max_lat || c[3].box.max_lon != n.box.max_lon ||
        c[0].box.max_lat != c[2].box.min_lat || c[0].box.max_lon != c[1].box.min_lon ||
        c[1].box.max_lat != c[3].box.min_lat || c[2].box.max_lon != c[3].box.min_lon) {
      return false;
    }
  }
  return leaf_points == entries_.size();
}

}  // namespace reach
