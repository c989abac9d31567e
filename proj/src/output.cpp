#include "reach/output.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "reach/csv.hpp"
#include "reach/errors.hpp"

namespace reach {

QuantileClassification classify_quantiles(std::span<const double> values, int n_classes) {
  if (n_classes < 2) throw ArgumentError("need at least two classes");
  const std::size_t n = values.size();
  if (n < static_cast<std::size_t>(n_classes)) {
    throw ArgumentError("need at least " + std::to_string(n_classes) + " values to classify, got " +
                        std::to_string(n));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("cannot classify non-finite values");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  QuantileClassification q;
  q.n_classes = n_classes;
  const std::size_t k = static_cast<std::size_t>(n_classes);
  for (std::size_t i = 1; i < k; ++i) q.breakpoints.push_back(sorted[(i * n + k - 1) / k]);
  q.classes.reserve(n);
  for (double v : values) {
    const auto below = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    q.classes.push_back(static_cast<int>(k * below / n));
  }
  return q;
}

Histogram histogram(std::span<const double> values, std::size_t bin_count) {
  if (values.empty()) throw ArgumentError("histogram of an empty sample");
  if (bin_count == 0) throw ArgumentError("histogram needs at least one bin");
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("histogram of non-finite values");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double max = *hi;
  Histogram h;
  for (std::size_t i = 0; i <= bin_count; ++i) {
    h.edges.push_back(i == bin_count ? max : min + (max - min) * static_cast<double>(i) / bin_count);
  }
  h.counts.assign(bin_count, 0);
  for (double v : values) {
    // Number of interior edges at or below v.
    const auto bin = static_cast<std::size_t>(
        std::upper_bound(h.edges.begin() + 1, h.edges.end() - 1, v) - (h.edges.begin() + 1));
    ++h.counts[v == max ? bin_count - 1 : bin];
  }
  return h;
}

std::vector<double> ok_values(std::span<const AccessibilityResult> results) {
  std::vector<double> out;
  for (const auto& r : results) {
    if (r.status == ResultStatus::ok) out.push_back(r.value);
  }
  return out;
}

std::vector<std::string> color_ramp(int n_classes) {
  // Reversed viridis anchors: yellow → green → teal → blue → violet.
  static constexpr std::array<std::array<int, 3>, 5> anchors = {{
      {0xfd, 0xe7, 0x25}, {0x5e, 0xc9, 0x62}, {0x21, 0x91, 0x8c}, {0x3b, 0x52, 0x8b}, {0x44, 0x01, 0x54}}};
  std::vector<std::string> out;
  for (int i = 0; i < n_classes; ++i) {
    const double t = n_classes == 1 ? 0.0 : static_cast<double>(i) / (n_classes - 1) * (anchors.size() - 1);
    const auto a = std::min<std::size_t>(static_cast<std::size_t>(t), anchors.size() - 2);
    const double f = t - static_cast<double>(a);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
      rgb[c] = static_cast<int>(std::lround(anchors[a][c] + f * (anchors[a + 1][c] - anchors[a][c])));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    out.emplace_back(buf);
  }
  return out;
}

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::optional<double> number_field(const std::string& text, const std::filesystem::path& path,
                                   std::size_t line, const char* column) {
  if (text.empty()) return std::nullopt;
  auto v = parse_double(text);
  if (!v) throw IoError(path.string() + " line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
  return v;
}

}  // namespace

void write_results_csv(std::span<const AccessibilityResult> results, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << kResultsHeader << '\n';
  for (const auto& r : results) {
    const bool ok = r.status == ResultStatus::ok;
    out << csv_field(r.origin_id) << ',' << to_string(r.mode) << ',' << to_string(r.metric) << ','
        << (ok ? csv_field(r.dest_id) : std::string()) << ',' << (ok ? format_double(r.value) : std::string())
        << ',' << (ok ? optional_number(r.distance_m) : std::string()) << ',' << to_string(r.status) << ',';
    if (ok && r.itinerary) {
      const Itinerary& it = *r.itinerary;
      if (it.kind == ItineraryKind::bus_ride) {
        out << csv_field(it.line_id) << ',' << format_double(it.walk_to_s) << ',' << format_double(it.ride_s)
            << ',' << format_double(it.walk_from_s);
      } else {
        out << ',' << format_double(it.walk_to_s) << ",,";
      }
    } else {
      out << ",,,";
    }
    out << ',' << format_double(r.snap_distance_m) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<AccessibilityResult> read_results_csv(const std::filesystem::path& path) {
  CsvReader csv(path);
  std::string header;
  for (std::size_t i = 0; i < csv.header().size(); ++i) header += (i ? "," : "") + csv.header()[i];
  if (header != kResultsHeader) throw IoError(path.string() + ": unexpected results header");

  std::vector<AccessibilityResult> results;
  std::vector<std::string> row;
  while (csv.next(row)) {
    const std::size_t line = csv.line();
    AccessibilityResult r;
    try {
      r.origin_id = row[0];
      r.mode = parse_travel_mode(row[1]);
      r.metric = parse_metric(row[2]);
      r.status = parse_result_status(row[6]);
    } catch (const ArgumentError& e) {
      throw IoError(path.string() + " line " + std::to_string(line) + ": " + e.what());
    }
    r.snap_distance_m = number_field(row[11], path, line, "snap_distance_m").value_or(0.0);
    if (r.status == ResultStatus::ok) {
      r.dest_id = row[3];
      const auto value = number_field(row[4], path, line, "value");
      if (!value) throw IoError(path.string() + " line " + std::to_string(line) + ": ok row without value");
      r.value = *value;
      r.distance_m = number_field(row[5], path, line, "distance_m");
      if (r.metric == RouteMetric::time_s) r.travel_time_s = r.value;
      if (r.mode == TravelMode::public_transport) {
        Itinerary it;
        it.reachable = true;
        it.line_id = row[7];
        it.walk_to_s = number_field(row[8], path, line, "walk_to_s").value_or(0.0);
        if (it.line_id.empty()) {
          it.kind = ItineraryKind::walk_only;
          it.walk_reason = WalkReason::no_feasible_shared_line;
          it.total_s = it.walk_to_s;
        } else {
          it.kind = ItineraryKind::bus_ride;
          it.walk_reason = WalkReason::none;
          it.ride_s = number_field(row[9], path, line, "ride_s").value_or(0.0);
          it.walk_from_s = number_field(row[10], path, line, "walk_from_s").value_or(0.0);
          it.total_s = r.value;
        }
        r.itinerary = std::move(it);
      }
    }
    results.push_back(std::move(r));
  }
  return results;
}

void write_heatmap_geojson(std::span<const AccessibilityResult> results,
                           const QuantileClassification& classification, const std::filesystem::path& path) {
  std::size_t ok_count = 0;
  for (const auto& r : results) ok_count += r.status == ResultStatus::ok;
  if (classification.classes.size() != ok_count) {
    throw ArgumentError("classification does not match the ok results");
  }

  using Json = nlohmann::ordered_json;
  Json doc;
  doc["type"] = "FeatureCollection";
  auto& legend = doc["legend"];
  legend["n_classes"] = classification.n_classes;
  legend["metric"] = results.empty() ? "time_s" : std::string(to_string(results.front().metric));
  legend["breakpoints"] = classification.breakpoints;
  legend["colors"] = color_ramp(classification.n_classes);
  auto& features = doc["features"] = Json::array();
  std::size_t k = 0;
  for (const auto& r : results) {
    if (r.status != ResultStatus::ok) continue;
    Json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {r.origin.lon(), r.origin.lat()}}};
    Json props;
    props["origin_id"] = r.origin_id;
    props["dest_id"] = r.dest_id;
    if (std::isfinite(r.travel_time_s)) {
      props["travel_time_s"] = r.travel_time_s;
    } else {
      props["travel_time_s"] = nullptr;
    }
    props["value"] = r.value;
    props["quantile_class"] = classification.classes[k++];
    f["properties"] = std::move(props);
    features.push_back(std::move(f));
  }
  auto out = open_output(path);
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_histogram_csv(const Histogram& histogram, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "bin_start,bin_end,count\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    out << format_double(histogram.edges[i]) << ',' << format_double(histogram.edges[i + 1]) << ','
        << histogram.counts[i] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace reach
