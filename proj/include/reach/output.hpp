#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reach/nearest.hpp"

namespace reach {

/// Rank-based classes. Breakpoint i (1-based) is the sorted value at 0-based
/// rank ceil(i*n/k); a value's class is floor(k * (#values below it) / n),
/// which equals the number of breakpoints <= v except that values tied at a
/// breakpoint stay in the lower class.
struct QuantileClassification {
  int n_classes = 0;
  std::vector<double> breakpoints;  // n_classes - 1, ascending
  std::vector<int> classes;         // one per input value, in input order
};

QuantileClassification classify_quantiles(std::span<const double> values, int n_classes);

struct Histogram {
  std::vector<double> edges;        // bin_count + 1
  std::vector<std::size_t> counts;  // bin_count
};

/// Equal-width bins over [min, max]; the maximum lands in the last bin.
Histogram histogram(std::span<const double> values, std::size_t bin_count);

/// Values of the ok results, in result order.
std::vector<double> ok_values(std::span<const AccessibilityResult> results);

/// Hex colours from yellow (class 0) to violet (last class).
std::vector<std::string> color_ramp(int n_classes);

inline constexpr const char* kResultsHeader =
    "origin_id,mode,metric,dest_id,value,distance_m,status,line_id,walk_to_s,ride_s,walk_from_s,snap_distance_m";

void write_results_csv(std::span<const AccessibilityResult> results, const std::filesystem::path& path);

/// Parses a results file. Fields the CSV does not carry (origin location,
/// board/alight stop ids) are left default; travel_time_s is recovered from
/// `value` for time-metric rows and from the itinerary legs for transit.
std::vector<AccessibilityResult> read_results_csv(const std::filesystem::path& path);

/// Point features for the ok results, carrying travel_time_s, value,
/// quantile_class, dest_id and origin_id, plus a `legend` member with the
/// breakpoints and colour ramp.
void write_heatmap_geojson(std::span<const AccessibilityResult> results,
                           const QuantileClassification& classification, const std::filesystem::path& path);

/// Columns: bin_start,bin_end,count.
void write_histogram_csv(const Histogram& histogram, const std::filesystem::path& path);

}  // namespace reach
