#pragma once

#include <stdexcept>
#include <string>

namespace reach {

// Invalid argument to a public operation (violated precondition).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// OSM parsing / graph extraction failures.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// GTFS feed problems (missing files, dangling references, bad times).
class FeedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Timetable estimation failed for a line (some leg unreachable by car).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cache/snapshot files: bad magic, version mismatch, truncation.
class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reach
