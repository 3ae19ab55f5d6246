#pragma once

#include <string>
#include <utility>
#include <vector>

#include "evline/types.hpp"

namespace evline::core {

enum class EventFormat { csv, binary };

EventFormat parse_event_format(const std::string& name);

// Bounds are checked against the given sensor size; timestamps must be
// non-decreasing in file order.
std::vector<Event> load_events(const std::string& path, EventFormat format, int width,
                               int height);
void write_events(const std::string& path, const std::vector<Event>& events,
                  EventFormat format);

PoseLog load_poses(const std::string& path);
void write_poses(const std::string& path, const PoseLog& log);

CameraIntrinsics load_calibration(const std::string& path);
void write_calibration(const std::string& path, const CameraIntrinsics& intr);

// Flat key=value file, '#' starts a comment. Repeated keys are kept in order.
std::vector<std::pair<std::string, std::string>> load_key_values(const std::string& path);

double parse_double(const std::string& text, const std::string& what);
std::int64_t parse_int(const std::string& text, const std::string& what);
std::string format_double(double v);

// Separator-split fields of one line, each trimmed.
std::vector<std::string> split_fields(const std::string& line, char sep = ',');

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace evline::core
