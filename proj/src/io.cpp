#include "evline/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace evline::core {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view text, const std::string& what) {
  text = trim(text);
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ParseError("cannot parse " + what + " from '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  return parse_number<double>(text, what);
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  return parse_number<std::int64_t>(text, what);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

EventFormat parse_event_format(const std::string& name) {
  if (name == "csv") return EventFormat::csv;
  if (name == "binary") return EventFormat::binary;
  throw ConfigError("unknown event format '" + name + "'");
}

std::vector<Event> load_events(const std::string& path, EventFormat format, int width,
                               int height) {
  std::vector<Event> events;
  auto check = [&](const Event& e, std::size_t record) {
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height) {
      throw BoundsError("event " + std::to_string(record) + " at (" + std::to_string(e.x) +
                        "," + std::to_string(e.y) + ") outside " + std::to_string(width) +
                        "x" + std::to_string(height));
    }
    if (!events.empty() && e.t < events.back().t) {
      throw OrderError("timestamp regression at record " + std::to_string(record));
    }
  };

  if (format == EventFormat::csv) {
    std::string text = read_file(path);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line = trim(std::string_view(text).substr(start, end - start));
      start = end + 1;
      ++line_no;
      if (line.empty()) continue;
      auto fields = split(line, ',');
      if (fields.size() != 4) {
        throw ParseError("line " + std::to_string(line_no) + ": expected t,x,y,p");
      }
      Event e;
      try {
        e.t = parse_number<std::int64_t>(fields[0], "t");
        e.x = parse_number<std::int32_t>(fields[1], "x");
        e.y = parse_number<std::int32_t>(fields[2], "y");
        int p = parse_number<int>(fields[3], "p");
        if (p != 0 && p != 1) throw ParseError("polarity must be 0 or 1");
        e.p = static_cast<std::uint8_t>(p);
        if (e.t < 0) throw ParseError("negative timestamp");
      } catch (const ParseError& err) {
        throw ParseError("line " + std::to_string(line_no) + ": " + err.what());
      }
      check(e, events.size() + 1);
      events.push_back(e);
    }
    return events;
  }

  std::string raw = read_file(path);
  if (raw.size() % 13 != 0) {
    throw ParseError("binary event file size " + std::to_string(raw.size()) +
                     " is not a multiple of 13");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  std::size_t n = raw.size() / 13;
  events.reserve(n);
  for (std::size_t i = 0; i < n; ++i, p += 13) {
    Event e;
    e.t = static_cast<std::int64_t>(get_u64(p));
    e.x = get_u16(p + 8);
    e.y = get_u16(p + 10);
    if (p[12] != 0 && p[12] != 1) {
      throw ParseError("record " + std::to_string(i + 1) + ": polarity must be 0 or 1");
    }
    e.p = p[12];
    check(e, i + 1);
    events.push_back(e);
  }
  return events;
}

void write_events(const std::string& path, const std::vector<Event>& events,
                  EventFormat format) {
  std::string out;
  if (format == EventFormat::csv) {
    for (const Event& e : events) {
      out += std::to_string(e.t);
      out += ',';
      out += std::to_string(e.x);
      out += ',';
      out += std::to_string(e.y);
      out += ',';
      out += std::to_string(int(e.p));
      out += '\n';
    }
  } else {
    out.reserve(events.size() * 13);
    for (const Event& e : events) {
      put_u64(out, static_cast<std::uint64_t>(e.t));
      put_u16(out, static_cast<std::uint16_t>(e.x));
      put_u16(out, static_cast<std::uint16_t>(e.y));
      out.push_back(static_cast<char>(e.p));
    }
  }
  write_file(path, out);
}

PoseLog load_poses(const std::string& path) {
  std::string text = read_file(path);
  PoseLog log;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    if (fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected t,x,y,theta");
    }
    Pose2 pose;
    pose.t = parse_number<std::int64_t>(fields[0], "t");
    pose.x = parse_number<double>(fields[1], "x");
    pose.y = parse_number<double>(fields[2], "y");
    pose.theta = wrap_angle(parse_number<double>(fields[3], "theta"));
    if (!log.empty() && pose.t <= log.back().t) {
      throw OrderError("pose timestamps must strictly increase (line " +
                       std::to_string(line_no) + ")");
    }
    log.push_back(pose);
  }
  return log;
}

void write_poses(const std::string& path, const PoseLog& log) {
  std::string out;
  for (const Pose2& p : log) {
    out += std::to_string(p.t);
    out += ',';
    out += format_double(p.x);
    out += ',';
    out += format_double(p.y);
    out += ',';
    out += format_double(p.theta);
    out += '\n';
  }
  write_file(path, out);
}

CameraIntrinsics load_calibration(const std::string& path) {
  CameraIntrinsics intr;
  for (const auto& [key, value] : load_key_values(path)) {
    if (key == "width") intr.width = static_cast<int>(parse_int(value, key));
    else if (key == "height") intr.height = static_cast<int>(parse_int(value, key));
    else if (key == "alpha_x") intr.alpha_x = parse_double(value, key);
    else if (key == "alpha_y") intr.alpha_y = parse_double(value, key);
    else if (key == "u0") intr.u0 = parse_double(value, key);
    else if (key == "v0") intr.v0 = parse_double(value, key);
    else if (key == "k1") intr.k1 = parse_double(value, key);
    else if (key == "k2") intr.k2 = parse_double(value, key);
    else if (key == "p1") intr.p1 = parse_double(value, key);
    else if (key == "p2") intr.p2 = parse_double(value, key);
    else throw ParseError("unknown calibration key '" + key + "'");
  }
  intr.validate();
  return intr;
}

void write_calibration(const std::string& path, const CameraIntrinsics& intr) {
  std::string out;
  out += "width=" + std::to_string(intr.width) + "\n";
  out += "height=" + std::to_string(intr.height) + "\n";
  out += "alpha_x=" + format_double(intr.alpha_x) + "\n";
  out += "alpha_y=" + format_double(intr.alpha_y) + "\n";
  out += "u0=" + format_double(intr.u0) + "\n";
  out += "v0=" + format_double(intr.v0) + "\n";
  out += "k1=" + format_double(intr.k1) + "\n";
  out += "k2=" + format_double(intr.k2) + "\n";
  out += "p1=" + format_double(intr.p1) + "\n";
  out += "p2=" + format_double(intr.p2) + "\n";
  write_file(path, out);
}

std::vector<std::pair<std::string, std::string>> load_key_values(const std::string& path) {
  std::string text = read_file(path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line = std::string_view(text).substr(start, end - start);
    start = end + 1;
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected key=value");
    }
    pairs.emplace_back(std::string(trim(line.substr(0, eq))),
                       std::string(trim(line.substr(eq + 1))));
  }
  return pairs;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  for (std::string_view f : split(line, sep)) out.emplace_back(trim(f));
  return out;
}

}  // namespace evline::core
