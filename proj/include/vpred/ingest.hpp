#pragma once

// Canonical route-archive format and per-VP RIB reconstruction.
//
// One record per line:
//   timestamp|vp_id|A or W|prefix|as_path (space separated)|communities (space separated)
// RIB snapshot files use the same record format (kind always A) under a
// `#RIB vp_id timestamp` header; a file may hold several snapshots.

#include <zlib.h>

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "vpred/common.hpp"

namespace vpred {

enum class UpdateKind { announce, withdraw };

struct BgpUpdate {
  Timestamp timestamp = 0;
  std::string vp_id;
  UpdateKind kind = UpdateKind::announce;
  std::string prefix;
  AsPath as_path;
  // File order is preserved so that serialization round-trips verbatim.
  std::vector<std::string> communities;

  bool is_announce() const noexcept { return kind == UpdateKind::announce; }
  friend bool operator==(const BgpUpdate&, const BgpUpdate&) = default;
};

struct RibRoute {
  AsPath as_path;
  std::vector<std::string> communities;
  Timestamp last_update_time = 0;

  friend bool operator==(const RibRoute&, const RibRoute&) = default;
};

struct RibTable {
  std::string vp_id;
  Timestamp as_of = 0;
  std::map<std::string, RibRoute> routes;

  friend bool operator==(const RibTable&, const RibTable&) = default;
};

/// What one update did to one prefix of a RIB.
struct RouteChange {
  std::string prefix;
  std::optional<RibRoute> before;
  std::optional<RibRoute> after;

  bool changed() const noexcept { return before.has_value() || after.has_value(); }
};

inline BgpUpdate parse_update_line(std::string_view line, std::size_t line_no = 0) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  auto fields = detail::split(line, '|');
  if (fields.size() != 6) {
    throw ParseError(line_no, "record",
                     "expected 6 fields, found " + std::to_string(fields.size()));
  }
  BgpUpdate u;
  if (!detail::parse_number(fields[0], u.timestamp) || u.timestamp < 0) {
    throw ParseError(line_no, "timestamp", "not a non-negative integer");
  }
  if (fields[1].empty()) throw ParseError(line_no, "vp_id", "empty");
  u.vp_id = std::string(fields[1]);
  if (fields[2] == "A") {
    u.kind = UpdateKind::announce;
  } else if (fields[2] == "W") {
    u.kind = UpdateKind::withdraw;
  } else {
    throw ParseError(line_no, "kind", "expected A or W");
  }
  if (fields[3].empty()) throw ParseError(line_no, "prefix", "empty");
  u.prefix = std::string(fields[3]);
  for (auto tok : detail::split_ws(fields[4])) {
    Asn asn = 0;
    if (!detail::parse_number(tok, asn)) {
      throw ParseError(line_no, "as_path", "non-numeric ASN '" + std::string(tok) + "'");
    }
    u.as_path.push_back(asn);
  }
  if (u.is_announce() && u.as_path.empty()) {
    throw ParseError(line_no, "as_path", "announce with empty path");
  }
  if (!u.is_announce() && !u.as_path.empty()) {
    throw ParseError(line_no, "as_path", "withdraw with non-empty path");
  }
  for (auto tok : detail::split_ws(fields[5])) u.communities.emplace_back(tok);
  return u;
}

inline std::string serialize_update(const BgpUpdate& u) {
  std::string out = std::to_string(u.timestamp);
  out += '|';
  out += u.vp_id;
  out += u.is_announce() ? "|A|" : "|W|";
  out += u.prefix;
  out += '|';
  for (std::size_t i = 0; i < u.as_path.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(u.as_path[i]);
  }
  out += '|';
  for (std::size_t i = 0; i < u.communities.size(); ++i) {
    if (i) out += ' ';
    out += u.communities[i];
  }
  return out;
}

/// Calls `fn(line, line_no)` for each line of a plain or gzip file.
inline void for_each_line(const std::string& path,
                          const std::function<void(std::string_view, std::size_t)>& fn) {
  std::unique_ptr<gzFile_s, int (*)(gzFile)> handle(gzopen(path.c_str(), "rb"), gzclose);
  if (!handle) throw Error("cannot open " + path);
  gzFile file = handle.get();
  std::string line;
  std::vector<char> buf(1 << 16);
  std::size_t line_no = 0;
  bool pending = false;
  for (;;) {
    char* got = gzgets(file, buf.data(), static_cast<int>(buf.size()));
    if (!got) break;
    std::string_view chunk(got);
    line.append(chunk);
    pending = true;
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      fn(line, ++line_no);
      line.clear();
      pending = false;
    }
  }
  int err = 0;
  const char* msg = gzerror(file, &err);
  if (err != Z_OK && err != Z_STREAM_END) throw Error(path + ": " + msg);
  if (pending) fn(line, ++line_no);
}

/// Reads an update archive. Blank lines and `#` comments are skipped.
inline std::vector<BgpUpdate> read_updates(const std::string& path) {
  std::vector<BgpUpdate> out;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    if (detail::trim(line).empty() || line.front() == '#') return;
    try {
      out.push_back(parse_update_line(line, no));
    } catch (const ParseError& e) {
      throw Error(path + ": " + e.what());
    }
  });
  return out;
}

inline void write_updates(std::ostream& os, std::span<const BgpUpdate> updates) {
  for (const auto& u : updates) os << serialize_update(u) << '\n';
}

/// Stable sort by timestamp; equal timestamps keep file order.
inline void sort_stream(std::vector<BgpUpdate>& updates) {
  std::stable_sort(updates.begin(), updates.end(),
                   [](const BgpUpdate& x, const BgpUpdate& y) { return x.timestamp < y.timestamp; });
}

inline bool is_sorted_stream(std::span<const BgpUpdate> updates) {
  return std::is_sorted(updates.begin(), updates.end(), [](const BgpUpdate& x, const BgpUpdate& y) {
    return x.timestamp < y.timestamp;
  });
}

inline std::vector<RibTable> read_rib_snapshots(const std::string& path) {
  std::vector<RibTable> out;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    if (detail::trim(line).empty()) return;
    if (line.starts_with("#RIB")) {
      auto parts = detail::split_ws(line);
      RibTable t;
      if (parts.size() != 3 || !detail::parse_number(parts[2], t.as_of)) {
        throw Error(path + ": " + ParseError(no, "header", "expected '#RIB vp_id timestamp'").what());
      }
      t.vp_id = std::string(parts[1]);
      out.push_back(std::move(t));
      return;
    }
    if (line.front() == '#') return;
    if (out.empty()) throw Error(path + ": " + ParseError(no, "header", "record before #RIB header").what());
    BgpUpdate u;
    try {
      u = parse_update_line(line, no);
    } catch (const ParseError& e) {
      throw Error(path + ": " + e.what());
    }
    if (!u.is_announce()) throw Error(path + ": " + ParseError(no, "kind", "RIB records must be A").what());
    auto& rib = out.back();
    if (u.vp_id != rib.vp_id) {
      throw Error(path + ": " + ParseError(no, "vp_id", "does not match #RIB header").what());
    }
    rib.routes[u.prefix] = RibRoute{std::move(u.as_path), std::move(u.communities), u.timestamp};
  });
  return out;
}

inline void write_rib_snapshot(std::ostream& os, const RibTable& rib) {
  os << "#RIB " << rib.vp_id << ' ' << rib.as_of << '\n';
  for (const auto& [prefix, route] : rib.routes) {
    BgpUpdate u{route.last_update_time, rib.vp_id, UpdateKind::announce, prefix, route.as_path,
                route.communities};
    os << serialize_update(u) << '\n';
  }
}

/// Applies one update of this RIB's VP and reports the before/after route.
/// A withdraw of an absent prefix changes nothing.
inline RouteChange apply_update(RibTable& rib, const BgpUpdate& u) {
  RouteChange change{u.prefix, std::nullopt, std::nullopt};
  auto it = rib.routes.find(u.prefix);
  if (it != rib.routes.end()) change.before = it->second;
  if (u.is_announce()) {
    RibRoute route{u.as_path, u.communities, u.timestamp};
    change.after = route;
    if (it != rib.routes.end()) {
      it->second = std::move(route);
    } else {
      rib.routes.emplace(u.prefix, std::move(route));
    }
  } else if (it != rib.routes.end()) {
    rib.routes.erase(it);
  } else {
    spdlog::debug("vp {}: withdraw of absent prefix {} at {} ignored", rib.vp_id, u.prefix,
                  u.timestamp);
  }
  if (rib.as_of < u.timestamp) rib.as_of = u.timestamp;
  return change;
}

/// RIB of `vp_id` at `t`: the snapshot with every later update of that VP up
/// to and including `t` applied in stream order. Updates at or before
/// `snapshot.as_of` are taken to be already reflected in the snapshot.
inline RibTable rib_at(std::string_view vp_id, Timestamp t, const RibTable& snapshot,
                       std::span<const BgpUpdate> updates) {
  if (snapshot.vp_id != vp_id) throw Error("rib_at: snapshot belongs to " + snapshot.vp_id);
  if (snapshot.as_of > t) throw Error("rib_at: snapshot is newer than the requested time");
  if (!is_sorted_stream(updates)) throw Error("rib_at: update stream is not sorted by timestamp");
  RibTable rib = snapshot;
  for (const auto& u : updates) {
    if (u.timestamp > t) break;
    if (u.timestamp <= snapshot.as_of || u.vp_id != vp_id) continue;
    apply_update(rib, u);
  }
  rib.as_of = t;
  return rib;
}

}  // namespace vpred
