// Copyright 2026 The CGA Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CGA_IO_HPP_
#define CGA_IO_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cga/coalition.hpp"
#include "cga/estimation.hpp"
#include "cga/game.hpp"

namespace cga {

using Json = nlohmann::ordered_json;

// 17 significant digits: enough for a bit-exact decimal round trip.
inline std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

inline double parse_double(const std::string& text, std::size_t line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw FormatError("line " + std::to_string(line) +
                      ": expected a number, got '" + text + "'");
  }
  return v;
}

inline std::vector<std::string> split(const std::string& text,
                                      char delimiter) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == delimiter) {
      parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(std::move(current));
  return parts;
}

// ";"-joined lexicographically sorted ids; the empty coalition is the empty
// string.
inline std::string players_field(const PlayerUniverse& universe,
                                 Coalition c) {
  std::vector<std::string> ids;
  for (int i : c.members()) ids.push_back(universe.id(i));
  std::sort(ids.begin(), ids.end());
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out.push_back(';');
    out += ids[i];
  }
  return out;
}

namespace internal {

// Assigns indices by first appearance across a file.
class UniverseBuilder {
 public:
  int intern(const std::string& id, std::size_t line) {
    if (id.empty()) {
      throw FormatError("line " + std::to_string(line) + ": empty player id");
    }
    if (id.find(',') != std::string::npos) {
      throw FormatError("line " + std::to_string(line) +
                        ": player id contains a comma");
    }
    auto [it, fresh] = index_.emplace(id, static_cast<int>(ids_.size()));
    if (fresh) ids_.push_back(id);
    return it->second;
  }

  // Parses one players field into member indices; rejects duplicates.
  std::vector<int> parse_field(const std::string& field, std::size_t line) {
    std::vector<int> members;
    if (field.empty()) return members;
    for (const std::string& id : split(field, ';')) {
      const int idx = intern(id, line);
      if (std::find(members.begin(), members.end(), idx) != members.end()) {
        throw FormatError("line " + std::to_string(line) +
                          ": duplicate player id '" + id + "'");
      }
      members.push_back(idx);
    }
    return members;
  }

  PlayerUniverse build() const {
    if (ids_.empty()) {
      throw FormatError("no players found in input");
    }
    return PlayerUniverse(ids_);
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
};

inline std::uint64_t mask_from_members(const std::vector<int>& members) {
  std::uint64_t mask = 0;
  for (int i : members) mask |= std::uint64_t{1} << i;
  return mask;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Performance CSV: header `players,value`.

inline std::string performance_csv_string(const PerformanceDataset& data) {
  std::string out = "players,value\n";
  for (const PerformanceRow& row : data.rows()) {
    out += players_field(data.universe(), row.coalition);
    out.push_back(',');
    out += format_double(row.value);
    out.push_back('\n');
  }
  return out;
}

inline PerformanceDataset parse_performance_csv(
    const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0] != "players,value") {
    throw FormatError("expected header 'players,value'");
  }
  internal::UniverseBuilder builder;
  std::vector<std::pair<std::vector<int>, double>> staged;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    const auto parts = split(lines[i], ',');
    if (parts.size() != 2) {
      throw FormatError("line " + std::to_string(line) +
                        ": expected 'players,value'");
    }
    staged.emplace_back(builder.parse_field(parts[0], line),
                        parse_double(parts[1], line));
  }
  PlayerUniverse universe = builder.build();
  std::vector<PerformanceRow> rows;
  rows.reserve(staged.size());
  for (const auto& [members, value] : staged) {
    rows.push_back({Coalition(internal::mask_from_members(members)), value});
  }
  return PerformanceDataset(std::move(universe), std::move(rows));
}

inline PerformanceDataset ingest_performance_csv(const std::string& path) {
  return parse_performance_csv(internal::read_lines(path));
}

// Game CSV: a performance CSV that covers every coalition exactly once.
inline std::string game_csv_string(const Game& g) {
  std::string out = "players,value\n";
  for (std::uint64_t mask = 0; mask < g.table_size(); ++mask) {
    out += players_field(g.universe(), Coalition(mask));
    out.push_back(',');
    out += format_double(g.values()[mask]);
    out.push_back('\n');
  }
  return out;
}

inline Game parse_game_csv(const std::vector<std::string>& lines) {
  PerformanceDataset data = parse_performance_csv(lines);
  const int n = data.universe().size();
  check_dense_capacity(n, kDenseTableMaxPlayers, "game CSV");
  const std::uint64_t table = std::uint64_t{1} << n;
  if (data.rows().size() != table) {
    throw FormatError("game CSV must list all " + std::to_string(table) +
                      " coalitions, found " +
                      std::to_string(data.rows().size()));
  }
  std::vector<double> values(table, 0.0);
  std::vector<bool> seen(table, false);
  for (const PerformanceRow& row : data.rows()) {
    if (seen[row.coalition.mask]) {
      throw FormatError("game CSV repeats coalition '" +
                        players_field(data.universe(), row.coalition) + "'");
    }
    seen[row.coalition.mask] = true;
    values[row.coalition.mask] = row.value;
  }
  return Game(data.universe(), std::move(values));
}

inline Game ingest_game_csv(const std::string& path) {
  return parse_game_csv(internal::read_lines(path));
}

// ---------------------------------------------------------------------------
// Matchup CSV: header `team_a,team_b,a_won` with a_won in {0,1}.

inline std::string matchup_csv_string(const MatchupDataset& data) {
  std::string out = "team_a,team_b,a_won\n";
  for (const MatchupRow& row : data.rows()) {
    out += players_field(data.universe(), row.team_a);
    out.push_back(',');
    out += players_field(data.universe(), row.team_b);
    out.push_back(',');
    out += row.a_won ? '1' : '0';
    out.push_back('\n');
  }
  return out;
}

inline MatchupDataset parse_matchup_csv(
    const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0] != "team_a,team_b,a_won") {
    throw FormatError("expected header 'team_a,team_b,a_won'");
  }
  internal::UniverseBuilder builder;
  struct Staged {
    std::vector<int> a;
    std::vector<int> b;
    bool a_won;
    std::size_t line;
  };
  std::vector<Staged> staged;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    const auto parts = split(lines[i], ',');
    if (parts.size() != 3) {
      throw FormatError("line " + std::to_string(line) +
                        ": expected 'team_a,team_b,a_won'");
    }
    if (parts[2] != "0" && parts[2] != "1") {
      throw FormatError("line " + std::to_string(line) +
                        ": a_won must be 0 or 1");
    }
    staged.push_back({builder.parse_field(parts[0], line),
                      builder.parse_field(parts[1], line), parts[2] == "1",
                      line});
  }
  PlayerUniverse universe = builder.build();
  std::vector<MatchupRow> rows;
  rows.reserve(staged.size());
  for (const Staged& s : staged) {
    const Coalition a(internal::mask_from_members(s.a));
    const Coalition b(internal::mask_from_members(s.b));
    if (a.empty() || b.empty()) {
      throw FormatError("line " + std::to_string(s.line) +
                        ": teams must be non-empty");
    }
    if (!a.disjoint(b)) {
      throw FormatError("line " + std::to_string(s.line) +
                        ": teams overlap");
    }
    rows.push_back({a, b, s.a_won});
  }
  return MatchupDataset(std::move(universe), std::move(rows));
}

inline MatchupDataset ingest_matchup_csv(const std::string& path) {
  return parse_matchup_csv(internal::read_lines(path));
}

// ---------------------------------------------------------------------------
// Model JSON: {"players":[...],"order":k,"weights":{"id1;id2":w},"meta":{...}}
// Weight keys appear in size-then-mask order.

inline Json model_to_json(const CgaModel& model, Json meta = Json()) {
  Json j;
  j["players"] = model.universe().ids();
  j["order"] = model.order();
  Json weights = Json::object();
  for (const auto& [s, w] : model.weights()) {
    weights[players_field(model.universe(), s)] = w;
  }
  j["weights"] = std::move(weights);
  if (!meta.is_null()) j["meta"] = std::move(meta);
  return j;
}

struct ModelFile {
  CgaModel model;
  Json meta;
};

inline ModelFile model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("players") || !j.contains("order") ||
      !j.contains("weights")) {
    throw FormatError("model JSON needs 'players', 'order', and 'weights'");
  }
  std::vector<std::string> ids;
  for (const auto& id : j.at("players")) {
    if (!id.is_string()) throw FormatError("player ids must be strings");
    ids.push_back(id.get<std::string>());
  }
  PlayerUniverse universe(ids);
  const int order = j.at("order").get<int>();
  CgaModel model(std::move(universe), order);
  for (const auto& [key, value] : j.at("weights").items()) {
    std::uint64_t mask = 0;
    for (const std::string& id : split(key, ';')) {
      mask |= std::uint64_t{1} << model.universe().index_of(id);
    }
    if (!value.is_number()) throw FormatError("weights must be numbers");
    model.set_weight(Coalition(mask), value.get<double>());
  }
  Json meta;
  if (j.contains("meta")) meta = j.at("meta");
  return ModelFile{std::move(model), std::move(meta)};
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write file: " + path);
  out << content;
  if (!out) throw FormatError("failed writing file: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_model_json(const CgaModel& model, const std::string& path,
                             Json meta = Json()) {
  write_text_file(path, model_to_json(model, std::move(meta)).dump(2) + "\n");
}

inline ModelFile read_model_json(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("invalid JSON in " + path + ": " + e.what());
  }
  return model_from_json(j);
}

// Allocation JSON: {"players":[...],"payoffs":[...]}.
inline Json allocation_to_json(const Allocation& allocation) {
  Json j;
  j["players"] = allocation.universe.ids();
  j["payoffs"] = allocation.payoffs;
  return j;
}

inline Allocation allocation_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("players") || !j.contains("payoffs")) {
    throw FormatError("allocation JSON needs 'players' and 'payoffs'");
  }
  std::vector<std::string> ids = j.at("players").get<std::vector<std::string>>();
  std::vector<double> payoffs = j.at("payoffs").get<std::vector<double>>();
  return Allocation(PlayerUniverse(std::move(ids)), std::move(payoffs));
}

// FNV-1a over the raw bytes; used for input digests in report envelopes.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

inline std::string file_digest(const std::string& path) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_text_file(path))));
  return buffer;
}

}  // namespace cga

#endif  // CGA_IO_HPP_
