// Corpus ingestion: TSV parsing, validation, D ∩ P cross-referencing and the
// canonical bundle file.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyport/common.hpp"

namespace dyport {

inline constexpr int kSchemaVersion = 1;

/// Corpus-level configuration: year range, feature layout and the semantic
/// type vocabulary. Read from a flat `key = value` file.
struct Manifest {
  int schema_version = kSchemaVersion;
  int year_min = 0;
  int year_max = 0;
  std::size_t feature_dim = 0;  // 0: no feature file
  std::vector<std::string> semantic_types;  // sorted; empty accepts any label
  std::string notes;

  bool contains_year(int year) const {
    return year >= year_min && year <= year_max;
  }
  bool knows_type(const std::string& t) const {
    return semantic_types.empty() ||
           std::binary_search(semantic_types.begin(), semantic_types.end(), t);
  }

  friend bool operator==(const Manifest&, const Manifest&) = default;

  static Manifest parse(std::istream& in, const std::string& source);
  static Manifest load(const std::filesystem::path& path);
};

struct NodeMeta {
  ConceptId id;
  std::vector<std::string> semantic_types;  // sorted, unique, non-empty
  std::optional<std::string> display_name;

  friend bool operator==(const NodeMeta&, const NodeMeta&) = default;
};

/// One element of D after deduplication across source databases.
struct CuratedPair {
  ConceptPair pair;
  std::set<std::string> sources;

  friend bool operator==(const CuratedPair&, const CuratedPair&) = default;
};

/// One element of P: a co-occurrence of a pair in one document.
struct MentionRecord {
  ConceptPair pair;
  std::string doc_id;
  int year = 0;

  friend bool operator==(const MentionRecord&, const MentionRecord&) = default;
};

struct CitationEdge {
  std::string citing_doc;
  std::string cited_doc;

  friend bool operator==(const CitationEdge&, const CitationEdge&) = default;
  friend auto operator<=>(const CitationEdge&, const CitationEdge&) = default;
};

using FeatureTable = std::map<std::pair<ConceptId, int>, std::vector<double>>;

/// Validated, canonicalized corpus. All collections are sorted so that two
/// parses of the same files compare equal.
struct CorpusBundle {
  Manifest manifest;
  std::vector<NodeMeta> nodes;          // by concept
  std::vector<CuratedPair> curated;     // by pair
  std::vector<MentionRecord> mentions;  // by (pair, doc)
  std::vector<CitationEdge> citations;  // by (citing, cited)
  FeatureTable features;

  const NodeMeta* find_node(const ConceptId& id) const {
    auto it = std::lower_bound(
        nodes.begin(), nodes.end(), id,
        [](const NodeMeta& n, const ConceptId& key) { return n.id < key; });
    return (it != nodes.end() && it->id == id) ? &*it : nullptr;
  }

  std::size_t unique_mention_pairs() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      if (i == 0 || mentions[i].pair != mentions[i - 1].pair) ++n;
    }
    return n;
  }

  friend bool operator==(const CorpusBundle&, const CorpusBundle&) = default;
};

struct CorpusPaths {
  std::filesystem::path nodes;
  std::filesystem::path curated;
  std::filesystem::path mentions;
  std::filesystem::path citations;
  std::optional<std::filesystem::path> features;

  /// Standard file names inside one directory; features.tsv is optional.
  static CorpusPaths in_directory(const std::filesystem::path& dir) {
    CorpusPaths p{dir / "nodes.tsv", dir / "curated.tsv", dir / "mentions.tsv",
                  dir / "citations.tsv", std::nullopt};
    if (std::filesystem::exists(dir / "features.tsv")) {
      p.features = dir / "features.tsv";
    }
    return p;
  }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline int parse_int(const std::string& s, const std::string& file,
                     std::size_t line, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ParseError(file, line, std::string("invalid ") + what + " '" + s + "'");
  }
  if (used != s.size()) {
    throw ParseError(file, line, std::string("invalid ") + what + " '" + s + "'");
  }
  return v;
}

inline double parse_double(const std::string& s, const std::string& file,
                           std::size_t line, const char* what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError(file, line, std::string("invalid ") + what + " '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) {
    throw ParseError(file, line, std::string("invalid ") + what + " '" + s + "'");
  }
  return v;
}

/// Reads a headered TSV file. Calls row(fields, line_no) for each data row;
/// blank lines are skipped. Column count is checked against [min, max]. A
/// zero-byte file reads as an empty table.
template <class RowFn>
void read_tsv(const std::filesystem::path& path, std::size_t min_cols,
              std::size_t max_cols, RowFn&& row) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  const std::string file = path.string();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    auto fields = text::split(line, '\t');
    if (fields.size() < min_cols || fields.size() > max_cols) {
      throw ParseError(file, line_no,
                       "expected " + std::to_string(min_cols) +
                           (min_cols == max_cols
                                ? ""
                                : "-" + std::to_string(max_cols)) +
                           " tab-separated columns, got " +
                           std::to_string(fields.size()));
    }
    for (auto& f : fields) f = std::string(text::trim(f));
    row(fields, line_no);
  }
}

inline ConceptId parse_concept(const std::string& s, const std::string& file,
                               std::size_t line) {
  try {
    return ConceptId(s);
  } catch (const ValidationError& e) {
    throw ParseError(file, line, e.what());
  }
}

}  // namespace detail

inline Manifest Manifest::parse(std::istream& in, const std::string& source) {
  Manifest m;
  bool have_min = false, have_max = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source, line_no, "expected key = value");
    }
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    if (key == "schema_version") {
      m.schema_version = detail::parse_int(value, source, line_no, key.c_str());
    } else if (key == "year_min") {
      m.year_min = detail::parse_int(value, source, line_no, key.c_str());
      have_min = true;
    } else if (key == "year_max") {
      m.year_max = detail::parse_int(value, source, line_no, key.c_str());
      have_max = true;
    } else if (key == "feature_dim") {
      const int d = detail::parse_int(value, source, line_no, key.c_str());
      if (d < 0) throw ParseError(source, line_no, "feature_dim must be >= 0");
      m.feature_dim = static_cast<std::size_t>(d);
    } else if (key == "semantic_types") {
      for (auto& t : text::split(value, ';')) {
        auto tt = std::string(text::trim(t));
        if (!tt.empty()) m.semantic_types.push_back(tt);
      }
      std::sort(m.semantic_types.begin(), m.semantic_types.end());
      m.semantic_types.erase(
          std::unique(m.semantic_types.begin(), m.semantic_types.end()),
          m.semantic_types.end());
    } else if (key == "notes") {
      m.notes = value;
    } else {
      throw ParseError(source, line_no, "unknown manifest key '" + key + "'");
    }
  }
  if (!have_min || !have_max) {
    throw ValidationError(source + ": manifest requires year_min and year_max");
  }
  if (m.year_min > m.year_max) {
    throw ValidationError(source + ": year_min > year_max");
  }
  if (m.schema_version != kSchemaVersion) {
    throw SchemaVersionError(source + ": unsupported schema_version " +
                             std::to_string(m.schema_version));
  }
  return m;
}

inline Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  return parse(in, path.string());
}

/// Parses and validates all corpus files. Rejects self-loops, duplicate
/// (pair, doc) mentions, unknown concepts and out-of-range years with a
/// file:line diagnostic.
inline CorpusBundle parse_corpus(const CorpusPaths& paths,
                                 const Manifest& manifest) {
  CorpusBundle bundle;
  bundle.manifest = manifest;

  {
    const std::string file = paths.nodes.string();
    std::set<ConceptId> seen;
    detail::read_tsv(paths.nodes, 2, 3, [&](const auto& f, std::size_t line) {
      NodeMeta node;
      node.id = detail::parse_concept(f[0], file, line);
      if (!seen.insert(node.id).second) {
        throw ParseError(file, line, "duplicate concept '" + f[0] + "'");
      }
      for (auto& t : text::split(f[1], ';')) {
        auto tt = std::string(text::trim(t));
        if (tt.empty()) continue;
        if (!manifest.knows_type(tt)) {
          throw ParseError(file, line,
                           "semantic type '" + tt + "' not in manifest vocabulary");
        }
        node.semantic_types.push_back(tt);
      }
      std::sort(node.semantic_types.begin(), node.semantic_types.end());
      node.semantic_types.erase(
          std::unique(node.semantic_types.begin(), node.semantic_types.end()),
          node.semantic_types.end());
      if (node.semantic_types.empty()) {
        throw ParseError(file, line, "node has no semantic type");
      }
      if (f.size() == 3 && !f[2].empty()) node.display_name = f[2];
      bundle.nodes.push_back(std::move(node));
    });
    std::sort(bundle.nodes.begin(), bundle.nodes.end(),
              [](const NodeMeta& x, const NodeMeta& y) { return x.id < y.id; });
  }

  auto pair_of = [&](const std::string& x, const std::string& y,
                     const std::string& file, std::size_t line) {
    auto a = detail::parse_concept(x, file, line);
    auto b = detail::parse_concept(y, file, line);
    if (a == b) throw ParseError(file, line, "self-loop on '" + x + "'");
    for (const auto* c : {&a, &b}) {
      if (!bundle.find_node(*c)) {
        throw ParseError(file, line, "unknown concept '" + c->str() + "'");
      }
    }
    return make_pair(std::move(a), std::move(b));
  };

  {
    const std::string file = paths.curated.string();
    std::map<ConceptPair, std::set<std::string>> curated;
    detail::read_tsv(paths.curated, 3, 3, [&](const auto& f, std::size_t line) {
      if (f[2].empty()) throw ParseError(file, line, "empty source_db");
      curated[pair_of(f[0], f[1], file, line)].insert(f[2]);
    });
    for (auto& [pair, sources] : curated) {
      bundle.curated.push_back(CuratedPair{pair, std::move(sources)});
    }
  }

  {
    const std::string file = paths.mentions.string();
    std::set<std::pair<ConceptPair, std::string>> seen;
    std::map<std::string, int> doc_years;
    detail::read_tsv(paths.mentions, 4, 4, [&](const auto& f, std::size_t line) {
      MentionRecord m;
      m.pair = pair_of(f[0], f[1], file, line);
      if (f[2].empty()) throw ParseError(file, line, "empty doc_id");
      m.doc_id = f[2];
      m.year = detail::parse_int(f[3], file, line, "year");
      if (!manifest.contains_year(m.year)) {
        throw ParseError(file, line,
                         "year " + f[3] + " outside manifest range [" +
                             std::to_string(manifest.year_min) + ", " +
                             std::to_string(manifest.year_max) + "]");
      }
      auto [doc, fresh] = doc_years.emplace(m.doc_id, m.year);
      if (!fresh && doc->second != m.year) {
        throw ParseError(file, line,
                         "document '" + m.doc_id + "' already has year " +
                             std::to_string(doc->second));
      }
      if (!seen.emplace(m.pair, m.doc_id).second) {
        throw ParseError(file, line,
                         "duplicate mention of " + to_string(m.pair) +
                             " in document '" + m.doc_id + "'");
      }
      bundle.mentions.push_back(std::move(m));
    });
    std::sort(bundle.mentions.begin(), bundle.mentions.end(),
              [](const MentionRecord& x, const MentionRecord& y) {
                return std::tie(x.pair, x.doc_id) < std::tie(y.pair, y.doc_id);
              });
  }

  {
    const std::string file = paths.citations.string();
    std::set<CitationEdge> edges;
    detail::read_tsv(paths.citations, 2, 2, [&](const auto& f, std::size_t line) {
      if (f[0].empty() || f[1].empty()) {
        throw ParseError(file, line, "empty document id");
      }
      if (f[0] == f[1]) throw ParseError(file, line, "document cites itself");
      edges.insert(CitationEdge{f[0], f[1]});
    });
    bundle.citations.assign(edges.begin(), edges.end());
  }

  if (paths.features) {
    const std::string file = paths.features->string();
    if (manifest.feature_dim == 0) {
      throw ValidationError(file + ": features given but manifest feature_dim is 0");
    }
    detail::read_tsv(*paths.features, 3, 3, [&](const auto& f, std::size_t line) {
      auto c = detail::parse_concept(f[0], file, line);
      if (!bundle.find_node(c)) {
        throw ParseError(file, line, "unknown concept '" + f[0] + "'");
      }
      const int year = detail::parse_int(f[1], file, line, "year");
      if (!manifest.contains_year(year)) {
        throw ParseError(file, line, "year " + f[1] + " outside manifest range");
      }
      std::vector<double> values;
      for (const auto& v : text::split(f[2], ',')) {
        values.push_back(detail::parse_double(std::string(text::trim(v)), file,
                                              line, "feature value"));
      }
      if (values.size() != manifest.feature_dim) {
        throw ParseError(file, line,
                         "feature vector has dimension " +
                             std::to_string(values.size()) + ", manifest declares " +
                             std::to_string(manifest.feature_dim));
      }
      if (!bundle.features.emplace(std::make_pair(c, year), std::move(values))
               .second) {
        throw ParseError(file, line, "duplicate feature row");
      }
    });
  }

  return bundle;
}

/// Loads `manifest.txt` plus the standard TSV files from one directory.
inline CorpusBundle load_corpus_dir(const std::filesystem::path& dir) {
  return parse_corpus(CorpusPaths::in_directory(dir),
                      Manifest::load(dir / "manifest.txt"));
}

// ---------------------------------------------------------------------------
// Cross-referencing
// ---------------------------------------------------------------------------

struct MentionRef {
  std::string doc_id;
  int year = 0;

  friend bool operator==(const MentionRef&, const MentionRef&) = default;
  friend auto operator<=>(const MentionRef&, const MentionRef&) = default;
};

/// An element of E = D ∩ P with all of its literature mentions.
struct CrossEdge {
  ConceptPair pair;
  std::vector<MentionRef> mentions;  // sorted by (year, doc)
  std::set<std::string> sources;

  int first_year() const { return mentions.front().year; }
};

struct CrossReferenced {
  std::vector<CrossEdge> edges;  // sorted by pair
  int year_min = 0;
  int year_max = 0;
  std::uint64_t fingerprint = 0;

  const CrossEdge* find(const ConceptPair& p) const {
    auto it = std::lower_bound(
        edges.begin(), edges.end(), p,
        [](const CrossEdge& e, const ConceptPair& key) { return e.pair < key; });
    return (it != edges.end() && it->pair == p) ? &*it : nullptr;
  }
};

/// Keeps exactly the pairs present in both the curated set and the mention
/// pair projection. Pairs found in only one of them are discarded.
inline CrossReferenced cross_reference(const CorpusBundle& bundle) {
  CrossReferenced out;
  out.year_min = bundle.manifest.year_min;
  out.year_max = bundle.manifest.year_max;

  auto cur = bundle.curated.begin();
  std::size_t i = 0;
  while (i < bundle.mentions.size()) {
    std::size_t j = i;
    while (j < bundle.mentions.size() &&
           bundle.mentions[j].pair == bundle.mentions[i].pair) {
      ++j;
    }
    const ConceptPair& pair = bundle.mentions[i].pair;
    while (cur != bundle.curated.end() && cur->pair < pair) ++cur;
    if (cur != bundle.curated.end() && cur->pair == pair) {
      CrossEdge edge{pair, {}, cur->sources};
      for (std::size_t k = i; k < j; ++k) {
        edge.mentions.push_back({bundle.mentions[k].doc_id, bundle.mentions[k].year});
      }
      std::sort(edge.mentions.begin(), edge.mentions.end(),
                [](const MentionRef& x, const MentionRef& y) {
                  return std::tie(x.year, x.doc_id) < std::tie(y.year, y.doc_id);
                });
      out.edges.push_back(std::move(edge));
    }
    i = j;
  }

  StableHash h;
  h.add(out.year_min).add(out.year_max);
  for (const auto& e : out.edges) {
    h.add(e.pair.a.str()).add(e.pair.b.str());
    for (const auto& m : e.mentions) h.add(m.doc_id).add(m.year);
  }
  out.fingerprint = h.digest();
  return out;
}

// ---------------------------------------------------------------------------
// Bundle persistence
// ---------------------------------------------------------------------------

inline constexpr const char* kBundleFormat = "dyport-bundle";

inline nlohmann::json bundle_to_json(const CorpusBundle& b) {
  using nlohmann::json;
  json j;
  j["format"] = kBundleFormat;
  j["schema_version"] = kSchemaVersion;
  j["manifest"] = {{"schema_version", b.manifest.schema_version},
                   {"year_min", b.manifest.year_min},
                   {"year_max", b.manifest.year_max},
                   {"feature_dim", b.manifest.feature_dim},
                   {"semantic_types", b.manifest.semantic_types},
                   {"notes", b.manifest.notes}};
  json nodes = json::array();
  for (const auto& n : b.nodes) {
    json row = {{"id", n.id.str()}, {"types", n.semantic_types}};
    if (n.display_name) row["name"] = *n.display_name;
    nodes.push_back(std::move(row));
  }
  j["nodes"] = std::move(nodes);
  json curated = json::array();
  for (const auto& c : b.curated) {
    curated.push_back({c.pair.a.str(), c.pair.b.str(), c.sources});
  }
  j["curated"] = std::move(curated);
  json mentions = json::array();
  for (const auto& m : b.mentions) {
    mentions.push_back({m.pair.a.str(), m.pair.b.str(), m.doc_id, m.year});
  }
  j["mentions"] = std::move(mentions);
  json citations = json::array();
  for (const auto& c : b.citations) citations.push_back({c.citing_doc, c.cited_doc});
  j["citations"] = std::move(citations);
  json features = json::array();
  for (const auto& [key, values] : b.features) {
    features.push_back({key.first.str(), key.second, values});
  }
  j["features"] = std::move(features);
  return j;
}

inline CorpusBundle bundle_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != kBundleFormat) {
    throw SchemaVersionError("not a corpus bundle (missing format tag)");
  }
  if (j.value("schema_version", -1) != kSchemaVersion) {
    throw SchemaVersionError("bundle schema_version mismatch: expected " +
                             std::to_string(kSchemaVersion));
  }
  try {
    CorpusBundle b;
    const auto& m = j.at("manifest");
    b.manifest.schema_version = m.at("schema_version").get<int>();
    b.manifest.year_min = m.at("year_min").get<int>();
    b.manifest.year_max = m.at("year_max").get<int>();
    b.manifest.feature_dim = m.at("feature_dim").get<std::size_t>();
    b.manifest.semantic_types = m.at("semantic_types").get<std::vector<std::string>>();
    b.manifest.notes = m.at("notes").get<std::string>();
    for (const auto& n : j.at("nodes")) {
      NodeMeta node{ConceptId(n.at("id").get<std::string>()),
                    n.at("types").get<std::vector<std::string>>(), std::nullopt};
      if (n.contains("name")) node.display_name = n.at("name").get<std::string>();
      b.nodes.push_back(std::move(node));
    }
    for (const auto& c : j.at("curated")) {
      b.curated.push_back({make_pair(ConceptId(c.at(0).get<std::string>()),
                                     ConceptId(c.at(1).get<std::string>())),
                           c.at(2).get<std::set<std::string>>()});
    }
    for (const auto& r : j.at("mentions")) {
      b.mentions.push_back({make_pair(ConceptId(r.at(0).get<std::string>()),
                                      ConceptId(r.at(1).get<std::string>())),
                            r.at(2).get<std::string>(), r.at(3).get<int>()});
    }
    for (const auto& c : j.at("citations")) {
      b.citations.push_back({c.at(0).get<std::string>(), c.at(1).get<std::string>()});
    }
    for (const auto& f : j.at("features")) {
      b.features.emplace(
          std::make_pair(ConceptId(f.at(0).get<std::string>()), f.at(1).get<int>()),
          f.at(2).get<std::vector<double>>());
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaVersionError(std::string("malformed bundle: ") + e.what());
  }
}

inline void save_bundle(const CorpusBundle& bundle,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << bundle_to_json(bundle).dump(1) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

inline CorpusBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaVersionError("corrupted bundle " + path.string() + ": " + e.what());
  }
  return bundle_from_json(j);
}

}  // namespace dyport
