#include "ctxmine/annotation.h"

#include <algorithm>
#include <array>
#include <limits>
#include <set>

#include "ctxmine/errors.h"
#include "rapidjson/document.h"
#include "rapidjson/error/en.h"

namespace ctxmine {

using nlohmann::json;

std::string_view to_string(Side side) {
  return side == Side::kSource ? "source" : "target";
}

MorphFeatures::MorphFeatures(std::initializer_list<Entry> entries) {
  for (const auto& [name, value] : entries) insert(name, value);
}

bool MorphFeatures::insert(std::string name, std::string value) {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), name,
      [](const Entry& e, const std::string& n) { return e.first < n; });
  if (it != entries_.end() && it->first == name) return false;
  entries_.emplace(it, std::move(name), std::move(value));
  return true;
}

std::optional<std::string_view> MorphFeatures::get(
    std::string_view name) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), name,
      [](const Entry& e, std::string_view n) { return e.first < n; });
  if (it == entries_.end() || it->first != name) return std::nullopt;
  return std::string_view(it->second);
}

namespace {

struct FeatureDomain {
  std::string_view name;
  std::array<std::string_view, 6> values;
};

constexpr FeatureDomain kDomains[] = {
    {"Case", {"Nom", "Acc", "Dat", "Gen", "Loc", "Ins"}},
    {"Gender", {"Masc", "Fem", "Neut"}},
    {"Number", {"Sing", "Plur"}},
    {"Person", {"1", "2", "3"}},
};

const FeatureDomain* find_domain(std::string_view name) {
  for (const auto& d : kDomains)
    if (d.name == name) return &d;
  return nullptr;
}

using Value = rapidjson::Value;

// JSON-pointer path to a value, rendered only when reporting an error.
struct Path {
  const Path* parent = nullptr;
  const char* key = nullptr;
  std::size_t index = 0;

  Path child(const char* k) const { return {this, k, 0}; }
  Path at(std::size_t i) const { return {this, nullptr, i}; }

  std::string str() const {
    if (parent == nullptr) return "";
    return parent->str() + "/" + (key ? std::string(key) : std::to_string(index));
  }
};

// Reads typed fields out of one record while tracking the document id for
// error messages.
class RecordReader {
 public:
  void set_doc_id(std::string id) { doc_id_ = std::move(id); }

  [[noreturn]] void fail(const Path& path, const std::string& msg) const {
    throw SchemaError(doc_id_, path.str(), msg);
  }

  const Value& field(const Value& obj, const Path& path) const {
    auto it = obj.FindMember(path.key);
    if (it == obj.MemberEnd()) fail(path, "missing field");
    return it->value;
  }

  const Value* optional_field(const Value& obj, const char* key) const {
    auto it = obj.FindMember(key);
    if (it == obj.MemberEnd() || it->value.IsNull()) return nullptr;
    return &it->value;
  }

  const Value& object(const Value& v, const Path& path) const {
    if (!v.IsObject()) fail(path, "expected an object");
    return v;
  }

  const Value& array(const Value& v, const Path& path) const {
    if (!v.IsArray()) fail(path, "expected an array");
    return v;
  }

  std::string string(const Value& v, const Path& path) const {
    if (!v.IsString()) fail(path, "expected a string");
    return {v.GetString(), v.GetStringLength()};
  }

  int integer(const Value& v, const Path& path) const {
    if (v.IsInt()) return v.GetInt();
    if (v.IsInt64() || v.IsUint64()) fail(path, "integer out of range");
    fail(path, "expected an integer");
  }

  // Typed member lookups.
  std::string string_field(const Value& obj, const Path& path) const {
    return string(field(obj, path), path);
  }
  int integer_field(const Value& obj, const Path& path) const {
    return integer(field(obj, path), path);
  }

 private:
  std::string doc_id_;
};

MorphFeatures read_feats(const RecordReader& r, const Value& v, const Path& path) {
  MorphFeatures feats;
  r.object(v, path);
  for (auto it = v.MemberBegin(); it != v.MemberEnd(); ++it) {
    std::string name(it->name.GetString(), it->name.GetStringLength());
    const Path fpath = path.child(name.c_str());
    if (name.empty()) r.fail(fpath, "empty feature name");
    std::string value = r.string(it->value, fpath);
    if (!is_valid_feature_value(name, value))
      r.fail(fpath, "value '" + value + "' is not allowed for " + name);
    feats.insert(std::move(name), std::move(value));
  }
  return feats;
}

Token read_token(const RecordReader& r, const Value& v, int index, const Path& path) {
  r.object(v, path);
  Token t;
  t.index = index;
  t.form = r.string_field(v, path.child("form"));
  if (t.form.empty()) r.fail(path.child("form"), "form must be nonempty");
  t.lemma = r.string_field(v, path.child("lemma"));
  t.upos = r.string_field(v, path.child("upos"));
  if (const Value* f = r.optional_field(v, "feats")) t.feats = read_feats(r, *f, path.child("feats"));
  if (const Value* h = r.optional_field(v, "head")) t.head = r.integer(*h, path.child("head"));
  return t;
}

std::vector<Sentence> read_side(const RecordReader& r, const Value& v, const Path& path) {
  r.array(v, path);
  std::vector<Sentence> out;
  out.reserve(v.Size());
  for (rapidjson::SizeType s = 0; s < v.Size(); ++s) {
    const Path spath = path.at(s);
    const Value& sent = r.object(v[s], spath);
    const Path tpath = spath.child("tokens");
    const Value& tokens = r.array(r.field(sent, tpath), tpath);
    Sentence sentence;
    sentence.index = static_cast<int>(s);
    sentence.tokens.reserve(tokens.Size());
    for (rapidjson::SizeType i = 0; i < tokens.Size(); ++i)
      sentence.tokens.push_back(read_token(r, tokens[i], static_cast<int>(i), tpath.at(i)));
    out.push_back(std::move(sentence));
  }
  return out;
}

AnnotatedDocumentPair read_record(const Value& record) {
  RecordReader r;
  const Path root;
  r.object(record, root);
  AnnotatedDocumentPair doc;
  doc.doc_id = r.string_field(record, root.child("doc_id"));
  r.set_doc_id(doc.doc_id);
  if (const Value* y = r.optional_field(record, "year")) doc.year = r.integer(*y, root.child("year"));
  doc.source_lang = r.string_field(record, root.child("source_lang"));
  doc.target_lang = r.string_field(record, root.child("target_lang"));
  doc.source = read_side(r, r.field(record, root.child("source")), root.child("source"));
  doc.target = read_side(r, r.field(record, root.child("target")), root.child("target"));

  if (const Value* coref = r.optional_field(record, "source_coref")) {
    const Path cpath_root = root.child("source_coref");
    r.array(*coref, cpath_root);
    for (rapidjson::SizeType c = 0; c < coref->Size(); ++c) {
      const Path cpath = cpath_root.at(c);
      const Value& jc = r.object((*coref)[c], cpath);
      CorefChain chain;
      chain.chain_id = r.integer_field(jc, cpath.child("chain_id"));
      const Path mroot = cpath.child("mentions");
      const Value& ms = r.array(r.field(jc, mroot), mroot);
      for (rapidjson::SizeType m = 0; m < ms.Size(); ++m) {
        const Path mpath = mroot.at(m);
        const Value& jm = r.object(ms[m], mpath);
        chain.mentions.push_back({r.integer_field(jm, mpath.child("sent")),
                                  r.integer_field(jm, mpath.child("start")),
                                  r.integer_field(jm, mpath.child("end"))});
      }
      doc.source_coref.push_back(std::move(chain));
    }
  }

  if (const Value* links = r.optional_field(record, "alignments")) {
    const Path lroot = root.child("alignments");
    r.array(*links, lroot);
    doc.alignments.reserve(links->Size());
    for (rapidjson::SizeType i = 0; i < links->Size(); ++i) {
      const Path lpath = lroot.at(i);
      const Value& jl = r.object((*links)[i], lpath);
      doc.alignments.push_back({r.integer_field(jl, lpath.child("sent")),
                                r.integer_field(jl, lpath.child("src")),
                                r.integer_field(jl, lpath.child("tgt"))});
    }
  }

  validate_document(doc);
  return doc;
}

std::string loc(Side side, int sentence, int token) {
  return std::string(to_string(side)) + "[" + std::to_string(sentence) + "][" +
         std::to_string(token) + "]";
}

void check_position(const AnnotatedDocumentPair& doc, Side side, Position pos) {
  const auto& sents = doc.side(side);
  if (pos.sentence < 0 || pos.sentence >= static_cast<int>(sents.size()))
    throw RangeError(doc.doc_id, loc(side, pos.sentence, pos.token),
                     "sentence index out of range");
  if (pos.token < 0 || pos.token >= sents[pos.sentence].size())
    throw RangeError(doc.doc_id, loc(side, pos.sentence, pos.token),
                     "token index out of range");
}

void validate_side(const AnnotatedDocumentPair& doc, Side side) {
  for (const Sentence& s : doc.side(side)) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const Token& t = s.tokens[i];
      if (t.index != static_cast<int>(i))
        throw SchemaError(doc.doc_id, loc(side, s.index, static_cast<int>(i)),
                          "token index does not match its position");
      if (t.form.empty())
        throw SchemaError(doc.doc_id, loc(side, s.index, t.index) + "/form",
                          "form must be nonempty");
      if (t.head && (*t.head < 0 || *t.head >= s.size()))
        throw RangeError(doc.doc_id, loc(side, s.index, t.index) + "/head",
                         "head " + std::to_string(*t.head) +
                             " outside sentence of " +
                             std::to_string(s.size()) + " tokens");
    }
  }
}

}  // namespace

bool is_recognized_feature(std::string_view name) {
  return find_domain(name) != nullptr;
}

bool is_valid_feature_value(std::string_view name, std::string_view value) {
  const FeatureDomain* d = find_domain(name);
  if (d == nullptr) return true;
  return std::find(d->values.begin(), d->values.end(), value) !=
             d->values.end() &&
         !value.empty();
}

void validate_document(AnnotatedDocumentPair& doc) {
  if (doc.doc_id.empty()) throw SchemaError("", "/doc_id", "doc_id must be nonempty");
  if (doc.source_lang.empty())
    throw SchemaError(doc.doc_id, "/source_lang", "must be nonempty");
  if (doc.target_lang.empty())
    throw SchemaError(doc.doc_id, "/target_lang", "must be nonempty");
  if (doc.source.size() != doc.target.size())
    throw SchemaError(doc.doc_id, "/target",
                      "source has " + std::to_string(doc.source.size()) +
                          " sentences but target has " +
                          std::to_string(doc.target.size()));
  for (std::size_t s = 0; s < doc.source.size(); ++s) {
    if (doc.source[s].index != static_cast<int>(s) ||
        doc.target[s].index != static_cast<int>(s))
      throw SchemaError(doc.doc_id, "/source/" + std::to_string(s),
                        "sentence index does not match its position");
  }
  validate_side(doc, Side::kSource);
  validate_side(doc, Side::kTarget);

  std::set<int> chain_ids;
  for (std::size_t c = 0; c < doc.source_coref.size(); ++c) {
    CorefChain& chain = doc.source_coref[c];
    const std::string cpath = "/source_coref/" + std::to_string(c);
    if (!chain_ids.insert(chain.chain_id).second)
      throw SchemaError(doc.doc_id, cpath + "/chain_id",
                        "duplicate chain_id " + std::to_string(chain.chain_id));
    if (chain.mentions.size() < 2)
      throw SchemaError(doc.doc_id, cpath + "/mentions",
                        "a chain needs at least 2 mentions");
    for (const Mention& m : chain.mentions) {
      const std::string where = cpath + " mention (" +
                                std::to_string(m.sentence) + "," +
                                std::to_string(m.start) + "," +
                                std::to_string(m.end) + ")";
      if (m.sentence < 0 || m.sentence >= doc.sentence_count())
        throw RangeError(doc.doc_id, where, "sentence index out of range");
      if (m.start < 0 || m.start >= m.end ||
          m.end > doc.source[m.sentence].size())
        throw RangeError(doc.doc_id, where, "span outside sentence");
    }
    std::sort(chain.mentions.begin(), chain.mentions.end());
    for (std::size_t i = 1; i < chain.mentions.size(); ++i) {
      const Mention& a = chain.mentions[i - 1];
      const Mention& b = chain.mentions[i];
      if (a.sentence == b.sentence && a.start == b.start)
        throw SchemaError(doc.doc_id, cpath + "/mentions",
                          "two mentions start at the same token");
    }
  }

  for (const AlignmentLink& l : doc.alignments) {
    if (l.sentence < 0 || l.sentence >= doc.sentence_count())
      throw RangeError(doc.doc_id,
                       "alignment sent " + std::to_string(l.sentence),
                       "sentence index out of range");
    check_position(doc, Side::kSource, l.source());
    check_position(doc, Side::kTarget, l.target());
  }
  std::sort(doc.alignments.begin(), doc.alignments.end());
  doc.alignments.erase(
      std::unique(doc.alignments.begin(), doc.alignments.end()),
      doc.alignments.end());
}

AnnotatedDocumentPair document_from_json(const json& record) {
  return parse_document(record.dump());
}

AnnotatedDocumentPair parse_document(std::string_view line) {
  rapidjson::Document record;
  record.Parse<rapidjson::kParseValidateEncodingFlag>(line.data(), line.size());
  if (record.HasParseError())
    throw SchemaError("", "",
                      std::string("malformed JSON at offset ") +
                          std::to_string(record.GetErrorOffset()) + ": " +
                          rapidjson::GetParseError_En(record.GetParseError()));
  return read_record(record);
}

namespace {

json side_to_json(const std::vector<Sentence>& side) {
  json out = json::array();
  for (const Sentence& s : side) {
    json tokens = json::array();
    for (const Token& t : s.tokens) {
      json feats = json::object();
      for (const auto& [name, value] : t.feats.entries()) feats[name] = value;
      json jt = {{"form", t.form},
                 {"lemma", t.lemma},
                 {"upos", t.upos},
                 {"feats", std::move(feats)}};
      jt["head"] = t.head ? json(*t.head) : json(nullptr);
      tokens.push_back(std::move(jt));
    }
    out.push_back({{"tokens", std::move(tokens)}});
  }
  return out;
}

}  // namespace

json document_to_json(const AnnotatedDocumentPair& doc) {
  json out = json::object();
  out["doc_id"] = doc.doc_id;
  out["year"] = doc.year ? json(*doc.year) : json(nullptr);
  out["source_lang"] = doc.source_lang;
  out["target_lang"] = doc.target_lang;
  out["source"] = side_to_json(doc.source);
  out["target"] = side_to_json(doc.target);
  json chains = json::array();
  for (const CorefChain& c : doc.source_coref) {
    json mentions = json::array();
    for (const Mention& m : c.mentions)
      mentions.push_back({{"sent", m.sentence}, {"start", m.start}, {"end", m.end}});
    chains.push_back({{"chain_id", c.chain_id}, {"mentions", std::move(mentions)}});
  }
  out["source_coref"] = std::move(chains);
  json links = json::array();
  for (const AlignmentLink& l : doc.alignments)
    links.push_back({{"sent", l.sentence}, {"src", l.source_token}, {"tgt", l.target_token}});
  out["alignments"] = std::move(links);
  return out;
}

std::string serialize_document(const AnnotatedDocumentPair& doc) {
  return document_to_json(doc).dump();
}

const Token& token_at(const AnnotatedDocumentPair& doc, Side side,
                      Position pos) {
  check_position(doc, side, pos);
  return doc.side(side)[pos.sentence].tokens[pos.token];
}

std::vector<Position> aligned_targets(const AnnotatedDocumentPair& doc,
                                      Position pos) {
  check_position(doc, Side::kSource, pos);
  const AlignmentLink lo{pos.sentence, pos.token, std::numeric_limits<int>::min()};
  std::vector<Position> out;
  for (auto it = std::lower_bound(doc.alignments.begin(), doc.alignments.end(), lo);
       it != doc.alignments.end() && it->sentence == pos.sentence &&
       it->source_token == pos.token;
       ++it)
    out.push_back(it->target());
  return out;
}

std::vector<Position> aligned_sources(const AnnotatedDocumentPair& doc,
                                      Position pos) {
  check_position(doc, Side::kTarget, pos);
  const AlignmentLink lo{pos.sentence, std::numeric_limits<int>::min(),
                         std::numeric_limits<int>::min()};
  std::vector<Position> out;
  // Links are sorted by source token, so scanning the sentence range yields
  // sources in ascending order.
  for (auto it = std::lower_bound(doc.alignments.begin(), doc.alignments.end(), lo);
       it != doc.alignments.end() && it->sentence == pos.sentence; ++it)
    if (it->target_token == pos.token) out.push_back(it->source());
  return out;
}

}  // namespace ctxmine
