#include "etd/resources.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace etd {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "binary resource formats assume a little-endian host");

// ---------------------------------------------------------------------------
// EmbeddingTable
// ---------------------------------------------------------------------------

EmbeddingTable::EmbeddingTable(int dimension, std::unordered_map<std::string, Vec> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
  if (dimension_ <= 0) throw ValidationError("embedding dimension must be positive");
  for (const auto& [token, vec] : entries_) {
    if (vec.size() != dimension_) {
      throw ValidationError("embedding for '" + token + "' has wrong dimension");
    }
  }
  oov_ = Vec::Zero(dimension_);
}

const Vec& EmbeddingTable::lookup(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? oov_ : it->second;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embeddings: " + path);
  std::unordered_map<std::string, Vec> entries;
  int dimension = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() < 2) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": ragged line");
    }
    const int dim = static_cast<int>(fields.size()) - 1;
    if (dimension < 0) {
      dimension = dim;
    } else if (dim != dimension) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": ragged line (expected " + std::to_string(dimension) +
                            " components, got " + std::to_string(dim) + ")");
    }
    Vec vec(dim);
    for (int i = 0; i < dim; ++i) {
      try {
        vec[i] = std::stod(fields[static_cast<std::size_t>(i) + 1]);
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": bad float");
      }
    }
    entries[fields[0]] = std::move(vec);
  }
  if (dimension < 0) throw ValidationError("empty embeddings file: " + path);
  return EmbeddingTable(dimension, std::move(entries));
}

void write_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::vector<std::string> tokens;
  tokens.reserve(table.size());
  for (const auto& [token, vec] : table.entries()) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());

  std::ostringstream out;
  out.precision(17);
  for (const auto& token : tokens) {
    out << token;
    const Vec& vec = table.lookup(token);
    for (Eigen::Index i = 0; i < vec.size(); ++i) out << ' ' << vec[i];
    out << '\n';
  }
  write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// ContextualVectorStore
// ---------------------------------------------------------------------------

ContextualVectorStore::ContextualVectorStore(int layer_count, int dimension,
                                             std::map<std::string, Record> records)
    : layer_count_(layer_count), dimension_(dimension), records_(std::move(records)) {
  if (layer_count_ <= 0 || dimension_ <= 0) {
    throw ValidationError("contextual store: layer count and dimension must be positive");
  }
  for (const auto& [id, record] : records_) {
    if (record.layers.size() != static_cast<std::size_t>(layer_count_)) {
      throw ValidationError("contextual store: record '" + id + "' has wrong layer count");
    }
    const std::size_t tokens = record.layers.front().size();
    for (const auto& layer : record.layers) {
      if (layer.size() != tokens) {
        throw ValidationError("contextual store: record '" + id + "' is ragged");
      }
      for (const auto& vec : layer) {
        if (vec.size() != dimension_) {
          throw ValidationError("contextual store: record '" + id + "' has wrong dimension");
        }
      }
    }
  }
}

bool ContextualVectorStore::contains(const std::string& example_id) const {
  return records_.count(example_id) > 0;
}

const ContextualVectorStore::Record& ContextualVectorStore::lookup(
    const std::string& example_id) const {
  auto it = records_.find(example_id);
  if (it == records_.end()) {
    throw ValidationError("contextual store: no record for example " + example_id);
  }
  return it->second;
}

ContextualVectorStore load_contextual_store(const std::string& index_path) {
  json index = json::parse(read_file(index_path));
  const int layer_count = index.at("layer_count").get<int>();
  const int dimension = index.at("dimension").get<int>();
  const std::string blob_name = index.at("blob").get<std::string>();

  std::string dir;
  if (auto slash = index_path.find_last_of('/'); slash != std::string::npos) {
    dir = index_path.substr(0, slash + 1);
  }
  const std::string blob = read_file(dir + blob_name);

  std::map<std::string, ContextualVectorStore::Record> records;
  for (const auto& [id, entry] : index.at("records").items()) {
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t tokens = entry.at("tokens").get<std::size_t>();
    const std::size_t floats =
        static_cast<std::size_t>(layer_count) * tokens * static_cast<std::size_t>(dimension);
    if (offset + floats * sizeof(float) > blob.size()) {
      throw ValidationError("contextual store: record '" + id + "' exceeds blob");
    }
    ContextualVectorStore::Record record;
    record.layers.resize(static_cast<std::size_t>(layer_count));
    const char* cursor = blob.data() + offset;
    for (int layer = 0; layer < layer_count; ++layer) {
      auto& vecs = record.layers[static_cast<std::size_t>(layer)];
      vecs.resize(tokens, Vec(dimension));
      for (std::size_t t = 0; t < tokens; ++t) {
        for (int d = 0; d < dimension; ++d) {
          float value;
          std::memcpy(&value, cursor, sizeof(float));
          cursor += sizeof(float);
          vecs[t][d] = static_cast<double>(value);
        }
      }
    }
    records.emplace(id, std::move(record));
  }
  return ContextualVectorStore(layer_count, dimension, std::move(records));
}

void write_contextual_store(const ContextualVectorStore& store,
                            const std::string& index_path,
                            const std::string& blob_path) {
  std::string blob;
  ordered_json records = ordered_json::object();
  for (const auto& [id, record] : store.records()) {
    const std::size_t tokens = record.layers.front().size();
    ordered_json entry;
    entry["offset"] = blob.size();
    entry["tokens"] = tokens;
    records[id] = entry;
    for (const auto& layer : record.layers) {
      for (const auto& vec : layer) {
        for (Eigen::Index d = 0; d < vec.size(); ++d) {
          const float value = static_cast<float>(vec[d]);
          const char* bytes = reinterpret_cast<const char*>(&value);
          blob.append(bytes, sizeof(float));
        }
      }
    }
  }
  write_file(blob_path, blob);

  std::string blob_name = blob_path;
  if (auto slash = blob_name.find_last_of('/'); slash != std::string::npos) {
    blob_name = blob_name.substr(slash + 1);
  }
  ordered_json index;
  index["layer_count"] = store.layer_count();
  index["dimension"] = store.dimension();
  index["blob"] = blob_name;
  index["records"] = records;
  write_file(index_path, index.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// DefinitionMap
// ---------------------------------------------------------------------------

DefinitionMap::DefinitionMap(const TypeVocabulary& vocab,
                             std::unordered_map<std::string, std::vector<std::string>> defs) {
  definitions_.resize(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    auto it = defs.find(vocab.name(static_cast<TypeId>(i)));
    if (it == defs.end() || it->second.empty()) {
      ++missing_;
    } else {
      definitions_[i] = it->second;
    }
  }
}

DefinitionMap load_definitions(const std::string& path, const TypeVocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open definitions: " + path);
  std::unordered_map<std::string, std::vector<std::string>> defs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json obj = json::parse(line);
      defs[obj.at("type").get<std::string>()] =
          obj.at("definition_tokens").get<std::vector<std::string>>();
    } catch (const std::exception& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": parse error: " + err.what());
    }
  }
  return DefinitionMap(vocab, std::move(defs));
}

void write_definitions(const std::map<std::string, std::vector<std::string>>& defs,
                       const std::string& path) {
  std::string out;
  for (const auto& [type, tokens] : defs) {
    ordered_json obj;
    obj["type"] = type;
    obj["definition_tokens"] = tokens;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// TypeLexicon
// ---------------------------------------------------------------------------

TypeLexicon TypeLexicon::empty(const TypeVocabulary& vocab) {
  TypeLexicon lexicon;
  lexicon.synonyms.resize(vocab.size());
  lexicon.hypernyms.resize(vocab.size());
  return lexicon;
}

namespace {

std::vector<TypeId> relation_ids(const json& arr, const TypeVocabulary& vocab,
                                 TypeId self, const std::string& path,
                                 std::size_t line_no) {
  std::vector<TypeId> ids;
  std::vector<std::string> offenders;
  for (const auto& item : arr) {
    const std::string name = item.get<std::string>();
    TypeId id = vocab.find(name);
    if (id < 0) {
      offenders.push_back(name);
    } else if (id != self) {  // self-loops are dropped
      ids.push_back(id);
    }
  }
  if (!offenders.empty()) {
    std::string msg = path + ":" + std::to_string(line_no) +
                      ": out-of-vocabulary types in lexicon:";
    for (const auto& name : offenders) msg += " " + name;
    throw ValidationError(msg);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

TypeLexicon load_lexicon(const std::string& path, const TypeVocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon: " + path);
  TypeLexicon lexicon = TypeLexicon::empty(vocab);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const std::exception& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": parse error: " + err.what());
    }
    const std::string type_name = obj.at("type").get<std::string>();
    TypeId id = vocab.find(type_name);
    if (id < 0) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": out-of-vocabulary type: " + type_name);
    }
    if (obj.contains("synonyms")) {
      lexicon.synonyms[static_cast<std::size_t>(id)] =
          relation_ids(obj.at("synonyms"), vocab, id, path, line_no);
    }
    if (obj.contains("hypernyms")) {
      lexicon.hypernyms[static_cast<std::size_t>(id)] =
          relation_ids(obj.at("hypernyms"), vocab, id, path, line_no);
    }
  }
  return lexicon;
}

void write_lexicon(const TypeLexicon& lexicon, const TypeVocabulary& vocab,
                   const std::string& path) {
  std::string out;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& syn = lexicon.synonyms[i];
    const auto& hyp = lexicon.hypernyms[i];
    if (syn.empty() && hyp.empty()) continue;
    ordered_json obj;
    obj["type"] = vocab.name(static_cast<TypeId>(i));
    obj["synonyms"] = to_type_names(syn, vocab);
    obj["hypernyms"] = to_type_names(hyp, vocab);
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// OntoMapping
// ---------------------------------------------------------------------------

std::vector<std::string> path_prefixes(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = path.rfind('/');
  std::string current = path;
  while (pos != std::string::npos && pos > 0) {
    current = current.substr(0, pos);
    out.push_back(current);
    pos = current.rfind('/');
  }
  return out;
}

namespace {

void check_path_syntax(const std::string& path) {
  if (path.empty() || path.front() != '/' || path.back() == '/' ||
      path.find("//") != std::string::npos) {
    throw ValidationError("bad OntoNotes path: '" + path + "'");
  }
}

}  // namespace

OntoMapping::OntoMapping(const TypeVocabulary& vocab,
                         std::map<std::string, std::vector<std::string>> rules) {
  paths_.resize(vocab.size());
  std::set<std::string> onto;
  for (const auto& [type_name, targets] : rules) {
    TypeId id = vocab.find(type_name);
    if (id < 0) {
      throw ValidationError("onto mapping: out-of-vocabulary type: " + type_name);
    }
    std::set<std::string> closed;
    for (const auto& target : targets) {
      check_path_syntax(target);
      closed.insert(target);
      for (const auto& prefix : path_prefixes(target)) closed.insert(prefix);
    }
    paths_[static_cast<std::size_t>(id)].assign(closed.begin(), closed.end());
    onto.insert(closed.begin(), closed.end());
  }
  onto_vocabulary_.assign(onto.begin(), onto.end());
}

OntoMapping load_onto_mapping(const std::string& path, const TypeVocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open onto mapping: " + path);
  std::map<std::string, std::vector<std::string>> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json obj = json::parse(line);
      rules[obj.at("type").get<std::string>()] =
          obj.at("onto").get<std::vector<std::string>>();
    } catch (const std::exception& err) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": parse error: " + err.what());
    }
  }
  return OntoMapping(vocab, std::move(rules));
}

void write_onto_mapping(const std::map<std::string, std::vector<std::string>>& rules,
                        const std::string& path) {
  std::string out;
  for (const auto& [type, targets] : rules) {
    ordered_json obj;
    obj["type"] = type;
    obj["onto"] = targets;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace etd
