#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "etd/example.hpp"

namespace etd {

/// Static word vectors ("token v1 v2 ... vd" per line). Absent tokens map to
/// the all-zeros OOV vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int dimension, std::unordered_map<std::string, Vec> entries);

  int dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& token) const { return entries_.count(token) > 0; }
  const Vec& lookup(const std::string& token) const;
  const std::unordered_map<std::string, Vec>& entries() const { return entries_; }

 private:
  int dimension_ = 0;
  std::unordered_map<std::string, Vec> entries_;
  Vec oov_;
};

EmbeddingTable load_embeddings(const std::string& path);
void write_embeddings(const EmbeddingTable& table, const std::string& path);

/// Precomputed per-token contextual vectors, L layers per example. Stored as
/// an index JSON plus a binary blob of little-endian float32; loaded values
/// are bit-exact images of the file contents.
class ContextualVectorStore {
 public:
  struct Record {
    std::vector<std::vector<Vec>> layers;  // [layer][token]
  };

  ContextualVectorStore() = default;
  ContextualVectorStore(int layer_count, int dimension,
                        std::map<std::string, Record> records);

  int layer_count() const { return layer_count_; }
  int dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }
  bool contains(const std::string& example_id) const;
  /// Throws ValidationError when the example id has no record.
  const Record& lookup(const std::string& example_id) const;
  const std::map<std::string, Record>& records() const { return records_; }

 private:
  int layer_count_ = 0;
  int dimension_ = 0;
  std::map<std::string, Record> records_;
};

/// `index_path` names the JSON index; the blob sits next to it.
ContextualVectorStore load_contextual_store(const std::string& index_path);
void write_contextual_store(const ContextualVectorStore& store,
                            const std::string& index_path,
                            const std::string& blob_path);

/// Type definitions; every vocabulary type has an entry, possibly empty.
class DefinitionMap {
 public:
  DefinitionMap() = default;
  DefinitionMap(const TypeVocabulary& vocab,
                std::unordered_map<std::string, std::vector<std::string>> defs);

  const std::vector<std::string>& tokens(TypeId id) const {
    return definitions_.at(static_cast<std::size_t>(id));
  }
  std::size_t missing_count() const { return missing_; }

  static DefinitionMap empty(const TypeVocabulary& vocab) {
    return DefinitionMap(vocab, {});
  }

 private:
  std::vector<std::vector<std::string>> definitions_;
  std::size_t missing_ = 0;
};

DefinitionMap load_definitions(const std::string& path, const TypeVocabulary& vocab);

/// Synonym / hypernym relations over the vocabulary. No self-loops; all
/// referenced types must be in-vocabulary.
struct TypeLexicon {
  std::vector<std::vector<TypeId>> synonyms;   // indexed by TypeId, sorted
  std::vector<std::vector<TypeId>> hypernyms;  // indexed by TypeId, sorted

  static TypeLexicon empty(const TypeVocabulary& vocab);
};

TypeLexicon load_lexicon(const std::string& path, const TypeVocabulary& vocab);
void write_lexicon(const TypeLexicon& lexicon, const TypeVocabulary& vocab,
                   const std::string& path);

/// Ultra-fine type -> OntoNotes path mapping. The OntoNotes vocabulary is the
/// prefix closure of every target path ("/person/artist" implies "/person"),
/// kept sorted.
class OntoMapping {
 public:
  OntoMapping() = default;
  OntoMapping(const TypeVocabulary& vocab,
              std::map<std::string, std::vector<std::string>> rules);

  /// Mapped paths for one source type (already prefix-closed); empty if the
  /// type has no rule.
  const std::vector<std::string>& paths(TypeId id) const {
    return paths_.at(static_cast<std::size_t>(id));
  }
  const std::vector<std::string>& onto_vocabulary() const { return onto_vocabulary_; }

 private:
  std::vector<std::vector<std::string>> paths_;
  std::vector<std::string> onto_vocabulary_;
};

OntoMapping load_onto_mapping(const std::string& path, const TypeVocabulary& vocab);
void write_onto_mapping(const std::map<std::string, std::vector<std::string>>& rules,
                        const std::string& path);

/// Ancestors of a slash-delimited path, nearest first ("/a/b/c" -> /a/b, /a).
std::vector<std::string> path_prefixes(const std::string& path);

void write_definitions(const std::map<std::string, std::vector<std::string>>& defs,
                       const std::string& path);

}  // namespace etd
