#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "macs/records.hpp"

namespace macs {

struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> idf;
  std::size_t max_features = 100000;
};

struct SparseEntry {
  std::size_t index = 0;
  double value = 0.0;
};

struct SparseVector {
  std::vector<SparseEntry> entries;  // strictly increasing indices
};

// The patient's documents in the four relevant categories, input order kept.
std::vector<Document> select_documents(const PatientRecord& patient);

// Documents sorted by (date, doc_id), texts joined with single spaces, every
// character outside [A-Za-z0-9] and whitespace replaced by a space, lowercased.
std::string concat_normalize(const std::vector<Document>& docs);

// Whitespace tokens: all unigrams, then all adjacent bigrams joined by a space.
std::vector<std::string> tokenize_ngrams(const std::string& text);

// Terms ranked by total occurrence count (ties lexicographic ascending),
// capped at max_features; idf(t) = ln((1+N)/(1+df(t))) + 1.
Vocabulary build_vocabulary(const std::vector<std::string>& per_patient_texts,
                            std::size_t max_features);

// Raw term counts times idf, L2-normalized; out-of-vocabulary text gives an
// empty vector.
SparseVector vectorize(const std::string& text, const Vocabulary& vocab);

std::string vocab_fingerprint(const Vocabulary& vocab);

nlohmann::ordered_json vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

}  // namespace macs
