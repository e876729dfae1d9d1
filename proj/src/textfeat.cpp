#include "macs/textfeat.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <tuple>

#include "macs/error.hpp"
#include "macs/sha256.hpp"

namespace macs {
namespace {

constexpr std::array<std::string_view, 4> kRelevantCategories = {
    "visit note",
    "pathology report",
    "procedure and operative report",
    "radiology report",
};

bool is_relevant(std::string_view category) {
  return std::find(kRelevantCategories.begin(), kRelevantCategories.end(),
                   category) != kRelevantCategories.end();
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(v & 0xff));
    v >>= 8;
  }
}

}  // namespace

std::vector<Document> select_documents(const PatientRecord& patient) {
  std::vector<Document> out;
  for (const Document& d : patient.documents) {
    if (is_relevant(d.category)) out.push_back(d);
  }
  return out;
}

std::string concat_normalize(const std::vector<Document>& docs) {
  std::vector<const Document*> order;
  order.reserve(docs.size());
  for (const Document& d : docs) order.push_back(&d);
  std::sort(order.begin(), order.end(), [](const Document* a, const Document* b) {
    return std::tie(a->date, a->doc_id) < std::tie(b->date, b->doc_id);
  });

  std::string joined;
  for (const Document* d : order) {
    if (!joined.empty()) joined.push_back(' ');
    joined += d->text;
  }
  for (char& c : joined) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      c = static_cast<char>(std::tolower(u));
    } else if (!std::isspace(u)) {
      c = ' ';
    }
  }
  return joined;
}

std::vector<std::string> tokenize_ngrams(const std::string& text) {
  std::vector<std::string> unigrams;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) unigrams.push_back(text.substr(start, i - start));
  }

  std::vector<std::string> terms = unigrams;
  terms.reserve(unigrams.size() * 2);
  for (std::size_t k = 0; k + 1 < unigrams.size(); ++k) {
    terms.push_back(unigrams[k] + " " + unigrams[k + 1]);
  }
  return terms;
}

Vocabulary build_vocabulary(const std::vector<std::string>& per_patient_texts,
                            std::size_t max_features) {
  if (per_patient_texts.empty()) throw DataError("build_vocabulary: empty corpus");

  // Two-phase reduce: total counts and document frequencies first, rank after.
  std::unordered_map<std::string, std::uint64_t> total;
  std::unordered_map<std::string, std::uint64_t> df;
  for (const std::string& text : per_patient_texts) {
    std::unordered_map<std::string, std::uint64_t> local;
    for (std::string& t : tokenize_ngrams(text)) ++local[std::move(t)];
    for (auto& [term, count] : local) {
      total[term] += count;
      ++df[term];
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  ranked.reserve(total.size());
  for (auto& [term, count] : total) ranked.emplace_back(term, count);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_features) ranked.resize(max_features);

  Vocabulary vocab;
  vocab.max_features = max_features;
  vocab.terms.reserve(ranked.size());
  vocab.idf.reserve(ranked.size());
  const double n_docs = static_cast<double>(per_patient_texts.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const std::string& term = ranked[i].first;
    vocab.terms.push_back(term);
    vocab.index.emplace(term, i);
    vocab.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[term]))) + 1.0);
  }
  return vocab;
}

SparseVector vectorize(const std::string& text, const Vocabulary& vocab) {
  std::unordered_map<std::size_t, std::uint64_t> counts;
  for (const std::string& term : tokenize_ngrams(text)) {
    auto it = vocab.index.find(term);
    if (it != vocab.index.end()) ++counts[it->second];
  }

  SparseVector vec;
  vec.entries.reserve(counts.size());
  for (const auto& [idx, count] : counts) {
    vec.entries.push_back({idx, static_cast<double>(count) * vocab.idf[idx]});
  }
  std::sort(vec.entries.begin(), vec.entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });

  double norm_sq = 0.0;
  for (const SparseEntry& e : vec.entries) norm_sq += e.value * e.value;
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (SparseEntry& e : vec.entries) e.value *= inv;
  }
  return vec;
}

std::string vocab_fingerprint(const Vocabulary& vocab) {
  std::string bytes;
  append_u64(bytes, vocab.terms.size());
  for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
    append_u64(bytes, vocab.terms[i].size());
    bytes += vocab.terms[i];
    append_u64(bytes, std::bit_cast<std::uint64_t>(vocab.idf[i]));
  }
  append_u64(bytes, vocab.max_features);
  return sha256_hex(bytes);
}

nlohmann::ordered_json vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::ordered_json j;
  j["terms"] = vocab.terms;
  j["idf"] = vocab.idf;
  j["max_features"] = vocab.max_features;
  return j;
}

Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  Vocabulary vocab;
  try {
    vocab.terms = j.at("terms").get<std::vector<std::string>>();
    vocab.idf = j.at("idf").get<std::vector<double>>();
    vocab.max_features = j.at("max_features").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("vocabulary json: ") + e.what());
  }
  if (vocab.terms.size() != vocab.idf.size()) {
    throw DataError("vocabulary json: terms/idf length mismatch");
  }
  vocab.index.reserve(vocab.terms.size());
  for (std::size_t i = 0; i < vocab.terms.size(); ++i) vocab.index.emplace(vocab.terms[i], i);
  return vocab;
}

}  // namespace macs
