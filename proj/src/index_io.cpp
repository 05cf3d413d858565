#include "gxs/index_io.hpp"

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"

namespace gxs {

using nlohmann::json;

namespace {

json fields_to_json(const FieldConfig& f) {
  return {{"title", f.use_title}, {"description", f.use_description}, {"tools", f.use_tools}};
}

FieldConfig fields_from_json(const json& j) {
  FieldConfig f;
  f.use_title = j.at("title").get<bool>();
  f.use_description = j.at("description").get<bool>();
  f.use_tools = j.at("tools").get<bool>();
  return f;
}

Vocabulary vocab_from_terms(std::vector<std::string> terms) {
  Vocabulary v;
  v.terms = std::move(terms);
  for (std::size_t i = 0; i < v.terms.size(); ++i) {
    if (i > 0 && !(v.terms[i - 1] < v.terms[i])) {
      throw Error(ErrorCode::SchemaError, "vocabulary not strictly sorted");
    }
    v.ids.emplace(v.terms[i], static_cast<TermId>(i));
  }
  return v;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::SchemaError, std::string("inconsistent index: ") + what);
}

template <class Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid index document: ") + e.what());
  }
}

}  // namespace

json tfidf_to_json(const TfidfIndex& index) {
  json docs = json::array();
  for (const auto& vec : index.doc_vectors) {
    std::vector<TermId> terms;
    std::vector<double> weights;
    for (const auto& e : vec) {
      terms.push_back(e.term);
      weights.push_back(e.weight);
    }
    docs.push_back({{"terms", terms}, {"weights", weights}});
  }
  return {{"terms", index.vocab.terms}, {"idf", index.idf},     {"docs", std::move(docs)},
          {"doc_ids", index.doc_ids},   {"fields", fields_to_json(index.fields)}};
}

TfidfIndex tfidf_from_json(const json& j) {
  return guarded([&] {
    TfidfIndex index;
    index.vocab = vocab_from_terms(j.at("terms").get<std::vector<std::string>>());
    index.idf = j.at("idf").get<std::vector<double>>();
    index.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    index.fields = fields_from_json(j.at("fields"));
    require(index.idf.size() == index.vocab.size(), "idf length");
    for (const auto& d : j.at("docs")) {
      const auto terms = d.at("terms").get<std::vector<TermId>>();
      const auto weights = d.at("weights").get<std::vector<double>>();
      require(terms.size() == weights.size(), "doc vector lengths");
      SparseVector vec;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        require(terms[i] < index.vocab.size(), "term id range");
        require(i == 0 || terms[i - 1] < terms[i], "doc vector order");
        vec.push_back({terms[i], weights[i]});
      }
      index.doc_vectors.push_back(std::move(vec));
    }
    require(index.doc_vectors.size() == index.doc_ids.size(), "doc count");
    return index;
  });
}

json bm25_to_json(const Bm25Index& index) {
  json docs = json::array();
  for (const auto& counts : index.doc_terms) {
    json row = json::array();
    for (const auto& c : counts) row.push_back({c.term, c.tf});
    docs.push_back(std::move(row));
  }
  return {{"terms", index.vocab.terms},
          {"doc_freq", index.doc_freq},
          {"idf", index.idf},
          {"doc_terms", std::move(docs)},
          {"doc_lengths", index.doc_lengths},
          {"avgdl", index.avgdl},
          {"k1", index.k1},
          {"b", index.b},
          {"doc_ids", index.doc_ids},
          {"fields", fields_to_json(index.fields)}};
}

Bm25Index bm25_from_json(const json& j) {
  return guarded([&] {
    Bm25Index index;
    index.vocab = vocab_from_terms(j.at("terms").get<std::vector<std::string>>());
    index.doc_freq = j.at("doc_freq").get<std::vector<std::uint32_t>>();
    index.idf = j.at("idf").get<std::vector<double>>();
    index.doc_lengths = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
    index.avgdl = j.at("avgdl").get<double>();
    index.k1 = j.at("k1").get<double>();
    index.b = j.at("b").get<double>();
    index.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    index.fields = fields_from_json(j.at("fields"));
    const std::size_t v = index.vocab.size();
    require(index.doc_freq.size() == v && index.idf.size() == v, "term statistics length");
    require(index.doc_lengths.size() == index.doc_ids.size(), "doc lengths");

    index.postings.assign(v, {});
    for (const auto& row : j.at("doc_terms")) {
      std::vector<TermCount> counts;
      for (const auto& pair : row) {
        const auto term = pair.at(0).get<TermId>();
        const auto tf = pair.at(1).get<std::uint32_t>();
        require(term < v, "term id range");
        require(counts.empty() || counts.back().term < term, "doc term order");
        counts.push_back({term, tf});
        index.postings[term].push_back(
            {static_cast<std::uint32_t>(index.doc_terms.size()), tf});
      }
      index.doc_terms.push_back(std::move(counts));
    }
    require(index.doc_terms.size() == index.doc_ids.size(), "doc count");
    return index;
  });
}

json dense_to_json(const DenseIndex& index) {
  return {{"dim", index.dim}, {"doc_ids", index.doc_ids}, {"matrix", index.matrix}};
}

DenseIndex dense_from_json(const json& j) {
  return guarded([&] {
    DenseIndex index;
    index.dim = j.at("dim").get<std::size_t>();
    index.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    index.matrix = j.at("matrix").get<std::vector<double>>();
    require(index.matrix.size() == index.dim * index.doc_ids.size(), "matrix size");
    return index;
  });
}

void save_index_bundle(const IndexBundle& bundle, const std::filesystem::path& path) {
  json j;
  j["format"] = "gxsearch-index";
  j["version"] = kIndexFormatVersion;
  if (bundle.tfidf) j["tfidf"] = tfidf_to_json(*bundle.tfidf);
  if (bundle.bm25) j["bm25"] = bm25_to_json(*bundle.bm25);
  if (bundle.dense) {
    j["dense"] = dense_to_json(*bundle.dense);
    j["dense"]["provider"] = bundle.dense_provider;
    j["dense"]["fields"] = fields_to_json(bundle.dense_fields);
  }
  write_file(path, j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n");
}

IndexBundle load_index_bundle(const std::filesystem::path& path) {
  const json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::SchemaError, "index file is not a JSON object: " + path.string());
  }
  if (j.value("format", "") != "gxsearch-index" || j.value("version", 0) != kIndexFormatVersion) {
    throw Error(ErrorCode::SchemaError, "unsupported index format in " + path.string());
  }
  IndexBundle bundle;
  if (j.contains("tfidf")) bundle.tfidf = tfidf_from_json(j["tfidf"]);
  if (j.contains("bm25")) bundle.bm25 = bm25_from_json(j["bm25"]);
  if (j.contains("dense")) {
    bundle.dense = dense_from_json(j["dense"]);
    guarded([&] {
      bundle.dense_provider = j["dense"].at("provider").get<std::string>();
      bundle.dense_fields = fields_from_json(j["dense"].at("fields"));
      return 0;
    });
  }
  return bundle;
}

}  // namespace gxs
