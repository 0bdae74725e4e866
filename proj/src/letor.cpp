#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "slateval/error.hpp"
#include "slateval/numeric.hpp"
#include "slateval/semisynth.hpp"

namespace slateval {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, const char* what) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(text) + "'", line);
  }
  return value;
}

std::string doc_id_from_comment(std::string_view comment) {
  const auto pos = comment.find("docid");
  if (pos != std::string_view::npos) {
    auto rest = trim(comment.substr(pos + 5));
    if (!rest.empty() && rest[0] == '=') rest = trim(rest.substr(1));
    const auto stop = rest.find_first_of(" \t");
    auto id = rest.substr(0, stop);
    if (!id.empty()) return std::string(id);
  }
  return std::string(comment);
}

}  // namespace

std::size_t RankingDataset::num_documents() const {
  std::size_t n = 0;
  for (const auto& q : queries) n += q.documents.size();
  return n;
}

RankingDataset parse_letor(std::istream& in) {
  RankingDataset dataset;
  std::unordered_map<std::string, std::size_t> query_index;
  std::string raw;
  std::size_t line = 0;
  bool have_dim = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view view(raw);
    std::string_view comment;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      comment = trim(view.substr(hash + 1));
      view = view.substr(0, hash);
    }
    const auto parts = tokens(view);
    if (parts.empty()) continue;
    if (parts.size() < 2 || parts[1].substr(0, 4) != "qid:") throw ParseError("expected '<rel> qid:<id> ...'", line);

    RankedDocument doc;
    doc.relevance = parse_number<int>(parts[0], line, "relevance");
    if (doc.relevance < 0 || doc.relevance > 2) {
      throw ParseError("relevance " + std::to_string(doc.relevance) + " outside {0,1,2}", line);
    }
    const std::string qid(parts[1].substr(4));
    if (qid.empty()) throw ParseError("empty qid", line);

    std::vector<std::pair<std::size_t, double>> entries;
    std::size_t dim = 0;
    for (std::size_t t = 2; t < parts.size(); ++t) {
      const auto colon = parts[t].find(':');
      if (colon == std::string_view::npos) throw ParseError("expected <index>:<value>, got '" + std::string(parts[t]) + "'", line);
      const auto index = parse_number<std::size_t>(parts[t].substr(0, colon), line, "feature index");
      if (index == 0) throw ParseError("feature indices start at 1", line);
      const auto value = parse_number<double>(parts[t].substr(colon + 1), line, "feature value");
      entries.emplace_back(index - 1, value);
      dim = std::max(dim, index);
    }
    if (!have_dim) {
      dataset.feature_dim = dim;
      have_dim = true;
    } else if (dim != dataset.feature_dim) {
      throw ParseError("feature dimension " + std::to_string(dim) + " differs from " +
                           std::to_string(dataset.feature_dim),
                       line);
    }
    doc.features.assign(dim, 0.0);
    for (auto [i, v] : entries) doc.features[i] = v;
    doc.comment = std::string(comment);

    auto [it, inserted] = query_index.emplace(qid, dataset.queries.size());
    if (inserted) dataset.queries.push_back({qid, {}});
    auto& query = dataset.queries[it->second];
    doc.doc_id = comment.empty() ? qid + "#" + std::to_string(query.documents.size()) : doc_id_from_comment(comment);
    query.documents.push_back(std::move(doc));
  }
  return dataset;
}

RankingDataset load_letor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return parse_letor(in);
}

void write_letor(std::ostream& out, const RankingDataset& dataset) {
  for (const auto& query : dataset.queries) {
    for (const auto& doc : query.documents) {
      out << doc.relevance << " qid:" << query.query_id;
      for (std::size_t k = 0; k < doc.features.size(); ++k) out << ' ' << (k + 1) << ':' << format_double(doc.features[k]);
      if (!doc.comment.empty()) out << " # " << doc.comment;
      out << '\n';
    }
  }
}

}  // namespace slateval
