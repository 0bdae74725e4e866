#include "slateval/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "slateval/error.hpp"
#include "slateval/numeric.hpp"

namespace slateval {

namespace {

struct Record {
  ContextId context;
  Slate slate;
  double value = 0.0;
};

double parse_real(std::string_view text, std::size_t line) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError("bad number '" + std::string(text) + "'", line);
  }
  return value;
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string_view view(line);
    const auto first = view.find('\t');
    const auto second = first == std::string_view::npos ? first : view.find('\t', first + 1);
    if (second == std::string_view::npos || view.find('\t', second + 1) != std::string_view::npos) {
      throw ParseError("expected three tab-separated fields", number);
    }
    Record record;
    record.context = ContextId(std::string(view.substr(0, first)));
    try {
      record.slate = parse_slate(view.substr(first + 1, second - first - 1));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), number);
    }
    record.value = parse_real(view.substr(second + 1), number);
    fn(std::move(record), number);
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return in;
}

}  // namespace

std::vector<LoggedExample> read_logged_examples(std::istream& in) {
  std::vector<LoggedExample> out;
  for_each_record(in, [&](Record r, std::size_t line) {
    if (!(r.value >= -1.0 && r.value <= 1.0)) throw ParseError("reward outside [-1, 1]", line);
    out.push_back({std::move(r.context), std::move(r.slate), r.value});
  });
  return out;
}

void write_logged_examples(std::ostream& out, std::span<const LoggedExample> data) {
  for (const auto& ex : data) {
    out << ex.context.str() << '\t' << format_slate(ex.slate) << '\t' << format_double(ex.reward) << '\n';
  }
}

ExplicitTable read_explicit_table(std::istream& in) {
  ExplicitTable table;
  for_each_record(in, [&](Record r, std::size_t) {
    table[r.context].push_back({std::move(r.slate), r.value});
  });
  return table;
}

void write_explicit_table(std::ostream& out, const ExplicitTable& table) {
  std::vector<ContextId> contexts;
  for (const auto& [c, _] : table) contexts.push_back(c);
  std::sort(contexts.begin(), contexts.end());
  for (const auto& c : contexts) {
    for (const auto& ws : table.at(c)) {
      out << c.str() << '\t' << format_slate(ws.slate) << '\t' << format_double(ws.probability) << '\n';
    }
  }
}

std::vector<LoggedExample> load_logged_examples(const std::string& path) {
  auto in = open_input(path);
  return read_logged_examples(in);
}

Policy load_explicit_policy(const std::string& path) {
  auto in = open_input(path);
  return Policy::explicit_table(read_explicit_table(in));
}

}  // namespace slateval
