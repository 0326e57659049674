#include "catrec/textio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace catrec::textio {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

long long parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

void require_file(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw MissingArtifact(p.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  require_file(p);
  std::ifstream in(p);
  if (!in) throw MissingArtifact(p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file(const std::filesystem::path& p, std::string_view contents) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::string format_embeddings(const EmbeddingTable& table) {
  std::string s = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  for (std::size_t r = 0; r < table.size(); ++r) {
    s += node_token(table.nodes()[r]);
    for (double v : table.row(r)) {
      s += ' ';
      s += format_double(v);
    }
    s += '\n';
  }
  return s;
}

void write_embeddings(const std::filesystem::path& p, const EmbeddingTable& table) {
  write_file(p, format_embeddings(table));
}

EmbeddingTable read_embeddings(const std::filesystem::path& p) {
  const auto lines = read_lines(p);
  if (lines.empty()) throw DataError("empty embedding file: " + p.string());
  const auto head = split(trim(lines[0]), ' ');
  if (head.size() != 2) throw DataError("bad embedding header in " + p.string());
  const auto count = static_cast<std::size_t>(parse_int(head[0]));
  const auto dim = static_cast<std::size_t>(parse_int(head[1]));
  if (lines.size() < count + 1) throw DataError("truncated embedding file: " + p.string());

  std::vector<NodeRef> nodes;
  nodes.reserve(count);
  std::vector<std::vector<std::string_view>> fields;
  fields.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto f = split(trim(lines[i + 1]), ' ');
    if (f.size() != dim + 1) throw DataError("bad embedding row " + std::to_string(i + 1) + " in " + p.string());
    nodes.push_back(parse_node_token(f[0]));
    fields.push_back(std::move(f));
  }
  EmbeddingTable table(dim, std::move(nodes));
  for (std::size_t i = 0; i < count; ++i) {
    auto row = table.row(i);
    for (std::size_t k = 0; k < dim; ++k) row[k] = parse_double(fields[i][k + 1]);
  }
  return table;
}

std::string format_triples(const SparseMatrix& m, std::string_view header) {
  std::string s;
  if (!header.empty()) {
    s += header;
    s += '\n';
  }
  for (const auto& t : m.triplets()) {
    s += std::to_string(t.row);
    s += ' ';
    s += std::to_string(t.col);
    s += ' ';
    s += format_double(t.value);
    s += '\n';
  }
  return s;
}

void write_triples(const std::filesystem::path& p, const SparseMatrix& m, std::string_view header) {
  write_file(p, format_triples(m, header));
}

SparseMatrix read_triples(const std::filesystem::path& p, std::size_t rows, std::size_t cols,
                          std::string* header) {
  const auto lines = read_lines(p);
  std::size_t first = 0;
  if (header) {
    if (lines.empty()) throw DataError("missing header in " + p.string());
    *header = lines[0];
    first = 1;
  }
  std::vector<Triplet> entries;
  entries.reserve(lines.size());
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto f = split(line, ' ');
    if (f.size() != 3) throw DataError("bad triple line " + std::to_string(i + 1) + " in " + p.string());
    entries.push_back({static_cast<Index>(parse_int(f[0])), static_cast<Index>(parse_int(f[1])),
                       parse_double(f[2])});
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(entries));
}

}  // namespace catrec::textio
