#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "catrec/embedding.hpp"
#include "catrec/sparse.hpp"

namespace catrec::textio {

// Shortest representation that round-trips exactly.
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);

// Throws MissingArtifact if the file does not exist.
void require_file(const std::filesystem::path& p);
std::vector<std::string> read_lines(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view contents);

// Embedding format: "<count> <d>" then "<token> v1 ... vd" per node.
std::string format_embeddings(const EmbeddingTable& table);
void write_embeddings(const std::filesystem::path& p, const EmbeddingTable& table);
EmbeddingTable read_embeddings(const std::filesystem::path& p);

// Three-column "row col value" lines, optionally preceded by a header line.
std::string format_triples(const SparseMatrix& m, std::string_view header = {});
void write_triples(const std::filesystem::path& p, const SparseMatrix& m, std::string_view header = {});
// rows/cols give the matrix shape; header (if expected) is returned via *header.
SparseMatrix read_triples(const std::filesystem::path& p, std::size_t rows, std::size_t cols,
                          std::string* header = nullptr);

}  // namespace catrec::textio
