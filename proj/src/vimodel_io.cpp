#include <sstream>

#include "catrec/textio.hpp"
#include "catrec/vimodel.hpp"

namespace catrec::vi {

namespace {

EmbeddingTable block_table(NodeType type, std::size_t count, std::size_t dim, const std::vector<double>& values) {
  std::vector<NodeRef> nodes;
  nodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) nodes.push_back({type, static_cast<Index>(i)});
  EmbeddingTable t(dim, std::move(nodes));
  std::copy(values.begin(), values.end(), t.data().begin());
  return t;
}

std::vector<double> table_block(const EmbeddingTable& t, NodeType type, std::size_t count, std::size_t dim) {
  if (t.dim() != dim) throw DataError("latent embedding file has dimension " + std::to_string(t.dim()));
  std::vector<double> out(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto row = t.at({type, static_cast<Index>(i)});
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  return out;
}

std::size_t manifest_value(const std::string& line, const std::string& key) {
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok.rfind(key + "=", 0) == 0) return static_cast<std::size_t>(textio::parse_int(tok.substr(key.size() + 1)));
  }
  throw DataError("latent manifest lacks " + key);
}

constexpr Group kScalarGroups[] = {Group::kappa_t, Group::psi_t, Group::kappa_a, Group::psi_a};

}  // namespace

void save_latent(const std::filesystem::path& dir, const LatentState& latent, std::uint64_t seed,
                 std::size_t epochs) {
  const auto d = latent.dim, m = latent.users, n = latent.categories;
  const auto& P = latent.params;
  textio::write_file(dir / "manifest.txt", "d=" + std::to_string(d) + " m=" + std::to_string(m) + " n=" +
                                               std::to_string(n) + " seed=" + std::to_string(seed) +
                                               " epochs=" + std::to_string(epochs) + " cold=" +
                                               std::to_string(latent.cold_nodes) + "\n");
  textio::write_embeddings(dir / "u_mean.emb", block_table(NodeType::user, m, d, P[Group::user_emb].mean));
  textio::write_embeddings(dir / "u_logstd.emb", block_table(NodeType::user, m, d, P[Group::user_emb].logstd));
  textio::write_embeddings(dir / "v_mean.emb", block_table(NodeType::category, n, d, P[Group::cat_emb].mean));
  textio::write_embeddings(dir / "v_logstd.emb", block_table(NodeType::category, n, d, P[Group::cat_emb].logstd));

  std::string s;
  for (const auto g : kScalarGroups) {
    s += std::string(group_name(g)) + " " + textio::format_double(P[g].mean[0]) + " " +
         textio::format_double(P[g].logstd[0]) + "\n";
  }
  for (std::size_t p = 0; p < m; ++p) {
    s += "bu " + node_token({NodeType::user, static_cast<Index>(p)}) + " " +
         textio::format_double(P[Group::user_bias].mean[p]) + " " +
         textio::format_double(P[Group::user_bias].logstd[p]) + "\n";
  }
  for (std::size_t q = 0; q < n; ++q) {
    s += "bv " + node_token({NodeType::category, static_cast<Index>(q)}) + " " +
         textio::format_double(P[Group::cat_bias].mean[q]) + " " +
         textio::format_double(P[Group::cat_bias].logstd[q]) + "\n";
  }
  textio::write_file(dir / "scalars.txt", s);
  textio::write_triples(dir / "xi.txt", latent.xi);
}

LatentState load_latent(const std::filesystem::path& dir) {
  const auto manifest = textio::read_lines(dir / "manifest.txt");
  if (manifest.empty()) throw DataError("empty latent manifest");
  LatentState st;
  st.dim = manifest_value(manifest[0], "d");
  st.users = manifest_value(manifest[0], "m");
  st.categories = manifest_value(manifest[0], "n");
  st.cold_nodes = manifest_value(manifest[0], "cold");
  st.params = VariationalParams::zeros(st.dim, st.users, st.categories);
  auto& P = st.params;

  P[Group::user_emb].mean = table_block(textio::read_embeddings(dir / "u_mean.emb"), NodeType::user, st.users, st.dim);
  P[Group::user_emb].logstd =
      table_block(textio::read_embeddings(dir / "u_logstd.emb"), NodeType::user, st.users, st.dim);
  P[Group::cat_emb].mean =
      table_block(textio::read_embeddings(dir / "v_mean.emb"), NodeType::category, st.categories, st.dim);
  P[Group::cat_emb].logstd =
      table_block(textio::read_embeddings(dir / "v_logstd.emb"), NodeType::category, st.categories, st.dim);

  std::vector<bool> seen_u(st.users, false), seen_v(st.categories, false);
  std::size_t scalars = 0;
  for (const auto& line : textio::read_lines(dir / "scalars.txt")) {
    if (textio::trim(line).empty()) continue;
    const auto f = textio::split(line, ' ');
    if (f.size() == 3) {
      bool matched = false;
      for (const auto g : kScalarGroups) {
        if (f[0] == group_name(g)) {
          P[g].mean[0] = textio::parse_double(f[1]);
          P[g].logstd[0] = textio::parse_double(f[2]);
          ++scalars;
          matched = true;
        }
      }
      if (!matched) throw DataError("unknown scalar parameter: " + std::string(f[0]));
    } else if (f.size() == 4 && (f[0] == "bu" || f[0] == "bv")) {
      const auto node = parse_node_token(f[1]);
      const bool user = f[0] == "bu";
      const std::size_t limit = user ? st.users : st.categories;
      if (node.type != (user ? NodeType::user : NodeType::category) || node.index >= limit) {
        throw DataError("bias line for an unknown node: " + line);
      }
      auto& block = P[user ? Group::user_bias : Group::cat_bias];
      block.mean[node.index] = textio::parse_double(f[2]);
      block.logstd[node.index] = textio::parse_double(f[3]);
      (user ? seen_u : seen_v)[node.index] = true;
    } else {
      throw DataError("malformed scalars line: " + line);
    }
  }
  if (scalars != 4) throw DataError("scalars.txt must define kappa_t, psi_t, kappa_a and psi_a");
  for (bool b : seen_u) {
    if (!b) throw DataError("scalars.txt is missing a user bias");
  }
  for (bool b : seen_v) {
    if (!b) throw DataError("scalars.txt is missing a category bias");
  }
  st.xi = textio::read_triples(dir / "xi.txt", st.users, st.categories);
  return st;
}

}  // namespace catrec::vi
