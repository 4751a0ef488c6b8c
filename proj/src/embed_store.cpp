#include "icd/embed_store.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "icd/binary_io.hpp"

namespace icd {

namespace binary {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace binary

namespace {

constexpr char kEmbMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint8_t kUnitFlag = 0x01;

}  // namespace

std::string encode_embeddings(const EmbeddingSetF& set) {
  if (set.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("too many records for EMB1");
  }
  std::string out(kEmbMagic, 4);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(set.size()));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim()));
  binary::put<std::uint8_t>(out, set.unit_normalized() ? kUnitFlag : 0);
  for (const auto& id : set.ids()) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ValidationError("id longer than 65535 bytes");
    }
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out += id;
  }
  out.reserve(out.size() + set.size() * static_cast<std::size_t>(set.dim()) * 4);
  const auto& m = set.vectors();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) binary::put<float>(out, m(r, c));
  }
  return out;
}

EmbeddingSetF decode_embeddings(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(kEmbMagic, 4)) {
    throw FormatError("bad EMB1 magic");
  }
  binary::Reader in(bytes.substr(4));
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  std::uint8_t flags = 0;
  try {
    count = in.get<std::uint32_t>();
    dim = in.get<std::uint32_t>();
    flags = in.get<std::uint8_t>();
  } catch (const IoError&) {
    throw FormatError("truncated EMB1 header");
  }
  if (dim == 0) throw FormatError("EMB1 dim is 0");
  if ((flags & ~kUnitFlag) != 0) throw FormatError("unknown EMB1 flag bits");

  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = in.get<std::uint16_t>();
    ids.emplace_back(in.bytes(len));
  }
  const std::size_t values = static_cast<std::size_t>(count) * dim;
  if (in.remaining() < values * 4) throw IoError("truncated EMB1 vector payload");
  if (in.remaining() > values * 4) throw FormatError("trailing bytes after EMB1 payload");
  EmbeddingSetF::Matrix m(count, dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) m(r, c) = in.get<float>();
  }
  return EmbeddingSetF(std::move(ids), std::move(m), (flags & kUnitFlag) != 0);
}

EmbeddingSetF load_embeddings(const std::string& path) {
  return decode_embeddings(binary::read_file(path));
}

void save_embeddings(const EmbeddingSetF& set, const std::string& path) {
  binary::write_file(path, encode_embeddings(set));
}

void save_embeddings(const EmbeddingSetD& set, const std::string& path) {
  // The float cast re-runs validation, so overflow to inf is caught here.
  save_embeddings(set.cast<float>(), path);
}

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

GroundTruth parse_ground_truth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "query_id,reference_id") {
    throw FormatError("ground truth CSV must start with header 'query_id,reference_id'");
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw FormatError("ground truth line " + std::to_string(lineno) + ": expected 2 fields");
    }
    std::string query = line.substr(0, comma);
    std::string reference = line.substr(comma + 1);
    if (query.empty()) throw FormatError("ground truth line " + std::to_string(lineno) + ": empty query_id");
    if (reference.empty()) continue;
    pairs.emplace_back(std::move(query), std::move(reference));
  }
  return GroundTruth(std::move(pairs));
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_ground_truth(in);
}

void save_ground_truth(const GroundTruth& gt, const std::string& path) {
  std::string out = "query_id,reference_id\n";
  for (const auto& [q, r] : gt.pairs()) out += q + "," + r + "\n";
  binary::write_file(path, out);
}

GroundTruth::GroundTruth(std::vector<std::pair<std::string, std::string>> pairs) {
  for (auto& [q, r] : pairs) {
    const auto it = by_query_.find(q);
    if (it != by_query_.end()) {
      if (it->second != r) {
        throw ValidationError("query '" + q + "' matched to both '" + it->second + "' and '" + r + "'");
      }
      continue;  // exact duplicate row
    }
    by_query_.emplace(q, r);
    pairs_.emplace_back(std::move(q), std::move(r));
  }
}

bool GroundTruth::contains(const std::string& query_id, const std::string& reference_id) const {
  const auto it = by_query_.find(query_id);
  return it != by_query_.end() && it->second == reference_id;
}

std::optional<std::string> GroundTruth::reference_for(const std::string& query_id) const {
  const auto it = by_query_.find(query_id);
  if (it == by_query_.end()) return std::nullopt;
  return it->second;
}

}  // namespace icd
