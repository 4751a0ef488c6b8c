#ifndef ICD_EMBED_STORE_HPP
#define ICD_EMBED_STORE_HPP

#include <iosfwd>
#include <string>

#include "icd/embedding_set.hpp"

namespace icd {

// EMB1 layout, little-endian:
//   "EMB1" | u32 count | u32 dim | u8 flags (bit 0: unit_normalized)
//   | count x (u16 id length, UTF-8 id bytes) | count*dim f32, row-major

std::string encode_embeddings(const EmbeddingSetF& set);
EmbeddingSetF decode_embeddings(std::string_view bytes);

EmbeddingSetF load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingSetF& set, const std::string& path);

/// Stores a double-precision set as 32-bit floats. Values that overflow
/// float are rejected as non-finite.
void save_embeddings(const EmbeddingSetD& set, const std::string& path);

/// CSV with header `query_id,reference_id`; rows with an empty reference are skipped.
GroundTruth parse_ground_truth(std::istream& in);
GroundTruth load_ground_truth(const std::string& path);
void save_ground_truth(const GroundTruth& gt, const std::string& path);

}  // namespace icd

#endif  // ICD_EMBED_STORE_HPP
