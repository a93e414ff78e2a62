#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "momgen/ce_matrix.hpp"
#include "momgen/generator.hpp"
#include "momgen/moments.hpp"
#include "momgen/polynomial.hpp"
#include "momgen/recovery.hpp"
#include "momgen/tensor.hpp"

namespace momgen {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Doubles are written by the json library's shortest round-trip formatter.
// Non-finite values become null and are read back as NaN.

json to_json(const GeneratorSpec& g);
GeneratorSpec generator_from_json(const json& j);

json to_json(const MomentTable& t);
MomentTable table_from_json(const json& j);

/// Columns kind,i,j,order,value,stderr. Intra rows leave j empty and use
/// order 2n; joint rows use order 2k-1 (the power on G_i).
std::string table_csv(const MomentTable& t);

json to_json(const RecoveryReport& r);

/// Header plus one row: weight_error, gram_distance, gram_distance_unweighted,
/// direction_error, sliced_w1, sliced_w1_stderr, failures.
std::string metrics_csv(const RecoveryReport& r);

/// {"dim": n, "data": [n^3 values, row-major]}
json to_json(const SymTensor3d& t);
SymTensor3d tensor_from_json(const json& j);

/// Exact entries as "num/den" strings plus basis exponents.
json to_json(const CEMatrix& ce);
std::string ce_csv(const CEMatrix& ce);

/// [{"exponents": [[var, exp], ...], "coeff": "num/den"}, ...]
json to_json(const ExactPoly& p);
ExactPoly poly_from_json(const json& j);

json to_json(const GenericCertificate& c);

/// Tool name and version with the resolved configuration.
json provenance(const json& config);

std::string read_file(const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace momgen
