#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "projlab/projective.hpp"
#include "projlab/spectral.hpp"
#include "projlab/symbols.hpp"

namespace projlab {

using Json = nlohmann::json;  // keys sorted, so dumps are deterministic

std::string hash_hex(std::uint64_t h);

Json to_json(const ComparisonTable& t);
Json to_json(const SpectrumReport& r);  // eigenvectors are not serialized
Json to_json(const InjectivityCertificate& c);
Json to_json(const SymbolCheck& c);
Json to_json(const ReconstructionResult& r);
Json to_json(const ConvergenceStudy& s);
Json to_json(const Eigen::MatrixXd& m);

// {"artifact_version", "command", "config", "grid_hash", "result"}; no
// timestamps, so identical inputs give identical bytes.
Json envelope(const std::string& command, const Json& config, std::uint64_t grid_hash, Json result);

// index,eigenvalue,residual,reference_label,reference_value,rel_error
void write_spectrum_csv(const SpectrumReport& r, std::ostream& os);

// Fixed formatting used by every writer: 17 significant digits.
std::string format_double(double v);

} // namespace projlab
