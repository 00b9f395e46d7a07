#include "projlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "projlab/version.hpp"

namespace projlab {

namespace {

// JSON has no inf/nan; keep them readable instead of silently nulling them
Json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

} // namespace

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(num(m(i, j)));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json to_json(const ComparisonTable& t) {
  Json j;
  Json ms = Json::array();
  for (const auto& m : t.matches) {
    Json e{{"label", m.label}, {"reference", num(m.reference)}, {"multiplicity", m.multiplicity}};
    if (m.computed) {
      e["computed"] = num(*m.computed);
      e["rel_error"] = num(m.rel_error);
      e["first_index"] = m.first;
    } else {
      e["computed"] = nullptr;
      e["status"] = "UNMATCHED";
    }
    ms.push_back(std::move(e));
  }
  Json un = Json::array();
  for (const auto& [mean, mult] : t.unmatched) un.push_back({{"mean", num(mean)}, {"multiplicity", mult}});
  j["matches"] = std::move(ms);
  j["unmatched_clusters"] = std::move(un);
  j["max_rel_error"] = num(t.max_rel_error);
  j["all_matched"] = t.all_matched();
  return j;
}

Json to_json(const SpectrumReport& r) {
  Json j{{"operator_tag", r.operator_tag},
         {"geometry", r.geometry},
         {"grid_hash", hash_hex(r.grid_hash)},
         {"eigenvalues", nums(r.eigenvalues)},
         {"residuals", nums(r.residuals)},
         {"kernel_count", r.kernel_count},
         {"gap_ratio", num(r.gap_ratio)},
         {"unstable", r.unstable},
         {"scale", num(r.scale)},
         {"shift", num(r.shift)},
         {"iterations", r.iterations},
         {"mode", r.mode}};
  j["reference_values"] = r.comparison ? to_json(*r.comparison) : Json(nullptr);
  return j;
}

Json to_json(const InjectivityCertificate& c) {
  return {{"tag", to_string(c.tag)},
          {"n", c.n},
          {"trials", c.trials},
          {"min_singular_value", num(c.min_singular_value)},
          {"flagged", c.flagged}};
}

Json to_json(const SymbolCheck& c) {
  return {{"deviation", num(c.deviation)}, {"discrepancy", c.discrepancy}, {"lhs", to_json(c.lhs)},
          {"rhs", to_json(c.rhs)}};
}

Json to_json(const ReconstructionResult& r) {
  double lo = INFINITY, hi = -INFINITY;
  for (Eigen::Index i = 0; i < r.rho.size(); ++i) lo = std::min(lo, r.rho[i]), hi = std::max(hi, r.rho[i]);
  if (r.rho.size() == 0) lo = hi = 0.0;
  return {{"geometry", r.grid->parameter_string()},
          {"grid_hash", hash_hex(r.grid->hash())},
          {"closedness_residual", num(r.closedness_residual)},
          {"alpha_norm", num(r.alpha_norm)},
          {"closedness_ratio", num(r.alpha_norm > 0 ? r.closedness_residual / r.alpha_norm : 0.0)},
          {"kernel_membership", num(r.kernel_membership)},
          {"min_det", num(r.min_det)},
          {"rho_min", num(lo)},
          {"rho_max", num(hi)}};
}

Json to_json(const ConvergenceStudy& s) {
  Json rows = Json::array();
  for (const auto& row : s.rows)
    rows.push_back({{"index", row.index},
                    {"values", nums(row.values)},
                    {"order", num(row.estimate.order)},
                    {"limit", num(row.estimate.limit)},
                    {"noisy", row.estimate.noisy}});
  return {{"grids", s.grids}, {"rows", std::move(rows)}};
}

Json envelope(const std::string& command, const Json& config, std::uint64_t grid_hash, Json result) {
  return {{"artifact_version", version_string},
          {"command", command},
          {"config", config},
          {"grid_hash", grid_hash ? Json(hash_hex(grid_hash)) : Json(nullptr)},
          {"result", std::move(result)}};
}

void write_spectrum_csv(const SpectrumReport& r, std::ostream& os) {
  os << "index,eigenvalue,residual,reference_label,reference_value,rel_error\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    os << i << ',' << format_double(r.eigenvalues[i]) << ','
       << (i < r.residuals.size() ? format_double(r.residuals[i]) : std::string()) << ',';
    const ReferenceMatch* hit = nullptr;
    if (r.comparison)
      for (const auto& m : r.comparison->matches)
        if (m.computed && m.first >= 0 && static_cast<int>(i) >= m.first &&
            static_cast<int>(i) < m.first + m.multiplicity)
          hit = &m;
    if (hit)
      os << hit->label << ',' << format_double(hit->reference) << ','
         << format_double(std::abs(r.eigenvalues[i] - hit->reference) / std::max(std::abs(hit->reference), 1e-8));
    else
      os << ",,";
    os << '\n';
  }
}

} // namespace projlab
