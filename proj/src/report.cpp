#include "itq3/report.hpp"

#include <sstream>

namespace itq3::report {

namespace {

template <typename Row> std::string csv(std::span<const Row> rows) {
  std::ostringstream out;
  out.precision(17);
  bool header = true;
  for (const Row &row : rows) {
    const nlohmann::ordered_json j = to_json(row);
    if (header) {
      bool first = true;
      for (const auto &[key, value] : j.items()) {
        out << (first ? "" : ",") << key;
        first = false;
      }
      out << '\n';
      header = false;
    }
    bool first = true;
    for (const auto &[key, value] : j.items()) {
      out << (first ? "" : ",");
      if (value.is_number_float())
        out << value.template get<double>();
      else
        out << value.dump();
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

} // namespace

nlohmann::ordered_json to_json(const compute::ErrorReport &r) {
  nlohmann::ordered_json j;
  j["mse"] = r.mse;
  j["frobenius_rel"] = r.frobenius_rel;
  j["linf_in"] = r.linf_in;
  j["linf_rot"] = r.linf_rot;
  j["bound_slack"] = r.bound_slack;
  j["clamp_fraction"] = r.clamp_fraction;
  j["zero_fraction"] = r.zero_fraction;
  j["uniform3_mse"] = r.uniform3_mse;
  j["norot_mse"] = r.norot_mse;
  j["median_block_mse"] = r.median_block_mse;
  j["median_block_mse_norot"] = r.median_block_mse_norot;
  j["median_block_mse_uniform3"] = r.median_block_mse_uniform3;
  j["transfer_max_rel"] = r.transfer_max_rel;
  j["blocks"] = r.blocks;
  j["unclamped_blocks"] = r.unclamped_blocks;
  j["bound_violations"] = r.bound_violations;
  return j;
}

nlohmann::ordered_json to_json(const compute::AblationRow &r) {
  nlohmann::ordered_json j;
  j["block_n"] = r.block_n;
  j["mse"] = r.mse;
  j["median_block_mse"] = r.median_block_mse;
  j["relative_overhead"] = r.relative_overhead;
  return j;
}

std::string to_csv(std::span<const compute::ErrorReport> rows) { return csv(rows); }
std::string to_csv(std::span<const compute::AblationRow> rows) { return csv(rows); }

} // namespace itq3::report
