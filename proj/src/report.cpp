#include "cohaudit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cohaudit {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

void emit(const Json& v, std::string& out, int depth) {
  const std::string indent(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_indent(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map order: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += indent;
        out += Json(it.key()).dump();
        out += ": ";
        emit(it.value(), out, depth + 1);
      }
      out += "\n" + close_indent + "}";
      return;
    }
    case Json::value_t::array: {
      out += "[";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ", ";
        first = false;
        emit(item, out, depth + 1);
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_number(d) : "null";
      return;
    }
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string canonical_json(const Json& value) {
  std::string out;
  emit(value, out, 0);
  out += "\n";
  return out;
}

Json to_json(const CoherenceProfile& p) {
  Json bins = Json::array();
  for (const auto& b : p.histogram) bins.push_back({b.lower, b.upper, b.count});
  return {{"mutual_coherence", p.mutual_coherence},
          {"mean", p.mean},
          {"std", p.std},
          {"min", p.min},
          {"max", p.max},
          {"sample_count", p.sample_count},
          {"histogram", bins}};
}

Json to_json(const FitReport& f) {
  return {{"z_mean", f.z_mean},
          {"var_ratio", f.var_ratio},
          {"excess_kurtosis", f.excess_kurtosis},
          {"max_abs_z", f.max_abs_z},
          {"outlier_threshold", f.outlier_threshold},
          {"degenerate_variance", f.degenerate_variance},
          {"outlier", f.outlier},
          {"pass", f.pass}};
}

Json to_json(const BoundReport<double>& b) {
  auto entry = [](double value, long long floor) { return Json{{"value", value}, {"floor", floor}}; };
  return {{"mu", b.mu},
          {"sigma_mu", b.sigma_mu},
          {"worst_case", entry(b.worst_case_k, b.worst_case_floor)},
          {"heuristic", entry(b.heuristic_k, b.heuristic_floor)},
          {"bernstein", entry(b.bernstein_k, b.bernstein_floor)},
          {"operator_bernstein", entry(b.operator_k, b.operator_floor)},
          {"bpdn_stable", entry(b.bpdn_stable_k, b.bpdn_stable_floor)}};
}

Json to_json(const SeparationCondition<double>& c) {
  return {{"g_x", c.g_x},
          {"g_e", c.g_e},
          {"g_joint", c.g_joint},
          {"w", c.w},
          {"margin", c.margin},
          {"ok", c.ok},
          {"scaled_cross_term",
           {{"g_joint", c.g_joint_scaled}, {"margin", c.margin_scaled}, {"ok", c.ok_scaled}}}};
}

Json to_json(const TailCheckRow& row) {
  return {{"t", row.t},
          {"empirical", row.empirical},
          {"bound", row.bound},
          {"slack", row.slack},
          {"ok", row.ok}};
}

Json to_json(const PhasePoint& p) {
  return {{"k", p.k},           {"trials", p.trials},   {"successes", p.successes},
          {"rate", p.rate},     {"ci_low", p.ci_low},   {"ci_high", p.ci_high}};
}

Json to_json(const SeparationStats& s) {
  return {{"sigma_d", s.sigma_d},
          {"sigma_b", s.sigma_b},
          {"sigma_mu_m", s.sigma_mu_m},
          {"mu_m", s.mu_m}};
}

Json to_json(const JointRipReport& r) {
  return {{"stats", to_json(r.stats)},
          {"g_x", r.g_x},
          {"g_e", r.g_e},
          {"g", r.g},
          {"in_band_frequency", r.in_band_frequency},
          {"max_energy_identity_gap", r.max_energy_identity_gap},
          {"trials", r.ratios.size()}};
}

std::string histogram_csv(const CoherenceProfile& p) {
  std::string out = "bin_lower,bin_upper,count\n";
  for (const auto& b : p.histogram) {
    out += format_number(b.lower) + "," + format_number(b.upper) + "," + std::to_string(b.count) + "\n";
  }
  return out;
}

std::string phase_csv(const std::vector<PhasePoint>& curve) {
  std::string out = "k,trials,successes,rate,ci_low,ci_high\n";
  for (const auto& p : curve) {
    out += std::to_string(p.k) + "," + std::to_string(p.trials) + "," +
           std::to_string(p.successes) + "," + format_number(p.rate) + "," +
           format_number(p.ci_low) + "," + format_number(p.ci_high) + "\n";
  }
  return out;
}

std::string values_csv(const std::string& header, const std::vector<double>& values) {
  std::string out = header + "\n";
  for (double v : values) out += format_number(v) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ParseError("write to '" + path.string() + "' failed");
}

}  // namespace cohaudit
