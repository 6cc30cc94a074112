#pragma once

// Inequality audit over random pairs in a Razak block: per instance the four
// spectral quantities, an upper bound on the unitary-orbit distance from the
// builder, and the verdicts of the inequalities relating them.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orbitdist/errors.hpp"
#include "orbitdist/random.hpp"
#include "orbitdist/razak.hpp"
#include "orbitdist/weyl_path.hpp"

namespace orbitdist {

inline constexpr double kVerdictTolerance = 1e-9;

enum class TraceMode { grid, endpoints, stride };

struct TraceSelection {
  TraceMode mode = TraceMode::grid;
  std::size_t stride = 1;

  std::vector<std::size_t> indices(const RazakParams& p) const {
    switch (mode) {
      case TraceMode::endpoints:
        return {0, p.grid};
      case TraceMode::stride:
        return trace_grid(p, stride);
      case TraceMode::grid:
        break;
    }
    return trace_grid(p);
  }
};

// "grid", "endpoints" or "stride:M".
inline TraceSelection parse_traces(const std::string& s) {
  if (s == "grid") return {};
  if (s == "endpoints") return {TraceMode::endpoints, 1};
  if (s.rfind("stride:", 0) == 0) {
    const std::string tail = s.substr(7);
    std::size_t used = 0;
    unsigned long m = 0;
    try {
      m = std::stoul(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == tail.size() && m > 0) return {TraceMode::stride, m};
  }
  throw InvalidParams("traces must be grid, endpoints or stride:M");
}

struct AuditOptions {
  RazakParams params{2, 2, 256, 0.125};
  double epsilon = 0.05;
  double r_margin = 0.01;  // r = d_w + r_margin
  bool full_spectrum = true;
  TraceSelection traces;
};

struct Verdicts {
  bool lemma_cts = true;     // d_w <= d_u_upper <= ||a - b||
  bool lemma_levy = true;    // d_w <= d_p <= d_u_upper
  bool factor_8 = true;      // d_u_upper <= 8 d_w
  bool theorem_nccw = true;  // builder certificate passes

  bool all() const { return lemma_cts && lemma_levy && factor_8 && theorem_nccw; }
  friend bool operator==(const Verdicts&, const Verdicts&) = default;
};

struct AuditRecord {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  RazakParams params;
  double epsilon = 0.0;
  double r = 0.0;
  double delta = 0.0;
  double d_w = 0.0;
  std::optional<double> d_p;  // empty on MassMismatch
  double d_u_lower = 0.0;
  double d_u_upper = 0.0;
  double dist_norm = 0.0;
  // Certificate fields; sup_error is +inf when the builder failed.
  double sup_error = 0.0;
  double unitarity_defect = 0.0;
  double membership_defect = 0.0;
  double continuity_constant = 0.0;
  int refinement_count = 0;
  bool certificate_pass = false;
  Verdicts verdicts;
  std::string note;  // builder failure message, if any
};

// Verdicts from the stored numbers alone.
inline Verdicts compute_verdicts(const AuditRecord& r) {
  const double tol = kVerdictTolerance;
  Verdicts v;
  v.lemma_cts = r.d_w <= r.d_u_upper + tol && r.d_u_upper <= r.dist_norm + tol;
  v.lemma_levy = !r.d_p || (r.d_w <= *r.d_p + tol && *r.d_p <= r.d_u_upper + tol);
  v.factor_8 = r.d_u_upper <= 8.0 * r.d_w + tol;
  v.theorem_nccw = r.certificate_pass;
  return v;
}

inline AuditRecord audit_pair(std::size_t id, std::uint64_t seed, const RazakElement& a, const RazakElement& b,
                              const AuditOptions& opt) {
  AuditRecord rec;
  rec.id = id;
  rec.seed = seed;
  rec.params = a.params;
  rec.epsilon = opt.epsilon;
  rec.delta = delta_path(a, b);
  rec.d_w = d_w_path(a, b);
  rec.d_u_lower = rec.d_w;
  rec.dist_norm = dist_norm(a, b);
  rec.r = rec.d_w + opt.r_margin;
  try {
    rec.d_p = d_p_path(a, b, opt.traces.indices(a.params));
  } catch (const MassMismatch&) {
    rec.d_p.reset();
  }
  try {
    const BuildResult built = build_weyl_unitary(make_request(a, b, rec.r, opt.epsilon));
    const auto& c = built.certificate;
    rec.sup_error = c.sup_error;
    rec.unitarity_defect = c.unitarity_defect;
    rec.membership_defect = c.membership_defect;
    rec.continuity_constant = c.continuity_constant;
    rec.refinement_count = c.refinement_count;
    rec.certificate_pass = c.pass();
  } catch (const RefinementExhausted& e) {
    rec.sup_error = std::numeric_limits<double>::infinity();
    rec.note = e.what();
  } catch (const ClusterGapFailure& e) {
    rec.sup_error = std::numeric_limits<double>::infinity();
    rec.note = e.what();
  }
  // w = 1 is always available, so ||a - b|| also bounds d_U from above.
  rec.d_u_upper = std::min(rec.sup_error, rec.dist_norm);
  rec.verdicts = compute_verdicts(rec);
  return rec;
}

// Seeds of instance i: a from splitmix64(seed + i), b from one more round.
inline std::uint64_t instance_seed(std::uint64_t seed, std::size_t i) { return splitmix64(seed + i); }

inline AuditRecord audit_instance(std::size_t id, std::uint64_t seed, const AuditOptions& opt) {
  const std::uint64_t s = instance_seed(seed, id);
  const RazakElement a = gen_random(opt.params, s, opt.full_spectrum);
  const RazakElement b = gen_random(opt.params, splitmix64(s), opt.full_spectrum);
  return audit_pair(id, s, a, b, opt);
}

struct AuditSummary {
  std::size_t count = 0;
  std::size_t lemma_cts = 0;
  std::size_t lemma_levy = 0;
  std::size_t factor_8 = 0;
  std::size_t theorem_nccw = 0;
  std::size_t mass_mismatches = 0;
  double max_relative_excess = 0.0;  // max (d_u_upper - d_w) / max(d_w, 1e-6)

  std::size_t violations() const { return lemma_cts + lemma_levy + factor_8 + theorem_nccw; }
};

inline AuditSummary summarize(const std::vector<AuditRecord>& records) {
  AuditSummary s;
  s.count = records.size();
  for (const auto& r : records) {
    s.lemma_cts += !r.verdicts.lemma_cts;
    s.lemma_levy += !r.verdicts.lemma_levy;
    s.factor_8 += !r.verdicts.factor_8;
    s.theorem_nccw += !r.verdicts.theorem_nccw;
    s.mass_mismatches += !r.d_p.has_value();
    s.max_relative_excess = std::max(s.max_relative_excess, (r.d_u_upper - r.d_w) / std::max(r.d_w, 1e-6));
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV

inline const char* audit_csv_header() {
  return "id,seed,k,n,N,gamma,epsilon,r,delta,d_w,d_p,d_u_lower,d_u_upper,dist_norm,sup_error,"
         "unitarity_defect,membership_defect,continuity_constant,refinement_count,certificate_pass,"
         "lemma_cts,lemma_levy,factor_8,theorem_nccw";
}

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_csv_row(const AuditRecord& r) {
  std::ostringstream out;
  out << r.id << ',' << r.seed << ',' << r.params.k << ',' << r.params.n << ',' << r.params.grid << ','
      << format_real(r.params.gamma) << ',' << format_real(r.epsilon) << ',' << format_real(r.r) << ','
      << format_real(r.delta) << ',' << format_real(r.d_w) << ',' << (r.d_p ? format_real(*r.d_p) : "") << ','
      << format_real(r.d_u_lower) << ',' << format_real(r.d_u_upper) << ',' << format_real(r.dist_norm) << ','
      << format_real(r.sup_error) << ',' << format_real(r.unitarity_defect) << ','
      << format_real(r.membership_defect) << ',' << format_real(r.continuity_constant) << ','
      << r.refinement_count << ',' << r.certificate_pass << ',' << r.verdicts.lemma_cts << ','
      << r.verdicts.lemma_levy << ',' << r.verdicts.factor_8 << ',' << r.verdicts.theorem_nccw;
  return out.str();
}

inline AuditRecord parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 24) throw SchemaError("audit row has " + std::to_string(f.size()) + " fields, expected 24");
  auto real = [&](std::size_t i) {
    try {
      return std::stod(f[i]);
    } catch (const std::exception&) {
      throw SchemaError("field " + std::to_string(i) + " is not a number");
    }
  };
  auto flag = [&](std::size_t i) {
    if (f[i] != "0" && f[i] != "1") throw SchemaError("field " + std::to_string(i) + " is not 0/1");
    return f[i] == "1";
  };
  AuditRecord r;
  r.id = static_cast<std::size_t>(std::stoull(f[0]));
  r.seed = std::stoull(f[1]);
  r.params = {static_cast<std::size_t>(std::stoull(f[2])), static_cast<std::size_t>(std::stoull(f[3])),
              static_cast<std::size_t>(std::stoull(f[4])), real(5)};
  r.epsilon = real(6);
  r.r = real(7);
  r.delta = real(8);
  r.d_w = real(9);
  if (!f[10].empty()) r.d_p = real(10);
  r.d_u_lower = real(11);
  r.d_u_upper = real(12);
  r.dist_norm = real(13);
  r.sup_error = real(14);
  r.unitarity_defect = real(15);
  r.membership_defect = real(16);
  r.continuity_constant = real(17);
  r.refinement_count = std::stoi(f[18]);
  r.certificate_pass = flag(19);
  r.verdicts = {flag(20), flag(21), flag(22), flag(23)};
  return r;
}

}  // namespace orbitdist
