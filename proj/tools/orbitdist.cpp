// orbitdist: generate Razak-block instances, compare them, build conjugating
// unitaries and audit the distance inequalities.
//
// Exit codes: 0 success, 1 verdict or certificate failure, 2 input error,
// 3 MassMismatch (partial result).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "orbitdist/audit.hpp"
#include "orbitdist/io.hpp"

namespace {

using namespace orbitdist;
using io::json;

enum ExitCode : int { kOk = 0, kVerdictFailure = 1, kInputError = 2, kPartial = 3 };

struct Options {
  std::uint64_t seed = 1;
  std::size_t k = 2;
  std::size_t n = 2;
  std::size_t grid = 256;
  double gamma = 0.125;
  double epsilon = 0.05;
  std::optional<double> r;
  double r_margin = 0.01;
  bool full_spectrum = false;
  std::string traces = "grid";
  bool build = false;
  std::string out;
  std::string eigen_csv;
  std::size_t count = 1;
  std::string a_path, b_path;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    io::write_file(path, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

RazakParams params_of(const Options& o) {
  RazakParams p{o.k, o.n, o.grid, o.gamma};
  p.validate();
  return p;
}

int cmd_gen(const Options& o) {
  const RazakElement e = gen_random(params_of(o), o.seed, o.full_spectrum);
  emit(dump(io::to_json(e)), o.out);
  if (!o.eigen_csv.empty()) io::write_file(o.eigen_csv, eigenvalue_csv(e));
  return kOk;
}

RazakElement load_element(const std::string& path) {
  RazakElement e = io::element_from_json(io::read_file(path));
  const auto rep = validate(e);
  if (!rep.passed()) throw SchemaError(path + ": " + rep.failures.front());
  return e;
}

// Two matrices: the matrix report. Two Razak elements: fibrewise distances,
// and with --build an upper bound on d_U from the builder.
int cmd_dist(const Options& o) {
  const json ja = io::read_file(o.a_path), jb = io::read_file(o.b_path);
  if (!ja.contains("params") && !jb.contains("params")) {
    const DistanceReport r = distance_report(io::hermitian_from_json(ja), io::hermitian_from_json(jb));
    std::cout << dump(io::to_json(r));
    return r.mass_mismatch() ? kPartial : kOk;
  }
  const RazakElement a = load_element(o.a_path), b = load_element(o.b_path);
  require_same_params(a.params, b.params);
  DistanceReport r;
  r.delta = delta_path(a, b);
  r.d_w = d_w_path(a, b);
  r.d_u_lower = r.d_w;
  try {
    r.d_p = d_p_path(a, b, parse_traces(o.traces).indices(a.params));
  } catch (const MassMismatch& e) {
    std::cerr << e.what() << "\n";
  }
  json report = io::to_json(r);
  int code = r.mass_mismatch() ? kPartial : kOk;
  if (o.build) {
    const BuildResult built = build_weyl_unitary(make_request(a, b, o.r.value_or(r.d_w + o.r_margin), o.epsilon));
    report["d_u_upper"] = std::min(built.certificate.sup_error, dist_norm(a, b));
    report["certificate"] = io::to_json(built.certificate);
    if (!built.certificate.pass()) code = kVerdictFailure;
  } else {
    report.erase("d_u_upper");
  }
  std::cout << dump(report);
  return code;
}

int cmd_build(const Options& o) {
  const RazakElement a = load_element(o.a_path), b = load_element(o.b_path);
  require_same_params(a.params, b.params);
  const double r = o.r.value_or(d_w_path(a, b) + o.r_margin);
  const BuildResult built = build_weyl_unitary(make_request(a, b, r, o.epsilon));
  std::cout << dump(io::to_json(built.certificate));
  if (!o.out.empty()) io::write_file(o.out, dump(io::to_json(built.w)));
  return built.certificate.pass() ? kOk : kVerdictFailure;
}

int cmd_audit(const Options& o) {
  if (o.count < 1) throw InvalidParams("count must be at least 1");
  AuditOptions opt;
  opt.params = params_of(o);
  opt.epsilon = o.epsilon;
  opt.r_margin = o.r_margin;
  opt.full_spectrum = true;
  opt.traces = parse_traces(o.traces);

  std::vector<AuditRecord> records;
  std::string csv = std::string(audit_csv_header()) + "\n";
  for (std::size_t i = 0; i < o.count; ++i) {
    records.push_back(audit_instance(i, o.seed, opt));
    csv += to_csv_row(records.back()) + "\n";
    if (!records.back().note.empty()) std::cerr << "instance " << i << ": " << records.back().note << "\n";
  }
  if (!o.out.empty()) io::write_file(o.out, csv);

  const AuditSummary s = summarize(records);
  json summary = {{"count", s.count},
                  {"seed", o.seed},
                  {"violations",
                   {{"lemma_cts", s.lemma_cts},
                    {"lemma_levy", s.lemma_levy},
                    {"factor_8", s.factor_8},
                    {"theorem_nccw", s.theorem_nccw}}},
                  {"total_violations", s.violations()},
                  {"mass_mismatches", s.mass_mismatches},
                  {"max_relative_excess", s.max_relative_excess}};
  std::cout << dump(summary);
  if (s.violations() > 0) return kVerdictFailure;
  return s.mass_mismatches > 0 ? kPartial : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distances between unitary orbits in matrix algebras and Razak blocks"};
  app.require_subcommand(1);
  Options o;

  auto add_params = [&o](CLI::App* cmd) {
    cmd->add_option("--k", o.k, "core size k")->capture_default_str();
    cmd->add_option("--n", o.n, "multiplicity n")->capture_default_str();
    cmd->add_option("--grid", o.grid, "grid intervals N")->capture_default_str();
    cmd->add_option("--gamma", o.gamma, "flat end width, 0 < gamma < 1/2")->capture_default_str();
  };
  auto add_build = [&o](CLI::App* cmd) {
    cmd->add_option("--epsilon", o.epsilon, "builder tolerance")->capture_default_str();
    cmd->add_option("--r", o.r, "target radius (default d_W + 0.01)");
  };

  auto* gen = app.add_subcommand("gen", "generate a random element");
  gen->add_option("--seed", o.seed)->capture_default_str();
  add_params(gen);
  gen->add_flag("--full-spectrum", o.full_spectrum, "make the spectrum all of [0, 1]");
  gen->add_option("--out", o.out, "output file (default stdout)");
  gen->add_option("--eigen-csv", o.eigen_csv, "also write per-grid-point eigenvalues as CSV");

  auto* dist = app.add_subcommand("dist", "distances between two elements or two matrices");
  dist->add_option("a", o.a_path)->required();
  dist->add_option("b", o.b_path)->required();
  dist->add_option("--traces", o.traces, "grid | endpoints | stride:M")->capture_default_str();
  dist->add_flag("--build", o.build, "also build a unitary for an upper bound on d_U");
  add_build(dist);

  auto* build = app.add_subcommand("build-unitary", "construct w with sup ||w a w* - b|| < r + epsilon");
  build->add_option("a", o.a_path)->required();
  build->add_option("b", o.b_path)->required();
  add_build(build);
  build->add_option("--out", o.out, "write the unitary path as JSON");

  auto* audit = app.add_subcommand("audit", "check the distance inequalities on random pairs");
  audit->add_option("--count", o.count)->capture_default_str();
  audit->add_option("--seed", o.seed)->capture_default_str();
  add_params(audit);
  audit->add_option("--epsilon", o.epsilon)->capture_default_str();
  audit->add_option("--traces", o.traces, "grid | endpoints | stride:M")->capture_default_str();
  audit->add_option("--out", o.out, "CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*dist) return cmd_dist(o);
    if (*build) return cmd_build(o);
    if (*audit) return cmd_audit(o);
  } catch (const MassMismatch& e) {
    std::cerr << e.what() << "\n";
    return kPartial;
  } catch (const RefinementExhausted& e) {
    std::cerr << e.what() << "\n";
    return kVerdictFailure;
  } catch (const ClusterGapFailure& e) {
    std::cerr << e.what() << "\n";
    return kVerdictFailure;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
