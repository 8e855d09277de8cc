#include "pbt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pbt/certificates.hpp"
#include "pbt/channel_sim.hpp"
#include "pbt/core.hpp"
#include "pbt/eigh.hpp"
#include "pbt/errors.hpp"
#include "pbt/json_io.hpp"
#include "pbt/sdp.hpp"

namespace pbt::cli {

namespace {

using nlohmann::json;

constexpr std::size_t kCliSdpGate = 32;     // full dimension above this needs the override
constexpr std::size_t kSweepDenseAuto = 512;  // dense column skipped past this by default

struct Options {
  int n = 3;
  int d = 2;
  std::string method = "closed";
  std::string convention;  // resolved from d when empty
  int n_max = 6;
  std::string methods;  // comma list for sweep; resolved from d when empty
  bool methods_given = false;
  std::string kind = "srm";
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 0;
  double gap_tol = 1e-7;
  bool override_size_cap = false;
  double tol = -1.0;  // PSD tolerance; <0 means not set
  std::string input_file;
  std::string program_file;
  std::string dump_x;
  std::string dump_omega;
};

Convention resolve_convention(const Options& opt) {
  if (!opt.convention.empty()) return convention_from_name(opt.convention);
  return opt.d == 2 ? Convention::singlet : Convention::phi_plus;
}

void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty())
    std::cout << text;
  else
    write_text_file(opt.out, text);
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void require_json_format(const Options& opt, const char* what) {
  if (opt.format != "json")
    throw ValidationError(std::string(what) + ": only json output is available");
}

std::size_t full_dimension(int n, int d) {
  std::size_t dim = 1;
  for (int k = 0; k <= n; ++k) dim *= static_cast<std::size_t>(d);
  return dim;
}

// ---- fidelity ------------------------------------------------------------

FidelityReport fidelity_by_method(const Options& opt, const std::string& method) {
  const Convention conv = resolve_convention(opt);
  if (method == "closed" || method == "blocks") {
    if (opt.d != 2)
      throw ValidationError("fidelity: the " + method + " route is qubit-only (--d 2)");
    return method == "closed" ? fidelity_closed_form(opt.n) : fidelity_blocks(opt.n);
  }
  if (method == "dense") {
    const auto set = signal_states(opt.n, opt.d, conv);
    return fidelity_dense(set, srm_povm(set));
  }
  if (method == "sdp") {
    if (full_dimension(opt.n, opt.d) > kCliSdpGate && !opt.override_size_cap)
      throw ResourceError("fidelity: sdp past " + std::to_string(kCliSdpGate) +
                          " dimensions needs --override-size-cap");
    SdpOptions sopt;
    sopt.gap_tol = opt.gap_tol;
    const auto sol = pbt::solve(build_primary(opt.n, opt.d, conv, opt.override_size_cap), sopt);
    FidelityReport rep;
    rep.n = opt.n;
    rep.d = opt.d;
    rep.F = sol.primal_value;
    rep.f = (rep.F * opt.d + 1.0) / (opt.d + 1.0);
    rep.method = "sdp";
    rep.convention = convention_name(conv);
    return rep;
  }
  throw ValidationError("fidelity: unknown method " + method);
}

int cmd_fidelity(const Options& opt) {
  const auto rep = fidelity_by_method(opt, opt.method);
  const double bound = static_cast<double>(rep.n) / (static_cast<double>(rep.d) * rep.d);
  const bool within = rep.F <= bound + 1e-9;
  if (opt.format == "csv") {
    std::string text = "n,d,F,f,method,convention\n";
    text += std::to_string(rep.n) + "," + std::to_string(rep.d) + "," + csv_num(rep.F) + "," +
            csv_num(rep.f) + "," + rep.method + "," + rep.convention + "\n";
    emit(opt, text);
  } else {
    json j;
    j["schema"] = "pbt/1";
    j["n"] = rep.n;
    j["d"] = rep.d;
    j["F"] = rep.F;
    j["f"] = rep.f;
    j["method"] = rep.method;
    j["convention"] = rep.convention;
    j["F_upper_bound"] = bound;
    j["within_upper_bound"] = within;
    emit(opt, j.dump(2) + "\n");
  }
  return within ? 0 : 5;
}

// ---- sweep -----------------------------------------------------------------

struct SweepRow {
  int n = 0;
  std::optional<double> f_closed, f_dense, f_sdp;
};

int cmd_sweep(const Options& opt) {
  if (opt.n_max < 1) throw ValidationError("sweep: --n-max must be positive");
  std::vector<std::string> methods;
  {
    std::string def = opt.d == 2 ? "closed,dense" : "dense";
    std::string src = opt.methods_given ? opt.methods : def;
    std::string cur;
    for (char c : src + ",") {
      if (c == ',') {
        if (!cur.empty()) methods.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
  }
  bool want_closed = false, want_dense = false, want_sdp = false;
  for (const auto& m : methods) {
    if (m == "closed")
      want_closed = true;
    else if (m == "dense")
      want_dense = true;
    else if (m == "sdp")
      want_sdp = true;
    else
      throw ValidationError("sweep: unknown method " + m);
  }
  if (want_closed && opt.d != 2)
    throw ValidationError("sweep: the closed route is qubit-only (--d 2)");
  const Convention conv = resolve_convention(opt);
  const double classical = classical_fidelity_limit(opt.d);

  std::vector<SweepRow> rows;
  for (int n = 1; n <= opt.n_max; ++n) {
    SweepRow row;
    row.n = n;
    if (want_closed) row.f_closed = fidelity_closed_form(n).f;
    if (want_dense) {
      const bool fits = full_dimension(n, opt.d) <= kSweepDenseAuto;
      if (opt.methods_given || fits) {
        const auto set = signal_states(n, opt.d, conv);
        row.f_dense = fidelity_dense(set, srm_povm(set)).f;
      }
    }
    if (want_sdp) {
      if (full_dimension(n, opt.d) > kCliSdpGate && !opt.override_size_cap)
        throw ResourceError("sweep: sdp past " + std::to_string(kCliSdpGate) +
                            " dimensions needs --override-size-cap");
      SdpOptions sopt;
      sopt.gap_tol = opt.gap_tol;
      const auto sol = pbt::solve(build_primary(n, opt.d, conv, opt.override_size_cap), sopt);
      row.f_sdp = (sol.primal_value * opt.d + 1.0) / (opt.d + 1.0);
    }
    rows.push_back(row);
  }

  if (opt.format == "csv") {
    std::string text =
        "N,f_srm_closed,f_srm_dense,f_sdp,f_classical_limit,asymptote_1_minus_1_over_2N\n";
    for (const auto& row : rows) {
      text += std::to_string(row.n) + ",";
      text += (row.f_closed ? csv_num(*row.f_closed) : "") + std::string(",");
      text += (row.f_dense ? csv_num(*row.f_dense) : "") + std::string(",");
      text += (row.f_sdp ? csv_num(*row.f_sdp) : "") + std::string(",");
      text += csv_num(classical) + ",";
      text += csv_num(1.0 - 1.0 / (2.0 * row.n)) + "\n";
    }
    emit(opt, text);
  } else {
    json j;
    j["schema"] = "pbt/1";
    j["d"] = opt.d;
    j["convention"] = convention_name(conv);
    j["rows"] = json::array();
    for (const auto& row : rows) {
      json r;
      r["N"] = row.n;
      r["f_srm_closed"] = row.f_closed ? json(*row.f_closed) : json(nullptr);
      r["f_srm_dense"] = row.f_dense ? json(*row.f_dense) : json(nullptr);
      r["f_sdp"] = row.f_sdp ? json(*row.f_sdp) : json(nullptr);
      r["f_classical_limit"] = classical;
      r["asymptote_1_minus_1_over_2N"] = 1.0 - 1.0 / (2.0 * row.n);
      j["rows"].push_back(r);
    }
    emit(opt, j.dump(2) + "\n");
  }
  return 0;
}

// ---- certify ---------------------------------------------------------------

int cmd_certify(const Options& opt) {
  require_json_format(opt, "certify");
  CertificateReport rep;
  json extra;
  if (opt.kind == "srm") {
    if (opt.d != 2) throw ValidationError("certify: the srm certificate is qubit-only (--d 2)");
    rep = certify_srm_optimal(opt.n, default_psd_tol(), opt.override_size_cap);
    extra["F_certified"] = fidelity_closed_form(opt.n).F;
  } else if (opt.kind == "upper") {
    rep = certify_universal_upper(opt.n, opt.d, resolve_convention(opt), default_psd_tol(),
                                  opt.override_size_cap);
    extra["F_upper_bound"] =
        static_cast<double>(opt.n) / (static_cast<double>(opt.d) * opt.d);
  } else {  // orthogonal
    rep = certify_orthogonal_achieving(opt.n, opt.d, default_psd_tol());
    extra["F_achieved"] = static_cast<double>(opt.n) / (static_cast<double>(opt.d) * opt.d);
  }
  json j;
  j["schema"] = "pbt/1";
  j["n"] = opt.n;
  j["d"] = opt.d;
  j["kind"] = rep.kind;
  j["passed"] = rep.passed;
  j["worst_margin"] = rep.worst_margin;
  j["margins"] = rep.margins;
  j["cross_check_defect"] = rep.cross_check_defect;
  j["value_defect"] = rep.value_defect;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  emit(opt, j.dump(2) + "\n");
  return rep.passed ? 0 : 5;
}

// ---- sdp -------------------------------------------------------------------

int cmd_sdp(const Options& opt) {
  require_json_format(opt, "sdp");
  if (full_dimension(opt.n, opt.d) > kCliSdpGate && !opt.override_size_cap)
    throw ResourceError("sdp: past " + std::to_string(kCliSdpGate) +
                        " dimensions needs --override-size-cap");
  const Convention conv = resolve_convention(opt);
  SdpOptions sopt;
  sopt.gap_tol = opt.gap_tol;
  const auto sol = pbt::solve(build_primary(opt.n, opt.d, conv, opt.override_size_cap), sopt);
  json j;
  j["schema"] = "pbt/1";
  j["n"] = sol.n;
  j["d"] = sol.d;
  j["F_primal"] = sol.primal_value;
  j["F_dual"] = sol.dual_value;
  j["gap"] = sol.gap;
  j["iterations"] = sol.iterations;
  emit(opt, j.dump(2) + "\n");
  if (!opt.dump_x.empty()) {
    std::vector<std::string> labels;
    std::vector<int> dims;
    for (int k = 1; k <= opt.n; ++k) {
      labels.push_back("A" + std::to_string(k));
      dims.push_back(opt.d);
    }
    const TensorSpace a_space(labels, dims);
    write_text_file(opt.dump_x,
                    matrix_to_json(sol.primal_blocks.back(), a_space).dump(2) + "\n");
  }
  if (!opt.dump_omega.empty())
    write_text_file(opt.dump_omega, matrix_to_json(sol.omega.m, sol.omega.space).dump(2) + "\n");
  return 0;
}

// ---- simulate --------------------------------------------------------------

int cmd_simulate(const Options& opt) {
  require_json_format(opt, "simulate");
  const Convention conv = resolve_convention(opt);
  const auto proc = srm_processor(opt.n, opt.d, conv);

  CMat input(static_cast<std::size_t>(opt.d), static_cast<std::size_t>(opt.d));
  input(0, 0) = cplx(1.0);  // default probe
  if (!opt.input_file.empty()) input = matrix_from_json(read_json_file(opt.input_file));

  ProgramOperation program;
  const ProgramOperation* program_ptr = nullptr;
  if (!opt.program_file.empty()) {
    const json j = read_json_file(opt.program_file);
    if (!j.is_object() || !j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
      throw ValidationError("program file: expected an object with a \"kraus\" array");
    program.trace_preserving = j.value("trace_preserving", true);
    for (const auto& jm : j["kraus"]) program.kraus_ops.push_back(matrix_from_json(jm));
    program.validate(opt.d);
    program_ptr = &program;
  }

  const auto result = teleport(input, proc.resource, proc.povm, program_ptr);
  const TensorSpace b_space({"B"}, {opt.d});
  json j;
  j["schema"] = "pbt/1";
  j["outcomes"] = json::array();
  for (const auto& out : result.outcomes) {
    json o;
    o["i"] = out.outcome_index;
    o["p"] = out.probability;
    o["rho"] = matrix_to_json(out.conditional_output, b_space);
    j["outcomes"].push_back(o);
  }
  j["average"] = matrix_to_json(result.average_output, b_space);
  j["F"] = choi_fidelity(proc.resource, proc.povm).F;
  emit(opt, j.dump(2) + "\n");
  return 0;
}

// ---- spectrum --------------------------------------------------------------

int cmd_spectrum(const Options& opt) {
  const auto spec = rho_spectrum(opt.n);
  if (opt.format == "csv") {
    std::string text = "branch,two_j,eigenvalue,degeneracy\n";
    for (const auto& line : spec.lines)
      text += line.branch + "," + std::to_string(line.two_j) + "," + csv_num(line.eigenvalue) +
              "," + std::to_string(line.degeneracy) + "\n";
    emit(opt, text);
  } else {
    json j;
    j["schema"] = "pbt/1";
    j["n"] = spec.n;
    j["total_dimension"] = spec.total_dimension();
    j["lines"] = json::array();
    for (const auto& line : spec.lines) {
      json l;
      l["branch"] = line.branch;
      l["two_j"] = line.two_j;
      l["eigenvalue"] = line.eigenvalue;
      l["degeneracy"] = line.degeneracy;
      j["lines"].push_back(l);
    }
    emit(opt, j.dump(2) + "\n");
  }
  return 0;
}

void apply_tolerances(const Options& opt) {
  if (const char* env = std::getenv("PBT_TOL"); env != nullptr && opt.tol < 0) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0))
      throw ValidationError("PBT_TOL must be a positive number");
    set_default_psd_tol(v);
  }
  if (opt.tol >= 0) {
    if (!(opt.tol > 0)) throw ValidationError("--tol must be positive");
    set_default_psd_tol(opt.tol);
  }
}

}  // namespace

int run(int argc, char** argv) {
  Options opt;
  CLI::App app{"port-based teleportation workbench"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "write output to this file instead of stdout");
    sub->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", opt.seed, "seed for reproducibility metadata");
    sub->add_option("--tol", opt.tol, "PSD tolerance (overrides PBT_TOL)")
        ->check(CLI::PositiveNumber);
  };

  auto* fid = app.add_subcommand("fidelity", "square-root-measurement or optimal fidelity");
  fid->add_option("--n", opt.n, "number of ports")->check(CLI::PositiveNumber);
  fid->add_option("--d", opt.d, "qudit dimension")->check(CLI::Range(2, 64));
  fid->add_option("--method", opt.method, "route")
      ->check(CLI::IsMember({"closed", "blocks", "dense", "sdp"}));
  fid->add_option("--convention", opt.convention, "pair convention")
      ->check(CLI::IsMember({"singlet", "phi_plus"}));
  fid->add_option("--gap-tol", opt.gap_tol, "sdp duality-gap tolerance");
  fid->add_flag("--override-size-cap", opt.override_size_cap, "allow large dense/sdp runs");
  add_common(fid);

  auto* sweep = app.add_subcommand("sweep", "fidelity table over port counts");
  sweep->add_option("--n-max", opt.n_max, "largest port count")->check(CLI::PositiveNumber);
  sweep->add_option("--d", opt.d, "qudit dimension")->check(CLI::Range(2, 64));
  sweep->add_option("--methods", opt.methods, "comma list of closed,dense,sdp")
      ->each([&](const std::string&) { opt.methods_given = true; });
  sweep->add_option("--convention", opt.convention, "pair convention")
      ->check(CLI::IsMember({"singlet", "phi_plus"}));
  sweep->add_option("--gap-tol", opt.gap_tol, "sdp duality-gap tolerance");
  sweep->add_flag("--override-size-cap", opt.override_size_cap, "allow large sdp rows");
  add_common(sweep);

  auto* cert = app.add_subcommand("certify", "operator certificates");
  cert->add_option("--n", opt.n, "number of ports")->check(CLI::PositiveNumber);
  cert->add_option("--d", opt.d, "qudit dimension")->check(CLI::Range(2, 64));
  cert->add_option("--kind", opt.kind, "certificate kind")
      ->check(CLI::IsMember({"srm", "upper", "orthogonal"}));
  cert->add_option("--convention", opt.convention, "pair convention")
      ->check(CLI::IsMember({"singlet", "phi_plus"}));
  cert->add_flag("--override-size-cap", opt.override_size_cap, "allow large dense checks");
  add_common(cert);

  auto* sdp = app.add_subcommand("sdp", "optimal protocol via the interior-point solver");
  sdp->add_option("--n", opt.n, "number of ports")->check(CLI::PositiveNumber);
  sdp->add_option("--d", opt.d, "qudit dimension")->check(CLI::Range(2, 64));
  sdp->add_option("--convention", opt.convention, "pair convention")
      ->check(CLI::IsMember({"singlet", "phi_plus"}));
  sdp->add_option("--gap-tol", opt.gap_tol, "duality-gap tolerance");
  sdp->add_flag("--override-size-cap", opt.override_size_cap, "allow large programs");
  sdp->add_option("--dump-x", opt.dump_x, "write the optimal X block as matrix JSON");
  sdp->add_option("--dump-omega", opt.dump_omega, "write the dual witness as matrix JSON");
  add_common(sdp);

  auto* sim = app.add_subcommand("simulate", "run the port channel on an input state");
  sim->add_option("--n", opt.n, "number of ports")->check(CLI::PositiveNumber);
  sim->add_option("--d", opt.d, "qudit dimension")->check(CLI::Range(2, 64));
  sim->add_option("--convention", opt.convention, "pair convention")
      ->check(CLI::IsMember({"singlet", "phi_plus"}));
  sim->add_option("--input", opt.input_file, "input density matrix (matrix JSON)");
  sim->add_option("--program", opt.program_file, "Kraus program file");
  add_common(sim);

  auto* spect = app.add_subcommand("spectrum", "closed-form spectrum of the state sum");
  spect->add_option("--n", opt.n, "number of ports")->check(CLI::PositiveNumber);
  add_common(spect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_tolerances(opt);
    if (fid->parsed()) return cmd_fidelity(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (cert->parsed()) return cmd_certify(opt);
    if (sdp->parsed()) return cmd_sdp(opt);
    if (sim->parsed()) return cmd_simulate(opt);
    if (spect->parsed()) return cmd_spectrum(opt);
    throw ValidationError("no subcommand selected");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace pbt::cli
