#include "pbt/channel_sim.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "pbt/eigh.hpp"
#include "pbt/errors.hpp"
#include "pbt/kernels.hpp"

namespace pbt {

namespace {

constexpr double kBranchFloor = 1e-14;

std::size_t checked_dim(int d, int n_factors, const char* what) {
  std::size_t dim = 1;
  for (int k = 0; k < n_factors; ++k) {
    dim *= static_cast<std::size_t>(d);
    if (dim > kChannelDimCap)
      throw ResourceError(std::string(what) + ": dense tensor exceeds " +
                          std::to_string(kChannelDimCap) + " dimensions");
  }
  return dim;
}

cplx pair_amplitude(Convention convention, int d, int a, int b) {
  if (convention == Convention::singlet) {
    const double r2 = 1.0 / std::sqrt(2.0);
    if (a == 0 && b == 1) return cplx(r2);
    if (a == 1 && b == 0) return cplx(-r2);
    return cplx(0.0);
  }
  return a == b ? cplx(1.0 / std::sqrt(static_cast<double>(d))) : cplx(0.0);
}

void check_ports(int n_ports, int qudit_dim, Convention convention) {
  if (n_ports < 1) throw ValidationError("resource: need at least one port");
  if (qudit_dim < 2) throw ValidationError("resource: qudit dimension must be at least 2");
  if (convention == Convention::singlet && qudit_dim != 2)
    throw ValidationError("resource: the singlet convention is qubit-only");
}

CMat outer_self(const std::vector<cplx>& v) {
  const std::size_t n = v.size();
  CMat out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = v[i] * std::conj(v[j]);
  return out;
}

CMat phi_plus_projector(int d) {
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  std::vector<cplx> v(dd);
  for (int k = 0; k < d; ++k)
    v[static_cast<std::size_t>(k) * d + k] = cplx(1.0 / std::sqrt(static_cast<double>(d)));
  return outer_self(v);
}

void check_configuration(const ResourceState& resource, const Povm& povm, const CMat& input) {
  if (resource.n < 1 || resource.amplitudes.empty())
    throw ValidationError("teleport: resource is empty");
  if (povm.n != resource.n || povm.d != resource.d)
    throw ValidationError("teleport: measurement and resource disagree on ports");
  const std::size_t meas_dim = checked_dim(resource.d, resource.n + 1, "teleport");
  for (const auto& el : povm.elements)
    if (el.rows() != meas_dim || !el.square())
      throw ValidationError("teleport: measurement element has the wrong dimension");
  if (povm.elements.size() != static_cast<std::size_t>(resource.n))
    throw ValidationError("teleport: expected one measurement element per port");
  if (!input.square() || input.rows() != static_cast<std::size_t>(resource.d))
    throw ValidationError("teleport: input must be one qudit");
}

// resource density matrix with the program applied to every responder qudit
CMat programmed_resource(const ResourceState& resource, const ProgramOperation* program) {
  CMat rho = outer_self(resource.amplitudes);
  if (program == nullptr) return rho;
  program->validate(resource.d);
  const std::vector<int> dims(static_cast<std::size_t>(2 * resource.n), resource.d);
  for (int port = 0; port < resource.n; ++port) {
    const std::vector<int> fac{resource.n + port};
    CMat acc(rho.rows(), rho.cols());
    for (const auto& k : program->kraus_ops)
      acc += apply_right(apply_left(k, fac, rho, dims), dagger(k), fac, dims);
    rho = std::move(acc);
  }
  return rho;
}

struct MeasuredBranches {
  std::vector<double> probabilities;
  std::vector<CMat> kept;  // partial trace onto the kept factors, unnormalized
};

// apply sqrt(Pi_i) on (ports, input) and reduce every branch onto
// keep_extra + the flagged responder factor
MeasuredBranches measure_branches(const CMat& rho_full, const Povm& povm,
                                  const std::vector<int>& dims,
                                  const std::vector<int>& keep_extra) {
  const int n = povm.n;
  std::vector<int> meas_factors;
  for (int k = 0; k < n; ++k) meas_factors.push_back(k);
  meas_factors.push_back(2 * n);
  MeasuredBranches out;
  for (int i = 0; i < n; ++i) {
    const CMat root = sqrt_psd(povm.elements[static_cast<std::size_t>(i)], 1e-9);
    CMat branch = apply_right(apply_left(root, meas_factors, rho_full, dims), root,
                              meas_factors, dims);
    out.probabilities.push_back(branch.trace().real());
    std::vector<int> keep{n + i};
    for (int f : keep_extra) keep.push_back(f);
    out.kept.push_back(partial_trace(branch, dims, keep));
  }
  return out;
}

}  // namespace

// ---- programs ---------------------------------------------------------------

void ProgramOperation::validate(int qudit_dim) const {
  if (kraus_ops.empty()) throw ValidationError("program: no Kraus operators");
  const std::size_t d = static_cast<std::size_t>(qudit_dim);
  CMat total(d, d);
  for (const auto& k : kraus_ops) {
    if (!k.square() || k.rows() != d)
      throw ValidationError("program: Kraus operator must act on one qudit");
    total += matmul(dagger(k), k);
  }
  if (trace_preserving) {
    if (max_abs_diff(total, CMat::identity(d)) > 1e-12)
      throw ValidationError("program: Kraus operators do not resolve the identity");
  } else {
    CMat slack = CMat::identity(d);
    slack -= total;
    if (eigh(slack).eigenvalues.front() < -1e-9)
      throw ValidationError("program: operation increases trace");
  }
}

CMat ProgramOperation::apply(const CMat& rho) const {
  CMat out(rho.rows(), rho.cols());
  for (const auto& k : kraus_ops) out += matmul(k, matmul(rho, dagger(k)));
  return out;
}

ProgramOperation ProgramOperation::identity(int qudit_dim) {
  ProgramOperation op;
  op.kraus_ops.push_back(CMat::identity(static_cast<std::size_t>(qudit_dim)));
  op.trace_preserving = true;
  return op;
}

// ---- resource states --------------------------------------------------------

ResourceState maximally_entangled_resource(int n_ports, int qudit_dim, Convention convention) {
  check_ports(n_ports, qudit_dim, convention);
  checked_dim(qudit_dim, 2 * n_ports, "resource");
  std::size_t side = 1;
  for (int k = 0; k < n_ports; ++k) side *= static_cast<std::size_t>(qudit_dim);
  ResourceState res;
  res.n = n_ports;
  res.d = qudit_dim;
  res.convention = convention;
  res.amplitudes.assign(side * side, cplx(0.0));
  for (std::size_t a = 0; a < side; ++a)
    for (std::size_t b = 0; b < side; ++b) {
      cplx amp(1.0);
      std::size_t ra = a, rb = b;
      for (int k = 0; k < n_ports; ++k) {
        const std::size_t q = static_cast<std::size_t>(qudit_dim);
        const int ak = static_cast<int>(ra % q), bk = static_cast<int>(rb % q);
        ra /= q;
        rb /= q;
        amp *= pair_amplitude(convention, qudit_dim, ak, bk);
        if (amp == cplx(0.0)) break;
      }
      if (amp != cplx(0.0)) res.amplitudes[a * side + b] = amp;
    }
  return res;
}

ResourceState resource_from_encoding(int n_ports, int qudit_dim, Convention convention,
                                     const CMat& o) {
  ResourceState base = maximally_entangled_resource(n_ports, qudit_dim, convention);
  const std::size_t dim_a = static_cast<std::size_t>(std::llround(
      std::sqrt(static_cast<double>(base.amplitudes.size()))));
  if (!o.square() || o.rows() != dim_a)
    throw ValidationError("resource: encoding must act on the whole port side");
  const double norm = trace_of_product_real(o, dagger(o));
  if (std::abs(norm - static_cast<double>(dim_a)) > 1e-6 * static_cast<double>(dim_a))
    throw ValidationError("resource: encoding must carry trace(O O^dag) = d^n");
  ResourceState out = base;
  for (std::size_t a = 0; a < dim_a; ++a)
    for (std::size_t b = 0; b < dim_a; ++b) {
      cplx acc{};
      for (std::size_t k = 0; k < dim_a; ++k)
        acc += o(a, k) * base.amplitudes[k * dim_a + b];
      out.amplitudes[a * dim_a + b] = acc;
    }
  return out;
}

ResourceState resource_from_vector(int n_ports, int qudit_dim, Convention convention,
                                   std::vector<cplx> amplitudes) {
  check_ports(n_ports, qudit_dim, convention);
  const std::size_t full = checked_dim(qudit_dim, 2 * n_ports, "resource");
  if (amplitudes.size() != full)
    throw ValidationError("resource: amplitude vector has the wrong length");
  double norm = 0.0;
  for (const cplx& v : amplitudes) norm += std::norm(v);
  if (std::abs(norm - 1.0) > 1e-9)
    throw ValidationError("resource: amplitude vector is not normalized");
  ResourceState res;
  res.n = n_ports;
  res.d = qudit_dim;
  res.convention = convention;
  res.amplitudes = std::move(amplitudes);
  return res;
}

// ---- channel ----------------------------------------------------------------

TeleportResult teleport(const CMat& input, const ResourceState& resource, const Povm& povm,
                        const ProgramOperation* program) {
  checked_dim(resource.d, 2 * resource.n + 1, "teleport");
  check_configuration(resource, povm, input);
  const std::vector<int> dims(static_cast<std::size_t>(2 * resource.n + 1), resource.d);
  const CMat rho_full = kron(programmed_resource(resource, program), input);
  const auto branches = measure_branches(rho_full, povm, dims, {});

  TeleportResult result;
  const std::size_t d = static_cast<std::size_t>(resource.d);
  result.average_output = CMat(d, d);
  for (int i = 0; i < resource.n; ++i) {
    const double p = branches.probabilities[static_cast<std::size_t>(i)];
    const CMat& branch = branches.kept[static_cast<std::size_t>(i)];
    result.average_output += branch;
    TeleportOutcome outcome;
    outcome.outcome_index = i + 1;
    if (p < kBranchFloor) {  // do not normalize numerical dust
      outcome.probability = 0.0;
      outcome.conditional_output = CMat(d, d);
    } else {
      outcome.probability = p;
      CMat cond = branch;
      cond *= cplx(1.0 / p);
      outcome.conditional_output = std::move(cond);
    }
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

FidelityReport choi_fidelity(const ResourceState& resource, const Povm& povm) {
  const CMat probe = phi_plus_projector(resource.d);
  check_configuration(resource, povm, CMat::identity(static_cast<std::size_t>(resource.d)));
  checked_dim(resource.d, 2 * resource.n + 2, "choi");
  const std::vector<int> dims(static_cast<std::size_t>(2 * resource.n + 2), resource.d);
  // input and reference qudits share the probe; the reference rides along
  const CMat rho_full = kron(programmed_resource(resource, nullptr), probe);
  const auto branches = measure_branches(rho_full, povm, dims, {2 * resource.n + 1});

  CMat avg(probe.rows(), probe.cols());
  for (const auto& kept : branches.kept) avg += kept;
  FidelityReport rep;
  rep.n = resource.n;
  rep.d = resource.d;
  rep.method = "choi";
  rep.convention = convention_name(resource.convention);
  rep.F = trace_of_product_real(probe, avg);
  rep.f = (rep.F * resource.d + 1.0) / (resource.d + 1.0);
  return rep;
}

// ---- processor ----------------------------------------------------------------

Processor srm_processor(int n_ports, int qudit_dim) {
  return srm_processor(n_ports, qudit_dim,
                       qudit_dim == 2 ? Convention::singlet : Convention::phi_plus);
}

Processor srm_processor(int n_ports, int qudit_dim, Convention convention) {
  Processor proc;
  proc.resource = maximally_entangled_resource(n_ports, qudit_dim, convention);
  proc.povm = srm_povm(signal_states(n_ports, qudit_dim, convention));
  return proc;
}

ProcessorRun processor_execute(const Processor& processor, const ProgramOperation& program,
                               const CMat& input) {
  const auto run = teleport(input, processor.resource, processor.povm, &program);
  ProcessorRun out;
  out.success_probability = run.average_output.trace().real();
  if (program.trace_preserving || out.success_probability < kBranchFloor) {
    out.output = run.average_output;
    if (out.success_probability < kBranchFloor) out.success_probability = 0.0;
  } else {
    CMat pooled = run.average_output;
    pooled *= cplx(1.0 / out.success_probability);
    out.output = std::move(pooled);
  }
  return out;
}

MonotonicityReport monotonicity_check(const Processor& processor,
                                      const ProgramOperation& program,
                                      const std::vector<CMat>& inputs) {
  if (!program.trace_preserving)
    throw ValidationError("monotonicity: program must be trace-preserving");
  program.validate(processor.resource.d);
  MonotonicityReport rep;
  rep.passed = true;
  for (const auto& chi : inputs) {
    const CMat lam = teleport(chi, processor.resource, processor.povm).average_output;
    const double plain = state_fidelity(chi, lam);
    const double mapped = state_fidelity(program.apply(chi), program.apply(lam));
    const double margin = mapped - plain;
    rep.margins.push_back(margin);
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-10) rep.passed = false;
  }
  return rep;
}

double no_signalling_defect(const ResourceState& resource, const Povm& povm,
                            const std::vector<CMat>& inputs) {
  if (inputs.size() < 2) throw ValidationError("no-signalling: need at least two inputs");
  const std::vector<int> dims(static_cast<std::size_t>(2 * resource.n + 1), resource.d);
  std::vector<CMat> marginals;
  for (const auto& input : inputs) {
    check_configuration(resource, povm, input);
    const CMat rho_full = kron(programmed_resource(resource, nullptr), input);
    // fixed responder qudit (port 1) regardless of the measured outcome
    std::vector<int> meas_factors;
    for (int k = 0; k < resource.n; ++k) meas_factors.push_back(k);
    meas_factors.push_back(2 * resource.n);
    CMat marginal(static_cast<std::size_t>(resource.d), static_cast<std::size_t>(resource.d));
    for (const auto& el : povm.elements) {
      const CMat root = sqrt_psd(el, 1e-9);
      const CMat branch =
          apply_right(apply_left(root, meas_factors, rho_full, dims), root, meas_factors, dims);
      marginal += partial_trace(branch, dims, {resource.n});
    }
    marginals.push_back(std::move(marginal));
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < marginals.size(); ++k)
    worst = std::max(worst, max_abs_diff(marginals[0], marginals[k]));
  return worst;
}

}  // namespace pbt
