#pragma once

#include <cstddef>
#include <vector>

#include "pbt/core.hpp"
#include "pbt/linalg.hpp"

namespace pbt {

// Dense tensors in this module cover N ports, N responder qudits and the
// input (plus one reference qudit for the Choi route).
inline constexpr std::size_t kChannelDimCap = 4096;

// Quantum operation applied to every responder qudit before the ports are
// read out. Kraus form; trace-nonincreasing operations model postselection.
struct ProgramOperation {
  std::vector<CMat> kraus_ops;
  bool trace_preserving = true;

  void validate(int qudit_dim) const;
  CMat apply(const CMat& rho) const;  // sum_j K rho K^dag
  static ProgramOperation identity(int qudit_dim);
};

struct TeleportOutcome {
  int outcome_index = 0;  // port number, 1-based
  double probability = 0.0;
  CMat conditional_output;  // unit trace, or zero when the branch is empty
};

// Shared resource |psi> on [A_1..A_N, B_1..B_N] (first factor most
// significant), a pair product optionally deformed by an encoding on the
// whole A side.
struct ResourceState {
  int n = 0;
  int d = 0;
  Convention convention = Convention::singlet;
  std::vector<cplx> amplitudes;
};

ResourceState maximally_entangled_resource(int n_ports, int qudit_dim, Convention convention);
// |psi> = (O (x) 1) pair product; requires tr(O O^dag) = d^n
ResourceState resource_from_encoding(int n_ports, int qudit_dim, Convention convention,
                                     const CMat& o);
// arbitrary unit vector, length d^(2n)
ResourceState resource_from_vector(int n_ports, int qudit_dim, Convention convention,
                                   std::vector<cplx> amplitudes);

struct TeleportResult {
  std::vector<TeleportOutcome> outcomes;
  CMat average_output;  // sum of the unnormalized branches
};

// One shot of the port channel: measure (ports, input) with the POVM, keep
// the flagged responder qudit. The program, when given, acts on every
// responder qudit before the measurement.
TeleportResult teleport(const CMat& input, const ResourceState& resource, const Povm& povm,
                        const ProgramOperation* program = nullptr);

// Entanglement fidelity by teleporting half of a maximally entangled pair
// and projecting back; independent route to the overlap-sum fidelity.
FidelityReport choi_fidelity(const ResourceState& resource, const Povm& povm);

// Fixed channel configuration that runs arbitrary programs.
struct Processor {
  ResourceState resource;
  Povm povm;
};

Processor srm_processor(int n_ports, int qudit_dim);
Processor srm_processor(int n_ports, int qudit_dim, Convention convention);

struct ProcessorRun {
  CMat output;
  double success_probability = 0.0;  // 1 up to rounding for trace-preserving programs
};

// Trace-decreasing programs report the pooled acceptance probability over
// all ports and the output renormalized by it.
ProcessorRun processor_execute(const Processor& processor, const ProgramOperation& program,
                               const CMat& input);

struct MonotonicityReport {
  bool passed = false;
  double worst_margin = 0.0;
  std::vector<double> margins;  // fid(program pair) - fid(plain pair), per input
};

// Data-processing check: applying a channel to both ends of the
// teleportation pair can only raise their fidelity.
MonotonicityReport monotonicity_check(const Processor& processor,
                                      const ProgramOperation& program,
                                      const std::vector<CMat>& inputs);

// Largest deviation of the pre-selection responder marginal (port 1, summed
// over outcomes) across the given inputs; zero means the measurement leaks
// nothing.
double no_signalling_defect(const ResourceState& resource, const Povm& povm,
                            const std::vector<CMat>& inputs);

}  // namespace pbt
