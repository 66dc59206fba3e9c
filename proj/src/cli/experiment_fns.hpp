#pragma once

#include "smlab/cli/experiments.hpp"

namespace smlab::cli::experiments {

void wiener_structure(RunContext& ctx);
void divergence_split(RunContext& ctx);
void density_matching(RunContext& ctx);
void hj_sign_flip(RunContext& ctx);
void markov_wave(RunContext& ctx);
void scaled_equivalence(RunContext& ctx);
void emergent_commutator(RunContext& ctx);
void hamiltonian_chain(RunContext& ctx);
void heisenberg_flow(RunContext& ctx);
void time_ordered_moments(RunContext& ctx);
void trace_conservation(RunContext& ctx);
void trace_derivative(RunContext& ctx);
void born_rule(RunContext& ctx);
void ur_invariance(RunContext& ctx);

}  // namespace smlab::cli::experiments
