#include <cmath>
#include <string>

#include "lcrl/solver/solver.hpp"

namespace lcrl::solver {

double Occupancy::total() const {
  double t = 0.0;
  for (double r : rho) t += r;
  return t;
}

Occupancy occupancy_forward(const TabularMDP& mdp, const Policy& policy) {
  const int S = mdp.num_states;
  if (policy.num_states != S || policy.horizon != mdp.horizon) {
    throw SolverError("policy does not match MDP dimensions");
  }
  for (int t = 0; t <= policy.horizon; ++t) {
    for (int s = 0; s < S; ++s) {
      double z = 0.0;
      for (double p : policy.row(t, s)) {
        if (p < 0.0) throw SolverError("negative policy probability");
        z += p;
      }
      if (std::abs(z - 1.0) > 1e-9) {
        throw SolverError("policy row (t=" + std::to_string(t) + ", s=" +
                          std::to_string(s) + ") sums to " + std::to_string(z));
      }
    }
  }

  Occupancy occ;
  occ.kind = Occupancy::Kind::kPolicy;
  occ.rho.assign(mdp.table_size(), 0.0);
  std::vector<double> p(static_cast<std::size_t>(S), 0.0), p_next(p.size());
  p[static_cast<std::size_t>(mdp.initial_state)] = 1.0;
  double discount = 1.0;
  for (int t = 0; t <= mdp.horizon; ++t) {
    std::fill(p_next.begin(), p_next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      const double ps = p[static_cast<std::size_t>(s)];
      if (ps == 0.0) continue;
      const auto row = policy.row(t, s);
      for (int a = 0; a < kNumActions; ++a) {
        const double mass = ps * row[static_cast<std::size_t>(a)];
        occ.rho[static_cast<std::size_t>(s) * kNumActions + a] += discount * mass;
        p_next[static_cast<std::size_t>(mdp.successor(s, a))] += mass;
      }
    }
    p.swap(p_next);
    discount *= mdp.gamma;
  }
  return occ;
}

Occupancy empirical_occupancy(const TabularMDP& mdp,
                              std::span<const Demonstration> demos) {
  if (demos.empty()) throw SolverError("empirical occupancy of zero demos");
  Occupancy occ;
  occ.kind = Occupancy::Kind::kEmpirical;
  occ.rho.assign(mdp.table_size(), 0.0);
  const double w = 1.0 / static_cast<double>(demos.size());
  for (const auto& d : demos) {
    if (d.states.size() != d.actions.size()) {
      throw SolverError("demonstration has mismatched state/action counts");
    }
    double discount = 1.0;
    for (std::size_t t = 0; t < d.states.size(); ++t) {
      const int s = d.states[t], a = d.actions[t];
      if (s < 0 || s >= mdp.num_states || a < 0 || a >= kNumActions) {
        throw SolverError("demonstration step out of range");
      }
      occ.rho[static_cast<std::size_t>(s) * kNumActions + a] += w * discount;
      discount *= mdp.gamma;
    }
  }
  return occ;
}

}  // namespace lcrl::solver
