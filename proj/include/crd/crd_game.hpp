#ifndef CRD_CRD_GAME_HPP
#define CRD_CRD_GAME_HPP

#include <stdexcept>
#include <string>

// Payoff layer of the one-shot collective risk dilemma: a group of N players
// needs at least M cooperators or everyone loses the endowment with
// probability r. Cooperating costs a fraction c of the endowment b. Groups may
// additionally contain a fixed stochastic members that jointly cooperate with
// probability p.

namespace crd {

struct GameParams {
  int group_size = 6;          // N
  int threshold = 3;           // M
  double risk = 0.5;           // r
  double endowment = 1.0;      // b
  double cost_fraction = 0.1;  // c

  void validate() const {
    if (group_size < 1) throw std::invalid_argument("group_size must be >= 1");
    if (threshold < 1 || threshold > group_size)
      throw std::invalid_argument("threshold must satisfy 1 <= M <= N");
    if (risk < 0.0 || risk > 1.0) throw std::invalid_argument("risk must be in [0,1]");
    if (!(endowment > 0.0)) throw std::invalid_argument("endowment must be > 0");
    if (cost_fraction < 0.0 || cost_fraction > 1.0)
      throw std::invalid_argument("cost_fraction must be in [0,1]");
  }
};

struct HybridPolicy {
  int agent_count = 0;            // a, fixed members per group
  double coop_probability = 0.0;  // p

  void validate(const GameParams& g) const {
    if (agent_count < 0 || agent_count > g.group_size - 1)
      throw std::invalid_argument(
          "agent_count must satisfy 0 <= a <= N-1 (at least one adaptive slot)");
    if (coop_probability < 0.0 || coop_probability > 1.0)
      throw std::invalid_argument("coop_probability must be in [0,1]");
  }
};

enum class Strategy { C, D };

// Unit step with theta(0) = 1. Every threshold comparison routes through here
// so the convention lives in one place.
constexpr int heaviside(int x) noexcept { return x < 0 ? 0 : 1; }

// pi_D(j) = b(1 - r + r*theta(j - M)), j cooperators in the group.
inline double payoff_defector(int coop_count, const GameParams& g) {
  if (coop_count < 0 || coop_count > g.group_size)
    throw std::domain_error("payoff_defector: cooperator count outside [0,N]");
  return g.endowment *
         (1.0 - g.risk + g.risk * heaviside(coop_count - g.threshold));
}

// pi_C(j) = pi_D(j) - c*b. A cooperator is itself part of the count, so j >= 1.
inline double payoff_cooperator(int coop_count, const GameParams& g) {
  if (coop_count < 1 || coop_count > g.group_size)
    throw std::domain_error("payoff_cooperator: cooperator count outside [1,N]");
  return payoff_defector(coop_count, g) - g.cost_fraction * g.endowment;
}

inline double payoff(Strategy s, int coop_count, const GameParams& g) {
  return s == Strategy::C ? payoff_cooperator(coop_count, g)
                          : payoff_defector(coop_count, g);
}

// Expected payoff in a hybrid group with i adaptive cooperators:
//   Pi(i,a,p) = p*pi(i+a) + (1-p)*pi(i)
// With probability p all a fixed members cooperate jointly, otherwise none do.
inline double expected_payoff(Strategy s, int adaptive_coop_count,
                              const HybridPolicy& h, const GameParams& g) {
  const int adaptive_seats = g.group_size - h.agent_count;
  if (adaptive_coop_count < 0 || adaptive_coop_count > adaptive_seats)
    throw std::domain_error("expected_payoff: adaptive cooperator count outside [0,N-a]");
  if (s == Strategy::C && adaptive_coop_count < 1)
    throw std::domain_error("expected_payoff: a cooperator needs i >= 1");
  return h.coop_probability * payoff(s, adaptive_coop_count + h.agent_count, g) +
         (1.0 - h.coop_probability) * payoff(s, adaptive_coop_count, g);
}

}  // namespace crd

#endif  // CRD_CRD_GAME_HPP
