#ifndef CZK_ANALYSIS_HPP_
#define CZK_ANALYSIS_HPP_

#include <functional>
#include <string>
#include <vector>

#include "czk/scheduler.hpp"
#include "czk/simulator.hpp"

namespace czk {

// A rewound interval may solve a session when it holds exactly two of the
// session's preamble rounds, the session's first round is strictly before
// it, its last round strictly after, and the two in-interval rounds are
// split across the interval's halves (the earlier round in the first
// half — the documented reading of the minimality condition).
bool may_solve(const RewindInterval& iv, const RewindPlan& plan, const Schedule& sched,
               int session_id);
std::vector<RewindInterval> may_solve_intervals(const Schedule& sched, int session_id);
int count_may_solve(const Schedule& sched, int session_id);

// ceil(m / (log2(mk) + 1)) - 2; may be negative (vacuous).
int lemma_bound(int m, int mk);

struct Claim64Result {
    int r = 0, h = 0;
    int min_count = 0;
    int bound = 0;
    bool holds = false;
    std::uint64_t witness_placement = 0;  // slot mask attaining the minimum
    std::string to_json() const;
};

// Exhaustively places r session rounds into 2^h slots and counts, per
// placement, the rewound intervals holding exactly two rounds split
// across their halves; returns the minimum and checks ceil(r/(h+1)).
Claim64Result verify_claim_6_4(int r, int h);

struct ExperimentConfig {
    int required_wins = 1;   // a
    int test_budget = 16;    // b
    long long trials = 10000;
    std::uint64_t seed = 0;
    double eps_win = 0.0;    // additive advantage on the win branch
};

// Per-test win probability chosen by the adversary from what it has seen.
using SeqStrategy = std::function<double(int test_index, int wins_so_far, int remaining)>;

SeqStrategy const_strategy(double p);
SeqStrategy adaptive_threshold_strategy();

struct SeqExpResult {
    double win_rate = 0.0;
    double death_rate = 0.0;
    double bound = 0.0;
    double sigma = 0.0;
    bool bound_holds = false;
    long long trials = 0;
};

SeqExpResult sequential_experiment(const ExperimentConfig& config, const SeqStrategy& strategy);

// Grid-search the constant strategy that maximizes the empirical win rate.
double grid_search_constant(const ExperimentConfig& pilot);

// Schedule families.
Schedule round_robin_schedule(int m, int k);
Schedule nested_schedule(int m, int k);
Schedule blocked_schedule(int m, int k);
Schedule straddle_schedule(int m, int k);
Schedule random_schedule(int m, int k, Stream& rng);
// Calls fn for every complete schedule of k sessions with m rounds each.
void for_each_schedule(int m, int k, const std::function<void(const Schedule&)>& fn);

struct SweepCell {
    int m = 0;
    int k = 0;
    std::string adversary;
    int trials = 0;
    int failures = 0;
    double rate = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    double spearman_rho = 0.0;
    double p_value = 1.0;  // one-sided, H1: rate decreases with m
    std::string to_csv() const;
};

SweepResult simulator_success_sweep(const std::vector<int>& m_values, int num_sessions,
                                    const std::string& adversary, int trials,
                                    std::uint64_t seed, SecurityConfig base_config);

// Statistics helpers.
double binomial_sigma(double p, long long n);
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);
double spearman_p_negative(const std::vector<double>& x, const std::vector<double>& y);
double normal_cdf(double z);

}  // namespace czk

#endif  // CZK_ANALYSIS_HPP_
