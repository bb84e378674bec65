#include "czk/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace czk {

bool may_solve(const RewindInterval& iv, const RewindPlan& plan, const Schedule& sched,
               int session_id) {
    if (!plan.is_plan_interval(iv))
        throw parameter_error("may_solve: interval is not in the plan");
    const std::vector<int> slots = sched.session_slots(session_id);
    if (slots.empty()) return false;
    std::vector<int> inside;
    for (int s : slots)
        if (s >= iv.lo && s <= iv.hi) inside.push_back(s);
    if (inside.size() != 2) return false;                      // exactly two rounds
    if (slots.front() >= iv.lo) return false;                  // first round before
    if (slots.back() <= iv.hi) return false;                   // last round after
    return inside[0] <= iv.mid && inside[1] > iv.mid;          // split across halves
}

std::vector<RewindInterval> may_solve_intervals(const Schedule& sched, int session_id) {
    const RewindPlan plan = rewind_plan(sched.m * sched.num_sessions);
    std::vector<RewindInterval> out;
    for (const auto& iv : plan.intervals)
        if (may_solve(iv, plan, sched, session_id)) out.push_back(iv);
    return out;
}

int count_may_solve(const Schedule& sched, int session_id) {
    if (!sched.complete(session_id))
        throw precondition_error("count_may_solve: session preamble incomplete");
    return static_cast<int>(may_solve_intervals(sched, session_id).size());
}

int lemma_bound(int m, int mk) {
    const double denom = std::log2(static_cast<double>(mk)) + 1.0;
    return static_cast<int>(std::ceil(static_cast<double>(m) / denom)) - 2;
}

std::string Claim64Result::to_json() const {
    nlohmann::json j;
    j["r"] = r;
    j["h"] = h;
    j["min_count"] = min_count;
    j["bound"] = bound;
    j["holds"] = holds;
    std::vector<int> slots;
    for (int i = 0; i < 64; ++i)
        if ((witness_placement >> i) & 1) slots.push_back(i + 1);
    j["witness_placement"] = slots;
    return j.dump();
}

namespace {

// Balanced-tree intervals over n = 2^h slots, including the whole range
// (it is itself a rewound interval inside any larger context). Each entry
// is (mask, first-half mask).
void tree_intervals(int lo, int hi, std::vector<std::pair<std::uint64_t, std::uint64_t>>& out) {
    if (lo >= hi) return;
    const int mid = lo + (hi - lo + 1) / 2 - 1;
    std::uint64_t mask = 0, half = 0;
    for (int s = lo; s <= hi; ++s) mask |= 1ULL << (s - 1);
    for (int s = lo; s <= mid; ++s) half |= 1ULL << (s - 1);
    out.emplace_back(mask, half);
    tree_intervals(lo, mid, out);
    tree_intervals(mid + 1, hi, out);
}

int good_count(std::uint64_t placement,
               const std::vector<std::pair<std::uint64_t, std::uint64_t>>& intervals) {
    int count = 0;
    for (const auto& [mask, half] : intervals) {
        const std::uint64_t in = placement & mask;
        if (std::popcount(in) == 2 && std::popcount(in & half) == 1) ++count;
    }
    return count;
}

}  // namespace

Claim64Result verify_claim_6_4(int r, int h) {
    if (h < 1 || h > 5) throw parameter_error("verify_claim_6_4: h must be in 1..5");
    const int n = 1 << h;
    if (r < 2 || r > n) throw parameter_error("verify_claim_6_4: need 2 <= r <= 2^h");
    Claim64Result res;
    res.r = r;
    res.h = h;
    res.bound = (r + h) / (h + 1);  // ceil(r / (h+1))

    std::vector<std::pair<std::uint64_t, std::uint64_t>> intervals;
    tree_intervals(1, n, intervals);

    int best = -1;
    std::uint64_t best_mask = 0;
    if (n <= 16) {
        const std::uint64_t top = 1ULL << n;
        for (std::uint64_t mask = 0; mask < top; ++mask) {
            if (std::popcount(mask) != r) continue;
            const int g = good_count(mask, intervals);
            if (best < 0 || g < best) {
                best = g;
                best_mask = mask;
            }
        }
    } else {
        // n = 32: exhaustive over 2^32 placements via half tables. The only
        // interval spanning both halves is the full range itself.
        std::vector<std::pair<std::uint64_t, std::uint64_t>> half_ivs;
        tree_intervals(1, 16, half_ivs);
        std::vector<std::uint8_t> tbl(1 << 16);
        std::vector<std::uint8_t> pc(1 << 16);
        for (std::uint32_t mask = 0; mask < (1u << 16); ++mask) {
            tbl[mask] = static_cast<std::uint8_t>(good_count(mask, half_ivs));
            pc[mask] = static_cast<std::uint8_t>(std::popcount(mask));
        }
        std::vector<int> best_by_r(33, -1);
        std::vector<std::uint64_t> mask_by_r(33, 0);
        std::uint64_t mask = 0;
        do {
            const std::uint32_t lo = static_cast<std::uint32_t>(mask & 0xFFFF);
            const std::uint32_t hi = static_cast<std::uint32_t>(mask >> 16);
            const int rr = pc[lo] + pc[hi];
            if (rr >= 2) {
                int g = tbl[lo] + tbl[hi];
                if (pc[lo] == 1 && pc[hi] == 1) ++g;
                if (best_by_r[rr] < 0 || g < best_by_r[rr]) {
                    best_by_r[rr] = g;
                    mask_by_r[rr] = mask;
                }
            }
            ++mask;
        } while (mask < (1ULL << 32));
        best = best_by_r[static_cast<std::size_t>(r)];
        best_mask = mask_by_r[static_cast<std::size_t>(r)];
    }
    res.min_count = best;
    res.witness_placement = best_mask;
    res.holds = best >= res.bound;
    return res;
}

SeqStrategy const_strategy(double p) {
    return [p](int, int, int) { return p; };
}

SeqStrategy adaptive_threshold_strategy() {
    // Spends aggressively while behind and freezes once a win is banked:
    // p scales with how many wins are still needed per remaining test.
    return [](int, int wins, int remaining) {
        const double need = std::max(1, 4 - wins);
        return std::clamp(need / (0.5 * remaining + need), 0.02, 0.9);
    };
}

SeqExpResult sequential_experiment(const ExperimentConfig& config, const SeqStrategy& strategy) {
    if (config.required_wins >= config.test_budget)
        throw parameter_error("sequential_experiment: need a < b");
    if (config.trials < 1) throw parameter_error("sequential_experiment: trials >= 1");
    long long won = 0, died = 0;
    for (long long trial = 0; trial < config.trials; ++trial) {
        Stream rng(derive(config.seed, "seqexp", static_cast<std::uint64_t>(trial)));
        int wins = 0;
        for (int t = 1; t <= config.test_budget; ++t) {
            const double p =
                std::clamp(strategy(t, wins, config.test_budget - t + 1), 0.0, 1.0);
            if (rng.coin(p)) {  // first run good: the simulator solved it
                ++died;
                break;
            }
            if (rng.coin(std::min(1.0, p + config.eps_win))) {
                if (++wins >= config.required_wins) {
                    ++won;
                    break;
                }
            }
        }
    }
    SeqExpResult res;
    res.trials = config.trials;
    res.win_rate = static_cast<double>(won) / static_cast<double>(config.trials);
    res.death_rate = static_cast<double>(died) / static_cast<double>(config.trials);
    res.bound = std::pow(2.0 / 3.0, config.required_wins);
    res.sigma = binomial_sigma(res.bound, config.trials);
    res.bound_holds = res.win_rate <= res.bound + 3.0 * res.sigma;
    return res;
}

double grid_search_constant(const ExperimentConfig& pilot) {
    double best_p = 0.01, best_rate = -1.0;
    for (int i = 1; i <= 99; ++i) {
        const double p = i / 100.0;
        ExperimentConfig c = pilot;
        c.seed = derive(pilot.seed, "grid", static_cast<std::uint64_t>(i));
        const auto r = sequential_experiment(c, const_strategy(p));
        if (r.win_rate > best_rate) {
            best_rate = r.win_rate;
            best_p = p;
        }
    }
    return best_p;
}

Schedule round_robin_schedule(int m, int k) {
    Schedule s;
    s.m = m;
    s.num_sessions = k;
    for (int round = 1; round <= m; ++round)
        for (int sid = 1; sid <= k; ++sid) s.slots.emplace_back(sid, round);
    return s;
}

Schedule nested_schedule(int m, int k) {
    Schedule s;
    s.m = m;
    s.num_sessions = k;
    for (int sid = 1; sid <= k; ++sid) s.slots.emplace_back(sid, 1);
    for (int sid = k; sid >= 1; --sid)
        for (int round = 2; round <= m; ++round) s.slots.emplace_back(sid, round);
    return s;
}

Schedule blocked_schedule(int m, int k) {
    Schedule s;
    s.m = m;
    s.num_sessions = k;
    for (int sid = 1; sid <= k; ++sid)
        for (int round = 1; round <= m; ++round) s.slots.emplace_back(sid, round);
    return s;
}

// Crafted family that hugs the split points: the per-row session order is
// rotated so consecutive rounds of a session land at varying offsets
// around the power-of-two interval boundaries.
Schedule straddle_schedule(int m, int k) {
    Schedule s;
    s.m = m;
    s.num_sessions = k;
    for (int round = 1; round <= m; ++round)
        for (int j = 0; j < k; ++j)
            s.slots.emplace_back(((j + (round - 1) * (k / 2 + 1)) % k) + 1, 0);
    std::vector<int> seen(static_cast<std::size_t>(k) + 1, 0);
    for (auto& [sid, round] : s.slots) round = ++seen[static_cast<std::size_t>(sid)];
    return s;
}

Schedule random_schedule(int m, int k, Stream& rng) {
    std::vector<int> bag;
    bag.reserve(static_cast<std::size_t>(m) * k);
    for (int sid = 1; sid <= k; ++sid)
        for (int i = 0; i < m; ++i) bag.push_back(sid);
    for (std::size_t i = bag.size(); i > 1; --i)
        std::swap(bag[i - 1], bag[rng.below(i)]);
    Schedule s;
    s.m = m;
    s.num_sessions = k;
    std::vector<int> seen(static_cast<std::size_t>(k) + 1, 0);
    for (int sid : bag) s.slots.emplace_back(sid, ++seen[static_cast<std::size_t>(sid)]);
    return s;
}

void for_each_schedule(int m, int k, const std::function<void(const Schedule&)>& fn) {
    std::vector<int> bag;
    for (int sid = 1; sid <= k; ++sid)
        for (int i = 0; i < m; ++i) bag.push_back(sid);
    std::sort(bag.begin(), bag.end());
    Schedule s;
    s.m = m;
    s.num_sessions = k;
    s.slots.resize(bag.size());
    std::vector<int> seen(static_cast<std::size_t>(k) + 1, 0);
    do {
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t i = 0; i < bag.size(); ++i)
            s.slots[i] = {bag[i], ++seen[static_cast<std::size_t>(bag[i])]};
        fn(s);
    } while (std::next_permutation(bag.begin(), bag.end()));
}

std::string SweepResult::to_csv() const {
    std::ostringstream out;
    out << "m,k,adversary,metric,value,stderr\n";
    for (const auto& c : cells) {
        const double se = binomial_sigma(std::max(c.rate, 1.0 / c.trials), c.trials);
        out << c.m << ',' << c.k << ',' << c.adversary << ",failure_rate," << c.rate << ','
            << se << '\n';
    }
    out << ",," << (cells.empty() ? "" : cells.front().adversary) << ",spearman_rho,"
        << spearman_rho << ",\n";
    out << ",," << (cells.empty() ? "" : cells.front().adversary) << ",p_value," << p_value
        << ",\n";
    return out.str();
}

SweepResult simulator_success_sweep(const std::vector<int>& m_values, int num_sessions,
                                    const std::string& adversary, int trials,
                                    std::uint64_t seed, SecurityConfig base_config) {
    SweepResult result;
    std::vector<double> xs, ys;  // block-level points for the trend test
    const int block = std::max(1, trials / 20);
    for (int m : m_values) {
        SecurityConfig config = base_config;
        config.m = m;
        config.num_sessions = num_sessions;
        const SessionSetup setup =
            SessionSetup::create(config, derive(seed, "sweep.setup", static_cast<std::uint64_t>(m)));
        auto setup_ptr = std::make_shared<const SessionSetup>(setup);
        auto graph_ptr = std::make_shared<const Graph>(Graph::triangle());
        SweepCell cell;
        cell.m = m;
        cell.k = num_sessions;
        cell.adversary = adversary;
        cell.trials = trials;
        int block_failures = 0;
        for (int t = 0; t < trials; ++t) {
            VerifierBlackBox box =
                make_adversary(adversary, setup_ptr, graph_ptr,
                               derive(seed, "sweep.tape", static_cast<std::uint64_t>(m),
                                      static_cast<std::uint64_t>(t)));
            const SimResult r = simulate(box, *setup_ptr, *graph_ptr,
                                         derive(seed, "sweep.sim", static_cast<std::uint64_t>(m),
                                                static_cast<std::uint64_t>(t)));
            if (r.failure) {
                ++cell.failures;
                ++block_failures;
            }
            if ((t + 1) % block == 0) {
                xs.push_back(static_cast<double>(m));
                ys.push_back(static_cast<double>(block_failures));
                block_failures = 0;
            }
        }
        cell.rate = static_cast<double>(cell.failures) / trials;
        result.cells.push_back(cell);
    }
    result.spearman_rho = spearman_rho(xs, ys);
    result.p_value = spearman_p_negative(xs, ys);
    return result;
}

double binomial_sigma(double p, long long n) {
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw parameter_error("spearman: need matched samples of size >= 3");
    return pearson(ranks(x), ranks(y));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double spearman_p_negative(const std::vector<double>& x, const std::vector<double>& y) {
    const double rho = spearman_rho(x, y);
    const double n = static_cast<double>(x.size());
    if (std::abs(rho) >= 1.0) return rho < 0 ? 0.0 : 1.0;
    const double t = rho * std::sqrt((n - 2.0) / (1.0 - rho * rho));
    // Normal approximation of the t statistic; the trend tests use well
    // over 100 points.
    return normal_cdf(t);
}

}  // namespace czk
