#include "czk/simulator.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace czk {

using nlohmann::json;

namespace {

struct PlanNode {
    int lo = 0, hi = 0, mid = 0;
    std::vector<PlanNode> children;  // [first half, second half] when size >= 2
    bool leaf() const { return lo == hi; }
};

PlanNode build_node(int lo, int hi) {
    PlanNode n;
    n.lo = lo;
    n.hi = hi;
    if (lo < hi) {
        n.mid = lo + (hi - lo + 1 + 1) / 2 - 1;  // first half takes the ceiling
        n.children.push_back(build_node(lo, n.mid));
        n.children.push_back(build_node(n.mid + 1, hi));
    } else {
        n.mid = lo;
    }
    return n;
}

void emit_node(const PlanNode& n, RewindPlan& plan);

void emit_sub(const PlanNode& child, RewindPlan& plan) {
    if (child.leaf()) {
        plan.trace.push_back(child.lo);
        return;
    }
    emit_node(child, plan);
    plan.rewinds.push_back(RewindInterval{child.lo, child.hi, child.mid});
    emit_node(child, plan);
}

void emit_node(const PlanNode& n, RewindPlan& plan) {
    if (n.leaf()) {
        plan.trace.push_back(n.lo);
        return;
    }
    for (const auto& c : n.children) emit_sub(c, plan);
}

void collect_intervals(const PlanNode& n, bool is_root, std::vector<RewindInterval>& out) {
    if (!is_root && !n.leaf()) out.push_back(RewindInterval{n.lo, n.hi, n.mid});
    for (const auto& c : n.children) collect_intervals(c, false, out);
}

}  // namespace

RewindPlan rewind_plan(int num_slots) {
    if (num_slots < 1) throw parameter_error("rewind_plan: need at least one slot");
    RewindPlan plan;
    plan.num_slots = num_slots;
    const PlanNode root = build_node(1, num_slots);
    emit_node(root, plan);
    collect_intervals(root, true, plan.intervals);
    return plan;
}

bool RewindPlan::is_plan_interval(const RewindInterval& iv) const {
    return std::any_of(intervals.begin(), intervals.end(),
                       [&](const RewindInterval& x) { return x == iv; });
}

namespace {

std::uint64_t budget_node(int n);

std::uint64_t budget_sub(int n) {
    if (n == 1) return 1;
    return 2 * budget_node(n);
}

std::uint64_t budget_node(int n) {
    if (n == 1) return 1;
    const int first = (n + 1) / 2;
    return budget_sub(first) + budget_sub(n - first);
}

}  // namespace

std::uint64_t round_budget(int num_slots) {
    if (num_slots < 1) throw parameter_error("round_budget: need at least one slot");
    return budget_node(num_slots);
}

std::string FailureReport::to_json() const {
    json j;
    j["session_id"] = session_id;
    j["slot"] = slot;
    j["completed_preambles"] = completed_preambles;
    j["solve_table_size"] = solve_table_size;
    return j.dump();
}

std::string InstrumentRecord::to_json() const {
    json j;
    j["slot"] = slot;
    j["execution_index"] = execution_index;
    j["run"] = run == 0 ? "top" : (run == 1 ? "first" : "second");
    j["interval"] = {interval.lo, interval.hi};
    return j.dump();
}

namespace {

struct SolveEntry {
    Bits value;
    int tag_slot = 0;  // slot of the session's first round when learned
};

class SolveTable {
public:
    void learn(int session, int index, const Bits& value, int tag_slot) {
        entries_[key(session, index)] = SolveEntry{value, tag_slot};
    }
    const SolveEntry* find(int session, int index) const {
        auto it = entries_.find(key(session, index));
        return it == entries_.end() ? nullptr : &it->second;
    }
    // A rewind to `slot` erases the first round of every session whose
    // commitment vector lived at or after it; their values may change.
    void invalidate_from(int slot) {
        for (auto it = entries_.begin(); it != entries_.end();)
            it = it->second.tag_slot >= slot ? entries_.erase(it) : std::next(it);
    }
    int size() const { return static_cast<int>(entries_.size()); }

private:
    static std::uint64_t key(int session, int index) {
        return (static_cast<std::uint64_t>(session) << 32) | static_cast<std::uint32_t>(index);
    }
    std::map<std::uint64_t, SolveEntry> entries_;
};

struct FailureSignal {
    FailureReport report;
};

class Engine;

class SimulatorPolicy : public ProverPolicy {
public:
    explicit SimulatorPolicy(Engine& engine) : engine_(engine) {}
    PChoice choose_p(const PreambleSession& s, int round, Stream& rng) override;
    void on_reveal(const PreambleSession& s, int index, const Bits& value) override;
    std::optional<CompoundWitness> body_witness(const PreambleSession& s,
                                                const CompoundStatement& st) override;

private:
    Engine& engine_;
};

// Checkpointable interaction state. The history itself is append-only and
// restored by truncation, so checkpoints carry only its length.
struct LiveState {
    VerifierBlackBox box;
    std::map<int, PreambleSession> sessions;
    std::map<int, int> first_round_slot;
    int slots_used = 0;
    bool halted = false;
};

struct Checkpoint {
    LiveState live;
    std::size_t history_len = 0;
};

class Engine {
public:
    Engine(const VerifierBlackBox& box, const SessionSetup& setup, const Graph& base,
           std::uint64_t seed, const SimOptions& opts)
        : setup_(setup), base_(base), opts_(opts), policy_(*this),
          rng_(derive(seed, "simulator.prover")) {
        state_.box = box;
    }

    SimResult run();

    // Policy callbacks.
    const SolveEntry* usable_entry(int session, int round) const {
        return table_.find(session, round);
    }
    void learn(int session, int index, const Bits& value) {
        auto it = state_.first_round_slot.find(session);
        if (it == state_.first_round_slot.end()) return;
        table_.learn(session, index, value, it->second);
        if (index == setup_.config.m) {
            auto& done = stats_.preamble_completions[session];
            ++done;
            stats_.max_preamble_completions =
                std::max(stats_.max_preamble_completions, done);
        }
    }
    Stream& rng() { return rng_; }
    const SessionSetup& setup() const { return setup_; }
    SimStats& stats() { return stats_; }

private:
    enum class SlotResult { Done, NoMoreSlots };

    void exec_node(const PlanNode& n);
    void exec_sub(const PlanNode& child);
    SlotResult run_slot();
    void drain_inline();
    bool process_one_action();  // false when the box halted
    Checkpoint save() const;
    void rewind_to(const Checkpoint& chk, int target_slot);
    void replay_box(std::size_t upto);
    void record_slot_instrument(int slot);
    void begin_interval_run(const RewindInterval& iv, int run);
    void finish_interval_run(const RewindInterval& iv, int run);
    void emit_observations(const RewindInterval& iv);

    const SessionSetup& setup_;
    const Graph& base_;
    SimOptions opts_;
    SimulatorPolicy policy_;
    Stream rng_;

    LiveState state_;
    std::vector<TranscriptRecord> history_;
    std::vector<std::uint8_t> surviving_tag_;  // parallel to history_

    SolveTable table_;
    SimStats stats_;
    std::vector<InstrumentRecord> trace_;
    std::vector<IntervalObservation> observations_;
    std::vector<int> run_stack_;  // 1 = first run, 2 = second run
    std::uint64_t exec_index_ = 0;

    // Per-interval-run observation scratch: (session -> slot rounds seen).
    struct RunScratch {
        RewindInterval interval;
        int run = 0;
        std::map<int, std::vector<std::pair<int, int>>> rounds;  // sid -> (slot, round)
        std::map<int, bool> reveal_ok;  // sid -> validity of latest in-interval reveal
    };
    std::vector<RunScratch> scratch_stack_;
    struct RunSummary {
        bool interesting = false;
        bool revealed = false;
    };
    std::map<std::uint64_t, RunSummary> first_run_summary_;  // keyed by (interval, session)

    static std::uint64_t summary_key(const RewindInterval& iv, int sid) {
        return (static_cast<std::uint64_t>(iv.lo) << 48) |
               (static_cast<std::uint64_t>(iv.hi) << 32) | static_cast<std::uint32_t>(sid);
    }

    friend class SimulatorPolicy;
};

ProverPolicy::PChoice SimulatorPolicy::choose_p(const PreambleSession& s, int round, Stream&) {
    const SolveEntry* e = engine_.usable_entry(s.session_id, round);
    if (e) return {e->value, true};
    return {};
}

void SimulatorPolicy::on_reveal(const PreambleSession& s, int index, const Bits& value) {
    engine_.learn(s.session_id, index, value);
}

std::optional<CompoundWitness> SimulatorPolicy::body_witness(const PreambleSession& s,
                                                             const CompoundStatement& st) {
    // Any round with p_i = v_i carries a witness; prefer the marked one.
    std::vector<int> candidates;
    if (s.solved_index) candidates.push_back(*s.solved_index);
    for (int i = 1; i <= st.m(); ++i)
        if (s.revealed_v[static_cast<std::size_t>(i - 1)] ==
            s.p_values[static_cast<std::size_t>(i - 1)])
            candidates.push_back(i);
    for (int i : candidates) {
        CompoundWitness w = CompoundWitness::from_equality(
            i, s.p_openings[static_cast<std::size_t>(i - 1)].randomness);
        if (validate_witness(st, w)) return w;
    }
    return std::nullopt;
}

Checkpoint Engine::save() const {
    Checkpoint chk;
    chk.live = state_;
    chk.history_len = history_.size();
    return chk;
}

void Engine::replay_box(std::size_t upto) {
    // Reference path: reconstruct the black box from its tape by feeding
    // it the retained history; it must reproduce every recorded message.
    VerifierBlackBox fresh(state_.box.spec(),
                           std::shared_ptr<const SessionSetup>(&setup_, [](auto*) {}),
                           std::shared_ptr<const Graph>(&base_, [](auto*) {}),
                           state_.box.tape_seed());
    for (std::size_t i = 0; i < upto; ++i) {
        const auto& r = history_[i];
        if (r.direction == Direction::VerifierToProver) {
            BlackBoxAction act = fresh.step();
            if (act.type != BlackBoxAction::Type::Message ||
                act.msg.digest() != r.msg.digest())
                throw state_error("replay: black box diverged from its recorded run");
        } else {
            fresh.deliver(r.msg);
        }
    }
    state_.box = std::move(fresh);
}

void Engine::rewind_to(const Checkpoint& chk, int target_slot) {
    if (opts_.use_replay_path) {
        LiveState restored = chk.live;
        restored.box = state_.box;  // replaced below
        state_ = std::move(restored);
        history_.resize(chk.history_len);
        surviving_tag_.resize(chk.history_len);
        replay_box(chk.history_len);
    } else {
        state_ = chk.live;
        history_.resize(chk.history_len);
        surviving_tag_.resize(chk.history_len);
    }
    table_.invalidate_from(target_slot);
}

void Engine::record_slot_instrument(int slot) {
    ++stats_.slot_executions;
    ++exec_index_;
    if (opts_.collect_trace) {
        InstrumentRecord rec;
        rec.slot = slot;
        rec.execution_index = exec_index_;
        rec.run = run_stack_.empty() ? 0 : run_stack_.back();
        rec.interval = scratch_stack_.empty()
                           ? RewindInterval{slot, slot, slot}
                           : scratch_stack_.back().interval;
        trace_.push_back(rec);
    }
}

bool Engine::process_one_action() {
    BlackBoxAction act = state_.box.step();
    if (act.type == BlackBoxAction::Type::Halt) {
        state_.halted = true;
        return false;
    }
    if (act.type == BlackBoxAction::Type::Wait)
        throw protocol_order_error("simulator: adversary waits with nothing pending");

    const ProtocolMessage msg = act.msg;
    const int sid = msg.session_id;
    auto [it, fresh] = state_.sessions.try_emplace(sid);
    if (fresh) it->second.session_id = sid;

    const bool is_slot =
        msg.kind == MsgKind::VCommit ||
        (msg.kind == MsgKind::VReveal && msg.round_index < setup_.config.m);

    history_.push_back(TranscriptRecord{static_cast<std::uint64_t>(history_.size()),
                                        Direction::VerifierToProver, msg});
    const bool surviving =
        std::all_of(run_stack_.begin(), run_stack_.end(), [](int r) { return r == 2; });
    surviving_tag_.push_back(surviving ? 1 : 0);

    int slot_round = 0;
    if (is_slot) {
        ++state_.slots_used;
        record_slot_instrument(state_.slots_used);
        if (msg.kind == MsgKind::VCommit) {
            state_.first_round_slot[sid] = state_.slots_used;
            slot_round = 1;
        } else {
            slot_round = msg.round_index + 1;
        }
        for (auto& sc : scratch_stack_)
            sc.rounds[sid].emplace_back(state_.slots_used, slot_round);
    }

    auto res = prover_process(it->second, setup_, base_, msg, policy_, rng_);

    if (msg.kind == MsgKind::VReveal) {
        const bool ok = it->second.phase != Phase::Aborted;
        for (auto& sc : scratch_stack_) sc.reveal_ok[sid] = ok;
    }

    if (res.entered_body_unsolved) {
        FailureReport rep;
        rep.session_id = sid;
        rep.slot = state_.slots_used;
        for (const auto& [s2, c] : stats_.preamble_completions) rep.completed_preambles += c;
        rep.solve_table_size = table_.size();
        throw FailureSignal{rep};
    }
    if (res.response) {
        history_.push_back(TranscriptRecord{static_cast<std::uint64_t>(history_.size()),
                                            Direction::ProverToVerifier, *res.response});
        surviving_tag_.push_back(surviving ? 1 : 0);
        state_.box.deliver(*res.response);
    }
    return !is_slot;  // keep polling until a slot message lands
}

Engine::SlotResult Engine::run_slot() {
    if (state_.halted) return SlotResult::NoMoreSlots;
    while (true) {
        if (!process_one_action())
            return state_.halted ? SlotResult::NoMoreSlots : SlotResult::Done;
    }
}

void Engine::drain_inline() {
    while (!state_.halted) process_one_action();
}

void Engine::begin_interval_run(const RewindInterval& iv, int run) {
    run_stack_.push_back(run);
    RunScratch sc;
    sc.interval = iv;
    sc.run = run;
    scratch_stack_.push_back(std::move(sc));
}

void Engine::finish_interval_run(const RewindInterval& iv, int run) {
    RunScratch sc = std::move(scratch_stack_.back());
    scratch_stack_.pop_back();
    run_stack_.pop_back();
    if (!opts_.collect_observations) return;

    const int m = setup_.config.m;
    auto summarize = [&](int sid) {
        // Interesting: exactly two in-interval rounds, neither the first
        // nor the last round of the preamble, split across the halves.
        RunSummary out;
        auto it = sc.rounds.find(sid);
        if (it != sc.rounds.end() && it->second.size() == 2) {
            const auto& [slot_a, round_a] = it->second[0];
            const auto& [slot_b, round_b] = it->second[1];
            out.interesting = round_a >= 2 && round_b <= m - 1 && round_b == round_a + 1 &&
                              slot_a <= iv.mid && slot_b > iv.mid;
        }
        if (out.interesting) {
            auto rit = sc.reveal_ok.find(sid);
            out.revealed = rit != sc.reveal_ok.end() && rit->second;
        }
        return out;
    };

    if (run == 1) {
        for (const auto& [sid, rounds] : sc.rounds)
            first_run_summary_[summary_key(iv, sid)] = summarize(sid);
        return;
    }

    // Consume the pending first-run summaries together with whatever the
    // second run realized; the adversary may have rescheduled entirely.
    std::vector<int> sids;
    for (const auto& [sid, rounds] : sc.rounds) sids.push_back(sid);
    for (const auto& [key, summary] : first_run_summary_) {
        if ((key >> 48) == static_cast<std::uint64_t>(iv.lo) &&
            ((key >> 32) & 0xFFFF) == static_cast<std::uint64_t>(iv.hi)) {
            const int sid = static_cast<int>(key & 0xFFFFFFFF);
            if (!sc.rounds.count(sid)) sids.push_back(sid);
        }
    }
    for (int sid : sids) {
        const std::uint64_t key = summary_key(iv, sid);
        RunSummary first;
        if (auto it = first_run_summary_.find(key); it != first_run_summary_.end()) {
            first = it->second;
            first_run_summary_.erase(it);
        }
        const RunSummary second = summarize(sid);
        if (!first.interesting && !second.interesting) continue;
        IntervalObservation obs;
        obs.interval = iv;
        obs.session_id = sid;
        obs.first_interesting = first.interesting;
        obs.first_revealed = first.revealed;
        obs.second_interesting = second.interesting;
        obs.second_revealed = second.revealed;
        const auto sit = state_.sessions.find(sid);
        obs.solved_after = sit != state_.sessions.end() &&
                           (sit->second.solved_index.has_value() ||
                            sit->second.phase == Phase::Aborted);
        observations_.push_back(obs);
    }
}

void Engine::exec_sub(const PlanNode& child) {
    if (child.leaf()) {
        run_slot();
        return;
    }
    const RewindInterval iv{child.lo, child.hi, child.mid};
    Checkpoint chk = save();
    begin_interval_run(iv, 1);
    exec_node(child);
    finish_interval_run(iv, 1);
    rewind_to(chk, child.lo);
    begin_interval_run(iv, 2);
    exec_node(child);
    finish_interval_run(iv, 2);
}

void Engine::exec_node(const PlanNode& n) {
    if (n.leaf()) {
        run_slot();
        return;
    }
    for (const auto& c : n.children) exec_sub(c);
}

SimResult Engine::run() {
    SimResult result;
    const int num_slots = setup_.config.m * setup_.config.num_sessions;
    const PlanNode root = build_node(1, num_slots);
    try {
        exec_node(root);
        drain_inline();
    } catch (const FailureSignal& f) {
        result.failure = f.report;
        stats_.realized_slots = state_.slots_used;
        result.stats = stats_;
        result.trace = std::move(trace_);
        result.observations = std::move(observations_);
        return result;
    }

    for (std::size_t i = 0; i < history_.size(); ++i)
        if (!surviving_tag_[i])
            throw state_error("simulator: a non-surviving record leaked into the output");

    Transcript t;
    t.config = setup_.config;
    t.tape_seed = state_.box.tape_seed();
    t.records = std::move(history_);
    for (auto& [sid, s] : state_.sessions) {
        SessionOutcome o = SessionOutcome::Unfinished;
        if (s.phase == Phase::Aborted) {
            o = SessionOutcome::Aborted;
            ++stats_.sessions_aborted;
        } else if (s.phase == Phase::Done) {
            o = s.verdict.value_or(false) ? SessionOutcome::Accepted : SessionOutcome::Rejected;
            if (o == SessionOutcome::Accepted) ++stats_.sessions_accepted;
        }
        if (s.solved_index) ++stats_.sessions_solved;
        t.outcomes[sid] = o;
    }
    stats_.realized_slots = state_.slots_used;
    result.transcript = std::move(t);
    result.stats = stats_;
    result.trace = std::move(trace_);
    result.observations = std::move(observations_);
    return result;
}

}  // namespace

SimResult simulate(const VerifierBlackBox& blackbox, const SessionSetup& setup,
                   const Graph& base_graph, std::uint64_t seed, const SimOptions& opts) {
    Engine engine(blackbox, setup, base_graph, seed, opts);
    return engine.run();
}

}  // namespace czk
