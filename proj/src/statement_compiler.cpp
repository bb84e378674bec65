#include "czk/statement_compiler.hpp"

#include <algorithm>
#include <sstream>

#include "czk/errors.hpp"

namespace czk {

int Circuit::check_wire(int w) const {
    if (w < 0 || w >= n_wires()) throw parameter_error("circuit: wire out of range");
    return w;
}

int Circuit::add_gate(GateOp op, int in1, int in2) {
    check_wire(in1);
    if (op != GateOp::Not) check_wire(in2);
    gates_.push_back(Gate{op, in1, in2});
    output_ = n_wires() - 1;
    return output_;
}

int Circuit::and_tree(const std::vector<int>& wires) {
    if (wires.empty()) throw parameter_error("circuit: empty and-tree");
    std::vector<int> level = wires;
    while (level.size() > 1) {
        std::vector<int> next;
        for (std::size_t i = 0; i + 1 < level.size(); i += 2)
            next.push_back(add_gate(GateOp::And, level[i], level[i + 1]));
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
    }
    output_ = level[0];
    return level[0];
}

int Circuit::or_tree(const std::vector<int>& wires) {
    if (wires.empty()) throw parameter_error("circuit: empty or-tree");
    std::vector<int> level = wires;
    while (level.size() > 1) {
        std::vector<int> next;
        for (std::size_t i = 0; i + 1 < level.size(); i += 2)
            next.push_back(add_gate(GateOp::Or, level[i], level[i + 1]));
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
    }
    output_ = level[0];
    return level[0];
}

int Circuit::constant_false() {
    const int neg = add_gate(GateOp::Not, 0);
    return add_gate(GateOp::And, 0, neg);
}

void Circuit::set_output(int wire) { output_ = check_wire(wire); }

std::vector<std::uint8_t> Circuit::eval_all(const std::vector<std::uint8_t>& inputs) const {
    if (static_cast<int>(inputs.size()) != n_inputs_)
        throw arity_error("circuit: wrong input count");
    std::vector<std::uint8_t> w(inputs);
    w.resize(static_cast<std::size_t>(n_wires()));
    for (std::size_t g = 0; g < gates_.size(); ++g) {
        const auto& gate = gates_[g];
        const std::uint8_t a = w[static_cast<std::size_t>(gate.in1)];
        const std::uint8_t b = w[static_cast<std::size_t>(gate.in2)];
        std::uint8_t out = 0;
        switch (gate.op) {
            case GateOp::And: out = a & b; break;
            case GateOp::Or: out = a | b; break;
            case GateOp::Xor: out = a ^ b; break;
            case GateOp::Not: out = a ^ 1u; break;
        }
        w[static_cast<std::size_t>(n_inputs_) + g] = out;
    }
    return w;
}

bool Circuit::eval(const std::vector<std::uint8_t>& inputs) const {
    if (output_ < 0) throw state_error("circuit: no output set");
    return eval_all(inputs)[static_cast<std::size_t>(output_)] != 0;
}

bool CnfFormula::satisfied_by(const std::vector<std::uint8_t>& assignment) const {
    for (const auto& clause : clauses) {
        bool sat = false;
        for (int lit : clause) {
            const int v = lit > 0 ? lit : -lit;
            const bool val = assignment[static_cast<std::size_t>(v)] != 0;
            if ((lit > 0) == val) { sat = true; break; }
        }
        if (!sat) return false;
    }
    return true;
}

CompoundLayout compound_layout(const CompoundStatement& st) {
    CompoundLayout lay;
    lay.n_vertices = st.base_graph.n;
    lay.m = st.m();
    lay.k = st.prover_params.k;
    return lay;
}

Circuit compile_graph_circuit(const Graph& g) {
    if (g.n < 1) throw parameter_error("compile: empty graph");
    Circuit c(g.n * 2);
    std::vector<int> checks;
    for (int v = 0; v < g.n; ++v) {
        const int lo = v * 2, hi = v * 2 + 1;
        const int both = c.add_gate(GateOp::And, hi, lo);
        checks.push_back(c.add_gate(GateOp::Not, both));  // color 3 forbidden
    }
    for (const auto& [u, v] : g.edges) {
        const int dlo = c.add_gate(GateOp::Xor, u * 2, v * 2);
        const int dhi = c.add_gate(GateOp::Xor, u * 2 + 1, v * 2 + 1);
        checks.push_back(c.add_gate(GateOp::Or, dlo, dhi));
    }
    c.and_tree(checks);
    return c;
}

namespace {

// Appends the coloring disjunct of the compound circuit into c, whose
// inputs follow CompoundLayout. Returns the disjunct's output wire.
int append_graph_checks(Circuit& c, const Graph& g) {
    std::vector<int> checks;
    for (int v = 0; v < g.n; ++v) {
        const int lo = v * 2, hi = v * 2 + 1;
        const int both = c.add_gate(GateOp::And, hi, lo);
        checks.push_back(c.add_gate(GateOp::Not, both));
    }
    for (const auto& [u, v] : g.edges) {
        const int dlo = c.add_gate(GateOp::Xor, u * 2, v * 2);
        const int dhi = c.add_gate(GateOp::Xor, u * 2 + 1, v * 2 + 1);
        checks.push_back(c.add_gate(GateOp::Or, dlo, dhi));
    }
    return c.and_tree(checks);
}

}  // namespace

Circuit compile_compound(const CompoundStatement& st) {
    const int m = st.m();
    if (m > 0 && st.prover_params.expander_tag != ExpanderTag::CircuitFriendly)
        throw unsupported_reduction_error(
            "compile_compound: equality branch requires the circuit-friendly expander");
    if (static_cast<int>(st.revealed_values.size()) != m)
        throw arity_error("compile_compound: revealed values do not match commitments");
    const CompoundLayout lay = compound_layout(st);
    const int k = lay.k;
    Circuit c(lay.n_inputs());

    std::vector<int> disjuncts;
    disjuncts.push_back(append_graph_checks(c, st.base_graph));

    const auto& pat = st.prover_params.pattern;
    for (int i = 1; i <= m; ++i) {
        const auto& commitment = st.commitments[static_cast<std::size_t>(i - 1)];
        const auto& v = st.revealed_values[static_cast<std::size_t>(i - 1)];
        std::vector<int> bit_checks;
        for (int j = 0; j < k; ++j) {
            // Opening bit j of p_i to the value v_{i,j} means
            // Expand(seed) == c_{i,j} xor (v_{i,j} * rho_j), a public 3k-bit target.
            std::vector<int> matches;
            for (int t = 0; t < 3 * k; ++t) {
                const auto& row = pat.rows[static_cast<std::size_t>(t)];
                const int sa = lay.seed_wire(i, j, row.a);
                const int sb = lay.seed_wire(i, j, row.b);
                const int sc = lay.seed_wire(i, j, row.c);
                const int prod = c.add_gate(GateOp::And, sb, sc);
                const int out = c.add_gate(GateOp::Xor, sa, prod);
                std::uint8_t target =
                    commitment.payload[static_cast<std::size_t>(j) * 3 * k + t];
                if (v[static_cast<std::size_t>(j)])
                    target ^= st.prover_params.rho_segment(j, t);
                // The negation gate is emitted unconditionally so the
                // circuit (and hence the reduced instance) has the same
                // shape for every payload; only the selected wire differs.
                const int neg = c.add_gate(GateOp::Not, out);
                matches.push_back(target ? out : neg);
            }
            bit_checks.push_back(c.and_tree(matches));
        }
        disjuncts.push_back(c.and_tree(bit_checks));
    }
    c.or_tree(disjuncts);
    return c;
}

CnfFormula tseitin(const Circuit& c) {
    if (c.output_wire() < 0) throw state_error("tseitin: circuit has no output");
    CnfFormula f;
    f.n_vars = c.n_wires();
    auto var = [](int wire) { return wire + 1; };
    for (int g = 0; g < c.gate_count(); ++g) {
        const Gate& gate = c.gates()[static_cast<std::size_t>(g)];
        const int z = var(c.n_inputs() + g);
        const int x = var(gate.in1);
        const int y = var(gate.in2);
        switch (gate.op) {
            case GateOp::And:
                f.clauses.push_back({-z, x});
                f.clauses.push_back({-z, y});
                f.clauses.push_back({z, -x, -y});
                break;
            case GateOp::Or:
                f.clauses.push_back({z, -x});
                f.clauses.push_back({z, -y});
                f.clauses.push_back({-z, x, y});
                break;
            case GateOp::Xor:
                f.clauses.push_back({-z, x, y});
                f.clauses.push_back({-z, -x, -y});
                f.clauses.push_back({z, -x, y});
                f.clauses.push_back({z, x, -y});
                break;
            case GateOp::Not:
                f.clauses.push_back({z, x});
                f.clauses.push_back({-z, -x});
                break;
        }
    }
    f.clauses.push_back({var(c.output_wire())});
    return f;
}

namespace {

// Splits clauses wider than 3 with fresh suffix-OR variables.
CnfFormula reduce_width(const CnfFormula& in) {
    CnfFormula out;
    out.n_vars = in.n_vars;
    out.split_vars = in.split_vars;
    for (const auto& clause : in.clauses) {
        if (clause.empty()) throw parameter_error("cnf: empty clause");
        if (clause.size() <= 3) {
            out.clauses.push_back(clause);
            continue;
        }
        std::vector<int> rest(clause.begin(), clause.end());
        std::vector<int> head = {rest[0], rest[1]};
        std::size_t pos = 2;
        while (rest.size() - pos > 1) {
            const int fresh = ++out.n_vars;
            CnfFormula::SplitVar sv;
            sv.var = fresh;
            sv.or_of.assign(rest.begin() + static_cast<std::ptrdiff_t>(pos), rest.end());
            out.split_vars.push_back(sv);
            head.push_back(fresh);
            out.clauses.push_back(head);
            head = {-fresh, rest[pos]};
            ++pos;
        }
        head.push_back(rest[pos]);
        out.clauses.push_back(head);
    }
    return out;
}

}  // namespace

ColoringInstance cnf_to_3col(const CnfFormula& raw) {
    const CnfFormula f = reduce_width(raw);
    ColoringInstance inst;
    Graph& g = inst.graph;
    g.n = 3;  // palette triangle first
    inst.palette_t = 0;
    inst.palette_f = 1;
    inst.palette_b = 2;
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);

    inst.var_vertices.reserve(static_cast<std::size_t>(f.n_vars));
    for (int x = 1; x <= f.n_vars; ++x) {
        const int pos = g.n++;
        const int neg = g.n++;
        inst.var_vertices.emplace_back(pos, neg);
        g.add_edge(pos, neg);
        g.add_edge(pos, inst.palette_b);
        g.add_edge(neg, inst.palette_b);
    }

    auto lit_vertex = [&](int lit) {
        const auto& [pos, neg] = inst.var_vertices[static_cast<std::size_t>(std::abs(lit) - 1)];
        return lit > 0 ? pos : neg;
    };

    for (const auto& clause : f.clauses) {
        ColoringInstance::ClauseGadget cg;
        cg.lits = clause;
        if (clause.size() == 1) {
            // Forced literal: tie it to both non-true palette colors.
            g.add_edge(lit_vertex(clause[0]), inst.palette_f);
            g.add_edge(lit_vertex(clause[0]), inst.palette_b);
        } else {
            auto make_or2 = [&](int u, int v) {
                ColoringInstance::Or2Gadget o;
                o.in1 = u;
                o.in2 = v;
                o.g1 = g.n++;
                o.g2 = g.n++;
                o.g3 = g.n++;
                g.add_edge(u, o.g1);
                g.add_edge(v, o.g2);
                g.add_edge(o.g1, o.g2);
                g.add_edge(o.g1, o.g3);
                g.add_edge(o.g2, o.g3);
                return o;
            };
            auto first = make_or2(lit_vertex(clause[0]), lit_vertex(clause[1]));
            cg.ors.push_back(first);
            int out = first.g3;
            if (clause.size() == 3) {
                auto second = make_or2(out, lit_vertex(clause[2]));
                cg.ors.push_back(second);
                out = second.g3;
            }
            g.add_edge(out, inst.palette_f);
            g.add_edge(out, inst.palette_b);
        }
        inst.clause_gadgets.push_back(std::move(cg));
    }
    g.normalize();
    return inst;
}

ColoringInstance circuit_to_3col(const Circuit& c) { return cnf_to_3col(tseitin(c)); }

Coloring lift_assignment(const ColoringInstance& inst, const CnfFormula& raw,
                         const std::vector<std::uint8_t>& assignment) {
    // Recover the width-reduced formula to learn split-variable values.
    const CnfFormula f = reduce_width(raw);
    std::vector<std::uint8_t> value(static_cast<std::size_t>(f.n_vars) + 1, 0);
    for (int x = 1; x <= raw.n_vars; ++x)
        value[static_cast<std::size_t>(x)] = assignment[static_cast<std::size_t>(x)];
    for (const auto& sv : f.split_vars) {
        std::uint8_t acc = 0;
        for (int lit : sv.or_of) {
            const int v = std::abs(lit);
            const bool val = value[static_cast<std::size_t>(v)] != 0;
            if ((lit > 0) == val) { acc = 1; break; }
        }
        value[static_cast<std::size_t>(sv.var)] = acc;
    }

    const int T = 0, F = 1, B = 2;
    Coloring col(static_cast<std::size_t>(inst.graph.n), -1);
    col[static_cast<std::size_t>(inst.palette_t)] = T;
    col[static_cast<std::size_t>(inst.palette_f)] = F;
    col[static_cast<std::size_t>(inst.palette_b)] = B;
    for (int x = 1; x <= f.n_vars; ++x) {
        const auto& [pos, neg] = inst.var_vertices[static_cast<std::size_t>(x - 1)];
        const bool val = value[static_cast<std::size_t>(x)] != 0;
        col[static_cast<std::size_t>(pos)] = val ? T : F;
        col[static_cast<std::size_t>(neg)] = val ? F : T;
    }
    for (const auto& cg : inst.clause_gadgets) {
        for (const auto& o : cg.ors) {
            const int cu = col[static_cast<std::size_t>(o.in1)];
            const int cv = col[static_cast<std::size_t>(o.in2)];
            if (cu == F && cv == F) {
                col[static_cast<std::size_t>(o.g1)] = T;
                col[static_cast<std::size_t>(o.g2)] = B;
                col[static_cast<std::size_t>(o.g3)] = F;
            } else {
                col[static_cast<std::size_t>(o.g1)] = (cu == F) ? B : F;
                col[static_cast<std::size_t>(o.g2)] =
                    (col[static_cast<std::size_t>(o.g1)] == F) ? B : F;
                col[static_cast<std::size_t>(o.g3)] = T;
            }
        }
    }
    if (!proper_coloring(inst.graph, col))
        throw mapping_error("lift_assignment: produced an improper coloring");
    return col;
}

Coloring map_witness(const CompoundWitness& w, const CompoundStatement& st,
                     const Circuit& circuit, const ColoringInstance& inst) {
    if (!validate_witness(st, w)) throw mapping_error("map_witness: invalid witness");
    const CompoundLayout lay = compound_layout(st);
    std::vector<std::uint8_t> inputs(static_cast<std::size_t>(lay.n_inputs()), 0);
    if (w.branch == CompoundWitness::Branch::Coloring) {
        for (int v = 0; v < lay.n_vertices; ++v) {
            const int color = w.coloring[static_cast<std::size_t>(v)];
            inputs[static_cast<std::size_t>(lay.color_wire(v, 0))] =
                static_cast<std::uint8_t>(color & 1);
            inputs[static_cast<std::size_t>(lay.color_wire(v, 1))] =
                static_cast<std::uint8_t>((color >> 1) & 1);
        }
    } else {
        const int i = w.equality_index;
        for (int j = 0; j < lay.k; ++j)
            for (int b = 0; b < lay.k; ++b)
                inputs[static_cast<std::size_t>(lay.seed_wire(i, j, b))] =
                    w.equality_seeds[static_cast<std::size_t>(j * lay.k + b)];
    }
    const auto wires = circuit.eval_all(inputs);
    if (!wires[static_cast<std::size_t>(circuit.output_wire())])
        throw mapping_error("map_witness: witness does not satisfy the circuit");
    const CnfFormula f = tseitin(circuit);
    std::vector<std::uint8_t> assignment(static_cast<std::size_t>(f.n_vars) + 1, 0);
    for (int wire = 0; wire < circuit.n_wires(); ++wire)
        assignment[static_cast<std::size_t>(wire) + 1] = wires[static_cast<std::size_t>(wire)];
    return lift_assignment(inst, f, assignment);
}

std::string ColoringInstance::to_dimacs() const {
    std::ostringstream out;
    out << "p edge " << graph.n << ' ' << graph.edges.size() << '\n';
    for (const auto& [u, v] : graph.edges) out << "e " << u + 1 << ' ' << v + 1 << '\n';
    return out.str();
}

std::string ColoringInstance::sidecar_json() const {
    std::ostringstream out;
    out << "{\"palette\":{\"t\":" << palette_t << ",\"f\":" << palette_f
        << ",\"b\":" << palette_b << "},\"variables\":[";
    for (std::size_t i = 0; i < var_vertices.size(); ++i) {
        if (i) out << ',';
        out << '[' << var_vertices[i].first << ',' << var_vertices[i].second << ']';
    }
    out << "]}";
    return out.str();
}

}  // namespace czk
