#include <doctest.h>

#include <set>
#include "czk/preamble.hpp"
#include "czk/statement_compiler.hpp"
#include "oracles.hpp"

using namespace czk;

TEST_SUITE_BEGIN("statement_compiler");

namespace {

// A compound statement with honestly committed p values; returns the
// statement together with the seeds of round `solved` forced to v.
CompoundStatement sample_statement(const Graph& base, int m, int k, std::uint64_t seed,
                                   int solved_round, Bits* solved_seeds) {
    SecurityConfig config;
    config.k = k;
    config.m = m;
    config.num_sessions = 1;
    config.expander = ExpanderTag::CircuitFriendly;
    const SessionSetup setup = SessionSetup::create(config, seed);
    CompoundStatement st;
    st.base_graph = base;
    st.prover_params = setup.binding;
    Stream rng(derive(seed, "values"));
    for (int i = 1; i <= m; ++i) {
        const Bits v = Bits::random(static_cast<std::size_t>(k), rng);
        const Bits p = (i == solved_round) ? v : Bits::random(static_cast<std::size_t>(k), rng);
        auto [c, o] = commit(setup.binding, p, rng);
        st.commitments.push_back(c);
        st.revealed_values.push_back(v);
        if (i == solved_round && solved_seeds) *solved_seeds = o.randomness;
    }
    return st;
}

}  // namespace

TEST_CASE("compound gate count matches the construction arithmetic") {
    Bits seeds;
    const auto st = sample_statement(Graph::triangle(), 1, 4, 77, 1, &seeds);
    const Circuit c = compile_compound(st);
    // Coloring disjunct: per vertex 2 gates, per edge 3, plus the and-tree.
    const int cg = 3 * 2 + 3 * 3 + (6 - 1);
    // Equality disjunct: per message bit, 3k expander pairs, 3k negation
    // gates, and a 3k-leaf and-tree; then the k-leaf and-tree.
    const int k = 4;
    const int per_bit = 3 * k * 2 + 3 * k + (3 * k - 1);
    const int open = k * per_bit + (k - 1);
    const int total = cg + open + 1;  // final or-tree
    CHECK(c.gate_count() == total);
    CHECK(c.gate_count() == 212);  // frozen from the arithmetic above
    CHECK(c.n_inputs() == 3 * 2 + 1 * 4 * 4);
}

TEST_CASE("degenerate compound with m=0 is the coloring circuit alone") {
    SecurityConfig config;
    config.k = 4;
    config.m = 1;
    config.num_sessions = 1;
    const SessionSetup setup = SessionSetup::create(config, 3);
    CompoundStatement st;
    st.base_graph = Graph::triangle();
    st.prover_params = setup.binding;  // no commitments, no revealed values
    const Circuit c = compile_compound(st);
    const Circuit plain = compile_graph_circuit(Graph::triangle());
    CHECK(c.gate_count() == plain.gate_count());
    CHECK(c.n_inputs() == plain.n_inputs());
}

TEST_CASE("a proper coloring satisfies the compound circuit with zeroed seeds") {
    const auto st = sample_statement(Graph::triangle(), 1, 4, 9, 0, nullptr);
    const Circuit c = compile_compound(st);
    const CompoundLayout lay = compound_layout(st);
    std::vector<std::uint8_t> in(static_cast<std::size_t>(lay.n_inputs()), 0);
    const Coloring col = triangle_coloring();
    for (int v = 0; v < 3; ++v) {
        in[static_cast<std::size_t>(lay.color_wire(v, 0))] =
            static_cast<std::uint8_t>(col[static_cast<std::size_t>(v)] & 1);
        in[static_cast<std::size_t>(lay.color_wire(v, 1))] =
            static_cast<std::uint8_t>((col[static_cast<std::size_t>(v)] >> 1) & 1);
    }
    CHECK(c.eval(in));
    std::vector<std::uint8_t> zero(static_cast<std::size_t>(lay.n_inputs()), 0);
    CHECK_FALSE(c.eval(zero));
}

TEST_CASE("mixer-expander statements refuse to compile") {
    SecurityConfig config;
    config.k = 4;
    config.m = 1;
    config.num_sessions = 1;
    const SessionSetup setup = SessionSetup::create(config, 3);
    CompoundStatement st;
    st.base_graph = Graph::triangle();
    st.prover_params = setup.binding;  // mixer by default
    Stream rng(5);
    auto [c, o] = commit(setup.binding, Bits::random(4, rng), rng);
    st.commitments.push_back(c);
    st.revealed_values.push_back(Bits::random(4, rng));
    CHECK_THROWS_AS(compile_compound(st), unsupported_reduction_error);
}

TEST_CASE("single positive unit clause forces the variable true") {
    CnfFormula f;
    f.n_vars = 1;
    f.clauses = {{1}};
    const ColoringInstance inst = cnf_to_3col(f);
    CHECK(inst.graph.n == 5);  // palette + the two variable vertices
    CHECK(test::three_colorable(inst.graph));
    std::vector<std::uint8_t> assignment = {0, 1};
    const Coloring col = lift_assignment(inst, f, assignment);
    CHECK(proper_coloring(inst.graph, col));
}

TEST_CASE("three-literal clause instance has the textbook size and is colorable") {
    CnfFormula f;
    f.n_vars = 3;
    f.clauses = {{1, 2, 3}};
    const ColoringInstance inst = cnf_to_3col(f);
    CHECK(inst.graph.n == 15);
    CHECK(inst.graph.edges.size() == 24);
    CHECK(test::three_colorable(inst.graph));
}

TEST_CASE("x and not-x is not 3-colorable") {
    CnfFormula f;
    f.n_vars = 1;
    f.clauses = {{1}, {-1}};
    const ColoringInstance inst = cnf_to_3col(f);
    CHECK(inst.graph.n <= 9);
    CHECK_FALSE(test::three_colorable(inst.graph));
}

TEST_CASE("clauses wider than three split with suffix variables") {
    CnfFormula f;
    f.n_vars = 5;
    f.clauses = {{1, 2, 3, 4, 5}};
    const ColoringInstance inst = cnf_to_3col(f);
    CHECK(test::three_colorable(inst.graph));
    // All-false is the only unsatisfying assignment; check lift on a
    // satisfying one.
    std::vector<std::uint8_t> assignment = {0, 0, 0, 0, 1, 0};
    const Coloring col = lift_assignment(inst, f, assignment);
    CHECK(proper_coloring(inst.graph, col));
}

TEST_CASE("identical statements compile to identical instances") {
    Bits seeds;
    const auto st1 = sample_statement(Graph::triangle(), 2, 4, 11, 2, &seeds);
    const auto st2 = sample_statement(Graph::triangle(), 2, 4, 11, 2, nullptr);
    const auto i1 = circuit_to_3col(compile_compound(st1));
    const auto i2 = circuit_to_3col(compile_compound(st2));
    CHECK(i1.to_dimacs() == i2.to_dimacs());
    CHECK(i1.sidecar_json() == i2.sidecar_json());
}

TEST_CASE("instance shape is payload-independent") {
    const auto st1 = sample_statement(Graph::triangle(), 2, 4, 123, 1, nullptr);
    const auto st2 = sample_statement(Graph::triangle(), 2, 4, 456, 2, nullptr);
    const auto i1 = circuit_to_3col(compile_compound(st1));
    const auto i2 = circuit_to_3col(compile_compound(st2));
    CHECK(i1.graph.n == i2.graph.n);
    CHECK(i1.graph.edges.size() == i2.graph.edges.size());
}

TEST_CASE("map_witness lifts both branches to proper colorings") {
    Bits seeds;
    const auto st = sample_statement(Graph::triangle(), 2, 4, 31, 2, &seeds);
    const Circuit c = compile_compound(st);
    const ColoringInstance inst = circuit_to_3col(c);

    const auto equality = CompoundWitness::from_equality(2, seeds);
    REQUIRE(validate_witness(st, equality));
    CHECK(proper_coloring(inst.graph, map_witness(equality, st, c, inst)));

    const auto coloring = CompoundWitness::from_coloring(triangle_coloring());
    REQUIRE(validate_witness(st, coloring));
    CHECK(proper_coloring(inst.graph, map_witness(coloring, st, c, inst)));

    auto tampered = equality;
    tampered.equality_seeds[0] ^= 1;
    CHECK_THROWS_AS(map_witness(tampered, st, c, inst), mapping_error);
}

TEST_CASE("dimacs export shape") {
    CnfFormula f;
    f.n_vars = 1;
    f.clauses = {{1}};
    const ColoringInstance inst = cnf_to_3col(f);
    const std::string d = inst.to_dimacs();
    CHECK(d.rfind("p edge 5 7", 0) == 0);
    CHECK(inst.sidecar_json().find("\"palette\"") != std::string::npos);
}

TEST_CASE("reduction oracle: satisfiability transfers to 3-colorability") {
    // Corpus of circuits with at most 12 inputs. Expected satisfiability
    // comes from exhaustive input enumeration only.
    std::vector<Circuit> corpus;

    corpus.push_back(compile_graph_circuit(Graph::triangle()));   // sat
    corpus.push_back(compile_graph_circuit(Graph::k4()));         // unsat
    corpus.push_back(compile_graph_circuit(Graph::cycle(5)));     // sat
    {
        Graph edge;
        edge.n = 2;
        edge.add_edge(0, 1);
        edge.normalize();
        corpus.push_back(compile_graph_circuit(edge));            // sat
    }
    {
        Circuit c(2);  // x and not x
        const int nx = c.add_gate(GateOp::Not, 0);
        c.add_gate(GateOp::And, 0, nx);
        corpus.push_back(c);                                      // unsat
    }
    {
        Circuit c(2);  // (x xor y) and not(x xor y)
        const int x1 = c.add_gate(GateOp::Xor, 0, 1);
        const int nx = c.add_gate(GateOp::Not, x1);
        c.add_gate(GateOp::And, x1, nx);
        corpus.push_back(c);                                      // unsat
    }
    {
        Circuit c(12);  // xor chain over 12 inputs
        int acc = 0;
        for (int i = 1; i < 12; ++i) acc = c.add_gate(GateOp::Xor, acc, i);
        c.set_output(acc);
        corpus.push_back(c);                                      // sat
    }
    {
        Circuit c(8);  // and tree
        std::vector<int> wires;
        for (int i = 0; i < 8; ++i) wires.push_back(i);
        c.and_tree(wires);
        corpus.push_back(c);                                      // sat
    }
    {
        // Single-bit opening relation: Expand(seed) equals a target that
        // is in the image (sat), then a target that is not (unsat).
        const auto pattern = ExpanderPattern::generate(4);
        std::set<std::uint64_t> image;
        for (std::uint64_t s = 0; s < 16; ++s)
            image.insert(expand_circuit(pattern, Bits::from_u64(s, 4)).to_u64());
        const std::uint64_t hit = *image.begin();
        std::uint64_t miss = 0;
        while (image.count(miss)) ++miss;
        for (std::uint64_t target : {hit, miss}) {
            Circuit c(4);
            std::vector<int> matches;
            for (int t = 0; t < 12; ++t) {
                const auto& row = pattern.rows[static_cast<std::size_t>(t)];
                const int prod = c.add_gate(GateOp::And, row.b, row.c);
                const int out = c.add_gate(GateOp::Xor, row.a, prod);
                const int neg = c.add_gate(GateOp::Not, out);
                matches.push_back(((target >> t) & 1) ? out : neg);
            }
            c.and_tree(matches);
            corpus.push_back(c);
        }
    }

    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CAPTURE(i);
        const auto witness = test::exhaustive_sat(corpus[i]);
        const ColoringInstance inst = circuit_to_3col(corpus[i]);
        CHECK(test::three_colorable(inst.graph) == witness.has_value());
        if (witness) {
            // Lift the satisfying assignment through the full pipeline.
            const auto wires = corpus[i].eval_all(*witness);
            const CnfFormula f = tseitin(corpus[i]);
            std::vector<std::uint8_t> assignment(static_cast<std::size_t>(f.n_vars) + 1, 0);
            for (int w = 0; w < corpus[i].n_wires(); ++w)
                assignment[static_cast<std::size_t>(w) + 1] =
                    wires[static_cast<std::size_t>(w)];
            CHECK(proper_coloring(inst.graph, lift_assignment(inst, f, assignment)));
        }
    }
}

TEST_SUITE_END();
