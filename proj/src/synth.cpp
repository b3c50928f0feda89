// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/synth.hpp"
#include <algorithm>
#include <set>
#include <unordered_map>

namespace wsopt
{
namespace
{
using clock_type = std::chrono::steady_clock;

uint64_t mask_for(unsigned width) noexcept
{
    return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

constexpr op_tag binary_ops[] = {op_tag::add, op_tag::sub, op_tag::mul, op_tag::and_,
    op_tag::or_, op_tag::xor_, op_tag::shl, op_tag::shr_s, op_tag::shr_u, op_tag::rotl,
    op_tag::rotr, op_tag::eq, op_tag::ne, op_tag::lt_s, op_tag::lt_u, op_tag::gt_s,
    op_tag::gt_u, op_tag::le_s, op_tag::le_u, op_tag::ge_s, op_tag::ge_u};

struct search_exhausted
{};

/// Bottom-up enumerator over the RHS grammar. Programs are trees whose lowered
/// cost equals their node count.
class enumerator
{
public:
    struct entry
    {
        enum class kind : uint8_t
        {
            param,
            constant,
            op,
        };
        kind k = kind::op;
        op_tag op = op_tag::none;
        uint8_t width = 32;
        uint16_t size = 1;
        uint32_t param = 0;
        uint64_t value = 0;
        uint32_t a = 0;
        uint32_t b = 0;
        uint32_t c = 0;
    };

    /// `vectors` empty means exhaustive mode: no signatures, no pruning.
    enumerator(const DfGraph& lhs, std::vector<TestVector> vectors, bool prune)
      : m_lhs{lhs}, m_widths{input_widths(lhs)}, m_vectors{std::move(vectors)}, m_prune{prune}
    {
        m_goal_width = lhs.node(lhs.result()).width;
        m_use64 = false;
        for (const auto& n : lhs.nodes)
            if (n.width == 64)
                m_use64 = true;
        for (const unsigned w : {32u, 64u})
            if (w == 32 || m_use64)
                m_pool[w] = constant_pool(lhs, w);
    }

    void set_limits(uint64_t budget, clock_type::time_point deadline)
    {
        m_budget = budget;
        m_deadline = deadline;
    }

    uint64_t work() const noexcept { return m_work; }

    const std::vector<TestVector>& vectors() const noexcept { return m_vectors; }

    void add_vector(TestVector tv)
    {
        m_vectors.push_back(std::move(tv));
        reset();
    }

    void reset()
    {
        m_entries.clear();
        m_sigs.clear();
        m_levels.clear();
        m_seen.clear();
        m_matches.clear();
        m_goal = goal_signature();
    }

    /// Builds level `size`; returns goal matches at that size (pruned mode) in
    /// tie-break order.
    std::vector<uint32_t> build_level(unsigned size)
    {
        if (m_levels.size() <= size)
            m_levels.resize(size + 1);
        m_matches.clear();
        if (size == 1)
            build_leaves();
        else
        {
            build_unops(size);
            build_binops(size);
            build_selects(size);
        }
        auto matches = std::move(m_matches);
        std::sort(matches.begin(), matches.end(),
            [&](uint32_t x, uint32_t y) { return order_key(x) < order_key(y); });
        return matches;
    }

    /// All entries of the level with the given width (exhaustive mode).
    std::vector<uint32_t> level_entries(unsigned size, unsigned width) const
    {
        std::vector<uint32_t> out;
        if (size < m_levels.size())
            for (const auto id : m_levels[size])
                if (m_entries[id].width == width)
                    out.push_back(id);
        return out;
    }

    DfGraph to_graph(uint32_t id) const
    {
        DfGraph g = make_expression_graph(m_widths);
        const auto root = emit(g, id);
        g.outputs.push_back({{Sink::kind::stack, 0}, root});
        return g;
    }

    unsigned goal_width() const noexcept { return m_goal_width; }

private:
    NodeId emit(DfGraph& g, uint32_t id) const
    {
        const auto& e = m_entries[id];
        switch (e.k)
        {
        case entry::kind::param:
            return e.param;
        case entry::kind::constant:
            return g.add_const(e.width, e.value);
        case entry::kind::op:
            break;
        }
        std::vector<NodeId> ops;
        ops.push_back(emit(g, e.a));
        if (e.op == op_tag::select)
        {
            ops.push_back(emit(g, e.b));
            ops.push_back(emit(g, e.c));
        }
        else if (!is_unary(e.op))
            ops.push_back(emit(g, e.b));
        return g.add_op(e.op, std::move(ops), e.width);
    }

    static bool is_unary(op_tag op) noexcept
    {
        return op == op_tag::eqz || op == op_tag::extend_s || op == op_tag::extend_u ||
               op == op_tag::wrap;
    }

    using key_type = std::vector<std::pair<uint32_t, uint64_t>>;

    void key_of(uint32_t id, key_type& out) const
    {
        const auto& e = m_entries[id];
        switch (e.k)
        {
        case entry::kind::param:
            out.emplace_back(0, e.param);
            return;
        case entry::kind::constant:
            out.emplace_back(1, e.value);
            return;
        case entry::kind::op:
            out.emplace_back(2 + static_cast<uint32_t>(e.op), 0);
            key_of(e.a, out);
            if (e.op == op_tag::select)
            {
                key_of(e.b, out);
                key_of(e.c, out);
            }
            else if (!is_unary(e.op))
                key_of(e.b, out);
            return;
        }
    }

    std::pair<uint16_t, key_type> order_key(uint32_t id) const
    {
        key_type k;
        key_of(id, k);
        return {m_entries[id].size, std::move(k)};
    }

    std::vector<uint64_t> goal_signature() const
    {
        std::vector<uint64_t> sig;
        sig.reserve(m_vectors.size());
        for (const auto& tv : m_vectors)
            sig.push_back(eval_node(m_lhs, m_lhs.result(), tv));
        return sig;
    }

    size_t nvec() const noexcept { return m_vectors.size(); }
    const uint64_t* sig(uint32_t id) const { return m_sigs.data() + size_t{id} * nvec(); }
    bool is_const(uint32_t id) const { return m_entries[id].k == entry::kind::constant; }

    void charge()
    {
        ++m_work;
        if (m_budget && m_work > m_budget)
            throw search_exhausted{};
        if ((m_work & 1023) == 0 && clock_type::now() >= m_deadline)
            throw search_exhausted{};
    }

    static uint64_t hash_sig(const uint64_t* s, size_t n, unsigned width) noexcept
    {
        uint64_t h = 0xcbf29ce484222325ull ^ width;
        for (size_t i = 0; i < n; ++i)
        {
            h ^= s[i] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 0x100000001b3ull;
        }
        return h;
    }

    /// Adds the entry unless pruned; `scratch` holds its signature.
    void offer(const entry& e, unsigned size)
    {
        charge();
        const auto n = nvec();
        if (!m_prune)
        {
            m_entries.push_back(e);
            m_levels[size].push_back(static_cast<uint32_t>(m_entries.size() - 1));
            return;
        }
        if (e.width == m_goal_width && std::equal(m_scratch.begin(), m_scratch.end(), m_goal.begin()))
        {
            m_entries.push_back(e);
            m_sigs.insert(m_sigs.end(), m_scratch.begin(), m_scratch.end());
            m_matches.push_back(static_cast<uint32_t>(m_entries.size() - 1));
            return;
        }
        const auto h = hash_sig(m_scratch.data(), n, e.width);
        auto& bucket = m_seen[h];
        for (const auto other : bucket)
            if (m_entries[other].width == e.width &&
                std::equal(m_scratch.begin(), m_scratch.end(), sig(other)))
                return;
        m_entries.push_back(e);
        m_sigs.insert(m_sigs.end(), m_scratch.begin(), m_scratch.end());
        const auto id = static_cast<uint32_t>(m_entries.size() - 1);
        bucket.push_back(id);
        m_levels[size].push_back(id);
    }

    void compute(op_tag op, unsigned w, unsigned out_w, uint32_t a, uint32_t b, uint32_t c)
    {
        const auto n = nvec();
        m_scratch.resize(n);
        if (!m_prune)
            return;
        const uint64_t* sa = sig(a);
        const uint64_t* sb = sig(b);
        const uint64_t m = mask_for(w);
        uint64_t* out = m_scratch.data();
        switch (op)
        {
        case op_tag::add:
            for (size_t i = 0; i < n; ++i)
                out[i] = (sa[i] + sb[i]) & m;
            return;
        case op_tag::sub:
            for (size_t i = 0; i < n; ++i)
                out[i] = (sa[i] - sb[i]) & m;
            return;
        case op_tag::mul:
            for (size_t i = 0; i < n; ++i)
                out[i] = (sa[i] * sb[i]) & m;
            return;
        case op_tag::and_:
            for (size_t i = 0; i < n; ++i)
                out[i] = sa[i] & sb[i];
            return;
        case op_tag::or_:
            for (size_t i = 0; i < n; ++i)
                out[i] = sa[i] | sb[i];
            return;
        case op_tag::xor_:
            for (size_t i = 0; i < n; ++i)
                out[i] = sa[i] ^ sb[i];
            return;
        case op_tag::select:
        {
            const uint64_t* sc = sig(c);
            for (size_t i = 0; i < n; ++i)
                out[i] = sc[i] != 0 ? sa[i] : sb[i];
            return;
        }
        default:
            for (size_t i = 0; i < n; ++i)
                out[i] = eval_op(op, w, sa[i], sb[i], 0, out_w);
            return;
        }
    }

    void build_leaves()
    {
        for (uint32_t k = 0; k < m_widths.size(); ++k)
        {
            entry e;
            e.k = entry::kind::param;
            e.width = static_cast<uint8_t>(m_widths[k]);
            e.param = k;
            m_scratch.clear();
            for (const auto& tv : m_vectors)
                m_scratch.push_back(tv.values[k] & mask_for(e.width));
            offer(e, 1);
        }
        for (const auto& [w, pool] : m_pool)
        {
            for (const auto v : pool)
            {
                entry e;
                e.k = entry::kind::constant;
                e.width = static_cast<uint8_t>(w);
                e.value = v;
                m_scratch.assign(nvec(), v);
                offer(e, 1);
            }
        }
    }

    void build_unops(unsigned size)
    {
        const auto& children = m_levels[size - 1];
        for (const auto a : children)
        {
            if (is_const(a))
                continue;
            const unsigned w = m_entries[a].width;
            auto add = [&](op_tag op, unsigned out_w) {
                compute(op, w, out_w, a, a, a);
                entry e;
                e.op = op;
                e.width = static_cast<uint8_t>(out_w);
                e.size = static_cast<uint16_t>(size);
                e.a = a;
                offer(e, size);
            };
            add(op_tag::eqz, 32);
            if (m_use64)
            {
                if (w == 32)
                {
                    add(op_tag::extend_s, 64);
                    add(op_tag::extend_u, 64);
                }
                else
                    add(op_tag::wrap, 32);
            }
        }
    }

    void build_binops(unsigned size)
    {
        for (unsigned i = 1; i + 1 < size; ++i)
        {
            const unsigned j = size - 1 - i;
            const auto& left = m_levels[i];
            const auto& right = m_levels[j];
            for (const auto a : left)
            {
                for (const auto b : right)
                {
                    const unsigned w = m_entries[a].width;
                    if (w != m_entries[b].width || (is_const(a) && is_const(b)))
                        continue;
                    for (const auto op : binary_ops)
                    {
                        if (is_commutative(op) && (i > j || (i == j && a > b)))
                            continue;
                        const unsigned out_w = result_width(op, w);
                        compute(op, w, out_w, a, b, 0);
                        entry e;
                        e.op = op;
                        e.width = static_cast<uint8_t>(out_w);
                        e.size = static_cast<uint16_t>(size);
                        e.a = a;
                        e.b = b;
                        offer(e, size);
                    }
                }
            }
        }
    }

    void build_selects(unsigned size)
    {
        if (size < 4)
            return;
        for (unsigned i = 1; i + 2 < size; ++i)
        {
            for (unsigned j = 1; i + j + 1 < size; ++j)
            {
                const unsigned k = size - 1 - i - j;
                const auto& as = m_levels[i];
                const auto& bs = m_levels[j];
                const auto& cs = m_levels[k];
                for (const auto c : cs)
                {
                    if (is_const(c) || m_entries[c].width != 32)
                        continue;
                    for (const auto a : as)
                        for (const auto b : bs)
                        {
                            if (a == b || m_entries[a].width != m_entries[b].width)
                                continue;
                            const unsigned w = m_entries[a].width;
                            compute(op_tag::select, w, w, a, b, c);
                            entry e;
                            e.op = op_tag::select;
                            e.width = static_cast<uint8_t>(w);
                            e.size = static_cast<uint16_t>(size);
                            e.a = a;
                            e.b = b;
                            e.c = c;
                            offer(e, size);
                        }
                }
            }
        }
    }

    const DfGraph& m_lhs;
    std::vector<unsigned> m_widths;
    std::vector<TestVector> m_vectors;
    bool m_prune;
    unsigned m_goal_width = 32;
    bool m_use64 = false;
    std::map<unsigned, std::vector<uint64_t>> m_pool;

    std::vector<entry> m_entries;
    std::vector<uint64_t> m_sigs;
    std::vector<std::vector<uint32_t>> m_levels;
    std::unordered_map<uint64_t, std::vector<uint32_t>> m_seen;
    std::vector<uint32_t> m_matches;
    std::vector<uint64_t> m_goal;
    std::vector<uint64_t> m_scratch;

    uint64_t m_work = 0;
    uint64_t m_budget = 0;
    clock_type::time_point m_deadline = clock_type::time_point::max();
};

std::vector<TestVector> screen_vectors(std::span<const unsigned> widths, uint64_t seed)
{
    auto out = corner_vectors(widths, 32);
    for (auto& tv : random_vectors(widths, 64 - out.size(), seed ^ 0x5eed))
        out.push_back(std::move(tv));
    return out;
}

bool agrees(const DfGraph& lhs, const DfGraph& rhs, const std::vector<TestVector>& vectors,
    TestVector* witness)
{
    for (const auto& tv : vectors)
    {
        if (eval_node(lhs, lhs.result(), tv) != eval_node(rhs, rhs.result(), tv))
        {
            if (witness)
                *witness = tv;
            return false;
        }
    }
    return true;
}

DfGraph const_graph(const Candidate& c, uint64_t value)
{
    DfGraph g = make_expression_graph(c.widths);
    const auto width = c.lhs.node(c.lhs.result()).width;
    const auto id = g.add_const(width, value);
    g.outputs.push_back({{Sink::kind::stack, 0}, id});
    return g;
}

Replacement make_replacement(const Candidate& c, DfGraph rhs, Verdict v, synth_mode engine,
    clock_type::time_point start, unsigned iterations)
{
    Replacement r;
    r.candidate = c;
    r.rhs_cost = graph_cost(rhs);
    r.rhs = std::move(rhs);
    r.verdict = std::move(v);
    r.engine = engine;
    r.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(clock_type::now() - start);
    r.iterations = iterations;
    return r;
}

unsigned cost_limit(const Candidate& c, const SynthConfig& cfg)
{
    // Strict improvement: the RHS must be cheaper than the LHS.
    uint64_t limit = c.lhs_cost == 0 ? 0 : c.lhs_cost - 1;
    if (cfg.max_rhs_instructions)
        limit = std::min<uint64_t>(limit, *cfg.max_rhs_instructions);
    return static_cast<unsigned>(std::min<uint64_t>(limit, 64));
}

/// Shared search loop of the enumerative and CEGIS engines.
SynthResult search(const Candidate& c, const SynthConfig& cfg, std::vector<TestVector> vectors,
    bool lone_constant)
{
    const auto start = clock_type::now();
    if (cfg.timeout.count() <= 0)
        return {std::nullopt, "timeout"};
    const unsigned limit = cost_limit(c, cfg);
    if (limit == 0)
        return {std::nullopt, "not_cheaper"};

    enumerator en{c.lhs, std::move(vectors), true};
    en.set_limits(cfg.work_budget, start + cfg.timeout);
    std::set<std::string> rejected;
    unsigned iterations = 0;
    std::string last_reason = "no_rhs";

    // Returns true when the verdict ends the search with a replacement.
    auto try_rhs = [&](DfGraph rhs, SynthResult& out) -> int {
        const auto text = dump(rhs);
        if (rejected.count(text))
            return 0;
        auto v = check_equivalence(c.lhs, rhs, cfg);
        if (v.accepted(cfg.probabilistic))
        {
            out = {make_replacement(c, std::move(rhs), std::move(v), cfg.mode, start, iterations),
                {}};
            return 1;
        }
        rejected.insert(text);
        if (v.t == Verdict::tag::refuted)
        {
            ++iterations;
            en.add_vector(std::move(v.counterexample));
            return 2;
        }
        last_reason = v.reason.empty() ? to_string(v) : v.reason;
        return 0;
    };

    try
    {
        en.reset();
    restart:
        if (lone_constant && !en.vectors().empty())
        {
            // A single constant solved directly from the examples.
            const auto k = eval_node(c.lhs, c.lhs.result(), en.vectors().front());
            bool constant = true;
            for (const auto& tv : en.vectors())
                if (eval_node(c.lhs, c.lhs.result(), tv) != k)
                {
                    constant = false;
                    break;
                }
            if (constant)
            {
                SynthResult out;
                const auto r = try_rhs(const_graph(c, k), out);
                if (r == 1)
                    return out;
                if (r == 2)
                    goto restart;
            }
        }
        for (unsigned size = 1; size <= limit; ++size)
        {
            const auto matches = en.build_level(size);
            for (const auto id : matches)
            {
                SynthResult out;
                const auto r = try_rhs(en.to_graph(id), out);
                if (r == 1)
                    return out;
                if (r == 2)
                    goto restart;
            }
        }
    }
    catch (const search_exhausted&)
    {
        return {std::nullopt, "timeout"};
    }
    return {std::nullopt, last_reason};
}

std::vector<uint64_t> lhs_constants(const DfGraph& lhs, unsigned width)
{
    std::vector<uint64_t> out;
    for (const auto& n : lhs.nodes)
        if (n.kind == node_kind::constant && n.width == width)
            out.push_back(n.value);
    return out;
}
}  // namespace

std::string_view to_string(synth_mode m) noexcept
{
    switch (m)
    {
    case synth_mode::constants:
        return "constants";
    case synth_mode::bounded2:
        return "max2";
    case synth_mode::cegis:
        return "cegis";
    case synth_mode::enumerative:
        return "enumerative";
    }
    return "?";
}

std::optional<synth_mode> parse_synth_mode(std::string_view s) noexcept
{
    for (const auto m :
        {synth_mode::constants, synth_mode::bounded2, synth_mode::cegis, synth_mode::enumerative})
        if (to_string(m) == s)
            return m;
    return std::nullopt;
}

SynthConfig SynthConfig::for_mode(synth_mode m)
{
    SynthConfig cfg;
    cfg.mode = m;
    if (m == synth_mode::bounded2)
        cfg.max_rhs_instructions = 2;
    return cfg;
}

std::vector<uint64_t> constant_pool(const DfGraph& lhs, unsigned width)
{
    const uint64_t m = mask_for(width);
    const uint64_t min = uint64_t{1} << (width - 1);
    std::vector<uint64_t> v{0, 1, m, min, min - 1, width - 1u};
    for (const unsigned k : {1u, 2u, 3u, 4u, 8u, 16u})
        v.push_back(uint64_t{1} << k);

    // Constants of the LHS, the masks their shift amounts imply, and pairwise
    // folds, so that reassociated constants (x + 1 + 2 -> x + 3) and strength
    // reductions (shl(x, 1) + x -> x * 3) are reachable.
    auto own = lhs_constants(lhs, width);
    for (const auto a : own)
    {
        v.push_back(a);
        v.push_back((0 - a) & m);
        v.push_back(~a & m);
    }
    const size_t n_own = own.size();
    for (size_t i = 0; i < n_own; ++i)
    {
        const auto a = own[i];
        if (a == 0 || a >= width)
            continue;
        const uint64_t p = uint64_t{1} << a;
        v.push_back((0 - p) & m);
        v.push_back(p - 1);
        own.push_back(p);
    }
    for (const auto a : own)
        for (const auto b : own)
        {
            v.push_back((a + b) & m);
            v.push_back((a - b) & m);
            v.push_back((a * b) & m);
            v.push_back(a & b);
            v.push_back(a | b);
            v.push_back(a ^ b);
        }

    std::vector<uint64_t> out;
    for (const auto x : v)
        if (std::find(out.begin(), out.end(), x) == out.end())
            out.push_back(x);
    constexpr size_t max_pool = 48;
    if (out.size() > max_pool)
        out.resize(max_pool);
    return out;
}

std::vector<Candidate> harvest_candidates(const DfGraph& g, size_t max_cone_nodes)
{
    std::vector<Candidate> out;
    for (const auto& n : g.nodes)
    {
        if (n.is_leaf() || n.kind == node_kind::constant)
            continue;
        if (n.width != 32 && n.width != 64)
            continue;
        auto cone = cone_of(g, n.id);
        if (cone.size() < 2 || cone.size() > max_cone_nodes)
            continue;
        Candidate c;
        c.root = n.id;
        c.lhs = extract_cone(g, n.id, c.input_vars);
        for (const auto id : c.input_vars)
            c.widths.push_back(g.nodes[id].width);
        c.lhs_cost = graph_cost(c.lhs);
        c.cone = std::move(cone);
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.lhs_cost != b.lhs_cost)
            return a.lhs_cost > b.lhs_cost;
        return a.root < b.root;
    });
    return out;
}

Verdict check_equivalence(const DfGraph& lhs, const DfGraph& rhs, const SynthConfig& cfg)
{
    if (cfg.solver)
        return verify_smt(lhs, rhs, *cfg.solver);
    if (cfg.probabilistic)
        return verify_testing(lhs, rhs, cfg.test_vectors, cfg.seed);
    throw verifier_unavailable("no SMT solver configured and probabilistic mode is off");
}

SynthResult synth_constant(const Candidate& c, const SynthConfig& cfg)
{
    const auto start = clock_type::now();
    if (cfg.timeout.count() <= 0)
        return {std::nullopt, "timeout"};
    if (c.lhs_cost <= 1)
        return {std::nullopt, "not_cheaper"};
    const auto probes = random_vectors(c.widths, 2, cfg.seed);
    const auto k = eval_node(c.lhs, c.lhs.result(), probes[0]);
    if (eval_node(c.lhs, c.lhs.result(), probes[1]) != k)
        return {std::nullopt, "not_constant"};
    auto rhs = const_graph(c, k);
    if (!agrees(c.lhs, rhs, screen_vectors(c.widths, cfg.seed), nullptr))
        return {std::nullopt, "not_constant"};
    auto v = check_equivalence(c.lhs, rhs, cfg);
    if (!v.accepted(cfg.probabilistic))
        return {std::nullopt, v.t == Verdict::tag::refuted ? "not_constant" : v.reason};
    return {make_replacement(c, std::move(rhs), std::move(v), synth_mode::constants, start, 0), {}};
}

SynthResult synth_enumerative(const Candidate& c, const SynthConfig& cfg)
{
    return search(c, cfg, screen_vectors(c.widths, cfg.seed), false);
}

SynthResult synth_cegis(const Candidate& c, const SynthConfig& cfg)
{
    return search(c, cfg, corner_vectors(c.widths, 16), true);
}

std::optional<SynthResult> SynthCache::find(synth_mode m, const std::string& key) const
{
    std::lock_guard lock{m_mutex};
    const auto it = m_entries.find({m, key});
    if (it == m_entries.end())
        return std::nullopt;
    return it->second;
}

void SynthCache::store(synth_mode m, const std::string& key, const SynthResult& r)
{
    std::lock_guard lock{m_mutex};
    m_entries.emplace(std::make_pair(m, key), r);
}

SynthResult best_replacement(const Candidate& c, const SynthConfig& cfg, SynthCache* cache)
{
    const auto key = dump(c.lhs);
    if (cache)
    {
        if (auto hit = cache->find(cfg.mode, key))
        {
            if (hit->replacement)
                hit->replacement->candidate = c;
            return *hit;
        }
    }
    SynthResult r;
    switch (cfg.mode)
    {
    case synth_mode::constants:
        r = synth_constant(c, cfg);
        break;
    case synth_mode::bounded2:
    {
        auto bounded = cfg;
        bounded.max_rhs_instructions = 2;
        r = synth_enumerative(c, bounded);
        if (r.replacement)
            r.replacement->engine = synth_mode::bounded2;
        break;
    }
    case synth_mode::cegis:
        r = synth_cegis(c, cfg);
        break;
    case synth_mode::enumerative:
        r = synth_enumerative(c, cfg);
        break;
    }
    if (cache)
        cache->store(cfg.mode, key, r);
    return r;
}

std::vector<DfGraph> enumerate_grammar(const DfGraph& lhs, unsigned max_cost)
{
    enumerator en{lhs, {}, false};
    en.reset();
    std::vector<DfGraph> out;
    for (unsigned size = 1; size <= max_cost; ++size)
    {
        en.build_level(size);
        for (const auto id : en.level_entries(size, en.goal_width()))
            out.push_back(en.to_graph(id));
    }
    return out;
}
}  // namespace wsopt
