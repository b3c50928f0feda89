// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/verify.hpp"
#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <random>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace wsopt
{
namespace
{
uint64_t mask_for(unsigned width) noexcept
{
    return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

int64_t to_signed(uint64_t v, unsigned width) noexcept
{
    if (width >= 64)
        return static_cast<int64_t>(v);
    const uint64_t sign = uint64_t{1} << (width - 1);
    return static_cast<int64_t>(((v & mask_for(width)) ^ sign) - sign);
}

bool is_eval_input(const DfNode& n) noexcept
{
    return n.kind == node_kind::var || (n.kind == node_kind::opaque && n.operands.empty());
}

}  // namespace

uint64_t eval_op(op_tag op, unsigned w, uint64_t a, uint64_t b, uint64_t c, unsigned out_width)
{
    const uint64_t m = mask_for(w);
    a &= m;
    b &= m;
    const uint64_t sh = b % w;
    switch (op)
    {
    case op_tag::add:
        return (a + b) & m;
    case op_tag::sub:
        return (a - b) & m;
    case op_tag::mul:
        return (a * b) & m;
    case op_tag::and_:
        return a & b;
    case op_tag::or_:
        return a | b;
    case op_tag::xor_:
        return a ^ b;
    case op_tag::shl:
        return (a << sh) & m;
    case op_tag::shr_u:
        return a >> sh;
    case op_tag::shr_s:
        return static_cast<uint64_t>(to_signed(a, w) >> sh) & m;
    case op_tag::rotl:
        return sh == 0 ? a : ((a << sh) | (a >> (w - sh))) & m;
    case op_tag::rotr:
        return sh == 0 ? a : ((a >> sh) | (a << (w - sh))) & m;
    case op_tag::eq:
        return a == b;
    case op_tag::ne:
        return a != b;
    case op_tag::lt_s:
        return to_signed(a, w) < to_signed(b, w);
    case op_tag::lt_u:
        return a < b;
    case op_tag::gt_s:
        return to_signed(a, w) > to_signed(b, w);
    case op_tag::gt_u:
        return a > b;
    case op_tag::le_s:
        return to_signed(a, w) <= to_signed(b, w);
    case op_tag::le_u:
        return a <= b;
    case op_tag::ge_s:
        return to_signed(a, w) >= to_signed(b, w);
    case op_tag::ge_u:
        return a >= b;
    case op_tag::eqz:
        return a == 0;
    case op_tag::extend_s:
        return static_cast<uint64_t>(to_signed(a, w)) & mask_for(out_width);
    case op_tag::extend_u:
        return a;
    case op_tag::wrap:
        return a & mask_for(out_width);
    case op_tag::select:
        return c != 0 ? a : b;
    case op_tag::div_u:
    case op_tag::rem_u:
        if (b == 0)
            throw eval_error(eval_error::kind::trap, "integer divide by zero");
        return op == op_tag::div_u ? a / b : a % b;
    case op_tag::div_s:
    case op_tag::rem_s:
    {
        if (b == 0)
            throw eval_error(eval_error::kind::trap, "integer divide by zero");
        const auto sa = to_signed(a, w);
        const auto sb = to_signed(b, w);
        const auto min = to_signed(uint64_t{1} << (w - 1), w);
        if (sa == min && sb == -1)
        {
            if (op == op_tag::div_s)
                throw eval_error(eval_error::kind::trap, "integer overflow");
            return 0;
        }
        return static_cast<uint64_t>(op == op_tag::div_s ? sa / sb : sa % sb) & m;
    }
    case op_tag::none:
        break;
    }
    throw std::logic_error("cannot evaluate operation");
}

namespace
{
std::vector<uint64_t> eval_reachable(const DfGraph& g, const TestVector& tv,
    const std::vector<bool>& needed)
{
    std::vector<uint64_t> val(g.nodes.size(), 0);
    size_t next_input = 0;
    for (const auto& n : g.nodes)
    {
        if (is_eval_input(n))
        {
            const auto slot = next_input++;
            if (!needed[n.id])
                continue;
            if (slot >= tv.values.size())
                throw eval_error(eval_error::kind::uncovered_input,
                    "no value for input %" + std::to_string(n.id));
            val[n.id] = tv.values[slot] & mask_for(n.width);
            continue;
        }
        if (!needed[n.id])
            continue;
        if (n.kind == node_kind::constant)
        {
            val[n.id] = n.value & mask_for(n.width);
            continue;
        }
        const unsigned w = g.nodes[n.operands[0]].width;
        const uint64_t a = val[n.operands[0]];
        const uint64_t b = n.operands.size() > 1 ? val[n.operands[1]] : 0;
        if (n.op == op_tag::select)
            val[n.id] = n.operands.size() == 3 && val[n.operands[2]] != 0 ? a : b;
        else
            val[n.id] = eval_op(n.op, w, a, b, 0, n.width) & mask_for(n.width);
    }
    return val;
}

std::vector<bool> needed_for(const DfGraph& g, std::span<const NodeId> roots)
{
    std::vector<bool> needed(g.nodes.size(), false);
    std::vector<NodeId> work;
    for (const auto r : roots)
        if (!needed[r])
        {
            needed[r] = true;
            work.push_back(r);
        }
    while (!work.empty())
    {
        const auto id = work.back();
        work.pop_back();
        for (const auto op : g.nodes[id].operands)
            if (!needed[op])
            {
                needed[op] = true;
                work.push_back(op);
            }
    }
    return needed;
}

// --- SMT text ------------------------------------------------------------------

std::string bv_literal(uint64_t value, unsigned width)
{
    value &= mask_for(width);
    std::string s;
    if (width % 4 == 0)
    {
        s = "#x";
        for (int i = static_cast<int>(width / 4) - 1; i >= 0; --i)
            s += "0123456789abcdef"[(value >> (4 * i)) & 0xf];
    }
    else
    {
        s = "#b";
        for (int i = static_cast<int>(width) - 1; i >= 0; --i)
            s += ((value >> i) & 1) ? '1' : '0';
    }
    return s;
}

unsigned log2_width(unsigned w)
{
    unsigned s = 0;
    while ((1u << s) < w)
        ++s;
    if ((1u << s) != w)
        throw smt_error("UnsupportedNode: shift width is not a power of two");
    return s;
}

class smt_writer
{
public:
    smt_writer(const DfGraph& g, char prefix, std::vector<std::string>& decls)
      : m_g{g}, m_prefix{prefix}, m_decls{decls}
    {}

    /// Appends `(let ((x e)) ` for every needed operation node; returns the
    /// result term and the number of opened lets.
    std::pair<std::string, size_t> encode(std::string& out, bool allow_opaque)
    {
        const NodeId root = m_g.result();
        const auto needed = needed_for(m_g, std::span{&root, 1});
        size_t lets = 0;
        for (const auto& n : m_g.nodes)
        {
            if (!needed[n.id] || n.kind == node_kind::var || n.kind == node_kind::constant)
                continue;
            if (n.kind == node_kind::opaque)
            {
                if (!allow_opaque)
                    throw smt_error("UnsupportedNode: opaque node in replacement");
                m_decls.push_back("(declare-const " + name(n.id) + " (_ BitVec " +
                                  std::to_string(n.width) + "))");
                continue;
            }
            out += "(let ((" + name(n.id) + " " + term(n) + ")) ";
            ++lets;
        }
        return {ref(root), lets};
    }

private:
    std::string name(NodeId id) const
    {
        const auto& n = m_g.nodes[id];
        if (n.kind == node_kind::var)
        {
            if (n.origin.k == Source::kind::param)
                return "in" + std::to_string(n.origin.index);
            return "v" + std::to_string(id);
        }
        if (n.kind == node_kind::opaque)
            return std::string{m_prefix} + "op" + std::to_string(id);
        return std::string{m_prefix} + std::to_string(id);
    }

    std::string ref(NodeId id) const
    {
        const auto& n = m_g.nodes[id];
        if (n.kind == node_kind::constant)
            return bv_literal(n.value, n.width);
        return name(id);
    }

    std::string masked_count(NodeId count, unsigned w) const
    {
        const auto s = log2_width(w);
        if (s == 0)
            return bv_literal(0, w);
        return "((_ zero_extend " + std::to_string(w - s) + ") ((_ extract " +
               std::to_string(s - 1) + " 0) " + ref(count) + "))";
    }

    std::string bool_to_bv(const std::string& cond, unsigned out) const
    {
        return "(ite " + cond + " " + bv_literal(1, out) + " " + bv_literal(0, out) + ")";
    }

    std::string term(const DfNode& n) const
    {
        const unsigned w = m_g.nodes[n.operands[0]].width;
        const auto a = ref(n.operands[0]);
        const auto b = n.operands.size() > 1 ? ref(n.operands[1]) : std::string{};
        auto bin = [&](const char* f) { return std::string{"("} + f + " " + a + " " + b + ")"; };
        auto cmp = [&](const char* f) {
            return bool_to_bv(std::string{"("} + f + " " + a + " " + b + ")", n.width);
        };
        switch (n.op)
        {
        case op_tag::add:
            return bin("bvadd");
        case op_tag::sub:
            return bin("bvsub");
        case op_tag::mul:
            return bin("bvmul");
        case op_tag::and_:
            return bin("bvand");
        case op_tag::or_:
            return bin("bvor");
        case op_tag::xor_:
            return bin("bvxor");
        case op_tag::shl:
            return "(bvshl " + a + " " + masked_count(n.operands[1], w) + ")";
        case op_tag::shr_u:
            return "(bvlshr " + a + " " + masked_count(n.operands[1], w) + ")";
        case op_tag::shr_s:
            return "(bvashr " + a + " " + masked_count(n.operands[1], w) + ")";
        case op_tag::rotl:
        case op_tag::rotr:
        {
            const auto k = masked_count(n.operands[1], w);
            const auto back = "(bvsub " + bv_literal(w, w) + " " + k + ")";
            const bool left = n.op == op_tag::rotl;
            return "(bvor (" + std::string{left ? "bvshl " : "bvlshr "} + a + " " + k + ") (" +
                   (left ? "bvlshr " : "bvshl ") + a + " " + back + "))";
        }
        case op_tag::eq:
            return cmp("=");
        case op_tag::ne:
            return cmp("distinct");
        case op_tag::lt_s:
            return cmp("bvslt");
        case op_tag::lt_u:
            return cmp("bvult");
        case op_tag::gt_s:
            return cmp("bvsgt");
        case op_tag::gt_u:
            return cmp("bvugt");
        case op_tag::le_s:
            return cmp("bvsle");
        case op_tag::le_u:
            return cmp("bvule");
        case op_tag::ge_s:
            return cmp("bvsge");
        case op_tag::ge_u:
            return cmp("bvuge");
        case op_tag::eqz:
            return bool_to_bv("(= " + a + " " + bv_literal(0, w) + ")", n.width);
        case op_tag::extend_s:
            return "((_ sign_extend " + std::to_string(n.width - w) + ") " + a + ")";
        case op_tag::extend_u:
            return "((_ zero_extend " + std::to_string(n.width - w) + ") " + a + ")";
        case op_tag::wrap:
            return "((_ extract " + std::to_string(n.width - 1) + " 0) " + a + ")";
        case op_tag::select:
        {
            const auto& c = m_g.nodes[n.operands[2]];
            return "(ite (distinct " + ref(c.id) + " " + bv_literal(0, c.width) + ") " + a + " " +
                   b + ")";
        }
        default:
            break;
        }
        throw smt_error("UnsupportedNode: " + std::string{to_string(n.op)});
    }

    const DfGraph& m_g;
    char m_prefix;
    std::vector<std::string>& m_decls;
};

// --- solver process ------------------------------------------------------------

struct process_result
{
    bool spawned = false;
    bool timed_out = false;
    std::string out;
};

process_result run_shell(const std::string& command, const std::string& input,
    std::chrono::milliseconds deadline)
{
    process_result res;
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0)
        return res;
    if (pipe(out_pipe) != 0)
    {
        close(in_pipe[0]);
        close(in_pipe[1]);
        return res;
    }
    const pid_t pid = fork();
    if (pid < 0)
    {
        for (const int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]})
            close(fd);
        return res;
    }
    if (pid == 0)
    {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        const int devnull = open("/dev/null", O_WRONLY);
        if (devnull >= 0)
            dup2(devnull, STDERR_FILENO);
        for (const int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]})
            close(fd);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    res.spawned = true;

    const auto start = std::chrono::steady_clock::now();
    size_t written = 0;
    int in_fd = in_pipe[1];
    fcntl(in_fd, F_SETFL, O_NONBLOCK);
    const int out_fd = out_pipe[0];
    std::signal(SIGPIPE, SIG_IGN);
    char buf[4096];
    while (true)
    {
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        if (elapsed >= deadline)
        {
            res.timed_out = true;
            break;
        }
        pollfd fds[2];
        nfds_t nfds = 0;
        fds[nfds++] = {out_fd, POLLIN, 0};
        if (in_fd >= 0)
            fds[nfds++] = {in_fd, POLLOUT, 0};
        const int ready = poll(fds, nfds, static_cast<int>((deadline - elapsed).count()));
        if (ready < 0 && errno != EINTR)
            break;
        if (in_fd >= 0 && nfds > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP)))
        {
            const auto n = write(in_fd, input.data() + written, input.size() - written);
            if (n > 0)
                written += static_cast<size_t>(n);
            if (n < 0 && errno != EAGAIN)
                written = input.size();
            if (written == input.size())
            {
                close(in_fd);
                in_fd = -1;
            }
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR))
        {
            const auto n = read(out_fd, buf, sizeof buf);
            if (n <= 0)
                break;
            res.out.append(buf, static_cast<size_t>(n));
        }
    }
    if (in_fd >= 0)
        close(in_fd);
    close(out_fd);
    if (res.timed_out)
        kill(pid, SIGKILL);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR)
    {
    }
    if (!res.timed_out && WIFEXITED(status) && WEXITSTATUS(status) == 127 && res.out.empty())
        res.spawned = false;
    return res;
}

/// Tokenizes an s-expression stream into parens and atoms.
std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> toks;
    size_t i = 0;
    while (i < text.size())
    {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c)))
        {
            ++i;
            continue;
        }
        if (c == '(' || c == ')')
        {
            toks.emplace_back(1, c);
            ++i;
            continue;
        }
        if (c == '"')
        {
            const auto end = text.find('"', i + 1);
            const auto stop = end == std::string_view::npos ? text.size() : end + 1;
            toks.emplace_back(text.substr(i, stop - i));
            i = stop;
            continue;
        }
        size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
               text[j] != '(' && text[j] != ')')
            ++j;
        toks.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return toks;
}

std::optional<uint64_t> parse_bv_literal(std::string_view tok)
{
    if (tok.size() < 3 || tok[0] != '#')
        return std::nullopt;
    const unsigned base = tok[1] == 'x' ? 16 : tok[1] == 'b' ? 2 : 0;
    if (base == 0)
        return std::nullopt;
    uint64_t v = 0;
    for (const char c : tok.substr(2))
    {
        unsigned d;
        if (c >= '0' && c <= '9')
            d = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f')
            d = static_cast<unsigned>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F')
            d = static_cast<unsigned>(c - 'A' + 10);
        else
            return std::nullopt;
        if (d >= base)
            return std::nullopt;
        v = v * base + d;
    }
    return v;
}

/// Extracts `(define-fun inN () (_ BitVec w) <literal>)` entries.
std::optional<std::vector<std::pair<uint32_t, uint64_t>>> parse_model(std::string_view text)
{
    const auto toks = tokenize(text);
    std::vector<std::pair<uint32_t, uint64_t>> out;
    for (size_t i = 0; i + 1 < toks.size(); ++i)
    {
        if (toks[i] != "define-fun")
            continue;
        const auto& name = toks[i + 1];
        // name ( ) ( _ BitVec w ) value
        size_t j = i + 2;
        if (j + 1 >= toks.size() || toks[j] != "(" || toks[j + 1] != ")")
            return std::nullopt;
        j += 2;
        if (j + 4 >= toks.size() || toks[j] != "(" || toks[j + 1] != "_" || toks[j + 2] != "BitVec")
            return std::nullopt;
        j += 5;
        if (j >= toks.size())
            return std::nullopt;
        const auto value = parse_bv_literal(toks[j]);
        if (!value)
            return std::nullopt;
        if (name.size() > 2 && name.rfind("in", 0) == 0 &&
            std::all_of(name.begin() + 2, name.end(), [](char c) { return c >= '0' && c <= '9'; }))
            out.emplace_back(static_cast<uint32_t>(std::stoul(name.substr(2))), *value);
    }
    return out;
}

std::string first_token(std::string_view text)
{
    const auto toks = tokenize(text);
    return toks.empty() ? std::string{} : toks.front();
}
}  // namespace

std::string to_string(const Verdict& v)
{
    switch (v.t)
    {
    case Verdict::tag::proven:
        return "Proven";
    case Verdict::tag::refuted:
        return "Refuted";
    case Verdict::tag::passed_tests:
        return "PassedTests(" + std::to_string(v.tests) + ")";
    case Verdict::tag::unknown:
        return "Unknown(" + v.reason + ")";
    }
    return "?";
}

std::optional<SolverConfig> solver_from_env()
{
    const char* cmd = std::getenv("WSOPT_SOLVER");
    if (!cmd || !*cmd)
        return std::nullopt;
    SolverConfig sc;
    sc.command = cmd;
    return sc;
}

std::vector<NodeId> eval_inputs(const DfGraph& g)
{
    std::vector<NodeId> out;
    for (const auto& n : g.nodes)
        if (is_eval_input(n))
            out.push_back(n.id);
    return out;
}

std::vector<unsigned> input_widths(const DfGraph& g)
{
    std::vector<unsigned> out;
    for (const auto id : eval_inputs(g))
        out.push_back(g.nodes[id].width);
    return out;
}

uint64_t eval_node(const DfGraph& g, NodeId root, const TestVector& tv)
{
    if (root >= g.nodes.size())
        throw std::out_of_range("node id out of range");
    const auto needed = needed_for(g, std::span{&root, 1});
    return eval_reachable(g, tv, needed)[root];
}

std::vector<uint64_t> eval_graph(const DfGraph& g, const TestVector& tv)
{
    std::vector<NodeId> roots;
    for (const auto& o : g.outputs)
        roots.push_back(o.node);
    roots.insert(roots.end(), g.pinned.begin(), g.pinned.end());
    return eval_reachable(g, tv, needed_for(g, roots));
}

std::vector<uint64_t> corner_values(unsigned width)
{
    const uint64_t m = mask_for(width);
    const uint64_t min = uint64_t{1} << (width - 1);
    std::vector<uint64_t> v{0, 1, m, min, min - 1, 0x5555555555555555ull & m,
        0xaaaaaaaaaaaaaaaaull & m};
    for (unsigned b = 0; b < 8 && b < width; ++b)
        v.push_back(uint64_t{1} << b);
    for (const unsigned k : {8u, 15u, 16u, 30u, 31u})
    {
        if (k >= width)
            continue;
        const uint64_t p = uint64_t{1} << k;
        v.push_back(p);
        v.push_back((0 - p) & m);
    }
    std::vector<uint64_t> out;
    for (const auto x : v)
        if (std::find(out.begin(), out.end(), x) == out.end())
            out.push_back(x);
    return out;
}

std::vector<TestVector> corner_vectors(std::span<const unsigned> widths, size_t cap)
{
    std::vector<std::vector<uint64_t>> per;
    uint64_t total = 1;
    for (const auto w : widths)
    {
        per.push_back(corner_values(w));
        total *= per.back().size();
        if (total > (uint64_t{1} << 40))
            total = uint64_t{1} << 40;
    }
    const uint64_t count = std::min<uint64_t>(total, cap);
    std::vector<TestVector> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; ++i)
    {
        uint64_t idx = count == total ? i : i * total / count;
        TestVector tv;
        tv.values.resize(per.size());
        for (size_t k = per.size(); k-- > 0;)
        {
            tv.values[k] = per[k][idx % per[k].size()];
            idx /= per[k].size();
        }
        out.push_back(std::move(tv));
    }
    return out;
}

std::vector<TestVector> random_vectors(std::span<const unsigned> widths, size_t n, uint64_t seed)
{
    std::mt19937_64 rng{seed};
    std::vector<TestVector> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i)
    {
        TestVector tv;
        for (const auto w : widths)
            tv.values.push_back(rng() & mask_for(w));
        out.push_back(std::move(tv));
    }
    return out;
}

Verdict verify_testing(const DfGraph& lhs, const DfGraph& rhs, size_t n_random, uint64_t seed)
{
    const auto widths = input_widths(lhs);
    uint64_t checked = 0;
    auto check = [&](const TestVector& tv) {
        ++checked;
        return eval_node(lhs, lhs.result(), tv) == eval_node(rhs, rhs.result(), tv);
    };
    for (const auto& tv : corner_vectors(widths))
        if (!check(tv))
            return Verdict::refuted(tv);
    for (const auto& tv : random_vectors(widths, n_random, seed))
        if (!check(tv))
            return Verdict::refuted(tv);
    return Verdict::passed(checked);
}

std::string emit_smt(const DfGraph& lhs, const DfGraph& rhs)
{
    std::vector<std::string> decls;
    std::string body;
    auto [l, lets_l] = smt_writer{lhs, 'l', decls}.encode(body, true);
    auto [r, lets_r] = smt_writer{rhs, 'r', decls}.encode(body, false);

    std::ostringstream os;
    os << "(set-logic QF_BV)\n";
    for (const auto id : eval_inputs(lhs))
    {
        const auto& n = lhs.nodes[id];
        if (n.kind != node_kind::var)
            continue;
        const auto name = n.origin.k == Source::kind::param ? "in" + std::to_string(n.origin.index)
                                                            : "v" + std::to_string(id);
        os << "(declare-const " << name << " (_ BitVec " << unsigned{n.width} << "))\n";
    }
    for (const auto& d : decls)
        os << d << '\n';
    os << "(assert " << body << "(distinct " << l << ' ' << r << ')'
       << std::string(lets_l + lets_r, ')') << ")\n";
    os << "(check-sat)\n";
    return os.str();
}

Verdict verify_smt(const DfGraph& lhs, const DfGraph& rhs, const SolverConfig& sc)
{
    if (sc.timeout.count() <= 0)
        return Verdict::unknown("timeout");
    std::string query;
    try
    {
        query = emit_smt(lhs, rhs) + "(get-model)\n";
    }
    catch (const smt_error& e)
    {
        return Verdict::unknown(e.what());
    }

    const auto secs = (sc.timeout.count() + 999) / 1000;
    std::string command = sc.command;
    for (auto pos = command.find("{timeout}"); pos != std::string::npos;
         pos = command.find("{timeout}", pos))
        command.replace(pos, 9, std::to_string(secs));

    if (sc.debug_log)
        sc.debug_log("smt query:\n" + query);
    const auto res = run_shell(command, query, sc.timeout + std::chrono::milliseconds{1000});
    if (sc.debug_log)
        sc.debug_log("smt answer:\n" + res.out);
    if (!res.spawned)
        return Verdict::unknown("SolverSpawnFailure");
    if (res.timed_out)
        return Verdict::unknown("timeout");

    const auto answer = first_token(res.out);
    if (answer == "unsat")
        return Verdict::proven();
    if (answer == "unknown" || answer == "timeout")
        return Verdict::unknown("solver returned " + answer);
    if (answer != "sat")
        return Verdict::unknown("SolverProtocolError: unexpected answer");

    const auto model = parse_model(std::string_view{res.out}.substr(res.out.find("sat") + 3));
    if (!model)
        return Verdict::unknown("SolverProtocolError: unparseable model");
    const auto widths = input_widths(lhs);
    TestVector tv;
    tv.values.assign(widths.size(), 0);
    // Params are the first nodes of an expression graph, so param k is input k.
    for (const auto& [index, value] : *model)
        if (index < tv.values.size())
            tv.values[index] = value & mask_for(widths[index]);
    try
    {
        if (eval_node(lhs, lhs.result(), tv) != eval_node(rhs, rhs.result(), tv))
            return Verdict::refuted(std::move(tv));
    }
    catch (const eval_error& e)
    {
        return Verdict::unknown(std::string{"model recheck failed: "} + e.what());
    }
    return Verdict::unknown("model recheck failed");
}

std::optional<DfGraph> reparameterize(const DfGraph& g, unsigned width)
{
    DfGraph out = g;
    for (auto& n : out.nodes)
    {
        if (n.op == op_tag::extend_s || n.op == op_tag::extend_u || n.op == op_tag::wrap)
            return std::nullopt;
        const unsigned old = n.width;
        if (n.kind == node_kind::constant)
        {
            const uint64_t v = n.value;
            const uint64_t om = mask_for(old);
            const uint64_t omin = uint64_t{1} << (old - 1);
            uint64_t nv;
            if (v == 0 || v == 1)
                nv = v;
            else if (v == om)
                nv = mask_for(width);
            else if (v == omin)
                nv = uint64_t{1} << (width - 1);
            else if (v == omin - 1)
                nv = (uint64_t{1} << (width - 1)) - 1;
            else if (v == old - 1)
                nv = width - 1;
            else
                nv = v & mask_for(width);
            n.value = nv;
        }
        n.width = static_cast<uint8_t>(width);
    }
    return out;
}
}  // namespace wsopt
