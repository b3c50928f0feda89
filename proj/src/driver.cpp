// wsopt: a superoptimizer for WebAssembly bytecode
// Copyright 2026 The wsopt Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wsopt/driver.hpp"
#include "wsopt/dataflow.hpp"
#include "wsopt/module_info.hpp"
#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace wsopt
{
namespace
{
using clock_type = std::chrono::steady_clock;
using json = nlohmann::json;

double ms_since(clock_type::time_point start)
{
    return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

std::string function_name(const ModuleInfo& info, uint32_t func_index)
{
    for (const auto& e : info.exports)
        if (e.kind == 0 && e.index == func_index)
            return e.name;
    return {};
}

bool is_interior(const DfNode& n) noexcept
{
    return !n.is_leaf() && n.kind != node_kind::constant;
}

struct function_result
{
    FunctionBody body;
    FunctionReport report;
    std::vector<ReplacementRecord> records;
};

ReplacementRecord make_record(uint32_t func, const Region& region, const Replacement& r)
{
    ReplacementRecord rec;
    rec.function = func;
    rec.region_begin = region.begin;
    rec.root = r.candidate.root;
    rec.lhs = expression_text(r.candidate.lhs, r.candidate.lhs.result());
    rec.rhs = expression_text(r.rhs, r.rhs.result());
    rec.lhs_cost = r.candidate.lhs_cost;
    rec.rhs_cost = r.rhs_cost;
    rec.engine = std::string{to_string(r.engine)};
    rec.verdict = to_string(r.verdict);
    rec.elapsed_ms = static_cast<double>(r.elapsed.count());
    return rec;
}

/// Chooses non-overlapping replacements, largest savings first (ties: smaller root).
std::vector<const Replacement*> select_greedy(const DfGraph& g,
    const std::vector<Replacement>& found)
{
    std::vector<const Replacement*> order;
    for (const auto& r : found)
        order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [](const Replacement* a, const Replacement* b) {
        const auto sa = a->candidate.lhs_cost - a->rhs_cost;
        const auto sb = b->candidate.lhs_cost - b->rhs_cost;
        if (sa != sb)
            return sa > sb;
        return a->candidate.root < b->candidate.root;
    });
    std::vector<bool> taken(g.nodes.size(), false);
    std::vector<const Replacement*> chosen;
    for (const auto* r : order)
    {
        bool overlaps = false;
        for (const auto id : r->candidate.cone)
            if (is_interior(g.nodes[id]) && taken[id])
                overlaps = true;
        if (overlaps)
            continue;
        for (const auto id : r->candidate.cone)
            if (is_interior(g.nodes[id]))
                taken[id] = true;
        chosen.push_back(r);
    }
    return chosen;
}

function_result optimize_function(Interpreter& interp, const ModuleInfo& info, uint32_t defined,
    const FunctionBody& body, const PipelineConfig& cfg, synth_mode mode, SynthCache* cache)
{
    const auto start = clock_type::now();
    const uint32_t func_index = info.imported_funcs + defined;
    function_result res;
    res.body = body;
    auto& rep = res.report;
    rep.index = func_index;
    rep.name = function_name(info, func_index);
    rep.instructions_before = count_instructions(body);
    rep.instructions_after = rep.instructions_before;

    auto finish = [&]() -> function_result {
        rep.elapsed_ms = ms_since(start);
        return std::move(res);
    };

    if (body.opaque)
    {
        rep.skipped = "opaque body";
        return finish();
    }

    // (1) Constant folding of pure zero-argument functions.
    if (auto folded = constfold_pure_function(interp, func_index, cfg.fold_fuel))
    {
        if (count_instructions(*folded) < rep.instructions_before)
        {
            res.body = std::move(*folded);
            rep.folded = true;
            rep.instructions_after = count_instructions(res.body);
            return finish();
        }
    }

    // (2) Lifting.
    const auto local_types = info.local_types(func_index, body);
    const auto& ft = info.func_type(func_index);
    std::vector<Region> regions;
    try
    {
        regions = lift_function(body, local_types, ft.results, &info);
    }
    catch (const lift_error& e)
    {
        rep.skipped = e.what();
        return finish();
    }

    LocalAllocator alloc{static_cast<uint32_t>(local_types.size())};
    const auto synth_cfg = cfg.synth_config(mode);
    std::vector<std::pair<const Region*, std::vector<Instruction>>> rewritten;

    for (const auto& region : regions)
    {
        // (3) Harvest, (4) synthesize.
        const auto candidates = harvest_candidates(region.graph);
        rep.candidates_found += candidates.size();
        std::vector<Replacement> found;
        for (const auto& c : candidates)
        {
            auto r = best_replacement(c, synth_cfg, cache);
            if (r.replacement && r.replacement->rhs_cost < c.lhs_cost &&
                r.replacement->verdict.accepted(cfg.probabilistic))
                found.push_back(std::move(*r.replacement));
        }
        rep.replacements_proven += found.size();
        if (found.empty())
            continue;

        // (5) Greedy non-overlapping application.
        const auto chosen = select_greedy(region.graph, found);
        std::vector<Rewrite> rewrites;
        for (const auto* r : chosen)
            rewrites.push_back({r->candidate.root, r->rhs, r->candidate.input_vars});
        const auto first_record = res.records.size();
        for (const auto* r : chosen)
            res.records.push_back(make_record(func_index, region, *r));

        // (6) Lowering, with a region-level length check.
        auto trial = alloc;
        std::vector<Instruction> code;
        bool keep = false;
        try
        {
            const auto g = substitute_all(region.graph, rewrites);
            code = lower_graph(g, trial);
            keep = code.size() < region.end - region.begin;
        }
        catch (const lower_error&)
        {
            keep = false;
        }
        for (size_t i = first_record; i < res.records.size(); ++i)
        {
            res.records[i].applied = keep;
            res.records[i].discarded = !keep;
        }
        if (keep)
        {
            alloc = trial;
            rewritten.emplace_back(&region, std::move(code));
            rep.replacements_applied += chosen.size();
        }
        else
            rep.replacements_discarded += chosen.size();
    }

    if (rewritten.empty())
        return finish();

    FunctionBody out;
    out.locals = body.locals;
    for (const auto& d : alloc.extra_locals())
        out.locals.push_back(d);
    size_t pc = 0;
    for (const auto& [region, code] : rewritten)
    {
        out.instrs.insert(out.instrs.end(), body.instrs.begin() + static_cast<std::ptrdiff_t>(pc),
            body.instrs.begin() + static_cast<std::ptrdiff_t>(region->begin));
        out.instrs.insert(out.instrs.end(), code.begin(), code.end());
        pc = region->end;
    }
    out.instrs.insert(out.instrs.end(), body.instrs.begin() + static_cast<std::ptrdiff_t>(pc),
        body.instrs.end());

    // (7) Guard: never keep a function that did not get strictly smaller.
    const auto after = count_instructions(out);
    if (after >= rep.instructions_before)
    {
        for (auto& r : res.records)
        {
            if (r.applied)
            {
                r.applied = false;
                r.discarded = true;
            }
        }
        rep.replacements_discarded += rep.replacements_applied;
        rep.replacements_applied = 0;
        return finish();
    }
    res.body = std::move(out);
    rep.instructions_after = after;
    return finish();
}

json function_json(const FunctionReport& f, bool with_timing)
{
    json j{{"index", f.index}, {"name", f.name}, {"instructions_before", f.instructions_before},
        {"instructions_after", f.instructions_after}, {"candidates_found", f.candidates_found},
        {"replacements_proven", f.replacements_proven},
        {"replacements_applied", f.replacements_applied},
        {"replacements_discarded", f.replacements_discarded}, {"folded", f.folded}};
    if (!f.skipped.empty())
        j["skipped"] = f.skipped;
    if (with_timing)
        j["elapsed_ms"] = f.elapsed_ms;
    return j;
}

json replacement_json(const ReplacementRecord& r, bool with_timing)
{
    json j{{"function", r.function}, {"region", r.region_begin}, {"root", r.root},
        {"lhs", r.lhs}, {"rhs", r.rhs}, {"lhs_cost", r.lhs_cost}, {"rhs_cost", r.rhs_cost},
        {"engine", r.engine}, {"verdict", r.verdict}, {"applied", r.applied},
        {"discarded", r.discarded}};
    if (with_timing)
        j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

bool better(const Report& a, const Report& b)
{
    if (a.instructions_after != b.instructions_after)
        return a.instructions_after < b.instructions_after;
    return a.applied() < b.applied();
}

uint64_t to_param_value(const json& v)
{
    if (v.is_number_unsigned())
        return v.get<uint64_t>();
    if (v.is_number_integer())
        return static_cast<uint64_t>(v.get<int64_t>());
    if (v.is_string())
    {
        const auto s = v.get<std::string>();
        return s.rfind('-', 0) == 0 ? static_cast<uint64_t>(std::stoll(s, nullptr, 0))
                                    : std::stoull(s, nullptr, 0);
    }
    throw std::invalid_argument("test values must be integers");
}

bytes read_file(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    return bytes{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}
}  // namespace

void PipelineConfig::validate() const
{
    if (modes.empty())
        throw config_error("no synthesis mode selected");
    if (!solver && !probabilistic)
        throw config_error(
            "no SMT solver configured: pass --solver or set WSOPT_SOLVER, or use --probabilistic "
            "to accept testing-only verification");
}

SynthConfig PipelineConfig::synth_config(synth_mode mode) const
{
    auto s = SynthConfig::for_mode(mode);
    s.timeout = timeout;
    s.seed = seed;
    s.probabilistic = probabilistic;
    s.solver = solver;
    s.work_budget = work_budget;
    return s;
}

std::string PipelineConfig::id() const
{
    std::string s;
    for (const auto m : modes)
    {
        if (!s.empty())
            s += '+';
        s += to_string(m);
    }
    return s;
}

uint64_t Report::applied() const noexcept
{
    uint64_t n = 0;
    for (const auto& f : functions)
        n += f.replacements_applied;
    return n;
}

uint64_t Report::proven() const noexcept
{
    uint64_t n = 0;
    for (const auto& f : functions)
        n += f.replacements_proven;
    return n;
}

uint64_t Report::discarded() const noexcept
{
    uint64_t n = 0;
    for (const auto& f : functions)
        n += f.replacements_discarded;
    return n;
}

uint64_t Report::candidates() const noexcept
{
    uint64_t n = 0;
    for (const auto& f : functions)
        n += f.candidates_found;
    return n;
}

nlohmann::json Report::to_json(bool with_timing) const
{
    json j;
    j["run"] = {{"config", config}, {"seed", seed}, {"solver", solver},
        {"probabilistic", probabilistic}};
    j["module"] = {{"name", module}, {"code_section_bytes_before", code_section_bytes_before},
        {"code_section_bytes_after", code_section_bytes_after},
        {"instructions_before", instructions_before}, {"instructions_after", instructions_after},
        {"relative_size", relative_size}, {"candidates_found", candidates()},
        {"replacements_proven", proven()}, {"replacements_applied", applied()},
        {"replacements_discarded", discarded()}};
    if (with_timing)
        j["module"]["elapsed_ms"] = elapsed_ms;
    j["functions"] = json::array();
    for (const auto& f : functions)
        j["functions"].push_back(function_json(f, with_timing));
    j["replacements"] = json::array();
    for (const auto& r : replacements)
        j["replacements"].push_back(replacement_json(r, with_timing));
    return j;
}

OptimizeResult superoptimize_module(const WasmModule& m, const PipelineConfig& cfg,
    synth_mode mode, SynthCache* cache)
{
    const auto start = clock_type::now();
    OptimizeResult res;
    res.module = m;
    auto& rep = res.report;
    rep.config = std::string{to_string(mode)};
    rep.seed = cfg.seed;
    rep.solver = cfg.solver ? cfg.solver->command : std::string{};
    rep.probabilistic = cfg.probabilistic;
    rep.code_section_bytes_before = code_section_size(m);
    rep.instructions_before = count_instructions(m);

    const auto info = read_module_info(m);
    Interpreter interp{m, info};
    if (auto* code = res.module.code())
    {
        const auto* original = m.code();
        for (uint32_t i = 0; i < original->size(); ++i)
        {
            auto fr = optimize_function(interp, info, i, (*original)[i], cfg, mode, cache);
            if (fr.report.instructions_after < fr.report.instructions_before)
                (*code)[i] = std::move(fr.body);
            rep.functions.push_back(std::move(fr.report));
            for (auto& r : fr.records)
                rep.replacements.push_back(std::move(r));
        }
    }
    rep.code_section_bytes_after = code_section_size(res.module);
    rep.instructions_after = count_instructions(res.module);
    rep.relative_size = rep.instructions_before == 0
                            ? 1.0
                            : static_cast<double>(rep.instructions_after) /
                                  static_cast<double>(rep.instructions_before);
    rep.elapsed_ms = ms_since(start);
    return res;
}

OptimizeResult superoptimize_module(const WasmModule& m, const PipelineConfig& cfg,
    SynthCache* cache)
{
    cfg.validate();
    std::optional<OptimizeResult> best;
    for (const auto mode : cfg.modes)
    {
        auto r = superoptimize_module(m, cfg, mode, cache);
        if (!best || better(r.report, best->report))
            best = std::move(r);
    }
    return std::move(*best);
}

std::vector<CorpusTest> parse_tests(const nlohmann::json& j)
{
    std::vector<CorpusTest> out;
    const auto& tests = j.contains("tests") ? j.at("tests") : j;
    for (const auto& t : tests)
    {
        CorpusTest ct;
        ct.export_name = t.at("export").get<std::string>();
        for (const auto& a : t.value("args", json::array()))
            ct.args.push_back(to_param_value(a));
        if (t.contains("expect"))
        {
            std::vector<uint64_t> values;
            for (const auto& v : t.at("expect"))
                values.push_back(to_param_value(v));
            ct.expect = std::move(values);
        }
        if (t.contains("trap"))
            ct.trap = t.at("trap").get<std::string>();
        out.push_back(std::move(ct));
    }
    return out;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir,
    std::vector<std::string>* errors)
{
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("corpus directory not found: " + dir.string());
    for (const auto& e : std::filesystem::directory_iterator{dir})
        if (e.is_regular_file() && e.path().extension() == ".wasm")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<CorpusEntry> out;
    for (const auto& p : files)
    {
        try
        {
            CorpusEntry entry;
            entry.name = p.stem().string();
            entry.wasm = read_file(p);
            auto test_path = p;
            test_path.replace_extension(".json");
            if (std::filesystem::exists(test_path))
            {
                std::ifstream in{test_path};
                const auto j = json::parse(in);
                entry.description = j.value("description", "");
                entry.tests = parse_tests(j);
            }
            out.push_back(std::move(entry));
        }
        catch (const std::exception& e)
        {
            if (errors)
                errors->push_back(p.filename().string() + ": " + e.what());
        }
    }
    return out;
}

std::string_view to_string(TestResult::status s) noexcept
{
    switch (s)
    {
    case TestResult::status::pass:
        return "pass";
    case TestResult::status::fail:
        return "fail";
    case TestResult::status::skipped:
        return "skipped";
    }
    return "?";
}

std::vector<TestResult> differential_check(const WasmModule& original,
    const WasmModule& optimized, const std::vector<CorpusTest>& tests, uint64_t fuel)
{
    Interpreter a{original};
    Interpreter b{optimized};
    std::vector<TestResult> out;
    for (const auto& t : tests)
    {
        TestResult r;
        r.name = t.export_name;
        const auto fa = a.info().find_export(t.export_name);
        const auto fb = b.info().find_export(t.export_name);
        if (!fa || !fb)
        {
            r.s = TestResult::status::fail;
            r.detail = "export not found";
            out.push_back(std::move(r));
            continue;
        }
        std::vector<uint64_t> args = t.args;
        const auto& params = a.info().func_type(*fa).params;
        for (size_t i = 0; i < args.size() && i < params.size(); ++i)
            if (params[i] == valtype::i32)
                args[i] &= 0xffffffffu;
        const auto oa = a.run(*fa, args, fuel);
        const auto ob = b.run(*fb, args, fuel);
        if (oa.t == Outcome::tag::unsupported || ob.t == Outcome::tag::unsupported)
        {
            r.s = TestResult::status::skipped;
            r.detail = to_string(oa.t == Outcome::tag::unsupported ? oa : ob);
        }
        else if (!(oa == ob))
        {
            r.s = TestResult::status::fail;
            r.detail = to_string(oa) + " vs " + to_string(ob);
        }
        else if (t.expect && (oa.t != Outcome::tag::returned || oa.values != *t.expect))
        {
            r.s = TestResult::status::fail;
            r.detail = "unexpected " + to_string(oa);
        }
        else if (t.trap && (oa.t != Outcome::tag::trapped || oa.detail != *t.trap))
        {
            r.s = TestResult::status::fail;
            r.detail = "expected trap " + *t.trap + ", got " + to_string(oa);
        }
        else
            r.detail = to_string(oa);
        out.push_back(std::move(r));
    }
    return out;
}

namespace
{
struct entry_result
{
    std::optional<CorpusRow> row;
    std::string error;
};

entry_result run_entry(const CorpusEntry& entry, const PipelineConfig& cfg, SynthCache& cache)
{
    WasmModule m;
    try
    {
        m = decode_module(entry.wasm);
    }
    catch (const std::exception& e)
    {
        return {std::nullopt, entry.name + ": " + e.what()};
    }
    CorpusRow row;
    row.name = entry.name;
    std::optional<Report> best;
    for (const auto mode : cfg.modes)
    {
        auto r = superoptimize_module(m, cfg, mode, &cache);
        r.report.module = entry.name;
        for (const auto& f : r.report.functions)
            if (f.instructions_after > f.instructions_before)
                ++row.regressions;
        for (const auto& t : differential_check(m, r.module, entry.tests, cfg.fold_fuel))
        {
            switch (t.s)
            {
            case TestResult::status::pass:
                ++row.tests_passed;
                break;
            case TestResult::status::fail:
                ++row.tests_failed;
                break;
            case TestResult::status::skipped:
                ++row.tests_skipped;
                break;
            }
        }
        if (!best || better(r.report, *best))
            best = r.report;
        row.per_config.push_back(std::move(r.report));
    }
    row.best_config = best->config;
    row.instructions_before = best->instructions_before;
    row.instructions_after = best->instructions_after;
    row.relative_size = best->relative_size;
    row.applied = best->applied();
    for (const auto& f : best->functions)
        row.folded = row.folded || f.folded;
    return {std::move(row), {}};
}
}  // namespace

CorpusReport run_corpus(const std::vector<CorpusEntry>& entries, const PipelineConfig& cfg)
{
    cfg.validate();
    SynthCache cache;
    std::vector<entry_result> results(entries.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < entries.size(); i = next++)
            results[i] = run_entry(entries[i], cfg, cache);
    };
    const auto n_workers = std::clamp<size_t>(std::thread::hardware_concurrency(), 1, 8);
    std::vector<std::thread> pool;
    for (size_t i = 1; i < std::min(n_workers, entries.size()); ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    CorpusReport rep;
    for (auto& r : results)
    {
        if (!r.row)
        {
            rep.errors.push_back(std::move(r.error));
            continue;
        }
        auto& row = *r.row;
        if (row.instructions_after < row.instructions_before)
            ++rep.improved;
        if (row.regressions > 0 || row.instructions_after > row.instructions_before)
            ++rep.regressed;
        rep.rows.push_back(std::move(row));
    }
    std::vector<double> reductions;
    for (const auto& r : rep.rows)
        reductions.push_back(1.0 - r.relative_size);
    if (!reductions.empty())
    {
        std::sort(reductions.begin(), reductions.end());
        const auto n = reductions.size();
        rep.median_relative_reduction =
            n % 2 ? reductions[n / 2] : (reductions[n / 2 - 1] + reductions[n / 2]) / 2;
    }
    return rep;
}

CorpusReport run_corpus(const std::filesystem::path& dir, const PipelineConfig& cfg)
{
    std::vector<std::string> errors;
    const auto entries = load_corpus(dir, &errors);
    auto rep = run_corpus(entries, cfg);
    rep.errors.insert(rep.errors.begin(), errors.begin(), errors.end());
    return rep;
}

nlohmann::json CorpusReport::to_json(bool with_timing) const
{
    json j;
    j["entries"] = json::array();
    for (const auto& r : rows)
    {
        json row{{"name", r.name}, {"best_config", r.best_config},
            {"instructions_before", r.instructions_before},
            {"instructions_after", r.instructions_after}, {"relative_size", r.relative_size},
            {"replacements_applied", r.applied}, {"folded", r.folded},
            {"tests", {{"pass", r.tests_passed}, {"fail", r.tests_failed},
                          {"skipped", r.tests_skipped}}},
            {"regressions", r.regressions}};
        row["configs"] = json::array();
        for (const auto& c : r.per_config)
            row["configs"].push_back(c.to_json(with_timing));
        j["entries"].push_back(std::move(row));
    }
    j["improved"] = improved;
    j["regressed"] = regressed;
    j["median_relative_reduction"] = median_relative_reduction;
    j["errors"] = errors;
    return j;
}

std::string CorpusReport::table() const
{
    std::ostringstream os;
    os << std::left << std::setw(20) << "program" << std::setw(14) << "best config"
       << std::right << std::setw(8) << "before" << std::setw(8) << "after" << std::setw(10)
       << "relative" << std::setw(16) << "tests p/f/s" << '\n';
    for (const auto& r : rows)
    {
        std::ostringstream tests;
        tests << r.tests_passed << '/' << r.tests_failed << '/' << r.tests_skipped;
        os << std::left << std::setw(20) << r.name << std::setw(14) << r.best_config
           << std::right << std::setw(8) << r.instructions_before << std::setw(8)
           << r.instructions_after << std::setw(10) << std::fixed << std::setprecision(4)
           << r.relative_size << std::setw(16) << tests.str() << '\n';
    }
    os << "improved: " << improved << " of " << rows.size() << ", regressed: " << regressed
       << ", median reduction: " << std::fixed << std::setprecision(4)
       << median_relative_reduction << '\n';
    for (const auto& e : errors)
        os << "error: " << e << '\n';
    return os.str();
}

std::string dump_module_ir(const WasmModule& m)
{
    std::ostringstream os;
    const auto info = read_module_info(m);
    const auto* code = m.code();
    if (!code)
        return {};
    for (uint32_t i = 0; i < code->size(); ++i)
    {
        const auto func = info.imported_funcs + i;
        const auto& body = (*code)[i];
        os << "; function " << func;
        const auto name = function_name(info, func);
        if (!name.empty())
            os << " (" << name << ')';
        os << '\n';
        if (body.opaque)
        {
            os << ";   opaque body\n";
            continue;
        }
        try
        {
            const auto regions =
                lift_function(body, info.local_types(func, body), info.func_type(func).results, &info);
            for (const auto& r : regions)
            {
                os << "; region [" << r.begin << ", " << r.end << ")\n";
                os << dump(r.graph);
            }
        }
        catch (const lift_error& e)
        {
            os << ";   not lifted: " << e.what() << '\n';
        }
    }
    return os.str();
}
}  // namespace wsopt
