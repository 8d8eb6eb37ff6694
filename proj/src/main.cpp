// SPDX-License-Identifier: MIT
// racemon command line front end: run detectors/oracles, diff reports,
// benchmark a corpus, generate traces.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "racemon/detect.h"
#include "racemon/hb.h"
#include "racemon/oracle.h"
#include "racemon/report.h"
#include "racemon/sp.h"
#include "racemon/trace.h"
#include "racemon/tracegen.h"

namespace rm = racemon;

namespace {

constexpr int kExitNoRace = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;
constexpr int kExitRace = 3;
constexpr int kExitDiff = 4;

bool read_file(const std::string& path, std::string& out, std::string& err) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        out = ss.str();
        return true;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err = "cannot open " + path;
        return false;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

bool write_output(const std::string& path, const std::string& text, std::string& err) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return true;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        err = "cannot write " + path;
        return false;
    }
    out << text;
    out.flush();
    return out.good();
}

int input_error(const rm::WfReport& err) {
    std::fprintf(stderr, "input error: %s", err.message.c_str());
    if (err.line >= 0) std::fprintf(stderr, " (line %lld)", (long long)err.line);
    if (err.index >= 0) std::fprintf(stderr, " (event %lld)", (long long)err.index);
    std::fprintf(stderr, "\n");
    return kExitInput;
}

bool env_assert_enabled() {
    const char* v = std::getenv("RACE_MON_ASSERT");
    return v != nullptr && std::string(v) == "1";
}

// "100%" resolves to the trace length; plain integers pass through.
bool parse_window(const std::string& text, int64_t length, int64_t& w, std::string& err) {
    if (text == "100%") {
        w = length;
        return true;
    }
    try {
        size_t pos = 0;
        w = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        err = "bad window '" + text + "' (expected an integer or 100%)";
        return false;
    }
    return true;
}

bool is_short_algo(const std::string& algo) {
    return algo == "short-ft" || algo == "short-syncp";
}

bool is_oracle_algo(const std::string& algo) {
    return algo == "oracle-hb" || algo == "oracle-sp";
}

struct RunOpts {
    std::string algo = "ft";
    std::string window;  // empty = unset
    std::string input = "-";
    std::string output = "-";
    std::string format = "json";
    std::string granularity = "pairs";
    std::string candidates = "complete";
    bool first_race = false;
    bool stats = false;
};

rm::DetectOptions make_detect_options(const RunOpts& o) {
    rm::DetectOptions opt;
    if (o.granularity == "vars")
        opt.granularity = rm::Granularity::Vars;
    else if (o.granularity == "decision")
        opt.granularity = rm::Granularity::Decision;
    opt.first_race = o.first_race;
    opt.assert_state = env_assert_enabled();
    opt.complete_candidates = o.candidates != "heads";
    return opt;
}

int emit_report(const rm::RaceReport& rep, const RunOpts& o, double wall_ms) {
    const std::string text = o.format == "csv" ? rm::to_csv(rep) : rm::to_json(rep);
    std::string err;
    if (!write_output(o.output, text, err)) {
        std::fprintf(stderr, "input error: %s\n", err.c_str());
        return kExitInput;
    }
    if (o.stats)
        std::fprintf(stderr,
                     "stats: events=%lld races=%lld racy_vars=%zu peak_clocks=%lld "
                     "peak_records=%lld wall_ms=%.2f\n",
                     (long long)rep.counters.events, (long long)rep.counters.races,
                     rep.racy_vars.size(), (long long)rep.counters.peak_clocks,
                     (long long)rep.counters.peak_records, wall_ms);
    return rep.decision ? kExitRace : kExitNoRace;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// stdin with a fixed numeric window: feed the detector line by line without
// holding the trace. Well-formedness and the content hash still cover every
// line, even after a short-circuited detector stops consuming.
int run_streaming(const std::string& algo, int64_t w, const rm::DetectOptions& opt,
                  const RunOpts& o) {
    std::unique_ptr<rm::Detector> det;
    if (algo == "ft")
        det = rm::make_hb_detector(opt);
    else if (algo == "short-ft")
        det = rm::make_short_hb_detector(w, opt);
    else
        det = rm::make_short_sp_detector(w, opt);

    const auto t0 = std::chrono::steady_clock::now();
    rm::WfChecker wf;
    rm::WfReport err;
    rm::Fnv1a64 hash;
    std::string line, buf;
    int64_t index = 0, lineno = 0;
    while (std::getline(std::cin, line)) {
        ++lineno;
        rm::Event ev;
        const int rc = rm::parse_event_line(line, lineno, det->names(), ev, err);
        if (rc < 0) return input_error(err);
        if (rc > 0) continue;
        if (!wf.step(ev, index, lineno, err)) return input_error(err);
        buf.clear();
        rm::serialize_event(det->names(), ev, buf);
        hash.update(buf.data(), buf.size());
        if (!det->done()) det->step(ev, index);
        ++index;
    }
    rm::RaceReport rep = det->finish();
    rep.trace_hash = hash.digest();
    return emit_report(rep, o, ms_since(t0));
}

int do_run(const RunOpts& o) {
    const rm::DetectOptions opt = make_detect_options(o);

    if (is_short_algo(o.algo) && o.window.empty()) {
        std::fprintf(stderr, "input error: %s requires --window\n", o.algo.c_str());
        return kExitInput;
    }
    if (is_oracle_algo(o.algo) && o.input == "-") {
        std::fprintf(stderr, "input error: %s needs a trace file, not stdin\n",
                     o.algo.c_str());
        return kExitInput;
    }

    // Only a fixed numeric window can run before the trace length is known.
    if (o.input == "-" && !is_oracle_algo(o.algo) && o.algo != "syncp" &&
        o.window != "100%") {
        int64_t w = 0;
        if (is_short_algo(o.algo)) {
            std::string werr;
            if (!parse_window(o.window, 0, w, werr)) {
                std::fprintf(stderr, "input error: %s\n", werr.c_str());
                return kExitInput;
            }
            if (w < 2) {
                std::fprintf(stderr, "input error: window must be >= 2\n");
                return kExitInput;
            }
        }
        return run_streaming(o.algo, w, opt, o);
    }

    std::string text, ferr;
    if (!read_file(o.input, text, ferr)) {
        std::fprintf(stderr, "input error: %s\n", ferr.c_str());
        return kExitInput;
    }
    rm::Trace tr;
    rm::WfReport err;
    if (!rm::parse_trace(text, tr, err)) return input_error(err);
    err = rm::check_well_formed(tr);
    if (!err.ok) return input_error(err);

    int64_t w = 0;
    if (!o.window.empty()) {
        std::string werr;
        if (!parse_window(o.window, tr.size(), w, werr)) {
            std::fprintf(stderr, "input error: %s\n", werr.c_str());
            return kExitInput;
        }
        if (is_short_algo(o.algo)) {
            if (o.window == "100%") w = std::max<int64_t>(w, 2);
            if (w < 2) {
                std::fprintf(stderr, "input error: window must be >= 2\n");
                return kExitInput;
            }
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    rm::RaceReport rep;
    if (o.algo == "ft")
        rep = rm::ft_run(tr, opt);
    else if (o.algo == "short-ft")
        rep = rm::sft_run(tr, w, opt);
    else if (o.algo == "syncp")
        rep = rm::syncp_run(tr, opt);
    else if (o.algo == "short-syncp")
        rep = rm::ssp_run(tr, w, opt);
    else if (o.algo == "oracle-hb")
        rep = rm::oracle_hb_report(tr, w);
    else
        rep = rm::oracle_sp_report(tr, w);
    return emit_report(rep, o, ms_since(t0));
}

struct DiffOpts {
    std::string a;
    std::string b;
    std::string window;
    std::string compare = "pairs";
};

bool load_report(const std::string& path, rm::RaceReport& rep) {
    std::string text, ferr;
    if (!read_file(path, text, ferr)) {
        std::fprintf(stderr, "input error: %s\n", ferr.c_str());
        return false;
    }
    std::string jerr;
    if (!rm::from_json(text, rep, jerr)) {
        std::fprintf(stderr, "input error: %s: %s\n", path.c_str(), jerr.c_str());
        return false;
    }
    return true;
}

int do_diff(const DiffOpts& o) {
    rm::RaceReport a, b;
    if (!load_report(o.a, a) || !load_report(o.b, b)) return kExitInput;
    if (a.trace_hash != b.trace_hash) {
        std::fprintf(stderr, "input error: trace hash mismatch (%llu vs %llu)\n",
                     (unsigned long long)a.trace_hash, (unsigned long long)b.trace_hash);
        return kExitInput;
    }

    int64_t w = 0;
    if (!o.window.empty()) {
        std::string werr;
        if (!parse_window(o.window, 0, w, werr) || w < 1) {
            std::fprintf(stderr, "input error: diff --window takes a positive integer\n");
            return kExitInput;
        }
    }

    const auto pa = w > 0 ? rm::filter_span(a.pairs, w) : a.pairs;
    const auto pb = w > 0 ? rm::filter_span(b.pairs, w) : b.pairs;
    const bool da = w > 0 ? !pa.empty() : a.decision;
    const bool db = w > 0 ? !pb.empty() : b.decision;

    if (da != db) {
        std::printf("disagree: decision %s vs %s\n", da ? "race" : "no-race",
                    db ? "race" : "no-race");
        return kExitDiff;
    }

    if (o.compare == "vars" || o.compare == "pairs") {
        std::set<std::string> va, vb;
        if (w > 0) {
            for (const auto& p : pa) va.insert(p.var);
            for (const auto& p : pb) vb.insert(p.var);
        } else {
            va.insert(a.racy_vars.begin(), a.racy_vars.end());
            vb.insert(b.racy_vars.begin(), b.racy_vars.end());
        }
        for (const auto& v : va)
            if (!vb.count(v)) {
                std::printf("disagree: var %s only in %s\n", v.c_str(), o.a.c_str());
                return kExitDiff;
            }
        for (const auto& v : vb)
            if (!va.count(v)) {
                std::printf("disagree: var %s only in %s\n", v.c_str(), o.b.c_str());
                return kExitDiff;
            }
    }

    size_t npairs = 0;
    if (o.compare == "pairs") {
        using Key = std::tuple<int64_t, int64_t, std::string>;
        std::set<Key> sa, sb;
        for (const auto& p : pa) sa.insert({p.i, p.j, p.var});
        for (const auto& p : pb) sb.insert({p.i, p.j, p.var});
        for (const auto& k : sa)
            if (!sb.count(k)) {
                std::printf("disagree: pair (%lld, %lld) on %s only in %s\n",
                            (long long)std::get<0>(k), (long long)std::get<1>(k),
                            std::get<2>(k).c_str(), o.a.c_str());
                return kExitDiff;
            }
        for (const auto& k : sb)
            if (!sa.count(k)) {
                std::printf("disagree: pair (%lld, %lld) on %s only in %s\n",
                            (long long)std::get<0>(k), (long long)std::get<1>(k),
                            std::get<2>(k).c_str(), o.b.c_str());
                return kExitDiff;
            }
        npairs = sa.size();
    }

    std::printf("agree: decision=%s pairs=%zu\n", da ? "race" : "no-race", npairs);
    return kExitNoRace;
}

struct BenchOpts {
    std::string dir;
    std::vector<std::string> configs;
    std::string output = "-";
};

int do_bench(const BenchOpts& o) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(o.dir, ec)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (!name.empty() && name[0] != '.') files.push_back(entry.path().string());
    }
    if (ec) {
        std::fprintf(stderr, "input error: cannot read directory %s\n", o.dir.c_str());
        return kExitInput;
    }
    std::sort(files.begin(), files.end());

    std::string csv = "trace,algo,window,n,events,coverage,races,racy_vars,wall_ms,"
                      "peak_records,status\n";
    char row[512];
    for (const auto& path : files) {
        const std::string base = fs::path(path).filename().string();
        std::string text, ferr;
        rm::Trace tr;
        rm::WfReport perr;
        const bool loaded = read_file(path, text, ferr) && rm::parse_trace(text, tr, perr) &&
                            (perr = rm::check_well_formed(tr), perr.ok);
        for (const auto& cfg : o.configs) {
            std::string algo = cfg, wtext;
            if (const auto c = cfg.find(':'); c != std::string::npos) {
                algo = cfg.substr(0, c);
                wtext = cfg.substr(c + 1);
            }
            if (!loaded) {
                std::snprintf(row, sizeof row, "%s,%s,%s,0,0,0,0,0,0,0,load_error\n",
                              base.c_str(), algo.c_str(), wtext.c_str());
                csv += row;
                continue;
            }
            int64_t w = 0;
            std::string werr;
            const bool wok = wtext.empty() || parse_window(wtext, tr.size(), w, werr);
            if (!wok || (is_short_algo(algo) && (wtext.empty() || std::max<int64_t>(w, 2) < 2))) {
                std::snprintf(row, sizeof row, "%s,%s,%s,%lld,0,0,0,0,0,0,config_error\n",
                              base.c_str(), algo.c_str(), wtext.c_str(),
                              (long long)tr.size());
                csv += row;
                continue;
            }
            if (is_short_algo(algo)) w = std::max<int64_t>(w, 2);

            rm::DetectOptions opt;
            opt.assert_state = env_assert_enabled();
            rm::RaceReport rep;
            const char* status = "ok";
            const auto t0 = std::chrono::steady_clock::now();
            try {
                if (algo == "ft")
                    rep = rm::ft_run(tr, opt);
                else if (algo == "short-ft")
                    rep = rm::sft_run(tr, w, opt);
                else if (algo == "syncp")
                    rep = rm::syncp_run(tr, opt);
                else if (algo == "short-syncp")
                    rep = rm::ssp_run(tr, w, opt);
                else if (algo == "oracle-hb")
                    rep = rm::oracle_hb_report(tr, w);
                else if (algo == "oracle-sp")
                    rep = rm::oracle_sp_report(tr, w);
                else
                    status = "config_error";
            } catch (const rm::InternalError&) {
                status = "internal_error";
            }
            const double wall = ms_since(t0);
            const double cov =
                tr.size() > 0 ? (double)rep.counters.events / (double)tr.size() : 1.0;
            std::snprintf(row, sizeof row, "%s,%s,%s,%lld,%lld,%.4f,%lld,%zu,%.2f,%lld,%s\n",
                          base.c_str(), algo.c_str(), wtext.c_str(), (long long)tr.size(),
                          (long long)rep.counters.events, cov,
                          (long long)rep.counters.races, rep.racy_vars.size(), wall,
                          (long long)rep.counters.peak_records, status);
            csv += row;
        }
    }
    std::string werr;
    if (!write_output(o.output, csv, werr)) {
        std::fprintf(stderr, "input error: %s\n", werr.c_str());
        return kExitInput;
    }
    return kExitNoRace;
}

struct GenOpts {
    rm::GenParams p;
    int64_t plant_span = 0;
    int64_t noise = 0;
    uint64_t noise_seed = 1;
    std::string output = "-";
};

int do_gen(const GenOpts& o) {
    rm::Trace tr;
    int64_t pi = -1, pj = -1;
    if (o.plant_span > 0) {
        rm::PlantedRace planted = rm::plant_short_race(o.p, o.plant_span);
        tr = std::move(planted.trace);
        pi = planted.i;
        pj = planted.j;
    } else {
        tr = rm::gen_trace(o.p);
    }
    if (o.noise > 0) {
        tr = rm::add_noise_prefix(tr, o.noise, o.noise_seed);
        if (pi >= 0) {
            pi += o.noise;
            pj += o.noise;
        }
    }

    std::string text;
    if (pi >= 0) {
        char head[96];
        std::snprintf(head, sizeof head, "# planted i=%lld j=%lld span=%lld\n",
                      (long long)pi, (long long)pj, (long long)(pj - pi + 1));
        text = head;
    }
    text += rm::serialize(tr);
    std::string werr;
    if (!write_output(o.output, text, werr)) {
        std::fprintf(stderr, "input error: %s\n", werr.c_str());
        return kExitInput;
    }
    return kExitNoRace;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"racemon: window-bounded dynamic race detection over event traces"};
    app.require_subcommand(1);

    const std::vector<std::string> kAlgos = {"ft",          "short-ft",  "syncp",
                                             "short-syncp", "oracle-hb", "oracle-sp"};

    RunOpts run;
    CLI::App* c_run = app.add_subcommand("run", "Run a detector or oracle on one trace");
    c_run->add_option("input", run.input, "trace file, or - for stdin")
        ->capture_default_str();
    c_run->add_option("--algo", run.algo, "algorithm")
        ->check(CLI::IsMember(kAlgos))
        ->capture_default_str();
    c_run->add_option("--window", run.window,
                      "window size in events (integer >= 2, or 100% for the trace "
                      "length); required by short-*, span filter for oracles");
    c_run->add_option("--granularity", run.granularity, "report granularity")
        ->check(CLI::IsMember({"pairs", "vars", "decision"}))
        ->capture_default_str();
    c_run->add_flag("--first-race", run.first_race, "stop at the first reported pair");
    c_run->add_option("--candidates", run.candidates,
                      "sync-preserving candidate coverage per check")
        ->check(CLI::IsMember({"complete", "heads"}))
        ->capture_default_str();
    c_run->add_option("--format", run.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    c_run->add_option("-o,--output", run.output, "report path, - for stdout")
        ->capture_default_str();
    c_run->add_flag("--stats", run.stats, "print run statistics to stderr");

    RunOpts orun;
    CLI::App* c_oracle =
        app.add_subcommand("oracle", "Run a brute-force oracle on one trace");
    std::string oracle_kind = "hb";
    c_oracle->add_option("input", orun.input, "trace file (stdin not supported)")
        ->required();
    c_oracle->add_option("--kind", oracle_kind, "oracle kind")
        ->check(CLI::IsMember({"hb", "sp"}))
        ->capture_default_str();
    c_oracle->add_option("--window", orun.window, "span filter (integer or 100%)");
    c_oracle->add_option("--format", orun.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    c_oracle->add_option("-o,--output", orun.output, "report path, - for stdout")
        ->capture_default_str();
    c_oracle->add_flag("--stats", orun.stats, "print run statistics to stderr");

    DiffOpts diff;
    CLI::App* c_diff = app.add_subcommand("diff", "Compare two JSON race reports");
    c_diff->add_option("a", diff.a, "first report")->required();
    c_diff->add_option("b", diff.b, "second report")->required();
    c_diff->add_option("--window", diff.window, "filter both reports to span <= w");
    c_diff->add_option("--compare", diff.compare, "comparison depth")
        ->check(CLI::IsMember({"pairs", "vars", "decision"}))
        ->capture_default_str();

    BenchOpts bench;
    CLI::App* c_bench =
        app.add_subcommand("bench", "Run configurations over a trace directory");
    c_bench->add_option("dir", bench.dir, "directory of trace files")->required();
    c_bench
        ->add_option("--config", bench.configs,
                     "algo or algo:window, repeatable (e.g. short-ft:1000)")
        ->required()
        ->allow_extra_args(false);  // one value per flag, keep bare args positional
    c_bench->add_option("-o,--output", bench.output, "CSV path, - for stdout")
        ->capture_default_str();

    GenOpts gen;
    CLI::App* c_gen = app.add_subcommand("gen", "Generate a random well-formed trace");
    c_gen->add_option("--threads", gen.p.threads)->capture_default_str();
    c_gen->add_option("--vars", gen.p.vars)->capture_default_str();
    c_gen->add_option("--locks", gen.p.locks)->capture_default_str();
    c_gen->add_option("--length", gen.p.length)->capture_default_str();
    c_gen->add_option("--lock-density", gen.p.lock_density)->capture_default_str();
    c_gen->add_option("--read-bias", gen.p.read_bias)->capture_default_str();
    c_gen->add_option("--cs-mean", gen.p.cs_len_mean)->capture_default_str();
    c_gen->add_flag("--allow-dangling", gen.p.allow_dangling,
                    "permit locks still held at the end of the trace");
    c_gen->add_option("--seed", gen.p.seed)->capture_default_str();
    c_gen->add_option("--plant-span", gen.plant_span,
                      "plant one racy write pair at exactly this span");
    c_gen->add_option("--noise-prefix", gen.noise,
                      "prepend this many independent-thread events");
    c_gen->add_option("--noise-seed", gen.noise_seed)->capture_default_str();
    c_gen->add_option("-o,--output", gen.output, "trace path, - for stdout")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (*c_run) return do_run(run);
        if (*c_oracle) {
            orun.algo = oracle_kind == "hb" ? "oracle-hb" : "oracle-sp";
            return do_run(orun);
        }
        if (*c_diff) return do_diff(diff);
        if (*c_bench) return do_bench(bench);
        if (*c_gen) return do_gen(gen);
    } catch (const rm::InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitInput;
}
