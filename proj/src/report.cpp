// SPDX-License-Identifier: MIT
#include "racemon/report.h"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace racemon {

void canonicalize(RaceReport& rep) {
    std::sort(rep.pairs.begin(), rep.pairs.end(), [](const RacePair& a, const RacePair& b) {
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    rep.pairs.erase(std::unique(rep.pairs.begin(), rep.pairs.end()), rep.pairs.end());
    std::set<std::string> vars;
    for (const RacePair& p : rep.pairs) vars.insert(p.var);
    // A decision-only run may know racy vars without retaining pairs.
    for (const std::string& v : rep.racy_vars) vars.insert(v);
    rep.racy_vars.assign(vars.begin(), vars.end());
    rep.decision = rep.decision || !rep.pairs.empty();
    rep.counters.races = static_cast<int64_t>(rep.pairs.size());
}

std::string to_json(const RaceReport& rep) {
    nlohmann::ordered_json j;
    j["trace_hash"] = rep.trace_hash;
    j["algo"] = rep.algo;
    j["window"] = rep.window;
    j["decision"] = rep.decision;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const RacePair& p : rep.pairs) {
        nlohmann::ordered_json o;
        o["i"] = p.i;
        o["j"] = p.j;
        o["var"] = p.var;
        o["span"] = p.span();
        o["kinds"] = p.kinds;
        pairs.push_back(std::move(o));
    }
    j["pairs"] = std::move(pairs);
    j["racy_vars"] = rep.racy_vars;
    j["counters"] = {{"events", rep.counters.events},
                     {"races", rep.counters.races},
                     {"peak_clocks", rep.counters.peak_clocks},
                     {"peak_records", rep.counters.peak_records}};
    return j.dump(2) + "\n";
}

std::string to_csv(const RaceReport& rep) {
    std::string out;
    out += "# algo=" + rep.algo + " window=" + std::to_string(rep.window) +
           " trace_hash=" + std::to_string(rep.trace_hash) +
           " decision=" + (rep.decision ? std::string("1") : std::string("0")) + "\n";
    out += "i,j,var,kinds,span\n";
    for (const RacePair& p : rep.pairs)
        out += std::to_string(p.i) + "," + std::to_string(p.j) + "," + p.var + "," + p.kinds +
               "," + std::to_string(p.span()) + "\n";
    return out;
}

bool from_json(const std::string& text, RaceReport& rep, std::string& err) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        err = "not valid JSON";
        return false;
    }
    try {
        rep = RaceReport{};
        rep.trace_hash = j.at("trace_hash").get<uint64_t>();
        rep.algo = j.at("algo").get<std::string>();
        rep.window = j.at("window").get<int64_t>();
        rep.decision = j.at("decision").get<bool>();
        for (const auto& o : j.at("pairs")) {
            RacePair p;
            p.i = o.at("i").get<int64_t>();
            p.j = o.at("j").get<int64_t>();
            p.var = o.at("var").get<std::string>();
            p.kinds = o.value("kinds", "");
            rep.pairs.push_back(std::move(p));
        }
        rep.racy_vars = j.at("racy_vars").get<std::vector<std::string>>();
        if (j.contains("counters")) {
            const auto& c = j["counters"];
            rep.counters.events = c.value("events", int64_t{0});
            rep.counters.races = c.value("races", int64_t{0});
            rep.counters.peak_clocks = c.value("peak_clocks", int64_t{0});
            rep.counters.peak_records = c.value("peak_records", int64_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        err = e.what();
        return false;
    }
    return true;
}

}  // namespace racemon
