#pragma once

#include "wfdsim/peer_state.hpp"
#include "wfdsim/sim_time.hpp"
#include "wfdsim/trace.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace wfd {

struct ValidateOptions {
    SimTime ack_timeout = SimTime::from_ms(2);
    int max_retries = 3;
};

struct Violation {
    std::string check;  // "ACK pairing", "single GO", ...
    std::size_t line = 0;  // 1-based trace line, 0 when not tied to one
    std::string message;

    std::string to_string() const {
        std::string s = check + " violated";
        if (line)
            s += " at line " + std::to_string(line);
        return s + ": " + message;
    }
};

namespace detail {

enum class TxKind { Beacon, ProbeRequest, ProbeResponse, NegReq, NegResp, NegConf, ProvReq, ProvResp, Auth, Ack, Data };

inline std::optional<TxKind> classify(const std::string& name) {
    static const std::map<std::string, TxKind, std::less<>> names{
        {"Beacon", TxKind::Beacon},
        {"Probe Request", TxKind::ProbeRequest},
        {"Probe Response", TxKind::ProbeResponse},
        {"GO Negotiation Request Frame", TxKind::NegReq},
        {"GO Negotiation Response Frame", TxKind::NegResp},
        {"GO Negotiation Confirmation Frame", TxKind::NegConf},
        {"Provision Request", TxKind::ProvReq},
        {"Provision discovery Response", TxKind::ProvResp},
        {"Authentication", TxKind::Auth},
        {"ACK", TxKind::Ack},
    };
    if (auto it = names.find(name); it != names.end())
        return it->second;
    static const std::regex data(R"([A-Za-z_][A-Za-z0-9_]*?\d+(-reply)?)");
    if (std::regex_match(name, data))
        return TxKind::Data;
    return std::nullopt;
}

inline bool needs_ack(TxKind k) { return k != TxKind::Beacon && k != TxKind::ProbeRequest && k != TxKind::Ack; }
inline bool is_neg(TxKind k) { return k == TxKind::NegReq || k == TxKind::NegResp || k == TxKind::NegConf; }

/// Rows sharing an event id and source collapse into one transmission.
struct Tx {
    std::uint64_t id = 0;
    SimTime time;
    std::string src;
    std::string name;
    TxKind kind{};
    std::vector<std::string> receivers;
    std::size_t line = 0;
    std::optional<std::string> dst;  // addressee of a unicast frame: its first row
    bool acked = false;

    bool heard_by(const std::string& h) const {
        return std::find(receivers.begin(), receivers.end(), h) != receivers.end();
    }
};

inline std::vector<Tx> group(std::span<const TraceRecord> recs, std::span<const std::size_t> lines) {
    std::vector<Tx> out;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const TraceRecord& r = recs[i];
        if (!out.empty() && out.back().id == r.event_id && out.back().src == r.src && out.back().name == r.frame_name) {
            out.back().receivers.push_back(r.dst);
            continue;
        }
        Tx t;
        t.id = r.event_id;
        t.time = r.time;
        t.src = r.src;
        t.name = r.frame_name;
        t.kind = classify(r.frame_name).value_or(TxKind::Data);
        t.receivers.push_back(r.dst);
        t.line = lines[i];
        if (t.kind != TxKind::Beacon && t.kind != TxKind::ProbeRequest)
            t.dst = r.dst;
        out.push_back(std::move(t));
    }
    return out;
}

class UnionFind {
public:
    std::string find(const std::string& x) {
        auto it = parent_.find(x);
        if (it == parent_.end()) {
            parent_[x] = x;
            return x;
        }
        if (it->second == x)
            return x;
        std::string root = find(it->second);
        parent_[x] = root;
        return root;
    }
    void unite(const std::string& a, const std::string& b) {
        const std::string ra = find(a), rb = find(b);
        if (ra != rb)
            parent_[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<std::string> nodes() const {
        std::vector<std::string> n;
        for (const auto& [k, v] : parent_)
            n.push_back(k);
        return n;
    }

private:
    std::map<std::string, std::string> parent_;
};

/// Pairs every ACK with the frame it answers. A sender may not start a new
/// frame while an earlier one is unanswered, except for a retry of the same
/// frame after the ACK timeout or a new frame after the retry chain is
/// exhausted.
inline void check_ack_pairing(std::vector<Tx>& txs, const ValidateOptions& opt, std::vector<Violation>& out) {
    struct Pending {
        std::size_t tx;
        SimTime last;
        int attempts;
    };
    const int max_attempts = 1 + opt.max_retries;
    std::map<std::string, Pending> pending;
    for (std::size_t i = 0; i < txs.size(); ++i) {
        Tx& t = txs[i];
        if (t.kind == TxKind::Ack) {
            auto it = pending.find(*t.dst);
            if (it != pending.end() && txs[it->second.tx].dst == t.src) {
                txs[it->second.tx].acked = true;
                pending.erase(it);
            }
            continue;
        }
        if (!needs_ack(t.kind))
            continue;
        auto it = pending.find(t.src);
        if (it != pending.end()) {
            Pending& p = it->second;
            const Tx& prev = txs[p.tx];
            const bool timed_out = t.time - p.last >= opt.ack_timeout;
            if (prev.name == t.name && timed_out && p.attempts < max_attempts) {
                ++p.attempts;
                p.last = t.time;
                p.tx = i;
                continue;
            }
            if (!(timed_out && p.attempts >= max_attempts)) {
                out.push_back({"ACK pairing", t.line,
                               t.src + " sent " + t.name + " at " + t.time.to_string() + " while " + prev.name +
                                   " (line " + std::to_string(prev.line) + ") was unacknowledged"});
            }
        }
        pending[t.src] = Pending{i, t.time, 1};
    }
    const SimTime end = txs.empty() ? kZeroTime : txs.back().time;
    for (const auto& [src, p] : pending) {
        const Tx& t = txs[p.tx];
        if (end - p.last >= opt.ack_timeout && p.attempts < max_attempts)
            out.push_back({"ACK pairing", t.line,
                           src + " never received an ACK for " + t.name + " at " + t.time.to_string()});
    }
}

inline std::set<std::string> beacon_senders(const std::vector<Tx>& txs) {
    std::set<std::string> s;
    for (const auto& t : txs)
        if (t.kind == TxKind::Beacon)
            s.insert(t.src);
    return s;
}

/// Devices linked by provisioning, authentication or data form a group; a
/// group may contain at most one beaconing device. A device that goes back to
/// discovery starts a new membership, so leaving one group and joining
/// another does not merge them.
inline void check_single_go(const std::vector<Tx>& txs, std::vector<Violation>& out) {
    UnionFind uf;
    std::map<std::string, int> epoch;
    auto node = [&](const std::string& h) { return h + "@" + std::to_string(epoch[h]); };
    std::vector<std::string> beaconing;
    for (const auto& t : txs) {
        if (t.kind == TxKind::ProbeRequest || is_neg(t.kind) || t.kind == TxKind::ProvReq)
            ++epoch[t.src];
        const bool link = t.kind == TxKind::Auth || t.kind == TxKind::Data || t.kind == TxKind::ProvReq ||
                          t.kind == TxKind::ProvResp;
        if (link && t.dst)
            uf.unite(node(t.src), node(*t.dst));
        if (t.kind == TxKind::Beacon)
            beaconing.push_back(node(t.src));
    }
    std::map<std::string, std::set<std::string>> gos;
    for (const auto& b : beaconing)
        gos[uf.find(b)].insert(b.substr(0, b.find('@')));
    for (const auto& [root, list] : gos) {
        if (list.size() < 2)
            continue;
        std::string names;
        for (const auto& g : list)
            names += (names.empty() ? "" : ", ") + g;
        out.push_back({"single GO", 0, "one group has several beaconing owners: " + names});
    }
}

/// Every Data hop has the group owner at one end.
inline void check_relay_rule(const std::vector<Tx>& txs, std::vector<Violation>& out) {
    const std::set<std::string> gos = beacon_senders(txs);
    for (const auto& t : txs) {
        if (t.kind != TxKind::Data || !t.dst)
            continue;
        if (!gos.contains(t.src) && !gos.contains(*t.dst))
            out.push_back({"relay rule", t.line,
                           "Data " + t.name + " went directly " + t.src + " --> " + *t.dst + " without the GO"});
    }
}

/// State legality as far as it is visible in frames: an operating GO never
/// goes back to discovery or negotiation, only a GO answers provision
/// discovery, and a client sends Data only after authenticating.
inline void check_state_legality(const std::vector<Tx>& txs, std::vector<Violation>& out) {
    const std::set<std::string> owners = beacon_senders(txs);
    std::set<std::string> gos;  // devices seen beaconing so far
    std::map<std::string, bool> authenticated;
    for (const auto& t : txs) {
        const bool discovery = t.kind == TxKind::ProbeRequest || is_neg(t.kind) || t.kind == TxKind::ProvReq;
        if (discovery) {
            authenticated[t.src] = false;
            if (gos.contains(t.src))
                out.push_back({"state legality", t.line,
                               t.src + " sent " + t.name + " after operating as GO"});
        }
        switch (t.kind) {
        case TxKind::Beacon: gos.insert(t.src); break;
        case TxKind::Auth: authenticated[t.src] = true; break;
        case TxKind::ProvResp:
            if (!owners.contains(t.src))
                out.push_back({"state legality", t.line, t.src + " answered provision discovery without being GO"});
            break;
        case TxKind::Data:
            if (!owners.contains(t.src) && !authenticated[t.src])
                out.push_back({"state legality", t.line, t.src + " sent Data before authenticating"});
            break;
        default: break;
        }
    }
}

/// Each completed negotiation reads Request/ACK/Response/ACK/Confirmation/ACK
/// between the two peers and is followed by a Beacon from one of them.
inline void check_handshake_shape(const std::vector<Tx>& txs, std::vector<Violation>& out) {
    for (std::size_t c = 0; c < txs.size(); ++c) {
        if (txs[c].kind != TxKind::NegConf)
            continue;
        const std::string a = txs[c].src;
        if (!txs[c].dst) {
            out.push_back({"handshake shape", txs[c].line, "Confirmation from " + a + " has no ACK"});
            continue;
        }
        const std::string b = *txs[c].dst;
        auto between = [&](const Tx& t) {
            if (t.src != a && t.src != b)
                return false;
            if (t.kind == TxKind::Beacon)
                return true;
            const std::string& other = t.src == a ? b : a;
            return t.dst ? *t.dst == other : t.heard_by(other);
        };
        std::vector<std::size_t> seq;
        for (std::size_t i = 0; i < txs.size(); ++i)
            if (between(txs[i]))
                seq.push_back(i);
        const auto k = static_cast<std::size_t>(std::find(seq.begin(), seq.end(), c) - seq.begin());
        auto at = [&](std::ptrdiff_t off) -> const Tx* {
            const auto idx = static_cast<std::ptrdiff_t>(k) + off;
            if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(seq.size()))
                return nullptr;
            return &txs[seq[static_cast<std::size_t>(idx)]];
        };
        auto is = [](const Tx* t, TxKind kind, const std::string& src) {
            return t && t->kind == kind && t->src == src;
        };
        std::string problem;
        if (!is(at(-2), TxKind::NegResp, b) || !is(at(-1), TxKind::Ack, a))
            problem = "Confirmation is not preceded by Response/ACK";
        else if (!is(at(1), TxKind::Ack, b))
            problem = "Confirmation is not followed by an ACK";
        else if (!at(2) || at(2)->kind != TxKind::Beacon)
            problem = "no Beacon from the elected GO after the handshake";
        else {
            std::optional<std::ptrdiff_t> req;
            for (std::ptrdiff_t off = -3; at(off); --off)
                if (is(at(off), TxKind::NegReq, a)) {
                    req = off;
                    break;
                }
            if (!req || !is(at(*req + 1), TxKind::Ack, b))
                problem = "Request from the initiator is missing or not acknowledged";
        }
        if (!problem.empty())
            out.push_back({"handshake shape", txs[c].line, a + " / " + b + ": " + problem});
    }
}

} // namespace detail

/// Every consecutive pair of recorded state changes must be a legal transition.
inline std::vector<Violation> check_history(std::span<const StateChange> history, const std::string& who = "") {
    std::vector<Violation> out;
    std::optional<SimTime> last;
    for (const auto& c : history) {
        if (!is_legal_transition(c.from, c.to))
            out.push_back({"state legality", 0,
                           who + " " + std::string(to_string(c.from)) + " -> " + std::string(to_string(c.to)) +
                               " at " + c.time.to_string()});
        if (last && c.time < *last)
            out.push_back({"state legality", 0, who + " state history goes back in time"});
        last = c.time;
    }
    for (std::size_t i = 1; i < history.size(); ++i)
        if (history[i].from != history[i - 1].to)
            out.push_back({"state legality", 0, who + " state history is not contiguous"});
    return out;
}

/// Lines that do not match the trace grammar or vocabulary.
inline std::vector<Violation> check_grammar(const std::string& text) {
    static const std::regex row(R"(#\d+\t\d+\.\d{11,}\t\S+ --> \S+\t.+)");
    std::vector<Violation> out;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty())
            continue;
        if (!std::regex_match(line, row)) {
            out.push_back({"trace grammar", n, "malformed row"});
            continue;
        }
        const std::string name = line.substr(line.rfind('\t') + 1);
        if (!detail::classify(name))
            out.push_back({"trace grammar", n, "unknown frame name '" + name + "'"});
    }
    return out;
}

/// Runs every trace checker over already parsed records.
inline std::vector<Violation> validate_records(std::span<const TraceRecord> recs, const ValidateOptions& opt = {},
                                               std::span<const std::size_t> lines = {}) {
    std::vector<std::size_t> own_lines;
    if (lines.size() != recs.size()) {
        own_lines.resize(recs.size());
        std::iota(own_lines.begin(), own_lines.end(), std::size_t{1});
        lines = own_lines;
    }
    std::vector<Violation> out;
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (std::pair(recs[i].time, recs[i].event_id) < std::pair(recs[i - 1].time, recs[i - 1].event_id))
            out.push_back({"ordering", lines[i], "record is out of (time, id) order"});
    }
    std::vector<detail::Tx> txs = detail::group(recs, lines);
    detail::check_ack_pairing(txs, opt, out);
    detail::check_single_go(txs, out);
    detail::check_relay_rule(txs, out);
    detail::check_state_legality(txs, out);
    detail::check_handshake_shape(txs, out);
    return out;
}

/// Parses and checks a trace document. Unparsable rows are reported and skipped.
inline std::vector<Violation> validate_trace(const std::string& text, const ValidateOptions& opt = {}) {
    std::vector<Violation> out = check_grammar(text);
    std::vector<TraceRecord> recs;
    std::vector<std::size_t> lines;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty())
            continue;
        try {
            recs.push_back(parse_trace_line(line, n));
            lines.push_back(n);
        } catch (const TraceParseError&) {
            // already reported by the grammar check
        }
    }
    auto more = validate_records(recs, opt, lines);
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

} // namespace wfd
