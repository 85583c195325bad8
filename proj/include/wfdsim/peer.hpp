#pragma once

#include "wfdsim/engine.hpp"
#include "wfdsim/frame.hpp"
#include "wfdsim/medium.hpp"
#include "wfdsim/peer_state.hpp"
#include "wfdsim/rng.hpp"
#include "wfdsim/traffic.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wfd {

enum class FindMode { Alternate, ListenOnly, SearchOnly };

struct PeerConfig {
    DeviceAddress address;
    bool wifi_direct_used = true;
    bool autonomous_go = false;
    /// For a non-GO host a pinned ssid means "join only the group with this
    /// name": the device never negotiates and only looks for a matching GO.
    std::string group_ssid;
    int go_intent = 7;
    bool persistent = false;
    std::vector<SimTime> listen_dwell_choices{SimTime::from_ms(100), SimTime::from_ms(200), SimTime::from_ms(300)};
    SimTime search_probe_gap = SimTime::from_ms(10);
    /// Passive wait on each scan channel before the Probe Request; longer than
    /// one beacon interval so an operating GO is heard before it is probed.
    SimTime scan_probe_delay = SimTime::from_ms(110);
    SimTime scan_duration = SimTime::from_ms(2000);  // calibrated: 2-host mean discovery 2.24 s over seeds 1..100
    int provisioning_frames = 20;
    SimTime beacon_interval = SimTime::from_ms(100);
    SimTime beacon_start = SimTime::from_ms(100);  // autonomous GO only
    SimTime start_time;
    SimTime response_timeout = SimTime::from_ms(100);
    SimTime listen_hold = SimTime::from_ms(50);  // extra listen time after answering a probe
    bool social_channels_only = false;
    FindMode find_mode = FindMode::Alternate;
    std::optional<SimTime> restart_at;

    void validate() const {
        if (go_intent < 0 || go_intent > 15)
            throw std::invalid_argument("go_intent must be in [0,15]");
        if (provisioning_frames < 1)
            throw std::invalid_argument("provisioning_frames must be >= 1");
        if (beacon_interval <= kZeroTime)
            throw std::invalid_argument("beacon_interval must be positive");
        if (listen_dwell_choices.empty())
            throw std::invalid_argument("listen_dwell_choices must not be empty");
        for (SimTime d : listen_dwell_choices)
            if (d <= kZeroTime)
                throw std::invalid_argument("listen dwell must be positive");
        if (search_probe_gap <= kZeroTime || scan_duration <= kZeroTime || response_timeout <= kZeroTime)
            throw std::invalid_argument("peer timing parameters must be positive");
        if (listen_hold < kZeroTime || start_time < kZeroTime || beacon_start < kZeroTime ||
            scan_probe_delay < kZeroTime)
            throw std::invalid_argument("peer offsets must be non-negative");
    }

    bool operator==(const PeerConfig&) const = default;
};

struct PersistentGroupRecord {
    DeviceAddress peer;
    std::string ssid;
    GroupRole my_role = GroupRole::Client;
    std::string credential_token;
    bool operator==(const PersistentGroupRecord&) const = default;
};

struct GroupView {
    std::string ssid;
    DeviceAddress go;
    std::set<DeviceAddress> members;
    SimTime formed_at;
};

/// Ceil(n/2): Authentication frames of provisioning phase 2 alone.
constexpr int phase2_frame_count(int n) { return (n + 1) / 2; }

/// A Wi-Fi Direct device: scan, find, GO negotiation, provisioning, joining,
/// autonomous and persistent formation. Event-driven; owned by one run.
class Peer final : public GroupLink {
public:
    using DataHandler = std::function<void(const Frame&)>;

    Peer(Engine& engine, Medium& medium, PeerConfig cfg, Rng rng)
        : engine_(engine), medium_(medium), cfg_(std::move(cfg)), rng_(rng) {
        cfg_.validate();
        const int channels = medium_.params().channel_count;
        if (cfg_.social_channels_only) {
            for (int c : {0, 5, 10})
                if (c < channels)
                    find_channels_.push_back(c);
        }
        if (find_channels_.empty())
            for (int c = 0; c < channels; ++c)
                find_channels_.push_back(c);
        medium_.register_device(cfg_.address, 0, [this](const Frame& f) { on_frame(f); });
    }

    Peer(const Peer&) = delete;
    Peer& operator=(const Peer&) = delete;

    /// Boots the device at its configured start time.
    void start() {
        engine_.schedule(std::max(cfg_.start_time, engine_.now()), [this] { boot(); }, "peer-start");
        if (cfg_.restart_at)
            engine_.schedule(std::max(*cfg_.restart_at, engine_.now()), [this] { restart(); }, "peer-restart");
    }

    /// A client leaves its group and rediscovers from scratch, keeping its
    /// persistent records. Returns false if the device was not a client.
    bool restart() {
        if (state_ != PeerState::ClientAssociated)
            return false;
        cancel_timers();
        medium_.flush(cfg_.address);
        group_.reset();
        begin_scan();
        return true;
    }

    /// Starts a GO negotiation with `peer` from a Find state.
    void initiate_negotiation(DeviceAddress peer) {
        if (!in_find())
            throw std::logic_error("initiate_negotiation outside Find");
        cancel_timers();
        note_discovery();
        enter(PeerState::Negotiating);
        neg_ = Negotiation{peer, true, rng_.bernoulli(0.5)};
        const auto epoch = epoch_;
        send_neg_frame(FrameKind::GoNegRequest, [this, epoch](SendOutcome o) {
            if (epoch != epoch_)
                return;
            if (o == SendOutcome::Failed)
                negotiation_failed();
            else if (!neg_->got_response)
                arm_response_timer([this] { negotiation_failed(); });
        });
    }

    // GroupLink
    DeviceAddress address() const override { return cfg_.address; }
    bool in_group() const override {
        return state_ == PeerState::GoOperating || state_ == PeerState::ClientAssociated;
    }
    bool is_group_owner() const override { return state_ == PeerState::GoOperating; }
    std::optional<DeviceAddress> group_owner() const override {
        if (!group_ || !in_group())
            return std::nullopt;
        return group_->go;
    }
    bool has_member(DeviceAddress member) const override {
        return is_group_owner() && group_->members.contains(member);
    }
    void send_data(Frame frame) override {
        frame.src = cfg_.address;
        frame.channel = channel();
        medium_.send(std::move(frame));
    }

    void set_data_handler(DataHandler h) { data_handler_ = std::move(h); }

    const PeerConfig& config() const { return cfg_; }
    PeerState state() const { return state_; }
    ChannelIndex channel() const { return medium_.channel_of(cfg_.address); }
    const std::vector<StateChange>& history() const { return history_; }
    const std::optional<GroupView>& group() const { return group_; }
    std::optional<GroupRole> role() const {
        if (state_ == PeerState::GoOperating)
            return GroupRole::Go;
        if (state_ == PeerState::ClientAssociated)
            return GroupRole::Client;
        return std::nullopt;
    }

    std::optional<SimTime> first_scan_start() const { return first_scan_start_; }
    std::optional<SimTime> first_discovery() const { return first_discovery_; }
    std::optional<SimTime> first_association() const { return first_association_; }
    std::optional<SimTime> discovery_duration() const {
        if (!first_scan_start_ || !first_discovery_)
            return std::nullopt;
        return *first_discovery_ - *first_scan_start_;
    }

    std::span<const PersistentGroupRecord> persistent_records() const { return records_; }

    /// Stores a record, replacing any existing one for the same (peer, ssid).
    void store_record(PersistentGroupRecord rec) {
        discard_record(rec.peer, rec.ssid);
        records_.push_back(std::move(rec));
    }

private:
    struct Negotiation {
        DeviceAddress peer;
        bool initiator = false;
        bool tiebreak = false;
        int peer_intent = 0;
        bool peer_persistent = false;
        bool got_response = false;
    };
    struct ClientProvisioning {
        DeviceAddress go;
        std::string ssid;
        int total = 0;
        int last_seq = 0;
        bool reinvoke = false;
        bool group_persistent = false;
        bool waiting_beacon = false;
    };
    struct GoSession {
        int total = 0;
        int last_seq = 0;
        bool reinvoke = false;
    };

    // --- state bookkeeping -------------------------------------------------

    void enter(PeerState to) {
        if (!is_legal_transition(state_, to))
            throw std::logic_error(host_name(cfg_.address) + ": illegal transition " +
                                   std::string(to_string(state_)) + " -> " + std::string(to_string(to)));
        history_.push_back(StateChange{engine_.now(), state_, to});
        state_ = to;
        ++epoch_;
    }

    bool in_find() const { return state_ == PeerState::FindListen || state_ == PeerState::FindSearch; }
    bool join_only() const { return !cfg_.autonomous_go && !cfg_.group_ssid.empty(); }
    bool ssid_matches(const std::string& ssid) const { return cfg_.group_ssid.empty() || ssid == cfg_.group_ssid; }

    void note_discovery() {
        if (!first_discovery_)
            first_discovery_ = engine_.now();
    }

    void cancel_timers() {
        engine_.cancel(find_timer_);
        engine_.cancel(probe_timer_);
        engine_.cancel(response_timer_);
    }

    template <typename Fn>
    void arm_response_timer(Fn fn) {
        engine_.cancel(response_timer_);
        const auto epoch = epoch_;
        response_timer_ = engine_.schedule_in(
            cfg_.response_timeout,
            [this, epoch, fn] {
                if (epoch == epoch_)
                    fn();
            },
            "response-timeout");
    }

    void tune(ChannelIndex c) { medium_.tune(cfg_.address, c); }

    Frame make_frame(FrameKind kind, DeviceAddress dst) const {
        Frame f;
        f.kind = kind;
        f.src = cfg_.address;
        f.dst = dst;
        f.channel = channel();
        return f;
    }

    const PersistentGroupRecord* find_record(DeviceAddress peer, const std::string& ssid) const {
        for (const auto& r : records_)
            if (r.peer == peer && r.ssid == ssid)
                return &r;
        return nullptr;
    }
    const PersistentGroupRecord* find_record(DeviceAddress peer) const {
        for (const auto& r : records_)
            if (r.peer == peer)
                return &r;
        return nullptr;
    }
    void discard_record(DeviceAddress peer, const std::string& ssid) {
        std::erase_if(records_, [&](const PersistentGroupRecord& r) { return r.peer == peer && r.ssid == ssid; });
    }

    std::string new_token() {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_.next_u64()));
        return buf;
    }

    std::string default_ssid() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "DIRECT-%02X%02X", cfg_.address.bytes()[4], cfg_.address.bytes()[5]);
        return buf;
    }

    // --- boot, scan, find --------------------------------------------------

    void boot() {
        if (!cfg_.wifi_direct_used)
            return;
        if (cfg_.autonomous_go) {
            tune(find_channels_[rng_.uniform_index(find_channels_.size())]);
            become_go(cfg_.group_ssid.empty() ? default_ssid() : cfg_.group_ssid, cfg_.persistent,
                      std::max(cfg_.beacon_start, engine_.now()));
            return;
        }
        begin_scan();
    }

    void begin_scan() {
        enter(PeerState::Scan);
        if (!first_scan_start_)
            first_scan_start_ = engine_.now();
        scan_step(0);
    }

    void scan_step(int index) {
        const int channels = medium_.params().channel_count;
        if (index == channels) {
            enter_find();
            return;
        }
        tune(index);
        const SimTime dwell = cfg_.scan_duration / channels;
        if (cfg_.scan_probe_delay < dwell) {
            probe_timer_ = engine_.schedule_in(
                cfg_.scan_probe_delay,
                [this] { medium_.send(make_frame(FrameKind::ProbeRequest, DeviceAddress::broadcast())); },
                "scan-probe");
        }
        find_timer_ = engine_.schedule_in(dwell, [this, index] { scan_step(index + 1); }, "scan-dwell");
    }

    void enter_find() {
        switch (cfg_.find_mode) {
        case FindMode::ListenOnly: start_listen(); break;
        case FindMode::SearchOnly: start_search(); break;
        case FindMode::Alternate: rng_.bernoulli(0.5) ? start_listen() : start_search(); break;
        }
    }

    void start_listen() {
        if (state_ != PeerState::FindListen)
            enter(PeerState::FindListen);
        tune(find_channels_[rng_.uniform_index(find_channels_.size())]);
        const SimTime dwell = cfg_.listen_dwell_choices[rng_.uniform_index(cfg_.listen_dwell_choices.size())];
        listen_end_ = engine_.now() + dwell;
        find_timer_ = engine_.schedule(listen_end_, [this] { end_listen(); }, "listen-dwell");
    }

    void end_listen() {
        if (cfg_.find_mode == FindMode::ListenOnly)
            start_listen();
        else
            start_search();
    }

    void start_search() {
        if (state_ != PeerState::FindSearch)
            enter(PeerState::FindSearch);
        search_step(0);
    }

    void search_step(std::size_t index) {
        if (index == find_channels_.size()) {
            if (cfg_.find_mode == FindMode::SearchOnly)
                search_step(0);
            else
                start_listen();
            return;
        }
        tune(find_channels_[index]);
        medium_.send(make_frame(FrameKind::ProbeRequest, DeviceAddress::broadcast()));
        find_timer_ = engine_.schedule_in(medium_.params().frame_airtime + cfg_.search_probe_gap,
                                          [this, index] { search_step(index + 1); }, "search-step");
    }

    // --- frame dispatch ----------------------------------------------------

    void on_frame(const Frame& f) {
        if (f.channel != channel())
            return;
        const bool to_me = f.dst == cfg_.address;
        switch (f.kind) {
        case FrameKind::Beacon: on_beacon(f); break;
        case FrameKind::ProbeRequest: on_probe_request(f); break;
        case FrameKind::ProbeResponse: if (to_me) on_probe_response(f); break;
        case FrameKind::GoNegRequest: if (to_me) on_go_neg_request(f); break;
        case FrameKind::GoNegResponse: if (to_me) on_go_neg_response(f); break;
        case FrameKind::GoNegConfirmation: if (to_me) on_go_neg_confirmation(f); break;
        case FrameKind::ProvisionDiscoveryRequest: if (to_me) on_pd_request(f); break;
        case FrameKind::ProvisionDiscoveryResponse: if (to_me) on_pd_response(f); break;
        case FrameKind::Auth:
            if (to_me) {
                if (state_ == PeerState::GoOperating)
                    go_on_auth(f);
                else if (in_find())
                    on_reinvoke_auth_while_finding(f);
                else
                    client_on_auth(f);
            }
            break;
        case FrameKind::Data:
            if (to_me && in_group() && data_handler_)
                data_handler_(f);
            break;
        case FrameKind::Ack: break;
        }
    }

    void on_beacon(const Frame& f) {
        if (!f.group_ssid)
            return;
        if (state_ == PeerState::Scan || in_find()) {
            go_found(f.src, *f.group_ssid, f.channel, f.persistent_flag);
            return;
        }
        if (prov_ && prov_->waiting_beacon && f.src == prov_->go && state_ == PeerState::ProvisioningPhase1) {
            engine_.cancel(response_timer_);
            prov_->waiting_beacon = false;
            prov_->ssid = *f.group_ssid;
            prov_->group_persistent = f.persistent_flag;
            client_send_auth(1);
        }
    }

    void on_probe_request(const Frame& f) {
        if (state_ == PeerState::GoOperating) {
            if (!beaconing_)
                return;  // silent until the first Beacon
            Frame r = make_frame(FrameKind::ProbeResponse, f.src);
            r.group_owner = true;
            r.group_ssid = group_->ssid;
            r.persistent_flag = group_persistent_;
            medium_.send(std::move(r));
            return;
        }
        if (state_ != PeerState::FindListen || join_only())
            return;
        Frame r = make_frame(FrameKind::ProbeResponse, f.src);
        if (const auto* rec = find_record(f.src)) {
            r.persistent_flag = true;
            r.group_ssid = rec->ssid;
        }
        medium_.send(std::move(r));
        const SimTime hold_until = engine_.now() + cfg_.listen_hold;
        if (hold_until > listen_end_) {
            engine_.cancel(find_timer_);
            listen_end_ = hold_until;
            find_timer_ = engine_.schedule(listen_end_, [this] { end_listen(); }, "listen-dwell");
        }
    }

    void on_probe_response(const Frame& f) {
        if (state_ == PeerState::Scan) {
            if (f.group_owner && f.group_ssid)
                go_found(f.src, *f.group_ssid, f.channel, f.persistent_flag);
            return;
        }
        if (state_ != PeerState::FindSearch)
            return;
        if (f.group_owner) {
            if (f.group_ssid)
                go_found(f.src, *f.group_ssid, f.channel, f.persistent_flag);
            return;
        }
        if (join_only())
            return;
        if (f.persistent_flag && f.group_ssid) {
            if (const auto* rec = find_record(f.src, *f.group_ssid)) {
                persistent_rendezvous(*rec);
                return;
            }
        }
        initiate_negotiation(f.src);
    }

    // --- joining and persistent fast path ---------------------------------

    void go_found(DeviceAddress go, const std::string& ssid, ChannelIndex ch, bool persistent) {
        if (!ssid_matches(ssid))
            return;
        cancel_timers();
        tune(ch);
        if (const auto* rec = find_record(go, ssid)) {
            if (persistent && rec->my_role == GroupRole::Client) {
                note_discovery();
                begin_reinvoke_client(go, ssid);
                return;
            }
            discard_record(go, ssid);  // stale, or both sides stored GO
        }
        note_discovery();
        enter(PeerState::Joining);
        join_ = ClientProvisioning{go, ssid, cfg_.provisioning_frames, 0, false, persistent, false};
        Frame req = make_frame(FrameKind::ProvisionDiscoveryRequest, go);
        req.group_ssid = ssid;
        const auto epoch = epoch_;
        medium_.send(std::move(req), [this, epoch](SendOutcome o) {
            if (epoch != epoch_)
                return;
            if (o == SendOutcome::Failed)
                fall_back_to_scan();
            else
                arm_response_timer([this] { fall_back_to_scan(); });
        });
    }

    void on_pd_response(const Frame& f) {
        if (state_ != PeerState::Joining || !join_ || f.src != join_->go)
            return;
        engine_.cancel(response_timer_);
        enter(PeerState::ProvisioningPhase1);
        prov_ = *join_;
        join_.reset();
        client_send_auth(1);
    }

    void begin_reinvoke_client(DeviceAddress go, const std::string& ssid) {
        enter(PeerState::ProvisioningPhase2);
        prov_ = ClientProvisioning{go, ssid, phase2_frame_count(cfg_.provisioning_frames), 0, true, true, false};
        client_send_auth(1);
    }

    void persistent_rendezvous(const PersistentGroupRecord& rec) {
        cancel_timers();
        note_discovery();
        if (rec.my_role == GroupRole::Client) {
            begin_reinvoke_client(rec.peer, rec.ssid);
        } else {
            const std::string ssid = rec.ssid;
            become_go(ssid, true, engine_.now());
        }
    }

    void on_reinvoke_auth_while_finding(const Frame& f) {
        if (!f.persistent_flag || !f.group_ssid || f.auth_seq != 1)
            return;
        const auto* rec = find_record(f.src, *f.group_ssid);
        if (!rec)
            return;
        if (rec->my_role != GroupRole::Go) {
            discard_record(f.src, *f.group_ssid);  // both sides stored Client
            return;
        }
        const std::string ssid = rec->ssid;
        cancel_timers();
        note_discovery();
        become_go(ssid, true, engine_.now());
        go_on_auth(f);
    }

    // --- GO negotiation ----------------------------------------------------

    void send_neg_frame(FrameKind kind, Medium::OutcomeCallback done) {
        Frame f = make_frame(kind, neg_->peer);
        if (kind != FrameKind::GoNegConfirmation) {
            f.go_intent = cfg_.go_intent;
            f.tiebreak = neg_->tiebreak;
        }
        f.persistent_flag = cfg_.persistent;
        medium_.send(std::move(f), std::move(done));
    }

    void respond_to_negotiation(const Frame& req) {
        neg_->initiator = false;
        neg_->peer_intent = *req.go_intent;
        neg_->peer_persistent = req.persistent_flag;
        const auto epoch = epoch_;
        send_neg_frame(FrameKind::GoNegResponse, [this, epoch](SendOutcome o) {
            if (epoch != epoch_)
                return;
            if (o == SendOutcome::Failed)
                negotiation_failed();
            else
                arm_response_timer([this] { negotiation_failed(); });
        });
    }

    void on_go_neg_request(const Frame& f) {
        if (in_find() && !join_only()) {
            cancel_timers();
            note_discovery();
            enter(PeerState::Negotiating);
            neg_ = Negotiation{f.src, false, rng_.bernoulli(0.5)};
            respond_to_negotiation(f);
            return;
        }
        if (state_ == PeerState::Negotiating && neg_ && neg_->initiator && neg_->peer == f.src &&
            !neg_->got_response) {
            // Both sides initiated: the lower address keeps the initiator role.
            if (cfg_.address < f.src)
                return;
            engine_.cancel(response_timer_);
            ++epoch_;
            respond_to_negotiation(f);
        }
    }

    void on_go_neg_response(const Frame& f) {
        if (state_ != PeerState::Negotiating || !neg_ || !neg_->initiator || neg_->peer != f.src ||
            neg_->got_response)
            return;
        engine_.cancel(response_timer_);
        neg_->got_response = true;
        neg_->peer_intent = *f.go_intent;
        neg_->peer_persistent = f.persistent_flag;
        const GroupRole role =
            decide_go_role(cfg_.go_intent, neg_->peer_intent, cfg_.address, neg_->peer, neg_->tiebreak);
        const auto epoch = epoch_;
        send_neg_frame(FrameKind::GoNegConfirmation, [this, epoch, role](SendOutcome o) {
            if (epoch != epoch_)
                return;
            if (o == SendOutcome::Failed)
                negotiation_failed();
            else
                complete_negotiation(role);
        });
    }

    void on_go_neg_confirmation(const Frame& f) {
        if (state_ != PeerState::Negotiating || !neg_ || neg_->initiator || neg_->peer != f.src)
            return;
        engine_.cancel(response_timer_);
        complete_negotiation(
            decide_go_role(cfg_.go_intent, neg_->peer_intent, cfg_.address, neg_->peer, neg_->tiebreak));
    }

    void complete_negotiation(GroupRole role) {
        const Negotiation neg = *neg_;
        neg_.reset();
        const bool persistent = cfg_.persistent && neg.peer_persistent;
        if (role == GroupRole::Go) {
            allowed_.insert(neg.peer);
            become_go(cfg_.group_ssid.empty() ? default_ssid() : cfg_.group_ssid, persistent, engine_.now());
            return;
        }
        enter(PeerState::ProvisioningPhase1);
        prov_ = ClientProvisioning{neg.peer, {}, cfg_.provisioning_frames, 0, false, persistent, true};
        arm_response_timer([this] { fall_back_to_scan(); });
    }

    void negotiation_failed() {
        cancel_timers();
        neg_.reset();
        start_listen();
    }

    // --- client-side provisioning -----------------------------------------

    void advance_phase(int seq) {
        if (state_ == PeerState::ProvisioningPhase1 && seq > prov_->total / 2)
            enter(PeerState::ProvisioningPhase2);
    }

    void client_send_auth(int seq) {
        advance_phase(seq);
        Frame a = make_frame(FrameKind::Auth, prov_->go);
        a.auth_seq = seq;
        a.auth_total = prov_->total;
        if (prov_->reinvoke) {
            a.persistent_flag = true;
            a.group_ssid = prov_->ssid;
        }
        prov_->last_seq = seq;
        const auto epoch = epoch_;
        medium_.send(std::move(a), [this, epoch, seq](SendOutcome o) {
            if (epoch != epoch_)
                return;
            if (o == SendOutcome::Failed)
                fall_back_to_scan();
            else if (seq == prov_->total)
                client_complete();
            else
                arm_response_timer([this] { fall_back_to_scan(); });
        });
    }

    void client_on_auth(const Frame& f) {
        if (state_ != PeerState::ProvisioningPhase1 && state_ != PeerState::ProvisioningPhase2)
            return;
        if (!prov_ || prov_->waiting_beacon || f.src != prov_->go || *f.auth_seq != prov_->last_seq + 1)
            return;
        engine_.cancel(response_timer_);
        advance_phase(*f.auth_seq);
        prov_->last_seq = *f.auth_seq;
        if (*f.auth_seq == prov_->total)
            client_complete();
        else
            client_send_auth(*f.auth_seq + 1);
    }

    void client_complete() {
        const ClientProvisioning p = *prov_;
        prov_.reset();
        enter(PeerState::ClientAssociated);
        group_ = GroupView{p.ssid, p.go, {p.go, cfg_.address}, engine_.now()};
        if (!first_association_)
            first_association_ = engine_.now();
        if (!p.reinvoke && p.group_persistent && cfg_.persistent)
            store_record({p.go, p.ssid, GroupRole::Client, new_token()});
    }

    void fall_back_to_scan() {
        if (prov_ && prov_->reinvoke)
            discard_record(prov_->go, prov_->ssid);
        prov_.reset();
        join_.reset();
        cancel_timers();
        begin_scan();
    }

    // --- group owner -------------------------------------------------------

    void become_go(const std::string& ssid, bool persistent, SimTime first_beacon) {
        enter(PeerState::GoOperating);
        group_persistent_ = persistent;
        beaconing_ = false;
        group_ = GroupView{ssid, cfg_.address, {cfg_.address}, engine_.now()};
        if (!first_association_)
            first_association_ = engine_.now();
        beacon_timer_ = engine_.schedule(first_beacon, [this] { beacon_tick(); }, "beacon");
    }

    void beacon_tick() {
        beaconing_ = true;
        Frame b = make_frame(FrameKind::Beacon, DeviceAddress::broadcast());
        b.group_ssid = group_->ssid;
        b.group_owner = true;
        b.persistent_flag = group_persistent_;
        medium_.send(std::move(b));
        beacon_timer_ = engine_.schedule_in(cfg_.beacon_interval, [this] { beacon_tick(); }, "beacon");
    }

    void on_pd_request(const Frame& f) {
        if (state_ != PeerState::GoOperating || !beaconing_)
            return;
        if (const auto* rec = find_record(f.src, group_->ssid); rec && rec->my_role == GroupRole::Go)
            discard_record(f.src, group_->ssid);
        allowed_.insert(f.src);
        Frame r = make_frame(FrameKind::ProvisionDiscoveryResponse, f.src);
        r.group_ssid = group_->ssid;
        medium_.send(std::move(r));
    }

    void go_on_auth(const Frame& f) {
        const DeviceAddress client = f.src;
        auto it = sessions_.find(client);
        if (it != sessions_.end() && *f.auth_seq == 1) {
            sessions_.erase(it);  // client gave up on an earlier attempt and restarted
            it = sessions_.end();
        }
        if (it == sessions_.end()) {
            if (*f.auth_seq != 1)
                return;
            if (f.persistent_flag) {
                const auto* rec = find_record(client, group_->ssid);
                if (!rec || rec->my_role != GroupRole::Go)
                    return;
            } else if (!allowed_.contains(client)) {
                return;
            }
            it = sessions_.emplace(client, GoSession{*f.auth_total, 0, f.persistent_flag}).first;
        }
        GoSession& s = it->second;
        if (*f.auth_seq != s.last_seq + 1)
            return;
        s.last_seq = *f.auth_seq;
        if (s.last_seq == s.total) {
            member_joined(client);
            return;
        }
        go_send_auth(client, s.last_seq + 1);
    }

    void go_send_auth(DeviceAddress client, int seq) {
        GoSession& s = sessions_.at(client);
        Frame a = make_frame(FrameKind::Auth, client);
        a.auth_seq = seq;
        a.auth_total = s.total;
        if (s.reinvoke) {
            a.persistent_flag = true;
            a.group_ssid = group_->ssid;
        }
        s.last_seq = seq;
        medium_.send(std::move(a), [this, client, seq](SendOutcome o) {
            auto it = sessions_.find(client);
            if (it == sessions_.end() || it->second.last_seq != seq)
                return;
            if (o == SendOutcome::Failed)
                sessions_.erase(it);
            else if (seq == it->second.total)
                member_joined(client);
        });
    }

    void member_joined(DeviceAddress client) {
        const GoSession s = sessions_.at(client);
        sessions_.erase(client);
        allowed_.erase(client);
        group_->members.insert(client);
        if (!s.reinvoke && group_persistent_)
            store_record({client, group_->ssid, GroupRole::Go, new_token()});
    }

    Engine& engine_;
    Medium& medium_;
    PeerConfig cfg_;
    Rng rng_;
    std::vector<ChannelIndex> find_channels_;

    PeerState state_ = PeerState::Idle;
    std::uint64_t epoch_ = 0;
    std::vector<StateChange> history_;

    EventHandle find_timer_;
    EventHandle probe_timer_;
    EventHandle response_timer_;
    EventHandle beacon_timer_;
    SimTime listen_end_;

    std::optional<Negotiation> neg_;
    std::optional<ClientProvisioning> join_;
    std::optional<ClientProvisioning> prov_;

    std::optional<GroupView> group_;
    bool group_persistent_ = false;
    bool beaconing_ = false;
    std::map<DeviceAddress, GoSession> sessions_;
    std::set<DeviceAddress> allowed_;

    std::vector<PersistentGroupRecord> records_;
    DataHandler data_handler_;

    std::optional<SimTime> first_scan_start_;
    std::optional<SimTime> first_discovery_;
    std::optional<SimTime> first_association_;
};

} // namespace wfd
