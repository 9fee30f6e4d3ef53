#include "homectx/bus.hpp"

#include <cstdio>
#include <deque>
#include <map>
#include <optional>

#include "homectx/error.hpp"

namespace homectx {

namespace detail {

struct Subscription {
    std::uint64_t id = 0;
    std::string pattern;
    MessageBus::Handler handler;
    std::recursive_mutex delivery;
    std::atomic<bool> active{true};
};

struct ResponderEntry {
    std::uint64_t token = 0;
    Responder responder;
};

struct BusState {
    mutable std::mutex mutex;
    std::uint64_t next_sub = 1;
    std::uint64_t next_token = 1;
    std::uint64_t next_correlation = 1;
    std::map<std::uint64_t, std::shared_ptr<Subscription>> subs;
    std::map<std::string, ResponderEntry> responders;
    std::map<std::uint64_t, std::optional<Response>> pending;
    std::atomic<std::uint64_t> failures{0};

    std::mutex tap_mutex;
    std::ostream* tap = nullptr;
};

}  // namespace detail

namespace {

struct Delivery {
    std::shared_ptr<detail::Subscription> sub;
    std::shared_ptr<const Message> message;
    std::weak_ptr<detail::BusState> bus;
};

thread_local std::deque<Delivery> tl_queue;
thread_local bool tl_draining = false;

void deliver(const Delivery& d) {
    std::lock_guard lock(d.sub->delivery);
    if (!d.sub->active.load()) return;
    try {
        d.sub->handler(*d.message);
    } catch (const std::exception& e) {
        if (auto bus = d.bus.lock()) bus->failures.fetch_add(1);
        std::fprintf(stderr, "bus: handler for '%s' failed on %s: %s\n", d.sub->pattern.c_str(),
                     d.message->topic.c_str(), e.what());
    }
}

void drain() {
    if (tl_draining) return;
    tl_draining = true;
    while (!tl_queue.empty()) {
        Delivery d = std::move(tl_queue.front());
        tl_queue.pop_front();
        deliver(d);
    }
    tl_draining = false;
}

bool valid_segments(std::string_view topic, bool allow_trailing_star) {
    if (topic.empty()) return false;
    std::size_t start = 0;
    while (true) {
        auto slash = topic.find('/', start);
        auto seg = topic.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
        if (seg.empty()) return false;
        auto star = seg.find('*');
        if (star != std::string_view::npos) {
            if (!allow_trailing_star || slash != std::string_view::npos || star != seg.size() - 1) return false;
        }
        for (char c : seg)
            if (c == ' ' || c == '\t' || c == '\n') return false;
        if (slash == std::string_view::npos) return true;
        start = slash + 1;
    }
}

}  // namespace

bool is_valid_topic(std::string_view topic) { return valid_segments(topic, false); }

bool is_valid_pattern(std::string_view pattern) { return valid_segments(pattern, true); }

bool pattern_matches(std::string_view pattern, std::string_view topic) {
    if (!pattern.empty() && pattern.back() == '*') {
        auto prefix = pattern.substr(0, pattern.size() - 1);
        return topic.size() >= prefix.size() && topic.substr(0, prefix.size()) == prefix;
    }
    return pattern == topic;
}

std::string payload_digest(const Payload& payload) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : describe(payload)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void SubscriptionHandle::cancel() {
    if (!sub_) return;
    {
        std::lock_guard lock(sub_->delivery);
        sub_->active.store(false);
    }
    if (auto bus = bus_.lock()) {
        std::lock_guard lock(bus->mutex);
        bus->subs.erase(sub_->id);
    }
}

bool SubscriptionHandle::active() const { return sub_ && sub_->active.load(); }

const std::string& SubscriptionHandle::pattern() const {
    static const std::string empty;
    return sub_ ? sub_->pattern : empty;
}

void ResponderHandle::cancel() {
    if (auto bus = bus_.lock()) {
        std::lock_guard lock(bus->mutex);
        auto it = bus->responders.find(topic_);
        if (it != bus->responders.end() && it->second.token == token_) bus->responders.erase(it);
    }
    bus_.reset();
}

MessageBus::MessageBus(VirtualClock& clock) : clock_(clock), state_(std::make_shared<detail::BusState>()) {}

MessageBus::~MessageBus() {
    std::lock_guard lock(state_->mutex);
    for (auto& [id, sub] : state_->subs) sub->active.store(false);
}

void MessageBus::tap(const Message& m) {
    std::lock_guard lock(state_->tap_mutex);
    if (!state_->tap) return;
    *state_->tap << format_stamp(m.stamp) << ' ' << m.topic << ' ' << m.kind << ' ' << m.source << ' '
                 << payload_digest(m.payload) << '\n';
}

void MessageBus::set_tap(std::ostream* out) {
    std::lock_guard lock(state_->tap_mutex);
    state_->tap = out;
}

std::size_t MessageBus::publish(std::string topic, std::string kind, std::string source, Payload payload) {
    if (!is_valid_topic(topic)) throw Error(ErrorCode::InvalidPattern, "invalid publish topic '" + topic + "'");
    auto msg = std::make_shared<Message>();
    msg->topic = std::move(topic);
    msg->kind = std::move(kind);
    msg->source = std::move(source);
    msg->stamp = clock_.now();
    msg->payload = std::move(payload);
    tap(*msg);

    std::vector<std::shared_ptr<detail::Subscription>> targets;
    {
        std::lock_guard lock(state_->mutex);
        for (const auto& [id, sub] : state_->subs)
            if (pattern_matches(sub->pattern, msg->topic)) targets.push_back(sub);
    }
    std::shared_ptr<const Message> shared = std::move(msg);
    for (auto& sub : targets) tl_queue.push_back(Delivery{sub, shared, state_});
    drain();
    return targets.size();
}

SubscriptionHandle MessageBus::subscribe(const std::string& pattern, Handler handler) {
    if (!is_valid_pattern(pattern)) throw Error(ErrorCode::InvalidPattern, "invalid subscription pattern '" + pattern + "'");
    auto sub = std::make_shared<detail::Subscription>();
    sub->pattern = pattern;
    sub->handler = std::move(handler);
    {
        std::lock_guard lock(state_->mutex);
        sub->id = state_->next_sub++;
        state_->subs.emplace(sub->id, sub);
    }
    return SubscriptionHandle(state_, std::move(sub));
}

ResponderHandle MessageBus::serve(const std::string& topic, Responder responder) {
    if (!is_valid_topic(topic)) throw Error(ErrorCode::InvalidPattern, "invalid service topic '" + topic + "'");
    std::lock_guard lock(state_->mutex);
    if (state_->responders.count(topic)) throw Error(ErrorCode::DuplicateId, "responder already registered on " + topic);
    const auto token = state_->next_token++;
    state_->responders.emplace(topic, detail::ResponderEntry{token, std::move(responder)});
    return ResponderHandle(state_, topic, token);
}

bool MessageBus::has_responder(const std::string& topic) const {
    std::lock_guard lock(state_->mutex);
    return state_->responders.count(topic) != 0;
}

Response MessageBus::request(const std::string& topic, Payload payload, VirtualTime timeout, const std::string& source) {
    if (timeout <= 0) throw Error(ErrorCode::InvalidArgument, "request timeout must be positive");
    Responder responder;
    std::uint64_t corr = 0;
    {
        std::lock_guard lock(state_->mutex);
        auto it = state_->responders.find(topic);
        if (it == state_->responders.end()) throw Error(ErrorCode::NoResponder, "no responder on " + topic);
        responder = it->second.responder;
        corr = state_->next_correlation++;
        state_->pending.emplace(corr, std::nullopt);
    }

    Message req{topic, "request", source, clock_.now(), corr, std::move(payload)};
    tap(req);
    const VirtualTime deadline = req.stamp + timeout;

    std::weak_ptr<detail::BusState> weak = state_;
    Replier reply = [weak, corr](Response resp) {
        auto bus = weak.lock();
        if (!bus) return;
        std::lock_guard lock(bus->mutex);
        auto it = bus->pending.find(corr);
        if (it == bus->pending.end() || it->second) return;
        resp.correlation = corr;
        it->second = std::move(resp);
    };
    auto replied = [this, corr] {
        std::lock_guard lock(state_->mutex);
        auto it = state_->pending.find(corr);
        return it != state_->pending.end() && it->second.has_value();
    };

    try {
        responder(req, reply);
    } catch (...) {
        std::lock_guard lock(state_->mutex);
        state_->pending.erase(corr);
        throw;
    }
    if (!replied()) clock_.run_until(replied, deadline);

    std::optional<Response> resp;
    {
        std::lock_guard lock(state_->mutex);
        auto node = state_->pending.extract(corr);
        if (node) resp = std::move(node.mapped());
    }
    if (!resp) {
        clock_.advance_to(deadline);
        tap(Message{topic, "timeout", topic, clock_.now(), corr, {}});
        throw Error(ErrorCode::Timeout, "no reply on " + topic + " within " + std::to_string(timeout) + " ms");
    }
    tap(Message{topic, "response", topic, clock_.now(), corr, *resp});
    return *resp;
}

std::size_t MessageBus::subscription_count() const {
    std::lock_guard lock(state_->mutex);
    return state_->subs.size();
}

std::uint64_t MessageBus::handler_failures() const { return state_->failures.load(); }

std::uint64_t MessageBus::correlations_issued() const {
    std::lock_guard lock(state_->mutex);
    return state_->next_correlation - 1;
}

}  // namespace homectx
