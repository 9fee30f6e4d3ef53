#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>

#include "homectx/clock.hpp"
#include "homectx/messages.hpp"

namespace homectx {

/// A published message. The bus stamps it from the virtual clock; after
/// publication it is handed to subscribers as a const reference.
struct Message {
    std::string topic;
    std::string kind;
    std::string source;
    VirtualTime stamp = 0;
    std::uint64_t correlation = 0;
    Payload payload;
};

/// Topic for publishing: slash-separated, non-empty segments, no wildcard.
bool is_valid_topic(std::string_view topic);

/// Subscription pattern: a topic, optionally ending in `*` (prefix match).
bool is_valid_pattern(std::string_view pattern);
bool pattern_matches(std::string_view pattern, std::string_view topic);

/// 64-bit FNV-1a of the payload description, as 16 lowercase hex digits.
std::string payload_digest(const Payload& payload);

namespace detail {
struct BusState;
struct Subscription;
}  // namespace detail

class SubscriptionHandle {
public:
    SubscriptionHandle() = default;

    /// After cancel returns, the handler is never invoked again.
    void cancel();
    bool active() const;
    const std::string& pattern() const;

private:
    friend class MessageBus;
    SubscriptionHandle(std::weak_ptr<detail::BusState> bus, std::shared_ptr<detail::Subscription> sub)
        : bus_(std::move(bus)), sub_(std::move(sub)) {}

    std::weak_ptr<detail::BusState> bus_;
    std::shared_ptr<detail::Subscription> sub_;
};

/// Reply callback handed to a responder. Only the first reply per
/// correlation id is accepted; late replies after a timeout are dropped.
using Replier = std::function<void(Response)>;
using Responder = std::function<void(const Message& request, const Replier& reply)>;

class ResponderHandle {
public:
    ResponderHandle() = default;
    void cancel();
    const std::string& topic() const { return topic_; }

private:
    friend class MessageBus;
    ResponderHandle(std::weak_ptr<detail::BusState> bus, std::string topic, std::uint64_t token)
        : bus_(std::move(bus)), topic_(std::move(topic)), token_(token) {}

    std::weak_ptr<detail::BusState> bus_;
    std::string topic_;
    std::uint64_t token_ = 0;
};

/// In-process topic bus with pub/sub and request/response.
///
/// Delivery runs on the publishing thread. A publish issued from inside a
/// handler is queued and delivered after the current delivery returns, so
/// every subscriber sees messages of a topic in publish order. Request
/// timeouts are measured on the virtual clock: while waiting, the bus drives
/// the clock's timers up to the deadline.
class MessageBus {
public:
    using Handler = std::function<void(const Message&)>;

    explicit MessageBus(VirtualClock& clock);
    ~MessageBus();

    MessageBus(const MessageBus&) = delete;
    MessageBus& operator=(const MessageBus&) = delete;

    /// Returns the number of subscriptions the message was routed to.
    std::size_t publish(std::string topic, std::string kind, std::string source, Payload payload);

    SubscriptionHandle subscribe(const std::string& pattern, Handler handler);

    /// Registers the single responder for `topic`. Replaces nothing: a second
    /// responder on the same topic is rejected with DuplicateId.
    ResponderHandle serve(const std::string& topic, Responder responder);
    bool has_responder(const std::string& topic) const;

    /// Throws NoResponder (no responder registered) or Timeout (no reply by
    /// now + timeout on the virtual clock).
    Response request(const std::string& topic, Payload payload, VirtualTime timeout, const std::string& source = "bus");

    /// Writes one line per message: `stamp topic kind source digest`.
    void set_tap(std::ostream* out);

    std::size_t subscription_count() const;
    std::uint64_t handler_failures() const;
    std::uint64_t correlations_issued() const;

    VirtualClock& clock() { return clock_; }

private:
    void tap(const Message& m);

    VirtualClock& clock_;
    std::shared_ptr<detail::BusState> state_;
};

}  // namespace homectx
