#pragma once

#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace homectx {

/// Append-only, line-oriented trace shared by the engine, scheduler and
/// simulator. Lines are kept in memory and optionally mirrored to a stream.
class TraceLog {
public:
    void append(std::string line);

    void mirror_to(std::ostream* out);

    std::vector<std::string> lines() const;
    std::string text() const;
    std::size_t size() const;

    bool contains(const std::string& needle) const;

private:
    mutable std::mutex mutex_;
    std::vector<std::string> lines_;
    std::ostream* out_ = nullptr;
};

}  // namespace homectx
