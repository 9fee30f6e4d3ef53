#include "homectx/trace.hpp"

namespace homectx {

void TraceLog::append(std::string line) {
    std::lock_guard lock(mutex_);
    if (out_) *out_ << line << '\n';
    lines_.push_back(std::move(line));
}

void TraceLog::mirror_to(std::ostream* out) {
    std::lock_guard lock(mutex_);
    out_ = out;
}

std::vector<std::string> TraceLog::lines() const {
    std::lock_guard lock(mutex_);
    return lines_;
}

std::string TraceLog::text() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& l : lines_) {
        out += l;
        out += '\n';
    }
    return out;
}

std::size_t TraceLog::size() const {
    std::lock_guard lock(mutex_);
    return lines_.size();
}

bool TraceLog::contains(const std::string& needle) const {
    std::lock_guard lock(mutex_);
    for (const auto& l : lines_)
        if (l.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace homectx
