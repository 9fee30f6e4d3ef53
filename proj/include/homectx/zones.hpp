#pragma once

#include <map>
#include <set>
#include <string>

namespace homectx {

/// Maps concrete locations ("BathRoom_30") onto the coarse zones used for
/// case partitioning and same-zone service preference.
class ZoneMap {
public:
    /// Bedroom, BathRoom, Kitchen, LivingRoom, DiningRoom, Hallway.
    ZoneMap();

    /// JSON: {"zones": [...], "rooms": {"BathRoom_30": "BathRoom", ...}}.
    static ZoneMap load(const std::string& path);

    /// Explicit room mapping first; otherwise the location with any trailing
    /// `_<digits>` removed.
    std::string zone_of(const std::string& location) const;

    bool is_known(const std::string& zone) const { return zones_.count(zone) != 0; }
    const std::set<std::string>& zones() const { return zones_; }

    void add_zone(const std::string& zone) { zones_.insert(zone); }
    void map_room(const std::string& room, const std::string& zone);

private:
    std::set<std::string> zones_;
    std::map<std::string, std::string> rooms_;
};

}  // namespace homectx
