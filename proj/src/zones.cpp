#include "homectx/zones.hpp"

#include <fstream>
#include <json.hpp>

#include "homectx/error.hpp"

namespace homectx {

ZoneMap::ZoneMap() : zones_{"Bedroom", "BathRoom", "Kitchen", "LivingRoom", "DiningRoom", "Hallway"} {}

ZoneMap ZoneMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open zones file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    ZoneMap map;
    if (j.contains("zones")) {
        map.zones_.clear();
        for (const auto& z : j.at("zones")) map.zones_.insert(z.get<std::string>());
    }
    if (j.contains("rooms"))
        for (const auto& [room, zone] : j.at("rooms").items()) map.map_room(room, zone.get<std::string>());
    return map;
}

void ZoneMap::map_room(const std::string& room, const std::string& zone) {
    rooms_[room] = zone;
    zones_.insert(zone);
}

std::string ZoneMap::zone_of(const std::string& location) const {
    if (auto it = rooms_.find(location); it != rooms_.end()) return it->second;
    auto us = location.find_last_of('_');
    if (us != std::string::npos && us + 1 < location.size() && us > 0) {
        bool digits = true;
        for (auto i = us + 1; i < location.size(); ++i)
            if (location[i] < '0' || location[i] > '9') digits = false;
        if (digits) return location.substr(0, us);
    }
    return location;
}

}  // namespace homectx
