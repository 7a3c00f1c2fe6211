#include "beam/snapshot.hpp"

#include <stdexcept>

namespace beam {

using nlohmann::json;

json snapshot_to_json(const StateSnapshot& snap) {
    json j;
    j["t"] = snap.t;
    j["c"] = snap.c;
    j["cdot"] = snap.cdot;
    if (const auto* mom = std::get_if<MomentHistory>(&snap.history)) {
        j["w"] = mom->w;
        j["m"] = mom->m;
    } else {
        const auto& sampled = std::get<SampledHistory>(snap.history);
        j["ds"] = sampled.ds;
        j["eta"] = sampled.eta;
    }
    return j;
}

StateSnapshot snapshot_from_json(const json& j) {
    try {
        StateSnapshot snap;
        snap.t = j.at("t").get<double>();
        snap.c = j.at("c").get<std::vector<double>>();
        snap.cdot = j.at("cdot").get<std::vector<double>>();
        if (snap.c.size() != snap.cdot.size()) throw std::invalid_argument("snapshot: c and cdot differ in length");
        if (j.contains("w")) {
            MomentHistory mom{j.at("w").get<std::vector<double>>(), j.at("m").get<std::vector<double>>()};
            if (mom.w.size() != snap.c.size() || mom.m.size() != snap.c.size()) {
                throw std::invalid_argument("snapshot: moment vectors differ in length from c");
            }
            snap.history = std::move(mom);
        } else {
            SampledHistory sampled{j.at("ds").get<double>(), j.at("eta").get<std::vector<std::vector<double>>>()};
            if (sampled.eta.size() != snap.c.size()) throw std::invalid_argument("snapshot: eta needs one row per mode");
            snap.history = std::move(sampled);
        }
        return snap;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("snapshot: ") + e.what());
    }
}

}  // namespace beam
