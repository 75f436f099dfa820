#include "irtrack/jsonio.hpp"

#include <fstream>

#include "json.hpp"

namespace irtrack {

using nlohmann::json;

std::string transform_to_json(const RigidTransform& t) {
    std::string s = "{\"r\":[";
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            if (i || k) s += ",";
            s += fmt9(t.R(i, k));
        }
    s += "],\"t\":[" + fmt9(t.t.x()) + "," + fmt9(t.t.y()) + "," + fmt9(t.t.z()) + "]}";
    return s;
}

RigidTransform transform_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw io_error(std::string("transform: ") + e.what());
    }
    RigidTransform t;
    const auto& r = j.at("r");
    if (r.size() != 9) throw io_error("transform: \"r\" needs 9 row-major numbers");
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) t.R(i, k) = r.at(static_cast<size_t>(i) * 3 + k).get<double>();
    t.t = {j.at("t").at(0).get<double>(), j.at("t").at(1).get<double>(), j.at("t").at(2).get<double>()};
    return t;
}

std::string observation_to_json_line(const ToolObservation& obs) {
    std::string s = "{\"tool\":" + json(obs.tool).dump() + ",\"timestamp\":" + fmt9(obs.timestamp) +
                    ",\"loss\":" + fmt9(obs.loss) + ",\"fit_rmse\":" + fmt9(obs.fit_rmse) +
                    ",\"pose\":" + transform_to_json(obs.pose) + ",\"marker_depths\":[";
    for (size_t i = 0; i < obs.marker_depths.size(); ++i) {
        if (i) s += ",";
        s += fmt9(obs.marker_depths[i]);
    }
    s += "]}";
    return s;
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_intrinsics: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw io_error("load_intrinsics: " + path.string() + ": " + e.what());
    }
    try {
        CameraIntrinsics k;
        k.fx = j.at("fx").get<double>();
        k.fy = j.at("fy").get<double>();
        k.sx = j.at("sx").get<double>();
        k.sy = j.at("sy").get<double>();
        k.cx = j.at("cx").get<double>();
        k.cy = j.at("cy").get<double>();
        k.width = j.at("width").get<int>();
        k.height = j.at("height").get<int>();
        k.validate();
        return k;
    } catch (const json::exception& e) {
        throw io_error("load_intrinsics: " + path.string() + ": " + e.what());
    }
}

void save_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& k) {
    std::ofstream out(path);
    if (!out) throw io_error("save_intrinsics: cannot open " + path.string());
    out << "{\"fx\":" << fmt9(k.fx) << ",\"fy\":" << fmt9(k.fy) << ",\"sx\":" << fmt9(k.sx) << ",\"sy\":"
        << fmt9(k.sy) << ",\"cx\":" << fmt9(k.cx) << ",\"cy\":" << fmt9(k.cy) << ",\"width\":" << k.width
        << ",\"height\":" << k.height << "}\n";
}

NoiseModel load_noise_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_noise_model: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw io_error("load_noise_model: " + path.string() + ": " + e.what());
    }
    try {
        NoiseModel m;
        m.a = j.at("a").get<double>();
        m.b = j.at("b").get<double>();
        m.c = j.at("c").get<double>();
        m.d_min = j.at("range").at(0).get<double>();
        m.d_max = j.at("range").at(1).get<double>();
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw io_error("load_noise_model: " + path.string() + ": " + e.what());
    }
}

void save_noise_model(const std::filesystem::path& path, const NoiseModel& m) {
    std::ofstream out(path);
    if (!out) throw io_error("save_noise_model: cannot open " + path.string());
    out << "{\"a\":" << fmt9(m.a) << ",\"b\":" << fmt9(m.b) << ",\"c\":" << fmt9(m.c) << ",\"range\":["
        << fmt9(m.d_min) << "," << fmt9(m.d_max) << "]}\n";
}

}  // namespace irtrack
