#include "irtrack/scene.hpp"

#include <fstream>

#include "irtrack/frame.hpp"
#include "irtrack/jsonio.hpp"
#include "json.hpp"

namespace irtrack {

using nlohmann::json;

namespace {

Vec3 vec3_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

RigidTransform transform_from(const json& j) {
    RigidTransform t;
    const auto& r = j.at("r");
    if (r.size() != 9) throw io_error("scene: pose rotation needs 9 row-major numbers");
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) t.R(i, k) = r.at(static_cast<size_t>(i) * 3 + k).get<double>();
    t.t = vec3_from(j.at("t"));
    if (!is_rigid(t, 1e-6)) throw io_error("scene: pose rotation is not orthonormal");
    return t;
}

json transform_to(const RigidTransform& t) {
    json j;
    j["r"] = json::array();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) j["r"].push_back(t.R(i, k));
    j["t"] = {t.t.x(), t.t.y(), t.t.z()};
    return j;
}

}  // namespace

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_scene: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw io_error("load_scene: " + path.string() + ": " + e.what());
    }

    try {
        SceneSpec scene;
        scene.background_max = j.value("background_max", 0);
        for (const auto& jt : j.value("tools", json::array())) {
            PlacedTool placed;
            if (jt.contains("file")) {
                const std::filesystem::path ref = jt.at("file").get<std::string>();
                placed.tool = load_tool(ref.is_absolute() ? ref : path.parent_path() / ref);
            } else if (jt.contains("definition")) {
                const auto& d = jt.at("definition");
                std::vector<Vec3> markers;
                for (const auto& m : d.at("markers_mm")) markers.push_back(vec3_from(m));
                placed.tool = ToolDefinition::create(d.at("name").get<std::string>(), std::move(markers),
                                                     d.at("marker_radius_mm").get<double>());
            } else {
                throw io_error("load_scene: tool entry needs \"file\" or \"definition\"");
            }
            placed.pose = transform_from(jt.at("pose"));
            scene.tools.push_back(std::move(placed));
        }
        for (const auto& js : j.value("stray_markers", json::array()))
            scene.strays.push_back({vec3_from(js.at("center")), js.at("radius").get<double>()});
        for (const auto& jd : j.value("distractors", json::array())) {
            Distractor d;
            d.center = vec3_from(jd.at("center"));
            d.half_x = jd.at("half_size").at(0).get<double>();
            d.half_y = jd.at("half_size").at(1).get<double>();
            d.intensity = jd.value("intensity", 800);
            scene.distractors.push_back(d);
        }
        if (scene.background_max >= 500)
            throw io_error("load_scene: background_max must stay below the marker band");
        return scene;
    } catch (const json::exception& e) {
        throw io_error("load_scene: " + path.string() + ": " + e.what());
    }
}

void save_scene(const std::filesystem::path& path, const SceneSpec& scene) {
    json j;
    j["background_max"] = scene.background_max;
    j["tools"] = json::array();
    for (const auto& placed : scene.tools) {
        json jt;
        jt["definition"] = {{"name", placed.tool.name},
                            {"marker_radius_mm", placed.tool.marker_radius},
                            {"markers_mm", json::array()}};
        for (const auto& m : placed.tool.markers)
            jt["definition"]["markers_mm"].push_back({m.x(), m.y(), m.z()});
        jt["pose"] = transform_to(placed.pose);
        j["tools"].push_back(std::move(jt));
    }
    j["stray_markers"] = json::array();
    for (const auto& s : scene.strays)
        j["stray_markers"].push_back({{"center", {s.center.x(), s.center.y(), s.center.z()}}, {"radius", s.radius}});
    j["distractors"] = json::array();
    for (const auto& d : scene.distractors)
        j["distractors"].push_back({{"center", {d.center.x(), d.center.y(), d.center.z()}},
                                    {"half_size", {d.half_x, d.half_y}},
                                    {"intensity", d.intensity}});

    std::ofstream out(path);
    if (!out) throw io_error("save_scene: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace irtrack
