#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "irtrack/experiments.hpp"
#include "irtrack/jsonio.hpp"
#include "irtrack/nav.hpp"
#include "irtrack/stats.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace irtrack;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw io_error("write failed for " + path.string());
}

std::string axis_name(MotionAxis a) {
    switch (a) {
        case MotionAxis::X: return "x";
        case MotionAxis::Z: return "z";
        default: return "rot";
    }
}

MotionAxis parse_axis(const std::string& s) {
    if (s == "x") return MotionAxis::X;
    if (s == "z") return MotionAxis::Z;
    if (s == "rot") return MotionAxis::RotY;
    throw CLI::ValidationError("--axis", "expected x, z or rot");
}

MotionTrace read_trace_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open trace " + path.string());
    MotionTrace trace;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t, x;
        if (row >> t >> x) {
            trace.t.push_back(t);
            trace.x.push_back(x);
        } else if (line_no > 1) {
            throw io_error("bad trace row in " + path.string() + " line " + std::to_string(line_no));
        }
        // a single non-numeric first line is a header
    }
    if (trace.t.size() < 2) throw io_error("trace " + path.string() + " has fewer than 2 samples");
    return trace;
}

// IRTRACK_DEFAULTS may name a JSON file {"intrinsics": path, "noise": path}
// consulted when the flags are absent; the only environment override.
std::string default_config_entry(const char* key) {
    const char* env = std::getenv("IRTRACK_DEFAULTS");
    if (!env) return {};
    std::ifstream in(env);
    if (!in) throw io_error(std::string("IRTRACK_DEFAULTS: cannot open ") + env);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw io_error(std::string("IRTRACK_DEFAULTS: ") + env + ": " + e.what());
    }
    if (!j.contains(key)) return {};
    const fs::path ref = j.at(key).get<std::string>();
    return (ref.is_absolute() ? ref : fs::path(env).parent_path() / ref).string();
}

struct CommonOpts {
    uint64_t seed = kDefaultSeed;
    std::string intrinsics_file;
    std::string noise_file;

    CameraIntrinsics intrinsics() const {
        std::string file = intrinsics_file.empty() ? default_config_entry("intrinsics") : intrinsics_file;
        return file.empty() ? CameraIntrinsics::ahat_like() : load_intrinsics(file);
    }
    NoiseModel noise() const {
        std::string file = noise_file.empty() ? default_config_entry("noise") : noise_file;
        return file.empty() ? NoiseModel::ahat_default() : load_noise_model(file);
    }
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--seed", c.seed, "Random seed; equal seeds give byte-identical outputs");
    cmd->add_option("--intrinsics", c.intrinsics_file, "Camera intrinsics JSON (default: synthesized 512x512, 127 deg)");
    cmd->add_option("--noise", c.noise_file, "Noise model JSON (default: built-in quadratic)");
}

void add_detector(CLI::App* cmd, DetectorConfig& d, bool* central_pixel) {
    cmd->add_option("--threshold", d.threshold, "Reflectivity threshold (default 500)");
    cmd->add_option("--radius", d.marker_radius, "Marker radius in mm (default 5.75; 0 = flat)");
    cmd->add_option("--min-area", d.min_area, "Minimum blob area in px");
    cmd->add_option("--max-area", d.max_area, "Maximum blob area in px");
    if (central_pixel)
        cmd->add_flag("--central-pixel", *central_pixel, "Use the central-pixel depth instead of the corrected median");
}

int run_simulate(const CommonOpts& common, const std::string& scene_file, const std::string& out_dir, int frames,
                 double fps, bool no_quantize) {
    const SceneSpec scene = load_scene(scene_file);
    const CameraIntrinsics intr = common.intrinsics();
    const NoiseModel noise = common.noise();
    fs::create_directories(out_dir);

    RenderOptions opts;
    opts.quantize = !no_quantize;
    for (int f = 0; f < frames; ++f) {
        opts.timestamp = f / fps;
        const SensorFrame frame =
            render_frame(scene, intr, noise, mix_seed(common.seed, static_cast<uint64_t>(f)), opts);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06d.ahf", f);
        write_ahf(fs::path(out_dir) / name, frame);
    }
    std::cout << "wrote " << frames << " frames to " << out_dir << "\n";
    return 0;
}

std::string detections_to_json(const DetectionResult& result) {
    std::string s = "{\"markers\":[";
    for (size_t i = 0; i < result.markers.size(); ++i) {
        const auto& m = result.markers[i];
        if (i) s += ",";
        s += "{\"position_mm\":[" + fmt9(m.position.x()) + "," + fmt9(m.position.y()) + "," +
             fmt9(m.position.z()) + "],\"surface_depth_mm\":" + fmt9(m.surface_depth) + ",\"centroid_px\":[" +
             fmt9(m.blob.centroid.u) + "," + fmt9(m.blob.centroid.v) + "],\"area_px\":" + fmt9(m.blob.area) +
             ",\"peak\":" + std::to_string(m.blob.peak) + "}";
    }
    s += "],\"dropped_no_depth\":" + std::to_string(result.dropped_no_depth) +
         ",\"dropped_area\":" + std::to_string(result.dropped_area) + "}\n";
    return s;
}

int run_detect(const std::string& in_file, const std::string& out_file, const DetectorConfig& det) {
    const SensorFrame frame = read_ahf(in_file);
    const DetectionResult result = localize_markers(frame, det);
    const std::string text = detections_to_json(result);
    if (out_file.empty())
        std::cout << text;
    else
        write_text(out_file, text);
    return 0;
}

int run_define_tool(const std::string& in_dir, const std::string& out_file, const std::string& name,
                    const DetectorConfig& det, int marker_count, int min_frames, double tolerance) {
    const auto files = list_ahf(in_dir);
    std::vector<std::vector<Vec3>> observed;
    for (const auto& f : files) {
        const auto markers = localize_markers(read_ahf(f), det).markers;
        std::vector<Vec3> pts;
        for (const auto& m : markers) pts.push_back(m.position);
        observed.push_back(std::move(pts));
    }

    if (marker_count == 0) {
        // most common detection count across the collection
        std::map<size_t, int> histogram;
        for (const auto& f : observed) ++histogram[f.size()];
        int best = 0;
        for (const auto& [count, votes] : histogram)
            if (count >= 3 && votes > best) {
                best = votes;
                marker_count = static_cast<int>(count);
            }
        if (marker_count == 0) throw io_error("define-tool: no frame with >= 3 detected markers");
    }

    DefinitionSession session;
    session.tolerance_mm = tolerance;
    for (auto& f : observed)
        if (static_cast<int>(f.size()) == marker_count) session.frames.push_back(std::move(f));
    if (static_cast<int>(session.frames.size()) < min_frames)
        throw io_error("define-tool: only " + std::to_string(session.frames.size()) + " usable frames, need " +
                       std::to_string(min_frames));

    CorrespondenceReport corr;
    const DefinitionSession corresponded = correspond_frames(session, &corr);
    DefinitionReport report;
    const ToolDefinition tool = define_tool(corresponded, name, det.marker_radius, &report);
    save_tool(out_file, tool);
    std::cout << "defined '" << name << "' from " << report.frames_used << " frames ("
              << corr.frames_rejected << " rejected), " << report.iterations << " iterations, residual "
              << fmt9(report.objective) << " mm\n";
    return 0;
}

int run_validate_tools(const std::vector<std::string>& tool_files, double t_side, const std::string& out_file) {
    std::vector<ToolDefinition> tools;
    for (const auto& f : tool_files) tools.push_back(load_tool(f));
    const DistinctnessReport report = validate_distinctness(tools, t_side);

    std::string s = "{\"t_side_mm\":" + fmt9(t_side) + ",\"self_ambiguous\":[";
    for (size_t i = 0; i < report.self_ambiguous.size(); ++i) {
        const auto& a = report.self_ambiguous[i];
        if (i) s += ",";
        s += "{\"tool\":" + json(a.tool).dump() + ",\"length_a_mm\":" + fmt9(a.length_a) +
             ",\"length_b_mm\":" + fmt9(a.length_b) + "}";
    }
    s += "],\"confusable\":[";
    for (size_t i = 0; i < report.confusable.size(); ++i) {
        const auto& c = report.confusable[i];
        if (i) s += ",";
        s += "{\"tool_a\":" + json(c.tool_a).dump() + ",\"tool_b\":" + json(c.tool_b).dump() +
             ",\"max_gap_mm\":" + fmt9(c.max_gap) + "}";
    }
    s += "],\"clean\":" + std::string(report.clean() ? "true" : "false") + "}\n";

    if (out_file.empty())
        std::cout << s;
    else
        write_text(out_file, s);
    return 0;
}

int run_track(const CommonOpts& common, const std::vector<std::string>& tool_files, const std::string& in_dir,
              const std::string& out_file, bool no_kalman, double t_side, double confidence, int max_missed,
              double q, DetectorConfig det, bool central_pixel) {
    std::vector<ToolDefinition> tools;
    for (const auto& f : tool_files) tools.push_back(load_tool(f));
    if (tools.empty()) throw io_error("track: no tools given");

    TrackerConfig cfg;
    cfg.noise = common.noise();
    cfg.use_kalman = !no_kalman;
    cfg.confidence_factor = confidence;
    cfg.max_missed = max_missed;
    cfg.process_noise_q = q;
    if (t_side > 0) cfg.t_side_override = t_side;

    det.marker_radius = det.marker_radius > 0 ? det.marker_radius : tools.front().marker_radius;
    if (central_pixel) det.depth_mode = DetectorConfig::DepthMode::central_pixel;

    TrackerSession session(tools, cfg);
    std::string log;
    for (const auto& file : list_ahf(in_dir)) {
        const SensorFrame frame = read_ahf(file);
        const auto detections = localize_markers(frame, det).markers;
        for (const auto& obs : session.track_frame(detections, frame.timestamp))
            log += observation_to_json_line(obs) + "\n";
    }
    if (out_file.empty())
        std::cout << log;
    else
        write_text(out_file, log);
    return 0;
}

int run_accuracy(const CommonOpts& common, const std::string& axis_str, double magnitude, double depth,
                 int frames, int pairs, int reps, bool no_quantize, int jobs, const std::string& tool_file,
                 const std::string& out_file, const std::string& summary_file) {
    const MotionAxis axis = parse_axis(axis_str);
    ExperimentConfig cfg;
    cfg.intrinsics = common.intrinsics();
    cfg.noise = common.noise();
    cfg.seed = common.seed;
    cfg.frames_per_pose = frames;
    cfg.pairs = pairs;
    cfg.reps = reps;
    cfg.quantize = !no_quantize;
    cfg.jobs = jobs;

    const ToolDefinition tool = tool_file.empty() ? make_test_tool(0) : load_tool(tool_file);
    const AccuracyPair result = accuracy_experiment(tool, experiment_pose(depth), axis, magnitude, cfg);

    const std::string unit = axis == MotionAxis::RotY ? "deg" : "mm";
    std::string csv = "axis,magnitude_" + unit + ",variant,rep,median_" + unit + ",iqr_" + unit + "\n";
    const auto rows = [&](const AccuracySummary& s, const char* variant) {
        for (size_t r = 0; r < s.rep_median.size(); ++r)
            csv += axis_str + "," + fmt9(magnitude) + "," + variant + "," + std::to_string(r) + "," +
                   fmt9(s.rep_median[r]) + "," + fmt9(s.rep_iqr[r]) + "\n";
        csv += axis_str + "," + fmt9(magnitude) + "," + variant + ",all," + fmt9(s.median) + "," +
               fmt9(s.iqr) + "\n";
    };
    rows(result.unfiltered, "raw");
    rows(result.filtered, "kalman");
    if (out_file.empty())
        std::cout << csv;
    else
        write_text(out_file, csv);

    if (!summary_file.empty()) {
        const std::string s = "{\"axis\":\"" + axis_str + "\",\"magnitude_" + unit + "\":" + fmt9(magnitude) +
                              ",\"raw\":{\"median\":" + fmt9(result.unfiltered.median) +
                              ",\"iqr\":" + fmt9(result.unfiltered.iqr) +
                              "},\"kalman\":{\"median\":" + fmt9(result.filtered.median) +
                              ",\"iqr\":" + fmt9(result.filtered.iqr) + "}}\n";
        write_text(summary_file, s);
    }
    return 0;
}

int run_sweep(const CommonOpts& common, const std::string& axis_str, double from, double to, double step,
              int frames, double depth, bool no_quantize, const std::string& tool_file,
              const std::string& out_file, const std::string& summary_file) {
    const MotionAxis axis = parse_axis(axis_str);
    if (axis == MotionAxis::RotY) throw CLI::ValidationError("--axis", "sweep axes are x and z");

    ExperimentConfig cfg;
    cfg.intrinsics = common.intrinsics();
    cfg.noise = common.noise();
    cfg.seed = common.seed;
    cfg.quantize = !no_quantize;

    const ToolDefinition tool = tool_file.empty() ? make_test_tool(0, 8.0) : load_tool(tool_file);
    const SweepResult result = workspace_sweep(tool, experiment_pose(depth), axis, from, to, step, frames, cfg);

    std::string csv = "station,commanded_mm,measured_mm,error_mm,frames_tracked,missing\n";
    for (size_t i = 0; i < result.stations.size(); ++i) {
        const auto& st = result.stations[i];
        csv += std::to_string(i) + "," + fmt9(st.commanded) + "," + fmt9(st.measured) + "," + fmt9(st.error) +
               "," + std::to_string(st.frames_tracked) + "," + (st.missing ? "1" : "0") + "\n";
    }
    if (out_file.empty())
        std::cout << csv;
    else
        write_text(out_file, csv);

    if (!summary_file.empty())
        write_text(summary_file, "{\"max_abs_error_mm\":" + fmt9(result.max_abs_error) +
                                     ",\"implied_fov_deg\":" + fmt9(result.implied_fov_deg) + "}\n");
    return 0;
}

int run_bench(const CommonOpts& common, const std::string& cases, int frames, const std::string& out_file,
              const std::string& summary_file) {
    ExperimentConfig cfg;
    cfg.intrinsics = common.intrinsics();
    cfg.noise = common.noise();
    cfg.seed = common.seed;

    std::vector<std::pair<int, int>> grid;
    std::istringstream list(cases);
    std::string item;
    while (std::getline(list, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--cases", "expected LOADED:VISIBLE pairs");
        grid.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
    }

    // detection rates are seed-deterministic and go to the CSV; wall-clock
    // timing is inherently run-dependent and lives in the JSON summary
    std::string csv = "loaded,visible,frames,tool,found_rate\n";
    std::string summary = "{\"cells\":[";
    for (size_t g = 0; g < grid.size(); ++g) {
        const BenchResult r = runtime_bench(grid[g].first, grid[g].second, frames, cfg);
        for (int ti = 0; ti < r.loaded; ++ti) {
            csv += std::to_string(r.loaded) + "," + std::to_string(r.visible) + "," + std::to_string(r.frames) +
                   ",tool" + std::to_string(ti) + "," + fmt9(r.found_rate[static_cast<size_t>(ti)]) + "\n";
            if (r.found_rate[static_cast<size_t>(ti)] == 0.0)
                std::cout << "tool" << ti << " (loaded " << r.loaded << "/visible " << r.visible
                          << "): not detected\n";
        }
        if (g) summary += ",";
        summary += "{\"loaded\":" + std::to_string(r.loaded) + ",\"visible\":" + std::to_string(r.visible) +
                   ",\"frames\":" + std::to_string(r.frames) + ",\"mean_ms\":" + fmt9(r.mean_ms) +
                   ",\"hz\":" + fmt9(r.hz) + "}";
        std::cout << "loaded " << r.loaded << " visible " << r.visible << ": " << fmt9(r.mean_ms)
                  << " ms/frame (" << fmt9(r.hz) << " Hz)\n";
    }
    summary += "]}\n";

    if (out_file.empty())
        std::cout << csv;
    else
        write_text(out_file, csv);
    if (!summary_file.empty()) write_text(summary_file, summary);
    return 0;
}

int run_latency(const std::string& ref_file, const std::string& test_file, double t_mov,
                const std::string& summary_file) {
    const MotionTrace reference = read_trace_csv(ref_file);
    const MotionTrace test = read_trace_csv(test_file);
    const double delay = estimate_latency(reference, test, t_mov);
    const std::string s = "{\"delay_s\":" + fmt9(delay) + "}\n";
    std::cout << s;
    if (!summary_file.empty()) write_text(summary_file, s);
    return 0;
}

int run_noise_fit(const CommonOpts& common, int depths, int frames, double d_lo, double d_hi, bool no_quantize,
                  bool no_sheppard, const std::string& out_file, const std::string& summary_file) {
    ExperimentConfig cfg;
    cfg.intrinsics = common.intrinsics();
    cfg.noise = common.noise();
    cfg.seed = common.seed;
    cfg.quantize = !no_quantize;

    const NoiseCharacterization result = characterize_noise(depths, frames, d_lo, d_hi, cfg, !no_sheppard);

    std::string csv = "depth_mm,sigma_mm\n";
    for (size_t i = 0; i < result.depth.size(); ++i)
        csv += fmt9(result.depth[i]) + "," + fmt9(result.sigma[i]) + "\n";
    if (out_file.empty())
        std::cout << csv;
    else
        write_text(out_file, csv);

    const std::string s = "{\"a\":" + fmt9(result.fitted.a) + ",\"b\":" + fmt9(result.fitted.b) +
                          ",\"c\":" + fmt9(result.fitted.c) + ",\"r_squared\":" + fmt9(result.r_squared) +
                          ",\"ad_rejects\":" + std::to_string(result.ad_rejects) +
                          ",\"stations\":" + std::to_string(result.stations) + "}\n";
    std::cout << s;
    if (!summary_file.empty()) write_text(summary_file, s);
    return 0;
}

Vec3 vec3_at(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

RigidTransform pose_at(const json& j) {
    RigidTransform t;
    const auto& r = j.at("r");
    if (r.size() != 9) throw io_error("pose needs 9 row-major rotation numbers");
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) t.R(i, k) = r.at(static_cast<size_t>(i) * 3 + k).get<double>();
    t.t = vec3_at(j.at("t"));
    return t;
}

// last pose of a named tool in a JSON-lines pose log
RigidTransform last_logged_pose(const fs::path& log, const std::string& tool) {
    std::ifstream in(log);
    if (!in) throw io_error("cannot open pose log " + log.string());
    std::string line;
    bool found = false;
    RigidTransform pose;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw io_error("pose log " + log.string() + ": " + e.what());
        }
        if (j.at("tool").get<std::string>() != tool) continue;
        pose = pose_at(j.at("pose"));
        found = true;
    }
    if (!found) throw io_error("pose log " + log.string() + " has no observation of tool '" + tool + "'");
    return pose;
}

int run_score_trajectories(const std::string& in_file, const std::string& out_file) {
    std::ifstream in(in_file);
    if (!in) throw io_error("cannot open " + in_file);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw io_error(std::string("score-trajectories: ") + in_file + ": " + e.what());
    }

    std::string csv = "pair,translation_mm,angle_deg\n";
    try {
        FrameGraph graph;
        for (const auto& edge : j.value("graph", json::array()))
            graph.add_edge(edge.at("child").get<std::string>(), edge.at("parent").get<std::string>(),
                           pose_at(edge.at("transform")), edge.value("t", 0.0));

        const auto read = [&](const json& t) -> Trajectory {
            if (t.contains("from_log")) {
                // executed trajectory out of a tracking run: the tool tip and
                // axis ride on the last logged pose, optionally mapped through
                // the frame graph (path ends at the camera frame)
                const auto& src = t.at("from_log");
                const fs::path log =
                    fs::path(in_file).parent_path() / src.at("log").get<std::string>();
                RigidTransform pose = last_logged_pose(log, src.at("tool").get<std::string>());
                if (src.contains("path")) {
                    std::vector<std::string> path;
                    for (const auto& hop : src.at("path")) path.push_back(hop.get<std::string>());
                    pose = compose(graph.chain_pose(path), pose);
                }
                Trajectory out;
                out.entry = pose(vec3_at(src.at("tip_offset_mm")));
                out.direction = (pose.R * vec3_at(src.at("axis")).normalized()).normalized();
                return out;
            }
            return {vec3_at(t.at("entry")), vec3_at(t.at("direction"))};
        };

        int index = 0;
        for (const auto& pair : j.at("pairs")) {
            const TrajectoryError e = trajectory_error(read(pair.at("planned")), read(pair.at("executed")));
            csv += std::to_string(index++) + "," + fmt9(e.translation_mm) + "," + fmt9(e.angle_deg) + "\n";
        }
    } catch (const json::exception& e) {
        throw io_error(std::string("score-trajectories: ") + in_file + ": " + e.what());
    }

    if (out_file.empty())
        std::cout << csv;
    else
        write_text(out_file, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retro-reflective tool tracking on simulated ToF reflectivity/depth frames"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 2 usage error, 3 malformed input file, 4 degenerate geometry.");

    std::function<int()> action;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Render AHF frames of a scene");
    {
        static CommonOpts common;
        static std::string scene_file, out_dir;
        static int frames = 100;
        static double fps = 45.0;
        static bool no_quantize = false;
        add_common(sim, common);
        sim->add_option("--scene", scene_file, "Scene JSON")->required();
        sim->add_option("--out", out_dir, "Output directory")->required();
        sim->add_option("--frames", frames, "Frame count (default 100)");
        sim->add_option("--fps", fps, "Timestamp rate (default 45)");
        sim->add_flag("--no-quantize", no_quantize, "Keep sub-millimeter depth");
        sim->callback([&] { action = [&] { return run_simulate(common, scene_file, out_dir, frames, fps, no_quantize); }; });
    }

    // detect
    auto* det_cmd = app.add_subcommand("detect", "Extract 3-D marker centers from one AHF frame");
    {
        static std::string in_file, out_file;
        static DetectorConfig det;
        static bool central_pixel = false;
        det_cmd->add_option("--in", in_file, "AHF frame")->required();
        det_cmd->add_option("--out", out_file, "Detections JSON (stdout if omitted)");
        add_detector(det_cmd, det, &central_pixel);
        det_cmd->callback([&] {
            action = [&] {
                if (central_pixel) det.depth_mode = DetectorConfig::DepthMode::central_pixel;
                return run_detect(in_file, out_file, det);
            };
        });
    }

    // define-tool
    auto* def = app.add_subcommand("define-tool", "Build a tool definition from a frame collection");
    {
        static std::string in_dir, out_file, name;
        static DetectorConfig det;
        static int marker_count = 0, min_frames = 10;
        static double tolerance = 3.0;
        def->add_option("--in", in_dir, "Directory of AHF frames")->required();
        def->add_option("--out", out_file, "Tool JSON")->required();
        def->add_option("--name", name, "Tool name")->required();
        def->add_option("--marker-count", marker_count, "Expected marker count (default: most common)");
        def->add_option("--min-frames", min_frames, "Minimum usable frames (default 10)");
        def->add_option("--tolerance", tolerance, "Session admission tolerance in mm (default 3)");
        add_detector(def, det, nullptr);
        def->callback([&] {
            action = [&] { return run_define_tool(in_dir, out_file, name, det, marker_count, min_frames, tolerance); };
        });
    }

    // validate-tools
    auto* val = app.add_subcommand("validate-tools", "Check tools for self-ambiguity and cross-tool confusion");
    {
        static std::vector<std::string> tool_files;
        static std::string out_file;
        static double t_side = 1.7;
        val->add_option("--tools", tool_files, "Tool JSON files")->required()->expected(-1);
        val->add_option("--t-side", t_side, "Side threshold in mm (default 1.7)");
        val->add_option("--out", out_file, "Report JSON (stdout if omitted)");
        val->callback([&] { action = [&] { return run_validate_tools(tool_files, t_side, out_file); }; });
    }

    // track
    auto* trk = app.add_subcommand("track", "Track tools through an AHF frame directory");
    {
        static CommonOpts common;
        static std::vector<std::string> tool_files;
        static std::string in_dir, out_file;
        static bool no_kalman = false, central_pixel = false;
        static double t_side = 0, confidence = 2.0, q = 1.0;
        static int max_missed = 1;
        static DetectorConfig det;
        det.marker_radius = 0;  // default: first tool's radius
        add_common(trk, common);
        trk->add_option("--tools", tool_files, "Tool JSON files")->required()->expected(-1);
        trk->add_option("--in", in_dir, "Directory of AHF frames")->required();
        trk->add_option("--out", out_file, "Pose log, one JSON line per observation (stdout if omitted)");
        trk->add_flag("--no-kalman", no_kalman, "Disable per-marker depth filtering");
        trk->add_option("--t-side", t_side, "Fixed side threshold in mm (default: derived from noise)");
        trk->add_option("--confidence", confidence, "Sigma multiple for the side threshold (default 2)");
        trk->add_option("--max-missed", max_missed, "Missed frames before filter reset (default 1)");
        trk->add_option("--q", q, "Kalman process noise in mm^2/frame (default 1)");
        add_detector(trk, det, &central_pixel);
        trk->callback([&] {
            action = [&] {
                return run_track(common, tool_files, in_dir, out_file, no_kalman, t_side, confidence, max_missed,
                                 q, det, central_pixel);
            };
        });
    }

    // accuracy
    auto* acc = app.add_subcommand("accuracy", "Paired translation/rotation accuracy experiment");
    {
        static CommonOpts common;
        static std::string axis = "x", tool_file, out_file, summary_file;
        static double magnitude = 1.0, depth = 600.0;
        static int frames = 100, pairs = 10000, reps = 20, jobs = 1;
        static bool no_quantize = false;
        add_common(acc, common);
        acc->add_option("--axis", axis, "x, z or rot")->required();
        acc->add_option("--magnitude", magnitude, "Commanded move (mm or degrees)")->required();
        acc->add_option("--depth", depth, "Base tool depth in mm (default 600)");
        acc->add_option("--frames", frames, "Frames per pose (default 100)");
        acc->add_option("--pairs", pairs, "Sampled cross pairs (default 10000)");
        acc->add_option("--reps", reps, "Repetitions with disjoint seeds (default 20)");
        acc->add_option("--jobs", jobs, "Worker threads over repetitions");
        acc->add_flag("--no-quantize", no_quantize, "Disable 1 mm depth quantization");
        acc->add_option("--tool", tool_file, "Tool JSON (default: built-in scalene tool)");
        acc->add_option("--out", out_file, "CSV output (stdout if omitted)");
        acc->add_option("--summary", summary_file, "JSON summary");
        acc->callback([&] {
            action = [&] {
                return run_accuracy(common, axis, magnitude, depth, frames, pairs, reps, no_quantize, jobs,
                                    tool_file, out_file, summary_file);
            };
        });
    }

    // sweep
    auto* swp = app.add_subcommand("sweep", "Workspace sweep along x or z");
    {
        static CommonOpts common;
        static std::string axis = "z", tool_file, out_file, summary_file;
        static double from = 0, to = 500, step = 10, depth = 500;
        static int frames = 50;
        static bool no_quantize = false;
        add_common(swp, common);
        swp->add_option("--axis", axis, "x or z")->required();
        swp->add_option("--from", from, "First station offset in mm")->required();
        swp->add_option("--to", to, "Last station offset in mm")->required();
        swp->add_option("--step", step, "Station spacing in mm (default 10)");
        swp->add_option("--frames", frames, "Frames per station (default 50)");
        swp->add_option("--depth", depth, "Base tool depth in mm (default 500)");
        swp->add_flag("--no-quantize", no_quantize, "Disable 1 mm depth quantization");
        swp->add_option("--tool", tool_file, "Tool JSON (default: built-in, 8 mm markers)");
        swp->add_option("--out", out_file, "CSV output (stdout if omitted)");
        swp->add_option("--summary", summary_file, "JSON summary");
        swp->callback([&] {
            action = [&] {
                return run_sweep(common, axis, from, to, step, frames, depth, no_quantize, tool_file, out_file,
                                 summary_file);
            };
        });
    }

    // bench
    auto* ben = app.add_subcommand("bench", "Offline tracking runtime over pre-rendered frames");
    {
        static CommonOpts common;
        static std::string cases = "1:1,5:5", out_file, summary_file;
        static int frames = 10000;
        add_common(ben, common);
        ben->add_option("--cases", cases, "LOADED:VISIBLE cells, comma separated (default 1:1,5:5)");
        ben->add_option("--frames", frames, "track calls per cell (default 10000)");
        ben->add_option("--out", out_file, "CSV of deterministic detection rates");
        ben->add_option("--summary", summary_file, "JSON summary with wall-clock timing");
        ben->callback([&] { action = [&] { return run_bench(common, cases, frames, out_file, summary_file); }; });
    }

    // latency
    auto* lat = app.add_subcommand("latency", "Delay between two displacement traces");
    {
        static std::string ref_file, test_file, summary_file;
        static double t_mov = 15.0;
        lat->add_option("--reference", ref_file, "Reference trace CSV (t_s,x_mm)")->required();
        lat->add_option("--test", test_file, "Test trace CSV (t_s,x_mm)")->required();
        lat->add_option("--t-mov", t_mov, "Motion period bound in s (default 15)");
        lat->add_option("--summary", summary_file, "JSON summary");
        lat->callback([&] { action = [&] { return run_latency(ref_file, test_file, t_mov, summary_file); }; });
    }

    // noise-fit
    auto* nf = app.add_subcommand("noise-fit", "Static-plane depth noise characterization");
    {
        static CommonOpts common;
        static std::string out_file, summary_file;
        static int depths = 48, frames = 300;
        static double d_lo = 200, d_hi = 950;
        static bool no_quantize = false, no_sheppard = false;
        add_common(nf, common);
        nf->add_option("--depths", depths, "Number of plane stations (default 48)");
        nf->add_option("--frames", frames, "Frames per station (default 300)");
        nf->add_option("--min-depth", d_lo, "Nearest station in mm (default 200)");
        nf->add_option("--max-depth", d_hi, "Farthest station in mm (default 950)");
        nf->add_flag("--no-quantize", no_quantize, "Disable 1 mm depth quantization");
        nf->add_flag("--no-sheppard", no_sheppard, "Do not subtract the quantizer variance");
        nf->add_option("--out", out_file, "CSV of per-station sigma (stdout if omitted)");
        nf->add_option("--summary", summary_file, "JSON summary with the fitted quadratic");
        nf->callback([&] {
            action = [&] {
                return run_noise_fit(common, depths, frames, d_lo, d_hi, no_quantize, no_sheppard, out_file,
                                     summary_file);
            };
        });
    }

    // score-trajectories
    auto* score = app.add_subcommand("score-trajectories", "Translation/angle error of executed vs planned paths");
    {
        static std::string in_file, out_file;
        score->add_option("--in", in_file, "JSON with planned/executed trajectory pairs")->required();
        score->add_option("--out", out_file, "CSV output (stdout if omitted)");
        score->callback([&] { action = [&] { return run_score_trajectories(in_file, out_file); }; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const degenerate_geometry& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const degenerate_pivot& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const degenerate_fit& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
