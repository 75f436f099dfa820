#include "irtrack/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include "irtrack/detect.hpp"
#include "irtrack/stats.hpp"

namespace irtrack {

ToolDefinition tool_from_lengths(const std::string& name, const std::array<double, 6>& lengths,
                                 double marker_radius) {
    const double ab = lengths[0], ac = lengths[1], ad = lengths[2];
    const double bc = lengths[3], bd = lengths[4], cd = lengths[5];
    for (double l : lengths)
        if (!(l > 0)) throw std::invalid_argument("tool_from_lengths: lengths must be positive");

    const Vec3 a = Vec3::Zero();
    const Vec3 b(ab, 0, 0);
    const double cx = (ab * ab + ac * ac - bc * bc) / (2 * ab);
    const double cy2 = ac * ac - cx * cx;
    if (!(cy2 > 0)) throw degenerate_geometry("tool_from_lengths: ABC does not embed");
    const Vec3 c(cx, std::sqrt(cy2), 0);
    const double dx = (ab * ab + ad * ad - bd * bd) / (2 * ab);
    const double dy = (ad * ad + cx * cx + cy2 - cd * cd - 2 * dx * cx) / (2 * c.y());
    const double dz2 = ad * ad - dx * dx - dy * dy;
    if (!(dz2 > 0)) throw degenerate_geometry("tool_from_lengths: D does not embed in 3-D");
    const Vec3 d(dx, dy, std::sqrt(dz2));

    return ToolDefinition::create(name, {a, b, c, d}, marker_radius);
}

ToolDefinition make_test_tool(int k, double marker_radius) {
    // scalene base with 8 mm gaps between sorted lengths; scaling keeps the
    // shape embeddable and the families mutually distinguishable
    const double scale = 1.0 + 0.15 * k;
    std::array<double, 6> lengths{50, 66, 58, 82, 74, 90};  // AB, AC, AD, BC, BD, CD
    for (auto& l : lengths) l *= scale;
    return tool_from_lengths("tool" + std::to_string(k), lengths, marker_radius);
}

RigidTransform experiment_pose(double depth_mm) {
    RigidTransform pose;
    pose.R = axis_angle(Vec3(1, 0.25, 0), deg2rad(28.0));
    pose.t = Vec3(0, 0, depth_mm);
    return pose;
}

namespace {

// No marker hides behind or touches another along a view ray; separation
// margin covers blob merging in the image.
bool occlusion_free(const ToolDefinition& tool, const RigidTransform& pose) {
    std::vector<Vec3> pts;
    for (const auto& m : tool.markers) pts.push_back(pose(m));
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = 0; j < pts.size(); ++j) {
            if (i == j || pts[i].norm() > pts[j].norm()) continue;
            const Vec3 ray = pts[j].normalized();
            const double miss = (pts[i] - pts[i].dot(ray) * ray).norm();
            if (miss < 2.6 * tool.marker_radius) return false;
        }
    return true;
}

std::vector<DetectedMarker> ideal_detections(const SceneSpec& scene, const CameraIntrinsics& intrinsics) {
    std::vector<DetectedMarker> out;
    auto add = [&](const Vec3& center, double radius) {
        if (center.z() <= 0) return;
        const Pixel px = project(intrinsics, center);
        if (!intrinsics.contains(px)) return;
        DetectedMarker d;
        d.position = center;
        d.surface_depth = center.norm() - radius;
        d.blob.centroid = px;
        out.push_back(std::move(d));
    };
    for (const auto& placed : scene.tools)
        for (const auto& m : placed.tool.markers) add(placed.pose(m), placed.tool.marker_radius);
    for (const auto& s : scene.strays) add(s.center, s.radius);
    return out;
}

}  // namespace

namespace {

RigidTransform moved_pose(const RigidTransform& base, MotionAxis axis, double magnitude) {
    RigidTransform out = base;
    switch (axis) {
        case MotionAxis::X:
            out.t.x() += magnitude;
            break;
        case MotionAxis::Z:
            out.t.z() += magnitude;
            break;
        case MotionAxis::RotY:
            out.R = axis_angle(Vec3(0, 1, 0), deg2rad(magnitude)) * base.R;
            break;
    }
    return out;
}

Vec3 motion_unit(MotionAxis axis) {
    return axis == MotionAxis::X ? Vec3(1, 0, 0) : Vec3(0, 0, 1);
}

struct PoseSamples {
    std::vector<Vec3> t;
    std::vector<Mat3> r;
};

struct CollectedPhase {
    PoseSamples raw;
    PoseSamples filtered;
};

CollectedPhase collect_static_poses(const ToolDefinition& tool, const RigidTransform& pose,
                                    const ExperimentConfig& cfg, uint64_t phase_seed) {
    SceneSpec scene;
    scene.tools.push_back({tool, pose});

    DetectorConfig det = cfg.detector;
    det.marker_radius = tool.marker_radius;

    TrackerConfig raw_cfg = cfg.tracker;
    raw_cfg.noise = cfg.noise;
    raw_cfg.use_kalman = false;
    raw_cfg.quantized_depth = cfg.quantize;
    TrackerConfig kal_cfg = raw_cfg;
    kal_cfg.use_kalman = true;

    TrackerSession raw_session({tool}, raw_cfg);
    TrackerSession kal_session({tool}, kal_cfg);

    RenderOptions opts;
    opts.quantize = cfg.quantize;

    CollectedPhase out;
    for (int f = 0; f < cfg.frames_per_pose; ++f) {
        opts.timestamp = f / 45.0;
        std::vector<DetectedMarker> detections;
        if (cfg.ideal_detection) {
            detections = ideal_detections(scene, cfg.intrinsics);
        } else {
            const SensorFrame frame = render_frame(scene, cfg.intrinsics, cfg.noise,
                                                   mix_seed(phase_seed, static_cast<uint64_t>(f)), opts);
            detections = localize_markers(frame, det).markers;
        }
        const std::pair<TrackerSession*, PoseSamples*> lanes[] = {{&raw_session, &out.raw},
                                                                  {&kal_session, &out.filtered}};
        for (const auto& [session, samples] : lanes) {
            const auto observations = session->track_frame(detections, opts.timestamp);
            for (const auto& obs : observations)
                if (obs.tool == tool.name) {
                    samples->t.push_back(obs.pose.t);
                    samples->r.push_back(obs.pose.R);
                }
        }
    }
    return out;
}

void run_indexed(int jobs, int count, const std::function<void(int)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min(jobs, count);
    workers.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : workers) t.join();
}

}  // namespace

AccuracyPair accuracy_experiment(const ToolDefinition& tool, const RigidTransform& base_pose, MotionAxis axis,
                                 double magnitude, const ExperimentConfig& cfg) {
    const RigidTransform pose_b = moved_pose(base_pose, axis, magnitude);
    const Vec3 unit = motion_unit(axis);

    std::vector<std::vector<double>> rep_raw(static_cast<size_t>(cfg.reps));
    std::vector<std::vector<double>> rep_kal(static_cast<size_t>(cfg.reps));

    run_indexed(cfg.jobs, cfg.reps, [&](int rep) {
        const uint64_t rep_seed = mix_seed(cfg.seed, 1000 + static_cast<uint64_t>(rep));
        const CollectedPhase a = collect_static_poses(tool, base_pose, cfg, mix_seed(rep_seed, 1));
        const CollectedPhase b = collect_static_poses(tool, pose_b, cfg, mix_seed(rep_seed, 2));

        auto sample = [&](const PoseSamples& pa, const PoseSamples& pb, std::vector<double>& out) {
            if (pa.t.empty() || pb.t.empty())
                throw std::runtime_error("accuracy_experiment: tool was never tracked");
            Rng rng(mix_seed(rep_seed, 3));
            out.reserve(static_cast<size_t>(cfg.pairs));
            for (int p = 0; p < cfg.pairs; ++p) {
                const size_t i = rng.integer(pa.t.size());
                const size_t j = rng.integer(pb.t.size());
                double value;
                if (axis == MotionAxis::RotY)
                    value = rotation_angle_deg(pb.r[j] * pa.r[i].transpose());
                else
                    value = (pb.t[j] - pa.t[i]).dot(unit);
                out.push_back(value - magnitude);
            }
        };
        sample(a.raw, b.raw, rep_raw[static_cast<size_t>(rep)]);
        sample(a.filtered, b.filtered, rep_kal[static_cast<size_t>(rep)]);
    });

    auto summarize = [&](const std::vector<std::vector<double>>& reps) {
        AccuracySummary s;
        std::vector<double> pooled;
        for (const auto& r : reps) {
            s.rep_median.push_back(median(r));
            s.rep_iqr.push_back(iqr(r));
            pooled.insert(pooled.end(), r.begin(), r.end());
        }
        s.median = median(pooled);
        s.iqr = iqr(std::move(pooled));
        return s;
    };
    return {summarize(rep_raw), summarize(rep_kal)};
}

SweepResult workspace_sweep(const ToolDefinition& tool, const RigidTransform& base_pose, MotionAxis axis,
                            double from, double to, double step, int frames_per_station,
                            const ExperimentConfig& cfg) {
    if (axis == MotionAxis::RotY) throw std::invalid_argument("workspace_sweep: translation axes only");
    if (!(step > 0)) throw std::invalid_argument("workspace_sweep: step must be positive");
    const Vec3 unit = motion_unit(axis);

    DetectorConfig det = cfg.detector;
    det.marker_radius = tool.marker_radius;
    TrackerConfig tracker = cfg.tracker;
    tracker.noise = cfg.noise;
    tracker.quantized_depth = cfg.quantize;
    RenderOptions opts;
    opts.quantize = cfg.quantize;

    SweepResult result;
    std::vector<Vec3> station_mean;
    std::vector<double> station_offset;
    double max_ray_ratio = 0;  // max |x| / z over tracked markers

    int station_index = 0;
    for (double s = from; s <= to + 1e-9; s += step, ++station_index) {
        RigidTransform pose = base_pose;
        pose.t += s * unit;
        SceneSpec scene;
        scene.tools.push_back({tool, pose});
        TrackerSession session({tool}, tracker);  // the stage move loses tracking between stations

        Vec3 sum = Vec3::Zero();
        int hits = 0;
        for (int f = 0; f < frames_per_station; ++f) {
            opts.timestamp = f / 45.0;
            std::vector<DetectedMarker> detections;
            if (cfg.ideal_detection) {
                detections = ideal_detections(scene, cfg.intrinsics);
            } else {
                const uint64_t frame_seed = mix_seed(
                    cfg.seed, 0x575eeeull ^ (static_cast<uint64_t>(station_index) << 20 | static_cast<uint64_t>(f)));
                const SensorFrame frame = render_frame(scene, cfg.intrinsics, cfg.noise, frame_seed, opts);
                detections = localize_markers(frame, det).markers;
            }
            for (const auto& obs : session.track_frame(detections, opts.timestamp)) {
                if (obs.tool != tool.name) continue;
                sum += obs.pose.t;
                ++hits;
                for (const auto& m : tool.markers) {
                    const Vec3 cam = obs.pose(m);
                    if (cam.z() > 0) max_ray_ratio = std::max(max_ray_ratio, std::abs(cam.x()) / cam.z());
                }
            }
        }

        SweepStation station;
        station.commanded = s - from;
        station.frames_tracked = hits;
        station.missing = hits == 0;
        result.stations.push_back(station);
        station_mean.push_back(hits > 0 ? Vec3(sum / hits) : Vec3::Zero());
        station_offset.push_back(s);
    }

    int first = -1, last = -1;
    for (size_t i = 0; i < result.stations.size(); ++i)
        if (!result.stations[i].missing) {
            if (first < 0) first = static_cast<int>(i);
            last = static_cast<int>(i);
        }
    if (first >= 0 && last > first) {
        Vec3 direction = station_mean[last] - station_mean[first];
        direction.normalize();
        for (size_t i = 0; i < result.stations.size(); ++i) {
            auto& st = result.stations[i];
            if (st.missing) continue;
            st.commanded = station_offset[i] - station_offset[first];
            st.measured = (station_mean[i] - station_mean[first]).dot(direction);
            st.error = st.measured - st.commanded;
            result.max_abs_error = std::max(result.max_abs_error, std::abs(st.error));
        }
    }
    result.implied_fov_deg = rad2deg(2.0 * std::atan(max_ray_ratio));
    return result;
}

BenchResult runtime_bench(int tools_loaded, int tools_visible, int frames, const ExperimentConfig& cfg) {
    if (tools_loaded < 1 || tools_visible < 0 || frames < 1)
        throw std::invalid_argument("runtime_bench: bad grid cell");

    std::vector<ToolDefinition> loaded;
    for (int i = 0; i < tools_loaded; ++i) loaded.push_back(make_test_tool(i));

    SceneSpec scene;
    for (int i = 0; i < tools_visible; ++i) {
        const ToolDefinition tool = make_test_tool(i);
        RigidTransform pose;
        pose.t = Vec3(((i % 3) - 1) * 220.0, ((i / 3) % 2) * 160.0 - 80.0, 520.0 + 45.0 * i);
        // first attitude with no marker hiding behind another along its view ray
        for (int attempt = 0; attempt < 24; ++attempt) {
            pose.R = axis_angle(Vec3(0.3, 1, 0.2), deg2rad(25.0 + 17.0 * i + 13.0 * attempt));
            if (occlusion_free(tool, pose)) break;
        }
        scene.tools.push_back({tool, pose});
    }

    DetectorConfig det = cfg.detector;
    det.marker_radius = loaded.front().marker_radius;
    RenderOptions opts;
    opts.quantize = cfg.quantize;

    const int pool_size = 64;
    std::vector<std::vector<DetectedMarker>> pool;
    pool.reserve(pool_size);
    for (int f = 0; f < pool_size; ++f) {
        const SensorFrame frame =
            render_frame(scene, cfg.intrinsics, cfg.noise, mix_seed(cfg.seed, 0xbe4c4 + static_cast<uint64_t>(f)), opts);
        pool.push_back(localize_markers(frame, det).markers);
    }

    TrackerConfig tracker = cfg.tracker;
    tracker.noise = cfg.noise;
    tracker.quantized_depth = cfg.quantize;
    TrackerSession session(loaded, tracker);

    std::vector<int> found(static_cast<size_t>(tools_loaded), 0);
    for (int f = 0; f < 32; ++f) session.track_frame(pool[f % pool_size], f / 45.0);  // warmup

    const auto start = std::chrono::steady_clock::now();
    for (int f = 0; f < frames; ++f) {
        const auto observations = session.track_frame(pool[f % pool_size], f / 45.0);
        for (const auto& obs : observations)
            for (int ti = 0; ti < tools_loaded; ++ti)
                if (loaded[static_cast<size_t>(ti)].name == obs.tool) ++found[static_cast<size_t>(ti)];
    }
    const auto stop = std::chrono::steady_clock::now();

    BenchResult out;
    out.loaded = tools_loaded;
    out.visible = tools_visible;
    out.frames = frames;
    out.mean_ms = std::chrono::duration<double, std::milli>(stop - start).count() / frames;
    out.hz = out.mean_ms > 0 ? 1000.0 / out.mean_ms : 0.0;
    for (int ti = 0; ti < tools_loaded; ++ti)
        out.found_rate.push_back(static_cast<double>(found[static_cast<size_t>(ti)]) / frames);
    return out;
}

NoiseCharacterization characterize_noise(int n_depths, int frames_per_depth, double d_lo, double d_hi,
                                         const ExperimentConfig& cfg, bool subtract_quantization) {
    if (n_depths < 3) throw std::invalid_argument("characterize_noise: needs at least 3 depths");
    if (!(d_lo > 0 && d_lo < d_hi)) throw std::invalid_argument("characterize_noise: bad depth range");

    Rng depth_rng(mix_seed(cfg.seed, 0xdeb7));
    std::vector<double> stations(static_cast<size_t>(n_depths));
    for (auto& d : stations) d = depth_rng.uniform(d_lo, d_hi);
    std::sort(stations.begin(), stations.end());

    RenderOptions opts;
    opts.quantize = cfg.quantize;

    NoiseCharacterization out;
    out.stations = n_depths;

    for (int k = 0; k < n_depths; ++k) {
        const double d = stations[static_cast<size_t>(k)];
        SceneSpec scene;
        scene.distractors.push_back({Vec3(0, 0, d), 0.12 * d, 0.12 * d, 800});

        // board pixels from the first frame's reflectivity
        const uint64_t station_seed = mix_seed(cfg.seed, 0x404e + static_cast<uint64_t>(k));
        const SensorFrame first = render_frame(scene, cfg.intrinsics, cfg.noise, mix_seed(station_seed, 0), opts);
        const auto mask = segment_reflectivity(first, 500);
        auto blobs = extract_blobs(first, mask, 25.0, 1e18);
        if (blobs.empty()) throw std::runtime_error("characterize_noise: board not visible at depth " + std::to_string(d));
        std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) { return a.area > b.area; });
        const auto& board = blobs.front().pixels;

        std::vector<Vec3> rays;
        rays.reserve(board.size());
        for (const auto& [x, y] : board) {
            Vec3 dir(cfg.intrinsics.unit_x(x), cfg.intrinsics.unit_y(y), 1.0);
            rays.push_back(dir / dir.norm());
        }

        std::vector<Vec3> cloud;
        std::vector<double> measured;
        std::vector<size_t> ray_of;
        cloud.reserve(board.size() * static_cast<size_t>(frames_per_depth));
        for (int f = 0; f < frames_per_depth; ++f) {
            const SensorFrame frame = f == 0 ? first
                                             : render_frame(scene, cfg.intrinsics, cfg.noise,
                                                            mix_seed(station_seed, static_cast<uint64_t>(f)), opts);
            for (size_t p = 0; p < board.size(); ++p) {
                const double dp = frame.depth[frame.index(board[p].first, board[p].second)];
                if (dp <= 0) continue;
                cloud.push_back(rays[p] * dp);
                measured.push_back(dp);
                ray_of.push_back(p);
            }
        }
        if (cloud.size() < 100) throw std::runtime_error("characterize_noise: too few depth samples");

        const PlaneFit plane = fit_plane(cloud);
        std::vector<double> residuals(cloud.size());
        for (size_t i = 0; i < cloud.size(); ++i)
            residuals[i] = measured[i] - plane_ray_depth(plane, rays[ray_of[i]]);

        double variance = stddev(residuals) * stddev(residuals);
        if (subtract_quantization && cfg.quantize) variance = std::max(variance - 1.0 / 12.0, 1e-12);

        out.depth.push_back(mean(measured));
        out.sigma.push_back(std::sqrt(variance));

        const size_t stride = std::max<size_t>(1, residuals.size() / 10000);
        std::vector<double> subsample;
        for (size_t i = 0; i < residuals.size(); i += stride) subsample.push_back(residuals[i]);
        if (normality_statistic(subsample).reject_at_5pct) ++out.ad_rejects;
    }

    const NoiseFit fit = fit_noise_quadratic(out.depth, out.sigma);
    out.fitted = fit.model;
    out.r_squared = fit.r_squared;
    return out;
}

}  // namespace irtrack
