#include "irtrack/track.hpp"

#include <algorithm>
#include <cmath>

#include "irtrack/stats.hpp"

namespace irtrack {

MatchThresholds thresholds(const NoiseModel& model, double depth_mm, int marker_count,
                           const TrackerConfig& cfg) {
    if (marker_count < 3) throw std::invalid_argument("thresholds: tools have at least 3 markers");
    if (!(cfg.confidence_factor > 0)) throw std::invalid_argument("thresholds: confidence factor must be positive");

    MatchThresholds out;
    out.clamped = depth_mm < model.d_min || depth_mm > model.d_max;
    const double sigma_side = std::sqrt(2.0) * model.sigma_clamped(depth_mm);
    out.t_side = cfg.t_side_override.value_or(cfg.confidence_factor * sigma_side);
    out.t_shape = out.t_side / std::sqrt(static_cast<double>(marker_count) * (marker_count - 1));
    return out;
}

double match_loss(const ToolDefinition& tool, std::span<const Vec3> candidate_points) {
    const int n = tool.marker_count();
    if (static_cast<int>(candidate_points.size()) != n)
        throw std::invalid_argument("match_loss: point count mismatch");
    double sum = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            sum += std::abs(tool.length(i, j) - (candidate_points[i] - candidate_points[j]).norm());
    // normalization is N(N-1) while the sum has N(N-1)/2 terms; t_shape is
    // calibrated against exactly this halved average
    return sum / (static_cast<double>(n) * (n - 1));
}

std::vector<MatchCandidate> find_candidates(const ToolDefinition& tool, std::span<const Vec3> points,
                                            double t_side, double t_shape) {
    const int n_slots = tool.marker_count();
    const int n_points = static_cast<int>(points.size());
    std::vector<MatchCandidate> out;
    if (n_points < n_slots) return out;

    // visit the most constrained slots first: descending sum of incident lengths
    std::vector<int> order(n_slots);
    for (int i = 0; i < n_slots; ++i) order[i] = i;
    std::vector<double> incident(n_slots, 0.0);
    for (int i = 0; i < n_slots; ++i)
        for (int j = 0; j < n_slots; ++j) incident[i] += tool.length(i, j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return incident[a] > incident[b]; });

    std::vector<int> chosen(n_slots, -1);  // detection index per visited position
    std::vector<uint8_t> used(n_points, 0);
    std::vector<Vec3> assigned(n_slots);

    auto emit = [&]() {
        MatchCandidate c;
        c.assignment.resize(n_slots);
        for (int k = 0; k < n_slots; ++k) c.assignment[order[k]] = chosen[k];
        for (int s = 0; s < n_slots; ++s) assigned[s] = points[c.assignment[s]];
        c.loss = match_loss(tool, assigned);
        if (c.loss < t_shape) out.push_back(std::move(c));
    };

    auto dfs = [&](auto&& self, int depth) -> void {
        if (depth == n_slots) {
            emit();
            return;
        }
        const int slot = order[depth];
        for (int p = 0; p < n_points; ++p) {
            if (used[p]) continue;
            bool ok = true;
            for (int prev = 0; prev < depth; ++prev) {
                const double beta =
                    std::abs(tool.length(order[prev], slot) - (points[chosen[prev]] - points[p]).norm());
                if (!(beta < t_side)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            chosen[depth] = p;
            used[p] = 1;
            self(self, depth + 1);
            used[p] = 0;
        }
    };
    dfs(dfs, 0);

    std::sort(out.begin(), out.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
        if (a.loss != b.loss) return a.loss < b.loss;
        return a.assignment < b.assignment;
    });
    return out;
}

std::vector<ResolvedMatch> resolve(std::span<const ToolDefinition> tools,
                                   const std::vector<std::vector<MatchCandidate>>& candidates_per_tool) {
    if (candidates_per_tool.size() != tools.size())
        throw std::invalid_argument("resolve: candidate list per tool expected");

    struct Entry {
        int tool;
        std::vector<int> sorted_detections;
        MatchCandidate candidate;
    };
    std::vector<Entry> entries;

    // per tool, the same detection set under different orderings keeps the
    // lowest loss only
    for (size_t ti = 0; ti < tools.size(); ++ti) {
        std::vector<Entry> best_for_set;
        for (const auto& cand : candidates_per_tool[ti]) {
            std::vector<int> key = cand.assignment;
            std::sort(key.begin(), key.end());
            auto it = std::find_if(best_for_set.begin(), best_for_set.end(),
                                   [&](const Entry& e) { return e.sorted_detections == key; });
            if (it == best_for_set.end()) {
                best_for_set.push_back({static_cast<int>(ti), std::move(key), cand});
            } else if (cand.loss < it->candidate.loss ||
                       (cand.loss == it->candidate.loss && cand.assignment < it->candidate.assignment)) {
                it->candidate = cand;
            }
        }
        for (auto& e : best_for_set) entries.push_back(std::move(e));
    }

    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        if (a.candidate.loss != b.candidate.loss) return a.candidate.loss < b.candidate.loss;
        if (tools[a.tool].name != tools[b.tool].name) return tools[a.tool].name < tools[b.tool].name;
        return a.sorted_detections < b.sorted_detections;
    });

    std::vector<ResolvedMatch> accepted;
    std::vector<uint8_t> tool_taken(tools.size(), 0);
    std::vector<int> detections_taken;
    for (const auto& e : entries) {
        if (tool_taken[e.tool]) continue;
        bool conflict = false;
        for (int d : e.sorted_detections)
            if (std::find(detections_taken.begin(), detections_taken.end(), d) != detections_taken.end()) {
                conflict = true;
                break;
            }
        if (conflict) continue;
        tool_taken[e.tool] = 1;
        detections_taken.insert(detections_taken.end(), e.sorted_detections.begin(), e.sorted_detections.end());
        accepted.push_back({e.tool, e.candidate});
    }
    return accepted;
}

Registration estimate_pose(const ToolDefinition& tool, std::span<const Vec3> assigned_points) {
    return rigid_register(tool.markers, assigned_points);
}

double kalman_update(DepthFilter& filter, double measured_depth, double sigma_meas, double process_noise_q) {
    if (!(sigma_meas > 0)) throw std::invalid_argument("kalman_update: sigma_meas must be positive");
    if (!filter.initialized) {
        filter.estimate = measured_depth;
        filter.variance = sigma_meas * sigma_meas;
        filter.initialized = true;
        return filter.estimate;
    }
    filter.variance += process_noise_q;
    const double gain = filter.variance / (filter.variance + sigma_meas * sigma_meas);
    filter.estimate += gain * (measured_depth - filter.estimate);
    filter.variance *= (1.0 - gain);
    return filter.estimate;
}

TrackerSession::TrackerSession(std::vector<ToolDefinition> tools, TrackerConfig cfg)
    : tools_(std::move(tools)), cfg_(std::move(cfg)) {
    bank_.resize(tools_.size());
    for (size_t i = 0; i < tools_.size(); ++i) bank_[i].assign(tools_[i].markers.size(), DepthFilter{});
    missed_.assign(tools_.size(), 0);
}

void TrackerSession::reset() {
    for (auto& filters : bank_)
        for (auto& f : filters) f = DepthFilter{};
    std::fill(missed_.begin(), missed_.end(), 0);
}

std::vector<ToolObservation> TrackerSession::track_frame(std::span<const DetectedMarker> detections,
                                                         double timestamp) {
    std::vector<Vec3> points(detections.size());
    std::vector<double> depths(detections.size());
    for (size_t i = 0; i < detections.size(); ++i) {
        points[i] = detections[i].position;
        depths[i] = detections[i].surface_depth;
    }

    std::vector<std::vector<MatchCandidate>> candidates(tools_.size());
    if (!detections.empty()) {
        const double anchor_depth = median(depths);
        for (size_t ti = 0; ti < tools_.size(); ++ti) {
            const MatchThresholds th = thresholds(cfg_.noise, anchor_depth, tools_[ti].marker_count(), cfg_);
            candidates[ti] = find_candidates(tools_[ti], points, th.t_side, th.t_shape);
        }
    }

    const auto resolved = resolve(tools_, candidates);

    std::vector<uint8_t> seen(tools_.size(), 0);
    std::vector<ToolObservation> observations;
    for (const auto& match : resolved) {
        const auto& tool = tools_[match.tool_index];
        const int n = tool.marker_count();
        std::vector<Vec3> fit_points(n);
        std::vector<double> used_depths(n);

        for (int j = 0; j < n; ++j) {
            const auto& det = detections[match.candidate.assignment[j]];
            double depth = det.surface_depth;
            if (cfg_.use_kalman) {
                const double var_q = cfg_.quantized_depth ? 1.0 / 12.0 : 0.0;
                const double sp = cfg_.noise.sigma_clamped(depth);
                const double sigma_meas = std::sqrt(std::max(sp * sp + var_q, 1e-12));
                depth = kalman_update(bank_[match.tool_index][j], depth, sigma_meas, cfg_.process_noise_q);
            }
            used_depths[j] = depth;
            // rescale the detection along its ray, then re-apply the sphere
            // center correction at the filtered depth
            const Vec3 ray = det.position.normalized();
            fit_points[j] = ray * (depth + tool.marker_radius);
        }

        const Registration reg = estimate_pose(tool, fit_points);
        ToolObservation obs;
        obs.tool = tool.name;
        obs.pose = reg.transform;
        obs.loss = match.candidate.loss;
        obs.fit_rmse = reg.rmse;
        obs.marker_depths = std::move(used_depths);
        obs.timestamp = timestamp;
        observations.push_back(std::move(obs));

        seen[match.tool_index] = 1;
        missed_[match.tool_index] = 0;
    }

    for (size_t ti = 0; ti < tools_.size(); ++ti) {
        if (seen[ti]) continue;
        if (++missed_[ti] > cfg_.max_missed)
            for (auto& f : bank_[ti]) f = DepthFilter{};
    }
    return observations;
}

}  // namespace irtrack
