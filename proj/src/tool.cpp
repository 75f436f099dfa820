#include "irtrack/tool.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "irtrack/frame.hpp"
#include "irtrack/jsonio.hpp"
#include "irtrack/track.hpp"
#include "json.hpp"

namespace irtrack {

using nlohmann::json;

std::vector<double> pairwise_lengths(std::span<const Vec3> points) {
    const size_t n = points.size();
    std::vector<double> table(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const double d = (points[i] - points[j]).norm();
            table[i * n + j] = d;
            table[j * n + i] = d;
        }
    return table;
}

ToolDefinition ToolDefinition::create(std::string name, std::vector<Vec3> markers, double marker_radius) {
    if (markers.size() < 3) throw std::invalid_argument("ToolDefinition: needs at least 3 markers");
    if (marker_radius < 0) throw std::invalid_argument("ToolDefinition: negative marker radius");
    Vec3 centroid = Vec3::Zero();
    for (const auto& m : markers) centroid += m;
    centroid /= static_cast<double>(markers.size());
    for (auto& m : markers) m -= centroid;

    ToolDefinition t;
    t.name = std::move(name);
    t.markers = std::move(markers);
    t.marker_radius = marker_radius;
    t.pairwise = pairwise_lengths(t.markers);
    return t;
}

double shape_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
    if (a.size() != b.size()) throw std::invalid_argument("shape_distance: marker count mismatch");
    if (a.empty()) throw std::invalid_argument("shape_distance: empty marker sets");
    double ss = 0;
    for (size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]).squaredNorm();
    return std::sqrt(ss / static_cast<double>(a.size()));
}

DefinitionSession correspond_frames(const DefinitionSession& session, CorrespondenceReport* report) {
    if (session.frames.empty()) throw std::invalid_argument("correspond_frames: empty session");
    const auto& reference = session.frames.front();
    if (reference.size() < 3) throw std::invalid_argument("correspond_frames: reference needs >= 3 markers");

    // the centered reference acts as a throwaway tool definition for matching
    const ToolDefinition ref_tool = ToolDefinition::create("__reference", reference, 0.0);
    const double tol = session.tolerance_mm;

    DefinitionSession out;
    out.tolerance_mm = tol;
    out.frames.push_back(reference);
    int rejected = 0;

    for (size_t fi = 1; fi < session.frames.size(); ++fi) {
        const auto& frame = session.frames[fi];
        if (frame.size() != reference.size()) {
            ++rejected;
            continue;
        }
        auto candidates = find_candidates(ref_tool, frame, tol, 1e30);
        if (candidates.empty()) {
            ++rejected;  // misdetection: pairwise lengths disagree with the reference
            continue;
        }
        const auto& best = candidates.front();

        std::vector<Vec3> reordered(frame.size());
        for (size_t j = 0; j < frame.size(); ++j) reordered[j] = frame[best.assignment[j]];

        // align the reference onto this frame and check slot uniqueness
        const Registration reg = rigid_register(reference, reordered);
        for (size_t j = 0; j < reference.size(); ++j) {
            const Vec3 slot = reg.transform(reference[j]);
            int close = 0;
            for (const auto& p : frame)
                if ((p - slot).norm() < tol) ++close;
            if (close > 1)
                throw ambiguous_correspondence("correspond_frames: two markers within tolerance of slot " +
                                               std::to_string(j) + " in frame " + std::to_string(fi));
        }
        out.frames.push_back(std::move(reordered));
    }

    if (report) {
        report->frames_in = static_cast<int>(session.frames.size());
        report->frames_rejected = rejected;
    }
    return out;
}

namespace {

std::vector<Vec3> centered(std::vector<Vec3> pts) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    for (auto& p : pts) p -= c;
    return pts;
}

// Deterministic orientation: principal axes from the marker scatter,
// largest-variance axis first, signs fixed by each axis' largest component,
// right-handedness restored on the last axis.
std::vector<Vec3> gauge_fix(std::vector<Vec3> pts) {
    Mat3 scatter = Mat3::Zero();
    for (const auto& p : pts) scatter += p * p.transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);  // ascending eigenvalues
    Mat3 axes;
    for (int k = 0; k < 3; ++k) {
        Vec3 v = eig.eigenvectors().col(2 - k);
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        axes.row(k) = v;
    }
    if (axes.determinant() < 0) axes.row(2) = -axes.row(2);
    for (auto& p : pts) p = axes * p;
    return pts;
}

}  // namespace

ToolDefinition define_tool(const DefinitionSession& session, const std::string& name, double marker_radius,
                           DefinitionReport* report) {
    if (session.frames.size() < 10)
        throw std::invalid_argument("define_tool: needs at least 10 corresponded frames");
    const size_t n = session.frames.front().size();
    for (const auto& f : session.frames)
        if (f.size() != n) throw std::invalid_argument("define_tool: inconsistent marker counts");

    std::vector<Vec3> mean_shape = centered(session.frames.front());
    const int max_iterations = 100;
    int iterations = 0;
    double objective = 0;
    bool converged = false;

    std::vector<double> history;
    std::vector<Vec3> next(n);
    for (int it = 0; it < max_iterations; ++it) {
        ++iterations;
        for (auto& p : next) p = Vec3::Zero();
        objective = 0;
        for (const auto& frame : session.frames) {
            const Registration reg = rigid_register(frame, mean_shape);
            objective += reg.rmse;
            for (size_t j = 0; j < n; ++j) next[j] += reg.transform(frame[j]);
        }
        objective /= static_cast<double>(session.frames.size());
        history.push_back(objective);
        for (auto& p : next) p /= static_cast<double>(session.frames.size());
        next = centered(std::move(next));

        double shift = 0;
        for (size_t j = 0; j < n; ++j) shift = std::max(shift, (next[j] - mean_shape[j]).norm());
        mean_shape = next;
        if (shift < 1e-6) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw definition_failed("define_tool: no convergence after " + std::to_string(max_iterations) +
                                " iterations, residual " + std::to_string(objective) + " mm");

    ToolDefinition tool = ToolDefinition::create(name, gauge_fix(std::move(mean_shape)), marker_radius);
    if (report) {
        report->iterations = iterations;
        report->objective = objective;
        report->objective_history = std::move(history);
        report->frames_used = static_cast<int>(session.frames.size());
    }
    return tool;
}

DistinctnessReport validate_distinctness(std::span<const ToolDefinition> tools, double t_side) {
    if (!(t_side > 0)) throw std::invalid_argument("validate_distinctness: t_side must be positive");
    DistinctnessReport report;

    std::vector<std::vector<double>> sorted_lengths(tools.size());
    for (size_t k = 0; k < tools.size(); ++k) {
        const auto& t = tools[k];
        const int n = t.marker_count();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) sorted_lengths[k].push_back(t.length(i, j));
        std::sort(sorted_lengths[k].begin(), sorted_lengths[k].end());

        for (size_t e = 0; e + 1 < sorted_lengths[k].size(); ++e)
            if (sorted_lengths[k][e + 1] - sorted_lengths[k][e] < 2 * t_side) {
                report.self_ambiguous.push_back({t.name, sorted_lengths[k][e], sorted_lengths[k][e + 1]});
                break;
            }
    }

    for (size_t a = 0; a < tools.size(); ++a)
        for (size_t b = a + 1; b < tools.size(); ++b) {
            if (sorted_lengths[a].size() != sorted_lengths[b].size()) continue;
            double max_gap = 0;
            for (size_t e = 0; e < sorted_lengths[a].size(); ++e)
                max_gap = std::max(max_gap, std::abs(sorted_lengths[a][e] - sorted_lengths[b][e]));
            if (max_gap < 2 * t_side) report.confusable.push_back({tools[a].name, tools[b].name, max_gap});
        }
    return report;
}

void save_tool(const std::filesystem::path& path, const ToolDefinition& tool) {
    std::ofstream out(path);
    if (!out) throw io_error("save_tool: cannot open " + path.string());
    out << "{\"name\":" << json(tool.name).dump() << ",\"marker_radius_mm\":" << fmt9(tool.marker_radius)
        << ",\"markers_mm\":[";
    for (size_t i = 0; i < tool.markers.size(); ++i) {
        if (i) out << ",";
        out << "[" << fmt9(tool.markers[i].x()) << "," << fmt9(tool.markers[i].y()) << ","
            << fmt9(tool.markers[i].z()) << "]";
    }
    out << "]}\n";
    if (!out) throw io_error("save_tool: write failed for " + path.string());
}

ToolDefinition load_tool(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_tool: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw io_error("load_tool: " + path.string() + ": " + e.what());
    }
    try {
        const auto name = j.at("name").get<std::string>();
        const auto radius = j.at("marker_radius_mm").get<double>();
        std::vector<Vec3> markers;
        for (const auto& m : j.at("markers_mm"))
            markers.emplace_back(m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>());
        // files carry 9 significant digits; verify centering loosely, then
        // re-center exactly (create recomputes the length table)
        Vec3 c = Vec3::Zero();
        for (const auto& m : markers) c += m;
        if (c.norm() / static_cast<double>(markers.size()) > 1e-3)
            throw io_error("load_tool: " + path.string() + ": markers are not centered");
        return ToolDefinition::create(name, std::move(markers), radius);
    } catch (const json::exception& e) {
        throw io_error("load_tool: " + path.string() + ": " + e.what());
    }
}

}  // namespace irtrack
