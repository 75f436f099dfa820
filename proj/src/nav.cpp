#include "irtrack/nav.hpp"

#include <algorithm>
#include <cmath>

namespace irtrack {

void FrameGraph::add_edge(const std::string& child, const std::string& parent,
                          const RigidTransform& child_to_parent, double timestamp) {
    auto& list = edges_[{child, parent}];
    list.push_back({timestamp, child_to_parent});
    std::stable_sort(list.begin(), list.end(), [](const TimedEdge& a, const TimedEdge& b) { return a.t < b.t; });
}

const RigidTransform* FrameGraph::lookup(const std::string& child, const std::string& parent, double t) const {
    const auto it = edges_.find({child, parent});
    if (it == edges_.end()) return nullptr;
    const auto& list = it->second;
    const RigidTransform* found = nullptr;
    for (const auto& e : list) {
        if (e.t > t) break;
        found = &e.transform;
    }
    return found;
}

RigidTransform FrameGraph::chain_pose(const std::vector<std::string>& path, double timestamp) const {
    if (path.size() < 2) throw std::invalid_argument("chain_pose: path needs at least two frames");
    RigidTransform result;  // identity
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const std::string& parent = path[i];
        const std::string& child = path[i + 1];
        if (const RigidTransform* direct = lookup(child, parent, timestamp)) {
            result = compose(result, *direct);
        } else if (const RigidTransform* reverse = lookup(parent, child, timestamp)) {
            result = compose(result, invert(*reverse));
        } else {
            throw path_not_found("chain_pose: no edge between '" + parent + "' and '" + child + "'");
        }
    }
    return result;
}

RigidTransform solve_display_registration(const RigidTransform& t_h_w, const RigidTransform& t_m_w,
                                          const RigidTransform& t_sm_a) {
    return compose(compose(invert(t_h_w), t_m_w), invert(t_sm_a));
}

PivotResult pivot_calibrate(std::span<const RigidTransform> poses) {
    if (poses.size() < 3) throw std::invalid_argument("pivot_calibrate: needs at least 3 poses");

    const auto rows = static_cast<Eigen::Index>(poses.size()) * 3;
    Eigen::MatrixXd design(rows, 6);
    Eigen::VectorXd rhs(rows);
    for (size_t i = 0; i < poses.size(); ++i) {
        design.block<3, 3>(static_cast<Eigen::Index>(i) * 3, 0) = poses[i].R;
        design.block<3, 3>(static_cast<Eigen::Index>(i) * 3, 3) = -Mat3::Identity();
        rhs.segment<3>(static_cast<Eigen::Index>(i) * 3) = -poses[i].t;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues()(5) < 1e-6)
        throw degenerate_pivot("pivot_calibrate: insufficient rotational diversity");
    const Eigen::VectorXd solution = svd.solve(rhs);

    PivotResult out;
    out.tip_offset = solution.head<3>();
    out.pivot_point = solution.tail<3>();
    double ss = 0;
    for (const auto& pose : poses) ss += (pose(out.tip_offset) - out.pivot_point).squaredNorm();
    out.rms = std::sqrt(ss / static_cast<double>(poses.size()));
    return out;
}

TrajectoryError trajectory_error(const Trajectory& planned, const Trajectory& executed) {
    if (std::abs(planned.direction.norm() - 1.0) > 1e-6 || std::abs(executed.direction.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("trajectory_error: directions must be unit vectors");

    Vec3 exec_dir = executed.direction;
    if (planned.direction.dot(exec_dir) < 0) exec_dir = -exec_dir;  // common insertion sense
    const double c = std::clamp(planned.direction.dot(exec_dir), -1.0, 1.0);

    const Vec3 offset = executed.entry - planned.entry;
    const Vec3 lateral = offset - offset.dot(planned.direction) * planned.direction;

    return {lateral.norm(), rad2deg(std::acos(c))};
}

}  // namespace irtrack
