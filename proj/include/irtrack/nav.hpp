#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "irtrack/geometry.hpp"

namespace irtrack {

struct path_not_found : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct degenerate_pivot : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Named coordinate frames with timestamped rigid edges. An edge stores the
// transform mapping child-frame coordinates into the parent frame; queries
// walk a frame path and use the latest edge at or before the query time per
// hop (reverse edges are inverted on the fly).
class FrameGraph {
public:
    void add_edge(const std::string& child, const std::string& parent, const RigidTransform& child_to_parent,
                  double timestamp = 0);

    // Composition along [A, B, C, ...]: returns the transform mapping the
    // last frame's coordinates into the first frame.
    RigidTransform chain_pose(const std::vector<std::string>& path,
                              double timestamp = std::numeric_limits<double>::infinity()) const;

private:
    struct TimedEdge {
        double t;
        RigidTransform transform;
    };
    std::map<std::pair<std::string, std::string>, std::vector<TimedEdge>> edges_;

    const RigidTransform* lookup(const std::string& child, const std::string& parent, double t) const;
};

// Display registration solve: T_A^H = (T_H^W)^-1 * T_M^W * (T_SM^A)^-1.
RigidTransform solve_display_registration(const RigidTransform& t_h_w, const RigidTransform& t_m_w,
                                          const RigidTransform& t_sm_a);

struct PivotResult {
    Vec3 tip_offset;   // tool frame, mm
    Vec3 pivot_point;  // camera frame, mm
    double rms = 0;    // mm
};

// Tip offset of a tool rotated about a fixed physical point: stacked linear
// least squares R_i p_tip - p_pivot = -t_i. Requires rotational diversity
// (smallest singular value of the stacked system above 1e-6).
PivotResult pivot_calibrate(std::span<const RigidTransform> poses);

struct Trajectory {
    Vec3 entry;      // mm
    Vec3 direction;  // unit
};

struct TrajectoryError {
    double translation_mm = 0;  // lateral offset orthogonal to the planned axis
    double angle_deg = 0;
};

// Directions are oriented to a common insertion sense before the angle.
TrajectoryError trajectory_error(const Trajectory& planned, const Trajectory& executed);

}  // namespace irtrack
