#include "trajfuse/svg_render.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "trajfuse/errors.hpp"

namespace trajfuse {

namespace {

constexpr double kTile = 220.0;    // pixels per frame tile, both axes
constexpr double kMargin = 12.0;

struct Bounds {
    double min_x = std::numeric_limits<double>::max();
    double max_x = std::numeric_limits<double>::lowest();
    double min_z = std::numeric_limits<double>::max();
    double max_z = std::numeric_limits<double>::lowest();

    void include(const Pose& p) {
        min_x = std::min(min_x, p.col(0).minCoeff());
        max_x = std::max(max_x, p.col(0).maxCoeff());
        min_z = std::min(min_z, p.col(2).minCoeff());
        max_z = std::max(max_z, p.col(2).maxCoeff());
    }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

void draw_frame(std::ostringstream& os, const Pose& pose, const SkeletonSpec& skel,
                const Bounds& b, double scale, double offset_x, const char* color) {
    // SVG y grows downward, so z maps to (max_z - z).
    auto px = [&](double x) { return offset_x + kMargin + (x - b.min_x) * scale; };
    auto py = [&](double z) { return kMargin + (b.max_z - z) * scale; };
    for (int j = 0; j < skel.joint_count(); ++j) {
        const int parent = skel.parents[static_cast<std::size_t>(j)];
        if (parent < 0) continue;
        os << "  <line x1=\"" << fmt(px(pose(parent, 0))) << "\" y1=\""
           << fmt(py(pose(parent, 2))) << "\" x2=\"" << fmt(px(pose(j, 0))) << "\" y2=\""
           << fmt(py(pose(j, 2))) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    }
    for (int j = 0; j < skel.joint_count(); ++j) {
        os << "  <circle cx=\"" << fmt(px(pose(j, 0))) << "\" cy=\"" << fmt(py(pose(j, 2)))
           << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
}

}  // namespace

std::string render_pose_svg_string(const MotionSequence& seq, const SkeletonSpec& skeleton,
                                   const std::vector<int>& frames,
                                   const MotionSequence* overlay) {
    skeleton.validate();
    seq.validate();
    if (overlay) overlay->validate();
    if (frames.empty()) throw DataError("render needs at least one frame index");
    if (seq.joint_count() != skeleton.joint_count()) {
        throw DataError("sequence has " + std::to_string(seq.joint_count()) +
                        " joints, skeleton has " + std::to_string(skeleton.joint_count()));
    }
    if (overlay && overlay->joint_count() != skeleton.joint_count()) {
        throw DataError("overlay joint count does not match the skeleton");
    }
    for (int f : frames) {
        if (f < 0 || f >= seq.frame_count()) {
            throw DataError("frame index " + std::to_string(f) + " outside [0, " +
                            std::to_string(seq.frame_count()) + ")");
        }
        if (overlay && f >= overlay->frame_count()) {
            throw DataError("frame index " + std::to_string(f) + " outside the overlay");
        }
    }

    Bounds b;
    for (int f : frames) {
        b.include(seq.frames[static_cast<std::size_t>(f)]);
        if (overlay) b.include(overlay->frames[static_cast<std::size_t>(f)]);
    }
    const double extent = std::max({b.max_x - b.min_x, b.max_z - b.min_z, 1e-9});
    const double scale = (kTile - 2 * kMargin) / extent;

    const double width = kTile * static_cast<double>(frames.size());
    const double height = kTile;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
       << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const int f = frames[i];
        const double offset_x = kTile * static_cast<double>(i);
        draw_frame(os, seq.frames[static_cast<std::size_t>(f)], skeleton, b, scale, offset_x,
                   "#30506d");
        if (overlay) {
            draw_frame(os, overlay->frames[static_cast<std::size_t>(f)], skeleton, b, scale,
                       offset_x, "#c03a2b");
        }
    }
    os << "</svg>\n";
    return os.str();
}

void render_pose_svg(const MotionSequence& seq, const SkeletonSpec& skeleton,
                     const std::vector<int>& frames, const std::string& path,
                     const MotionSequence* overlay) {
    const std::string svg = render_pose_svg_string(seq, skeleton, frames, overlay);
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << svg;
    if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace trajfuse
