#pragma once

#include <string>
#include <vector>

#include "trajfuse/motion.hpp"

namespace trajfuse {

// Orthographic x-z projection, one tile per requested frame laid out left to
// right, bones drawn as one line element each per the skeleton parents. When
// `overlay` is given (same frame indices) its bones are drawn in a contrast
// color on the same tiles. Validates everything before touching the file.
void render_pose_svg(const MotionSequence& seq, const SkeletonSpec& skeleton,
                     const std::vector<int>& frames, const std::string& path,
                     const MotionSequence* overlay = nullptr);

std::string render_pose_svg_string(const MotionSequence& seq, const SkeletonSpec& skeleton,
                                   const std::vector<int>& frames,
                                   const MotionSequence* overlay = nullptr);

}  // namespace trajfuse
