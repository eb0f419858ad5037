#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trajfuse/motion.hpp"

namespace trajfuse {

struct NamedSequence {
    std::string id;
    MotionSequence seq;
};

struct MocapFile {
    SkeletonSpec skeleton;
    std::vector<NamedSequence> sequences;
};

MocapFile load_mocap_csv(std::istream& in);
MocapFile load_mocap_csv_file(const std::string& path);

void write_mocap_csv(std::ostream& out, const MocapFile& file);
void write_mocap_csv_file(const std::string& path, const MocapFile& file);

}  // namespace trajfuse
