#include "trajfuse/mocap_csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trajfuse/errors.hpp"

namespace trajfuse {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw DataError("line " + std::to_string(line_no) + ": " + what);
}

double parse_real(const std::string& cell, int line_no) {
    const std::string t = trimmed(cell);
    if (t.empty()) fail(line_no, "empty cell where a number was expected");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        fail(line_no, "non-numeric cell '" + t + "'");
    }
    return v;
}

int parse_int(const std::string& cell, int line_no) {
    const std::string t = trimmed(cell);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        fail(line_no, "non-integer cell '" + t + "'");
    }
    return static_cast<int>(v);
}

}  // namespace

MocapFile load_mocap_csv(std::istream& in) {
    MocapFile file;
    std::string line;
    int line_no = 0;

    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line() || trimmed(line) != "#mocap-csv v1") {
        fail(line_no == 0 ? 1 : line_no, "expected header '#mocap-csv v1'");
    }

    if (!next_line()) fail(line_no + 1, "missing metadata line");
    int joints = -1;
    double fps = -1;
    std::string unit;
    for (const std::string& kv : split_commas(trimmed(line))) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) fail(line_no, "malformed metadata entry '" + kv + "'");
        const std::string key = trimmed(kv.substr(0, eq));
        const std::string val = trimmed(kv.substr(eq + 1));
        if (key == "joints") joints = parse_int(val, line_no);
        else if (key == "fps") fps = parse_real(val, line_no);
        else if (key == "unit") unit = val;
        else fail(line_no, "unknown metadata key '" + key + "'");
    }
    if (joints < 1) fail(line_no, "metadata must declare joints >= 1");
    if (!(fps > 0)) fail(line_no, "metadata must declare fps > 0");
    if (unit != "mm") fail(line_no, "unsupported unit '" + unit + "', expected mm");
    file.skeleton.unit = unit;

    if (!next_line()) fail(line_no + 1, "missing joint-name line");
    file.skeleton.joint_names = split_commas(trimmed(line));
    if (static_cast<int>(file.skeleton.joint_names.size()) != joints) {
        fail(line_no, "expected " + std::to_string(joints) + " joint names, got " +
                          std::to_string(file.skeleton.joint_names.size()));
    }

    if (!next_line()) fail(line_no + 1, "missing parent-index line");
    for (const std::string& cell : split_commas(trimmed(line))) {
        file.skeleton.parents.push_back(parse_int(cell, line_no));
    }
    if (static_cast<int>(file.skeleton.parents.size()) != joints) {
        fail(line_no, "expected " + std::to_string(joints) + " parent indices, got " +
                          std::to_string(file.skeleton.parents.size()));
    }
    try {
        file.skeleton.validate();
    } catch (const DataError& e) {
        fail(line_no, e.what());
    }

    const int cols = joints * 3;
    NamedSequence cur;
    cur.id = "0";
    cur.seq.fps = fps;
    bool started = false;

    auto flush = [&]() {
        if (!started) return;
        if (cur.seq.frames.empty()) {
            fail(line_no, "sequence '" + cur.id + "' has no frames");
        }
        file.sequences.push_back(std::move(cur));
        cur = NamedSequence{};
        cur.seq.fps = fps;
    };

    while (next_line()) {
        const std::string t = trimmed(line);
        if (t.empty()) continue;
        if (t.rfind("#sequence", 0) == 0) {
            flush();
            const std::string id = trimmed(t.substr(9));
            if (id.empty()) fail(line_no, "#sequence directive with empty id");
            cur.id = id;
            started = true;
            continue;
        }
        const std::vector<std::string> cells = split_commas(t);
        if (static_cast<int>(cells.size()) != cols) {
            fail(line_no, "expected " + std::to_string(cols) + " columns, got " +
                              std::to_string(cells.size()));
        }
        Pose pose(joints, 3);
        for (int j = 0; j < joints; ++j) {
            for (int c = 0; c < 3; ++c) {
                pose(j, c) = parse_real(cells[static_cast<std::size_t>(j * 3 + c)], line_no);
            }
        }
        cur.seq.frames.push_back(std::move(pose));
        started = true;
    }
    if (started) {
        flush();
    }
    if (file.sequences.empty()) {
        fail(line_no + 1, "no frames");
    }
    for (const NamedSequence& ns : file.sequences) ns.seq.validate();
    return file;
}

MocapFile load_mocap_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    try {
        return load_mocap_csv(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_mocap_csv(std::ostream& out, const MocapFile& file) {
    file.skeleton.validate();
    if (file.sequences.empty()) throw DataError("mocap file has no sequences to write");
    const int joints = file.skeleton.joint_count();
    double fps = file.sequences.front().seq.fps;
    for (const NamedSequence& ns : file.sequences) {
        ns.seq.validate();
        if (ns.seq.joint_count() != joints) {
            throw DataError("sequence '" + ns.id + "' joint count does not match skeleton");
        }
        if (ns.seq.fps != fps) {
            throw DataError("sequence '" + ns.id + "' fps differs from the file fps");
        }
    }

    char buf[64];
    out << "#mocap-csv v1\n";
    std::snprintf(buf, sizeof buf, "%.17g", fps);
    out << "joints=" << joints << ",fps=" << buf << ",unit=" << file.skeleton.unit << "\n";
    for (int j = 0; j < joints; ++j) {
        if (j) out << ",";
        out << file.skeleton.joint_names[static_cast<std::size_t>(j)];
    }
    out << "\n";
    for (int j = 0; j < joints; ++j) {
        if (j) out << ",";
        out << file.skeleton.parents[static_cast<std::size_t>(j)];
    }
    out << "\n";
    for (const NamedSequence& ns : file.sequences) {
        out << "#sequence " << ns.id << "\n";
        for (const Pose& pose : ns.seq.frames) {
            for (int j = 0; j < joints; ++j) {
                for (int c = 0; c < 3; ++c) {
                    if (j || c) out << ",";
                    std::snprintf(buf, sizeof buf, "%.17g", pose(j, c));
                    out << buf;
                }
            }
            out << "\n";
        }
    }
}

void write_mocap_csv_file(const std::string& path, const MocapFile& file) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_mocap_csv(out, file);
    if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace trajfuse
