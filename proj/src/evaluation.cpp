#include "trajfuse/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trajfuse/errors.hpp"

namespace trajfuse {

std::vector<double> mpjpe_metric(const Tensor& pred, const Tensor& target) {
    if (pred.rank() != 3 || pred.dim(2) != 3 || !same_shape(pred, target)) {
        throw ShapeError("metric needs matching [T_out, N, 3] tensors, got " +
                         shape_str(pred.shape) + " and " + shape_str(target.shape));
    }
    const int t_out = pred.dim(0), n = pred.dim(1);
    std::vector<double> out(static_cast<std::size_t>(t_out));
    for (int t = 0; t < t_out; ++t) {
        double acc = 0;
        for (int k = 0; k < n; ++k) {
            const double dx = pred.at3(t, k, 0) - target.at3(t, k, 0);
            const double dy = pred.at3(t, k, 1) - target.at3(t, k, 1);
            const double dz = pred.at3(t, k, 2) - target.at3(t, k, 2);
            acc += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
        out[static_cast<std::size_t>(t)] = acc / n;
    }
    return out;
}

std::vector<int> horizons_to_frames(const std::vector<double>& horizons_ms, double fps,
                                    int t_out) {
    if (!(fps > 0)) throw DataError("horizons_to_frames: fps must be > 0");
    std::vector<int> frames;
    frames.reserve(horizons_ms.size());
    for (double ms : horizons_ms) {
        if (!(ms > 0)) throw DataError("horizons must be positive, got " + std::to_string(ms));
        const int frame = static_cast<int>(std::floor(ms * fps / 1000.0 + 0.5));
        if (frame < 1 || frame > t_out) {
            throw DataError("horizon " + std::to_string(ms) + " ms maps to frame " +
                            std::to_string(frame) + ", outside the " + std::to_string(t_out) +
                            " predicted frames");
        }
        frames.push_back(frame);
    }
    return frames;
}

Tensor baseline_predict(BaselineKind kind, const Tensor& input, int t_out) {
    if (input.rank() != 3 || input.dim(2) != 3) {
        throw ShapeError("baseline needs a [T, N, 3] input, got " + shape_str(input.shape));
    }
    const int t_in = input.dim(0), n = input.dim(1);
    if (t_out < 1) throw ShapeError("baseline needs t_out >= 1");
    const int need = kind == BaselineKind::ConstantVelocity ? 2 : 1;
    if (t_in < need) {
        throw ShapeError("baseline needs at least " + std::to_string(need) + " input frames");
    }
    const long plane = static_cast<long>(n) * 3;
    Tensor out = zeros({t_out, n, 3});
    const Array last = input.data.segment((t_in - 1) * plane, plane);
    if (kind == BaselineKind::ZeroVelocity) {
        for (int i = 0; i < t_out; ++i) out.data.segment(i * plane, plane) = last;
    } else {
        const Array delta = last - Array(input.data.segment((t_in - 2) * plane, plane));
        for (int i = 0; i < t_out; ++i) {
            out.data.segment(i * plane, plane) = last + (i + 1) * delta;
        }
    }
    return out;
}

HorizonTable evaluate_horizons(const PredictFn& predict, const std::vector<SampleWindow>& windows,
                               const std::vector<double>& horizons_ms, double fps,
                               const std::string& label) {
    if (windows.empty()) throw DataError("evaluation window list is empty");
    const int t_out = static_cast<int>(windows.front().target.size());
    const std::vector<int> frames = horizons_to_frames(horizons_ms, fps, t_out);

    std::vector<double> sums(horizons_ms.size(), 0.0);
    for (const SampleWindow& w : windows) {
        const Tensor pred = predict(window_input_tensor(w));
        const std::vector<double> errs = mpjpe_metric(pred, window_target_tensor(w));
        for (std::size_t h = 0; h < frames.size(); ++h) {
            sums[h] += errs[static_cast<std::size_t>(frames[h] - 1)];
        }
    }

    HorizonTable table;
    table.label = label;
    for (std::size_t h = 0; h < horizons_ms.size(); ++h) {
        table.rows.push_back({horizons_ms[h], frames[h],
                              sums[h] / static_cast<double>(windows.size()),
                              static_cast<long long>(windows.size())});
    }
    return table;
}

void write_horizon_csv(std::ostream& out, const HorizonTable& table, bool header) {
    if (header) out << "variant,horizon_ms,frame,mpjpe_mm,count\n";
    char num[64];
    for (const HorizonRow& r : table.rows) {
        out << table.label << ",";
        std::snprintf(num, sizeof num, "%.17g", r.horizon_ms);
        out << num << "," << r.frame << ",";
        std::snprintf(num, sizeof num, "%.17g", r.mpjpe_mm);
        out << num << "," << r.count << "\n";
    }
}

void write_horizon_csv_file(const std::string& path, const HorizonTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_horizon_csv(out, table);
}

std::string format_horizon_text(const HorizonTable& table) {
    std::ostringstream os;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-16s %10s %6s %12s %7s\n", table.label.c_str(),
                  "horizon_ms", "frame", "mpjpe_mm", "count");
    os << buf;
    for (const HorizonRow& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%-16s %10.0f %6d %12.3f %7lld\n", "", r.horizon_ms,
                      r.frame, r.mpjpe_mm, r.count);
        os << buf;
    }
    return os.str();
}

}  // namespace trajfuse
