#include "pedpred/dataset.hpp"

#include "pedpred/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace pedpred {

namespace {

std::int64_t truncate_id(Scalar v) { return static_cast<std::int64_t>(std::trunc(v)); }

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& name, const std::string& origin) {
    Dataset ds;
    ds.name = name;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv(line);
        const auto first = sv.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) continue;
        if (sv[first] == '#') continue;

        std::istringstream ls(line);
        Scalar frame_v, ped_v, x, y;
        if (!(ls >> frame_v >> ped_v >> x >> y)) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": expected 4 numeric columns");
        }
        std::string extra;
        if (ls >> extra) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": trailing tokens after 4 columns");
        }
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(frame_v) || !std::isfinite(ped_v)) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": non-finite value");
        }
        ds.rows.push_back({truncate_id(frame_v), truncate_id(ped_v), x, y});
    }
    if (ds.rows.empty()) throw DataError(origin + ": no data rows");

    std::sort(ds.rows.begin(), ds.rows.end(), [](const Dataset::Row& a, const Dataset::Row& b) {
        return std::tie(a.frame, a.pedestrian) < std::tie(b.frame, b.pedestrian);
    });
    for (std::size_t i = 1; i < ds.rows.size(); ++i) {
        if (ds.rows[i].frame == ds.rows[i - 1].frame && ds.rows[i].pedestrian == ds.rows[i - 1].pedestrian) {
            throw DataError(origin + ": duplicate (frame, pedestrian) pair " + std::to_string(ds.rows[i].frame) +
                            "," + std::to_string(ds.rows[i].pedestrian));
        }
    }

    ds.min_frame = ds.rows.front().frame;
    std::int64_t step = 0;
    std::int64_t prev = ds.rows.front().frame;
    for (const auto& r : ds.rows) {
        if (r.frame != prev) {
            step = std::gcd(step, r.frame - prev);
            prev = r.frame;
        }
    }
    ds.frame_step = step > 0 ? step : 1;
    return ds;
}

Dataset load_dataset(const std::filesystem::path& file, const std::string& name) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open dataset file: " + file.string());
    std::string n = name.empty() ? file.stem().string() : name;
    return parse_dataset(in, n, file.string());
}

Dataset dataset_from_trajectories(const std::string& name, const std::vector<Trajectory>& trajs) {
    Dataset ds;
    ds.name = name;
    for (const auto& t : trajs) {
        for (int i = 0; i < t.length(); ++i) {
            ds.rows.push_back({t.start_frame + i, t.pedestrian_id, t.positions(i, 0), t.positions(i, 1)});
        }
    }
    if (ds.rows.empty()) throw DataError("dataset_from_trajectories: no rows");
    std::sort(ds.rows.begin(), ds.rows.end(), [](const Dataset::Row& a, const Dataset::Row& b) {
        return std::tie(a.frame, a.pedestrian) < std::tie(b.frame, b.pedestrian);
    });
    ds.min_frame = ds.rows.front().frame;
    ds.frame_step = 1;
    return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write dataset file: " + file.string());
    out << "# dataset " << ds.name << " (frame pedestrian x y)\n";
    out.precision(17);
    for (const auto& r : ds.rows) {
        out << r.frame << ' ' << r.pedestrian << ' ' << r.x << ' ' << r.y << '\n';
    }
}

DatasetSummary summarize(const Dataset& ds) {
    DatasetSummary s;
    s.name = ds.name;
    s.rows = ds.rows.size();
    std::vector<std::int64_t> peds;
    peds.reserve(ds.rows.size());
    for (const auto& r : ds.rows) peds.push_back(r.pedestrian);
    std::sort(peds.begin(), peds.end());
    s.pedestrians = std::unique(peds.begin(), peds.end()) - peds.begin();
    s.windows = window_scenes(ds, 8, 20, 20).size();
    return s;
}

std::vector<SceneWindow> window_scenes(const Dataset& ds, int t_obs, int t_end, int stride) {
    if (stride < 1) throw std::invalid_argument("window_scenes: stride must be >= 1");
    if (!(t_obs < t_end)) throw std::invalid_argument("window_scenes: t_obs must be < t_end");

    // Per pedestrian, frame-step indexed positions in ascending order.
    std::map<std::int64_t, std::vector<std::pair<std::int64_t, Vec2>>> by_ped;
    for (const auto& r : ds.rows) {
        by_ped[r.pedestrian].push_back({ds.frame_index(r.frame), Vec2(r.x, r.y)});
    }

    std::map<std::int64_t, std::vector<Trajectory>> by_start;
    for (auto& [ped, samples] : by_ped) {
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        // maximal contiguous runs
        std::size_t i = 0;
        while (i < samples.size()) {
            std::size_t j = i;
            while (j + 1 < samples.size() && samples[j + 1].first == samples[j].first + 1) ++j;
            const std::int64_t run_start = samples[i].first;
            const std::int64_t run_end = samples[j].first;  // inclusive
            // window starts lie on the global stride grid
            std::int64_t w = (run_start + stride - 1) / stride * stride;
            for (; w + t_end - 1 <= run_end; w += stride) {
                Trajectory t;
                t.pedestrian_id = ped;
                t.start_frame = w;
                t.positions.resize(t_end, 2);
                const std::size_t base = i + static_cast<std::size_t>(w - run_start);
                for (int k = 0; k < t_end; ++k) t.positions.row(k) = samples[base + k].second.transpose();
                by_start[w].push_back(std::move(t));
            }
            i = j + 1;
        }
    }

    std::vector<SceneWindow> windows;
    windows.reserve(by_start.size());
    for (auto& [start, trajs] : by_start) {
        std::sort(trajs.begin(), trajs.end(),
                  [](const Trajectory& a, const Trajectory& b) { return a.pedestrian_id < b.pedestrian_id; });
        SceneWindow w;
        w.t_obs = t_obs;
        w.t_end = t_end;
        w.trajectories = std::move(trajs);
        windows.push_back(std::move(w));
    }
    return windows;
}

}  // namespace pedpred
