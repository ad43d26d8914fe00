#include "pedpred/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pedpred {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Mapper {
    Scalar min_x = 0, min_y = 0, scale = 1;
    Scalar height = 0;

    Scalar x(Scalar wx) const { return (wx - min_x) * scale + 20; }
    // svg y axis points down
    Scalar y(Scalar wy) const { return height - ((wy - min_y) * scale + 20); }
};

std::string polyline(const PointSeq& pts, const Mapper& map, const std::string& color, bool dashed) {
    std::ostringstream out;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (dashed) out << " stroke-dasharray=\"5,4\"";
    out << " points=\"";
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        if (i) out << ' ';
        out << map.x(pts(i, 0)) << ',' << map.y(pts(i, 1));
    }
    out << "\"/>\n";
    return out.str();
}

std::string star(Scalar cx, Scalar cy, Scalar r, const std::string& color) {
    std::ostringstream out;
    out << "<polygon fill=\"" << color << "\" points=\"";
    for (int k = 0; k < 10; ++k) {
        const Scalar rad = (k % 2 == 0) ? r : 0.4 * r;
        const Scalar ang = -M_PI / 2 + k * M_PI / 5;
        if (k) out << ' ';
        out << cx + rad * std::cos(ang) << ',' << cy + rad * std::sin(ang);
    }
    out << "\"/>\n";
    return out.str();
}

}  // namespace

void write_plot_svg(const std::filesystem::path& file, const SceneWindow& window,
                    const std::vector<PredictionSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("write_plot_svg: empty prediction set");
    const int m = window.pedestrians();

    Scalar min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    auto grow = [&](const PointSeq& p) {
        min_x = std::min(min_x, p.col(0).minCoeff());
        max_x = std::max(max_x, p.col(0).maxCoeff());
        min_y = std::min(min_y, p.col(1).minCoeff());
        max_y = std::max(max_y, p.col(1).maxCoeff());
    };
    for (const auto& t : window.trajectories) grow(t.positions);
    for (const auto& s : samples) {
        for (const auto& f : s.futures) grow(f.positions);
    }

    const Scalar span = std::max({max_x - min_x, max_y - min_y, 1e-6});
    Mapper map;
    map.min_x = min_x;
    map.min_y = min_y;
    map.scale = 560.0 / span;
    const Scalar width = (max_x - min_x) * map.scale + 40;
    map.height = (max_y - min_y) * map.scale + 40;

    std::ostringstream body;
    for (int i = 0; i < m; ++i) {
        const std::string color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const Trajectory& gt = window.trajectories[i];

        // ground truth: solid line over the full window, round endpoint marker
        body << polyline(gt.positions, map, color, false);
        body << "<circle cx=\"" << map.x(gt.last()(0)) << "\" cy=\"" << map.y(gt.last()(1))
             << "\" r=\"5\" fill=\"" << color << "\"/>\n";

        // observed part: dots
        for (int t = 0; t < window.t_obs; ++t) {
            body << "<circle cx=\"" << map.x(gt.positions(t, 0)) << "\" cy=\"" << map.y(gt.positions(t, 1))
                 << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }

        // predictions: dashed lines from the last observed point, star endpoints
        for (const auto& s : samples) {
            PointSeq path(s.futures[i].positions.rows() + 1, 2);
            path.row(0) = gt.positions.row(window.t_obs - 1);
            path.bottomRows(s.futures[i].positions.rows()) = s.futures[i].positions;
            body << polyline(path, map, color, true);
            const Position2 end = s.futures[i].last();
            body << star(map.x(end(0)), map.y(end(1)), 6, color);
        }
    }

    std::ofstream out(file);
    if (!out) throw DataError("cannot write svg: " + file.string());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << map.height
        << "\" viewBox=\"0 0 " << width << ' ' << map.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << body.str();
    out << "</svg>\n";
}

}  // namespace pedpred
