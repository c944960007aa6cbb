#include "qdrive/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace qdrive {

namespace {

double field_of(const TraceRecord& r, TraceField f) {
    switch (f) {
        case TraceField::D: return r.d;
        case TraceField::Phi: return r.phi;
        case TraceField::V: return r.v;
    }
    return 0.0;
}

constexpr double kW = 640.0;
constexpr double kH = 360.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 32.0;
constexpr double kBottom = 44.0;

struct Axes {
    double x0, x1, y0, y1;

    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
    double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
};

Axes make_axes(double x0, double x1, double y0, double y1) {
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    const double pad = 0.05 * (y1 - y0);
    return {x0, x1, y0 - pad, y1 + pad};
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string frame(const Axes& a, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
       << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
       << kH - kBottom << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = a.x0 + (a.x1 - a.x0) * i / 4.0;
        const double yv = a.y0 + (a.y1 - a.y0) * i / 4.0;
        os << "<text x=\"" << num(a.px(xv)) << "\" y=\"" << kH - kBottom + 14 << "\" text-anchor=\"middle\">"
           << label(std::round(xv * 100.0) / 100.0) << "</text>\n";
        os << "<text x=\"" << kLeft - 4 << "\" y=\"" << num(a.py(yv) + 4) << "\" text-anchor=\"end\">"
           << label(std::round(yv * 100.0) / 100.0) << "</text>\n";
        os << "<line x1=\"" << kLeft << "\" y1=\"" << num(a.py(yv)) << "\" x2=\"" << kW - kRight << "\" y2=\""
           << num(a.py(yv)) << "\" stroke=\"#ddd\"/>\n";
    }
    os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"14\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << kH / 2
       << ")\">" << ylabel << "</text>\n";
    return os.str();
}

}  // namespace

SeriesStats mean_std(const std::vector<Trace>& traces, TraceField field) {
    SeriesStats s;
    std::size_t longest = 0;
    for (const Trace& t : traces) longest = std::max(longest, t.size());
    for (std::size_t i = 0; i < longest; ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        double t_i = 0.0;
        for (const Trace& t : traces) {
            if (i < t.size()) {
                sum += field_of(t[i], field);
                t_i = t[i].t;
                ++n;
            }
        }
        const double m = sum / static_cast<double>(n);
        double var = 0.0;
        for (const Trace& t : traces) {
            if (i < t.size()) {
                const double e = field_of(t[i], field) - m;
                var += e * e;
            }
        }
        s.t.push_back(t_i);
        s.mean.push_back(m);
        s.std.push_back(std::sqrt(var / static_cast<double>(n)));
        s.count.push_back(n);
    }
    return s;
}

std::string svg_mean_std(const SeriesStats& s, const std::string& title, const std::string& ylabel) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        lo = std::min(lo, s.mean[i] - s.std[i]);
        hi = std::max(hi, s.mean[i] + s.std[i]);
    }
    if (s.t.empty()) lo = hi = 0.0;
    const Axes a = make_axes(s.t.empty() ? 0.0 : s.t.front(), s.t.empty() ? 1.0 : s.t.back(), lo, hi);
    std::ostringstream os;
    os << frame(a, title, "time (s)", ylabel);
    if (!s.t.empty()) {
        os << "<polygon fill=\"#4a7ebb\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.t.size(); ++i) os << num(a.px(s.t[i])) << ',' << num(a.py(s.mean[i] + s.std[i])) << ' ';
        for (std::size_t i = s.t.size(); i-- > 0;) os << num(a.px(s.t[i])) << ',' << num(a.py(s.mean[i] - s.std[i])) << ' ';
        os << "\"/>\n<polyline fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.t.size(); ++i) os << num(a.px(s.t[i])) << ',' << num(a.py(s.mean[i])) << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_curve(const std::vector<double>& curve, const std::string& title) {
    double lo = 0.0;
    double hi = 0.0;
    if (!curve.empty()) {
        lo = *std::min_element(curve.begin(), curve.end());
        hi = *std::max_element(curve.begin(), curve.end());
    }
    const Axes a = make_axes(1.0, static_cast<double>(std::max<std::size_t>(curve.size(), 2)), lo, hi);
    std::ostringstream os;
    os << frame(a, title, "episode", "reward");
    os << "<polyline fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.size(); ++i) os << num(a.px(static_cast<double>(i + 1))) << ',' << num(a.py(curve[i])) << ' ';
    os << "\"/>\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        os << "<circle cx=\"" << num(a.px(static_cast<double>(i + 1))) << "\" cy=\"" << num(a.py(curve[i]))
           << "\" r=\"2\" fill=\"#1f4e8c\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<std::filesystem::path> emit_plots(const std::vector<Trace>& traces, const std::filesystem::path& dir,
                                              const std::string& prefix) {
    if (traces.empty()) throw HarnessError("emit_plots: no traces");
    struct Spec {
        TraceField f;
        const char* suffix;
        const char* ylabel;
    };
    const Spec specs[] = {{TraceField::D, "d", "d (m)"}, {TraceField::Phi, "phi", "phi (deg)"}, {TraceField::V, "v", "v (m/s)"}};
    std::vector<std::filesystem::path> out;
    for (const Spec& sp : specs) {
        const auto path = dir / (prefix + "_" + sp.suffix + ".svg");
        const std::string title = prefix + ": mean and std of " + sp.suffix + " over " + std::to_string(traces.size()) + " runs";
        write_text(path, svg_mean_std(mean_std(traces, sp.f), title, sp.ylabel));
        out.push_back(path);
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw HarnessError("cannot write " + path.string());
    out << text;
    if (!out) throw HarnessError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw HarnessError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string curve_to_csv(const std::vector<double>& curve) {
    std::string out = "episode,reward\n";
    char buf[64];
    for (std::size_t i = 0; i < curve.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, curve[i]);
        out += buf;
    }
    return out;
}

std::vector<double> curve_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "episode,reward") throw HarnessError("curve: missing header");
    std::vector<double> curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw HarnessError("curve: malformed line");
        curve.push_back(std::stod(line.substr(comma + 1)));
    }
    return curve;
}

}  // namespace qdrive
