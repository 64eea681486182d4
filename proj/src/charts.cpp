#include "itms/charts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include <fmt/format.h>

#include "itms/controllers.hpp"
#include "itms/errors.hpp"

namespace itms {
namespace {

constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                             "#9467bd", "#ff7f0e", "#8c564b"};

constexpr double kPanelW = 560.0;
constexpr double kPanelH = 220.0;
constexpr double kMargin = 56.0;

using Series = std::function<double(const TraceRecord&)>;

void check_grids(const std::vector<NamedTrace>& traces) {
    if (traces.empty()) throw ArgumentError("no traces to chart");
    const Trace& ref = traces.front().second;
    if (ref.empty()) throw ArgumentError(fmt::format("trace '{}' is empty", traces.front().first));
    for (const auto& [name, tr] : traces) {
        bool same = tr.size() == ref.size();
        for (std::size_t i = 0; same && i < tr.size(); ++i) same = tr[i].t == ref[i].t;
        if (!same) {
            throw ArgumentError(fmt::format("trace '{}' is on a different time grid than '{}'",
                                            name, traces.front().first));
        }
    }
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range nice_range(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {std::floor(lo - pad), std::ceil(hi + pad)};
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// One panel with axes, ticks and a polyline per trace; origin at (x0, y0).
std::string panel(const std::vector<NamedTrace>& traces, const Series& f, double x0, double y0,
                  const std::string& title, const std::string& ylabel,
                  const std::vector<double>& hlines = {}) {
    const Trace& ref = traces.front().second;
    const double t0 = ref.front().t;
    const double t1 = std::max(ref.back().t, t0 + 1.0);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [name, tr] : traces) {
        for (const auto& r : tr) {
            lo = std::min(lo, f(r));
            hi = std::max(hi, f(r));
        }
    }
    for (double h : hlines) {
        lo = std::min(lo, h);
        hi = std::max(hi, h);
    }
    const Range yr = nice_range(lo, hi);
    const double w = kPanelW - kMargin - 16.0;
    const double h = kPanelH - 2.0 * 28.0;
    const double px = x0 + kMargin;
    const double py = y0 + 28.0;
    auto sx = [&](double t) { return px + (t - t0) / (t1 - t0) * w; };
    auto sy = [&](double v) { return py + h - (v - yr.lo) / (yr.hi - yr.lo) * h; };

    std::string out;
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"13\" font-weight=\"bold\">{}</text>\n",
        px, y0 + 18.0, escape(title));
    out += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
        "stroke=\"#444\"/>\n",
        px, py, w, h);
    for (int k = 0; k <= 4; ++k) {
        const double v = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        out += fmt::format(
            "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n"
            "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{:.1f}</text>\n",
            px, sy(v), px + w, sy(v), px - 4.0, sy(v) + 3.0, v);
        const double t = t0 + (t1 - t0) * k / 4.0;
        out += fmt::format(
            "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"middle\">{:.0f}</text>\n",
            sx(t), py + h + 14.0, t);
    }
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 {:.1f} {:.1f})\">{}</text>\n",
        x0 + 14.0, py + h / 2.0, x0 + 14.0, py + h / 2.0, escape(ylabel));
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"middle\">t [s]</text>\n",
        px + w / 2.0, py + h + 26.0);
    for (double hv : hlines) {
        out += fmt::format(
            "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#888\" "
            "stroke-dasharray=\"4 3\"/>\n",
            px, sy(hv), px + w, sy(hv));
    }
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& tr = traces[k].second;
        out += fmt::format("<polyline class=\"series\" data-name=\"{}\" fill=\"none\" stroke=\"{}\" "
                           "stroke-width=\"1.2\" points=\"",
                           escape(traces[k].first), kColors[k % kColors.size()]);
        for (std::size_t i = 0; i < tr.size(); ++i) {
            out += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", sx(tr[i].t), sy(f(tr[i])));
        }
        out += "\"/>\n";
    }
    return out;
}

std::string legend(const std::vector<NamedTrace>& traces, double x, double y) {
    std::string out;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const double yy = y + 16.0 * static_cast<double>(k);
        out += fmt::format(
            "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" "
            "stroke-width=\"2\"/>\n<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\">{}</text>\n",
            x, yy, x + 20.0, yy, kColors[k % kColors.size()], x + 26.0, yy + 4.0,
            escape(traces[k].first));
    }
    return out;
}

std::string document(double width, double height, const std::string& body) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
        width, height, width, height, body);
}

constexpr double kLegendW = 150.0;

}  // namespace

std::string section_chart_svg(const std::vector<NamedTrace>& traces) {
    check_grids(traces);
    std::string body;
    for (std::size_t s = 0; s < kSections; ++s) {
        const double x0 = static_cast<double>(s % 2) * kPanelW;
        const double y0 = static_cast<double>(s / 2) * kPanelH;
        body += panel(
            traces, [s](const TraceRecord& r) { return r.state.t_s[s]; }, x0, y0,
            fmt::format("Section {}", s + 1), "T [degC]");
    }
    body += legend(traces, 2.0 * kPanelW + 8.0, 40.0);
    return document(2.0 * kPanelW + kLegendW, 2.0 * kPanelH, body);
}

std::string gap_chart_svg(const std::vector<NamedTrace>& traces) {
    check_grids(traces);
    auto gap = [](const TraceRecord& r) {
        const auto [lo, hi] = std::minmax_element(r.state.t_s.begin(), r.state.t_s.end());
        return *hi - *lo;
    };
    std::string body = panel(traces, gap, 0.0, 0.0, "Max inter-section gap", "gap [K]");
    body += legend(traces, kPanelW + 8.0, 40.0);
    return document(kPanelW + kLegendW, kPanelH, body);
}

std::string average_chart_svg(const std::vector<NamedTrace>& traces, const PlantParams& p,
                              double t_set) {
    check_grids(traces);
    std::string body = panel(
        traces, [&p](const TraceRecord& r) { return section_mean(r.state, p); }, 0.0, 0.0,
        "Average cabin temperature", "T [degC]", {t_set});
    body += legend(traces, kPanelW + 8.0, 40.0);
    return document(kPanelW + kLegendW, kPanelH, body);
}

std::vector<std::string> render_charts(const std::vector<NamedTrace>& traces, const PlantParams& p,
                                       double t_set, const std::string& dir) {
    check_grids(traces);
    const std::filesystem::path base(dir);
    const std::vector<std::pair<std::string, std::string>> files{
        {"sections.svg", section_chart_svg(traces)},
        {"gap.svg", gap_chart_svg(traces)},
        {"average.svg", average_chart_svg(traces, p, t_set)},
    };
    std::vector<std::string> paths;
    for (const auto& [name, svg] : files) {
        const auto path = (base / name).string();
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error(fmt::format("cannot write chart '{}'", path));
        os << svg;
        paths.push_back(path);
    }
    return paths;
}

}  // namespace itms
