#include "cycsig/plot.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace cycsig::plot {

namespace {

constexpr double kW = 720, kH = 420;
constexpr double kLeft = 60, kRight = 170, kTop = 40, kBottom = 50;
constexpr double kPlotW = kW - kLeft - kRight, kPlotH = kH - kTop - kBottom;

const std::array<const char*, 10> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                              "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
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

void header(std::ostringstream& os, const std::string& title, const std::string& ylabel) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
       << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << num(kLeft + kPlotW / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
           << escape(title) << "</text>\n";
    // Axes and y ticks at 0, 0.25, ..., 1.
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + kPlotH << "\" x2=\"" << kLeft + kPlotW << "\" y2=\""
       << kTop + kPlotH << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + kPlotH
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = kTop + kPlotH * (1.0 - i / 4.0);
        os << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << kLeft - 7 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << num(i / 4.0)
           << "</text>\n";
    }
    os << "<text x=\"" << num(kLeft + kPlotW / 2) << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">L</text>\n";
    os << "<text x=\"16\" y=\"" << num(kTop + kPlotH / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << num(kTop + kPlotH / 2) << ")\">" << ylabel << "</text>\n";
}

void legend(std::ostringstream& os, std::size_t i, const std::string& label, const char* colour) {
    const double y = kTop + 14.0 * static_cast<double>(i);
    os << "<rect x=\"" << kLeft + kPlotW + 12 << "\" y=\"" << num(y) << "\" width=\"10\" height=\"10\" fill=\""
       << colour << "\"/>\n";
    os << "<text x=\"" << kLeft + kPlotW + 26 << "\" y=\"" << num(y + 9) << "\">" << escape(label) << "</text>\n";
}

// Label every n-th length so at most ~10 labels appear.
std::size_t tick_every(std::size_t n) { return std::max<std::size_t>(1, (n + 9) / 10); }

}  // namespace

std::string rank_svg(const experiments::RankTable& t, const std::string& title) {
    std::ostringstream os;
    header(os, title, "share of segments");
    const std::size_t n = t.lengths.size();
    const double slot = n ? kPlotW / static_cast<double>(n) : 0.0;
    const std::size_t every = tick_every(n);
    for (std::size_t l = 0; l < n; ++l) {
        const double total = static_cast<double>(t.total(l));
        const double x = kLeft + slot * static_cast<double>(l) + slot * 0.1;
        double y = kTop + kPlotH;
        auto bar = [&](std::size_t count, const char* colour) {
            if (count == 0 || total == 0) return;
            const double h = kPlotH * static_cast<double>(count) / total;
            y -= h;
            os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(slot * 0.8) << "\" height=\""
               << num(h) << "\" fill=\"" << colour << "\"/>\n";
        };
        os << "<g class=\"bar\" data-length=\"" << t.lengths[l] << "\">\n";
        for (std::size_t r = 0; r <= t.max_rank; ++r) bar(t.counts[l][r], kPalette[r % kPalette.size()]);
        bar(t.failed[l], "#333333");
        os << "</g>\n";
        if (l % every == 0)
            os << "<text x=\"" << num(x + slot * 0.4) << "\" y=\"" << kTop + kPlotH + 15
               << "\" text-anchor=\"middle\">" << t.lengths[l] << "</text>\n";
    }
    for (std::size_t r = 0; r <= t.max_rank; ++r) legend(os, r, "rank " + std::to_string(r), kPalette[r % kPalette.size()]);
    legend(os, t.max_rank + 1, "failed", "#333333");
    os << "</svg>\n";
    return os.str();
}

std::string curves_svg(const experiments::FrequencyCurves& c, const std::string& title) {
    std::ostringstream os;
    header(os, title, "frequency");
    const std::size_t n = c.lengths.size();
    const double lo = n ? static_cast<double>(c.lengths.front()) : 0.0;
    const double hi = n ? static_cast<double>(c.lengths.back()) : 1.0;
    auto xpos = [&](std::size_t l) {
        if (n < 2) return kLeft + kPlotW / 2;
        return kLeft + kPlotW * (static_cast<double>(c.lengths[l]) - lo) / (hi - lo);
    };
    const std::size_t every = tick_every(n);
    for (std::size_t l = 0; l < n; l += every)
        os << "<text x=\"" << num(xpos(l)) << "\" y=\"" << kTop + kPlotH + 15 << "\" text-anchor=\"middle\">"
           << c.lengths[l] << "</text>\n";
    for (std::size_t k = 0; k < c.keys.size(); ++k) {
        const char* colour = kPalette[k % kPalette.size()];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t l = 0; l < n; ++l) {
            if (l) os << ' ';
            os << num(xpos(l)) << ',' << num(kTop + kPlotH * (1.0 - c.freq[k][l]));
        }
        os << "\"/>\n";
        legend(os, k, c.keys[k], colour);
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace cycsig::plot
