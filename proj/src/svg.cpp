#include "specflow/svg.hpp"

#include <cmath>
#include <cstdio>

namespace specflow {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string gnum(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

SvgCanvas::SvgCanvas(double x_lo, double x_hi, double y_lo, double y_hi, int width, int height,
                     int margin)
    : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi), w_(width), h_(height), margin_(margin) {}

double SvgCanvas::tx(double x) const {
    return margin_ + (x - x_lo_) / (x_hi_ - x_lo_) * (w_ - 2 * margin_);
}

double SvgCanvas::ty(double y) const {
    return h_ - margin_ - (y - y_lo_) / (y_hi_ - y_lo_) * (h_ - 2 * margin_);
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double width, const std::string& dash) {
    body_ += "<line x1=\"" + num(tx(x1)) + "\" y1=\"" + num(ty(y1)) + "\" x2=\"" + num(tx(x2)) +
             "\" y2=\"" + num(ty(y2)) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += "/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& stroke, double width) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) +
             "\" points=\"";
    for (const auto& [x, y] : pts) body_ += num(tx(x)) + "," + num(ty(y)) + " ";
    body_ += "\"/>\n";
}

void SvgCanvas::circle(double x, double y, double r_px, const std::string& fill) {
    body_ += "<circle cx=\"" + num(tx(x)) + "\" cy=\"" + num(ty(y)) + "\" r=\"" + num(r_px) +
             "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::rect(double x_lo, double y_lo, double x_hi, double y_hi, const std::string& fill,
                     double opacity) {
    body_ += "<rect x=\"" + num(tx(x_lo)) + "\" y=\"" + num(ty(y_hi)) + "\" width=\"" +
             num(tx(x_hi) - tx(x_lo)) + "\" height=\"" + num(ty(y_lo) - ty(y_hi)) + "\" fill=\"" +
             fill + "\" opacity=\"" + num(opacity) + "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, int size_px,
                     const std::string& fill) {
    text_px(tx(x), ty(y), s, size_px, fill);
}

void SvgCanvas::text_px(double px, double py, const std::string& s, int size_px,
                        const std::string& fill) {
    body_ += "<text x=\"" + num(px) + "\" y=\"" + num(py) + "\" font-size=\"" +
             std::to_string(size_px) + "\" font-family=\"sans-serif\" fill=\"" + fill + "\">" + s +
             "</text>\n";
}

void SvgCanvas::axes(const std::string& x_label, const std::string& y_label, int n_ticks) {
    line(x_lo_, y_lo_, x_hi_, y_lo_, "#000", 1.0);
    line(x_lo_, y_lo_, x_lo_, y_hi_, "#000", 1.0);
    for (int i = 0; i <= n_ticks; ++i) {
        const double x = x_lo_ + (x_hi_ - x_lo_) * i / n_ticks;
        const double y = y_lo_ + (y_hi_ - y_lo_) * i / n_ticks;
        text_px(tx(x) - 12, ty(y_lo_) + 18, gnum(x), 11, "#444");
        text_px(tx(x_lo_) - 42, ty(y) + 4, gnum(y), 11, "#444");
    }
    text_px(tx(0.5 * (x_lo_ + x_hi_)) - 10, h_ - 8.0, x_label, 13);
    text_px(8.0, ty(0.5 * (y_lo_ + y_hi_)), y_label, 13);
}

std::string SvgCanvas::finish() {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w_) +
                      "\" height=\"" + std::to_string(h_) + "\" viewBox=\"0 0 " +
                      std::to_string(w_) + " " + std::to_string(h_) + "\">\n" +
                      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ +
                      "</svg>\n";
    return out;
}

void render_gap_figure(const json& figure, const std::string& path) {
    const double x_p = figure.at("x_p").get<double>();
    const double y_p = figure.at("y_p").get<double>();
    const double mu = figure.at("mu").get<double>();

    SvgCanvas canvas(-1.05, 1.05, -1.05, 1.05, 860, 860);
    // Section boundary and the cusp line.
    canvas.rect(-1.0, -1.0, 1.0, 1.0, "#f7f7f7", 1.0);
    canvas.line(-1, -1, 1, -1, "#333");
    canvas.line(-1, 1, 1, 1, "#333");
    canvas.line(-1, -1, -1, 1, "#333");
    canvas.line(1, -1, 1, 1, "#333");
    canvas.line(0, -1, 0, 1, "#bbb", 1.0, "6,4");

    // Stable strip over the gap.
    const double g_lo = figure.at("gap").at("lo").get<double>();
    const double g_hi = figure.at("gap").at("hi").get<double>();
    {
        // Approximate the strip by the leaf band over the gap.
        const double x0 = x_p + g_lo, x1 = x_p + g_hi;
        canvas.rect(x0, y_p - mu, x1, y_p + mu, "#4caf50", 0.35);
    }

    // Chart leaves.
    for (const auto& leaf : figure.at("leaves"))
        canvas.line(leaf[0].get<double>(), leaf[1].get<double>(), leaf[0].get<double>(),
                    leaf[2].get<double>(), "#9ecae1", 1.0);

    // Unstable curve through the periodic point.
    std::vector<std::pair<double, double>> curve;
    for (const auto& pt : figure.at("curve"))
        curve.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    canvas.polyline(curve, "#08519c", 2.0);
    canvas.circle(x_p, y_p, 4.0, "#08519c");

    // Separatrix crossings (the finite projected set lives where these meet
    // the chart band).
    for (const auto& cr : figure.at("crossings"))
        canvas.circle(cr[0].get<double>(), cr[1].get<double>(), 2.5, "#d62728");

    // Projected points marked on the curve.
    for (const auto& u : figure.at("projected_points")) {
        const double x = x_p + u.get<double>();
        canvas.circle(x, y_p, 3.5, "#ff7f0e");
        canvas.line(x, y_p - 0.03, x, y_p + 0.03, "#ff7f0e", 1.5);
    }

    // The glued target point over the gap.
    const auto& w = figure.at("w");
    canvas.circle(w[0].get<double>(), w[1].get<double>(), 4.0, "#2ca02c");

    canvas.axes("x", "y");
    canvas.text_px(60, 28, "section view: unstable curve (blue), separatrix crossings (red), ", 13);
    canvas.text_px(60, 44,
                   "projected points (orange), gap strip (green), T = " +
                       std::to_string(figure.at("t_used").get<double>()),
                   13);
    write_text(canvas.finish(), path);
}

}  // namespace specflow
