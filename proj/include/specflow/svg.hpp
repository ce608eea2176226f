#pragma once

#include <string>
#include <vector>

#include "specflow/io.hpp"

namespace specflow {

/// Minimal SVG canvas with a linear world-to-view transform.
class SvgCanvas {
  public:
    SvgCanvas(double x_lo, double x_hi, double y_lo, double y_hi, int width, int height,
              int margin = 50);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0, const std::string& dash = "");
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width = 1.5);
    void circle(double x, double y, double r_px, const std::string& fill);
    void rect(double x_lo, double y_lo, double x_hi, double y_hi, const std::string& fill,
              double opacity = 0.25);
    void text(double x, double y, const std::string& s, int size_px = 13,
              const std::string& fill = "#222");
    void text_px(double px, double py, const std::string& s, int size_px = 13,
                 const std::string& fill = "#222");
    void axes(const std::string& x_label, const std::string& y_label, int n_ticks = 5);

    std::string finish();

  private:
    double tx(double x) const;
    double ty(double y) const;
    double x_lo_, x_hi_, y_lo_, y_hi_;
    int w_, h_, margin_;
    std::string body_;
};

/// Render the gap-certificate figure (section view: unstable curve, stable
/// strip, separatrix crossings, projected points and the gap) from the
/// serialized figure data, never from in-memory state.
void render_gap_figure(const json& figure, const std::string& path);

}  // namespace specflow
