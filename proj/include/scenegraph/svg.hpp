#pragma once

#include <scenegraph/pipeline.hpp>

#include <string>

namespace scenegraph {

struct SvgOptions {
  double pixels_per_meter = 20.0;
  double margin = 1.0;  ///< meters around the layout bounds
};

/// Plane segments, room hulls, wall pairs and centers as a standalone SVG.
/// Ground-truth centers come from `layout`; hulls, walls and detected centers
/// from `prediction` when given.
std::string render_svg(const Layout& layout, const Prediction* prediction, const SvgOptions& options = {});

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

}  // namespace scenegraph
