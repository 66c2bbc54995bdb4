#pragma once

#include <scenegraph/cluster.hpp>
#include <scenegraph/pipeline.hpp>
#include <scenegraph/synthgen.hpp>

#include <span>
#include <string>
#include <vector>

namespace scenegraph {

struct DetectionCounts {
  double true_positives = 0.0;
  double false_positives = 0.0;
  double false_negatives = 0.0;
};

/// Precision/recall of detected rooms or walls. Counts may be fractional for
/// rooms (Jaccard credit per matched detection).
struct DetectionReport {
  Relation relation = Relation::kSameRoom;
  DetectionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_defined = false;  ///< false when nothing was detected
  bool recall_defined = false;     ///< false when there is no ground truth
  std::vector<DetectionCounts> per_layout;
};

/// Fills precision/recall from counts.
DetectionReport make_report(Relation relation, std::vector<DetectionCounts> per_layout);

/// Jaccard similarity of two plane-ID sets.
double jaccard(std::span<const PlaneId> a, std::span<const PlaneId> b);

/// Greedy matching by descending Jaccard overlap; each detection and each
/// ground-truth room is matched at most once, and contributes its Jaccard
/// score as true-positive credit.
DetectionReport score_rooms(std::span<const RoomCluster> detected, const Layout& gt);

/// A wall is correct iff its plane pair equals a ground-truth wall pair.
DetectionReport score_walls(std::span<const WallPair> detected, const Layout& gt);

/// Sums counts over several single-layout reports.
DetectionReport aggregate(std::span<const DetectionReport> reports);

std::string format_report(const DetectionReport& report);

/// Median of `samples`.
double median(std::vector<double> samples);

/// Wall-clock milliseconds of graph construction, normalization, both forward
/// passes and clustering on `planes`; median over `runs` serialized runs.
double time_pipeline(std::span<const PlaneFeature> planes, const EdgeClassifierModel& room_model,
                     const EdgeClassifierModel& wall_model, const InferenceConfig& config, int runs = 5);

}  // namespace scenegraph
