#include <scenegraph/evalkit.hpp>

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <set>
#include <sstream>

namespace scenegraph {

DetectionReport make_report(Relation relation, std::vector<DetectionCounts> per_layout) {
  DetectionReport r;
  r.relation = relation;
  for (const auto& c : per_layout) {
    r.counts.true_positives += c.true_positives;
    r.counts.false_positives += c.false_positives;
    r.counts.false_negatives += c.false_negatives;
  }
  r.per_layout = std::move(per_layout);
  const double detected = r.counts.true_positives + r.counts.false_positives;
  const double truth = r.counts.true_positives + r.counts.false_negatives;
  r.precision_defined = detected > 0.0;
  r.recall_defined = truth > 0.0;
  r.precision = r.precision_defined ? r.counts.true_positives / detected : 0.0;
  r.recall = r.recall_defined ? r.counts.true_positives / truth : 0.0;
  return r;
}

double jaccard(std::span<const PlaneId> a, std::span<const PlaneId> b) {
  const std::set<PlaneId> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (PlaneId p : sa) inter += sb.count(p);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

DetectionReport score_rooms(std::span<const RoomCluster> detected, const Layout& gt) {
  struct Candidate {
    double score;
    std::size_t det, truth;
  };
  std::vector<Candidate> candidates;
  for (std::size_t d = 0; d < detected.size(); ++d) {
    for (std::size_t t = 0; t < gt.rooms.size(); ++t) {
      const double s = jaccard(detected[d].plane_ids, gt.rooms[t].plane_ids);
      if (s > 0.0) candidates.push_back({s, d, t});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  std::vector<bool> det_used(detected.size(), false), gt_used(gt.rooms.size(), false);
  double credit = 0.0;
  for (const auto& c : candidates) {
    if (det_used[c.det] || gt_used[c.truth]) continue;
    det_used[c.det] = gt_used[c.truth] = true;
    credit += c.score;
  }
  DetectionCounts counts;
  counts.true_positives = credit;
  counts.false_positives = static_cast<double>(detected.size()) - credit;
  counts.false_negatives = static_cast<double>(gt.rooms.size()) - credit;
  return make_report(Relation::kSameRoom, {counts});
}

DetectionReport score_walls(std::span<const WallPair> detected, const Layout& gt) {
  std::set<std::pair<PlaneId, PlaneId>> truth;
  for (const auto& w : gt.walls) {
    truth.emplace(std::min(w.plane_ids[0], w.plane_ids[1]), std::max(w.plane_ids[0], w.plane_ids[1]));
  }
  std::set<std::pair<PlaneId, PlaneId>> matched;
  for (const auto& w : detected) {
    const std::pair key{std::min(w.plane_ids[0], w.plane_ids[1]), std::max(w.plane_ids[0], w.plane_ids[1])};
    if (truth.count(key)) matched.insert(key);
  }
  DetectionCounts counts;
  counts.true_positives = static_cast<double>(matched.size());
  counts.false_positives = static_cast<double>(detected.size() - matched.size());
  counts.false_negatives = static_cast<double>(truth.size() - matched.size());
  return make_report(Relation::kSameWall, {counts});
}

DetectionReport aggregate(std::span<const DetectionReport> reports) {
  std::vector<DetectionCounts> all;
  Relation relation = reports.empty() ? Relation::kSameRoom : reports.front().relation;
  for (const auto& r : reports) all.insert(all.end(), r.per_layout.begin(), r.per_layout.end());
  return make_report(relation, std::move(all));
}

std::string format_report(const DetectionReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << (r.relation == Relation::kSameRoom ? "rooms" : "walls") << ": TP " << r.counts.true_positives
     << "  FP " << r.counts.false_positives << "  FN " << r.counts.false_negatives << "  P ";
  if (r.precision_defined) {
    os << r.precision;
  } else {
    os << "n/a";
  }
  os << "  R ";
  if (r.recall_defined) {
    os << r.recall;
  } else {
    os << "n/a";
  }
  os << "\n";
  return os.str();
}

double median(std::vector<double> samples) {
  if (samples.empty()) return 0.0;
  const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
  std::nth_element(samples.begin(), mid, samples.end());
  if (samples.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(samples.begin(), mid);
  return 0.5 * (lower + upper);
}

double time_pipeline(std::span<const PlaneFeature> planes, const EdgeClassifierModel& room_model,
                     const EdgeClassifierModel& wall_model, const InferenceConfig& config, int runs) {
  std::vector<double> samples;
  for (int i = 0; i < std::max(runs, 1); ++i) {
    const auto start = std::chrono::steady_clock::now();
    [[maybe_unused]] const Prediction pred = infer(planes, room_model, wall_model, config);
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return median(std::move(samples));
}

}  // namespace scenegraph
