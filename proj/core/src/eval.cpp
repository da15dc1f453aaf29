#include "mls/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mls/errors.hpp"

namespace mls {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double safe_ratio(std::uint64_t num, std::uint64_t den, bool* degenerate) {
  if (den == 0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::uint32_t majority_class(const PointCloud& cloud, const std::vector<std::uint32_t>& indices) {
  std::map<std::uint32_t, std::size_t> counts;
  for (std::uint32_t i : indices) ++counts[cloud.points[i].class_id];
  std::uint32_t best = 0;
  std::size_t best_count = 0;
  for (const auto& [cls, count] : counts) {
    if (count > best_count) {  // map order makes ties resolve to the lowest id
      best = cls;
      best_count = count;
    }
  }
  return best;
}

std::string variant_name(MatchVariant variant) {
  return variant == MatchVariant::kLiteral ? "literal" : "intersection";
}

MatchVariant parse_variant(const std::string& name) {
  if (name == "literal") return MatchVariant::kLiteral;
  if (name == "intersection") return MatchVariant::kIntersection;
  throw InvalidParameter("unknown match variant '" + name + "'");
}

MatchReport match_objects(const SegmentSet& gt, const SegmentSet& detected, double m,
                          MatchVariant variant) {
  if (gt.segment_of.size() != detected.segment_of.size())
    throw InvalidInput("match_objects: segmentations cover different point counts");
  if (!(m > 0.0) || !(m <= 1.0))
    throw InvalidParameter("match_objects: overlap threshold must be in (0, 1]");

  MatchReport report;
  report.variant = variant;
  report.m = m;
  report.ground_truth = gt.segments.size();
  report.detected = detected.segments.size();

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> overlap;
  for (std::size_t i = 0; i < gt.segment_of.size(); ++i) {
    const std::uint32_t g = gt.segment_of[i];
    const std::uint32_t s = detected.segment_of[i];
    if (g == SegmentSet::kNone || s == SegmentSet::kNone) continue;
    ++overlap[{g, s}];
  }

  std::set<std::uint32_t> gts, srs;
  for (const auto& [key, inter] : overlap) {
    const auto [g, s] = key;
    const double gt_size = static_cast<double>(gt.segments[g].size());
    const double sr_size = static_cast<double>(detected.segments[s].size());
    bool matched = false;
    if (variant == MatchVariant::kLiteral) {
      const double u = gt_size + sr_size - static_cast<double>(inter);
      matched = gt_size / u > m && sr_size / u > m;
    } else {
      const double d = static_cast<double>(inter);
      matched = d / gt_size > m && d / sr_size > m;
    }
    if (matched) {
      report.pairs.push_back({g, s, inter});
      gts.insert(g);
      srs.insert(s);
    }
  }
  report.matched_gt = gts.size();
  report.matched_detected = srs.size();
  report.precision = safe_ratio(report.matched_detected, report.detected, nullptr);
  report.recall = safe_ratio(report.matched_gt, report.ground_truth, nullptr);
  const double pr = report.precision + report.recall;
  report.f1 = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

ClassReport classification_metrics(const std::vector<std::uint32_t>& classes,
                                   const std::vector<std::uint64_t>& confusion) {
  if (classes.empty()) throw InvalidParameter("classification_metrics: no classes");
  if (!std::is_sorted(classes.begin(), classes.end()) ||
      std::adjacent_find(classes.begin(), classes.end()) != classes.end())
    throw InvalidParameter("classification_metrics: class ids must be ascending and distinct");
  const std::size_t k = classes.size();
  if (confusion.size() != k * k)
    throw InvalidParameter("classification_metrics: confusion matrix shape mismatch");

  ClassReport report;
  report.classes = classes;
  report.confusion = confusion;
  for (std::uint64_t v : confusion) report.total += v;

  std::uint64_t trace = 0;
  std::size_t with_support = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics cm;
    cm.class_id = classes[c];
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += confusion[c * k + j];
      col += confusion[j * k + c];
    }
    cm.tp = confusion[c * k + c];
    cm.fp = col - cm.tp;
    cm.fn = row - cm.tp;
    cm.tn = report.total - cm.tp - cm.fp - cm.fn;
    trace += cm.tp;

    cm.precision = safe_ratio(cm.tp, cm.tp + cm.fp, &cm.degenerate);
    cm.recall = safe_ratio(cm.tp, cm.tp + cm.fn, &cm.degenerate);
    const std::uint64_t f1_den = 2 * cm.tp + cm.fp + cm.fn;
    cm.f1 = safe_ratio(2 * cm.tp, f1_den, &cm.degenerate);
    const double a = static_cast<double>(cm.tp + cm.fp);
    const double b = static_cast<double>(cm.tp + cm.fn);
    const double cc = static_cast<double>(cm.tn + cm.fp);
    const double d = static_cast<double>(cm.tn + cm.fn);
    if (a == 0.0 || b == 0.0 || cc == 0.0 || d == 0.0) {
      cm.mcc = 0.0;
      cm.degenerate = true;
    } else {
      cm.mcc = (static_cast<double>(cm.tp) * static_cast<double>(cm.tn) -
                static_cast<double>(cm.fp) * static_cast<double>(cm.fn)) /
               std::sqrt(a * b * cc * d);
    }

    if (row > 0) {
      ++with_support;
      report.macro_precision += cm.precision;
      report.macro_recall += cm.recall;
      report.macro_f1 += cm.f1;
      report.macro_mcc += cm.mcc;
    }
    report.per_class.push_back(cm);
  }
  if (with_support > 0) {
    const double n = static_cast<double>(with_support);
    report.macro_precision /= n;
    report.macro_recall /= n;
    report.macro_f1 /= n;
    report.macro_mcc /= n;
  }
  report.accuracy =
      report.total == 0 ? 0.0 : static_cast<double>(trace) / static_cast<double>(report.total);
  return report;
}

ClassReport classification_from_pairs(const std::vector<std::uint32_t>& truth,
                                      const std::vector<std::uint32_t>& predicted) {
  if (truth.size() != predicted.size())
    throw InvalidInput("classification_from_pairs: truth and prediction counts differ");
  if (truth.empty()) throw EmptyInput("classification_from_pairs: no samples");
  std::set<std::uint32_t> ids(truth.begin(), truth.end());
  ids.insert(predicted.begin(), predicted.end());
  std::vector<std::uint32_t> classes(ids.begin(), ids.end());
  std::unordered_map<std::uint32_t, std::size_t> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index[classes[c]] = c;
  std::vector<std::uint64_t> confusion(classes.size() * classes.size(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++confusion[index[truth[i]] * classes.size() + index[predicted[i]]];
  return classification_metrics(classes, confusion);
}

std::vector<std::uint32_t> coarse_project(const std::vector<std::uint32_t>& ids,
                                          const ClassTree& tree) {
  std::vector<std::uint32_t> out;
  out.reserve(ids.size());
  for (std::uint32_t id : ids) {
    const auto coarse = tree.coarse_of(id);
    if (!coarse)
      throw InvalidInput("coarse_project: class " + std::to_string(id) +
                         " has no coarse mapping");
    out.push_back(*coarse);
  }
  return out;
}

PipelineEval evaluate_pipeline(const PointCloud& gt, const PointCloud& predicted,
                               const EvalOptions& options) {
  if (gt.size() != predicted.size())
    throw InvalidInput("evaluate_pipeline: clouds have different point counts");
  if (gt.empty()) throw EmptyInput("evaluate_pipeline: empty clouds");

  const SegmentSet gt_set = segments_from_labels(gt);
  const SegmentSet sr_set = segments_from_labels(predicted);

  PipelineEval eval;
  eval.matching = match_objects(gt_set, sr_set, options.m, options.variant);

  std::vector<std::uint32_t> truth, pred;
  truth.reserve(eval.matching.pairs.size());
  pred.reserve(eval.matching.pairs.size());
  for (const MatchPair& pair : eval.matching.pairs) {
    truth.push_back(majority_class(gt, gt_set.segments[pair.gt]));
    pred.push_back(majority_class(predicted, sr_set.segments[pair.sr]));
  }
  if (options.coarse) {
    truth = coarse_project(truth, *options.coarse);
    pred = coarse_project(pred, *options.coarse);
  }
  if (!truth.empty()) eval.classification = classification_from_pairs(truth, pred);
  return eval;
}

std::string match_report_csv(const MatchReport& report) {
  std::ostringstream out;
  out << "variant,m,detected,matched_detected,matched_gt,ground_truth,precision,recall,f1\n"
      << variant_name(report.variant) << ',' << fmt_double(report.m) << ',' << report.detected
      << ',' << report.matched_detected << ',' << report.matched_gt << ','
      << report.ground_truth << ',' << fmt_double(report.precision) << ','
      << fmt_double(report.recall) << ',' << fmt_double(report.f1) << '\n';
  return out.str();
}

std::string class_report_csv(const ClassReport& report) {
  std::ostringstream out;
  out << "class,support,tp,fp,fn,tn,precision,recall,f1,mcc\n";
  for (const ClassMetrics& cm : report.per_class) {
    const std::uint64_t support = cm.tp + cm.fn;
    out << cm.class_id << ',' << support << ',' << cm.tp << ',' << cm.fp << ',' << cm.fn << ','
        << cm.tn << ',' << fmt_double(cm.precision) << ',' << fmt_double(cm.recall) << ','
        << fmt_double(cm.f1) << ',' << fmt_double(cm.mcc) << '\n';
  }
  out << "macro," << report.total << ",,,,," << fmt_double(report.macro_precision) << ','
      << fmt_double(report.macro_recall) << ',' << fmt_double(report.macro_f1) << ','
      << fmt_double(report.macro_mcc) << '\n';
  return out.str();
}

std::string format_match_report(const MatchReport& report) {
  char buf[160];
  std::ostringstream out;
  out << "matching (" << variant_name(report.variant) << ", m=" << report.m << ")\n";
  std::snprintf(buf, sizeof(buf), "  detected %zu (matched %zu), ground truth %zu (matched %zu)\n",
                report.detected, report.matched_detected, report.ground_truth,
                report.matched_gt);
  out << buf;
  std::snprintf(buf, sizeof(buf), "  precision %.4f  recall %.4f  f1 %.4f\n", report.precision,
                report.recall, report.f1);
  out << buf;
  return out.str();
}

std::string format_class_report(const ClassReport& report, const ClassTree* tree) {
  std::ostringstream out;
  char buf[200];
  out << "class                 support  precision  recall     f1         mcc\n";
  for (const ClassMetrics& cm : report.per_class) {
    std::string name = tree ? tree->name_of(cm.class_id) : std::to_string(cm.class_id);
    if (name.size() > 20) name.resize(20);
    std::snprintf(buf, sizeof(buf), "%-20s %8llu  %9.4f  %9.4f  %9.4f  %9.4f%s\n", name.c_str(),
                  static_cast<unsigned long long>(cm.tp + cm.fn), cm.precision, cm.recall, cm.f1,
                  cm.mcc, cm.degenerate ? "  (degenerate)" : "");
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-20s %8llu  %9.4f  %9.4f  %9.4f  %9.4f\n", "macro",
                static_cast<unsigned long long>(report.total), report.macro_precision,
                report.macro_recall, report.macro_f1, report.macro_mcc);
  out << buf;
  std::snprintf(buf, sizeof(buf), "accuracy %.4f over %llu objects\n", report.accuracy,
                static_cast<unsigned long long>(report.total));
  out << buf;
  return out.str();
}

}  // namespace mls
