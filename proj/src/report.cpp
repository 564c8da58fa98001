#include "hyperpipe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "hyperpipe/archive.hpp"
#include "hyperpipe/error.hpp"

namespace hyperpipe {

std::string format_number(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  if (std::floor(v) == v && std::fabs(v) < 1e15)
    std::snprintf(buf, sizeof buf, "%.0f", v);
  else
    std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

namespace {

std::string esc(const std::string& s) {
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

// SVG coordinates; not displayed text.
std::string c2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string num(double v) { return "<span class=\"v\">" + format_number(v) + "</span>"; }

std::string value_text(const ParamValue& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* s = std::get_if<std::string>(&v)) return esc(*s);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return num(static_cast<double>(*i));
  return num(std::get<double>(v));
}

// Plain form for SVG text, where markup is not allowed.
std::string label_text(const ParamValue& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* s = std::get_if<std::string>(&v)) return esc(*s);
  return format_number(as_double(v, "value"));
}

std::string config_text(const Config& c) {
  std::string out;
  for (const auto& [k, v] : c) out += (out.empty() ? "" : ", ") + esc(k) + " = " + value_text(v);
  return out.empty() ? "(defaults)" : out;
}

const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb", "#332288"};

std::string palette(std::size_t i) { return kPalette[i % (sizeof kPalette / sizeof *kPalette)]; }

// Red (worst) to green (best).
std::string perf_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(215 + (26 - 215) * t));
  const int g = static_cast<int>(std::lround(48 + (152 - 48) * t));
  const int b = static_cast<int>(std::lround(39 + (80 - 39) * t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void fit(const std::vector<double>& vs, bool include_zero) {
    if (vs.empty()) return;
    lo = *std::min_element(vs.begin(), vs.end());
    hi = *std::max_element(vs.begin(), vs.end());
    if (include_zero) {
      lo = std::min(lo, 0.0);
      hi = std::max(hi, 0.0);
    }
  }
  double t(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.5; }
};

class Writer {
 public:
  Writer& operator<<(const std::string& s) {
    out_ += s;
    return *this;
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

std::optional<double> summary_mean(const ResultTree& t, const std::string& partition, const std::string& metric) {
  auto p = t.summary.find(partition);
  if (p == t.summary.end()) return std::nullopt;
  auto m = p->second.find(metric);
  if (m == p->second.end()) return std::nullopt;
  return m->second.mean;
}

void header(Writer& w, const ResultTree& t) {
  w << "<header><h1>" << esc(t.name) << "</h1>\n<dl class=\"meta\">"
    << "<dt>target</dt><dd>" << to_string(t.target_kind) << "</dd>"
    << "<dt>samples</dt><dd>" << num(static_cast<double>(t.n_samples)) << "</dd>"
    << "<dt>features</dt><dd>" << num(static_cast<double>(t.n_features)) << "</dd>"
    << "<dt>seed</dt><dd><span class=\"v\">" << std::to_string(t.seed) << "</span></dd>"
    << "<dt>outer cv</dt><dd>" << to_string(t.outer_cv.variant) << ", splits "
    << num(static_cast<double>(t.outer_cv.n_splits)) << "</dd>"
    << "<dt>inner cv</dt><dd>" << to_string(t.inner_cv.variant) << ", splits "
    << num(static_cast<double>(t.inner_cv.n_splits)) << "</dd>"
    << "<dt>optimizer</dt><dd>" << esc(t.optimizer.name) << "</dd>"
    << "<dt>best config metric</dt><dd>" << esc(t.best_config_metric) << "</dd>"
    << "<dt>use test set</dt><dd>" << (t.use_test_set ? "true" : "false") << "</dd>"
    << "<dt>created</dt><dd>" << esc(t.timestamp) << "</dd>"
    << "<dt>best configuration</dt><dd>" << config_text(t.best_config) << " (from outer fold "
    << num(static_cast<double>(t.best_config_fold)) << ")</dd>"
    << "<dt>model</dt><dd>" << esc(t.model_path) << "</dd></dl></header>\n";
}

void section_performance(Writer& w, const ResultTree& t) {
  w << "<section id=\"section-performance\"><h2>A. Performance</h2>\n<div class=\"charts\">";
  const char* partitions[] = {"train", "validation", "test"};
  const std::string dummy_partition = t.summary.count("dummy_test") ? "dummy_test" : "dummy_train";
  for (const auto& m : t.metrics) {
    std::vector<std::pair<std::string, double>> bars;
    for (const char* p : partitions)
      if (auto v = summary_mean(t, p, m)) bars.emplace_back(p, *v);
    const auto dummy = summary_mean(t, dummy_partition, m);
    std::vector<double> vs;
    for (const auto& b : bars) vs.push_back(b.second);
    if (dummy) vs.push_back(*dummy);
    Range r;
    r.fit(vs, true);
    const double top = 30, height = 140;
    auto y = [&](double v) { return top + height * (1.0 - r.t(v)); };
    w << "<figure><svg width=\"280\" height=\"210\" viewBox=\"0 0 280 210\" role=\"img\">";
    for (std::size_t i = 0; i < bars.size(); ++i) {
      const double x = 30 + 70.0 * static_cast<double>(i);
      const double y0 = y(0.0), yv = y(bars[i].second);
      w << "<rect x=\"" << c2(x) << "\" y=\"" << c2(std::min(y0, yv)) << "\" width=\"50\" height=\""
        << c2(std::max(std::fabs(y0 - yv), 0.5)) << "\" fill=\"" << palette(i) << "\"/>"
        << "<text x=\"" << c2(x + 25) << "\" y=\"" << c2(std::min(y0, yv) - 4) << "\" text-anchor=\"middle\">"
        << format_number(bars[i].second) << "</text>"
        << "<text x=\"" << c2(x + 25) << "\" y=\"195\" text-anchor=\"middle\">" << bars[i].first << "</text>";
    }
    if (dummy) {
      w << "<line class=\"baseline\" x1=\"20\" x2=\"240\" y1=\"" << c2(y(*dummy)) << "\" y2=\"" << c2(y(*dummy))
        << "\"/><text x=\"242\" y=\"" << c2(y(*dummy) + 4) << "\" class=\"small\">dummy</text>";
    }
    w << "</svg><figcaption>" << esc(m);
    if (dummy) w << " (dummy " << num(*dummy) << ")";
    w << "</figcaption></figure>";
  }
  w << "</div>\n<table class=\"summary\"><thead><tr><th>partition</th>";
  for (const auto& m : t.metrics) w << "<th>" << esc(m) << "</th>";
  w << "</tr></thead><tbody>";
  for (const auto& [partition, metrics] : t.summary) {
    w << "<tr><td>" << esc(partition) << "</td>";
    for (const auto& m : t.metrics) {
      auto it = metrics.find(m);
      w << "<td>";
      if (it != metrics.end()) w << num(it->second.mean) << " &plusmn; " << num(it->second.std);
      w << "</td>";
    }
    w << "</tr>";
  }
  w << "</tbody></table>\n";
  if (!t.comparison_switch.empty()) {
    w << "<h3>Best configuration per estimator (" << esc(t.comparison_switch) << ")</h3>"
      << "<table class=\"estimators\"><thead><tr><th>estimator</th><th>element</th>";
    for (const auto& m : t.metrics) w << "<th>" << esc(m) << "</th>";
    w << "<th>folds used</th><th>omitted folds</th></tr></thead><tbody>";
    for (const auto& row : t.estimator_comparison) {
      w << "<tr><td>" << esc(row.child) << "</td><td>" << esc(row.keyword) << "</td>";
      for (const auto& m : t.metrics) {
        auto it = row.mean_metrics.find(m);
        w << "<td>" << (it == row.mean_metrics.end() ? std::string("n/a") : num(it->second)) << "</td>";
      }
      w << "<td>" << num(static_cast<double>(row.folds_used)) << "</td><td>";
      for (std::size_t i = 0; i < row.omitted_folds.size(); ++i)
        w << (i ? ", " : "") << num(static_cast<double>(row.omitted_folds[i]));
      w << "</td></tr>";
    }
    w << "</tbody></table>\n";
  }
  w << "</section>\n";
}

void confusion_table(Writer& w, const ConfusionMatrix& c) {
  std::size_t peak = 1;
  for (const auto& row : c.counts)
    for (auto v : row) peak = std::max(peak, v);
  w << "<table class=\"confusion\"><thead><tr><th>true \\ predicted</th>";
  for (double l : c.labels) w << "<th>" << num(l) << "</th>";
  w << "</tr></thead><tbody>";
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    w << "<tr><th>" << num(c.labels[i]) << "</th>";
    for (std::size_t j = 0; j < c.labels.size(); ++j) {
      const double share = static_cast<double>(c.counts[i][j]) / static_cast<double>(peak);
      char bg[64];
      std::snprintf(bg, sizeof bg, "rgba(68,119,170,%.3f)", 0.08 + 0.7 * share);
      w << "<td style=\"background:" << bg << "\">" << num(static_cast<double>(c.counts[i][j])) << "</td>";
    }
    w << "</tr>";
  }
  w << "</tbody></table>";
}

void section_confusion(Writer& w, const ResultTree& t) {
  w << "<section id=\"section-confusion\"><h2>B. Confusion matrix</h2>\n"
    << "<p>Counts summed over the fold-best models of all outer folds.</p>";
  if (t.confusion) confusion_table(w, *t.confusion);
  for (const auto& f : t.outer_folds) {
    if (!f.confusion) continue;
    w << "<details><summary>outer fold " << num(static_cast<double>(f.fold_id)) << " (" << esc(f.evaluation_source)
      << ")</summary>";
    confusion_table(w, *f.confusion);
    w << "</details>";
  }
  w << "</section>\n";
}

void section_scatter(Writer& w, const ResultTree& t) {
  w << "<section id=\"section-scatter\"><h2>B. True vs predicted</h2>\n";
  std::vector<double> all;
  for (const auto& f : t.outer_folds)
    for (const auto& p : f.predictions) {
      all.push_back(p[0]);
      all.push_back(p[1]);
    }
  Range r;
  r.fit(all, false);
  const double x0 = 60, y0 = 320, size = 280;
  auto px = [&](double v) { return x0 + size * r.t(v); };
  auto py = [&](double v) { return y0 - size * r.t(v); };
  w << "<svg width=\"380\" height=\"370\" viewBox=\"0 0 380 370\" role=\"img\">"
    << "<rect x=\"60\" y=\"40\" width=\"280\" height=\"280\" class=\"frame\"/>"
    << "<line class=\"diagonal\" x1=\"60\" y1=\"320\" x2=\"340\" y2=\"40\"/>";
  for (std::size_t i = 0; i < t.outer_folds.size(); ++i)
    for (const auto& p : t.outer_folds[i].predictions)
      w << "<circle cx=\"" << c2(px(p[0])) << "\" cy=\"" << c2(py(p[1])) << "\" r=\"2.5\" fill=\"" << palette(i)
        << "\" fill-opacity=\"0.7\"/>";
  if (!all.empty()) {
    w << "<text x=\"60\" y=\"338\" text-anchor=\"middle\">" << format_number(r.lo) << "</text>"
      << "<text x=\"340\" y=\"338\" text-anchor=\"middle\">" << format_number(r.hi) << "</text>"
      << "<text x=\"54\" y=\"324\" text-anchor=\"end\">" << format_number(r.lo) << "</text>"
      << "<text x=\"54\" y=\"44\" text-anchor=\"end\">" << format_number(r.hi) << "</text>";
  }
  w << "<text x=\"200\" y=\"360\" text-anchor=\"middle\">true</text>"
    << "<text x=\"16\" y=\"180\" transform=\"rotate(-90 16 180)\" text-anchor=\"middle\">predicted</text></svg>";
  w << "<p>Points per outer fold:";
  for (std::size_t i = 0; i < t.outer_folds.size(); ++i)
    w << " <span style=\"color:" << palette(i) << "\">&#9679;</span> fold "
      << num(static_cast<double>(t.outer_folds[i].fold_id)) << " (" << esc(t.outer_folds[i].evaluation_source) << ")";
  w << "</p></section>\n";
}

void section_progress(Writer& w, const ResultTree& t) {
  w << "<section id=\"section-progress\"><h2>C. Optimization progress</h2>\n"
    << "<p>Best-so-far mean validation " << esc(t.best_config_metric) << " after each tested configuration.</p>";
  std::vector<double> vs;
  std::size_t longest = 0;
  for (const auto& f : t.outer_folds) {
    longest = std::max(longest, f.progress.size());
    for (const auto& p : f.progress)
      if (p) vs.push_back(*p);
  }
  Range r;
  r.fit(vs, false);
  const double x0 = 70, y0 = 250, width = 560, height = 200;
  auto px = [&](std::size_t i) {
    return x0 + (longest > 1 ? width * static_cast<double>(i) / static_cast<double>(longest - 1) : width / 2);
  };
  auto py = [&](double v) { return y0 - height * r.t(v); };
  w << "<svg width=\"680\" height=\"290\" viewBox=\"0 0 680 290\" role=\"img\">"
    << "<rect x=\"70\" y=\"50\" width=\"560\" height=\"200\" class=\"frame\"/>";
  for (std::size_t i = 0; i < t.outer_folds.size(); ++i) {
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        w << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << palette(i) << "\" points=\"" << points << "\"/>";
      points.clear();
    };
    const auto& prog = t.outer_folds[i].progress;
    for (std::size_t k = 0; k < prog.size(); ++k) {
      if (!prog[k]) {
        flush();
        continue;
      }
      points += (points.empty() ? "" : " ") + c2(px(k)) + "," + c2(py(*prog[k]));
    }
    flush();
  }
  if (!vs.empty()) {
    w << "<text x=\"64\" y=\"254\" text-anchor=\"end\">" << format_number(r.lo) << "</text>"
      << "<text x=\"64\" y=\"54\" text-anchor=\"end\">" << format_number(r.hi) << "</text>";
  }
  if (longest > 0) {
    w << "<text x=\"" << c2(px(0)) << "\" y=\"268\" text-anchor=\"middle\">0</text>";
    if (longest > 1)
      w << "<text x=\"" << c2(px(longest - 1)) << "\" y=\"268\" text-anchor=\"middle\">"
        << format_number(static_cast<double>(longest - 1)) << "</text>";
  }
  w << "<text x=\"350\" y=\"284\" text-anchor=\"middle\">configuration index</text></svg><p>";
  for (std::size_t i = 0; i < t.outer_folds.size(); ++i)
    w << "<span style=\"color:" << palette(i) << "\">&#9632;</span> fold "
      << num(static_cast<double>(t.outer_folds[i].fold_id)) << " ";
  w << "</p></section>\n";
}

void pipeline_node(Writer& w, const Json& node, const Config& best) {
  const std::string name = node.value("name", "");
  const std::string kind = node.value("kind", "element");
  w << "<li><b>" << esc(name) << "</b> <span class=\"kind\">" << esc(kind) << "</span>";
  if (kind == "element") {
    w << " " << esc(node.value("keyword", ""));
    if (auto it = best.find(name + "__disabled"); it != best.end() && std::get_if<bool>(&it->second) &&
                                                   std::get<bool>(it->second))
      w << " <em>disabled in the best configuration</em>";
    const Json& fixed = node.value("fixed_params", Json::object());
    if (!fixed.empty()) {
      Config fc = config_from_json(fixed, "fixed_params");
      w << "<div class=\"fixed\">fixed: " << config_text(fc) << "</div>";
    }
    const Json& hps = node.value("hyperparameters", Json::object());
    if (!hps.empty()) {
      w << "<ul class=\"hp\">";
      for (auto it = hps.begin(); it != hps.end(); ++it) {
        w << "<li>" << esc(it.key()) << ": ";
        auto b = best.find(name + "__" + it.key());
        w << (b == best.end() ? std::string("not set by the best configuration") : "<b>" + value_text(b->second) + "</b>")
          << "</li>";
      }
      w << "</ul>";
    }
  } else if (kind == "callback") {
    w << " " << esc(node.value("delegate", ""));
  }
  if (node.contains("children")) {
    const Json& children = node["children"];
    if (kind == "switch") {
      auto b = best.find(name + "__current_element");
      if (b != best.end()) {
        const auto idx = static_cast<std::size_t>(as_int(b->second, name));
        if (idx < children.size()) w << " &rarr; <b>" << esc(children[idx].value("name", "")) << "</b>";
      }
    }
    w << "<ul>";
    for (const auto& c : children) pipeline_node(w, c, best);
    w << "</ul>";
  }
  w << "</li>";
}

void section_pipeline(Writer& w, const ResultTree& t) {
  w << "<section id=\"section-pipeline\"><h2>D. Pipeline</h2>\n"
    << "<p>Elements in order, with the value each hyperparameter takes in the best configuration.</p><ol class=\"pipeline\">";
  for (const auto& n : t.pipeline) pipeline_node(w, n, t.best_config);
  w << "</ol></section>\n";
}

void section_parallel(Writer& w, const ResultTree& t) {
  w << "<section id=\"section-parallel\"><h2>E. Hyperparameter exploration</h2>\n";
  struct Line {
    const Config* config;
    double value;
  };
  std::vector<Line> lines;
  std::set<std::string> keys;
  for (const auto& f : t.outer_folds)
    for (const auto& c : f.tested_configs) {
      if (c.status != ConfigStatus::completed) continue;
      lines.push_back({&c.config, c.mean_validation_metrics.at(t.best_config_metric)});
      for (const auto& [k, v] : c.config) keys.insert(k);
    }
  if (lines.empty() || keys.empty()) {
    w << "<p>No completed configuration with hyperparameters to show.</p></section>\n";
    return;
  }

  struct Axis {
    std::string key;
    bool numeric = true;
    Range range;
    std::vector<std::string> categories;  // display text, for categorical axes
    bool has_missing = false;
  };
  std::vector<Axis> axes;
  for (const auto& k : keys) {
    Axis a;
    a.key = k;
    std::vector<double> vs;
    std::set<std::string> cats;
    for (const auto& l : lines) {
      auto it = l.config->find(k);
      if (it == l.config->end()) {
        a.has_missing = true;
        continue;
      }
      if (is_numeric(it->second))
        vs.push_back(as_double(it->second, k));
      else
        a.numeric = false;
      cats.insert(label_text(it->second));
    }
    if (a.numeric)
      a.range.fit(vs, false);
    else
      a.categories.assign(cats.begin(), cats.end());
    axes.push_back(std::move(a));
  }
  std::vector<double> perf;
  for (const auto& l : lines) perf.push_back(l.value);
  Range pr;
  pr.fit(perf, false);
  const bool gib = greater_is_better(t.best_config_metric);

  const double top = 60, height = 220, spacing = 140, left = 70;
  const double width = left * 2 + spacing * static_cast<double>(axes.size());
  auto ax = [&](std::size_t i) { return left + spacing * static_cast<double>(i); };
  auto ypos = [&](const Axis& a, const Config& c) {
    auto it = c.find(a.key);
    if (it == c.end()) return top + height + 24;  // "not set" slot below the axis
    double f;
    if (a.numeric) {
      f = a.range.t(as_double(it->second, a.key));
    } else {
      const auto pos = std::find(a.categories.begin(), a.categories.end(), label_text(it->second)) - a.categories.begin();
      f = a.categories.size() > 1 ? static_cast<double>(pos) / static_cast<double>(a.categories.size() - 1) : 0.5;
    }
    return top + height * (1.0 - f);
  };

  w << "<svg width=\"" << c2(width) << "\" height=\"340\" viewBox=\"0 0 " << c2(width) << " 340\" role=\"img\">";
  // Worst lines first so the best end up on top.
  std::vector<std::size_t> order(lines.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gib ? lines[a].value < lines[b].value : lines[a].value > lines[b].value;
  });
  for (std::size_t idx : order) {
    const auto& l = lines[idx];
    std::string points;
    for (std::size_t i = 0; i < axes.size(); ++i) points += c2(ax(i)) + "," + c2(ypos(axes[i], *l.config)) + " ";
    const double q = pr.t(l.value);
    points += c2(ax(axes.size())) + "," + c2(top + height * (1.0 - q));
    w << "<polyline fill=\"none\" stroke-opacity=\"0.55\" stroke=\"" << perf_color(gib ? q : 1.0 - q)
      << "\" points=\"" << points << "\"/>";
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& a = axes[i];
    const double x = ax(i);
    w << "<line class=\"axis\" x1=\"" << c2(x) << "\" x2=\"" << c2(x) << "\" y1=\"" << c2(top) << "\" y2=\""
      << c2(top + height) << "\"/><text x=\"" << c2(x) << "\" y=\"" << c2(top - 28)
      << "\" text-anchor=\"middle\" class=\"axis-label\">" << esc(a.key) << "</text>";
    if (a.numeric) {
      w << "<text x=\"" << c2(x + 4) << "\" y=\"" << c2(top - 6) << "\" class=\"small\">" << format_number(a.range.hi)
        << "</text><text x=\"" << c2(x + 4) << "\" y=\"" << c2(top + height + 12) << "\" class=\"small\">"
        << format_number(a.range.lo) << "</text>";
    } else {
      for (std::size_t k = 0; k < a.categories.size(); ++k) {
        const double f = a.categories.size() > 1
                             ? static_cast<double>(k) / static_cast<double>(a.categories.size() - 1)
                             : 0.5;
        w << "<text x=\"" << c2(x + 4) << "\" y=\"" << c2(top + height * (1.0 - f) - 3) << "\" class=\"small\">"
          << a.categories[k] << "</text>";
      }
    }
    if (a.has_missing)
      w << "<text x=\"" << c2(x + 4) << "\" y=\"" << c2(top + height + 28) << "\" class=\"small\">not set</text>";
  }
  const double xm = ax(axes.size());
  w << "<line class=\"axis\" x1=\"" << c2(xm) << "\" x2=\"" << c2(xm) << "\" y1=\"" << c2(top) << "\" y2=\""
    << c2(top + height) << "\"/><text x=\"" << c2(xm) << "\" y=\"" << c2(top - 28)
    << "\" text-anchor=\"middle\" class=\"axis-label\">" << esc(t.best_config_metric) << "</text>"
    << "<text x=\"" << c2(xm + 4) << "\" y=\"" << c2(top - 6) << "\" class=\"small\">" << format_number(pr.hi)
    << "</text><text x=\"" << c2(xm + 4) << "\" y=\"" << c2(top + height + 12) << "\" class=\"small\">"
    << format_number(pr.lo) << "</text></svg>"
    << "<p>One line per completed configuration of every outer fold, coloured from worst (red) to best (green) mean "
       "validation "
    << esc(t.best_config_metric) << ".</p></section>\n";
}

void section_configs(Writer& w, const ResultTree& t) {
  struct Row {
    const FoldResult* fold;
    const ConfigResult* config;
  };
  std::vector<Row> rows;
  for (const auto& f : t.outer_folds)
    for (const auto& c : f.tested_configs) rows.push_back({&f, &c});
  const std::string& metric = t.best_config_metric;
  const bool gib = greater_is_better(metric);
  auto rank = [](const ConfigResult& c) { return c.status == ConfigStatus::completed ? 0 : c.status == ConfigStatus::pruned ? 1 : 2; };
  auto value = [&](const ConfigResult& c) {
    auto it = c.mean_validation_metrics.find(metric);
    return it == c.mean_validation_metrics.end() ? std::nan("") : it->second;
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    if (rank(*a.config) != rank(*b.config)) return rank(*a.config) < rank(*b.config);
    const double va = value(*a.config), vb = value(*b.config);
    if (std::isnan(va) != std::isnan(vb)) return std::isnan(vb);
    if (!std::isnan(va) && va != vb) return gib ? va > vb : va < vb;
    return false;
  });

  w << "<section id=\"section-configs\"><h2>F. Tested configurations</h2>\n"
    << "<p>Sorted by mean validation " << esc(metric)
    << " (best first; pruned and failed configurations last). Click a column header to re-sort.</p>"
    << "<table id=\"config-table\" class=\"configs\"><thead><tr><th>outer fold</th><th>config</th><th>status</th>"
       "<th>configuration</th>";
  for (const auto& m : t.metrics) w << "<th>" << esc(m) << "</th>";
  w << "<th>" << esc(metric) << " std</th><th>inner folds</th></tr></thead><tbody>";
  for (const auto& r : rows) {
    const auto& c = *r.config;
    const bool best = r.fold->best_config_index && &r.fold->tested_configs[*r.fold->best_config_index] == &c;
    w << "<tr" << (best ? " class=\"best\"" : "") << "><td>" << num(static_cast<double>(r.fold->fold_id))
      << "</td><td>" << num(static_cast<double>(c.config_index)) << "</td><td>" << to_string(c.status)
      << (c.error.empty() ? "" : ": " + esc(c.error)) << "</td><td>" << config_text(c.config) << "</td>";
    for (const auto& m : t.metrics) {
      auto it = c.mean_validation_metrics.find(m);
      w << "<td>" << (it == c.mean_validation_metrics.end() ? std::string("n/a") : num(it->second)) << "</td>";
    }
    auto sd = c.std_validation_metrics.find(metric);
    w << "<td>" << (sd == c.std_validation_metrics.end() ? std::string("n/a") : num(sd->second)) << "</td><td>"
      << num(static_cast<double>(c.inner_folds.size())) << "</td></tr>";
  }
  w << "</tbody></table></section>\n";
}

const char* kStyle = R"(body{font-family:system-ui,sans-serif;margin:2em auto;max-width:1100px;color:#222}
h1{margin-bottom:.2em}section{margin-top:2.5em}dl.meta{display:grid;grid-template-columns:max-content auto;gap:.2em 1em}
dl.meta dt{font-weight:600}table{border-collapse:collapse;margin:.8em 0}th,td{border:1px solid #ccc;padding:.25em .6em;text-align:left}
th{background:#f3f3f3;cursor:pointer}tr.best td{background:#eaf5ea}.charts{display:flex;flex-wrap:wrap;gap:1em}
figure{margin:0}figcaption{text-align:center}svg text{font-size:11px}.small{font-size:10px}.frame{fill:none;stroke:#999}
.baseline{stroke:#333;stroke-dasharray:5 3}.diagonal{stroke:#999;stroke-dasharray:4 3}.axis{stroke:#555}
.axis-label{font-weight:600}.kind{color:#777;font-size:.85em}.fixed{color:#555;font-size:.9em}
.configs td{font-size:.9em}section{overflow-x:auto})";

const char* kScript = R"(document.querySelectorAll('#config-table th').forEach(function(th,col){
th.addEventListener('click',function(){var body=th.closest('table').tBodies[0];
var rows=Array.prototype.slice.call(body.rows);var dir=th.dataset.dir==='asc'?-1:1;th.dataset.dir=dir>0?'asc':'desc';
rows.sort(function(a,b){var x=a.cells[col].textContent,y=b.cells[col].textContent;var p=parseFloat(x),q=parseFloat(y);
if(!isNaN(p)&&!isNaN(q))return dir*(p-q);return dir*x.localeCompare(y);});rows.forEach(function(r){body.appendChild(r);});});});)";

}  // namespace

std::string emit_html_report(const ResultTree& t) {
  if (t.outer_folds.empty()) throw ValidationError("incomplete result tree: no outer folds");
  if (t.metrics.empty()) throw ValidationError("incomplete result tree: no metrics");
  for (const auto& f : t.outer_folds)
    if (!f.best_config_index || *f.best_config_index >= f.tested_configs.size())
      throw ValidationError("incomplete result tree: outer fold " + std::to_string(f.fold_id) + " has no best config");

  Writer w;
  w << "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>" << esc(t.name)
    << "</title>\n<style>" << kStyle << "</style></head>\n<body>\n";
  header(w, t);
  section_performance(w, t);
  if (t.target_kind == TargetKind::classification)
    section_confusion(w, t);
  else
    section_scatter(w, t);
  section_progress(w, t);
  section_pipeline(w, t);
  section_parallel(w, t);
  section_configs(w, t);

  std::string data = canonical_dump(to_json(t));
  for (std::size_t pos = 0; (pos = data.find("</", pos)) != std::string::npos; pos += 3) data.replace(pos, 2, "<\\/");
  w << "<script type=\"application/json\" id=\"hyperpipe-results\">\n" << data << "</script>\n<script>" << kScript
    << "</script>\n</body></html>\n";
  return w.take();
}

void write_html_report(const ResultTree& tree, const std::filesystem::path& path) {
  write_file_atomic(path, emit_html_report(tree));
}

}  // namespace hyperpipe
