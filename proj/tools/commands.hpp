#pragma once

// Command implementations behind the sddmon executable. Each returns the
// process exit code: 0 success, 1 error, 2 power analysis without n_star.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sddmon/sddmon.hpp"

namespace sddmon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNoNStar = 2;

// --- argument helpers -------------------------------------------------------

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    auto t = csv::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

/// "10:200:10" (inclusive range) or "10,20,50".
inline std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  auto to_size = [&](const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != s.size() || v <= 0)
      throw Error(ErrorCode::kParseError, "--sizes: bad size '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (text.find(':') != std::string::npos) {
    const auto parts = split_list(text, ':');
    if (parts.size() != 3) throw Error(ErrorCode::kParseError, "--sizes: expected start:stop:step");
    const auto start = to_size(parts[0]), stop = to_size(parts[1]), step = to_size(parts[2]);
    for (auto s = start; s <= stop; s += step) out.push_back(s);
  } else {
    for (const auto& p : split_list(text)) out.push_back(to_size(p));
  }
  return out;
}

/// "0:1:0.05" (inclusive, rounded to the step grid) or "0,0.5,1".
inline std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    std::istringstream in(s);
    double v = 0.0;
    if (!(in >> v) || !in.eof()) throw Error(ErrorCode::kParseError, "bad threshold '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    const auto parts = split_list(text, ':');
    if (parts.size() != 3) throw Error(ErrorCode::kParseError, "thresholds: expected start:stop:step");
    const double a = to_double(parts[0]), b = to_double(parts[1]), step = to_double(parts[2]);
    if (!(step > 0.0)) throw Error(ErrorCode::kParseError, "thresholds: step must be > 0");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
  } else {
    for (const auto& p : split_list(text)) out.push_back(to_double(p));
  }
  return out;
}

inline std::vector<DistanceKind> parse_kinds(const std::string& text) {
  std::vector<DistanceKind> out;
  for (const auto& tag : split_list(text)) {
    const auto k = kind_from_tag(tag);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw Error(ErrorCode::kParseError, "no distance kinds given");
  return out;
}

/// "log3" for every kind, or "ES=sigmoid3,KS=poly2"; unlisted kinds keep
/// their default form.
inline std::map<DistanceKind, FitForm> parse_forms(const std::string& text,
                                                   const std::vector<DistanceKind>& kinds) {
  std::map<DistanceKind, FitForm> out;
  for (auto k : kinds) out[k] = default_form(k);
  if (text.empty()) return out;
  for (const auto& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      const auto f = form_from_tag(item);
      for (auto& [k, form] : out) form = f;
    } else {
      out[kind_from_tag(item.substr(0, eq))] = form_from_tag(item.substr(eq + 1));
    }
  }
  return out;
}

inline std::string opt_json_number(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// --- power ------------------------------------------------------------------

struct PowerArgs {
  std::string train_csv;
  std::string ood_csv;
  double alpha = 0.1;
  std::size_t trials = 20;
  std::string sizes = "10:200:10";
  std::string kind = "KS";
  std::uint64_t seed = 0;
  double target_variance = 0.0;  // 0: no PCA
  std::string out_json;          // empty: stdout
  std::string out_csv;
};

inline nlohmann::json to_json(const PowerCurve& c) {
  nlohmann::json j;
  j["kind"] = to_tag(c.kind);
  j["alpha"] = c.alpha;
  j["trials"] = c.trials;
  j["trial_level"] = c.trial_level;
  j["sizes"] = c.sizes;
  j["power"] = c.power;
  j["n_star"] = c.n_star ? nlohmann::json(*c.n_star) : nlohmann::json(nullptr);
  return j;
}

inline int cmd_power(const PowerArgs& a, std::ostream& out) {
  auto train = read_feature_csv(a.train_csv);
  auto ood = read_feature_csv(a.ood_csv);
  if (a.target_variance > 0.0) {
    const auto pca = fit_pca(train, a.target_variance);
    train = pca_transform(pca, train);
    ood = pca_transform(pca, ood);
  }
  const auto curve = power_analysis(train, ood, train, parse_sizes(a.sizes),
                                    kind_from_tag(a.kind), a.alpha, a.trials, RngSeed{a.seed});
  std::ostringstream csv_text;
  csv_text << "size,power\n";
  for (std::size_t i = 0; i < curve.sizes.size(); ++i)
    csv_text << curve.sizes[i] << ',' << format_double(curve.power[i]) << '\n';
  const std::string json_text = to_json(curve).dump(2) + "\n";
  if (!a.out_csv.empty()) write_file_atomic(a.out_csv, csv_text.str());
  if (!a.out_json.empty())
    write_file_atomic(a.out_json, json_text);
  else
    out << json_text;
  return curve.n_star ? kExitOk : kExitNoNStar;
}

// --- calibrate --------------------------------------------------------------

struct CalibrateArgs {
  std::string cal_csv;
  std::string ref_csv;
  std::string out;
  std::size_t n = 50;
  std::size_t m = 20;
  std::size_t window = 0;  // 0: use n
  std::string kinds = "KS,CVM,AD,WS,DTS,ES";
  std::string forms;
  double target_variance = 0.85;
  bool standardize = false;
  bool with_replacement = false;
  bool ref_by_path = false;
  std::uint64_t seed = 0;
  std::string points_csv;
};

struct CalibrationOutcome {
  ScopeModel model;
  std::map<DistanceKind, std::vector<CalibrationPoint>> points;
  std::map<DistanceKind, double> spearman_rho;
};

/// The library-level calibration pipeline shared by the CLI and the tests:
/// PCA on the reference, calibration batches, SDD points and one fit per kind.
inline CalibrationOutcome calibrate(const FeatureMatrix& cal_raw, const FeatureMatrix& ref_raw,
                                    std::size_t n, std::size_t m,
                                    const std::map<DistanceKind, FitForm>& forms,
                                    double target_variance, RngSeed seed,
                                    bool standardize = false, bool with_replacement = false,
                                    const EsParams& es = {}) {
  if (cal_raw.cols() != ref_raw.cols())
    throw Error(ErrorCode::kDimensionMismatch, "calibration and reference feature counts differ");
  CalibrationOutcome outcome;
  auto& model = outcome.model;
  model.pca = fit_pca(ref_raw, target_variance, standardize);
  model.reference = pca_transform(model.pca, ref_raw);
  model.window = n;
  model.created_with_seed = seed;
  model.es = es;
  const auto cal = pca_transform(model.pca, cal_raw);
  const auto set = build_set(cal, n, m, seed, BuildSetOptions{with_replacement});
  const SortedColumns ref(model.reference);
  for (const auto& [kind, form] : forms) {
    auto pts = measure_calibration(set, ref, kind, es);
    std::vector<double> xs, ys;
    for (const auto& p : pts) {
      xs.push_back(p.sdd);
      ys.push_back(p.inaccuracy);
    }
    outcome.spearman_rho[kind] = spearman(xs, ys);
    model.scues[kind] = fit_scue(pts, kind, form);
    outcome.points[kind] = std::move(pts);
  }
  return outcome;
}

inline int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  const auto cal = read_feature_csv(a.cal_csv);
  const auto ref = read_feature_csv(a.ref_csv);
  const auto kinds = parse_kinds(a.kinds);
  auto outcome = calibrate(cal, ref, a.n, a.m, parse_forms(a.forms, kinds), a.target_variance,
                           RngSeed{a.seed}, a.standardize, a.with_replacement);
  auto& model = outcome.model;
  if (a.window) model.window = a.window;
  if (a.ref_by_path) {
    namespace fs = std::filesystem;
    const auto out_dir = fs::absolute(a.out).parent_path();
    model.reference_path = fs::relative(fs::absolute(a.ref_csv), out_dir).string();
    model.reference_sha256 = sha256_hex(read_file(a.ref_csv));
  }

  if (!a.points_csv.empty()) {
    std::ostringstream pts;
    pts << "kind,batch,sdd,inaccuracy\n";
    for (const auto& [kind, list] : outcome.points)
      for (std::size_t i = 0; i < list.size(); ++i)
        pts << to_tag(kind) << ',' << i << ',' << format_double(list[i].sdd) << ','
            << format_double(list[i].inaccuracy) << '\n';
    write_file_atomic(a.points_csv, pts.str());
  }
  save_scope_model(model, a.out);

  out << "kind,form,fit_rmse,fit_r2,spearman\n";
  for (const auto& [kind, s] : model.scues)
    out << to_tag(kind) << ',' << to_tag(s.form) << ',' << format_double(s.fit_rmse) << ','
        << format_double(s.fit_r2) << ',' << format_double(outcome.spearman_rho.at(kind)) << '\n';
  return kExitOk;
}

// --- monitor ----------------------------------------------------------------

struct MonitorArgs {
  std::string stream_csv;
  std::string model;
  double threshold = 0.5;
  std::size_t stride = 0;  // 0: window (tumbling)
  std::string aggregate = "per-kind";
  std::string kinds;  // empty: every kind in the model
  std::string out;    // empty: stdout
  std::string truth;  // per-sample CSV with a `correct` column
  std::string truth_out;
};

inline std::string report_lines(const UncertaintyReport& r, const MonitorConfig& cfg) {
  std::string s;
  for (const auto& k : r.per_kind) {
    nlohmann::ordered_json j;
    j["window_id"] = r.window_id;
    j["kind"] = to_tag(k.kind);
    j["sdd"] = k.sdd;
    j["uncertainty"] = k.uncertainty;
    j["decision"] = to_tag(k.uncertainty > cfg.threshold ? Decision::Reject : Decision::Accept);
    j["window_decision"] = to_tag(r.decision);
    j["first_index"] = r.first_index;
    j["last_index"] = r.last_index;
    s += j.dump();
    s += '\n';
  }
  return s;
}

inline std::vector<std::uint8_t> read_truth_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, path + ": missing header");
  const auto header = csv::split(line);
  const auto it = std::find(header.begin(), header.end(), "correct");
  if (it == header.end()) throw Error(ErrorCode::kParseError, path + ":1: no 'correct' column");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<std::uint8_t> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != header.size() || (cells[col] != "0" && cells[col] != "1"))
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(line_no) + ": bad row");
    out.push_back(cells[col] == "1");
  }
  return out;
}

inline int cmd_monitor(const MonitorArgs& a, std::ostream& out, std::ostream& log) {
  const auto model = load_scope_model(a.model);
  const auto stream = read_feature_csv(a.stream_csv);
  if (stream.cols() != model.pca.input_dim())
    throw Error(ErrorCode::kDimensionMismatch,
                a.stream_csv + ": stream has " + std::to_string(stream.cols()) +
                    " features, model expects " + std::to_string(model.pca.input_dim()));
  const auto projected = pca_transform(model.pca, stream);

  MonitorConfig cfg;
  cfg.window = model.window;
  cfg.stride = a.stride ? a.stride : model.window;
  cfg.threshold = a.threshold;
  cfg.rule = rule_from_tag(a.aggregate);
  if (a.kinds.empty()) {
    for (const auto& [k, s] : model.scues) cfg.kinds.push_back(k);
  } else {
    cfg.kinds = parse_kinds(a.kinds);
  }
  Monitor monitor(cfg, std::make_shared<const SortedColumns>(model.reference), model.scues,
                  model.es);

  std::optional<std::vector<std::uint8_t>> labels;
  if (!a.truth.empty())
    labels = read_truth_labels(a.truth);
  else if (stream.has_labels())
    labels = *stream.labels();
  if (labels && labels->size() != stream.rows())
    throw Error(ErrorCode::kDimensionMismatch, "truth has " + std::to_string(labels->size()) +
                                                   " labels for " +
                                                   std::to_string(stream.rows()) + " samples");

  std::string body;
  std::vector<ScoredReport> scored;
  std::map<DistanceKind, std::vector<ScoredReport>> per_kind;
  for (std::size_t r = 0; r < projected.rows(); ++r) {
    auto rep = monitor.push(projected.row(r));
    if (!rep) continue;
    const auto lines = report_lines(*rep, cfg);
    if (a.out.empty())
      out << lines << std::flush;
    else
      body += lines;
    if (labels) {
      const double inacc = window_inaccuracy(*labels, rep->first_index, rep->last_index);
      for (const auto& k : rep->per_kind) {
        UncertaintyReport single = *rep;
        single.per_kind = {k};
        single.decision = k.uncertainty > cfg.threshold ? Decision::Reject : Decision::Accept;
        per_kind[k.kind].push_back({single, inacc});
      }
      scored.push_back({std::move(*rep), inacc});
    }
  }
  if (!a.out.empty()) write_file_atomic(a.out, body);

  if (labels) {
    if (!a.truth_out.empty()) {
      std::ostringstream t;
      t << "window_id,inaccuracy\n";
      for (const auto& s : scored)
        t << s.report.window_id << ',' << format_double(s.true_inaccuracy) << '\n';
      write_file_atomic(a.truth_out, t.str());
    }
    auto emit = [&](std::string_view name, const ConfusionSummary& c) {
      log << "summary " << name << " rejected=" << c.rejected << " false_rejects=" << c.false_rejects
          << " missed=" << c.missed << " total=" << c.total << '\n';
    };
    for (const auto& [k, list] : per_kind) emit(to_tag(k), score_confusion(list, cfg.threshold));
    emit("window", score_confusion(scored, cfg.threshold));
  }
  return kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string reports;
  std::string truth;  // window_id,inaccuracy
  double threshold = 0.5;
  std::string sweep;  // output path for the threshold sweep; empty: no sweep
  std::string thresholds = "0:1:0.05";
  std::string out;  // empty: stdout
};

inline std::map<std::size_t, double> read_window_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, path + ": missing header");
  const auto header = csv::split(line);
  if (header.size() != 2 || header[0] != "window_id" || header[1] != "inaccuracy")
    throw Error(ErrorCode::kParseError, path + ":1: expected header 'window_id,inaccuracy'");
  std::map<std::size_t, double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 2)
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(line_no) + ": expected 2 cells");
    const double id = csv::parse_number(cells[0], path, line_no, 0);
    const double inacc = csv::parse_number(cells[1], path, line_no, 1);
    if (id < 0 || id != std::floor(id))
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(line_no) + ": bad window_id");
    if (!out.emplace(static_cast<std::size_t>(id), inacc).second)
      throw Error(ErrorCode::kParseError,
                  path + ":" + std::to_string(line_no) + ": duplicate window_id");
  }
  return out;
}

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto truth = read_window_truth(a.truth);
  std::ifstream in(a.reports);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + a.reports + "'");

  // kind -> window_id -> report
  std::map<DistanceKind, std::map<std::size_t, ScoredReport>> by_kind;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ScoredReport s;
      s.report.window_id = j.at("window_id").get<std::size_t>();
      s.report.first_index = j.at("first_index").get<std::size_t>();
      s.report.last_index = j.at("last_index").get<std::size_t>();
      const auto kind = kind_from_tag(j.at("kind").get<std::string>());
      s.report.per_kind = {{kind, j.at("sdd").get<double>(), j.at("uncertainty").get<double>()}};
      const auto d = j.at("decision").get<std::string>();
      if (d != "accept" && d != "reject")
        throw Error(ErrorCode::kParseError, "decision must be accept or reject");
      s.report.decision = d == "reject" ? Decision::Reject : Decision::Accept;
      by_kind[kind][s.report.window_id] = std::move(s);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, a.reports + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), a.reports + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::set<std::size_t> report_ids;
  for (const auto& [k, m] : by_kind)
    for (const auto& [id, r] : m) report_ids.insert(id);
  std::vector<std::string> problems;
  for (auto id : report_ids)
    if (!truth.count(id)) problems.push_back(std::to_string(id) + " (no truth)");
  for (const auto& [id, v] : truth)
    if (!report_ids.count(id)) problems.push_back(std::to_string(id) + " (no report)");
  if (!problems.empty()) {
    std::string msg = "windows do not align:";
    for (const auto& p : problems) msg += " " + p;
    throw Error(ErrorCode::kIdMismatch, msg);
  }

  std::ostringstream table;
  table << "kind,rejected,false_rejects,missed,total\n";
  std::ostringstream sweep;
  sweep << "kind,threshold,cutoff,mean_accuracy,rejected\n";
  const auto thresholds = parse_thresholds(a.thresholds);
  for (auto& [kind, m] : by_kind) {
    std::vector<ScoredReport> list;
    for (auto& [id, r] : m) {
      r.true_inaccuracy = truth.at(id);
      list.push_back(r);
    }
    const auto c = score_confusion(list, a.threshold);
    table << to_tag(kind) << ',' << c.rejected << ',' << c.false_rejects << ',' << c.missed << ','
          << c.total << '\n';
    if (!a.sweep.empty()) {
      for (const auto& row : threshold_sweep(list, thresholds))
        sweep << to_tag(kind) << ',' << format_double(row.threshold) << ','
              << opt_json_number(row.cutoff) << ',' << opt_json_number(row.mean_accuracy) << ','
              << row.rejected << '\n';
    }
  }
  if (!a.sweep.empty()) write_file_atomic(a.sweep, sweep.str());
  if (a.out.empty())
    out << table.str();
  else
    write_file_atomic(a.out, table.str());
  return kExitOk;
}

}  // namespace sddmon::cli
