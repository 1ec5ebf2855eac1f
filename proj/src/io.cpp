#include "mousedyn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "mousedyn/errors.hpp"

namespace mousedyn {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

ActionKind kind_from_string(const std::string& s) {
  if (s == "MM") return ActionKind::MM;
  if (s == "PC") return ActionKind::PC;
  if (s == "DD") return ActionKind::DD;
  throw Error("unknown action kind '" + s + "'");
}

}  // namespace

void write_features_csv(const std::filesystem::path& path, std::span<const ActionFeatures> rows) {
  std::ofstream out = open_out(path);
  const auto& names = feature_names();
  for (int f = 0; f < kFeatureCount; ++f) {
    out << names[static_cast<std::size_t>(f)] << ',';
  }
  out << "user_id,session_id,genuine\n";
  for (const ActionFeatures& r : rows) {
    for (int f = 0; f < kFeatureCount; ++f) {
      if (f == kTypeOfAction) {
        out << to_string(r.kind());
      } else if (f == kDirection || f == kNumPoints || f == kNumCriticalPoints) {
        out << static_cast<long long>(r.values[static_cast<std::size_t>(f)]);
      } else {
        out << fmt_double(r.values[static_cast<std::size_t>(f)]);
      }
      out << ',';
    }
    out << r.user_id << ',' << r.session_id << ',' << (r.genuine ? 1 : 0) << '\n';
  }
}

std::vector<ActionFeatures> read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty features file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv(line);
  const auto& names = feature_names();
  if (header.size() != static_cast<std::size_t>(kFeatureCount) + 3) {
    throw Error(path.string() + ": expected " + std::to_string(kFeatureCount + 3) + " columns");
  }
  for (int f = 0; f < kFeatureCount; ++f) {
    if (header[static_cast<std::size_t>(f)] != names[static_cast<std::size_t>(f)]) {
      throw SchemaMismatch(path.string() + " column " + std::to_string(f) + " is '" +
                           header[static_cast<std::size_t>(f)] + "', expected '" +
                           names[static_cast<std::size_t>(f)] + "'");
    }
  }

  std::vector<ActionFeatures> rows;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw MalformedLine(line_number, "wrong column count in " + path.string());
    }
    ActionFeatures r;
    for (int f = 0; f < kFeatureCount; ++f) {
      const std::string& cell = cells[static_cast<std::size_t>(f)];
      if (f == kTypeOfAction) {
        r.values[static_cast<std::size_t>(f)] = static_cast<double>(static_cast<int>(kind_from_string(cell)));
        continue;
      }
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        throw MalformedLine(line_number, "bad number '" + cell + "' in " + path.string());
      }
      r.values[static_cast<std::size_t>(f)] = v;
    }
    // Categorical codes index bit masks downstream; reject out-of-range input.
    const double dir = r.values[kDirection];
    if (dir != std::floor(dir) || dir < 1.0 || dir > 8.0) {
      throw MalformedLine(line_number, "direction_of_movement must be 1..8 in " + path.string());
    }
    {
      const std::string& cell = cells[kFeatureCount];
      int uid = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), uid);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        throw MalformedLine(line_number, "bad user_id '" + cell + "' in " + path.string());
      }
      r.user_id = uid;
    }
    r.session_id = cells[kFeatureCount + 1];
    r.genuine = cells[kFeatureCount + 2] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::map<int, std::vector<ActionFeatures>> group_by_user(std::span<const ActionFeatures> rows) {
  std::map<int, std::vector<ActionFeatures>> out;
  for (const ActionFeatures& r : rows) out[r.user_id].push_back(r);
  return out;
}

std::vector<TestSessionFeatures> group_by_session(std::span<const ActionFeatures> rows) {
  std::vector<TestSessionFeatures> out;
  std::map<std::pair<int, std::string>, std::size_t> index;
  for (const ActionFeatures& r : rows) {
    const auto key = std::make_pair(r.user_id, r.session_id);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({r.user_id, r.session_id, r.genuine, {}});
    }
    out[it->second].actions.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const TestSessionFeatures& a, const TestSessionFeatures& b) {
    if (a.claimed_user != b.claimed_user) return a.claimed_user < b.claimed_user;
    return a.session_id < b.session_id;
  });
  return out;
}

void write_actions_csv(const std::filesystem::path& path, std::span<const MouseAction> actions) {
  std::ofstream out = open_out(path);
  out << "user_id,session_id,kind,n_points,start_t,end_t\n";
  for (const MouseAction& a : actions) {
    out << a.user_id << ',' << a.session_id << ',' << to_string(a.kind) << ','
        << a.points.size() << ',' << fmt_double(a.points.front().t) << ','
        << fmt_double(a.points.back().t) << '\n';
  }
}

namespace {
void write_user_row(std::ofstream& out, const std::string& label, const EvalReport& r) {
  out << label << ',' << fmt_metric(r.acc) << ',' << fmt_metric(r.auc) << ','
      << fmt_metric(r.eer) << ',' << fmt_metric(r.fnr) << ',' << fmt_metric(r.fpr) << ','
      << r.n_positive << ',' << r.n_negative << '\n';
}
}  // namespace

void write_user_table_csv(const std::filesystem::path& path, const PerUserTable& table) {
  std::ofstream out = open_out(path);
  out << "user,acc,auc,eer,fnr,fpr,n_positive,n_negative\n";
  for (const EvalReport& r : table.per_user) {
    write_user_row(out, std::to_string(r.user_id), r);
  }
  write_user_row(out, "Avg", table.mean);
  write_user_row(out, "Std", table.stddev);
}

void write_set_curve_csv(const std::filesystem::path& path, std::span<const SetCurveRow> rows) {
  std::ofstream out = open_out(path);
  out << "k,auc,eer\n";
  for (const SetCurveRow& r : rows) {
    out << r.k << ',' << fmt_metric(r.auc) << ',' << fmt_metric(r.eer) << '\n';
  }
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc) {
  std::ofstream out = open_out(path);
  out << "threshold,fpr,tpr\n";
  for (const RocPoint& p : roc.points) {
    out << fmt_double(p.threshold) << ',' << fmt_double(p.fpr) << ',' << fmt_double(p.tpr) << '\n';
  }
}

void write_ranking_csv(const std::filesystem::path& path,
                       std::span<const std::pair<std::string, double>> ranking) {
  std::ofstream out = open_out(path);
  out << "rank,feature,gain_ratio\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5f", ranking[i].second);
    out << i + 1 << ',' << ranking[i].first << ',' << buf << '\n';
  }
}

void write_fold_assignments_csv(const std::filesystem::path& path,
                                const std::map<int, CvScores>& cv) {
  std::ofstream out = open_out(path);
  out << "user,fold,row,label\n";
  for (const auto& [user, scores] : cv) {
    for (std::size_t f = 0; f < scores.pos_rows_by_fold.size(); ++f) {
      for (std::size_t row : scores.pos_rows_by_fold[f]) {
        out << user << ',' << f << ',' << row << ",1\n";
      }
      for (std::size_t row : scores.neg_rows_by_fold[f]) {
        out << user << ',' << f << ',' << row << ",0\n";
      }
    }
  }
}

std::string report_to_json(const EvalReport& r, const ReportStamp* stamp) {
  nlohmann::json j;
  if (stamp) {
    j["seed"] = stamp->seed;
    j["config_sha256"] = stamp->config_sha256;
  }
  j["scope"] = r.scope == EvalReport::Scope::PerUser ? "per_user" : "global";
  if (r.scope == EvalReport::Scope::PerUser) j["user_id"] = r.user_id;
  j["scenario"] = r.scenario == Scenario::A ? "A" : "B";
  switch (r.protocol) {
    case Protocol::Action: j["protocol"] = "action"; break;
    case Protocol::ActionSet:
      j["protocol"] = "set";
      j["set_size"] = r.set_size;
      break;
    case Protocol::Session: j["protocol"] = "session"; break;
  }
  j["acc"] = r.acc;
  j["auc"] = r.auc;
  j["eer"] = r.eer;
  j["fnr"] = r.fnr;
  j["fpr"] = r.fpr;
  j["n_positive"] = r.n_positive;
  j["n_negative"] = r.n_negative;
  return j.dump(2);
}

void write_report_json(const std::filesystem::path& path, const EvalReport& report,
                       const ReportStamp* stamp) {
  std::ofstream out = open_out(path);
  out << report_to_json(report, stamp) << '\n';
}

std::string hash_tree(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_regular_file(root)) {
    files.push_back(root);
  } else if (std::filesystem::is_directory(root)) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
  } else {
    throw Error("cannot hash missing path " + root.string());
  }
  std::sort(files.begin(), files.end());

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  for (const auto& f : files) {
    const std::string rel = std::filesystem::relative(f, root).generic_string();
    EVP_DigestUpdate(ctx, rel.data(), rel.size());
    EVP_DigestUpdate(ctx, "\0", 1);
    std::ifstream in(f, std::ios::binary);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      const std::streamsize got = in.gcount();
      if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace mousedyn
