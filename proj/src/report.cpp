#include "deeprepair/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "deeprepair/errors.hpp"
#include "deeprepair/harness.hpp"
#include "deeprepair/plot.hpp"

namespace deeprepair {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const std::string& canonical) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical);
  return os.str();
}

CrossRobustness cross_robustness(const std::vector<NamedModel>& models,
                                 const std::vector<NamedDataset>& testsets) {
  if (models.empty() || testsets.empty())
    throw ValidationError("cross_robustness: nothing to evaluate");
  CrossRobustness cross;
  for (const auto& m : models) cross.repaired_on.push_back(m.name);
  for (const auto& t : testsets) cross.eval_on.push_back(t.name);
  for (const auto& m : models) {
    if (!m.net) throw ValidationError("cross_robustness: null model");
    for (const auto& t : testsets) {
      if (!t.data) throw ValidationError("cross_robustness: null dataset");
      cross.accuracy.push_back(evaluate(*m.net, *t.data).accuracy);
    }
  }
  return cross;
}

AblationResult ablation_compare(const std::vector<ResultRow>& rows,
                                const std::string& reference_method,
                                const std::string& eval_on,
                                const std::string& split) {
  std::map<std::string, std::string> hashes;
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : rows) {
    auto it = hashes.find(r.method);
    if (it == hashes.end())
      hashes.emplace(r.method, r.config_hash);
    else if (it->second != r.config_hash)
      throw ValidationError("ablation: config drift within method " +
                            r.method);
    if (r.eval_on != eval_on || r.split != split) continue;
    auto& acc = sums[r.method];
    acc.first += r.accuracy;
    acc.second += 1;
  }
  auto ref = sums.find(reference_method);
  if (ref == sums.end() || ref->second.second == 0)
    throw ValidationError("ablation: reference method has no rows: " +
                          reference_method);
  const double ref_mean = ref->second.first / double(ref->second.second);
  AblationResult out;
  out.reference = reference_method;
  for (const auto& [method, acc] : sums) {
    if (method == reference_method) continue;
    const double mean = acc.first / double(acc.second);
    out.methods.push_back(method);
    out.accuracy.push_back(mean);
    out.delta_vs_reference.push_back(mean - ref_mean);
  }
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

constexpr const char* kResultsHeader =
    "model,method,repaired_on,eval_on,split,accuracy,seed,config_hash";

}  // namespace

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write results: " + path.string());
  out << kResultsHeader << "\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << csv_escape(r.model) << ',' << csv_escape(r.method) << ','
        << csv_escape(r.repaired_on) << ',' << csv_escape(r.eval_on) << ','
        << csv_escape(r.split) << ',' << r.accuracy << ',' << r.seed << ','
        << r.config_hash << "\n";
  }
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open results: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw LoadError("bad results header: " + path.string());
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 8) throw LoadError("bad results row: " + line);
    ResultRow r;
    r.model = f[0];
    r.method = f[1];
    r.repaired_on = f[2];
    r.eval_on = f[3];
    r.split = f[4];
    r.accuracy = std::stod(f[5]);
    r.seed = std::stoull(f[6]);
    r.config_hash = f[7];
    rows.push_back(r);
  }
  return rows;
}

void write_cross_matrix_csv(const std::filesystem::path& path,
                            const CrossRobustness& cross) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write matrix: " + path.string());
  out << "repaired_on";
  for (const auto& c : cross.eval_on) out << ',' << csv_escape(c);
  out << "\n" << std::setprecision(10);
  for (std::size_t r = 0; r < cross.repaired_on.size(); ++r) {
    out << csv_escape(cross.repaired_on[r]);
    for (std::size_t c = 0; c < cross.eval_on.size(); ++c)
      out << ',' << cross.at(r, c);
    out << "\n";
  }
}

void emit_report(const std::filesystem::path& out_dir,
                 const std::vector<ResultRow>& rows,
                 const CrossRobustness* cross) {
  std::filesystem::create_directories(out_dir / "plots");
  write_results_csv(out_dir / "results.csv", rows);

  // method accuracy per split, averaged over seeds
  std::vector<std::string> splits;
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    if (std::find(splits.begin(), splits.end(), r.split) == splits.end())
      splits.push_back(r.split);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
  }
  if (!splits.empty() && !methods.empty()) {
    std::vector<DataSeries> series;
    for (const auto& m : methods) {
      DataSeries s;
      s.name = m;
      for (const auto& sp : splits) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows)
          if (r.method == m && r.split == sp) {
            sum += r.accuracy;
            ++n;
          }
        s.values.push_back(n ? sum / double(n) : 0.0);
      }
      series.push_back(std::move(s));
    }
    plot_grouped_bars(out_dir / "plots" / "method_accuracy.png",
                      "ACCURACY BY METHOD AND SPLIT", splits, series);
  }

  if (cross) {
    write_cross_matrix_csv(out_dir / "cross_matrix.csv", *cross);
    if (cross->eval_on.size() >= 3) {
      std::vector<DataSeries> series;
      for (std::size_t r = 0; r < cross->repaired_on.size(); ++r) {
        DataSeries s;
        s.name = cross->repaired_on[r];
        for (std::size_t c = 0; c < cross->eval_on.size(); ++c)
          s.values.push_back(cross->at(r, c));
        series.push_back(std::move(s));
      }
      plot_radar(out_dir / "plots" / "cross_robustness.png",
                 "CROSS ROBUSTNESS", cross->eval_on, series);
    }
  }
}

}  // namespace deeprepair
