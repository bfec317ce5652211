#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <memory>

#include "deeprepair/errors.hpp"
#include "deeprepair/models.hpp"
#include "deeprepair/report.hpp"
#include "deeprepair/rng.hpp"

using namespace deeprepair;
namespace fs = std::filesystem;

namespace {

ResultRow row(const std::string& model, const std::string& method,
              const std::string& eval_on, const std::string& split,
              double acc, std::uint64_t seed = 0,
              const std::string& hash = "0000000000000000") {
  ResultRow r;
  r.model = model;
  r.method = method;
  r.repaired_on = method == "base" ? "-" : "GN";
  r.eval_on = eval_on;
  r.split = split;
  r.accuracy = acc;
  r.seed = seed;
  r.config_hash = hash;
  return r;
}

LabelledDataset fixed_data(std::size_t n, int label, std::uint64_t seed) {
  LabelledDataset ds;
  ds.shape = {3, 8, 8};
  ds.num_classes = 10;
  ds.name = "fixed";
  Rng rng(seed);
  ds.images.resize(n * ds.shape.size());
  for (auto& v : ds.images) v = float(rng.uniform());
  ds.labels.assign(n, label);
  return ds;
}

}  // namespace

TEST_CASE("fnv1a known vectors") {
  // published FNV-1a 64-bit test vectors
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config hash is 16 hex chars and input sensitive") {
  const std::string h1 = config_hash_hex("{\"a\":1}");
  const std::string h2 = config_hash_hex("{\"a\":2}");
  CHECK(h1.size() == 16);
  CHECK(h1 != h2);
  CHECK(h1 == config_hash_hex("{\"a\":1}"));
  for (char c : h1) CHECK(std::isxdigit(static_cast<unsigned char>(c)));
}

TEST_CASE("results csv round trips including quoting") {
  std::vector<ResultRow> rows;
  rows.push_back(row("base", "base", "clean", "clean", 0.91, 1));
  rows.push_back(row("m,with\"quote", "style-repair", "GN", "heldout",
                     0.3125, 2, "abcdef0123456789"));
  const fs::path path = fs::temp_directory_path() / "dr_results.csv";
  write_results_csv(path, rows);
  const std::vector<ResultRow> back = read_results_csv(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].model == rows[i].model);
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].repaired_on == rows[i].repaired_on);
    CHECK(back[i].eval_on == rows[i].eval_on);
    CHECK(back[i].split == rows[i].split);
    CHECK(back[i].accuracy == doctest::Approx(rows[i].accuracy).epsilon(1e-9));
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].config_hash == rows[i].config_hash);
  }
}

TEST_CASE("csv reader rejects an unexpected header") {
  const fs::path path = fs::temp_directory_path() / "dr_badhdr.csv";
  {
    std::ofstream out(path);
    out << "model,accuracy\nbase,0.5\n";
  }
  CHECK_THROWS_AS(read_results_csv(path), LoadError);
  CHECK_THROWS_AS(
      read_results_csv(fs::temp_directory_path() / "dr_missing.csv"),
      LoadError);
}

TEST_CASE("cross_robustness evaluates every model on every set") {
  Rng r1(1), r2(2);
  nn::Network<float> a = build_model<float>(arch_from_name("tiny"), r1);
  nn::Network<float> b = build_model<float>(arch_from_name("tiny"), r2);
  const LabelledDataset d0 = fixed_data(16, 0, 3);
  const LabelledDataset d1 = fixed_data(12, 1, 4);
  const CrossRobustness cross = cross_robustness(
      {{"a", &a}, {"b", &b}}, {{"s0", &d0}, {"s1", &d1}});
  CHECK(cross.repaired_on == std::vector<std::string>{"a", "b"});
  CHECK(cross.eval_on == std::vector<std::string>{"s0", "s1"});
  REQUIRE(cross.accuracy.size() == 4);
  for (double v : cross.accuracy) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // spot check one cell against a direct evaluation
  const fs::path p = fs::temp_directory_path() / "dr_cross.csv";
  write_cross_matrix_csv(p, cross);
  CHECK(fs::exists(p));
}

TEST_CASE("ablation_compare averages seeds and reports deltas") {
  std::vector<ResultRow> rows;
  rows.push_back(row("m1", "style-repair", "GN", "heldout", 0.30, 1, "aaaa"));
  rows.push_back(row("m1", "style-repair", "GN", "heldout", 0.40, 2, "aaaa"));
  rows.push_back(row("m2", "plain", "GN", "heldout", 0.10, 1, "bbbb"));
  rows.push_back(row("m2", "plain", "GN", "heldout", 0.20, 2, "bbbb"));
  rows.push_back(row("m2", "plain", "clean", "clean", 0.90, 1, "bbbb"));

  const AblationResult res =
      ablation_compare(rows, "style-repair", "GN", "heldout");
  CHECK(res.reference == "style-repair");
  REQUIRE(res.methods == std::vector<std::string>{"plain"});
  CHECK(res.accuracy[0] == doctest::Approx(0.15));
  CHECK(res.delta_vs_reference[0] == doctest::Approx(0.15 - 0.35));
}

TEST_CASE("ablation_compare rejects config drift and missing reference") {
  std::vector<ResultRow> rows;
  rows.push_back(row("m", "plain", "GN", "heldout", 0.1, 1, "aaaa"));
  rows.push_back(row("m", "plain", "GN", "heldout", 0.2, 2, "cccc"));
  CHECK_THROWS_AS(ablation_compare(rows, "plain", "GN", "heldout"),
                  ValidationError);
  std::vector<ResultRow> ok;
  ok.push_back(row("m", "plain", "GN", "heldout", 0.1, 1, "aaaa"));
  CHECK_THROWS_AS(ablation_compare(ok, "style-repair", "GN", "heldout"),
                  ValidationError);
}

TEST_CASE("emit_report writes csv and figures") {
  const fs::path dir = fs::temp_directory_path() / "dr_report";
  fs::remove_all(dir);
  std::vector<ResultRow> rows;
  rows.push_back(row("base", "base", "clean", "clean", 0.9, 1));
  rows.push_back(row("base", "base", "GN", "corrupted", 0.4, 1));
  rows.push_back(row("m", "style-repair", "clean", "clean", 0.88, 1));
  rows.push_back(row("m", "style-repair", "GN", "corrupted", 0.7, 1));

  CrossRobustness cross;
  cross.repaired_on = {"base", "m"};
  cross.eval_on = {"clean", "GN-S1", "GN-S3", "GN-S5"};
  cross.accuracy = {0.9, 0.6, 0.4, 0.2, 0.88, 0.8, 0.7, 0.6};

  emit_report(dir, rows, &cross);
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "cross_matrix.csv"));
  CHECK(fs::exists(dir / "plots" / "method_accuracy.png"));
  CHECK(fs::exists(dir / "plots" / "cross_robustness.png"));
  CHECK(read_results_csv(dir / "results.csv").size() == rows.size());
}
