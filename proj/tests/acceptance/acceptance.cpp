// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "heatpat/anomaly.hpp"
#include "heatpat/artifacts.hpp"
#include "heatpat/kshape.hpp"
#include "heatpat/meterdata.hpp"
#include "heatpat/modelselect.hpp"
#include "heatpat/pipeline.hpp"
#include "heatpat/sbd.hpp"
#include "heatpat/strategy.hpp"
#include "heatpat/synthetic.hpp"
#include "mock_population.hpp"
#include "oracles.hpp"

using namespace heatpat;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kNccTol = 1e-9;
constexpr double kSbdZeroTol = 1e-9;
constexpr double kTemplateSbd = 0.02;
constexpr double kObjectiveSlack = 1e-9;
constexpr double kMinAri = 0.9;
constexpr int kSweepHits = 9;
constexpr double kMaxFalsePositiveRate = 0.10;
constexpr double kSilhouetteTol = 1e-9;
constexpr double kSbdBudgetSeconds = 5.0;
constexpr double kRunBudgetSeconds = 10.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << " failed:";
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Silhouette before and after removal for every k = 4 pipeline run, fed to criterion 5.
struct SilhouettePair {
  std::string run;
  double initial;
  double final;
};
std::vector<SilhouettePair> g_silhouettes;

PipelineOutputs run_fixed(const std::vector<RawMeterSeries>& series, std::uint64_t seed, const std::string& label,
                          double* elapsed = nullptr) {
  PipelineConfig c;
  c.k = 4;
  c.seed = seed;
  const auto t0 = Clock::now();
  auto out = run_on_series(series, c);
  if (elapsed) *elapsed = seconds_since(t0);
  g_silhouettes.push_back({label, out.manifest.silhouette_initial.value_or(0.0),
                           out.manifest.silhouette_final.value_or(0.0)});
  return out;
}

std::vector<int> truth_labels(const std::vector<std::string>& ids, const std::vector<GroundTruth>& truth) {
  std::map<std::string, int> by_id;
  for (const auto& t : truth) by_id[t.building_id] = static_cast<int>(t.archetype);
  std::vector<int> out;
  for (const auto& id : ids) out.push_back(by_id.at(id));
  return out;
}

SyntheticSpec archetype_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.counts = {50, 50, 50, 50};
  spec.noise = 0.1;
  spec.seed = seed;
  return spec;
}

Outcome criterion_sbd() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<std::size_t> len(2, 64);
  double worst = 0.0;
  double worst_zero = 0.0;
  for (int pair = 0; pair < 500; ++pair) {
    const std::size_t m = len(rng);
    const auto x = oracle::random_vector(rng, m);
    const auto y = oracle::random_vector(rng, m);
    const auto fast = ncc_sequence(x, y);
    const auto slow = oracle::ncc(x, y);
    if (fast.size() != slow.size()) {
      o.require(false, "lag count at m=" + std::to_string(m));
      continue;
    }
    for (std::size_t w = 0; w < fast.size(); ++w) worst = std::max(worst, std::abs(fast[w] - slow[w]));
    worst_zero = std::max(worst_zero, std::abs(sbd(x, x).distance));
    for (double alpha : {0.1, 1.0, 10.0}) {
      auto scaled = x;
      for (double& v : scaled) v *= alpha;
      worst_zero = std::max(worst_zero, std::abs(sbd(x, scaled).distance));
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(worst <= kNccTol, "ncc deviation " + std::to_string(worst));
  o.require(worst_zero <= kSbdZeroTol, "self/scaled distance " + std::to_string(worst_zero));
  o.require(elapsed < kSbdBudgetSeconds, "runtime");
  o.detail << " 500 pairs, max |fft-direct| " << worst << ", max sbd(x,ax) " << worst_zero << ", " << fmt(elapsed, 2)
           << " s";
  return o;
}

Outcome criterion_shape() {
  Outcome o;
  const std::size_t m = 96;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    for (auto s : {fixture::Shape::Sine, fixture::Shape::Square, fixture::Shape::Sawtooth}) {
      const auto clean = fixture::shape(s, m);
      std::vector<std::vector<double>> members;
      for (int i = 0; i < 10; ++i) members.push_back(fixture::noisy(clean, 0.3, rng));
      worst = std::max(worst, sbd(shape_extract(members, members.front()), clean).distance);
    }
  }
  o.require(worst < kTemplateSbd, "template distance " + fmt(worst));

  int decreases = 0;
  std::size_t iterations = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SyntheticSpec spec;
    spec.counts = {8, 8, 8, 8};
    spec.noise = 0.3;
    spec.seed = seed;
    const auto data = fixture::synthetic_profiles(spec);
    KShapeOptions ko;
    ko.k = 2 + seed % 4;
    ko.seed = seed;
    const auto model = cluster(data.profiles, ko);
    const auto& h = model.objective_history;
    iterations += h.size();
    for (std::size_t i = 1; i < h.size(); ++i) {
      if (h[i] < h[i - 1] - kObjectiveSlack) ++decreases;
    }
  }
  o.require(decreases == 0, std::to_string(decreases) + " objective decreases");
  o.detail << " 15 template sets, max centroid sbd " << fmt(worst) << "; 50 runs, " << iterations
           << " iterations, " << decreases << " decreases";
  return o;
}

Outcome criterion_recovery() {
  Outcome o;
  double min_ari = 1.0;
  double slowest = 0.0;
  int hits = 0;
  std::ostringstream ks;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = generate_synthetic(archetype_spec(seed));
    double t = 0.0;
    const auto out = run_fixed(data.series, seed, "recovery seed " + std::to_string(seed), &t);
    slowest = std::max(slowest, t);
    const double ari =
        adjusted_rand_index(out.final_model.assignment, truth_labels(out.final_model.ids, data.truth));
    min_ari = std::min(min_ari, ari);
    o.require(ari >= kMinAri, "seed " + std::to_string(seed) + " ARI " + fmt(ari));

    PipelineConfig c;
    c.sweep = SweepRange{2, 8};
    c.seed = seed;
    const auto t0 = Clock::now();
    const auto swept = run_on_series(data.series, c);
    slowest = std::max(slowest, seconds_since(t0));
    ks << (seed > 1 ? "," : "") << swept.manifest.k;
    if (swept.manifest.k == 4) ++hits;
  }
  o.require(hits >= kSweepHits, "sweep picked 4 in " + std::to_string(hits) + "/10");
  o.require(slowest < kRunBudgetSeconds, "slowest run " + fmt(slowest, 2) + " s");
  o.detail << " min ARI " << fmt(min_ari) << " over 10 seeds; sweep k = {" << ks.str() << "}, " << hits
           << "/10 at 4; slowest run " << fmt(slowest, 2) << " s";
  return o;
}

Outcome criterion_anomaly() {
  Outcome o;
  int caught = 0;
  int injected = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto spec = archetype_spec(seed);
    spec.scrambled = 5;
    const auto data = generate_synthetic(spec);
    const auto out = run_fixed(data.series, seed, "scrambled seed " + std::to_string(seed));
    int here = 0;
    for (const auto& t : data.truth) {
      if (t.fault != InjectedFault::Scrambled) continue;
      ++injected;
      if (out.initial_report.is_flagged(t.building_id)) ++here;
    }
    caught += here;
    o.require(here == 5, "seed " + std::to_string(seed) + " caught " + std::to_string(here) + "/5");
  }

  std::size_t flagged = 0;
  std::size_t clean = 0;
  double worst_run = 0.0;
  for (std::uint64_t seed = 101; seed <= 200; ++seed) {
    const auto data = generate_synthetic(archetype_spec(seed));
    const auto out = run_fixed(data.series, seed, "clean seed " + std::to_string(seed));
    flagged += out.initial_report.flagged.size();
    clean += out.initial.size();
    worst_run = std::max(worst_run, static_cast<double>(out.initial_report.flagged.size()) /
                                        static_cast<double>(out.initial.size()));
  }
  const double rate = static_cast<double>(flagged) / static_cast<double>(clean);
  o.require(rate <= kMaxFalsePositiveRate, "false positive rate " + fmt(rate));
  o.require(worst_run <= kMaxFalsePositiveRate, "worst run rate " + fmt(worst_run));

  ClusterModel boundary;
  boundary.k = 1;
  boundary.centroids = {{1.0, -1.0}};
  for (int i = 0; i < 10; ++i) {
    boundary.ids.push_back("B" + std::to_string(i));
    boundary.assignment.push_back(0);
    boundary.distances.push_back(i == 9 ? 5.0 : 1.0);
  }
  const auto r = detect(boundary);
  const bool only_last = r.flagged.size() == 1 && r.flagged[0].building_id == "B9";
  o.require(only_last, "boundary case");

  o.detail << " scrambled " << caught << "/" << injected << " flagged over 10 seeds; clean runs flag " << flagged
           << "/" << clean << " = " << fmt(100.0 * rate, 2) << "% (worst run " << fmt(100.0 * worst_run, 2)
           << "%); {1x9,5} flags " << (only_last ? "only 5" : "wrong set");
  return o;
}

Outcome criterion_silhouette() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> n_dist(2, 20);
  std::uniform_int_distribution<int> k_dist(2, 4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(n_dist(rng));
    const int k = std::min<int>(k_dist(rng), static_cast<int>(n));
    const std::size_t m = 4 + static_cast<std::size_t>(t % 13);
    std::vector<NormalizedProfile> p;
    for (std::size_t i = 0; i < n; ++i) p.push_back({"P" + std::to_string(i), oracle::random_vector(rng, m)});
    std::vector<int> labels(n);
    std::uniform_int_distribution<int> lab(0, k - 1);
    for (auto& l : labels) l = lab(rng);
    std::vector<std::vector<double>> table(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) table[i][j] = oracle::sbd(p[i].z, p[j].z);
      }
    }
    const double got = mean_silhouette(labels, static_cast<std::size_t>(k), DistanceMatrix::compute(p));
    worst = std::max(worst, std::abs(got - oracle::silhouette(table, labels, k)));
  }
  o.require(worst <= kSilhouetteTol, "oracle deviation " + std::to_string(worst));

  int decreased = 0;
  double mean_gain = 0.0;
  double largest_drop = 0.0;
  for (const auto& s : g_silhouettes) {
    mean_gain += s.final - s.initial;
    if (s.final < s.initial) {
      ++decreased;
      largest_drop = std::max(largest_drop, s.initial - s.final);
      o.require(false, s.run + " " + fmt(s.initial, 6) + " -> " + fmt(s.final, 6));
    }
  }
  o.require(!g_silhouettes.empty(), "no pipeline runs recorded");
  if (!g_silhouettes.empty()) mean_gain /= static_cast<double>(g_silhouettes.size());
  o.detail << " 100 instances, max deviation " << worst << "; removal over " << g_silhouettes.size()
           << " synthetic runs: " << decreased << " decreases (largest " << largest_drop << "), mean gain "
           << fmt(mean_gain);
  return o;
}

Outcome criterion_rules() {
  Outcome o;
  const auto mock = mockpop::build();
  const auto s = summarize(flag_unsuitable(mock.model, mock.labeling, mock.categories));
  using CS = ControlStrategy;
  o.require(s.total() == 317, "total " + std::to_string(s.total()));
  o.require(s.strategy_total(CS::COC) == 210, "COC " + std::to_string(s.strategy_total(CS::COC)));
  o.require(s.strategy_total(CS::NSB) == 72, "NSB " + std::to_string(s.strategy_total(CS::NSB)));
  o.require(s.strategy_total(CS::TCO7) == 28, "TCO7 " + std::to_string(s.strategy_total(CS::TCO7)));
  o.require(s.strategy_total(CS::TCO5) == 7, "TCO5 " + std::to_string(s.strategy_total(CS::TCO5)));

  // S suitable, U unsuitable, N unknown, digits name the rule
  using CC = CustomerCategory;
  const std::map<CC, std::string> expected{
      // COC   NSB   TCO5  TCO7  Unlabeled
      {CC::MultiDwelling, "S  U3 U1 U1 N "},
      {CC::Commercial, "U2 U3 S  S  N "},
      {CC::PublicAdministration, "S  U3 S  S  N "},
      {CC::HealthSocial, "S  U3 S  S  N "},
      {CC::School, "S  U3 S  S  N "},
      {CC::Industrial, "U2 U3 S  S  N "},
  };
  int mismatches = 0;
  for (const auto& [cat, row] : expected) {
    std::size_t col = 0;
    for (auto st : {CS::COC, CS::NSB, CS::TCO5, CS::TCO7, CS::Unlabeled}) {
      const auto want = row.substr(col * 3, 2);
      col++;
      const auto got = evaluate_rules(cat, st);
      std::string code = got.verdict == Verdict::Suitable ? "S " : got.verdict == Verdict::Unknown ? "N " : "U?";
      if (got.verdict == Verdict::Unsuitable && got.rule) {
        code = *got.rule == Rule::R1 ? "U1" : *got.rule == Rule::R2 ? "U2" : "U3";
      }
      if (code != want) {
        ++mismatches;
        o.require(false, std::string(to_string(cat)) + "/" + std::string(to_string(st)));
      }
    }
  }
  o.detail << " mock population " << s.total() << " unsuitable (COC " << s.strategy_total(CS::COC) << ", NSB "
           << s.strategy_total(CS::NSB) << ", TCO7 " << s.strategy_total(CS::TCO7) << ", TCO5 "
           << s.strategy_total(CS::TCO5) << "); truth table 30 cells, " << mismatches << " mismatches";
  return o;
}

RawMeterSeries varying_year(int year) {
  RawMeterSeries s;
  s.building_id = "B1";
  s.year = year;
  s.start = year_start(year);
  s.readings.resize(static_cast<std::size_t>(hours_in_year(year)));
  for (std::size_t i = 0; i < s.readings.size(); ++i) s.readings[i] = 10.0 + static_cast<double>(i % 5);
  return s;
}

Outcome criterion_cleaning() {
  Outcome o;
  auto blank = [](RawMeterSeries& s, std::size_t from, std::size_t count) {
    for (std::size_t i = from; i < from + count; ++i) s.readings[i] = kMissing;
  };
  int cases = 0;
  auto expect = [&](const RawMeterSeries& s, ScreenVerdict want, const std::string& name) {
    ++cases;
    o.require(screen(s) == want, name);
  };
  for (int year : {2015, 2016}) {
    const auto y = std::to_string(year);
    auto gap = varying_year(year);
    blank(gap, 1000, 48);
    expect(gap, ScreenVerdict::accept(), "48h gap " + y);
    blank(gap, 1048, 1);
    expect(gap, ScreenVerdict::reject(RejectReason::LongGap), "49h gap " + y);

    auto total = varying_year(year);
    for (std::size_t g = 0; g < 15; ++g) blank(total, 100 + g * 500, 48);
    expect(total, ScreenVerdict::accept(), "720h missing " + y);
    blank(total, 8000, 1);
    expect(total, ScreenVerdict::reject(RejectReason::TotalGapBudget), "721h missing " + y);

    auto stuck = varying_year(year);
    for (std::size_t i = 2000; i < 2047; ++i) stuck.readings[i] = 7.3;
    expect(stuck, ScreenVerdict::accept(), "47 identical " + y);
    stuck.readings[2047] = 7.3;
    expect(stuck, ScreenVerdict::reject(RejectReason::StuckMeter), "48 identical " + y);
  }

  // Generator years with injected spikes and short gaps, default cleaning parameters.
  const CleaningParams params;
  int agree = 0;
  std::size_t spikes = 0;
  std::size_t spikes_found = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SyntheticSpec spec;
    spec.counts = {0, 0, 0, 0};
    spec.counts[seed % 4] = 1;
    spec.jumps = 1;
    spec.short_gaps_per_building = static_cast<int>(seed % 6);
    spec.noise = 0.05 + 0.01 * static_cast<double>(seed % 10);
    spec.seed = 1000 + seed;
    const auto data = generate_synthetic(spec);
    const auto& series = data.series.front();
    const auto got = detect_jumps(series, params);
    const auto want = oracle::jumps(series.readings, params.window_hours, params.eps_mad, params.mad_multiplier);
    if (got == want) {
      ++agree;
    } else {
      o.require(false, "jump fixture " + std::to_string(seed));
    }
    for (auto h : data.truth.front().jump_hours) {
      ++spikes;
      if (std::binary_search(got.begin(), got.end(), h)) ++spikes_found;
    }
  }
  o.require(spikes_found == spikes, "injected spikes missed");
  o.detail << " " << cases << " boundary fixtures; MAD detector equals oracle on " << agree
           << "/50 fixtures, injected spikes found " << spikes_found << "/" << spikes;
  return o;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_text_file(e.path());
  return out;
}

Outcome criterion_determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "heatpat_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);

  auto spec = archetype_spec(31);
  spec.scrambled = 5;
  spec.stuck_meters = 3;
  spec.long_gaps = 2;
  spec.jumps = 10;
  spec.short_gaps_per_building = 2;
  const auto data = generate_synthetic(spec);
  std::ostringstream csv;
  write_readings_csv(csv, data.series);
  write_text_file(root / "readings.csv", csv.str());

  PipelineConfig c;
  c.inputs = {root / "readings.csv"};
  c.sweep = SweepRange{2, 8};
  c.seed = 31;
  c.output_dir = root / "store";

  std::size_t files = 0;
  for (int variant = 0; variant < 2; ++variant) {
    if (variant == 1) c.k = 4;
    fs::remove_all(c.output_dir);
    run(c);
    const auto first = snapshot(c.output_dir);
    fs::remove_all(c.output_dir);
    run(c);
    const auto second = snapshot(c.output_dir);
    files += first.size();
    o.require(first.size() == second.size(), "file sets differ");
    for (const auto& [name, bytes] : first) {
      const auto it = second.find(name);
      o.require(it != second.end() && it->second == bytes, name + (variant ? " (fixed k)" : " (sweep)"));
    }
  }
  fs::remove_all(root);
  o.detail << " two configurations run twice each, " << files << " artifact files compared byte for byte";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  // Criterion 5 reads the silhouettes recorded by the pipeline runs of 3 and 4,
  // so it runs after them; output stays in numeric order.
  const std::vector<Criterion> order{
      {1, "SBD oracle equivalence", criterion_sbd},
      {2, "shape extraction", criterion_shape},
      {3, "planted-cluster recovery", criterion_recovery},
      {4, "anomaly detection", criterion_anomaly},
      {5, "silhouette", criterion_silhouette},
      {6, "rule arithmetic", criterion_rules},
      {7, "cleaning rules", criterion_cleaning},
      {8, "determinism", criterion_determinism},
  };
  int failed = 0;
  for (const auto& c : order) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " threw: " << e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "):" << o.detail.str()
              << " [" << fmt(seconds_since(t0), 1) << " s]" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
