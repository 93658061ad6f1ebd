// Acceptance run: one PASS/FAIL line per criterion. Exits 0 when every
// criterion was evaluated (whatever the verdicts); --strict also turns any
// FAIL into a non-zero exit.
#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "edgeal/acquisition.hpp"
#include "edgeal/csv.hpp"
#include "edgeal/edges.hpp"
#include "edgeal/experiment.hpp"
#include "edgeal/labels.hpp"
#include "edgeal/learner.hpp"
#include "edgeal/metrics.hpp"
#include "edgeal/superpixels.hpp"
#include "edgeal/uncertainty.hpp"
#include "support/oracles.hpp"

using namespace edgeal;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int decimals = 4) { return format_fixed(v, decimals); }

struct Verdict {
  int id;
  std::string title;
  bool pass;
  std::string detail;
};

// ---------------------------------------------------------------------------

Verdict criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> classes(2, 8);
  double worst_norm = 0, worst_ee_excess = -INFINITY, min_ee = INFINITY, min_ed = INFINITY, max_self_ed = 0;
  double worst_zero_edge = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = classes(gen);
    const double sharp = trial % 4 == 0 ? 8.0 : 1.0;
    const auto p = oracle::random_distribution(gen, c, 6, 6, sharp);
    EdgeMap s(6, 6);
    for (auto& v : s.values()) v = u(gen);
    const auto phi = contextual_probability(p, s);
    worst_norm = std::max(worst_norm, check_normalization(phi).max_sum_error);
    const double ln_c = std::log(static_cast<double>(c));
    for (double v : edge_entropy(phi).values()) {
      worst_ee_excess = std::max(worst_ee_excess, v - ln_c);
      min_ee = std::min(min_ee, v);
    }
    for (double v : edge_divergence(p, phi).values()) min_ed = std::min(min_ed, v);
    for (double v : edge_divergence(p, p).values()) max_self_ed = std::max(max_self_ed, v);
    const auto flat = edge_entropy(contextual_probability(p, EdgeMap(6, 6, 0.0)));
    for (double v : flat.values()) worst_zero_edge = std::max(worst_zero_edge, std::abs(v - ln_c));
  }
  const double elapsed = seconds_since(t0);
  const bool pass = worst_norm <= 1e-6 && worst_ee_excess <= 1e-6 && min_ee >= 0.0 && min_ed >= -1e-9 &&
                    max_self_ed <= 1e-9 && worst_zero_edge <= 1e-9 && elapsed < 10.0;
  std::ostringstream d;
  d << "1000 fixtures: max |sum phi - 1| " << std::scientific << std::setprecision(2) << worst_norm
    << ", max EE - ln C " << worst_ee_excess << ", min ED " << min_ed << ", max ED(P,P) " << max_self_ed
    << ", S=0 max |EE - ln C| " << worst_zero_edge << std::fixed << "; " << fmt(elapsed, 2) << " s";
  return {1, "math-kernel properties", pass, d.str()};
}

Verdict criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2002);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  double worst_mean = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto ee = oracle::random_image(gen, 16, 16);
    const auto ed = oracle::random_image(gen, 16, 16);
    const auto sp = seeds_partition(oracle::random_image(gen, 16, 16), {10, 3, static_cast<std::uint64_t>(trial)});
    LabeledMask labeled(16, 16);
    for (auto& v : labeled.values()) v = u(gen) < 0.4;
    const auto acc = oracle::accumulate(ee, ed, sp, labeled);
    const auto got = regional_means(0, ee, ed, sp, labeled);
    if (got.size() != acc.size()) worst_mean = INFINITY;
    for (const auto& s : got) {
      const auto& a = acc.at(s.region_id);
      worst_mean = std::max({worst_mean, std::abs(s.mean_ee - a.ee_sum / a.count),
                             std::abs(s.mean_ed - a.ed_sum / a.count),
                             s.unlabeled_count == a.count ? 0.0 : INFINITY});
    }
  }

  std::size_t select_mismatch = 0;
  std::uniform_int_distribution<int> level(0, 4);
  std::uniform_int_distribution<std::size_t> size(4, 12), budget(1, 12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RegionScore> scores;
    for (std::size_t r = 0; r < 10; ++r) {
      RegionScore s;
      s.image_id = r % 4;
      s.region_id = r;
      s.mean_ee = 0.25 * level(gen);
      s.mean_ed = 0.25 * level(gen);
      s.unlabeled_count = size(gen);
      scores.push_back(s);
    }
    std::vector<RegionRef> all;
    for (const auto& s : scores) all.push_back(s.ref());
    const std::size_t b = budget(gen);  // at most 3 regions of >= 4 px
    const auto got = select_regions(scores, all, b);
    std::vector<RegionRef> refs;
    for (const auto& r : got.regions) refs.push_back(r.ref());
    select_mismatch += refs != oracle::exhaustive_select(scores, b);
  }

  std::size_t dice_mismatch = 0;
  std::uniform_int_distribution<int> cls(0, 2);
  for (int trial = 0; trial < 1000; ++trial) {
    ClassMap a(8, 8), b(8, 8);
    for (auto& v : a.values()) v = static_cast<std::uint8_t>(cls(gen));
    for (auto& v : b.values()) v = static_cast<std::uint8_t>(trial % 3 == 0 ? cls(gen) % 2 : cls(gen));
    const auto got = dice(a, b, 3);
    const auto want = oracle::dice(a, b, 3);
    bool same = got.mean == want.mean;
    for (std::size_t c = 0; c < 3; ++c) same &= got.per_class[c] == want.per_class[c] && got.evaluated[c] == want.evaluated[c];
    dice_mismatch += !same;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = worst_mean <= 1e-6 && select_mismatch == 0 && dice_mismatch == 0 && elapsed < 30.0;
  std::ostringstream d;
  d << "regional_means max error " << std::scientific << std::setprecision(2) << worst_mean << std::fixed
    << "; select_regions mismatches " << select_mismatch << "/100; dice mismatches " << dice_mismatch << "/1000; "
    << fmt(elapsed, 2) << " s";
  return {2, "oracle equivalence", pass, d.str()};
}

Verdict criterion3() {
  std::mt19937_64 gen(3003);
  double worst_sobel = 0, worst_g1 = 0, worst_g2 = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto img = oracle::random_image(gen, 16, 16);
    const auto s = sobel_magnitude(img);
    const auto so = oracle::sobel(img);
    const auto g1 = gaussian_blur(img, 1.0);
    const auto g1o = oracle::gaussian(img, 1.0);
    const auto g2 = gaussian_blur(img, 2.0);
    const auto g2o = oracle::gaussian(img, 2.0);
    for (std::size_t i = 0; i < img.size(); ++i) {
      worst_sobel = std::max(worst_sobel, std::abs(s[i] - so[i]));
      worst_g1 = std::max(worst_g1, std::abs(g1[i] - g1o[i]));
      worst_g2 = std::max(worst_g2, std::abs(g2[i] - g2o[i]));
    }
  }
  const bool pass = worst_sobel <= 1e-5 && worst_g1 <= 1e-5 && worst_g2 <= 1e-5;
  std::ostringstream d;
  d << "100 random 16x16 images: max |error| Sobel " << std::scientific << std::setprecision(2) << worst_sobel
    << ", Gaussian s=1 " << worst_g1 << ", s=2 " << worst_g2;
  return {3, "Sobel and Gaussian vs direct convolution", pass, d.str()};
}

Verdict criterion4() {
  std::mt19937_64 gen(4004);
  std::size_t violations = 0, nondeterministic = 0, maps = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto img = oracle::random_image(gen, 48, 48);
    for (std::size_t count : {16u, 64u}) {
      const SeedsParams params{count, 10, static_cast<std::uint64_t>(trial)};
      const auto sp = seeds_partition(img, params);
      ++maps;
      std::vector<std::size_t> sizes(sp.region_count, 0);
      bool ok = sp.region_count >= 1 && sp.region_count <= count;
      for (auto v : sp.labels.values()) {
        if (v >= sp.region_count) ok = false;
        else ++sizes[v];
      }
      for (std::size_t r = 0; ok && r < sp.region_count; ++r) {
        ok = sizes[r] > 0 && oracle::components(sp, static_cast<std::uint32_t>(r)) == 1;
      }
      violations += !ok;
      nondeterministic += !(seeds_partition(img, params).labels == sp.labels);
    }
  }
  std::size_t worst_offset = 0;
  for (std::size_t w : {16u, 21u, 32u, 48u}) {
    Image img(24, w, 0.0);
    for (std::size_t m = 0; m < 24; ++m)
      for (std::size_t n = w / 2; n < w; ++n) img(m, n) = 1.0;
    const auto sp = seeds_partition(img, {2, 10, 0});
    for (std::size_t m = 0; m < 24; ++m) {
      for (std::size_t n = 0; n < w; ++n) {
        const bool left_side = n < w / 2;
        const bool left_label = sp.labels(m, n) == sp.labels(m, 0);
        if (left_side != left_label) {
          const std::size_t off = left_side ? w / 2 - n : n - w / 2 + 1;
          worst_offset = std::max(worst_offset, off);
        }
      }
    }
  }
  const bool pass = violations == 0 && nondeterministic == 0 && worst_offset <= 1;
  std::ostringstream d;
  d << maps << " maps (50 images x {16,64}): invariant violations " << violations << ", nondeterministic "
    << nondeterministic << "; two-tone worst boundary offset " << worst_offset << " px";
  return {4, "superpixel invariants", pass, d.str()};
}

Verdict criterion5() {
  std::mt19937_64 gen(5005);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-4;
  double worst = 0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t classes = 2 + trial % 4;
    std::vector<PixelFeatures> feats(3);
    for (auto& f : feats) {
      f.height = 5;
      f.width = 4;
      f.values.resize(f.pixels() * kFeatureCount);
      for (auto& v : f.values) v = n01(gen);
    }
    std::vector<LabeledPixels> batch;
    std::uniform_int_distribution<int> cls(0, static_cast<int>(classes) - 1);
    for (std::size_t i = 0; i < feats.size(); ++i) {
      ClassMap ann(5, 4, 255);
      for (auto& v : ann.values())
        if (u(gen) < 0.7) v = static_cast<std::uint8_t>(cls(gen));
      batch.push_back(labeled_pixels(i, feats[i], ann));
    }
    std::vector<double> w(classes * kInputCount);
    for (auto& v : w) v = 0.5 * n01(gen);
    const DropoutKey key{static_cast<std::uint64_t>(trial), 1, 0.5};
    const DropoutKey* k = trial % 2 ? &key : nullptr;
    const auto base = mixed_loss(w, classes, batch, 0.5, k);
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const auto lp = mixed_loss(wp, classes, batch, 0.5, k);
      const auto lm = mixed_loss(wm, classes, batch, 0.5, k);
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
      worst = std::max({worst, rel(base.grad_cross_entropy[i], (lp.cross_entropy - lm.cross_entropy) / (2 * h)),
                        rel(base.grad_dice[i], (lp.dice_loss - lm.dice_loss) / (2 * h)),
                        rel(base.grad_total[i], (lp.total - lm.total) / (2 * h))});
      ++checked;
    }
  }
  std::ostringstream d;
  d << checked << " weights x {CE, dice, total}: max relative error " << std::scientific << std::setprecision(2)
    << worst;
  return {5, "gradient check", worst <= 1e-3, d.str()};
}

// ---------------------------------------------------------------------------
// Criteria 6-8 share the acceptance run.

struct RunOutcome {
  std::vector<CurveRow> rows;
  double seconds = 0;
};

RunOutcome run_default(const std::filesystem::path& data, const std::filesystem::path& out,
                       const std::vector<std::uint64_t>& seeds, bool verbose) {
  ExperimentConfig cfg;
  cfg.dataset = data;
  cfg.out = out;
  cfg.seeds = seeds;
  const auto all = all_strategies();
  cfg.strategies.assign(all.begin(), all.end());
  std::filesystem::remove_all(out);
  const auto t0 = Clock::now();
  RunOutcome r;
  r.rows = run_experiment(cfg, [&](std::string_view line) {
    if (verbose) std::cerr << "  " << line << '\n';
  });
  r.seconds = seconds_since(t0);
  return r;
}

const CurveRow* find_row(const std::vector<CurveRow>& rows, std::string_view strategy, std::uint64_t seed,
                         std::size_t round) {
  for (const auto& r : rows)
    if (r.strategy == strategy && r.seed == seed && r.round == round) return &r;
  return nullptr;
}

Verdict criterion6(const RunOutcome& run, const std::vector<std::uint64_t>& seeds) {
  const auto& rows = run.rows;
  auto mean_at = [&](std::string_view s, std::size_t round) {
    double sum = 0;
    for (auto seed : seeds) sum += find_row(rows, s, seed, round)->mean_dice;
    return sum / static_cast<double>(seeds.size());
  };
  const double edgeal12 = mean_at("edgeal", 1);
  const double random12 = mean_at("random", 1);
  const bool a = edgeal12 >= random12 + 0.01;

  std::size_t reached = 0;
  std::ostringstream reach_detail;
  for (auto seed : seeds) {
    const double full = find_row(rows, kFullReference, seed, 0)->mean_dice;
    std::optional<double> first;
    for (std::size_t round = 0; round <= 4; ++round) {
      const auto* r = find_row(rows, "edgeal", seed, round);
      if (r && r->labeled_fraction <= 0.43 + 1e-9 && r->mean_dice >= 0.99 * full) {
        first = r->labeled_fraction;
        break;
      }
    }
    if (first) ++reached;
    reach_detail << (reach_detail.tellp() ? ", " : "") << "s" << seed << "="
                 << (first ? fmt(100 * *first, 1) + "%" : std::string("never"));
  }
  const bool b = reached >= 4;

  double lo = INFINITY, hi = -INFINITY;
  for (Strategy s : all_strategies()) {
    const double m = mean_at(strategy_name(s), 0);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  const bool c = hi - lo <= 0.05;
  const bool fast = run.seconds <= 600.0;

  std::ostringstream d;
  d << "(a) 12%: EdgeAL " << fmt(edgeal12) << " vs Random " << fmt(random12) << " -> " << (a ? "pass" : "FAIL")
    << "; (b) 99% of full reached in " << reached << "/5 seeds [" << reach_detail.str() << "] -> "
    << (b ? "pass" : "FAIL") << "; (c) seed-point spread " << fmt(hi - lo) << " -> " << (c ? "pass" : "FAIL")
    << "; run " << fmt(run.seconds, 1) << " s -> " << (fast ? "pass" : "FAIL");
  return {6, "AL dynamics analogue", a && b && c && fast, d.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict criterion7(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto x = slurp(a / "curves.csv");
  const auto y = slurp(b / "curves.csv");
  const bool same = !x.empty() && x == y;
  std::ostringstream d;
  d << "two identical runs, curves.csv " << x.size() << " and " << y.size() << " bytes: "
    << (same ? "byte-identical" : "DIFFER");
  return {7, "reproducibility", same, d.str()};
}

// Share of round-1 selected pixels within 5 px of a true class boundary,
// averaged over seeds.
double boundary_share(const DatasetIndex& index, const std::filesystem::path& run_dir, std::string_view strategy,
                      const std::vector<std::uint64_t>& seeds) {
  const auto pool = load_split(index, Split::train);
  std::vector<std::vector<double>> dist;
  std::vector<SuperpixelMap> sps;
  for (const auto& s : pool) {
    dist.push_back(oracle::boundary_distance(s.labels));
    sps.push_back(read_superpixel_map(run_dir / "superpixels" / (s.name + ".ealt")));
  }
  double total_share = 0;
  for (auto seed : seeds) {
    const auto cell = run_dir / std::string(strategy) / ("seed" + std::to_string(seed));
    const LabelState before = LabelState::load(cell / "mask_round0", pool);
    std::ifstream in(cell / "selection_round1.csv");
    const auto records = parse_csv(in);
    std::size_t near = 0, all = 0;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const std::size_t image = std::stoul(records[i][0]);
      const std::uint32_t region = static_cast<std::uint32_t>(std::stoul(records[i][1]));
      const auto& mask = before.mask(image);
      for (std::size_t p = 0; p < mask.size(); ++p) {
        if (sps[image].labels[p] != region || mask[p] != kUnlabeled) continue;
        ++all;
        near += dist[image][p] <= 5.0;
      }
    }
    total_share += all ? static_cast<double>(near) / static_cast<double>(all) : 0.0;
  }
  return total_share / static_cast<double>(seeds.size());
}

Verdict criterion8(const DatasetIndex& index, const std::filesystem::path& run_dir,
                   const std::vector<std::uint64_t>& seeds) {
  const double edge = boundary_share(index, run_dir, "edgeal", seeds);
  const double rnd = boundary_share(index, run_dir, "random", seeds);
  const bool pass = edge >= 0.60 && rnd <= 0.40;
  std::ostringstream d;
  d << "round-1 pixels within 5 px of a class boundary: EdgeAL " << fmt(100 * edge, 1) << "% (need >= 60%), Random "
    << fmt(100 * rnd, 1) << "% (need <= 40%)";
  return {8, "selection near boundaries", pass, d.str()};
}

void print(const Verdict& v, std::ostream& out) {
  out << "criterion " << v.id << " [" << (v.pass ? "PASS" : "FAIL") << "] " << v.title << ": " << v.detail << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgeal acceptance run"};
  std::filesystem::path work = "acceptance_work";
  std::filesystem::path report_path;
  bool strict = false, verbose = false, keep = false;
  app.add_option("--work", work, "Scratch directory for datasets and runs");
  app.add_option("--report", report_path, "Also write the verdicts and summary table to this file");
  app.add_flag("--strict", strict, "Exit non-zero if any criterion fails");
  app.add_flag("--verbose", verbose, "Log experiment progress to stderr");
  app.add_flag("--keep", keep, "Keep the scratch directory");
  CLI11_PARSE(app, argc, argv);

  std::vector<Verdict> verdicts;
  std::ostringstream report;
  auto record = [&](Verdict v) {
    print(v, std::cout);
    print(v, report);
    std::cout.flush();
    verdicts.push_back(std::move(v));
  };

  try {
    record(criterion1());
    record(criterion2());
    record(criterion3());
    record(criterion4());
    record(criterion5());

    std::filesystem::remove_all(work);
    std::filesystem::create_directories(work);
    const auto index = generate_synthetic(work / "data", SyntheticSpec{});
    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    const auto first = run_default(work / "data", work / "run_a", seeds, verbose);
    record(criterion6(first, seeds));
    run_default(work / "data", work / "run_b", seeds, verbose);
    record(criterion7(work / "run_a", work / "run_b"));
    record(criterion8(index, work / "run_a", seeds));

    const std::string table = "\nsummary over 5 seeds (mean dice +- population sd):\n" +
                              format_summary_table(summarize(first.rows));
    report << table;
    std::cout << table;
    if (!keep) std::filesystem::remove_all(work);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << '\n';
    return 2;
  }

  std::size_t passed = 0;
  for (const auto& v : verdicts) passed += v.pass;
  report << "\n" << passed << "/" << verdicts.size() << " criteria passed\n";
  std::cout << "\n" << passed << "/" << verdicts.size() << " criteria passed\n";
  if (!report_path.empty()) std::ofstream(report_path) << report.str();
  return strict && passed != verdicts.size() ? 1 : 0;
}
