#include <CLI11.hpp>
#include <hix/cli_support.hpp>

#include <iostream>

using namespace hix;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdict = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInput = 4;

const char* kind_name(SeqKind k) {
  switch (k) {
    case SeqKind::Paired: return "paired";
    case SeqKind::SemiPaired: return "semi-paired";
    case SeqKind::Special: return "special";
    case SeqKind::Invalid: return "invalid";
  }
  return "?";
}

int cmd_norm(const RunConfig& cfg, const std::string& vecFile) {
  SparseVector x = parse_vec(trim(read_text_file(vecFile)));
  auto cache = load_cache(cfg.cachePath);
  auto sched = cfg.schedule();
  long budget = std::max<long>(24, (long)x.support_size() + 8);
  NormEngine eng(sched, cfg.desc(), budget, &cache);
  auto r = eng.norm(x);
  Rat certified = certify(*r.cert, x, sched);
  std::cout << "norm = " << show_rat(r.value) << "\n";
  std::cout << "certificate = " << format_tree(*r.cert) << "\n";
  std::cout << "certified = " << show_rat(certified) << "\n";
  save_cache(cache, cfg.cachePath);
  return certified == r.value ? kExitPass : kExitVerdict;
}

int cmd_gen(const RunConfig& cfg, long stage) {
  auto sched = cfg.schedule();
  auto coding = load_allocation_log(cfg.logPath);
  Report rep;
  if (cfg.snapshot == "wex") {
    ExtOptions opt{stage, cfg.supportBound, cfg.maxWeightIndex, cfg.budget};
    auto st = build_stage(opt, sched, coding);
    long bad = 0;
    std::string firstBad;
    for (auto& r : st.members)
      if (!wex_member(*r.tree, sched, coding, &st)) {
        ++bad;
        if (firstBad.empty()) firstBad = format_vec(r.vec);
      }
    rep.title = "extension snapshot, stage " + std::to_string(stage) + " at " +
                sched.id();
    rep.add("materialize", "stage closure within budget",
            std::to_string(st.members.size()) + " members, " +
                std::to_string(st.fresh.size()) + " fresh, " +
                std::to_string(st.lpool.size()) + " pool atoms",
            Verdict::Pass);
    rep.add("validate", "every member passes the membership walk",
            std::to_string(bad) + " rejections",
            bad == 0 ? Verdict::Pass : Verdict::Fail,
            firstBad.empty() ? "" : "first rejection " + firstBad);
  } else if (cfg.snapshot == "whi") {
    auto recs = generate_whi({stage, cfg.supportBound, cfg.convex, cfg.budget},
                             sched, coding);
    long bad = 0;
    std::string firstBad;
    for (auto& r : recs)
      if (!whi_member(*r.tree, sched, coding, cfg.convex)) {
        ++bad;
        if (firstBad.empty()) firstBad = format_vec(r.vec);
      }
    rep.title = "standard snapshot, stage " + std::to_string(stage) + " at " +
                sched.id();
    rep.add("materialize", "stage closure within budget",
            std::to_string(recs.size()) + " members", Verdict::Pass);
    rep.add("validate", "every member passes the membership walk",
            std::to_string(bad) + " rejections",
            bad == 0 ? Verdict::Pass : Verdict::Fail,
            firstBad.empty() ? "" : "first rejection " + firstBad);
  } else {
    throw InputError("snapshot must be wex or whi, got: " + cfg.snapshot);
  }
  std::cout << rep.render();
  save_allocation_log(coding, cfg.logPath);
  return rep.all_pass() ? kExitPass : kExitVerdict;
}

int cmd_classify(const RunConfig& cfg, const std::string& seqFile) {
  auto sched = cfg.schedule();
  auto coding = load_allocation_log(cfg.logPath);
  SetDescriptor desc{SetBase::Ext};
  std::vector<ConstructionRecord> seq;
  std::istringstream in(read_text_file(seqFile));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    seq.push_back(make_record(parse_tree(trim(line), sched, desc), sched));
  }
  auto c = classify_sequence(cfg.slot, seq, sched, coding);
  std::cout << "kind = " << kind_name(c.kind) << "\n";
  std::cout << "pairs = " << c.pairs << ", bare = " << c.bare
            << ", tail = " << c.tail << "\n";
  if (!c.reason.empty()) std::cout << "reason = " << c.reason << "\n";
  save_allocation_log(coding, cfg.logPath);
  return c.kind == SeqKind::Invalid ? kExitVerdict : kExitPass;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite, long n, long maxE) {
  Report rep;
  if (suite == "lsa2" && n > 0)
    rep = hat_equivalence_check(n, maxE > 0 ? maxE : 20);
  else {
    auto cache = load_cache(cfg.cachePath);
    rep = run_suite(suite, &cache);
    save_cache(cache, cfg.cachePath);
  }
  std::cout << rep.render();
  return rep.all_pass() ? kExitPass : kExitVerdict;
}

int cmd_cert(const RunConfig& cfg, const std::string& treeFile,
             const std::string& vecFile) {
  auto sched = cfg.schedule();
  SparseVector x = parse_vec(trim(read_text_file(vecFile)));
  ConstructionRecord rec;
  try {
    rec = make_record(parse_tree(trim(read_text_file(treeFile)), sched, cfg.desc()),
                      sched);
  } catch (const InvalidTree& e) {
    std::cout << "invalid certificate: " << e.what() << "\n";
    return kExitVerdict;
  }
  Rat value = evaluate(rec.vec, x);
  auto cache = load_cache(cfg.cachePath);
  long budget = std::max<long>(24, (long)x.support_size() + 8);
  NormEngine eng(sched, cfg.desc(), budget, &cache);
  Rat nrm = eng.norm(x).value;
  std::cout << "action = " << show_rat(value) << "\n";
  std::cout << "norm = " << show_rat(nrm) << "\n";
  save_cache(cache, cfg.cachePath);
  if (rabs(value) > nrm) {
    std::cout << "invalid certificate: action exceeds the norm\n";
    return kExitVerdict;
  }
  std::cout << (rabs(value) == nrm ? "certificate attains the norm\n"
                                   : "certificate is a valid lower bound\n");
  return kExitPass;
}

int cmd_suite_all(const RunConfig& cfg) {
  auto cache = load_cache(cfg.cachePath);
  std::string text = suite_all_text(&cache);
  std::cout << text;
  save_cache(cache, cfg.cachePath);
  if (!suite_all_pass(text)) return kExitVerdict;
  if (!cfg.fixturesDir.empty()) {
    std::string goldenPath = cfg.fixturesDir + "/suite_all.golden";
    std::ifstream probe(goldenPath);
    if (probe) {
      std::string golden = read_text_file(goldenPath);
      if (golden != text) {
        std::cout << "GOLDEN-MISMATCH against " << goldenPath << "\n";
        return kExitVerdict;
      }
      std::cout << "GOLDEN-MATCH " << goldenPath << "\n";
    }
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact-arithmetic engine for mixed-Tsirelson norming sets"};
  app.require_subcommand(1);
  std::string configPath;
  app.add_option("-c,--config", configPath, "line-based `key = value` config file");

  std::string vecFile, treeFile, seqFile, suiteName, suiteArg;
  long stage = 2, lsaN = 0, lsaMax = 0;

  auto* cNorm = app.add_subcommand("norm", "exact norm with certificate");
  cNorm->add_option("vector-file", vecFile)->required();
  auto* cGen = app.add_subcommand("gen", "materialize and validate a stage snapshot");
  cGen->add_option("stage", stage)->required();
  auto* cClassify = app.add_subcommand("classify", "sequence-kind verdict");
  cClassify->add_option("seq-file", seqFile)->required();
  auto* cVerify = app.add_subcommand("verify", "run a named check suite");
  cVerify->add_option("suite", suiteName)->required();
  cVerify->add_option("--n", lsaN, "family order (lsa2 only)");
  cVerify->add_option("--max", lsaMax, "universe bound (lsa2 only)");
  auto* cCert = app.add_subcommand("cert", "verify a certificate tree against a vector");
  cCert->add_option("tree-file", treeFile)->required();
  cCert->add_option("vector-file", vecFile)->required();
  auto* cSuite = app.add_subcommand("suite", "the full acceptance run");
  cSuite->add_option("which", suiteArg)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    RunConfig cfg = load_config(configPath);
    if (*cNorm) return cmd_norm(cfg, vecFile);
    if (*cGen) return cmd_gen(cfg, stage);
    if (*cClassify) return cmd_classify(cfg, seqFile);
    if (*cVerify) return cmd_verify(cfg, suiteName, lsaN, lsaMax);
    if (*cCert) return cmd_cert(cfg, treeFile, vecFile);
    if (*cSuite) {
      if (suiteArg != "all") throw InputError("usage: suite all");
      return cmd_suite_all(cfg);
    }
    return kExitInput;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const ScheduleExhausted& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const PoolExhausted& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
}
