#include "lipctl/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lipctl/controller1d.hpp"
#include "lipctl/controllermd.hpp"
#include "lipctl/errors.hpp"
#include "lipctl/feasibility.hpp"
#include "lipctl/fixedpoint.hpp"
#include "lipctl/harness.hpp"
#include "lipctl/sequences.hpp"

namespace lipctl::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kInput = 2;

struct Globals {
  std::uint64_t seed = 1;
  std::string out = "-";
  std::size_t cap = sequences::kDefaultCap;
};

void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.out == "-") {
    out << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw InputError("cannot open output file " + g.out);
  f << text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open output file " + path);
  f << text;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read " + path);
  return f;
}

std::vector<feasibility::ControlPair> load_pairs(const std::string& path, std::size_t& m, std::size_t& d) {
  auto f = open_in(path);
  return feasibility::read_pairs(f, &m, &d);
}

sequences::PointSeq load_seq(const std::string& path) {
  auto f = open_in(path);
  return sequences::read_seq(f);
}

// Box holding the origin and every x, padded by h.
geometry::Box sample_domain(const std::vector<feasibility::ControlPair>& pairs, std::size_t m, const Scalar& h) {
  Point lo(m, Scalar(0)), hi(m, Scalar(0));
  for (const auto& pr : pairs) {
    for (std::size_t k = 0; k < m; ++k) {
      lo[k] = std::min(lo[k], pr.x[k]);
      hi[k] = std::max(hi[k], pr.x[k]);
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    lo[k] -= h;
    hi[k] += h;
  }
  return geometry::Box(lo, hi);
}

std::vector<harness::SampledLipschitz> sample_family(std::size_t count, std::size_t m, std::size_t d,
                                                     const Scalar& j, const geometry::Box& domain, const Scalar& h,
                                                     std::uint64_t seed) {
  std::vector<harness::SampledLipschitz> fs;
  fs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    fs.push_back(harness::sample_lipschitz(m, d, j, domain, h, seed + i));
    if (fs.back().lipschitz_bound() > j) throw InternalError("sampled function fails its Lipschitz audit");
  }
  return fs;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controlling sequences for Lipschitz functions"};
  app.set_help_flag("--help", "print help and exit");
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output file, - for stdout")->capture_default_str();
  app.add_option("--cap", g.cap, "size cap for generated sequences")->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "generate a point sequence");
  std::string kind = "lattice";
  std::size_t gm = 1, gd = 1, gK = 4, glevels = 2;
  unsigned growth_pow = 3;
  std::string gR = "4", gc = "2";
  gen->add_option("--kind", kind, "lattice | pow2 | powergrid | sparse")
      ->check(CLI::IsMember({"lattice", "pow2", "powergrid", "sparse"}));
  gen->add_option("--m", gm, "dimension of the points");
  gen->add_option("--d", gd, "target dimension (pow2, sparse)");
  gen->add_option("--R", gR, "radius (lattice, powergrid)");
  gen->add_option("--K", gK, "number of scales (pow2)");
  gen->add_option("--c", gc, "exponent (powergrid)");
  gen->add_option("--levels", glevels, "levels (sparse)");
  gen->add_option("--growth-pow", growth_pow, "growth f(x) = floor(x)^p (sparse)");

  // density
  auto* density = app.add_subcommand("density", "counting function |{i : |x_i| <= n}| / n^d");
  std::string din;
  std::size_t dd = 1, nmax = 16;
  density->add_option("--in", din, "sequence file")->required();
  density->add_option("--d", dd, "exponent d")->required();
  density->add_option("--nmax", nmax, "largest n")->required();

  // control
  auto* control = app.add_subcommand("control", "build controlling pairs");
  std::string mode = "1d", cin, assignment_path;
  std::size_t cd = 1;
  unsigned long cJ = 1, cj = 1;
  long cn = -1;
  control->add_option("--mode", mode, "1d | md")->check(CLI::IsMember({"1d", "md"}));
  control->add_option("--in", cin, "sequence file")->required();
  control->add_option("--d", cd, "target dimension")->required();
  control->add_option("--J", cJ, "1d: schedule blocks j = 1..J");
  control->add_option("--j", cj, "1d with --n: single block; md: Lipschitz class");
  control->add_option("--n", cn, "1d: single block on [0, n]");
  control->add_option("--assignment", assignment_path, "md: write the ball assignment here");

  // evade
  auto* evade = app.add_subcommand("evade", "feasible-set trace and evader for a pair list");
  std::string ein, etrace, efunction;
  std::size_t ed = 0;
  evade->add_option("--in", ein, "pair file")->required();
  evade->add_option("--d", ed, "target dimension (default: from file)");
  evade->add_option("--trace", etrace, "trace CSV path");
  evade->add_option("--function", efunction, "evader output path");

  // verify
  auto* verify = app.add_subcommand("verify", "check that pairs control a Lipschitz class");
  bool exhaustive = false, sampled = false;
  std::string vpairs, vwitness, vj = "1", vn = "1", vh = "1/4";
  std::size_t vsamples = 100;
  auto* ex_flag = verify->add_flag("--exhaustive", exhaustive, "exact feasible-set oracle (m = 1)");
  verify->add_flag("--sampled", sampled, "random sampled functions")->excludes(ex_flag);
  verify->add_option("--pairs", vpairs, "pair file")->required();
  verify->add_option("--j", vj, "Lipschitz class");
  verify->add_option("--n", vn, "exhaustive: interval [0, n]");
  verify->add_option("--witness", vwitness, "exhaustive: write an evader here if one exists");
  verify->add_option("--samples", vsamples, "sampled: number of functions");
  verify->add_option("--h", vh, "sampled: grid step");

  // lemma verify
  auto* lemma = app.add_subcommand("lemma", "crossing-lemma tools");
  lemma->require_subcommand(1);
  auto* lverify = lemma->add_subcommand("verify", "find a boundary crossing of a moving map");
  std::string lmap, lh = "1/4";
  std::size_t lrandom = 0, lm = 2, ld = 2;
  double ll = 4, lt0 = 2.25, lt1 = 3, ltol = 0, lstep = 0;
  lverify->add_option("--map", lmap, "map file: 'movingmap 1 <l> <t0> <t1>' then a sampled function");
  lverify->add_option("--random", lrandom, "instead of --map: number of random maps");
  lverify->add_option("--m", lm, "random: domain dimension");
  lverify->add_option("--d", ld, "random: target dimension");
  lverify->add_option("--l", ll, "random: radius of B");
  lverify->add_option("--t0", lt0, "random: start of J");
  lverify->add_option("--t1", lt1, "random: end of J");
  lverify->add_option("--h", lh, "random: grid step");
  lverify->add_option("--tol", ltol, "residual tolerance (default 1e-6 l)");
  lverify->add_option("--grid-step", lstep, "coarse time step (default (t1 - t0) / 64)");

  // game
  auto* game = app.add_subcommand("game", "play sampled functions against a pair list");
  std::string gpairs, gj = "1", gh = "1/4";
  std::size_t gsamples = 100;
  bool glattice = false;
  game->add_option("--pairs", gpairs, "pair file")->required();
  game->add_option("--j", gj, "Lipschitz class");
  game->add_option("--h", gh, "grid step");
  game->add_option("--samples", gsamples, "number of functions");
  game->add_flag("--lattice", glattice, "play the lattice counterexample instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (gen->parsed()) {
      sequences::PointSeq s;
      if (kind == "lattice") {
        s = sequences::gen_lattice(gm, std::stol(gR), g.cap);
      } else if (kind == "pow2") {
        s = sequences::gen_pow2(gd, gK, g.cap);
      } else if (kind == "powergrid") {
        s = sequences::gen_power_grid(gm, parse_scalar(gc), parse_scalar(gR), g.cap);
      } else {
        auto growth = [growth_pow](const Scalar& x) { return pow_int(Scalar(floor_int(x)), growth_pow); };
        s = sequences::gen_sparse_levels(gm, gd, growth, glevels, g.cap).seq;
      }
      std::ostringstream os;
      sequences::write_seq(os, s);
      emit(g, out, os.str());
      return kOk;
    }

    if (density->parsed()) {
      auto s = load_seq(din);
      auto rep = sequences::counting_function(s, dd, nmax);
      std::ostringstream os;
      os << "#schema=lipctl-density/1 d=" << dd << " nmax=" << nmax << " points=" << s.size()
         << " sup_ratio=" << format_scalar(rep.sup_ratio()) << '\n';
      os << "n,count,ratio,running_sup\n";
      for (std::size_t n = 1; n <= nmax; ++n) {
        os << n << ',' << rep.counts[n - 1] << ',' << format_scalar(rep.ratios[n - 1]) << ','
           << format_scalar(rep.running_sup[n - 1]) << '\n';
      }
      emit(g, out, os.str());
      return kOk;
    }

    if (control->parsed()) {
      auto s = load_seq(cin);
      std::ostringstream os;
      if (mode == "1d") {
        if (s.m != 1) throw InputError("control --mode 1d needs a one-dimensional sequence");
        s = sequences::sorted_by_norm(s);
        std::vector<feasibility::ControlPair> pairs;
        if (cn >= 0) {
          std::vector<Scalar> xs;
          std::vector<std::size_t> labels;
          for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.points[i][0] < 0 || s.points[i][0] > Scalar(cn)) continue;
            xs.push_back(s.points[i][0]);
            labels.push_back(s.labels[i]);
          }
          pairs = controller1d::build_block(cj, static_cast<unsigned long>(cn), cd, xs, labels);
        } else {
          pairs = controller1d::build_schedule(s, cd, cJ).pairs();
        }
        feasibility::write_pairs(os, pairs, 1, cd);
      } else {
        auto a = controllermd::build_md(s, cj, cd);
        if (!assignment_path.empty()) {
          std::ostringstream as;
          controllermd::write_assignment(as, a);
          write_file(assignment_path, as.str());
        }
        feasibility::write_pairs(os, a.pairs, s.m, cd);
      }
      emit(g, out, os.str());
      return kOk;
    }

    if (evade->parsed()) {
      std::size_t m = 0, d = 0;
      auto pairs = feasibility::sort_by_radius(load_pairs(ein, m, d));
      if (ed != 0 && ed != d) throw InputError("--d differs from the pair file");
      auto params = feasibility::compute_params(pairs, d);
      auto trace = feasibility::evader_trace(pairs, d, params);
      auto report = feasibility::check_measure_bound(trace);
      std::ostringstream csv;
      feasibility::write_trace_csv(csv, trace, report);
      if (!etrace.empty()) write_file(etrace, csv.str());
      auto ev = feasibility::reconstruct_evader(trace);
      bool valid = ev.max_slope() <= params.beta;
      for (const auto& pr : trace.pairs) {
        Point v = ev.evaluate(norm_inf(pr.x));
        if (dist_inf(v, pr.y) < 1) valid = false;
      }
      std::ostringstream fn;
      feasibility::write_function(fn, ev);
      if (!efunction.empty()) write_file(efunction, fn.str());
      std::ostringstream os;
      os << "alpha " << format_scalar(params.alpha) << "\nbeta " << format_scalar(params.beta) << "\nsteps "
         << trace.regions.size() << "\nbound " << (report.ok ? "ok" : "VIOLATED") << "\nevader "
         << (valid ? "ok" : "INVALID") << '\n';
      if (etrace.empty()) os << csv.str();
      emit(g, out, os.str());
      return report.ok && valid ? kOk : kFail;
    }

    if (verify->parsed()) {
      if (exhaustive == sampled) throw InputError("verify needs exactly one of --exhaustive or --sampled");
      std::size_t m = 0, d = 0;
      auto pairs = load_pairs(vpairs, m, d);
      const Scalar j = parse_scalar(vj);
      std::ostringstream os;
      if (exhaustive) {
        if (m != 1) throw InputError("verify --exhaustive needs m = 1");
        auto verdict = feasibility::feasible_control_check(pairs, j, d, parse_scalar(vn));
        if (verdict.controlled) {
          os << "CONTROLLED emptied_at " << *verdict.emptied_at << '\n';
          emit(g, out, os.str());
          return kOk;
        }
        os << "NOT CONTROLLED\n";
        std::ostringstream ws;
        feasibility::write_function(ws, *verdict.witness);
        if (!vwitness.empty()) {
          write_file(vwitness, ws.str());
        } else {
          os << ws.str();
        }
        emit(g, out, os.str());
        return kFail;
      }
      const Scalar h = parse_scalar(vh);
      auto fs = sample_family(vsamples, m, d, j, sample_domain(pairs, m, h), h, g.seed);
      auto rep = harness::game_run(pairs, fs);
      harness::write_game_report(os, rep);
      emit(g, out, os.str());
      return rep.controlled_fraction == 1.0 ? kOk : kFail;
    }

    if (lverify->parsed()) {
      std::vector<fixedpoint::MovingMap> maps;
      if (!lmap.empty()) {
        auto f = open_in(lmap);
        std::string tag;
        int version = 0;
        double l = 0, t0 = 0, t1 = 0;
        if (!(f >> tag >> version >> l >> t0 >> t1) || tag != "movingmap" || version != 1)
          throw InputError("bad map header (expected 'movingmap 1 <l> <t0> <t1>')");
        maps.push_back(harness::moving_map_from(harness::read_sampled(f), l, t0, t1));
      } else if (lrandom > 0) {
        for (std::size_t i = 0; i < lrandom; ++i)
          maps.push_back(harness::random_moving_map(lm, ld, ll, lt0, lt1, parse_scalar(lh), g.seed + i));
      } else {
        throw InputError("lemma verify needs --map or --random");
      }
      fixedpoint::SearchOptions opts;
      opts.tol = ltol;
      opts.grid_step = lstep;
      std::ostringstream os;
      os << "#schema=lipctl-crossing/1 approximate=1\n";
      os << "map,t,z,y,sphere_residual,section_residual,displacement\n";
      bool all = true;
      for (std::size_t i = 0; i < maps.size(); ++i) {
        try {
          auto c = fixedpoint::find_crossing(maps[i], opts);
          auto vec = [](const fixedpoint::Vec& v) {
            std::ostringstream s;
            s.precision(12);
            for (std::size_t k = 0; k < v.size(); ++k) s << (k ? " " : "") << v[k];
            return s.str();
          };
          os.precision(12);
          os << i << ',' << c.t << ',' << vec(c.z) << ',' << vec(c.y) << ',' << c.sphere_residual << ','
             << c.section_residual << ',' << c.displacement << '\n';
        } catch (const NotFoundError& e) {
          all = false;
          os << i << ",not-found,,,,," << '\n';
          err << e.what() << '\n';
        }
      }
      emit(g, out, os.str());
      return all ? kOk : kFail;
    }

    if (game->parsed()) {
      std::size_t m = 0, d = 0;
      auto pairs = load_pairs(gpairs, m, d);
      std::vector<harness::SampledLipschitz> fs;
      if (glattice) {
        fs.push_back(harness::lattice_counterexample(pairs));
      } else {
        const Scalar h = parse_scalar(gh);
        fs = sample_family(gsamples, m, d, parse_scalar(gj), sample_domain(pairs, m, h), h, g.seed);
      }
      auto rep = harness::game_run(pairs, fs);
      std::ostringstream os;
      harness::write_game_report(os, rep);
      emit(g, out, os.str());
      return kOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::invalid_argument& e) {
    err << "error: bad number: " << e.what() << '\n';
    return kInput;
  } catch (const Error& e) {
    err << "failure: " << e.what() << '\n';
    return kFail;
  }
  return kInput;
}

}  // namespace lipctl::cli
