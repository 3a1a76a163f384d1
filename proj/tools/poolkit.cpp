#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "poolkit/bench.hpp"
#include "poolkit/exact.hpp"
#include "poolkit/tightening.hpp"

using namespace poolkit;

namespace {

std::vector<std::string> split_methods(const std::string& s) {
  // commas inside parentheses belong to the inequality space, e.g. Vab(x,r)
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pooling-problem relaxations, restrictions and bound tightening"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "solve an instance x method x obbt grid");
  std::string inst_dir, methods = "F1:S,F2:S,F3:S,F4:S", obbt = "off", out_csv;
  std::vector<std::string> inst_files;
  double time_limit = 3600.0;
  int threads = 1;
  std::string cache;
  bool no_generalize = false;
  run->add_option("--instances", inst_dir, "directory of instance JSON files");
  run->add_option("--instance", inst_files, "single instance file (repeatable)");
  run->add_option("--methods", methods, "comma-separated method list");
  run->add_option("--obbt", obbt, "on, off or both")->check(CLI::IsMember({"on", "off", "both"}));
  run->add_option("--time-limit", time_limit, "seconds per solve");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_csv, "CSV output path");
  run->add_option("--bounds-cache", cache, "directory for cached OBBT bounds");
  run->add_flag("--no-generalize", no_generalize, "keep the instance arcs as given");

  // tighten
  auto* tighten = app.add_subcommand("tighten", "compute bound updates");
  std::string mining_path, instance_path, bounds_out, relax = "F4:T";
  bool fixpoint = false;
  auto* mopt = tighten->add_option("--mining", mining_path, "mining schedule JSON");
  auto* iopt = tighten->add_option("--instance", instance_path, "pooling instance JSON (OBBT)");
  mopt->excludes(iopt);
  tighten->add_option("--relax", relax, "LP relaxation for OBBT");
  tighten->add_option("--threads", threads, "OBBT workers")->check(CLI::PositiveNumber);
  tighten->add_option("--out", bounds_out, "bound update JSON");
  tighten->add_flag("--fixpoint", fixpoint, "repeat the mining pass until nothing changes");

  // convert-mining
  auto* conv = app.add_subcommand("convert-mining", "mining schedule to pooling instance");
  std::string sched_path, conv_out;
  double penalty = 1.0;
  conv->add_option("schedule", sched_path, "mining schedule JSON")->required();
  conv->add_option("--out", conv_out, "instance JSON");
  conv->add_option("--penalty", penalty, "default violation penalty");

  // solve
  auto* one = app.add_subcommand("solve", "solve one instance with one method");
  std::string one_inst, one_method = "EXACT:T", dump_path;
  one->add_option("instance", one_inst, "instance JSON")->required();
  one->add_option("--method", one_method, "method string");
  one->add_option("--time-limit", time_limit, "seconds");
  one->add_option("--dump", dump_path, "write the model in canonical text form");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      GridConfig cfg;
      if (!inst_dir.empty()) cfg.instances = list_instances(inst_dir);
      cfg.instances.insert(cfg.instances.end(), inst_files.begin(), inst_files.end());
      cfg.methods = split_methods(methods);
      for (const auto& m : cfg.methods) parse_method(m);
      cfg.obbt = obbt == "on" ? std::vector<bool>{true}
                 : obbt == "off" ? std::vector<bool>{false}
                                 : std::vector<bool>{false, true};
      cfg.time_limit = time_limit;
      cfg.threads = threads;
      cfg.bounds_cache = cache;
      cfg.generalize = !no_generalize;
      const auto records = run_grid(cfg);
      std::cerr << format_table(records);
      write_text(out_csv, records_to_csv(records));
      for (const auto& r : records)
        if (r.errored()) return 1;
      return 0;
    }
    if (*tighten) {
      BoundUpdate upd;
      if (!mining_path.empty()) {
        upd = mining_tighten(convert_mining(parse_mining(mining_path)), fixpoint);
      } else if (!instance_path.empty()) {
        upd = obbt_recipe(generalize(parse_instance(instance_path)), parse_method(relax), threads);
      } else {
        throw std::runtime_error("tighten needs --mining or --instance");
      }
      std::cerr << upd.num_changed() << " of " << upd.entries.size() << " intervals tightened\n";
      write_text(bounds_out, bound_update_to_json(upd));
      return 0;
    }
    if (*conv) {
      write_text(conv_out, instance_to_json(convert_mining(parse_mining(sched_path), penalty)));
      return 0;
    }
    if (*one) {
      const PoolingInstance inst = parse_instance(one_inst);
      const MethodSpec spec = parse_method(one_method);
      if (spec.kind == MethodKind::kExact) {
        ExactOptions opt;
        opt.basis = spec.basis;
        opt.time_limit = time_limit;
        const ExactResult r = solve_exact(inst, opt);
        std::printf("%s %s objective=%.10g bound=%.10g seconds=%.3f\n", inst.name.c_str(),
                    std::string(to_string(r.status)).c_str(), r.objective, r.dual_bound, r.seconds);
        return r.status == SolveStatus::kError ? 1 : 0;
      }
      const BuiltModel bm = build_method(inst, spec);
      if (!dump_path.empty()) write_text(dump_path, dump_model(bm.ir));
      SolveParams params;
      params.time_limit_s = time_limit;
      const SolveResult r = solve(bm.ir, params);
      std::printf("%s %s %s objective=%.10g bound=%.10g seconds=%.3f\n", inst.name.c_str(),
                  spec.str().c_str(), std::string(to_string(r.status)).c_str(), r.objective,
                  r.dual_bound, r.seconds);
      return r.status == SolveStatus::kError ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "poolkit: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
