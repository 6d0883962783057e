#include "ptrs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "ptrs/inference.hpp"
#include "ptrs/syntax.hpp"

namespace ptrs {

namespace {

struct Invocation {
  std::string model_path;
  std::string from;
  std::string to;
  std::string method = "exact";
  std::string backend = "dd";
  std::string strategy = "exhaustive";
  std::size_t max_depth = SearchBudget{}.max_depth;
  std::size_t max_derivations = SearchBudget{}.max_derivations;
  std::optional<std::size_t> depth;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  int precision = kDefaultPrecision;
  bool show_explanations = false;
  bool prune_infeasible = false;
  bool keep_zero = false;
  std::vector<std::string> var_order;
};

/// Distinguishes failures while loading the model from failures of the query.
struct ModelError {
  Error error;
};

std::string located(const std::string& path, const Error& e) {
  std::string out = path + ":";
  if (e.location()) out += std::to_string(e.location()->line) + ":" + std::to_string(e.location()->column) + ":";
  return out + " " + std::string(kind_name(e.kind())) + ": " + e.message();
}

Model load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError{Error(ErrorKind::syntax, "cannot read file")};
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    Model m = parse_model(buf.str());
    ground_instances(m);
    return m;
  } catch (const Error& e) {
    throw ModelError{e};
  }
}

SearchBudget budget_of(const Invocation& inv) {
  SearchBudget b;
  b.max_depth = inv.max_depth;
  b.max_derivations = inv.max_derivations;
  b.prune_zero_prob = !inv.keep_zero;
  b.prune_infeasible = inv.prune_infeasible;
  b.strategy = inv.strategy == "innermost" ? Strategy::innermost : Strategy::exhaustive;
  return b;
}

void print_warnings(const std::vector<Diagnostic>& ds, std::ostream& err) {
  for (const Diagnostic& d : ds) {
    err << "warning: ";
    if (d.location) err << d.location->line << ":" << d.location->column << ": ";
    err << d.message << "\n";
  }
}

/// Descending probability, then choice order.
std::vector<std::pair<CompositeChoice, Probability>> ranked(const Model& m, const std::set<CompositeChoice>& k) {
  std::vector<std::pair<CompositeChoice, Probability>> out;
  for (const CompositeChoice& c : k) out.emplace_back(c, prob_of_choice(m, c));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

void print_explanations(const Model& m, const std::set<CompositeChoice>& k, int precision, std::ostream& out) {
  for (const auto& [c, p] : ranked(m, k)) out << render(c) << "  " << render(p, precision) << "\n";
}

int query(const Invocation& inv, std::ostream& out, std::ostream& err) {
  Model m = load(inv.model_path);
  print_warnings(m.warnings(), err);
  Term s = parse_term(inv.from, &m);
  Term t = parse_term(inv.to, &m);
  QueryOptions opts;
  opts.budget = budget_of(inv);
  opts.method = inv.backend == "split" ? ExactMethod::split : ExactMethod::dd;
  opts.var_order = inv.var_order;

  if (inv.method == "exact") {
    QueryResult r = exact_query(m, s, t, opts);
    if (inv.show_explanations) print_explanations(ground_instances(m), *r.explanations, inv.precision, out);
    print_warnings(r.diagnostics, err);
    if (!r.complete) out << "% warning: explanation search truncated; P is a lower bound\n";
    out << "P = " << render(r.value, inv.precision) << "\n";
  } else if (inv.method == "worlds") {
    QueryResult r = worlds_query(m, s, t, opts);
    print_warnings(r.diagnostics, err);
    if (r.kind == ResultKind::exact) {
      out << "P = " << render(r.value, inv.precision) << "\n";
    } else {
      out << "P in [" << render(r.low, inv.precision) << ", " << render(r.high, inv.precision) << "]\n";
    }
  } else if (inv.method == "bounds") {
    std::size_t n = inv.depth.value_or(inv.max_depth);
    QueryResult r = bounds_query(m, s, t, n, opts);
    if (inv.show_explanations) print_explanations(ground_instances(m), *r.explanations, inv.precision, out);
    print_warnings(r.diagnostics, err);
    out << "P in [" << render(r.low, inv.precision) << ", " << render(r.high, inv.precision) << "]\n";
  } else {
    MonteCarloOptions mc;
    mc.budget = opts.budget;
    mc.samples = inv.samples;
    mc.seed = inv.seed;
    mc.threads = inv.threads;
    QueryResult r = mc_query(m, s, t, mc);
    print_warnings(r.diagnostics, err);
    if (r.unknown) out << "% warning: " << r.unknown << " samples undecided within the budget\n";
    out << "P ~= " << render(r.estimate, inv.precision) << " (" << r.successes << "/" << r.samples << ")\n";
  }
  return kExitOk;
}

int worlds(const Invocation& inv, std::ostream& out, std::ostream& err) {
  Model m = load(inv.model_path);
  print_warnings(m.warnings(), err);
  Model g = ground_instances(m);
  std::size_t k = 0;
  Rational total = 0;
  for_each_selection(g, kDefaultWorldCap, [&](const CompositeChoice& sel, const Probability& p) {
    out << "W" << ++k << ": " << render(sel) << "  " << render(p, inv.precision) << "\n";
    total += p.value();
  });
  out << "total = " << render(total, inv.precision) << "\n";
  return kExitOk;
}

int explain(const Invocation& inv, std::ostream& out, std::ostream& err) {
  Model m = load(inv.model_path);
  print_warnings(m.warnings(), err);
  Term s = parse_term(inv.from, &m);
  Term t = parse_term(inv.to, &m);
  QueryOptions opts;
  opts.budget = budget_of(inv);
  opts.var_order = inv.var_order;
  QueryResult r = exact_query(m, s, t, opts);
  print_explanations(ground_instances(m), *r.explanations, inv.precision, out);
  print_warnings(r.diagnostics, err);
  if (!r.complete) out << "% warning: explanation search truncated; P is a lower bound\n";
  out << "P = " << render(r.value, inv.precision) << "\n";
  return kExitOk;
}

int check(const Invocation& inv, std::ostream& out, std::ostream& err) {
  Model m = load(inv.model_path);
  std::size_t prob = m.prob_rules().size();
  std::size_t reg = m.reg_rules().size();
  std::size_t constructors = 0, defined = 0;
  for (const auto& [f, c] : m.classification()) (c == SymbolClass::constructor ? constructors : defined)++;
  out << "ok: " << prob << " probabilistic rules, " << reg << " regular rules, " << defined
      << " defined symbols, " << constructors << " constructors\n";
  try {
    std::size_t n = world_count(ground_instances(m));
    out << "worlds: " << n << "\n";
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::unsupported_ungrounded_rule) {
      out << "worlds: unbounded (rules grounded during rewriting)\n";
    } else if (e.kind() == ErrorKind::world_count_exceeds_limit) {
      out << "worlds: more than " << kDefaultWorldCap << "\n";
    } else {
      throw ModelError{e};
    }
  }
  for (const Diagnostic& d : m.warnings()) {
    out << "warning: ";
    if (d.location) out << d.location->line << ":" << d.location->column << ": ";
    out << d.message << "\n";
  }
  (void)err;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic term rewriting: explanations and probabilities of reachability s ->* t."};
  app.name("ptrs");
  app.require_subcommand(1);
  Invocation inv;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("MODEL", inv.model_path, "Model file (.ptrs)")->required();
  };
  auto add_query_terms = [&](CLI::App* sub) {
    sub->add_option("--from", inv.from, "Start term s")->required();
    sub->add_option("--to", inv.to, "Target term t")->required();
  };
  auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--max-depth", inv.max_depth, "Step bound of the search")
        ->default_val(inv.max_depth)
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-derivations", inv.max_derivations, "Cap on expanded search states")
        ->default_val(inv.max_derivations)
        ->check(CLI::PositiveNumber);
    sub->add_option("--strategy", inv.strategy, "Rewrite strategy")
        ->default_val(inv.strategy)
        ->check(CLI::IsMember({"exhaustive", "innermost"}));
    sub->add_flag("--prune-infeasible", inv.prune_infeasible, "Cut branches that provably cannot reach the target");
    sub->add_flag("--keep-zero", inv.keep_zero, "Also explore alternatives of probability 0");
    sub->add_option("--var-order", inv.var_order, "Rule labels placed first in the decision diagram order")
        ->delimiter(',');
  };
  auto add_precision = [&](CLI::App* sub) {
    sub->add_option("--precision", inv.precision, "Digits of rounded decimals")
        ->default_val(inv.precision)
        ->check(CLI::Range(0, 100));
  };

  CLI::App* q = app.add_subcommand("query", "Probability of s ->* t");
  add_model(q);
  add_query_terms(q);
  q->add_option("--method", inv.method, "exact, worlds, mc or bounds")
      ->default_val(inv.method)
      ->check(CLI::IsMember({"exact", "worlds", "mc", "bounds"}));
  CLI::Option* backend = q->add_option("--exact-backend", inv.backend, "Exact method: dd or split")
                             ->default_val(inv.backend)
                             ->check(CLI::IsMember({"dd", "split"}));
  add_budget(q);
  CLI::Option* depth = q->add_option("--depth", inv.depth, "Depth n of the bounds (default: --max-depth)");
  CLI::Option* samples = q->add_option("--samples", inv.samples, "Monte Carlo samples")
                             ->default_val(inv.samples)
                             ->check(CLI::PositiveNumber);
  CLI::Option* seed = q->add_option("--seed", inv.seed, "Monte Carlo seed")->default_val(inv.seed);
  CLI::Option* threads = q->add_option("--threads", inv.threads, "Monte Carlo workers (0: all cores)")
                             ->default_val(inv.threads);
  add_precision(q);
  q->add_flag("--show-explanations", inv.show_explanations, "Print the explanations with their probabilities");

  CLI::App* w = app.add_subcommand("worlds", "List every world with its probability");
  add_model(w);
  add_precision(w);

  CLI::App* e = app.add_subcommand("explain", "Explanations of s ->* t, most likely first");
  add_model(e);
  add_query_terms(e);
  add_budget(e);
  add_precision(e);

  CLI::App* c = app.add_subcommand("check", "Parse and validate a model");
  add_model(c);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (q->parsed()) {
      auto misplaced = [&](CLI::Option* opt, const char* method) {
        if (opt->count() > 0 && inv.method != method) {
          throw CLI::ValidationError(opt->get_name(), std::string("only valid with --method ") + method);
        }
      };
      misplaced(samples, "mc");
      misplaced(seed, "mc");
      misplaced(threads, "mc");
      misplaced(backend, "exact");
      misplaced(depth, "bounds");
    }
  } catch (const CLI::ParseError& pe) {
    int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (q->parsed()) return query(inv, out, err);
    if (w->parsed()) return worlds(inv, out, err);
    if (e->parsed()) return explain(inv, out, err);
    return check(inv, out, err);
  } catch (const ModelError& me) {
    err << "error: " << located(inv.model_path, me.error) << "\n";
    return kExitModel;
  } catch (const Error& qe) {
    err << "error: " << kind_name(qe.kind()) << ": " << qe.message() << "\n";
    return kExitQuery;
  }
}

}  // namespace ptrs
