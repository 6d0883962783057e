#include <map>
#include <memory>
#include <thread>

#include "ptrs/inference.hpp"
#include "ptrs/syntax.hpp"

namespace ptrs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t key_hash(const ChoiceKey& key) { return fnv1a(key.rule + "|" + to_string(key.theta)); }

using Threshold = unsigned __int128;

/// ceil(cum_i * 2^64) for each cumulative weight, so u < threshold_i is the
/// exact test u / 2^64 < cum_i.
std::vector<Threshold> thresholds(const std::vector<Probability>& weights) {
  std::vector<Threshold> out;
  Rational cum = 0;
  mpz_class two64 = mpz_class(1) << 64;
  for (const Probability& w : weights) {
    cum += w.value();
    mpz_class num = cum.get_num() * two64;
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), cum.get_den().get_mpz_t());
    static_assert(sizeof(unsigned long) == 8);
    Threshold t = q == two64 ? Threshold{1} << 64 : static_cast<Threshold>(q.get_ui());
    out.push_back(t);
  }
  return out;
}

std::size_t pick(std::uint64_t u, const std::vector<Threshold>& th) {
  for (std::size_t i = 0; i < th.size(); ++i) {
    if (static_cast<Threshold>(u) < th[i]) return i + 1;
  }
  // Weights sum to 1, so the last threshold is 2^64; unreachable.
  return th.size();
}

std::uint64_t uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t var) {
  return splitmix64(splitmix64(splitmix64(seed) ^ sample) ^ var);
}

struct Variable {
  ChoiceKey key;
  std::uint64_t hash;
  std::vector<Threshold> thresholds;
};

/// Search outcomes keyed by the answers given so far. The engine is
/// deterministic, so the same answers produce the same next question.
struct TreeNode {
  bool leaf = false;
  Reach outcome = Reach::no;
  std::size_t var = 0;
  std::vector<int> children;
};

class Sampler {
 public:
  Sampler(const Model& m, const Term& s, const Term& t, const MonteCarloOptions& opts)
      : model_(m), s_(s), t_(t), opts_(opts) {}

  Reach run(std::uint64_t sample) {
    if (tree_.empty()) return explore(sample);
    int node = 0;
    while (true) {
      const TreeNode& n = tree_[static_cast<std::size_t>(node)];
      if (n.leaf) return n.outcome;
      const Variable& v = vars_[n.var];
      std::size_t a = pick(uniform(opts_.seed, sample, v.hash), v.thresholds);
      int child = n.children[a - 1];
      if (child < 0) return explore(sample);
      node = child;
    }
  }

 private:
  std::size_t variable_of(const ProbRule& r, const Substitution& theta) {
    ChoiceKey key{r.label, theta};
    auto it = var_index_.find(key);
    if (it != var_index_.end()) return it->second;
    std::vector<Probability> weights;
    for (const Alternative& a : r.alternatives) weights.push_back(a.prob);
    std::size_t id = vars_.size();
    vars_.push_back({key, key_hash(key), thresholds(weights)});
    var_index_.emplace(std::move(key), id);
    return id;
  }

  Reach explore(std::uint64_t sample) {
    std::vector<std::pair<std::size_t, std::size_t>> asked;
    std::map<std::size_t, std::size_t> fixed;
    ChoiceResolver resolve = [&](const ProbRule& r, const Substitution& theta) {
      std::size_t v = variable_of(r, theta);
      auto it = fixed.find(v);
      if (it != fixed.end()) return it->second;
      std::size_t a = pick(uniform(opts_.seed, sample, vars_[v].hash), vars_[v].thresholds);
      fixed.emplace(v, a);
      asked.emplace_back(v, a);
      return a;
    };
    Reach outcome = reachable_with_resolver(model_, s_, t_, opts_.budget, resolve);
    insert(asked, outcome);
    return outcome;
  }

  void insert(const std::vector<std::pair<std::size_t, std::size_t>>& asked, Reach outcome) {
    if (tree_.empty()) tree_.emplace_back();
    std::size_t node = 0;
    for (const auto& [v, a] : asked) {
      if (tree_[node].children.empty()) {
        tree_[node].var = v;
        tree_[node].children.assign(vars_[v].thresholds.size(), -1);
      }
      int child = tree_[node].children[a - 1];
      if (child < 0) {
        child = static_cast<int>(tree_.size());
        tree_[node].children[a - 1] = child;
        tree_.emplace_back();
      }
      node = static_cast<std::size_t>(child);
    }
    tree_[node].leaf = true;
    tree_[node].outcome = outcome;
  }

  const Model& model_;
  const Term& s_;
  const Term& t_;
  const MonteCarloOptions& opts_;
  std::vector<Variable> vars_;
  std::map<ChoiceKey, std::size_t> var_index_;
  std::vector<TreeNode> tree_;
};

struct Tally {
  std::size_t successes = 0;
  std::size_t unknown = 0;
};

}  // namespace

std::size_t draw_alternative(std::uint64_t seed, std::uint64_t sample, const ChoiceKey& key,
                             const std::vector<Probability>& weights) {
  return pick(uniform(seed, sample, key_hash(key)), thresholds(weights));
}

QueryResult mc_query(const Model& m, const Term& s, const Term& t, const MonteCarloOptions& opts) {
  Model g = ground_instances(m);
  std::size_t threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = std::max<std::size_t>(1, std::min(threads, opts.samples));
  std::vector<Tally> tallies(threads);
  auto work = [&](std::size_t w) {
    Sampler sampler(g, s, t, opts);
    for (std::size_t i = w; i < opts.samples; i += threads) {
      switch (sampler.run(i)) {
        case Reach::yes:
          ++tallies[w].successes;
          break;
        case Reach::unknown:
          ++tallies[w].unknown;
          break;
        case Reach::no:
          break;
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (std::thread& th : pool) th.join();
  }
  QueryResult r;
  r.kind = ResultKind::estimate;
  r.samples = opts.samples;
  for (const Tally& tl : tallies) {
    r.successes += tl.successes;
    r.unknown += tl.unknown;
  }
  r.estimate = opts.samples ? Rational(r.successes, r.samples) : Rational(0);
  r.estimate.canonicalize();
  r.complete = r.unknown == 0;
  if (r.unknown) {
    r.diagnostics.push_back({std::to_string(r.unknown) + " samples were undecided within the budget", std::nullopt});
  }
  return r;
}

}  // namespace ptrs
