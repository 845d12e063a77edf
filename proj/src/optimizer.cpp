#include "epizoo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "epizoo/rng.hpp"

namespace epizoo {

const char* method_name(SearchMethod m) {
    switch (m) {
        case SearchMethod::BruteForce: return "brute_force";
        case SearchMethod::Greedy: return "greedy";
        case SearchMethod::Random: return "random";
    }
    return "?";
}

const char* objective_name(Objective o) {
    switch (o) {
        case Objective::Arn: return "arn";
        case Objective::Mi: return "mi";
        case Objective::Pdi: return "pdi";
        case Objective::Weighted: return "weighted";
    }
    return "?";
}

Objective parse_objective(const std::string& s) {
    if (s == "arn") return Objective::Arn;
    if (s == "mi") return Objective::Mi;
    if (s == "pdi") return Objective::Pdi;
    if (s == "weighted") return Objective::Weighted;
    throw std::invalid_argument("unknown objective '" + s + "'");
}

namespace {

std::string allocation_string(const Allocation& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(a[i]);
    }
    return s + ")";
}

}  // namespace

EvaluationError::EvaluationError(Allocation a, const std::string& what)
    : std::runtime_error("evaluation of " + allocation_string(a) + " failed: " + what),
      allocation_(std::move(a)) {}

void AllocationProblem::validate() const {
    if (budget < 0) throw std::invalid_argument("budget must be >= 0");
    if (centers == 0 && budget > 0) throw std::invalid_argument("budget needs at least one center");
    if (!objective) throw std::invalid_argument("allocation problem has no objective");
}

std::uint64_t composition_count(std::int64_t b, std::size_t n) {
    if (b < 0) return 0;
    if (n == 0) return b == 0 ? 1 : 0;
    // C(b + k, k) built incrementally for k = 1..n-1; each partial is an integer.
    const std::uint64_t k_max = n - 1;
    std::uint64_t c = 1;
    for (std::uint64_t k = 1; k <= k_max; ++k) {
        const std::uint64_t num = static_cast<std::uint64_t>(b) + k;
        const std::uint64_t g = std::gcd(c, k);
        const std::uint64_t reduced_c = c / g;
        const std::uint64_t reduced_k = k / g;
        // num is divisible by reduced_k once c/g and k/g are coprime.
        const std::uint64_t factor = num / reduced_k;
        if (reduced_c > std::numeric_limits<std::uint64_t>::max() / factor)
            return std::numeric_limits<std::uint64_t>::max();
        c = reduced_c * factor;
    }
    return c;
}

namespace {

bool visit_rec(Allocation& a, std::size_t pos, std::int64_t left,
               const std::function<bool(const Allocation&)>& visit) {
    if (pos + 1 == a.size()) {
        a[pos] = left;
        return visit(a);
    }
    for (std::int64_t v = left; v >= 0; --v) {
        a[pos] = v;
        if (!visit_rec(a, pos + 1, left - v, visit)) return false;
    }
    return true;
}

}  // namespace

void for_each_allocation(std::int64_t b, std::size_t n,
                         const std::function<bool(const Allocation&)>& visit) {
    if (b < 0) return;
    if (n == 0) {
        if (b == 0) visit({});
        return;
    }
    Allocation a(n, 0);
    visit_rec(a, 0, b, visit);
}

std::vector<Allocation> enumerate_allocations(std::int64_t b, std::size_t n) {
    std::vector<Allocation> out;
    for_each_allocation(b, n, [&](const Allocation& a) {
        out.push_back(a);
        return true;
    });
    return out;
}

double evaluate(const Allocation& a, const AllocationProblem& problem) {
    std::int64_t sum = 0;
    for (auto v : a) {
        if (v < 0) throw std::invalid_argument("negative amount in allocation " + allocation_string(a));
        sum += v;
    }
    if (a.size() != problem.centers || sum != problem.budget)
        throw std::invalid_argument("allocation " + allocation_string(a) + " does not match the problem");
    try {
        return problem.objective(a);
    } catch (const EvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw EvaluationError(a, e.what());
    }
}

SearchResult brute_force(const AllocationProblem& problem) {
    problem.validate();
    const auto count = composition_count(problem.budget, problem.centers);
    if (count >= problem.brute_force_threshold)
        throw std::invalid_argument("brute force refused: " + std::to_string(count) +
                                    " allocations; use greedy");
    SearchResult best;
    best.method = SearchMethod::BruteForce;
    best.value = std::numeric_limits<double>::infinity();
    bool have = false;
    for_each_allocation(problem.budget, problem.centers, [&](const Allocation& a) {
        const double v = evaluate(a, problem);
        ++best.evaluations;
        if (!have || v < best.value) {
            best.allocation = a;
            best.value = v;
            have = true;
        }
        return true;
    });
    return best;
}

SearchResult greedy(const AllocationProblem& problem) {
    problem.validate();
    if (problem.budget < 1) throw std::invalid_argument("greedy needs a budget of at least 1");
    SearchResult out;
    out.method = SearchMethod::Greedy;
    Allocation current(problem.centers, 0);
    // Each round scores partial allocations, so the objective sees the budget
    // placed so far rather than the full one.
    AllocationProblem partial = problem;
    for (std::int64_t round = 0; round < problem.budget; ++round) {
        partial.budget = round + 1;
        std::size_t chosen = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < problem.centers; ++k) {
            current[k] += 1;
            const double v = evaluate(current, partial);
            ++out.evaluations;
            current[k] -= 1;
            if (k == 0 || v < best) {
                best = v;
                chosen = k;
            }
        }
        current[chosen] += 1;
        out.rounds.push_back({static_cast<std::size_t>(round), chosen, best});
        out.value = best;
    }
    out.allocation = current;
    return out;
}

Allocation draw_allocation(std::int64_t b, std::size_t n, std::uint64_t seed) {
    if (b < 0) throw std::invalid_argument("budget must be >= 0");
    if (n == 0) {
        if (b > 0) throw std::invalid_argument("budget needs at least one center");
        return {};
    }
    // Stars and bars: n-1 bar positions among b+n-1 slots, drawn by Floyd's method.
    Rng rng(stream_seed(seed, 0xA110C));
    const std::uint64_t slots = static_cast<std::uint64_t>(b) + n - 1;
    const std::uint64_t bars = n - 1;
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = slots - bars; j < slots; ++j) {
        const std::uint64_t t = uniform_index(rng, j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    Allocation a;
    a.reserve(n);
    std::int64_t prev = -1;
    for (auto pos : chosen) {
        a.push_back(std::int64_t(pos) - prev - 1);
        prev = std::int64_t(pos);
    }
    a.push_back(std::int64_t(slots) - prev - 1);
    return a;
}

SearchResult random_allocation(const AllocationProblem& problem, std::uint64_t seed) {
    problem.validate();
    SearchResult out;
    out.method = SearchMethod::Random;
    out.allocation = draw_allocation(problem.budget, problem.centers, seed);
    out.value = evaluate(out.allocation, problem);
    out.evaluations = 1;
    return out;
}

SearchResult optimize(const AllocationProblem& problem) {
    problem.validate();
    if (composition_count(problem.budget, problem.centers) < problem.brute_force_threshold)
        return brute_force(problem);
    return greedy(problem);
}

std::vector<std::int64_t> apportion(const Allocation& units, std::int64_t total) {
    if (total < 0) throw std::invalid_argument("apportion: total must be >= 0");
    std::int64_t sum = 0;
    for (auto u : units) {
        if (u < 0) throw std::invalid_argument("apportion: negative units");
        sum += u;
    }
    std::vector<std::int64_t> out(units.size(), 0);
    if (sum == 0) {
        if (total > 0) throw std::invalid_argument("apportion: no units to scale");
        return out;
    }
    std::vector<std::pair<double, std::size_t>> rem;
    std::int64_t given = 0;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const long double exact = static_cast<long double>(units[i]) * total / sum;
        out[i] = static_cast<std::int64_t>(std::floor(exact));
        given += out[i];
        rem.emplace_back(double(exact - out[i]), i);
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t r = 0; given < total; ++r, ++given) out[rem[r % rem.size()].second] += 1;
    return out;
}

nlohmann::json search_manifest(const AllocationProblem& problem, const SearchResult& result) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : result.rounds)
        rounds.push_back({{"round", r.round}, {"center", r.chosen_center}, {"value", r.value}});
    return {{"problem",
             {{"budget", problem.budget},
              {"centers", problem.centers},
              {"kind", problem.kind == EipKind::Vaccination ? "vaccination" : "dilution"},
              {"brute_force_threshold", problem.brute_force_threshold},
              {"composition_count", composition_count(problem.budget, problem.centers)}}},
            {"method", method_name(result.method)},
            {"evaluations", result.evaluations},
            {"rounds", rounds},
            {"allocation", result.allocation},
            {"objective", result.value}};
}

}  // namespace epizoo
