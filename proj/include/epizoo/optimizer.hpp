#pragma once

// Budget allocation search over per-center integer compositions.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace epizoo {

using Allocation = std::vector<std::int64_t>;

enum class EipKind { Vaccination, Dilution };
enum class Objective { Arn, Mi, Pdi, Weighted };
enum class SearchMethod { BruteForce, Greedy, Random };

const char* method_name(SearchMethod m);
const char* objective_name(Objective o);
Objective parse_objective(const std::string& s);

struct ObjectiveWeights {
    double arn = 1.0;
    double mi = 0.0;
    double pdi = 0.0;
};

/// Thrown when an objective evaluation fails; carries the offending allocation.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(Allocation a, const std::string& what);
    const Allocation& allocation() const { return allocation_; }

private:
    Allocation allocation_;
};

/// b identical units over n centers. The objective maps a unit composition to
/// a scalar to minimize and must be deterministic (common random numbers).
struct AllocationProblem {
    std::int64_t budget = 0;
    std::size_t centers = 0;
    EipKind kind = EipKind::Vaccination;
    std::function<double(const Allocation&)> objective;
    std::size_t brute_force_threshold = 1000;

    void validate() const;
};

/// C(b + n - 1, n - 1); saturates at UINT64_MAX.
std::uint64_t composition_count(std::int64_t b, std::size_t n);

/// Visits every composition once, lexicographically descending:
/// (b,0,..,0) first, (0,..,0,b) last. Stops early when the visitor returns false.
void for_each_allocation(std::int64_t b, std::size_t n,
                         const std::function<bool(const Allocation&)>& visit);
std::vector<Allocation> enumerate_allocations(std::int64_t b, std::size_t n);

struct RoundTrace {
    std::size_t round = 0;
    std::size_t chosen_center = 0;
    double value = 0.0;
};

struct SearchResult {
    Allocation allocation;
    double value = 0.0;
    SearchMethod method = SearchMethod::BruteForce;
    std::size_t evaluations = 0;
    std::vector<RoundTrace> rounds;  ///< greedy only
};

double evaluate(const Allocation& a, const AllocationProblem& problem);

/// Global argmin; ties go to the first allocation in enumeration order.
/// Throws std::invalid_argument when the count reaches the threshold.
SearchResult brute_force(const AllocationProblem& problem);

/// b rounds of one unit each to the best center; ties go to the lowest index.
SearchResult greedy(const AllocationProblem& problem);

/// Uniform draw over all compositions, then evaluated.
Allocation draw_allocation(std::int64_t b, std::size_t n, std::uint64_t seed);
SearchResult random_allocation(const AllocationProblem& problem, std::uint64_t seed);

/// Brute force below the threshold, greedy otherwise.
SearchResult optimize(const AllocationProblem& problem);

/// Scales unit counts to integer amounts summing to exactly `total`, by
/// largest remainder; leftover ties go to the lowest index.
std::vector<std::int64_t> apportion(const Allocation& units, std::int64_t total);

nlohmann::json search_manifest(const AllocationProblem& problem, const SearchResult& result);

}  // namespace epizoo
