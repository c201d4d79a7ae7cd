#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tutor/portfolio.hpp"

namespace tutor {

struct CohortSpec {
    std::size_t n = 30;
    double mean = 72.0;
    double std_dev = 8.0;
    std::uint64_t seed = 42;
    std::vector<std::string> prerequisite_subjects{"C108", "C205"};
    std::string target_subject = "C315";
    std::size_t progress_weeks = 2;
};

/// Normal draws from std::mt19937_64 through the Box-Muller transform.
/// Uniforms are (x >> 11) * 2^-53; each pair (u1, u2) yields
/// sqrt(-2 ln(1 - u1)) * cos(2 pi u2) and then the matching sine term.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
    double next(double mean, double std_dev);

private:
    double uniform();

    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

struct CohortStudent {
    StudentPortfolio portfolio;
    std::optional<SkillTier> tier;  // empty when no mark passes
};

struct Cohort {
    CohortSpec spec;
    std::vector<CohortStudent> students;
};

/// Students "S001".., each with one prerequisite-final mark per prerequisite
/// subject then one tutorial mark per week, drawn in that order, clipped to
/// [0, 100] and rounded to one decimal. Throws InvalidArgument for
/// std_dev <= 0.
Cohort generate_cohort(const CohortSpec& spec);

/// Line-delimited JSON: a {"cohort_spec": ...} header line, then one
/// {"student_id", "tier", "records"} line per student.
std::string cohort_to_jsonl(const Cohort& cohort);
Cohort cohort_from_jsonl_file(const std::string& path);

std::vector<StudentPortfolio> portfolios_of(const Cohort& cohort);

}  // namespace tutor
