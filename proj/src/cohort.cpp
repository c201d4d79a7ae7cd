#include "tutor/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tutor/error.hpp"
#include "tutor/json_codec.hpp"

namespace tutor {

double NormalSampler::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalSampler::next(double mean, double std_dev) {
    if (spare_) {
        const double z = *spare_;
        spare_.reset();
        return mean + std_dev * z;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return mean + std_dev * radius * std::cos(angle);
}

namespace {

double clip_and_round(double mark) {
    mark = std::clamp(mark, 0.0, 100.0);
    return std::round(mark * 10.0) / 10.0;
}

std::string student_id(std::size_t index, std::size_t n) {
    const int width = std::max(3, static_cast<int>(std::to_string(n).size()));
    return fmt::format("S{:0{}}", index + 1, width);
}

}  // namespace

Cohort generate_cohort(const CohortSpec& spec) {
    if (!(spec.std_dev > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "cohort std_dev must be positive");
    }
    Cohort cohort;
    cohort.spec = spec;
    NormalSampler sampler(spec.seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
        StudentPortfolio p(student_id(i, spec.n));
        for (const auto& subject : spec.prerequisite_subjects) {
            p = p.record_assessment({subject, "final", Mark(clip_and_round(sampler.next(spec.mean, spec.std_dev))),
                                     AssessmentKind::PrerequisiteFinal, "2024-11-29T00:00:00Z"});
        }
        for (std::size_t week = 1; week <= spec.progress_weeks; ++week) {
            p = p.record_assessment({spec.target_subject, fmt::format("week{}", week),
                                     Mark(clip_and_round(sampler.next(spec.mean, spec.std_dev))),
                                     AssessmentKind::Tutorial,
                                     fmt::format("2025-03-{:02}T00:00:00Z", 7 * week)});
        }
        CohortStudent student{std::move(p), std::nullopt};
        try {
            student.tier = derive_tier(student.portfolio);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientData) throw;
        }
        cohort.students.push_back(std::move(student));
    }
    return cohort;
}

std::string cohort_to_jsonl(const Cohort& cohort) {
    const auto& s = cohort.spec;
    Json header = {{"cohort_spec",
                    {{"n", s.n},
                     {"mean", s.mean},
                     {"std_dev", s.std_dev},
                     {"seed", s.seed},
                     {"prerequisite_subjects", s.prerequisite_subjects},
                     {"target_subject", s.target_subject},
                     {"progress_weeks", s.progress_weeks}}}};
    std::string out = header.dump() + "\n";
    for (const auto& student : cohort.students) {
        Json records = Json::array();
        for (const auto* set : {&student.portfolio.prior_records(), &student.portfolio.progress_records()}) {
            for (const auto& r : *set) records.push_back(record_to_json(r));
        }
        Json line = {{"student_id", student.portfolio.student_id()},
                     {"tier", student.tier ? Json(tier_slug(*student.tier)) : Json(nullptr)},
                     {"records", std::move(records)}};
        out += line.dump() + "\n";
    }
    return out;
}

Cohort cohort_from_jsonl_file(const std::string& path) {
    Cohort cohort;
    for (const auto& line : read_json_lines(path)) {
        if (line.contains("cohort_spec")) {
            const auto& s = line.at("cohort_spec");
            cohort.spec.n = s.value("n", cohort.spec.n);
            cohort.spec.mean = s.value("mean", cohort.spec.mean);
            cohort.spec.std_dev = s.value("std_dev", cohort.spec.std_dev);
            cohort.spec.seed = s.value("seed", cohort.spec.seed);
            cohort.spec.prerequisite_subjects =
                s.value("prerequisite_subjects", cohort.spec.prerequisite_subjects);
            cohort.spec.target_subject = s.value("target_subject", cohort.spec.target_subject);
            cohort.spec.progress_weeks = s.value("progress_weeks", cohort.spec.progress_weeks);
            continue;
        }
        StudentPortfolio p(require_string(line, "student_id"));
        if (line.contains("ilo_mappings")) {
            for (const auto& m : line.at("ilo_mappings")) p = p.with_mapping(mapping_from_json(m));
        }
        for (const auto& r : line.at("records")) p = p.record_assessment(record_from_json(r));
        CohortStudent student{std::move(p), std::nullopt};
        try {
            student.tier = derive_tier(student.portfolio);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientData) throw;
        }
        cohort.students.push_back(std::move(student));
    }
    return cohort;
}

std::vector<StudentPortfolio> portfolios_of(const Cohort& cohort) {
    std::vector<StudentPortfolio> out;
    out.reserve(cohort.students.size());
    for (const auto& s : cohort.students) out.push_back(s.portfolio);
    return out;
}

}  // namespace tutor
