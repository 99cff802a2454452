#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mahgcn/common.hpp"

namespace mahgcn::stats {

struct ConfusionCounts {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

// Positive class is the patient label 1.
ConfusionCounts confusion(const std::vector<int>& predicted, const std::vector<int>& actual);

struct AccSenSpe {
    double acc = 0.0;
    std::optional<double> sen;  // absent when tp+fn == 0
    std::optional<double> spe;  // absent when tn+fp == 0
    std::vector<std::string> flags;
};

AccSenSpe acc_sen_spe(const ConfusionCounts& c);

// Mann-Whitney AUC with 0.5 credit for ties, computed from average ranks.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Per-repeat evaluation record; scores are P(class 1).
struct MetricRecord {
    double acc = 0.0;
    std::optional<double> sen, spe;
    double auc = 0.0;
    std::vector<double> scores;
    std::vector<int> labels;
};

// Derive a MetricRecord from scores/labels at the 0.5 decision threshold.
MetricRecord metrics_from_scores(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 0.0;  // one-sided, H1: mean(a - b) > 0
    std::vector<std::string> flags;
};

TTestResult paired_t_one_sided(const std::vector<double>& a, const std::vector<double>& b);

struct WilcoxonResult {
    double w = 0.0;
    double p = 0.0;  // one-sided, H1: a > b
    int n_effective = 0;
    std::vector<std::string> flags;
};

// Signed-rank test with zero differences dropped and average ranks on ties;
// exact enumeration of all 2^n sign patterns up to n=20, tie-corrected normal
// approximation beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

struct ComparisonResult {
    std::string metric;
    TTestResult t_test;
    WilcoxonResult wilcoxon;
    bool significant_at_005 = false;  // either test below 0.05
};

ComparisonResult compare_paired(const std::string& metric_name, const std::vector<double>& a,
                                const std::vector<double>& b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_inc_beta(double a, double b, double x);

// P(T > t) for Student's t with df degrees of freedom.
double student_t_upper_tail(double t, double df);

}  // namespace mahgcn::stats
