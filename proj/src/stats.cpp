#include "mahgcn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace mahgcn::stats {

namespace {

void check_binary_labels(const std::vector<int>& labels, const char* who) {
    for (int y : labels)
        if (y != 0 && y != 1)
            throw DataError(std::string(who) + ": labels must be 0 or 1, got " +
                            std::to_string(y));
}

// average ranks (1-based) of v, ties averaged
std::vector<double> average_ranks(const std::vector<double>& v) {
    std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

ConfusionCounts confusion(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.size() != actual.size())
        throw DataError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                        std::to_string(actual.size()) + " labels");
    check_binary_labels(predicted, "confusion");
    check_binary_labels(actual, "confusion");
    ConfusionCounts c;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 1)
            predicted[i] == 1 ? ++c.tp : ++c.fn;
        else
            predicted[i] == 0 ? ++c.tn : ++c.fp;
    }
    return c;
}

AccSenSpe acc_sen_spe(const ConfusionCounts& c) {
    AccSenSpe r;
    long n = c.total();
    if (n == 0) throw DataError("acc_sen_spe: empty confusion counts");
    r.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
    if (c.tp + c.fn > 0)
        r.sen = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    else
        r.flags.push_back("sen_undefined_no_positives");
    if (c.tn + c.fp > 0)
        r.spe = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    else
        r.flags.push_back("spe_undefined_no_negatives");
    return r;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DataError("auc: scores and labels differ in length");
    check_binary_labels(labels, "auc");
    long n1 = std::count(labels.begin(), labels.end(), 1);
    long n0 = static_cast<long>(labels.size()) - n1;
    if (n1 == 0 || n0 == 0) throw DataError("auc: both classes must be present");
    std::vector<double> ranks = average_ranks(scores);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 1) rank_sum_pos += ranks[i];
    double u = rank_sum_pos - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

MetricRecord metrics_from_scores(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
    MetricRecord m;
    m.scores = scores;
    m.labels = labels;
    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] > 0.5 ? 1 : 0;
    AccSenSpe r = acc_sen_spe(confusion(preds, labels));
    m.acc = r.acc;
    m.sen = r.sen;
    m.spe = r.spe;
    m.auc = auc(scores, labels);
    return m;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // modified Lentz continued fraction
    auto betacf = [](double a, double b, double x) {
        const int max_iter = 400;
        const double eps = 3e-16, fpmin = 1e-300;
        double qab = a + b, qap = a + 1.0, qam = a - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * x / qap;
        if (std::fabs(d) < fpmin) d = fpmin;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= max_iter; ++m) {
            int m2 = 2 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < fpmin) d = fpmin;
            c = 1.0 + aa / c;
            if (std::fabs(c) < fpmin) c = fpmin;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < fpmin) d = fpmin;
            c = 1.0 + aa / c;
            if (std::fabs(c) < fpmin) c = fpmin;
            d = 1.0 / d;
            double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < eps) break;
        }
        return h;
    };
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                   b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
    double x = df / (df + t * t);
    double half_tail = 0.5 * reg_inc_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

TTestResult paired_t_one_sided(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DataError("paired_t: samples differ in length");
    std::size_t n = a.size();
    if (n < 2) throw DataError("paired_t: need at least two pairs");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    double var = ss / (static_cast<double>(n) - 1.0);

    TTestResult r;
    r.df = static_cast<double>(n) - 1.0;
    if (var == 0.0) {
        if (mean == 0.0) {
            r.t = std::nan("");
            r.p = std::nan("");
            r.flags.push_back("undefined_zero_variance_zero_mean");
        } else {
            r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
            r.p = mean > 0 ? 0.0 : 1.0;
            r.flags.push_back("degenerate_zero_variance");
        }
        return r;
    }
    r.t = mean / std::sqrt(var / static_cast<double>(n));
    r.p = student_t_upper_tail(r.t, r.df);
    return r;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DataError("wilcoxon: samples differ in length");
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double v = a[i] - b[i];
        if (v != 0.0) d.push_back(v);  // zero differences dropped
    }
    WilcoxonResult r;
    r.n_effective = static_cast<int>(d.size());
    if (d.empty()) {
        r.w = std::nan("");
        r.p = std::nan("");
        r.flags.push_back("undefined_all_differences_zero");
        return r;
    }
    std::size_t n = d.size();
    std::vector<double> abs_d(n);
    for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::fabs(d[i]);
    std::vector<double> ranks = average_ranks(abs_d);
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0.0) w += ranks[i];
    r.w = w;

    if (n <= 20) {
        // exact: enumerate all 2^n sign patterns; rank sums are half-integers
        // so the >= comparison below is safe
        std::size_t total = std::size_t{1} << n;
        std::vector<double> subset_sum(total, 0.0);
        std::uint64_t count = 0;
        for (std::size_t mask = 1; mask < total; ++mask) {
            std::size_t low = static_cast<std::size_t>(__builtin_ctzll(mask));
            subset_sum[mask] = subset_sum[mask & (mask - 1)] + ranks[low];
        }
        for (std::size_t mask = 0; mask < total; ++mask)
            if (subset_sum[mask] >= w - 1e-9) ++count;
        r.p = static_cast<double>(count) / static_cast<double>(total);
    } else {
        // normal approximation with tie correction
        double nn = static_cast<double>(n);
        double mu = nn * (nn + 1.0) / 4.0;
        double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
        std::vector<double> sorted = abs_d;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            if (t > 1.0) var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
        r.p = normal_upper_tail((w - mu) / std::sqrt(var));
        r.flags.push_back("normal_approximation");
    }
    return r;
}

ComparisonResult compare_paired(const std::string& metric_name, const std::vector<double>& a,
                                const std::vector<double>& b) {
    ComparisonResult c;
    c.metric = metric_name;
    c.t_test = paired_t_one_sided(a, b);
    c.wilcoxon = wilcoxon_signed_rank(a, b);
    bool t_sig = std::isfinite(c.t_test.p) && c.t_test.p < 0.05;
    bool w_sig = std::isfinite(c.wilcoxon.p) && c.wilcoxon.p < 0.05;
    c.significant_at_005 = t_sig || w_sig;
    return c;
}

}  // namespace mahgcn::stats
