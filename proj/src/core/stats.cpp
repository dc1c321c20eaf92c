//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace edgeplan {

namespace {

constexpr uint64_t kBootstrapTag = 0xB007;

// Evaluates c[0] + c[1]*x + ... + c[nord-1]*x^(nord-1).
double poly(const double* c, int nord, double x) {
    double ret = c[0];
    if (nord == 1) return ret;
    double p = x * c[nord - 1];
    for (int j = nord - 2; j > 0; --j) p = (p + c[j]) * x;
    return ret + p;
}

// Normal quantile, Beasley & Springer rational approximation.
double ppnd(double p) {
    static const double a0 = 2.50662823884, a1 = -18.61500062529, a2 = 41.39119773534,
                        a3 = -25.44106049637;
    static const double b1 = -8.47351093090, b2 = 23.08336743743, b3 = -21.06224101826,
                        b4 = 3.13082909833;
    static const double c0 = -2.78718931138, c1 = -2.29796479134, c2 = 4.85014127135,
                        c3 = 2.32121276858;
    static const double d1 = 3.54388924762, d2 = 1.63706781897;

    double q = p - 0.5;
    if (std::fabs(q) <= 0.42) {
        double r = q * q;
        return q * (((a3 * r + a2) * r + a1) * r + a0) /
               ((((b4 * r + b3) * r + b2) * r + b1) * r + 1.0);
    }
    double r = q > 0.0 ? 1.0 - p : p;
    if (r <= 0.0) fail(ErrorCode::InvalidArgument, "quantile probability out of range");
    r = std::sqrt(-std::log(r));
    double v = (((c3 * r + c2) * r + c1) * r + c0) / ((d2 * r + d1) * r + 1.0);
    return q < 0.0 ? -v : v;
}

// Upper (or lower) normal tail probability, Hill's algorithm.
double alnorm(double x, bool upper) {
    static const double ltone = 7.0, utzero = 18.66, con = 1.28;
    static const double p = 0.398942280444, q = 0.39990348504, r = 0.398942280385;
    static const double a1 = 5.75885480458, a2 = 2.62433121679, a3 = 5.92885724438;
    static const double b1 = -29.8213557807, b2 = 48.6959930692;
    static const double c1 = -3.8052e-8, c2 = 3.98064794e-4, c3 = -0.151679116635,
                        c4 = 4.8385912808, c5 = 0.742380924027, c6 = 3.99019417011;
    static const double d1 = 1.00000615302, d2 = 1.98615381364, d3 = 5.29330324926,
                        d4 = -15.1508972451, d5 = 30.789933034;

    bool up = upper;
    double z = x;
    if (z < 0.0) {
        up = !up;
        z = -z;
    }
    double result;
    if (z <= ltone || (up && z <= utzero)) {
        double y = 0.5 * z * z;
        if (z <= con) {
            result = 0.5 - z * (p - q * y / (y + a1 + b1 / (y + a2 + b2 / (y + a3))));
        } else {
            result = r * std::exp(-y) /
                     (z + c1 +
                      d1 / (z + c2 +
                            d2 / (z + c3 + d3 / (z + c4 + d4 / (z + c5 + d5 / (z + c6))))));
        }
    } else {
        result = 0.0;
    }
    return up ? result : 1.0 - result;
}

} // namespace

double mean_of(const std::vector<double>& v) {
    if (v.empty()) fail(ErrorCode::InvalidArgument, "mean of empty sample set");
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) fail(ErrorCode::InvalidArgument, "stddev needs at least 2 samples");
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

BootstrapResult bootstrap_mean(const std::vector<double>& samples, uint32_t resample_size,
                               uint32_t reps, uint64_t seed) {
    if (samples.empty()) fail(ErrorCode::InvalidArgument, "bootstrap of empty sample set");
    if (resample_size < 1 || reps < 1)
        fail(ErrorCode::Validation, "bootstrap needs resample_size >= 1 and reps >= 1");
    for (double x : samples)
        if (!std::isfinite(x)) fail(ErrorCode::Validation, "sample set contains non-finite value");

    BootstrapResult r;
    r.resample_size = resample_size;
    r.reps = reps;
    r.seed = seed;
    r.means.reserve(reps);
    const uint64_t base = mix_seed(seed, kBootstrapTag);
    for (uint32_t j = 0; j < reps; ++j) {
        Rng rng(mix_seed(base, j));
        double s = 0.0;
        for (uint32_t i = 0; i < resample_size; ++i) s += samples[rng.below(samples.size())];
        r.means.push_back(s / double(resample_size));
    }
    r.grand_mean = mean_of(r.means);
    auto [lo, hi] = confidence_interval(r.means, 0.95);
    r.ci_low = lo;
    r.ci_high = hi;
    return r;
}

ShapiroWilk shapiro_wilk(const std::vector<double>& samples) {
    static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static const double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
    static const double g[2] = {-2.273, 0.459};
    static const double pi6 = 1.90985931710274;  // 6/pi
    static const double stqr = 1.04719755119660; // asin(sqrt(3/4))
    static const double th = 0.375;
    static const double small_range = 1e-19;

    const int n = int(samples.size());
    if (n < 3 || n > 5000)
        fail(ErrorCode::Validation,
             "shapiro_wilk needs 3 <= n <= 5000, got n = " + std::to_string(n));
    for (double x : samples)
        if (!std::isfinite(x)) fail(ErrorCode::Validation, "sample set contains non-finite value");

    std::vector<double> x = samples;
    std::sort(x.begin(), x.end());
    const double range = x[size_t(n - 1)] - x[0];
    if (range < small_range)
        fail(ErrorCode::Validation, "shapiro_wilk needs non-degenerate input (zero variance)");

    const int nn2 = n / 2;
    const double an = double(n);
    std::vector<double> a(size_t(nn2), 0.0);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        double an25 = an + 0.25;
        double summ2 = 0.0;
        for (int i = 1; i <= nn2; ++i) {
            a[size_t(i - 1)] = ppnd((double(i) - th) / an25);
            summ2 += a[size_t(i - 1)] * a[size_t(i - 1)];
        }
        summ2 *= 2.0;
        double ssumm2 = std::sqrt(summ2);
        double rsn = 1.0 / std::sqrt(an);
        double a1 = poly(c1, 6, rsn) - a[0] / ssumm2;

        int i1;
        double fac;
        if (n > 5) {
            i1 = 3;
            double a2 = -a[1] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            i1 = 2;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (int i = i1; i <= nn2; ++i) a[size_t(i - 1)] /= -fac;
    }

    // W is the squared correlation between the order statistics and the
    // antisymmetric coefficient vector.
    std::vector<double> coef(size_t(n), 0.0);
    for (int i = 0; i < nn2; ++i) {
        coef[size_t(i)] = -a[size_t(i)];
        coef[size_t(n - 1 - i)] = a[size_t(i)];
    }
    double sa = 0.0, sx = 0.0;
    for (int i = 0; i < n; ++i) {
        sa += coef[size_t(i)];
        sx += x[size_t(i)] / range;
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (int i = 0; i < n; ++i) {
        double da = coef[size_t(i)] - sa;
        double dx = x[size_t(i)] / range - sx;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    double ssassx = std::sqrt(ssa * ssx);
    double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);

    ShapiroWilk out;
    out.w = 1.0 - w1;

    if (n == 3) {
        double pw = pi6 * (std::asin(std::sqrt(out.w)) - stqr);
        out.p_value = std::min(1.0, std::max(0.0, pw));
        return out;
    }

    double y = std::log(w1);
    double m, s;
    if (n <= 11) {
        double gamma = poly(g, 2, an);
        if (y >= gamma) {
            out.p_value = 1e-99;
            return out;
        }
        y = -std::log(gamma - y);
        m = poly(c3, 4, an);
        s = std::exp(poly(c4, 4, an));
    } else {
        double lx = std::log(an);
        m = poly(c5, 4, lx);
        s = std::exp(poly(c6, 3, lx));
    }
    out.p_value = alnorm((y - m) / s, true);
    return out;
}

double quantile(const std::vector<double>& sorted_values, double p) {
    if (sorted_values.empty()) fail(ErrorCode::InvalidArgument, "quantile of empty list");
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::Validation, "quantile probability outside [0, 1]");
    const size_t n = sorted_values.size();
    if (n == 1) return sorted_values[0];
    double h = double(n - 1) * p;
    size_t lo = size_t(std::floor(h));
    if (lo >= n - 1) return sorted_values[n - 1];
    double frac = h - double(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

std::pair<double, double> confidence_interval(const std::vector<double>& values, double level) {
    if (values.empty()) fail(ErrorCode::InvalidArgument, "confidence interval of empty list");
    if (!(level >= 0.0 && level <= 1.0))
        fail(ErrorCode::Validation, "confidence level outside [0, 1]");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double tail = (1.0 - level) / 2.0;
    return {quantile(sorted, tail), quantile(sorted, 1.0 - tail)};
}

std::vector<double> load_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open sample file: " + path);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (out.empty() && line == "value") continue;
        try {
            size_t pos = 0;
            double v = std::stod(line, &pos);
            if (pos != line.size()) throw std::invalid_argument(line);
            out.push_back(v);
        } catch (const std::exception&) {
            fail(ErrorCode::Parse, "bad sample value '" + line + "' in " + path);
        }
    }
    if (out.empty()) fail(ErrorCode::Parse, "no samples in " + path);
    return out;
}

void save_samples_csv(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write sample file: " + path);
    out << "value\n";
    char buf[64];
    for (double v : values) {
        snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "\n";
    }
}

} // namespace edgeplan
