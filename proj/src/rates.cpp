#include "spheroid/rates.hpp"

#include "spheroid/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spheroid {

namespace {

constexpr std::array<std::string_view, 5> kRateNames{"F", "K_B", "K_P", "K_Q", "K_D"};

// Tolerance for the equality conditions F(0) = K_B(0) = K_P(0) = 0.
constexpr double kZeroTol = 1e-14;

} // namespace

std::string_view rate_name(RateId id) { return kRateNames[static_cast<std::size_t>(id)]; }

RateId rate_from_name(std::string_view name) {
    for (RateId id : kAllRates)
        if (rate_name(id) == name) return id;
    throw DomainError("unknown rate '" + std::string(name) + "'");
}

std::string_view family_name(RateFamily family) {
    switch (family) {
    case RateFamily::Zero: return "zero";
    case RateFamily::Linear: return "linear";
    case RateFamily::Sigmoid: return "sigmoid";
    }
    return "zero";
}

RateFamily family_from_name(std::string_view name) {
    if (name == "zero") return RateFamily::Zero;
    if (name == "linear") return RateFamily::Linear;
    if (name == "sigmoid") return RateFamily::Sigmoid;
    throw DomainError("unknown rate family '" + std::string(name) + "'");
}

RateFunction RateFunction::linear(double slope) {
    RateFunction fn;
    fn.family = RateFamily::Linear;
    fn.slope = slope;
    return fn;
}

RateFunction RateFunction::sigmoid(double amplitude, double steepness, double midpoint) {
    RateFunction fn;
    fn.family = RateFamily::Sigmoid;
    fn.amplitude = amplitude;
    fn.steepness = steepness;
    fn.midpoint = midpoint;
    return fn;
}

RateModel::RateModel(std::array<RateFunction, 5> rates, double c_min, double c_max)
    : rates_(rates), c_min_(c_min), c_max_(c_max) {
    if (!(c_min < c_max)) throw DomainError("rate validity interval must satisfy c_min < c_max");
}

RateModel RateModel::default_model() {
    return RateModel({RateFunction::linear(1.0), RateFunction::linear(0.5),
                      RateFunction::linear(5.0), RateFunction::sigmoid(0.8, 8.0, 0.6),
                      RateFunction::sigmoid(4.0, 5.0, 1.8)});
}

RateModel RateModel::zero_model() { return RateModel(std::array<RateFunction, 5>{}); }

RateModel RateModel::with_rate(RateId id, const RateFunction& fn) const {
    RateModel copy = *this;
    copy.rates_[index(id)] = fn;
    return copy;
}

RateModel RateModel::with_domain(double c_min, double c_max) const {
    RateModel copy = *this;
    copy.c_min_ = c_min;
    copy.c_max_ = c_max;
    return copy;
}

RateValue RateModel::eval(RateId id, double c) const {
    if (!(c >= c_min_ - kDomainMargin && c <= c_max_ + kDomainMargin)) {
        std::ostringstream os;
        os << "rate " << rate_name(id) << " evaluated at c = " << c << ", outside ["
           << c_min_ - kDomainMargin << ", " << c_max_ + kDomainMargin << "]";
        throw DomainError(os.str());
    }
    const RateFunction& fn = rates_[index(id)];
    switch (fn.family) {
    case RateFamily::Zero: return {0.0, 0.0};
    case RateFamily::Linear: return {fn.slope * c, fn.slope};
    case RateFamily::Sigmoid: {
        const double th = std::tanh(fn.steepness * (c - fn.midpoint));
        return {0.5 * fn.amplitude * (1.0 - th),
                -0.5 * fn.amplitude * fn.steepness * (1.0 - th * th)};
    }
    }
    return {0.0, 0.0};
}

double f_reaction(const RateModel& model, double c, double p) {
    const double kp = model.value(RateId::KP, c);
    const double km = model.value(RateId::KB, c) + model.value(RateId::KD, c);
    const double kn = kp + model.value(RateId::KQ, c);
    return kp + (km - kn) * p - km * p * p;
}

double g_source(const RateModel& model, double c, double p) {
    const double kd = model.value(RateId::KD, c);
    return (model.value(RateId::KB, c) + kd) * p - kd;
}

ReactionPartials f_partials(const RateModel& model, double c, double p) {
    const RateValue kb = model.eval(RateId::KB, c);
    const RateValue kp = model.eval(RateId::KP, c);
    const RateValue kq = model.eval(RateId::KQ, c);
    const RateValue kd = model.eval(RateId::KD, c);
    const double km = kb.value + kd.value;
    const double kn = kp.value + kq.value;
    const double km_c = kb.derivative + kd.derivative;
    const double kn_c = kp.derivative + kq.derivative;
    return {kp.value + (km - kn) * p - km * p * p,
            kp.derivative + (km_c - kn_c) * p - km_c * p * p,
            (km - kn) - 2.0 * km * p};
}

SourcePartials g_partials(const RateModel& model, double c, double p) {
    const RateValue kb = model.eval(RateId::KB, c);
    const RateValue kd = model.eval(RateId::KD, c);
    const double km = kb.value + kd.value;
    return {km * p - kd.value, (kb.derivative + kd.derivative) * p - kd.derivative, km};
}

double equilibrium_fraction(const RateModel& model, double c) {
    const double kp = model.value(RateId::KP, c);
    const double km = model.value(RateId::KB, c) + model.value(RateId::KD, c);
    const double kn = kp + model.value(RateId::KQ, c);
    const double b = km - kn;
    double p;
    if (std::abs(km) <= 1e-14 * (std::abs(b) + std::abs(kp)) || km == 0.0) {
        // f is linear in p: kp + b p.
        p = b != 0.0 ? -kp / b : 1.0;
    } else {
        const double disc = std::sqrt(std::max(0.0, b * b + 4.0 * km * kp));
        // Numerically stable form of (b + sqrt(disc)) / (2 km).
        p = b >= 0.0 ? (b + disc) / (2.0 * km) : (2.0 * kp) / (disc - b);
    }
    return std::clamp(p, 0.0, 1.0);
}

bool AssumptionReport::passed(std::string_view assumption) const {
    return std::all_of(checks.begin(), checks.end(), [&](const AssumptionCheck& c) {
        return c.assumption != assumption || c.passed;
    });
}

bool AssumptionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AssumptionCheck& c) { return c.passed; });
}

double AssumptionReport::worst_margin(std::string_view assumption) const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : checks)
        if (c.assumption == assumption) worst = std::min(worst, c.worst_margin);
    return worst;
}

std::string AssumptionReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    for (const auto& c : checks) {
        os << c.assumption << "  " << (c.passed ? "pass" : "FAIL") << "  " << c.condition
           << "  worst margin " << std::scientific << c.worst_margin << std::defaultfloat
           << '\n';
    }
    os << "f(c_max,1) = -K_Q(c_max) = " << std::scientific << boundary_reaction << '\n';
    os << (all_passed() ? "all assumptions pass" : "assumption check FAILED") << '\n';
    return os.str();
}

AssumptionReport check_assumptions(const RateModel& model, int samples) {
    if (samples < 2) throw DomainError("check_assumptions needs at least 2 samples");

    struct Condition {
        const char* assumption;
        const char* text;
        bool strict;
        double worst = std::numeric_limits<double>::infinity();
    };
    std::vector<Condition> conds{
        {"A1", "F'(c) > 0", true},
        {"A2", "K_B'(c) > 0", true},
        {"A2", "K_P'(c) >= 0", false},
        {"A3", "K_D'(c) <= 0", false},
        {"A3", "K_Q'(c) <= 0", false},
        {"A3", "K_D(c) >= 0", false},
        {"A3", "K_Q(c) >= 0", false},
        {"A4", "K_B'(c) + K_D'(c) > 0", true},
        {"A5", "K_P'(c) + K_Q'(c) > 0", true},
    };

    const double a = model.c_min();
    const double b = model.c_max();
    for (int k = 0; k < samples; ++k) {
        const double c = a + (b - a) * k / (samples - 1);
        const RateValue F = model.eval(RateId::F, c);
        const RateValue kb = model.eval(RateId::KB, c);
        const RateValue kp = model.eval(RateId::KP, c);
        const RateValue kq = model.eval(RateId::KQ, c);
        const RateValue kd = model.eval(RateId::KD, c);
        const std::array<double, 9> margins{F.derivative,
                                            kb.derivative,
                                            kp.derivative,
                                            -kd.derivative,
                                            -kq.derivative,
                                            kd.value,
                                            kq.value,
                                            kb.derivative + kd.derivative,
                                            kp.derivative + kq.derivative};
        for (std::size_t i = 0; i < conds.size(); ++i)
            conds[i].worst = std::min(conds[i].worst, margins[i]);
    }

    AssumptionReport report;
    auto zero_check = [&](const char* assumption, const char* text, RateId id) {
        const double v = std::abs(model.value(id, 0.0));
        report.checks.push_back({assumption, text, -v, v <= kZeroTol});
    };
    for (std::size_t i = 0; i < conds.size(); ++i) {
        if (i == 1) zero_check("A1", "F(0) = 0", RateId::F);
        const auto& c = conds[i];
        report.checks.push_back(
            {c.assumption, c.text, c.worst, c.strict ? c.worst > 0.0 : c.worst >= 0.0});
    }
    zero_check("A2", "K_B(0) = 0", RateId::KB);
    zero_check("A2", "K_P(0) = 0", RateId::KP);
    std::stable_sort(report.checks.begin(), report.checks.end(),
                     [](const AssumptionCheck& x, const AssumptionCheck& y) {
                         return x.assumption < y.assumption;
                     });
    report.boundary_reaction = f_reaction(model, b, 1.0);
    return report;
}

} // namespace spheroid
