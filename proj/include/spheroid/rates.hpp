#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace spheroid {

enum class RateId { F, KB, KP, KQ, KD };

inline constexpr std::array<RateId, 5> kAllRates{RateId::F, RateId::KB, RateId::KP,
                                                 RateId::KQ, RateId::KD};

// Config / report names: "F", "K_B", "K_P", "K_Q", "K_D".
std::string_view rate_name(RateId id);
RateId rate_from_name(std::string_view name);

enum class RateFamily {
    Zero,    // identically 0
    Linear,  // slope * c
    Sigmoid  // amplitude * (1 - tanh(steepness * (c - midpoint))) / 2
};

std::string_view family_name(RateFamily family);
RateFamily family_from_name(std::string_view name);

struct RateFunction {
    RateFamily family = RateFamily::Zero;
    double slope = 0.0;
    double amplitude = 0.0;
    double steepness = 0.0;
    double midpoint = 0.0;

    static RateFunction zero() { return {}; }
    static RateFunction linear(double slope);
    static RateFunction sigmoid(double amplitude, double steepness, double midpoint);

    bool operator==(const RateFunction&) const = default;
};

struct RateValue {
    double value;
    double derivative;
};

// The five model rates F, K_B, K_P, K_Q, K_D. Immutable after construction in
// practice; all evaluation is const and pure.
class RateModel {
public:
    // Evaluation is allowed on [c_min - kDomainMargin, c_max + kDomainMargin].
    static constexpr double kDomainMargin = 0.5;

    RateModel() = default;
    RateModel(std::array<RateFunction, 5> rates, double c_min = 0.0, double c_max = 1.0);

    // Default model used when the configuration leaves a rate unspecified:
    //   F = c, K_B = 0.5 c, K_P = 5 c,
    //   K_Q = 0.8 (1 - tanh(8 (c - 0.6))) / 2,
    //   K_D = 4 (1 - tanh(5 (c - 1.8))) / 2.
    static RateModel default_model();
    // All five rates identically zero.
    static RateModel zero_model();

    const RateFunction& rate(RateId id) const { return rates_[index(id)]; }
    RateModel with_rate(RateId id, const RateFunction& fn) const;
    RateModel with_domain(double c_min, double c_max) const;

    double c_min() const { return c_min_; }
    double c_max() const { return c_max_; }

    RateValue eval(RateId id, double c) const;
    double value(RateId id, double c) const { return eval(id, c).value; }

    bool operator==(const RateModel&) const = default;

private:
    static std::size_t index(RateId id) { return static_cast<std::size_t>(id); }

    std::array<RateFunction, 5> rates_{};
    double c_min_ = 0.0;
    double c_max_ = 1.0;
};

// f(c,p) = K_P + (K_M - K_N) p - K_M p^2 with K_M = K_B + K_D, K_N = K_P + K_Q.
double f_reaction(const RateModel& model, double c, double p);
// g(c,p) = K_M p - K_D.
double g_source(const RateModel& model, double c, double p);

struct ReactionPartials {
    double f;
    double f_c;
    double f_p;
};
ReactionPartials f_partials(const RateModel& model, double c, double p);

struct SourcePartials {
    double g;
    double g_c;
    double g_p;
};
SourcePartials g_partials(const RateModel& model, double c, double p);

// Root of f(c, .) in [0, 1]. Uses the closed-form quadratic root and falls back
// to the linear root when K_M vanishes.
double equilibrium_fraction(const RateModel& model, double c);

struct AssumptionCheck {
    std::string assumption;  // "A1" .. "A5"
    std::string condition;   // human readable inequality
    double worst_margin;     // min over samples; >0 (strict) or >=0 required
    bool passed;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    // f(c_max, 1) = -K_Q(c_max): the rest point of p at the boundary is 1 only
    // when this vanishes.
    double boundary_reaction = 0.0;

    bool passed(std::string_view assumption) const;
    bool all_passed() const;
    // Smallest margin over the checks belonging to one assumption.
    double worst_margin(std::string_view assumption) const;
    std::string to_text() const;
};

AssumptionReport check_assumptions(const RateModel& model, int samples = 201);

} // namespace spheroid
