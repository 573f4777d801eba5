#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurocount/density.hpp"
#include "neurocount/errors.hpp"

namespace neurocount {

// Named contamination density with parameters, so mixture specs are
// serializable; realize() builds the evaluatable wrapped density.
struct DensitySpec {
    enum class Kind { uniform, wrapped_normal, kde };

    Kind kind = Kind::uniform;
    double a = 0.0, b = kTwoPi;     // uniform
    double mean = 0.0, stddev = 1;  // wrapped_normal
    std::vector<double> samples;    // kde
    double bandwidth = 0.0;

    static DensitySpec uniform(double a, double b) {
        DensitySpec d;
        d.kind = Kind::uniform;
        d.a = a;
        d.b = b;
        return d;
    }
    static DensitySpec wrapped_normal(double mean, double stddev) {
        DensitySpec d;
        d.kind = Kind::wrapped_normal;
        d.mean = mean;
        d.stddev = stddev;
        return d;
    }
    static DensitySpec kde(std::vector<double> samples, double bandwidth) {
        DensitySpec d;
        d.kind = Kind::kde;
        d.samples = std::move(samples);
        d.bandwidth = bandwidth;
        return d;
    }

    WrappedDensity realize() const {
        switch (kind) {
            case Kind::uniform:
                return uniform_density(a, b);
            case Kind::wrapped_normal:
                return wrapped_normal_density(mean, stddev);
            case Kind::kde:
                return kde_density(samples, bandwidth);
        }
        throw ConfigError("DensitySpec: unknown kind");
    }
};

struct Atom {
    double weight = 0.0;    // pi_i
    double location = 0.0;  // mu_i, radians in [0, 2pi) after canonicalization

    bool operator==(const Atom&) const = default;
};

// Ground-truth contaminated mixture: discrete atoms plus an absolutely
// continuous component of weight pi_cont. Construction canonicalizes the
// locations mod 2pi (atoms differing by a multiple of 2pi are
// indistinguishable to the moment matrices) and sorts weights descending.
class MixtureSpec {
public:
    MixtureSpec(std::vector<Atom> atoms, double pi_cont,
                std::optional<DensitySpec> contamination = std::nullopt)
        : atoms_(std::move(atoms)), pi_cont_(pi_cont), contamination_(std::move(contamination)) {
        if (atoms_.empty()) throw ConfigError("MixtureSpec: needs at least one atom");
        double total = pi_cont_;
        for (auto& a : atoms_) {
            if (!(a.weight > 0.0)) throw ConfigError("MixtureSpec: atom weights must be positive");
            if (!std::isfinite(a.location))
                throw ConfigError("MixtureSpec: atom locations must be finite");
            a.location = reduce_mod_2pi(a.location);
            total += a.weight;
        }
        if (pi_cont_ < 0.0 || pi_cont_ >= 1.0)
            throw ConfigError("MixtureSpec: pi_cont must lie in [0, 1)");
        if (std::abs(total - 1.0) > 1e-12)
            throw ConfigError("MixtureSpec: weights plus pi_cont must sum to 1, got " +
                              std::to_string(total));
        if (pi_cont_ > 0.0 && !contamination_)
            throw ConfigError("MixtureSpec: pi_cont > 0 needs a contamination density");

        std::sort(atoms_.begin(), atoms_.end(), [](const Atom& x, const Atom& y) {
            if (x.weight != y.weight) return x.weight > y.weight;
            return x.location < y.location;
        });
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
                const double d = std::abs(atoms_[i].location - atoms_[j].location);
                if (std::min(d, kTwoPi - d) <= 1e-9)
                    throw ConfigError(
                        "MixtureSpec: atom locations coincide mod 2pi (aliased within 1e-9)");
            }
        }
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    int nu() const { return static_cast<int>(atoms_.size()); }
    double pi_cont() const { return pi_cont_; }
    const std::optional<DensitySpec>& contamination() const { return contamination_; }

private:
    std::vector<Atom> atoms_;
    double pi_cont_;
    std::optional<DensitySpec> contamination_;
};

// --- JSON (harness config format) ---

inline void to_json(nlohmann::json& j, const DensitySpec& d) {
    switch (d.kind) {
        case DensitySpec::Kind::uniform:
            j = {{"kind", "uniform"}, {"a", d.a}, {"b", d.b}};
            break;
        case DensitySpec::Kind::wrapped_normal:
            j = {{"kind", "wrapped_normal"}, {"mean", d.mean}, {"stddev", d.stddev}};
            break;
        case DensitySpec::Kind::kde:
            j = {{"kind", "kde"}, {"samples", d.samples}, {"bandwidth", d.bandwidth}};
            break;
    }
}

inline void from_json(const nlohmann::json& j, DensitySpec& d) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") {
        d = DensitySpec::uniform(j.at("a").get<double>(), j.at("b").get<double>());
    } else if (kind == "wrapped_normal") {
        d = DensitySpec::wrapped_normal(j.at("mean").get<double>(), j.at("stddev").get<double>());
    } else if (kind == "kde") {
        d = DensitySpec::kde(j.at("samples").get<std::vector<double>>(),
                             j.at("bandwidth").get<double>());
    } else {
        throw FormatError("DensitySpec: unknown density kind '" + kind + "'");
    }
}

inline nlohmann::json mixture_to_json(const MixtureSpec& spec) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : spec.atoms()) atoms.push_back({a.weight, a.location});
    nlohmann::json j{{"atoms", atoms}, {"pi_cont", spec.pi_cont()}};
    if (spec.contamination())
        j["density"] = *spec.contamination();
    else
        j["density"] = nullptr;
    return j;
}

inline MixtureSpec mixture_from_json(const nlohmann::json& j) {
    std::vector<Atom> atoms;
    for (const auto& pair : j.at("atoms")) {
        if (!pair.is_array() || pair.size() != 2)
            throw FormatError("MixtureSpec: each atom must be a [weight, location] pair");
        atoms.push_back(Atom{pair[0].get<double>(), pair[1].get<double>()});
    }
    std::optional<DensitySpec> density;
    if (j.contains("density") && !j.at("density").is_null())
        density = j.at("density").get<DensitySpec>();
    return MixtureSpec(std::move(atoms), j.at("pi_cont").get<double>(), std::move(density));
}

}  // namespace neurocount
