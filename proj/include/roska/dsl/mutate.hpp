#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "roska/common/rng.hpp"
#include "roska/dsl/ast.hpp"
#include "roska/dsl/print.hpp"

namespace roska::dsl {

/// One structural or numeric edit: weight perturbation, temperature
/// perturbation, add a component built from the feature pool, drop a component
/// (when more than one remains), or swap the transform. Deterministic for a
/// fixed rng_key; edits that would break invariants (or produce an identical
/// program) are re-drawn a bounded number of times, then a weight perturbation
/// is applied as the fallback.
inline RewardProgram mutate(const RewardProgram& program, std::uint64_t rng_key,
                            const std::vector<std::string>& feature_pool, double strength) {
    RngStream rng = RngStream::from(rng_key, {stream::kMutate});
    const std::string before = print(program);

    auto perturb_weight = [&](RewardProgram& p) {
        auto& c = p.components[rng.uniform_int(p.components.size())];
        const double bound = strength * std::max(1.0, std::abs(c.weight));
        c.weight += rng.uniform(-bound, bound);
    };

    for (int attempt = 0; attempt < 8; ++attempt) {
        RewardProgram next = program;
        switch (rng.uniform_int(5)) {
            case 0:
                perturb_weight(next);
                break;
            case 1: {  // temperature perturbation, multiplicative so it stays > 0
                auto& c = next.components[rng.uniform_int(next.components.size())];
                c.temperature *= std::exp(rng.uniform(-strength, strength));
                break;
            }
            case 2: {  // add component from pool
                const std::string& feat = feature_pool[rng.uniform_int(feature_pool.size())];
                RewardComponent c;
                c.name = feat + "_term";
                c.expr = feature(feat);
                c.temperature = 0.1 * std::exp(rng.uniform(-strength, strength));
                c.transform = rng.uniform() < 0.5 ? Transform::exp_neg_over_temp
                                                  : Transform::identity;
                c.weight = rng.uniform(0.1, 1.0) * (rng.uniform() < 0.25 ? -1.0 : 1.0);
                bool clash = false;
                for (const auto& existing : next.components)
                    if (existing.name == c.name) clash = true;
                if (clash) continue;
                next.components.push_back(std::move(c));
                break;
            }
            case 3: {  // drop component
                if (next.components.size() <= 1) continue;
                next.components.erase(next.components.begin() +
                                      static_cast<long>(rng.uniform_int(next.components.size())));
                break;
            }
            case 4: {  // swap transform
                auto& c = next.components[rng.uniform_int(next.components.size())];
                c.transform = c.transform == Transform::exp_neg_over_temp
                                  ? Transform::identity
                                  : Transform::exp_neg_over_temp;
                break;
            }
        }
        next.source_text = print(next);
        if (next.source_text == before) continue;
        validate(next);
        return next;
    }

    RewardProgram fallback = program;
    perturb_weight(fallback);
    if (print(fallback) == before) {
        auto& c = fallback.components.front();
        c.weight += strength * std::max(1.0, std::abs(c.weight));
    }
    fallback.source_text = print(fallback);
    validate(fallback);
    return fallback;
}

}  // namespace roska::dsl

namespace roska::dsl {

/// Umbrella check used by generators: program is internally valid and touches
/// only features from `available`.
template <typename Range>
bool valid_for_features(const RewardProgram& p, const Range& available) {
    try {
        validate(p);
        validate_against_features(p, available);
        return true;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace roska::dsl
