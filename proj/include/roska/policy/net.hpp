#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "roska/common/errors.hpp"
#include "roska/common/rng.hpp"

namespace roska::policy {

/// Fixed tanh-MLP architecture shared by the policy mean head and the value
/// head, with a state-independent log-std vector between them.
struct NetArch {
    int obs_dim = 0;
    int action_dim = 0;
    std::vector<int> hidden = {64, 64};
    enum class Activation { tanh } activation = Activation::tanh;

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        };
        mix(static_cast<std::uint64_t>(obs_dim));
        mix(static_cast<std::uint64_t>(action_dim));
        mix(hidden.size());
        for (int w : hidden) mix(static_cast<std::uint64_t>(w));
        mix(static_cast<std::uint64_t>(activation));
        return h;
    }

    // Layer dimension chains: policy obs->hidden...->action, value obs->hidden...->1.
    std::vector<int> policy_dims() const {
        std::vector<int> d{obs_dim};
        d.insert(d.end(), hidden.begin(), hidden.end());
        d.push_back(action_dim);
        return d;
    }
    std::vector<int> value_dims() const {
        std::vector<int> d{obs_dim};
        d.insert(d.end(), hidden.begin(), hidden.end());
        d.push_back(1);
        return d;
    }

    int param_count() const {
        auto chain = [](const std::vector<int>& dims) {
            int n = 0;
            for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l + 1] * dims[l] + dims[l + 1];
            return n;
        };
        return chain(policy_dims()) + action_dim + chain(value_dims());
    }
};

/// Flat, architecture-tagged parameter array. Layout: policy layers (each W in
/// row-major out x in, then b), log-std vector, value layers (same scheme).
/// Values are 32-bit floats so the checkpoint round-trip is bit-exact.
struct ParamVector {
    std::uint64_t arch_hash = 0;
    std::vector<float> values;

    bool finite() const {
        for (float v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void check_arch(const ParamVector& p, const NetArch& arch) {
    if (p.arch_hash != arch.hash())
        throw ArchMismatch("parameter vector was built for a different architecture");
    if (static_cast<int>(p.values.size()) != arch.param_count())
        throw ArchMismatch("parameter vector length does not match the architecture");
}

/// Deterministic initialization: per-layer uniform(-sqrt(6/(fan_in+fan_out)),
/// +sqrt(...)) weights, zero biases, zero log-std.
inline ParamVector init_params(const NetArch& arch, std::uint64_t seed) {
    ParamVector p;
    p.arch_hash = arch.hash();
    p.values.resize(static_cast<std::size_t>(arch.param_count()));
    std::size_t cursor = 0;
    std::uint64_t layer_id = 0;
    auto fill_chain = [&](const std::vector<int>& dims) {
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const int fan_in = dims[l], fan_out = dims[l + 1];
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            RngStream rng = RngStream::from(seed, {stream::kParamInit, layer_id++});
            for (int i = 0; i < fan_out * fan_in; ++i)
                p.values[cursor++] = static_cast<float>(rng.uniform(-limit, limit));
            for (int i = 0; i < fan_out; ++i) p.values[cursor++] = 0.0f;
        }
    };
    fill_chain(arch.policy_dims());
    for (int i = 0; i < arch.action_dim; ++i) p.values[cursor++] = 0.0f;  // log-std
    fill_chain(arch.value_dims());
    return p;
}

/// Ratio-alpha fusion: elementwise alpha * theta_best + (1 - alpha) * theta_0.
/// alpha = 1 and alpha = 0 reproduce the inputs bit-exactly.
inline ParamVector fuse(const ParamVector& theta_best, const ParamVector& theta_0, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw AlphaOutOfRange(alpha);
    if (theta_best.arch_hash != theta_0.arch_hash ||
        theta_best.values.size() != theta_0.values.size())
        throw ArchMismatch("fuse requires parameter vectors of the same architecture");
    ParamVector out;
    out.arch_hash = theta_best.arch_hash;
    out.values.resize(theta_best.values.size());
    const double beta = 1.0 - alpha;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = static_cast<float>(alpha * static_cast<double>(theta_best.values[i]) +
                                           beta * static_cast<double>(theta_0.values[i]));
    }
    return out;
}

/// Unpacked Eigen view of a ParamVector. Scalar is float in the training hot
/// path and double where precision matters (forward API, gradient checks).
template <typename Scalar>
struct Net {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::vector<Mat> policy_w;
    std::vector<Vec> policy_b;
    Vec log_std;
    std::vector<Mat> value_w;
    std::vector<Vec> value_b;

    static Net unpack(const ParamVector& p, const NetArch& arch) {
        check_arch(p, arch);
        Net net;
        std::size_t cursor = 0;
        auto take_chain = [&](const std::vector<int>& dims, std::vector<Mat>& ws,
                              std::vector<Vec>& bs) {
            for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
                Mat w(dims[l + 1], dims[l]);
                for (int r = 0; r < w.rows(); ++r)
                    for (int c = 0; c < w.cols(); ++c)
                        w(r, c) = static_cast<Scalar>(p.values[cursor++]);
                Vec b(dims[l + 1]);
                for (int r = 0; r < b.size(); ++r) b(r) = static_cast<Scalar>(p.values[cursor++]);
                ws.push_back(std::move(w));
                bs.push_back(std::move(b));
            }
        };
        take_chain(arch.policy_dims(), net.policy_w, net.policy_b);
        net.log_std.resize(arch.action_dim);
        for (int i = 0; i < arch.action_dim; ++i)
            net.log_std(i) = static_cast<Scalar>(p.values[cursor++]);
        take_chain(arch.value_dims(), net.value_w, net.value_b);
        return net;
    }

    ParamVector pack(const NetArch& arch) const {
        ParamVector p;
        p.arch_hash = arch.hash();
        p.values.resize(static_cast<std::size_t>(arch.param_count()));
        std::size_t cursor = 0;
        auto put_chain = [&](const std::vector<Mat>& ws, const std::vector<Vec>& bs) {
            for (std::size_t l = 0; l < ws.size(); ++l) {
                for (int r = 0; r < ws[l].rows(); ++r)
                    for (int c = 0; c < ws[l].cols(); ++c)
                        p.values[cursor++] = static_cast<float>(ws[l](r, c));
                for (int r = 0; r < bs[l].size(); ++r)
                    p.values[cursor++] = static_cast<float>(bs[l](r));
            }
        };
        put_chain(policy_w, policy_b);
        for (int i = 0; i < log_std.size(); ++i) p.values[cursor++] = static_cast<float>(log_std(i));
        put_chain(value_w, value_b);
        return p;
    }

    /// Batched heads: rows of `obs` map to rows of the returned mean matrix
    /// and entries of the value vector.
    void heads(const Eigen::Ref<const Mat>& obs, Mat& mean, Vec& value) const {
        Mat h = obs;
        for (std::size_t l = 0; l < policy_w.size(); ++l) {
            h = (h * policy_w[l].transpose()).rowwise() + policy_b[l].transpose();
            if (l + 1 < policy_w.size()) h = h.array().tanh();
        }
        mean = std::move(h);
        Mat v = obs;
        for (std::size_t l = 0; l < value_w.size(); ++l) {
            v = (v * value_w[l].transpose()).rowwise() + value_b[l].transpose();
            if (l + 1 < value_w.size()) v = v.array().tanh();
        }
        value = v.col(0);
    }
};

struct ForwardResult {
    Eigen::VectorXd action_mean;
    Eigen::VectorXd action_log_std;
    double value = 0.0;
};

/// Deterministic single-observation forward pass in double precision.
inline ForwardResult forward(const ParamVector& params, const NetArch& arch,
                             const Eigen::VectorXd& obs) {
    if (obs.size() != arch.obs_dim)
        throw ArchMismatch("observation length does not match the architecture");
    const Net<double> net = Net<double>::unpack(params, arch);
    Eigen::MatrixXd mean;
    Eigen::VectorXd value;
    net.heads(obs.transpose(), mean, value);
    ForwardResult out;
    out.action_mean = mean.row(0).transpose();
    out.action_log_std = net.log_std;
    out.value = value(0);
    return out;
}

}  // namespace roska::policy
