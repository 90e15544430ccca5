// Copyright 2026 The clbcs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "clbcs/error.hpp"
#include "clbcs/observable.hpp"
#include "clbcs/rng.hpp"
#include "clbcs/schemes.hpp"
#include "clbcs/summation.hpp"
#include "clbcs/variance.hpp"

namespace clbcs {

/// Unconstrained parameters of a composite LBCS scheme. Probabilities are
/// obtained as Normalize(SoftPlus(theta)) per simplex.
struct RawParams {
    std::size_t n_sub = 0;
    std::size_t n_qubits = 0;
    std::vector<double> theta_r;    // n_sub
    std::vector<double> theta_beta; // n_sub x n_qubits x 3, row-major

    RawParams() = default;
    RawParams(std::size_t subs, std::size_t qubits)
        : n_sub(subs), n_qubits(qubits), theta_r(subs, 0.0), theta_beta(subs * qubits * 3, 0.0) {}

    std::size_t beta_offset(std::size_t k, std::size_t i) const noexcept { return (k * n_qubits + i) * 3; }

    double &beta(std::size_t k, std::size_t i, std::size_t a) noexcept { return theta_beta[beta_offset(k, i) + a]; }
    double beta(std::size_t k, std::size_t i, std::size_t a) const noexcept {
        return theta_beta[beta_offset(k, i) + a];
    }

    bool all_finite() const noexcept {
        auto ok = [](double x) { return std::isfinite(x); };
        return std::all_of(theta_r.begin(), theta_r.end(), ok) &&
               std::all_of(theta_beta.begin(), theta_beta.end(), ok);
    }

    friend bool operator==(const RawParams &, const RawParams &) = default;
};

struct TrainConfig {
    double lr_beta = 5e-3;
    double lr_r = 5e-4;
    std::size_t batch_size = 500;
    bool rescale = true;
    bool ttur = true;
    std::size_t stop_window = 1000;
    double stop_rel = 1e-3;
    double softplus_sharpness = 1.0;
    std::uint64_t seed = 0;
    double h_floor = 1e-12;
    double near_one_hot = 0.98;
    std::size_t eval_interval = 100;
    std::size_t max_steps = 200000;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (!(lr_beta > 0.0) || !(lr_r > 0.0)) {
            throw DomainError("TrainConfig: learning rates must be positive");
        }
        if (batch_size == 0) {
            throw DomainError("TrainConfig: batch_size must be at least 1");
        }
        if (!(stop_rel > 0.0 && stop_rel < 1.0)) {
            throw DomainError("TrainConfig: stop_rel must lie in (0, 1)");
        }
        if (!(softplus_sharpness > 0.0)) {
            throw DomainError("TrainConfig: softplus_sharpness must be positive");
        }
        if (!(h_floor > 0.0)) {
            throw DomainError("TrainConfig: h_floor must be positive");
        }
        if (!(near_one_hot > 1.0 / 3.0 && near_one_hot < 1.0)) {
            throw DomainError("TrainConfig: near_one_hot must lie in (1/3, 1)");
        }
        if (eval_interval == 0 || stop_window == 0) {
            throw DomainError("TrainConfig: eval_interval and stop_window must be positive");
        }
    }
};

// SoftPlus(x) = log(1 + exp(s x)) / s, evaluated without overflow.
inline double softplus(double x, double s) noexcept {
    const double sx = s * x;
    return (std::max(sx, 0.0) + std::log1p(std::exp(-std::abs(sx)))) / s;
}

inline double softplus_derivative(double x, double s) noexcept {
    const double sx = s * x;
    if (sx >= 0.0) {
        return 1.0 / (1.0 + std::exp(-sx));
    }
    const double e = std::exp(sx);
    return e / (1.0 + e);
}

/// x with softplus(x, s) == z, for z > 0.
inline double softplus_inverse(double z, double s) noexcept {
    const double sz = s * z;
    return (sz + std::log(-std::expm1(-sz))) / s;
}

/// Normalize(SoftPlus(theta)) for one simplex.
inline void softplus_normalize(std::span<const double> theta, double s, std::span<double> out) {
    double total = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        out[i] = softplus(theta[i], s);
        total += out[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalError("softplus_normalize: degenerate parameters");
    }
    for (double &x : out) {
        x /= total;
    }
}

/// Realized probabilities, stored flat to avoid re-validating during training.
struct RealizedProbs {
    std::vector<double> r;
    std::vector<double> beta; // same layout as RawParams::theta_beta
};

inline RealizedProbs realize_probs(const RawParams &params, double sharpness) {
    RealizedProbs p;
    p.r.resize(params.n_sub);
    p.beta.resize(params.theta_beta.size());
    softplus_normalize(params.theta_r, sharpness, p.r);
    for (std::size_t off = 0; off < params.theta_beta.size(); off += 3) {
        softplus_normalize(std::span<const double>(params.theta_beta).subspan(off, 3), sharpness,
                           std::span<double>(p.beta).subspan(off, 3));
    }
    return p;
}

/// The composite scheme described by raw parameters.
inline CompositeScheme realize(const RawParams &params, double sharpness = 1.0) {
    const auto p = realize_probs(params, sharpness);
    std::vector<LbcsScheme> subs;
    subs.reserve(params.n_sub);
    for (std::size_t k = 0; k < params.n_sub; ++k) {
        std::vector<PauliTriple> beta(params.n_qubits);
        for (std::size_t i = 0; i < params.n_qubits; ++i) {
            const std::size_t off = params.beta_offset(k, i);
            beta[i] = {p.beta[off], p.beta[off + 1], p.beta[off + 2]};
        }
        subs.emplace_back(std::move(beta));
    }
    return CompositeScheme(p.r, std::move(subs));
}

/// Non-identity positions of each term and the (X,Y,Z) slot they select.
struct TermSupports {
    struct Entry {
        std::uint32_t qubit;
        std::uint8_t slot;
    };
    std::vector<std::vector<Entry>> entries;

    explicit TermSupports(const Observable &obs) : entries(obs.size()) {
        for (std::size_t j = 0; j < obs.size(); ++j) {
            const auto &p = obs[j].pauli;
            for (std::size_t i = 0; i < p.num_qubits(); ++i) {
                if (p[i] != PauliOp::I) {
                    entries[j].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint8_t>(xyz_index(p[i]))});
                }
            }
        }
    }
};

struct BatchGradient {
    double cost = 0.0; // batch-restricted V with h floored
    RawParams grad;
};

/// Analytic gradient of the batch-restricted V with respect to the raw
/// parameters. h_j below config.h_floor is replaced by the floor in both the
/// cost and dV/dh_j. With config.rescale the beta block of sub-scheme k is
/// divided by max(r_k, h_floor).
inline BatchGradient batch_gradient(const Observable &obs, const TermSupports &supports, const RawParams &params,
                                    const TermBatch &batch, const TrainConfig &config) {
    const double s = config.softplus_sharpness;
    const auto p = realize_probs(params, s);
    const std::size_t n_sub = params.n_sub;
    const double c = haar_constant(obs.num_qubits());

    BatchGradient out;
    out.grad = RawParams(n_sub, params.n_qubits);
    std::vector<double> g_r(n_sub, 0.0);
    std::vector<double> g_beta(params.theta_beta.size(), 0.0);

    std::vector<double> hk(n_sub);
    std::vector<double> prefix;
    std::vector<double> suffix;
    CompensatedSum cost;
    for (std::size_t j : batch.indices) {
        const double a = obs[j].coefficient;
        if (a == 0.0) {
            continue;
        }
        const auto &sup = supports.entries[j];
        const std::size_t w = sup.size();
        double h = 0.0;
        for (std::size_t k = 0; k < n_sub; ++k) {
            double prod = 1.0;
            for (const auto &e : sup) {
                prod *= p.beta[params.beta_offset(k, e.qubit) + e.slot];
            }
            hk[k] = prod;
            h += p.r[k] * prod;
        }
        const double hf = std::max(h, config.h_floor);
        cost.add(c * a * a / hf);
        const double dv_dh = -c * a * a / (hf * hf);

        prefix.assign(w + 1, 1.0);
        suffix.assign(w + 1, 1.0);
        for (std::size_t k = 0; k < n_sub; ++k) {
            g_r[k] += dv_dh * hk[k];
            for (std::size_t t = 0; t < w; ++t) {
                prefix[t + 1] = prefix[t] * p.beta[params.beta_offset(k, sup[t].qubit) + sup[t].slot];
            }
            for (std::size_t t = w; t > 0; --t) {
                suffix[t - 1] = suffix[t] * p.beta[params.beta_offset(k, sup[t - 1].qubit) + sup[t - 1].slot];
            }
            const double scale = dv_dh * p.r[k];
            for (std::size_t t = 0; t < w; ++t) {
                g_beta[params.beta_offset(k, sup[t].qubit) + sup[t].slot] += scale * prefix[t] * suffix[t + 1];
            }
        }
    }
    out.cost = cost.value();

    // Chain through Normalize(SoftPlus(.)) simplex by simplex.
    auto chain = [s](std::span<const double> theta, std::span<const double> prob, std::span<const double> g,
                     std::span<double> dst) {
        double total = 0.0;
        double dot = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            total += softplus(theta[i], s);
            dot += g[i] * prob[i];
        }
        for (std::size_t i = 0; i < theta.size(); ++i) {
            dst[i] = softplus_derivative(theta[i], s) * (g[i] - dot) / total;
        }
    };
    chain(params.theta_r, p.r, g_r, out.grad.theta_r);
    for (std::size_t k = 0; k < n_sub; ++k) {
        const double rescale = config.rescale ? 1.0 / std::max(p.r[k], config.h_floor) : 1.0;
        for (std::size_t i = 0; i < params.n_qubits; ++i) {
            const std::size_t off = params.beta_offset(k, i);
            auto dst = std::span<double>(out.grad.theta_beta).subspan(off, 3);
            chain(std::span<const double>(params.theta_beta).subspan(off, 3),
                  std::span<const double>(p.beta).subspan(off, 3), std::span<const double>(g_beta).subspan(off, 3),
                  dst);
            for (double &x : dst) {
                x *= rescale;
            }
        }
    }
    return out;
}

inline BatchGradient batch_gradient(const Observable &obs, const RawParams &params, const TermBatch &batch,
                                    const TrainConfig &config) {
    return batch_gradient(obs, TermSupports(obs), params, batch, config);
}

/// Batch-restricted V with the same flooring as batch_gradient.
inline double batch_cost(const Observable &obs, const RawParams &params, const TermBatch &batch,
                         const TrainConfig &config) {
    const auto scheme = realize(params, config.softplus_sharpness);
    const double c = haar_constant(obs.num_qubits());
    CompensatedSum cost;
    for (std::size_t j : batch.indices) {
        const double a = obs[j].coefficient;
        cost.add(c * a * a / std::max(scheme.coverage_prob(obs[j].pauli), config.h_floor));
    }
    return cost.value();
}

/// Start resembling l1 sampling: sub-scheme k targets the k-th largest term,
/// putting `near_one_hot` on that term's operator at each non-identity qubit
/// and the rest evenly on the other two; identity qubits start uniform.
/// r is proportional to |a| of the selected terms.
inline RawParams initialize(const Observable &obs, std::size_t n_sub, double near_one_hot = 0.98,
                            double sharpness = 1.0) {
    if (n_sub == 0 || n_sub > obs.size()) {
        throw DomainError("initialize: number of sub-schemes " + std::to_string(n_sub) + " outside [1, " +
                          std::to_string(obs.size()) + "]");
    }
    if (!(near_one_hot > 0.0 && near_one_hot < 1.0)) {
        throw DomainError("initialize: near_one_hot must lie in (0, 1)");
    }
    RawParams params(n_sub, obs.num_qubits());
    double total = 0.0;
    for (std::size_t k = 0; k < n_sub; ++k) {
        total += std::abs(obs[obs.by_magnitude()[k]].coefficient);
    }
    const double off = (1.0 - near_one_hot) / 2.0;
    for (std::size_t k = 0; k < n_sub; ++k) {
        const Term &t = obs[obs.by_magnitude()[k]];
        params.theta_r[k] = softplus_inverse(std::abs(t.coefficient) / total, sharpness);
        for (std::size_t i = 0; i < obs.num_qubits(); ++i) {
            const PauliOp op = t.pauli[i];
            for (std::size_t a = 0; a < 3; ++a) {
                double target = 1.0 / 3.0;
                if (op != PauliOp::I) {
                    target = static_cast<int>(a) == xyz_index(op) ? near_one_hot : off;
                }
                params.beta(k, i, a) = softplus_inverse(target, sharpness);
            }
        }
    }
    return params;
}

/// Adam over RawParams with separate learning rates for the two blocks.
class AdamOptimizer {
  public:
    AdamOptimizer(const RawParams &shape, double beta1, double beta2, double eps)
        : b1_(beta1), b2_(beta2), eps_(eps), m_(RawParams(shape.n_sub, shape.n_qubits)),
          v_(RawParams(shape.n_sub, shape.n_qubits)) {}

    void step(RawParams &params, const RawParams &grad, double lr_r, double lr_beta) {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        update(params.theta_r, grad.theta_r, m_.theta_r, v_.theta_r, lr_r, c1, c2);
        update(params.theta_beta, grad.theta_beta, m_.theta_beta, v_.theta_beta, lr_beta, c1, c2);
    }

    std::size_t steps() const noexcept { return t_; }

  private:
    void update(std::vector<double> &x, const std::vector<double> &g, std::vector<double> &m, std::vector<double> &v,
                double lr, double c1, double c2) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = b1_ * m[i] + (1.0 - b1_) * g[i];
            v[i] = b2_ * v[i] + (1.0 - b2_) * g[i] * g[i];
            x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }

    double b1_;
    double b2_;
    double eps_;
    std::size_t t_ = 0;
    RawParams m_;
    RawParams v_;
};

struct TraceRecord {
    std::size_t step;
    double full_v;
    double batch_cost; // NaN at step 0
    double seconds;
};

struct TrainTrace {
    std::vector<TraceRecord> records;
};

struct TrainResult {
    CompositeScheme scheme; // realized at the best recorded full V
    RawParams params;
    TrainTrace trace;
    double initial_v = 0.0;
    double best_v = 0.0;
    std::size_t best_step = 0;
    std::size_t steps = 0;
};

/// Called after every optimizer step with the step number and parameters.
using StepObserver = std::function<void(std::size_t, const RawParams &)>;

/// Mini-batch Adam on the average one-shot variance, starting from `start`.
///
/// Each epoch reshuffles the terms with a fresh seed. The full-observable V is
/// evaluated every `eval_interval` steps; training stops once the best value
/// has not improved by more than `stop_rel` (relative) over the trailing
/// `stop_window` steps, or at `max_steps`.
inline TrainResult train_from(const Observable &obs, RawParams start, const TrainConfig &config,
                              const StepObserver &observer = {}) {
    config.validate();
    if (obs.empty()) {
        throw DomainError("train: observable has no non-identity terms");
    }
    if (start.n_qubits != obs.num_qubits() || !start.all_finite()) {
        throw DomainError("train: starting parameters do not match the observable or are not finite");
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    const TermSupports supports(obs);
    auto full_v = [&](const RawParams &p) {
        return average_one_shot_variance(obs, realize(p, config.softplus_sharpness)).v;
    };

    TrainResult result;
    RawParams params = std::move(start);
    result.initial_v = full_v(params);
    if (std::isnan(result.initial_v)) {
        throw NumericalError("train: initial cost is NaN");
    }
    result.best_v = result.initial_v;
    result.params = params;
    result.trace.records.push_back({0, result.initial_v, std::numeric_limits<double>::quiet_NaN(), elapsed()});

    // best-so-far after each evaluation, for the trailing-window stop rule.
    std::vector<std::pair<std::size_t, double>> best_history{{0, result.best_v}};

    AdamOptimizer adam(params, config.adam_beta1, config.adam_beta2, config.adam_eps);
    const double lr_r = config.ttur ? config.lr_r : config.lr_beta;
    std::size_t step = 0;
    bool done = false;
    for (std::uint64_t epoch = 0; !done; ++epoch) {
        const auto batches = make_batches(obs, config.batch_size, derive_seed(config.seed, "batching", epoch));
        for (const auto &batch : batches) {
            const auto g = batch_gradient(obs, supports, params, batch, config);
            if (!std::isfinite(g.cost) || !g.grad.all_finite()) {
                throw NumericalError("train: non-finite batch cost or gradient at step " + std::to_string(step));
            }
            adam.step(params, g.grad, lr_r, config.lr_beta);
            ++step;
            if (observer) {
                observer(step, params);
            }
            if (step % config.eval_interval == 0 || step >= config.max_steps) {
                const double v = full_v(params);
                if (std::isnan(v)) {
                    throw NumericalError("train: full cost is NaN at step " + std::to_string(step));
                }
                result.trace.records.push_back({step, v, g.cost, elapsed()});
                if (v < result.best_v) {
                    result.best_v = v;
                    result.best_step = step;
                    result.params = params;
                }
                best_history.emplace_back(step, result.best_v);
                if (step >= config.stop_window) {
                    double best_then = best_history.front().second;
                    for (const auto &[s, b] : best_history) {
                        if (s + config.stop_window > step) {
                            break;
                        }
                        best_then = b;
                    }
                    if (result.best_v > best_then * (1.0 - config.stop_rel)) {
                        done = true;
                    }
                }
            }
            if (step >= config.max_steps) {
                done = true;
            }
            if (done) {
                break;
            }
        }
    }
    result.steps = step;
    result.scheme = realize(result.params, config.softplus_sharpness);
    return result;
}

inline TrainResult train(const Observable &obs, std::size_t n_sub, const TrainConfig &config,
                         const StepObserver &observer = {}) {
    config.validate();
    return train_from(obs, initialize(obs, n_sub, config.near_one_hot, config.softplus_sharpness), config, observer);
}

/// Trace as CSV: a comment line with the optimizer flags, then
/// step,full_V,batch_cost,seconds.
inline void write_trace_csv(std::ostream &out, const TrainTrace &trace, const TrainConfig &config) {
    out << "# rescale=" << (config.rescale ? "on" : "off") << " ttur=" << (config.ttur ? "on" : "off")
        << " lr_beta=" << config.lr_beta << " lr_r=" << config.lr_r << " batch_size=" << config.batch_size
        << " seed=" << config.seed << '\n';
    const auto old_precision = out.precision(17);
    out << "step,full_V,batch_cost,seconds\n";
    for (const auto &r : trace.records) {
        out << r.step << ',' << r.full_v << ',';
        if (std::isnan(r.batch_cost)) {
            out << "nan";
        } else {
            out << r.batch_cost;
        }
        out << ',' << r.seconds << '\n';
    }
    out.precision(old_precision);
}

} // namespace clbcs
