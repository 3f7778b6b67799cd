#include "gaal/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "gaal/binary_io.hpp"
#include "gaal/errors.hpp"
#include "gaal/rng.hpp"

namespace gaal {

void LabeledSet::add(Tensor x, int label) {
    if (label != 1 && label != -1) throw ContractError("label must be -1 or +1, got " + std::to_string(label));
    if (!instances.empty() && x.numel() != instances.front().numel())
        throw DimensionError("instance has " + std::to_string(x.numel()) + " features, set uses " +
                             std::to_string(instances.front().numel()));
    instances.push_back(std::move(x));
    labels.push_back(label);
}

LabeledSet LabeledSet::from(const Dataset& ds) {
    LabeledSet s;
    for (std::size_t i = 0; i < ds.size(); ++i) s.add(ds.instances[i], ds.labels[i]);
    return s;
}

void SvmConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("svm lambda must be positive", "svm_lambda");
    if (!(tolerance > 0.0)) throw ConfigError("svm tolerance must be positive", "svm_tolerance");
    if (max_iterations == 0) throw ConfigError("svm iteration cap must be positive", "svm_max_iterations");
    if (solver == SvmSolver::Pegasos && epochs == 0) throw ConfigError("svm epochs must be positive", "svm_epochs");
}

LinearClassifier::LinearClassifier(Tensor weights, double bias) : weights_(std::move(weights)), bias_(bias) {
    if (weights_.rank() != 1) throw DimensionError("classifier weights must be a vector, got " + shape_string(weights_.shape()));
    if (!weights_.all_finite() || !std::isfinite(bias_)) throw ContractError("classifier parameters must be finite");
}

double decision_value(const LinearClassifier& clf, std::span<const double> x) {
    if (x.size() != clf.feature_dim())
        throw DimensionError("classifier expects " + std::to_string(clf.feature_dim()) + " features, got " +
                             std::to_string(x.size()));
    return dot(clf.weights().data(), x) + clf.bias();
}

int predict(const LinearClassifier& clf, std::span<const double> x) { return decision_value(clf, x) >= 0.0 ? 1 : -1; }

namespace {

template <typename Instances>
double accuracy_of(const LinearClassifier& clf, const Instances& xs, const std::vector<int>& ys) {
    if (xs.empty()) throw ContractError("accuracy needs a non-empty test set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) correct += predict(clf, xs[i]) == ys[i];
    return static_cast<double>(correct) / static_cast<double>(xs.size());
}

void check_set(const LabeledSet& s) {
    if (s.empty()) throw ContractError("svm_train needs at least one labeled instance");
    if (s.labels.size() != s.instances.size()) throw ContractError("labeled set counts disagree");
    const std::size_t dim = s.instances.front().numel();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.instances[i].numel() != dim) throw DimensionError("labeled set mixes feature dimensions");
        if (s.labels[i] != 1 && s.labels[i] != -1) throw ContractError("labels must be -1 or +1");
    }
}

// Dual of  1/2 |w|^2 + C sum_i hinge_i  with C = 1 / (lambda n), which is the
// mean-hinge objective scaled by 1/lambda:
//   min_a 1/2 a'Qa - e'a   s.t. 0 <= a_i <= C, y'a = 0,   Q_ij = y_i y_j x_i.x_j
// Pairwise updates follow the LIBSVM solver (Fan, Chen & Lin 2005).
class DualSolver {
public:
    DualSolver(const LabeledSet& s, double c, double tolerance, std::size_t max_iterations)
        : s_(s), n_(s.size()), c_(c), tol_(tolerance), max_iter_(max_iterations), alpha_(n_, 0.0), grad_(n_, -1.0) {
        if (n_ <= kCacheLimit) {
            gram_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i; j < n_; ++j)
                    gram_[i * n_ + j] = gram_[j * n_ + i] = dot(s_.instances[i].data(), s_.instances[j].data());
        }
        diag_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) diag_[i] = kernel(i, i);
    }

    LinearClassifier solve() {
        std::vector<double> qi(n_), qj(n_);
        for (std::size_t iter = 0; iter < max_iter_; ++iter) {
            std::size_t i = 0, j = 0;
            if (!select(i, j)) break;
            row(i, qi);
            row(j, qj);
            const double old_i = alpha_[i], old_j = alpha_[j];
            update_pair(i, j, qi[j]);
            const double di = alpha_[i] - old_i, dj = alpha_[j] - old_j;
            for (std::size_t k = 0; k < n_; ++k) grad_[k] += qi[k] * di + qj[k] * dj;
        }

        const std::size_t dim = s_.instances.front().numel();
        Tensor w(Shape{dim}, 0.0);
        for (std::size_t k = 0; k < n_; ++k) {
            if (alpha_[k] == 0.0) continue;
            const double coef = alpha_[k] * y(k);
            auto x = s_.instances[k].data();
            for (std::size_t d = 0; d < dim; ++d) w[d] += coef * x[d];
        }
        return LinearClassifier(std::move(w), -rho());
    }

private:
    static constexpr std::size_t kCacheLimit = 2500;
    static constexpr double kTau = 1e-12;

    double y(std::size_t k) const { return static_cast<double>(s_.labels[k]); }
    bool at_upper(std::size_t k) const { return alpha_[k] >= c_; }
    bool at_lower(std::size_t k) const { return alpha_[k] <= 0.0; }

    double kernel(std::size_t a, std::size_t b) const {
        if (!gram_.empty()) return gram_[a * n_ + b];
        return dot(s_.instances[a].data(), s_.instances[b].data());
    }

    void row(std::size_t i, std::vector<double>& out) const {
        for (std::size_t k = 0; k < n_; ++k) out[k] = y(i) * y(k) * kernel(i, k);
    }

    // Second-order working set selection; false once the KKT gap is below tolerance.
    bool select(std::size_t& out_i, std::size_t& out_j) const {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n_;
        for (std::size_t t = 0; t < n_; ++t) {
            if (y(t) > 0) {
                if (!at_upper(t) && -grad_[t] > gmax) gmax = -grad_[t], i = t;
            } else {
                if (!at_lower(t) && grad_[t] > gmax) gmax = grad_[t], i = t;
            }
        }
        if (i == n_) return false;

        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = n_;
        for (std::size_t t = 0; t < n_; ++t) {
            double grad_diff = 0.0, quad = 0.0;
            if (y(t) > 0) {
                if (at_lower(t)) continue;
                grad_diff = gmax + grad_[t];
                gmax2 = std::max(gmax2, grad_[t]);
                quad = diag_[i] + diag_[t] - 2.0 * y(i) * y(i) * y(t) * kernel(i, t);
            } else {
                if (at_upper(t)) continue;
                grad_diff = gmax - grad_[t];
                gmax2 = std::max(gmax2, -grad_[t]);
                quad = diag_[i] + diag_[t] + 2.0 * y(i) * y(i) * y(t) * kernel(i, t);
            }
            if (grad_diff > 0.0) {
                const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                if (obj < best) best = obj, j = t;
            }
        }
        if (gmax + gmax2 < tol_ || j == n_) return false;
        out_i = i;
        out_j = j;
        return true;
    }

    void update_pair(std::size_t i, std::size_t j, double qij) {
        double& ai = alpha_[i];
        double& aj = alpha_[j];
        const double c = c_;
        if (s_.labels[i] != s_.labels[j]) {
            double quad = diag_[i] + diag_[j] + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) aj = 0.0, ai = diff;
            } else {
                if (ai < 0.0) ai = 0.0, aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > c) ai = c, aj = c - diff;
            } else {
                if (aj > c) aj = c, ai = c + diff;
            }
        } else {
            double quad = diag_[i] + diag_[j] - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) ai = c, aj = sum - c;
            } else {
                if (aj < 0.0) aj = 0.0, ai = sum;
            }
            if (sum > c) {
                if (aj > c) aj = c, ai = sum - c;
            } else {
                if (ai < 0.0) ai = 0.0, aj = sum;
            }
        }
    }

    double rho() const {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double free_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t k = 0; k < n_; ++k) {
            const double yg = y(k) * grad_[k];
            if (at_upper(k)) {
                if (y(k) < 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else if (at_lower(k)) {
                if (y(k) > 0) ub = std::min(ub, yg);
                else lb = std::max(lb, yg);
            } else {
                ++free_count;
                free_sum += yg;
            }
        }
        if (free_count > 0) return free_sum / static_cast<double>(free_count);
        return 0.5 * (ub + lb);
    }

    const LabeledSet& s_;
    std::size_t n_;
    double c_;
    double tol_;
    std::size_t max_iter_;
    std::vector<double> alpha_;
    std::vector<double> grad_;
    std::vector<double> gram_;
    std::vector<double> diag_;
};

LinearClassifier train_pegasos(const LabeledSet& s, const SvmConfig& config) {
    const std::size_t n = s.size(), dim = s.instances.front().numel();
    Rng rng(config.seed);
    std::vector<double> w(dim, 0.0), w_avg(dim, 0.0);
    double b = 0.0, b_avg = 0.0;
    std::size_t t = 0, averaged = 0;
    const std::size_t total = config.epochs * n;
    for (std::size_t step = 0; step < total; ++step) {
        ++t;
        const std::size_t i = rng.below(n);
        const double eta = 1.0 / (config.lambda * static_cast<double>(t));
        auto x = s.instances[i].data();
        const double yi = s.labels[i];
        const double margin = yi * (dot(w, x) + b);
        const double shrink = 1.0 - eta * config.lambda;
        for (auto& v : w) v *= shrink;
        if (margin < 1.0) {
            for (std::size_t d = 0; d < dim; ++d) w[d] += eta * yi * x[d];
            b += eta * yi;
        }
        // Project onto the ball of radius 1/sqrt(lambda) that contains the optimum.
        const double norm = std::sqrt(dot(w, w));
        const double radius = 1.0 / std::sqrt(config.lambda);
        if (norm > radius)
            for (auto& v : w) v *= radius / norm;
        if (step >= total / 2) {
            ++averaged;
            const double k = 1.0 / static_cast<double>(averaged);
            for (std::size_t d = 0; d < dim; ++d) w_avg[d] += k * (w[d] - w_avg[d]);
            b_avg += k * (b - b_avg);
        }
    }
    return LinearClassifier(Tensor::vector(std::move(w_avg)), b_avg);
}

}  // namespace

LinearClassifier svm_train(const LabeledSet& s, const SvmConfig& config) {
    config.validate();
    check_set(s);
    const std::size_t dim = s.instances.front().numel();
    const bool has_pos = std::find(s.labels.begin(), s.labels.end(), 1) != s.labels.end();
    const bool has_neg = std::find(s.labels.begin(), s.labels.end(), -1) != s.labels.end();
    if (!(has_pos && has_neg)) return LinearClassifier(Tensor(Shape{dim}, 0.0), has_pos ? 1.0 : -1.0);

    if (config.solver == SvmSolver::Pegasos) return train_pegasos(s, config);
    const double c = 1.0 / (config.lambda * static_cast<double>(s.size()));
    return DualSolver(s, c, config.tolerance, config.max_iterations).solve();
}

double svm_objective(const LinearClassifier& clf, const LabeledSet& s, double lambda) {
    if (s.empty()) throw ContractError("objective needs a non-empty set");
    double hinge = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        hinge += std::max(0.0, 1.0 - s.labels[i] * decision_value(clf, s.instances[i]));
    const double w2 = dot(clf.weights().data(), clf.weights().data());
    return 0.5 * lambda * w2 + hinge / static_cast<double>(s.size());
}

ObjectiveSubgradient svm_objective_subgradient(const LinearClassifier& clf, const LabeledSet& s, double lambda) {
    if (s.empty()) throw ContractError("objective needs a non-empty set");
    ObjectiveSubgradient g{Tensor(clf.weights().shape(), 0.0), 0.0};
    const double inv_n = 1.0 / static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double yi = s.labels[i];
        if (1.0 - yi * decision_value(clf, s.instances[i]) <= 0.0) continue;
        auto x = s.instances[i].data();
        for (std::size_t d = 0; d < x.size(); ++d) g.weights[d] -= inv_n * yi * x[d];
        g.bias -= inv_n * yi;
    }
    for (std::size_t d = 0; d < g.weights.numel(); ++d) g.weights[d] += lambda * clf.weights()[d];
    return g;
}

double accuracy(const LinearClassifier& clf, const Dataset& test) { return accuracy_of(clf, test.instances, test.labels); }

double accuracy(const LinearClassifier& clf, const LabeledSet& test) {
    return accuracy_of(clf, test.instances, test.labels);
}

namespace {
constexpr char kSvmMagic[8] = {'G', 'A', 'A', 'L', 'S', 'V', 'M', '1'};
}

std::vector<std::uint8_t> serialize_classifier(const LinearClassifier& clf) {
    std::vector<std::uint8_t> out(std::begin(kSvmMagic), std::end(kSvmMagic));
    io::put_u32_le(out, static_cast<std::uint32_t>(clf.feature_dim()));
    for (double v : clf.weights().data()) io::put_f64_le(out, v);
    io::put_f64_le(out, clf.bias());
    return out;
}

LinearClassifier deserialize_classifier(std::span<const std::uint8_t> bytes) {
    io::Reader in(bytes, "classifier checkpoint");
    auto magic = in.take(sizeof(kSvmMagic));
    if (std::memcmp(magic.data(), kSvmMagic, sizeof(kSvmMagic)) != 0)
        throw FormatError("classifier checkpoint: bad magic, expected GAALSVM1");
    const std::uint32_t dim = in.u32_le();
    if (dim == 0) throw FormatError("classifier checkpoint: zero feature dimension");
    Tensor w(Shape{dim});
    for (auto& v : w.data()) v = in.f64_le();
    const double b = in.f64_le();
    if (in.remaining() != 0) throw FormatError("classifier checkpoint: trailing bytes");
    return LinearClassifier(std::move(w), b);
}

void save_classifier(const std::filesystem::path& path, const LinearClassifier& clf) {
    io::write_file(path, serialize_classifier(clf));
}

LinearClassifier load_classifier(const std::filesystem::path& path) {
    return deserialize_classifier(io::read_file(path));
}

}  // namespace gaal
