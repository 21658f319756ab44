#include "rabc/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double polynomial(const double* c, int n, double x) {
    double r = c[n - 1];
    for (int i = n - 2; i >= 0; --i) r = r * x + c[i];
    return r;
}

}  // namespace

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("normal_quantile: q must lie in (0,1)");

    // Wichura's algorithm AS 241 (PPND16).
    static const double a[8] = {3.3871328727963666080e0,  1.3314166789178437745e2,
                                1.9715909503065514427e3,  1.3731693765509461125e4,
                                4.5921953931549871457e4,  6.7265770927008700853e4,
                                3.3430575583588128105e4,  2.5090809287301226727e3};
    static const double b[8] = {1.0,
                                4.2313330701600911252e1,  6.8718700749205790830e2,
                                5.3941960214247511077e3,  2.1213794301586595867e4,
                                3.9307895800092710610e4,  2.8729085735721942674e4,
                                5.2264952788528545610e3};
    static const double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                5.76949722146069140550e0, 3.64784832476320460504e0,
                                1.27045825245236838258e0, 2.41780725177450611770e-1,
                                2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static const double d[8] = {1.0,
                                2.05319162663775882187e0, 1.67638483018380384940e0,
                                6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                1.05075007164441684324e-9};
    static const double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                1.78482653991729133580e0, 2.96560571828504891230e-1,
                                2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static const double f[8] = {1.0,
                                5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                2.04426310338993978564e-15};

    const double r = q - 0.5;
    if (std::abs(r) <= 0.425) {
        const double s = 0.180625 - r * r;
        return r * polynomial(a, 8, s) / polynomial(b, 8, s);
    }
    const double tail = r < 0.0 ? q : 1.0 - q;
    const double v = std::sqrt(-std::log(tail));
    double x;
    if (v <= 5.0) {
        const double u = v - 1.6;
        x = polynomial(c, 8, u) / polynomial(d, 8, u);
    } else {
        const double u = v - 5.0;
        x = polynomial(e, 8, u) / polynomial(f, 8, u);
    }
    return r < 0.0 ? -x : x;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double RandomStream::normal() { return normal_quantile(uniform()); }

double RandomStream::gamma(double shape) {
    if (shape < 1.0) throw std::invalid_argument("RandomStream::gamma: shape must be >= 1");
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

void PriorSpec::validate() const {
    switch (kind) {
        case Kind::Uniform:
            if (!(a < b)) throw std::invalid_argument("uniform prior requires lo < hi");
            break;
        case Kind::Gaussian:
            if (!(b > 0.0)) throw std::invalid_argument("gaussian prior requires variance > 0");
            break;
        case Kind::Laplace:
            if (!(b > 0.0)) throw std::invalid_argument("laplace prior requires scale > 0");
            break;
        case Kind::Exponential:
            if (!(a > 0.0)) throw std::invalid_argument("exponential prior requires scale > 0");
            break;
        case Kind::SpikeSlab:
            if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("spike_slab prior requires 0 < p < 1");
            if (!(b > 0.0)) throw std::invalid_argument("spike_slab prior requires scale > 0");
            break;
    }
}

double PriorSpec::mean() const {
    switch (kind) {
        case Kind::Uniform: return 0.5 * (a + b);
        case Kind::Gaussian: return a;
        case Kind::Laplace: return a;
        case Kind::Exponential: return a;
        case Kind::SpikeSlab: return 0.0;
    }
    return 0.0;
}

double PriorSpec::variance() const {
    switch (kind) {
        case Kind::Uniform: return (b - a) * (b - a) / 12.0;
        case Kind::Gaussian: return b;
        case Kind::Laplace: return 2.0 * b * b;
        case Kind::Exponential: return a * a;
        case Kind::SpikeSlab: return (1.0 - a) * 2.0 * b * b;
    }
    return 0.0;
}

double sample(const PriorSpec& prior, RandomStream& rng) {
    prior.validate();
    switch (prior.kind) {
        case PriorSpec::Kind::Uniform: return rng.uniform(prior.a, prior.b);
        case PriorSpec::Kind::Gaussian: return rng.normal(prior.a, std::sqrt(prior.b));
        case PriorSpec::Kind::Laplace: return rng.laplace(prior.a, prior.b);
        case PriorSpec::Kind::Exponential: return rng.exponential(prior.a);
        case PriorSpec::Kind::SpikeSlab:
            return rng.uniform() < prior.a ? 0.0 : rng.laplace(0.0, prior.b);
    }
    return 0.0;
}

LogDensity log_density(const PriorSpec& prior, double x) {
    prior.validate();
    switch (prior.kind) {
        case PriorSpec::Kind::Uniform:
            if (x < prior.a || x > prior.b) return {kNegInf, false};
            return {-std::log(prior.b - prior.a), false};
        case PriorSpec::Kind::Gaussian: {
            const double z = (x - prior.a);
            return {-0.5 * std::log(2.0 * M_PI * prior.b) - 0.5 * z * z / prior.b, false};
        }
        case PriorSpec::Kind::Laplace:
            return {-std::log(2.0 * prior.b) - std::abs(x - prior.a) / prior.b, false};
        case PriorSpec::Kind::Exponential:
            if (x < 0.0) return {kNegInf, false};
            return {-std::log(prior.a) - x / prior.a, false};
        case PriorSpec::Kind::SpikeSlab:
            if (x == 0.0) return {std::log(prior.a), true};
            return {std::log(1.0 - prior.a) - std::log(2.0 * prior.b) - std::abs(x) / prior.b, false};
    }
    return {kNegInf, false};
}

void JointPrior::validate() const {
    if (components.empty()) throw std::invalid_argument("JointPrior: no components");
    for (const auto& c : components) c.validate();
}

bool JointPrior::in_support(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index j = 0; j < dim(); ++j) {
        if (rabc::log_density(components[static_cast<std::size_t>(j)], x[j]).value == kNegInf)
            return false;
    }
    return !support || support(x);
}

Eigen::VectorXd JointPrior::sample(RandomStream& rng) const {
    Eigen::VectorXd x(dim());
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        for (Eigen::Index j = 0; j < dim(); ++j)
            x[j] = rabc::sample(components[static_cast<std::size_t>(j)], rng);
        if (!support || support(x)) return x;
    }
    throw std::runtime_error("JointPrior::sample: support predicate rejected 1e6 draws");
}

double JointPrior::log_density(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("JointPrior::log_density: dimension mismatch");
    if (support && !support(x)) return kNegInf;
    double total = 0.0;
    for (Eigen::Index j = 0; j < dim(); ++j)
        total += rabc::log_density(components[static_cast<std::size_t>(j)], x[j]).value;
    return total;
}

double sample_alpha_stable(double alpha, double beta, RandomStream& rng) {
    if (!(alpha > 1.0 && alpha <= 2.0))
        throw std::invalid_argument("sample_alpha_stable: alpha must lie in (1,2]");
    if (!(beta >= -1.0 && beta <= 1.0))
        throw std::invalid_argument("sample_alpha_stable: beta must lie in [-1,1]");

    const double v = M_PI * (rng.uniform() - 0.5);
    const double w = rng.exponential(1.0);
    const double tan_half = std::tan(0.5 * M_PI * alpha);
    const double theta0 = std::atan(beta * tan_half) / alpha;
    const double scale = std::pow(1.0 + beta * beta * tan_half * tan_half, 0.5 / alpha);
    const double x = scale * std::sin(alpha * (v + theta0)) /
                     std::pow(std::cos(v), 1.0 / alpha) *
                     std::pow(std::cos(v - alpha * (v + theta0)) / w, (1.0 - alpha) / alpha);
    return x;
}

double sample_standardized_t(double nu, RandomStream& rng) {
    if (!(nu > 2.0)) throw std::invalid_argument("sample_standardized_t: nu must exceed 2");
    const double z = rng.normal();
    const double g = rng.gamma(0.5 * nu);  // chi^2_nu = 2 * Gamma(nu/2)
    return z * std::sqrt((nu - 2.0) / (2.0 * g));
}

double standardized_t_logpdf(double x, double nu) {
    if (!(nu > 2.0)) throw std::invalid_argument("standardized_t_logpdf: nu must exceed 2");
    const double m = nu - 2.0;
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(M_PI * m) -
           0.5 * (nu + 1.0) * std::log1p(x * x / m);
}

}  // namespace rabc
