#include "sgamp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sgamp/errors.hpp"

namespace sgamp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::initializer_list<std::uint64_t> words) {
    std::vector<std::uint32_t> seq;
    for (std::uint64_t w : words) {
        const std::uint64_t h = splitmix64(w);
        seq.push_back(static_cast<std::uint32_t>(h));
        seq.push_back(static_cast<std::uint32_t>(h >> 32));
    }
    std::seed_seq ss(seq.begin(), seq.end());
    return std::mt19937_64(ss);
}

double parse_number(std::string_view text, std::string_view what) {
    std::string s(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("prior: cannot parse " + std::string(what) + " '" + s + "'");
    }
}

} // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded_engine({seed})) {}

Rng Rng::for_stream(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b) {
    Rng rng(0);
    rng.engine_ = seeded_engine({master_seed, a, b, 0x5347414d50ULL});
    return rng;
}

// ---------------------------------------------------------------------------
// Prior

Prior Prior::gaussian(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw DomainError("gaussian prior: variance must be positive and finite");
    Prior p;
    p.kind_ = PriorKind::Gaussian;
    p.variance_ = variance;
    return p;
}

Prior Prior::constant_amplitude(double amplitude) {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw DomainError("constant-amplitude prior: amplitude must be positive and finite");
    Prior p;
    p.kind_ = PriorKind::ConstantAmplitude;
    p.points_ = {{amplitude, 0.5}, {-amplitude, 0.5}};
    return p;
}

Prior Prior::discrete(std::vector<MixturePoint> points) {
    if (points.empty()) throw DomainError("discrete prior: no points");
    if (points.size() > kMaxPoints) throw DomainError("discrete prior: more than 64 points");
    double total = 0.0;
    for (const auto& pt : points) {
        if (!std::isfinite(pt.value) || pt.value == 0.0)
            throw DomainError("discrete prior: point values must be finite and non-zero");
        if (!(pt.probability > 0.0) || pt.probability > 1.0)
            throw DomainError("discrete prior: probabilities must lie in (0, 1]");
        total += pt.probability;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("discrete prior: probabilities must sum to 1");
    Prior p;
    p.kind_ = PriorKind::DiscreteMixture;
    p.points_ = std::move(points);
    return p;
}

Prior Prior::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError("prior: expected 'gauss:P', 'const:u' or 'mix:u@p,...', got '" + std::string(text) + "'");
    const std::string_view head = text.substr(0, colon);
    const std::string_view body = text.substr(colon + 1);
    try {
        if (head == "gauss" || head == "gaussian") return gaussian(parse_number(body, "variance"));
        if (head == "const" || head == "constant") return constant_amplitude(parse_number(body, "amplitude"));
        if (head == "mix" || head == "discrete") {
            std::vector<MixturePoint> pts;
            std::size_t start = 0;
            while (start <= body.size()) {
                auto comma = body.find(',', start);
                if (comma == std::string_view::npos) comma = body.size();
                const auto item = body.substr(start, comma - start);
                const auto at = item.find('@');
                if (at == std::string_view::npos) throw ConfigError("prior: mixture item must be 'value@prob'");
                pts.push_back({parse_number(item.substr(0, at), "value"), parse_number(item.substr(at + 1), "probability")});
                start = comma + 1;
            }
            return discrete(std::move(pts));
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("prior: ") + e.what());
    }
    throw ConfigError("prior: unknown kind '" + std::string(head) + "'");
}

double Prior::second_moment() const {
    if (is_gaussian()) return variance_;
    double s = 0.0;
    for (const auto& pt : points_) s += pt.probability * pt.value * pt.value;
    return s;
}

double Prior::fourth_moment() const {
    if (is_gaussian()) return 3.0 * variance_ * variance_;
    double s = 0.0;
    for (const auto& pt : points_) s += pt.probability * std::pow(pt.value, 4);
    return s;
}

double Prior::min_amplitude() const {
    if (is_gaussian()) return 0.0;
    double m = std::abs(points_.front().value);
    for (const auto& pt : points_) m = std::min(m, std::abs(pt.value));
    return m;
}

bool Prior::symmetric() const {
    if (is_gaussian()) return true;
    for (const auto& pt : points_) {
        const bool mirrored = std::any_of(points_.begin(), points_.end(), [&](const MixturePoint& q) {
            return q.value == -pt.value && q.probability == pt.probability;
        });
        if (!mirrored) return false;
    }
    return true;
}

Prior Prior::scaled_to_unit_power() const {
    const double p = second_moment();
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("prior: cannot rescale to unit power");
    Prior out = *this;
    if (is_gaussian()) {
        out.variance_ = 1.0;
    } else {
        const double c = 1.0 / std::sqrt(p);
        for (auto& pt : out.points_) pt.value *= c;
    }
    return out;
}

double Prior::sample(Rng& rng) const {
    if (is_gaussian()) return std::sqrt(variance_) * rng.normal();
    const double r = rng.uniform();
    double acc = 0.0;
    for (const auto& pt : points_) {
        acc += pt.probability;
        if (r < acc) return pt.value;
    }
    return points_.back().value;
}

std::string Prior::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case PriorKind::Gaussian: os << "gauss:" << variance_; break;
    case PriorKind::ConstantAmplitude: os << "const:" << points_.front().value; break;
    case PriorKind::DiscreteMixture:
        os << "mix:";
        for (std::size_t i = 0; i < points_.size(); ++i)
            os << (i ? "," : "") << points_[i].value << '@' << points_[i].probability;
        break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// ProblemDims

ProblemDims ProblemDims::make(std::size_t n, std::size_t k, double delta) {
    if (n < 2) throw DomainError("dims: N must be at least 2");
    if (k < 1 || k >= n) throw DomainError("dims: need 1 <= k < N");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("dims: delta must be positive");
    ProblemDims d;
    d.n = n;
    d.k = k;
    d.delta = delta;
    const double m = std::round(delta * static_cast<double>(k) * d.log_ratio());
    d.m = static_cast<std::size_t>(std::max(1.0, m));
    return d;
}

double ProblemDims::log_ratio() const {
    return std::log(static_cast<double>(n) / static_cast<double>(k));
}

double ProblemDims::delta_eff() const {
    return static_cast<double>(m) / (static_cast<double>(k) * log_ratio());
}

// ---------------------------------------------------------------------------
// Channel

Channel Channel::linear(double sigma2) {
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw DomainError("channel: noise variance must be >= 0");
    return {ChannelKind::Linear, sigma2};
}

Channel Channel::one_bit(double sigma2) {
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw DomainError("channel: noise variance must be >= 0");
    return {ChannelKind::OneBitSign, sigma2};
}

Channel Channel::parse(std::string_view kind, double sigma2) {
    try {
        if (kind == "linear") return linear(sigma2);
        if (kind == "onebit" || kind == "1bit" || kind == "sign") return one_bit(sigma2);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("channel: unknown kind '" + std::string(kind) + "' (expected linear or onebit)");
}

std::string Channel::name() const {
    return kind == ChannelKind::Linear ? "linear" : "onebit";
}

double noise_variance_from_snr_db(double snr_db) {
    return std::pow(10.0, -snr_db / 10.0);
}

// ---------------------------------------------------------------------------
// Sampling

SignalInstance sample_signal(const ProblemDims& dims, const Prior& prior, Rng& rng) {
    SignalInstance s;
    s.support.resize(dims.k);
    // Partial Fisher-Yates over an index pool; uniform k-subset without replacement.
    std::vector<std::size_t> pool(dims.n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < dims.k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, dims.n - 1);
        std::swap(pool[i], pool[pick(rng.engine())]);
    }
    std::copy_n(pool.begin(), dims.k, s.support.begin());
    std::sort(s.support.begin(), s.support.end());

    s.x = Vector::Zero(static_cast<Eigen::Index>(dims.n));
    s.u.resize(static_cast<Eigen::Index>(dims.k));
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims.k));
    for (std::size_t i = 0; i < dims.k; ++i) {
        const double u = prior.sample(rng);
        s.u[static_cast<Eigen::Index>(i)] = u;
        s.x[static_cast<Eigen::Index>(s.support[i])] = u * scale;
    }
    return s;
}

Matrix sample_matrix(const ProblemDims& dims, Rng& rng) {
    Matrix a(static_cast<Eigen::Index>(dims.m), static_cast<Eigen::Index>(dims.n));
    double* data = a.data();
    const auto size = a.size();
    for (Eigen::Index i = 0; i < size; ++i) data[i] = rng.normal();
    return a;
}

Vector apply_channel(const Channel& channel, const Vector& z, Rng& rng) {
    const double sd = std::sqrt(channel.noise_variance);
    Vector y(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double w = sd > 0.0 ? sd * rng.normal() : 0.0;
        const double v = z[i] + w;
        y[i] = channel.kind == ChannelKind::Linear ? v : (v >= 0.0 ? 1.0 : -1.0);
    }
    return y;
}

} // namespace sgamp
