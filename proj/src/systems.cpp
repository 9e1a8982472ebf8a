#include "cycsig/systems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "cycsig/errors.hpp"

namespace cycsig::systems {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Tsitouras (2011) 5(4) tableau.
constexpr double c2 = 0.161, c3 = 0.327, c4 = 0.9, c5 = 0.9800255409045097;
constexpr double a21 = 0.161;
constexpr double a31 = -0.008480655492356989, a32 = 0.335480655492357;
constexpr double a41 = 2.897153057105493, a42 = -6.359448489975075, a43 = 4.3622954328695815;
constexpr double a51 = 5.325864828439257, a52 = -11.748883564062828, a53 = 7.4955393428898365,
                 a54 = -0.09249506636175525;
constexpr double a61 = 5.86145544294642, a62 = -12.92096931784711, a63 = 8.159367898576159,
                 a64 = -0.071584973281401, a65 = -0.028269050394068383;
constexpr double b1 = 0.09646076681806523, b2 = 0.01, b3 = 0.4798896504144996, b4 = 1.379008574103742,
                 b5 = -3.290069515436081, b6 = 2.324710524099774;
constexpr double e1 = 0.001780011052226, e2 = 0.000816434459657, e3 = -0.007880878010262,
                 e4 = 0.144711007173263, e5 = -0.582357165452555, e6 = 0.458082105929187,
                 e7 = -1.0 / 66.0;

struct Tsit5Work {
    explicit Tsit5Work(std::size_t n) : k(7, std::vector<double>(n)), tmp(n) {}
    std::vector<std::vector<double>> k;
    std::vector<double> tmp;
};

// k[0] must already hold f(x). Leaves f(out) in k[6].
void tsit5_core(const VectorField& field, std::span<const double> x, double h, Tsit5Work& w,
                std::span<double> out, std::span<double> err) {
    const std::size_t n = x.size();
    auto& k = w.k;
    auto& t = w.tmp;
    for (std::size_t i = 0; i < n; ++i) t[i] = x[i] + h * a21 * k[0][i];
    field(t, k[1]);
    for (std::size_t i = 0; i < n; ++i) t[i] = x[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    field(t, k[2]);
    for (std::size_t i = 0; i < n; ++i) t[i] = x[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    field(t, k[3]);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = x[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    field(t, k[4]);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = x[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i]);
    field(t, k[5]);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + h * (b1 * k[0][i] + b2 * k[1][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] +
                             b6 * k[5][i]);
    field(out, k[6]);
    for (std::size_t i = 0; i < n; ++i)
        err[i] = h * (e1 * k[0][i] + e2 * k[1][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                      e6 * k[5][i] + e7 * k[6][i]);
}

void require_finite(std::span<const double> x, std::size_t index) {
    if (!all_finite(x)) throw IntegrationFailure("non-finite state", index);
}

}  // namespace

std::string to_string(SystemName name) {
    switch (name) {
        case SystemName::Lorenz: return "lorenz";
        case SystemName::DoubleWell: return "doublewell";
        case SystemName::Dadras: return "dadras";
    }
    return "unknown";
}

SystemName parse_system_name(const std::string& name) {
    if (name == "lorenz") return SystemName::Lorenz;
    if (name == "doublewell" || name == "double-well" || name == "double_well") return SystemName::DoubleWell;
    if (name == "dadras") return SystemName::Dadras;
    throw ConfigError("unknown system '" + name + "'");
}

void SystemSpec::validate() const {
    const auto d = dim();
    if (d < 2 || d > 4) throw ConfigError("state dimension must be 2, 3 or 4");
    if (!(h_max > 0.0)) throw ConfigError("h_max must be positive");
    if (!(noise >= 0.0)) throw ConfigError("noise amplitude must be nonnegative");
    const std::size_t expected = name == SystemName::Lorenz ? 3 : name == SystemName::Dadras ? 4 : 2;
    if (d != expected) throw ConfigError("initial state has wrong dimension for " + to_string(name));
    const std::size_t nparams = name == SystemName::DoubleWell ? 1 : 3;
    if (params.size() != nparams) throw ConfigError("wrong parameter count for " + to_string(name));
    if (noise > 0.0 && (!(dt > 0.0) || thin == 0)) throw ConfigError("SDE needs dt > 0 and thin >= 1");
}

SystemSpec lorenz_spec() {
    SystemSpec s;
    s.name = SystemName::Lorenz;
    s.params = {10.0, 28.0, 8.0 / 3.0};
    s.x0 = {0.0, 10.0, 0.0};
    s.h_max = 1.0;
    return s;
}

SystemSpec doublewell_spec() {
    SystemSpec s;
    s.name = SystemName::DoubleWell;
    s.params = {kDoubleWellEpsilon};
    s.noise = 0.015;
    s.x0 = {1.0, 0.75};
    s.h_max = 1.0;
    s.tangent_mode = TangentMode::FiniteDifference;
    s.dt = 0.01;
    s.thin = 10;
    return s;
}

SystemSpec dadras_spec() {
    SystemSpec s;
    s.name = SystemName::Dadras;
    s.params = {8.0, 40.0, 14.9};
    s.x0 = {10.0, 1.0, 10.0, 1.0};
    s.h_max = 0.8;
    s.post = PostTransform::DadrasRescale;
    s.emit_after_transform = true;
    return s;
}

SystemSpec default_spec(SystemName name) {
    switch (name) {
        case SystemName::Lorenz: return lorenz_spec();
        case SystemName::DoubleWell: return doublewell_spec();
        case SystemName::Dadras: return dadras_spec();
    }
    throw ConfigError("unknown system");
}

void lorenz_vf(std::span<const double> x, double sigma, double rho, double beta, std::span<double> out) {
    out[0] = sigma * (x[1] - x[0]);
    out[1] = x[0] * (rho - x[2]) - x[1];
    out[2] = x[0] * x[1] - beta * x[2];
}

void doublewell_drift(std::span<const double> s, std::span<double> out, double epsilon) {
    const double x = s[0], y = s[1];
    const double H = y * y / 2 + x * x * x * x / 8 - x * x / 2 - x * x * x / 15 - x / 10;
    const double Hx = x * x * x / 2 - x - x * x / 5 - 0.1;
    const double Hy = y;
    const double h = (H * H * H - H) / 2;
    out[0] = Hy - epsilon * h * Hx;
    out[1] = -Hx - epsilon * h * Hy;
}

void dadras_vf(std::span<const double> s, double a, double b, double c, std::span<double> out) {
    const double x = s[0], y = s[1], z = s[2], w = s[3];
    out[0] = a * x - y * z + w;
    out[1] = x * z - b * y;
    out[2] = x * y - c * z + x * w;
    out[3] = -y;
}

void dadras_rescale(std::span<const double> x, std::span<double> out) {
    const double n = norm2(x);
    const double scale = n > 0.0 ? 1.0 / std::sqrt(n) : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
}

VectorField field_for(const SystemSpec& spec) {
    switch (spec.name) {
        case SystemName::Lorenz: {
            const double s = spec.params.at(0), r = spec.params.at(1), b = spec.params.at(2);
            return [s, r, b](std::span<const double> x, std::span<double> out) { lorenz_vf(x, s, r, b, out); };
        }
        case SystemName::DoubleWell: {
            const double eps = spec.params.at(0);
            return [eps](std::span<const double> x, std::span<double> out) { doublewell_drift(x, out, eps); };
        }
        case SystemName::Dadras: {
            const double a = spec.params.at(0), b = spec.params.at(1), c = spec.params.at(2);
            return [a, b, c](std::span<const double> x, std::span<double> out) { dadras_vf(x, a, b, c, out); };
        }
    }
    throw ConfigError("unknown system");
}

void tsit5_step(const VectorField& field, std::span<const double> x, double h, std::span<double> out,
                std::span<double> err) {
    Tsit5Work w(x.size());
    field(x, w.k[0]);
    tsit5_core(field, x, h, w, out, err);
}

TimeSeries integrate_ode(const SystemSpec& spec, std::size_t n_points, const OdeOptions& opts) {
    return integrate_ode(spec, field_for(spec), n_points, opts);
}

TimeSeries integrate_ode(const SystemSpec& spec, const VectorField& field, std::size_t n_points,
                         const OdeOptions& opts) {
    if (!(spec.h_max > 0.0)) throw ConfigError("h_max must be positive");
    const std::size_t n = spec.x0.size();
    TimeSeries ts;
    ts.dim = n;
    ts.spec = spec;
    if (n_points == 0) return ts;
    ts.values.reserve(n_points * n);
    ts.times.reserve(n_points);

    std::vector<double> x(spec.x0), xn(n), err(n), ox(n), oxn(n), last(n), probe(n), oprobe(n);
    require_finite(x, 0);
    ts.values.insert(ts.values.end(), x.begin(), x.end());
    ts.times.push_back(0.0);

    const bool transformed = static_cast<bool>(opts.observe);
    auto observe = [&](std::span<const double> in, std::span<double> out) {
        if (transformed) opts.observe(in, out);
        else std::copy(in.begin(), in.end(), out.begin());
    };
    auto dist2 = [](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return s;
    };
    observe(x, last);
    observe(x, ox);

    Tsit5Work w(n);
    field(x, w.k[0]);
    double t = 0.0;
    double h = opts.initial_dt;
    const double hmax2 = spec.h_max * spec.h_max;
    std::size_t steps = 0;

    while (ts.size() < n_points) {
        if (std::all_of(w.k[0].begin(), w.k[0].end(), [](double v) { return v == 0.0; })) {
            // Exact equilibrium: the solution is constant, emit it at unit
            // time spacing.
            while (ts.size() < n_points) {
                t += 1.0;
                ts.values.insert(ts.values.end(), x.begin(), x.end());
                ts.times.push_back(t);
            }
            break;
        }
        if (++steps > opts.max_steps) throw IntegrationFailure("step budget exhausted", ts.size());
        tsit5_core(field, x, h, w, xn, err);
        double enorm = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = opts.abstol + opts.reltol * std::max(std::abs(x[i]), std::abs(xn[i]));
            enorm += (err[i] / sc) * (err[i] / sc);
            finite = finite && std::isfinite(xn[i]);
        }
        enorm = std::sqrt(enorm / static_cast<double>(n));
        if (!finite || !std::isfinite(enorm)) {
            h *= 0.25;
            if (h < 1e-14) throw IntegrationFailure("non-finite state", ts.size());
            continue;
        }
        observe(xn, oxn);
        const double disp2 = dist2(ox, oxn);
        if (enorm > 1.0 || disp2 > hmax2) {
            double factor = std::clamp(0.9 * std::pow(std::max(enorm, 1e-10), -0.2), 0.2, 1.0);
            if (disp2 > hmax2) factor = std::min(factor, 0.9 * spec.h_max / std::sqrt(disp2));
            h *= std::min(factor, 0.9);
            if (h < 1e-14) throw IntegrationFailure("step size underflow", ts.size());
            continue;
        }

        // Emit every crossing of the h_max sphere around the last emitted
        // sample along the chord x -> xn.
        double s0 = 0.0;
        while (ts.size() < n_points) {
            double s = 0.0;
            if (!transformed) {
                // |x + s (xn - x) - last|^2 = h_max^2, larger root.
                double A = 0.0, B = 0.0, C = -hmax2;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dxi = xn[i] - x[i];
                    const double ri = x[i] - last[i];
                    A += dxi * dxi;
                    B += 2.0 * dxi * ri;
                    C += ri * ri;
                }
                if (A == 0.0) break;
                const double disc = B * B - 4.0 * A * C;
                if (disc < 0.0) break;
                s = (-B + std::sqrt(disc)) / (2.0 * A);
                if (!(s > s0) || s > 1.0) break;
                for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + s * (xn[i] - x[i]);
                std::copy(probe.begin(), probe.end(), oprobe.begin());
            } else {
                if (dist2(oxn, last) <= hmax2) break;
                // Bisection keeps the lower end, so the gap never exceeds h_max.
                double lo = s0, hi = 1.0;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + mid * (xn[i] - x[i]);
                    observe(probe, oprobe);
                    (dist2(oprobe, last) <= hmax2 ? lo : hi) = mid;
                }
                s = lo;
                if (!(s > s0)) break;
                for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] + s * (xn[i] - x[i]);
                observe(probe, oprobe);
            }
            std::copy(oprobe.begin(), oprobe.end(), last.begin());
            ts.values.insert(ts.values.end(), probe.begin(), probe.end());
            ts.times.push_back(t + s * h);
            s0 = s;
        }

        t += h;
        x.swap(xn);
        ox.swap(oxn);
        std::swap(w.k[0], w.k[6]);
        const double grow = enorm > 0.0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
    }
    return ts;
}

TimeSeries integrate_sde(const SystemSpec& spec, double dt, std::size_t n_steps, std::uint64_t seed,
                         std::size_t thin) {
    return integrate_sde(spec, field_for(spec), dt, n_steps, seed, thin);
}

TimeSeries integrate_sde(const SystemSpec& spec, const VectorField& drift, double dt, std::size_t n_steps,
                         std::uint64_t seed, std::size_t thin) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (thin == 0) throw ConfigError("thin must be at least 1");
    if (!(spec.noise >= 0.0)) throw ConfigError("noise amplitude must be nonnegative");
    const std::size_t n = spec.x0.size();
    const double sigma = spec.noise;

    TimeSeries ts;
    ts.dim = n;
    ts.spec = spec;
    ts.seed = seed;
    ts.values.reserve((n_steps / thin + 1) * n);
    ts.times.reserve(n_steps / thin + 1);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> x(spec.x0), f1(n), f2(n), h2(n), dw(n), dz(n);
    require_finite(x, 0);
    ts.values.insert(ts.values.end(), x.begin(), x.end());
    ts.times.push_back(0.0);

    const double sqdt = std::sqrt(dt);
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        if (spec.scheme == SdeScheme::Sra1) {
            // Roessler SRA1 for additive noise: strong order 1.5.
            for (std::size_t i = 0; i < n; ++i) {
                const double xi1 = normal(rng);
                const double xi2 = normal(rng);
                dw[i] = sqdt * xi1;
                dz[i] = 0.5 * dt * sqdt * (xi1 + xi2 * inv_sqrt3);
            }
            drift(x, f1);
            for (std::size_t i = 0; i < n; ++i) h2[i] = x[i] + 0.75 * dt * f1[i] + 1.5 * sigma * dz[i] / dt;
            drift(h2, f2);
            for (std::size_t i = 0; i < n; ++i)
                x[i] += dt * (f1[i] / 3.0 + 2.0 * f2[i] / 3.0) + sigma * dw[i];
        } else {
            const double sub = dt / 10.0;
            const double sqsub = std::sqrt(sub);
            for (int j = 0; j < 10; ++j) {
                drift(x, f1);
                for (std::size_t i = 0; i < n; ++i) x[i] += sub * f1[i] + sigma * sqsub * normal(rng);
            }
        }
        if (!all_finite(x)) throw IntegrationFailure("non-finite state", step);
        if (step % thin == 0) {
            ts.values.insert(ts.values.end(), x.begin(), x.end());
            ts.times.push_back(static_cast<double>(step) * dt);
        }
    }
    return ts;
}

TimeSeries drop_transient(const TimeSeries& series, std::size_t count) {
    TimeSeries out;
    out.dim = series.dim;
    out.spec = series.spec;
    out.seed = series.seed;
    const std::size_t k = std::min(count, series.size());
    out.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(k * series.dim), series.values.end());
    out.times.assign(series.times.begin() + static_cast<std::ptrdiff_t>(k), series.times.end());
    return out;
}

LiftedSeries lift(const TimeSeries& series, TangentMode mode, const VectorField* field) {
    const std::size_t n = series.dim;
    const std::size_t count = series.size();
    LiftedSeries out;
    out.dim = n;
    out.points = series.values;
    out.tangents.resize(series.values.size());
    if (mode == TangentMode::VectorField) {
        if (field == nullptr) throw ConfigError("vector-field tangents need a field");
    } else if (count < 2) {
        throw ConfigError("finite-difference tangents need at least two samples");
    }
    for (std::size_t i = 0; i < count; ++i) {
        std::span<double> v(out.tangents.data() + i * n, n);
        if (mode == TangentMode::VectorField) {
            (*field)(series.point(i), v);
        } else {
            const std::size_t j = i + 1 < count ? i : i - 1;
            auto a = series.point(j);
            auto b = series.point(j + 1);
            for (std::size_t c = 0; c < n; ++c) v[c] = b[c] - a[c];
        }
        const double len = norm2(v);
        if (!(len > 0.0) || !std::isfinite(len)) {
            const std::size_t where = mode == TangentMode::FiniteDifference && i + 1 == count ? i - 1 : i;
            throw LiftFailure("zero tangent vector", where);
        }
        for (double& c : v) c /= len;
    }
    return out;
}

void rescale_lifted(LiftedSeries& lifted, bool jacobian) {
    const std::size_t n = lifted.dim;
    std::vector<double> y(n), jv(n);
    for (std::size_t i = 0; i < lifted.size(); ++i) {
        std::span<double> p(lifted.points.data() + i * n, n);
        std::span<double> v(lifted.tangents.data() + i * n, n);
        const double r = norm2(p);
        if (jacobian && r > 0.0) {
            // d/dx (x |x|^{-1/2}) v = (v - x (x.v) / (2 |x|^2)) / sqrt|x|
            double xv = 0.0;
            for (std::size_t c = 0; c < n; ++c) xv += p[c] * v[c];
            for (std::size_t c = 0; c < n; ++c) jv[c] = v[c] - 0.5 * p[c] * xv / (r * r);
            const double len = norm2(jv);
            if (!(len > 0.0)) throw LiftFailure("degenerate rescaled tangent", i);
            for (std::size_t c = 0; c < n; ++c) v[c] = jv[c] / len;
        }
        dadras_rescale(p, y);
        std::copy(y.begin(), y.end(), p.begin());
    }
}

GeneratedData generate(const SystemSpec& spec, std::size_t n_points, std::uint64_t seed, std::size_t transient) {
    spec.validate();
    GeneratedData data;
    const auto field = field_for(spec);
    if (spec.noise > 0.0) {
        // Step 0 is a sample too.
        const std::size_t samples = n_points + transient;
        data.series = integrate_sde(spec, field, spec.dt, samples ? (samples - 1) * spec.thin : 0, seed, spec.thin);
    } else {
        OdeOptions opts;
        if (spec.emit_after_transform && spec.post == PostTransform::DadrasRescale) opts.observe = dadras_rescale;
        data.series = integrate_ode(spec, field, n_points + transient, opts);
        data.series.seed = seed;
    }
    data.series = drop_transient(data.series, transient);
    data.lifted = lift(data.series, spec.tangent_mode, &field);
    if (spec.post == PostTransform::DadrasRescale) rescale_lifted(data.lifted, spec.jacobian_tangents);
    return data;
}

}  // namespace cycsig::systems
