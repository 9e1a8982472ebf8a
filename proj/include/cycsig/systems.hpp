#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cycsig::systems {

enum class SystemName { Lorenz, DoubleWell, Dadras };
enum class TangentMode { VectorField, FiniteDifference };
enum class PostTransform { None, DadrasRescale };
enum class SdeScheme { Sra1, EulerMaruyama };

std::string to_string(SystemName name);
SystemName parse_system_name(const std::string& name);

struct SystemSpec {
    SystemName name = SystemName::Lorenz;
    std::vector<double> params;
    double noise = 0.0;
    std::vector<double> x0;
    double h_max = 1.0;
    TangentMode tangent_mode = TangentMode::VectorField;
    PostTransform post = PostTransform::None;
    // Push tangents through the Jacobian of the Dadras rescaling instead of
    // reusing the original field direction.
    bool jacobian_tangents = false;
    // Measure the emission gap h_max on post-transformed points.
    bool emit_after_transform = false;

    // SDE settings (ignored for ODE systems).
    double dt = 0.01;
    std::size_t thin = 10;
    SdeScheme scheme = SdeScheme::Sra1;

    std::size_t dim() const { return x0.size(); }
    void validate() const;
};

SystemSpec lorenz_spec();
SystemSpec doublewell_spec();
SystemSpec dadras_spec();
SystemSpec default_spec(SystemName name);

// Samples stored row-major, `dim` values per sample.
struct TimeSeries {
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<double> times;
    SystemSpec spec;
    std::uint64_t seed = 0;

    std::size_t size() const { return times.size(); }
    std::span<const double> point(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

struct LiftedSeries {
    std::size_t dim = 0;
    std::vector<double> points;
    std::vector<double> tangents;

    std::size_t size() const { return dim == 0 ? 0 : points.size() / dim; }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
    std::span<const double> tangent(std::size_t i) const { return {tangents.data() + i * dim, dim}; }
};

using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

void lorenz_vf(std::span<const double> x, double sigma, double rho, double beta, std::span<double> out);
// f = J grad H - epsilon h(H) grad H with h(s) = (s^3 - s)/2. The energy
// obeys dH/dt = -epsilon h(H) |grad H|^2, so epsilon < 0 makes the level
// H = 0 through the saddle region attracting.
inline constexpr double kDoubleWellEpsilon = -0.02;
void doublewell_drift(std::span<const double> x, std::span<double> out, double epsilon = kDoubleWellEpsilon);
void dadras_vf(std::span<const double> x, double a, double b, double c, std::span<double> out);
void dadras_rescale(std::span<const double> x, std::span<double> out);

// Drift / vector field for a spec, bound to its parameters.
VectorField field_for(const SystemSpec& spec);

struct OdeOptions {
    double abstol = 1e-9;
    double reltol = 1e-7;
    double initial_dt = 1e-3;
    std::size_t max_steps = 500'000'000;
    // When set, gaps are measured between transformed points; emitted
    // samples stay in the original coordinates.
    std::function<void(std::span<const double>, std::span<double>)> observe;
};

// Tsitouras 5(4) with arc-length emission: consecutive emitted samples are
// exactly h_max apart in Euclidean distance (linear interpolation inside
// internal steps, whose displacement is capped at h_max).
TimeSeries integrate_ode(const SystemSpec& spec, std::size_t n_points, const OdeOptions& opts = {});
TimeSeries integrate_ode(const SystemSpec& spec, const VectorField& field, std::size_t n_points,
                         const OdeOptions& opts = {});

// Single fixed step of the RK pair; returns the 5th-order solution and
// writes the embedded error estimate into `err`.
void tsit5_step(const VectorField& field, std::span<const double> x, double h, std::span<double> out,
                std::span<double> err);

// Additive-noise SDE dx = f dt + noise dW. Returns every `thin`-th state,
// starting with x0, for n_steps steps in total.
TimeSeries integrate_sde(const SystemSpec& spec, double dt, std::size_t n_steps, std::uint64_t seed,
                         std::size_t thin = 1);
TimeSeries integrate_sde(const SystemSpec& spec, const VectorField& drift, double dt, std::size_t n_steps,
                         std::uint64_t seed, std::size_t thin = 1);

TimeSeries drop_transient(const TimeSeries& series, std::size_t count);

LiftedSeries lift(const TimeSeries& series, TangentMode mode, const VectorField* field = nullptr);

// Applies dadras_rescale to every point. Tangents are kept unless
// `jacobian` is set, in which case they are pushed through the derivative of
// the rescaling and renormalized.
void rescale_lifted(LiftedSeries& lifted, bool jacobian);

// Full preprocessing for a spec: integrate, drop transient, lift, transform.
struct GeneratedData {
    TimeSeries series;
    LiftedSeries lifted;
};
GeneratedData generate(const SystemSpec& spec, std::size_t n_points, std::uint64_t seed,
                       std::size_t transient = 1000);

}  // namespace cycsig::systems
