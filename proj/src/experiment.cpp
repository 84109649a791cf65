#include "rccap/experiment.hpp"

#include "rccap/lincap.hpp"
#include "rccap/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rccap {

std::string to_string(InputModel model) {
    switch (model) {
        case InputModel::ar1: return "ar1";
        case InputModel::ma1: return "ma1";
        case InputModel::arma11: return "arma11";
    }
    return "unknown";
}

InputModel input_model_from_string(const std::string& name) {
    if (name == "ar1") return InputModel::ar1;
    if (name == "ma1") return InputModel::ma1;
    if (name == "arma11") return InputModel::arma11;
    throw std::invalid_argument("unknown input model '" + name + "' (expected ar1, ma1 or arma11)");
}

std::vector<GridPoint> grid_from_values(InputModel model, const std::vector<double>& values) {
    std::vector<GridPoint> grid;
    grid.reserve(values.size());
    for (double v : values) {
        switch (model) {
            case InputModel::ar1: grid.push_back({v, 0.0}); break;
            case InputModel::ma1: grid.push_back({0.0, v}); break;
            case InputModel::arma11: grid.push_back({v, v}); break;
        }
    }
    return grid;
}

std::vector<GridPoint> default_grid(InputModel model) {
    std::vector<double> values;
    for (int i = 0; i < 10; ++i) values.push_back(i / 10.0);
    return grid_from_values(model, values);
}

void ExperimentConfig::validate() const {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(spectral_radius > 0.0 && spectral_radius < 1.0))
        throw std::invalid_argument("spectral radius must lie in (0, 1)");
    if (tau_max < 1) throw std::invalid_argument("tau-max must be >= 1");
    if (length < 4 * static_cast<std::size_t>(tau_max))
        throw std::invalid_argument("length must be at least 4 * tau-max");
    if (models.empty()) throw std::invalid_argument("at least one input model is required");
    for (const auto& p : param_grid) ArmaProcessSpec{p.phi, p.theta, 1.0}.validate();
}

Figure1System make_figure1_system(int n, double spectral_radius, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("make_figure1_system: n must be >= 1");
    if (!(spectral_radius > 0.0 && spectral_radius < 1.0))
        throw std::invalid_argument("make_figure1_system: spectral radius must lie in (0, 1)");
    Rng rng = derived_rng(seed, 0);
    for (int attempt = 1; attempt <= 100; ++attempt) {
        Matrix a = random_gaussian(n, n, rng);
        Matrix c = random_gaussian(n, 1, rng);
        const double rho = rccap::spectral_radius(a);
        const double cn = c.norm();
        if (rho == 0.0 || cn == 0.0) continue;
        a *= spectral_radius / rho;
        bool capped = false;
        const double s = sigma_max(a);
        if (s >= 1.0) {
            a *= 0.99 / s;
            capped = true;
        }
        const Vector cv = c.col(0) / cn;
        if (numerical_rank(controllability_matrix(a, cv)) != n) continue;
        const double achieved = rccap::spectral_radius(a);
        return Figure1System{LinearStateSystem(std::move(a), cv), achieved, capped, attempt};
    }
    throw std::runtime_error("make_figure1_system: no controllable draw in 100 attempts");
}

unsigned effective_threads(unsigned requested) {
    unsigned threads = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RCCAP_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
    }
    return std::max(1u, threads);
}

Figure1Result compute_figure1(const ExperimentConfig& config) {
    config.validate();
    Figure1Result result{make_figure1_system(config.n, config.spectral_radius, config.system_seed.value_or(config.seed)), {}};

    for (InputModel model : config.models) {
        const auto grid = config.param_grid.empty() ? default_grid(model) : config.param_grid;
        for (const auto& p : grid) result.rows.push_back({model, p, {}, {}});
    }

    const LinearStateSystem& sys = result.system.system;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(result.rows.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < result.rows.size(); i = next++) {
            try {
                Figure1Row& row = result.rows[i];
                const ArmaProcessSpec spec{row.point.phi, row.point.theta, 1.0};
                spec.validate();
                const std::uint64_t stream_seed = derived_rng(config.seed, i + 1)();
                row.capacity = total_capacity_empirical(sys, spec, config.tau_max, config.length,
                                                        stream_seed, config.estimator, config.simulation);
                row.bounds = theoretical_bounds(autocovariance(spec), config.n);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads =
        std::min<unsigned>(effective_threads(config.threads), static_cast<unsigned>(result.rows.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return result;
}

std::string Figure1Result::csv() const {
    std::string out = csv_header() + "\n";
    for (const auto& row : rows)
        out += csv_row(to_string(row.model), row.point.phi, row.point.theta, row.capacity, row.bounds) + "\n";
    return out;
}

namespace {

double swept_value(InputModel model, const GridPoint& p) {
    return model == InputModel::ma1 ? p.theta : p.phi;
}

std::string fixed(double v, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string Figure1Result::svg(InputModel model) const {
    std::vector<const Figure1Row*> sel;
    for (const auto& row : rows)
        if (row.model == model) sel.push_back(&row);
    std::sort(sel.begin(), sel.end(), [model](const Figure1Row* a, const Figure1Row* b) {
        return swept_value(model, a->point) < swept_value(model, b->point);
    });

    struct Series {
        const char* label;
        const char* color;
        double (*get)(const Figure1Row&);
    };
    const Series series[] = {
        {"MC", "#1f77b4", [](const Figure1Row& r) { return r.capacity.mc_total; }},
        {"FC", "#d62728", [](const Figure1Row& r) { return r.capacity.fc_total; }},
        {"rho bound", "#2ca02c", [](const Figure1Row& r) { return r.bounds.rho_bound; }},
        {"spectral bound", "#9467bd", [](const Figure1Row& r) { return r.bounds.spectral_bound; }},
        {"gershgorin bound", "#8c564b", [](const Figure1Row& r) { return r.bounds.gershgorin; }},
    };

    double xmin = 0.0, xmax = 1.0, ymax = 1.0;
    if (!sel.empty()) {
        xmin = swept_value(model, sel.front()->point);
        xmax = swept_value(model, sel.back()->point);
        if (xmax <= xmin) xmax = xmin + 1.0;
    }
    for (const auto* r : sel)
        for (const auto& s : series)
            if (std::isfinite(s.get(*r))) ymax = std::max(ymax, s.get(*r));
    ymax *= 1.05;

    const double w = 640, h = 400, left = 60, right = 170, top = 30, bottom = 50;
    const double pw = w - left - right, ph = h - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + ph - y / ymax * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left << "\" y=\"18\">" << to_string(model) << " inputs, N = "
       << system.system.dim() << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymax * i / 4.0;
        os << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
           << fixed(xv) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
           << fixed(yv, 1) << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">"
       << (model == InputModel::ma1 ? "theta" : model == InputModel::ar1 ? "phi" : "phi = theta")
       << "</text>\n";
    int k = 0;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto* r : sel) {
            const double v = s.get(*r);
            if (!std::isfinite(v)) continue;
            os << (first ? "" : " ") << fixed(px(swept_value(model, r->point))) << ',' << fixed(py(v));
            first = false;
        }
        os << "\"/>\n";
        const double ly = top + 10 + 18 * k++;
        os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\""
           << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

Figure1Result run_figure1(const ExperimentConfig& config) {
    Figure1Result result = compute_figure1(config);
    const std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "figure1.csv", result.csv());
    if (config.plot) {
        for (InputModel model : config.models)
            write_file(dir / ("figure1_" + to_string(model) + ".svg"), result.svg(model));
    }
    return result;
}

}  // namespace rccap
