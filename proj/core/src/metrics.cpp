#include "qcorr/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include <json.hpp>

#include "qcorr/weyl.hpp"

namespace qcorr {

namespace {

void check_grid(const Grid1D& a, const Grid1D& b)
{
    if (!(a == b))
        throw DimensionError("metrics: grid mismatch");
}

nlohmann::json number_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

double trace_distance(const GridState& a, const GridState& b)
{
    check_grid(a.grid, b.grid);
    const CMat diff = a.rho - b.rho;
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double l1_distance(const PhaseSpaceGrid& f1, const PhaseSpaceGrid& f2)
{
    check_grid(f1.xgrid, f2.xgrid);
    if (f1.hbar != f2.hbar)
        throw DimensionError("metrics: momentum lattices differ");
    return (f1.values.real() - f2.values.real()).cwiseAbs().sum() * f1.cell();
}

cplx quantum_expectation(const GridState& state, const Symbol& observable)
{
    return state.expectation(weyl_quantize(observable, state.grid, state.hbar));
}

ObservableGap observable_gap(const GridState& quantum, const ClassicalEnsemble& classical, const Symbol& observable)
{
    ObservableGap g;
    g.quantum = quantum_expectation(quantum, observable).real();
    const MonteCarloEstimate c = classical_expectation(classical, observable);
    g.classical = c.mean;
    g.classical_se = c.std_error;
    g.gap = std::abs(g.quantum - g.classical);
    return g;
}

ObservableGap observable_gap(const GridState& quantum, const PhaseSpaceGrid& classical, const Symbol& observable)
{
    ObservableGap g;
    g.quantum = quantum_expectation(quantum, observable).real();
    double s = 0.0;
    Vec a(2);
    for (int k = 0; k < classical.n(); ++k) {
        a(1) = classical.p(k);
        for (int i = 0; i < classical.n(); ++i) {
            a(0) = classical.x(i);
            s += classical.values(i, k).real() * observable(a).real();
        }
    }
    g.classical = s * classical.cell();
    g.classical_se = 0.0;
    g.gap = std::abs(g.quantum - g.classical);
    return g;
}

void ComparisonReport::finalize_gaps()
{
    for (auto& [name, row] : observables) {
        const double vals[3] = {row.quantum, row.mixture, row.classical};
        double gap = kNotComputed;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (std::isfinite(vals[i]) && std::isfinite(vals[j])) {
                    const double d = std::abs(vals[i] - vals[j]);
                    gap = std::isfinite(gap) ? std::max(gap, d) : d;
                }
        row.gap = gap;
    }
}

void write_reports_csv(std::ostream& os, const std::vector<ComparisonReport>& reports,
                       const std::vector<std::string>& preamble)
{
    for (const auto& line : preamble)
        os << "# " << line << '\n';
    std::set<std::string> names, errs;
    for (const auto& r : reports) {
        for (const auto& [k, v] : r.observables)
            names.insert(k);
        for (const auto& [k, v] : r.error_estimates)
            errs.insert(k);
    }
    os << "time,trace_distance,l1_distance";
    for (const auto& n : names)
        os << ',' << n << "_quantum," << n << "_mixture," << n << "_classical," << n << "_classical_se," << n
           << "_gap";
    for (const auto& e : errs)
        os << ",err_" << e;
    os << '\n';
    os << std::setprecision(12);
    auto put = [&](double v) {
        os << ',';
        if (std::isfinite(v))
            os << v;
        else
            os << "nan";
    };
    for (const auto& r : reports) {
        os << r.time;
        put(r.trace_distance);
        put(r.l1_distance);
        for (const auto& n : names) {
            auto it = r.observables.find(n);
            const ObservableRow row = it == r.observables.end() ? ObservableRow{} : it->second;
            put(row.quantum);
            put(row.mixture);
            put(row.classical);
            put(row.classical_se);
            put(row.gap);
        }
        for (const auto& e : errs) {
            auto it = r.error_estimates.find(e);
            put(it == r.error_estimates.end() ? kNotComputed : it->second);
        }
        os << '\n';
    }
}

void write_reports_json(std::ostream& os, const std::vector<ComparisonReport>& reports,
                        const std::map<std::string, std::string>& meta)
{
    nlohmann::ordered_json j;
    j["meta"] = meta;
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json jr;
        jr["time"] = r.time;
        jr["trace_distance"] = number_or_null(r.trace_distance);
        jr["l1_distance"] = number_or_null(r.l1_distance);
        nlohmann::ordered_json obs = nlohmann::json::object();
        for (const auto& [k, row] : r.observables)
            obs[k] = {{"quantum", number_or_null(row.quantum)},
                      {"mixture", number_or_null(row.mixture)},
                      {"classical", number_or_null(row.classical)},
                      {"classical_se", number_or_null(row.classical_se)},
                      {"gap", number_or_null(row.gap)}};
        jr["observables"] = obs;
        nlohmann::ordered_json err = nlohmann::json::object();
        for (const auto& [k, v] : r.error_estimates)
            err[k] = number_or_null(v);
        jr["error_estimates"] = err;
        j["reports"].push_back(jr);
    }
    os << j.dump(2) << '\n';
}

}  // namespace qcorr
