#include "formation/cli.hpp"

#include "formation/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace formation::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::string& code) {
    static const char* const kNumerical[] = {"no_convergence", "blow_up", "domain_error", "non_hyperbolic",
                                             "inconsistent_state", "internal_error"};
    return std::find(std::begin(kNumerical), std::end(kNumerical), code) != std::end(kNumerical) ? 3 : 2;
}

namespace {

Framework parallel_design(const Scenario& s) {
    const std::vector<Framework> fs = design_frameworks(s.graph, s.lengths);
    const auto defect = [](const Framework& f) {
        const EdgeVectors ev = edge_vectors(f);
        return std::abs(cross2(ev.z[0], ev.z[4])) / std::sqrt(dot2(ev.z[0], ev.z[0]) * dot2(ev.z[4], ev.z[4]));
    };
    return *std::min_element(fs.begin(), fs.end(), [&](const Framework& a, const Framework& b) { return defect(a) < defect(b); });
}

std::string header(const Scenario& s, std::uint64_t seed) {
    std::ostringstream os;
    os << "scenario " << s.name << ": " << s.graph.n() << " agents, " << s.graph.m() << " edges; law " << s.law.name()
       << " (gain " << format_number(s.law.gain()) << ", sign " << format_number(s.law.sign()) << "); d ("
       << to_string(s.lengths.convention()) << " errors, squared values)";
    for (double v : s.lengths.values()) os << " " << format_number(v);
    os << "; seed " << seed << "\n";
    return os.str();
}

Outputs run_census(const Scenario& s, const VectorFieldBundle& b, const RunOptions& opts, std::uint64_t seed) {
    CensusOptions co = s.experiment.census;
    co.seed = seed;
    if (opts.tol) co.residual_tol = *opts.tol;
    const CensusReport rep = census(b, co);
    const std::vector<std::string> labels = assign_labels(rep.records, s.experiment.reference);
    return {census_report(s.name, rep, labels), {{"census.csv", census_csv(rep, labels)}}};
}

Outputs run_spectrum(const Scenario& s, const VectorFieldBundle& b) {
    std::ostringstream csv, txt;
    txt << "design frameworks (gauge spectra)\n";
    csv << "framework,stable,index,eig_re,eig_im\n";
    const std::vector<Framework> fs = design_frameworks(s.graph, s.lengths);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const EquilibriumRecord r = classify(b, fs[i]);
        txt << "F" << i + 1 << " " << (r.stable ? "stable  " : "unstable") << " index " << r.index << ": "
            << format_spectrum(r.spectrum_gauge) << "\n";
        for (const num::Complex& c : r.spectrum_gauge.values) {
            csv << "F" << i + 1 << "," << (r.stable ? 1 : 0) << "," << r.index << "," << format_number(c.real(), 9) << ","
                << format_number(c.imag(), 9) << "\n";
        }
    }
    Outputs out{txt.str(), {{"spectrum.csv", csv.str()}}};
    if (s.experiment.reference.empty()) return out;

    num::Vector plain = s.values;
    if (s.values_are_squared)
        for (double& v : plain) v = std::sqrt(v);
    const ConventionReport rep = identify_convention(plain, s.experiment.reference);
    std::ostringstream conv;
    conv << "candidate,score,quantitative,qualitative";
    for (const ReferenceSpectrum& p : s.experiment.reference) conv << "," << p.name << "_max_dev," << p.name << "_qualitative";
    conv << "\n";
    for (const ConventionCandidate& c : rep.candidates) {
        conv << c.name << "," << format_number(c.score, 9) << "," << (c.quantitative ? 1 : 0) << ","
             << (c.qualitative ? 1 : 0);
        for (const SpectrumMatch& m : c.matches) conv << "," << format_number(m.max_dev, 9) << "," << (m.qualitative ? 1 : 0);
        conv << "\n";
    }
    const ConventionCandidate& best = rep.best_candidate();
    std::ostringstream t;
    t << "convention identification (tolerance " << format_number(rep.tolerance) << ")\n";
    t << "best: " << best.name << ", worst deviation " << format_number(best.score) << "\n";
    for (const SpectrumMatch& m : best.matches) {
        t << "  " << m.name << ": max deviation " << format_number(m.max_dev);
        if (m.record)
            t << ", " << to_string(m.record->kind) << ", " << (m.record->stable ? "stable" : "unstable") << ", computed "
              << format_spectrum(m.record->spectrum_gauge);
        t << "\n";
    }
    t << "quantitative match: " << (best.quantitative ? "pass" : "fail") << "; qualitative classification: "
      << (best.qualitative ? "pass" : "fail") << "\n";
    out.summary += t.str();
    out.files.push_back({"convention.csv", conv.str()});
    return out;
}

Outputs run_sweep(const Scenario& s, const VectorFieldBundle& b) {
    SweepOptions so;
    so.edge = s.experiment.edge;
    so.require_singular = s.experiment.require_singular;
    const std::vector<BranchPoint> pts = mu_sweep(b, s.experiment.eps, s.experiment.samples, so);
    const TranscriticalReport det = transcritical_detect(pts);
    std::ostringstream lg;
    lg << "mu,x,stability\n";
    for (const LogisticRow& r : logistic_reference(-s.experiment.eps, s.experiment.eps, s.experiment.samples))
        lg << format_number(r.mu, 9) << "," << format_number(r.x, 9) << "," << to_string(r.stability) << "\n";
    return {sweep_report(pts, det), {{"sweep.csv", sweep_csv(pts)}, {"logistic.csv", lg.str()}}};
}

Outputs run_sotomayor(const Scenario& s, const VectorFieldBundle& b, const RunOptions& opts) {
    const Framework f = s.experiment.positions ? Framework(s.graph, *s.experiment.positions) : parallel_design(s);
    SotomayorOptions so;
    if (opts.tol) so.residual_tol = *opts.tol;
    const SotomayorReport r = sotomayor_check(formation_family(b, f, s.experiment.edge), so);
    std::ostringstream csv, txt;
    csv << "zero_eig_unique,others_negative,degenerate,t_mu,dG_dmu_norm,t_quad,t_mixed,verdict\n";
    csv << r.zero_eig_unique << "," << r.others_negative << "," << r.degenerate << "," << format_number(r.t_mu, 9) << ","
        << format_number(r.dG_dmu_norm, 9) << "," << format_number(r.t_quad, 9) << "," << format_number(r.t_mixed, 9) << ","
        << r.verdict << "\n";
    txt << "sotomayor on the gauge slice, mu added to d" << s.experiment.edge + 1 << "\n";
    txt << "spectrum: " << format_spectrum(r.spectrum) << "\n";
    txt << "unique zero eigenvalue " << (r.zero_eig_unique ? "yes" : "no") << ", others negative "
        << (r.others_negative ? "yes" : "no") << (r.degenerate ? ", degenerate" : "") << "\n";
    txt << "t_mu " << format_number(r.t_mu) << " (|dG/dmu| " << format_number(r.dG_dmu_norm) << "), t_quad "
        << format_number(r.t_quad) << ", t_mixed " << format_number(r.t_mixed) << "\n";
    txt << "verdict: " << (r.verdict ? "transcritical" : "not transcritical") << "\n";
    return {txt.str(), {{"sotomayor.csv", csv.str()}}};
}

Outputs run_simulate(const Scenario& s, const VectorFieldBundle& b, std::uint64_t seed) {
    num::Vector x0;
    if (s.experiment.positions) {
        x0 = *s.experiment.positions;
    } else {
        double half = 1.0;
        for (double v : s.lengths.values()) half = std::max(half, 2.0 * std::sqrt(v));
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-half, half);
        x0.resize(2 * s.graph.n());
        for (double& v : x0) v = u(rng);
    }
    num::OdeOptions oo;
    oo.step = s.experiment.step;
    oo.sample_every = s.experiment.sample_every;
    const num::Trajectory tr = num::integrate_ode(b.field_x(), x0, s.experiment.t_end, oo);
    std::ostringstream csv;
    csv << "t";
    for (std::size_t i = 1; i <= s.graph.n(); ++i) csv << ",x" << i << ",y" << i;
    for (std::size_t i = 1; i <= s.graph.m(); ++i) csv << ",e" << i;
    csv << "\n";
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        csv << format_number(tr.times[k], 9);
        for (double v : tr.states[k]) csv << "," << format_number(v, 9);
        for (double e : edge_errors(Framework(s.graph, tr.states[k]), s.lengths)) csv << "," << format_number(e, 9);
        csv << "\n";
    }
    const num::Vector e = edge_errors(Framework(s.graph, tr.final_state()), s.lengths);
    std::ostringstream txt;
    txt << "simulate: t_end " << format_number(s.experiment.t_end) << ", step " << format_number(s.experiment.step)
        << ", samples " << tr.states.size() << "\n";
    txt << "final max |e| " << format_number(num::norm_inf(e)) << ", final |F| " << format_number(tr.final_field_norm)
        << (num::norm_inf(e) <= 1e-6 ? " (design reached)" : "") << "\n";
    return {txt.str(), {{"trajectory.csv", csv.str()}}};
}

Outputs run_rigidity(const Scenario& s) {
    const Framework f = s.experiment.positions ? Framework(s.graph, *s.experiment.positions)
                                               : design_frameworks(s.graph, s.lengths).front();
    const num::Matrix r = rigidity_matrix(f);
    std::ostringstream csv;
    for (std::size_t j = 0; j < r.cols(); ++j) csv << (j ? "," : "") << (j % 2 ? "y" : "x") << j / 2 + 1;
    csv << "\n";
    for (std::size_t i = 0; i < r.rows(); ++i) {
        for (std::size_t j = 0; j < r.cols(); ++j) csv << (j ? "," : "") << format_number(r(i, j), 9);
        csv << "\n";
    }
    return {"rigidity: " + rigidity_report(f) + "\n", {{"rigidity.csv", csv.str()}}};
}

}  // namespace

Outputs run_experiment(const Scenario& s, const RunOptions& opts) {
    const std::uint64_t seed = opts.seed.value_or(s.seed);
    const VectorFieldBundle b(s.graph, s.law, s.lengths);
    Outputs out;
    switch (s.experiment.type) {
        case ExperimentType::census: out = run_census(s, b, opts, seed); break;
        case ExperimentType::spectrum: out = run_spectrum(s, b); break;
        case ExperimentType::sweep: out = run_sweep(s, b); break;
        case ExperimentType::sotomayor: out = run_sotomayor(s, b, opts); break;
        case ExperimentType::simulate: out = run_simulate(s, b, seed); break;
        case ExperimentType::rigidity: out = run_rigidity(s); break;
    }
    out.summary = header(s, seed) + out.summary;
    return out;
}

RunResult run_scenario(const std::string& path, const RunOptions& opts) {
    RunResult res;
    const auto fail = [&](const std::string& code, const std::string& message) {
        res.exit_code = exit_code_for(code);
        res.error_code = code;
        res.error_message = message;
        res.error_record = nlohmann::json{{"status", "error"}, {"code", code}, {"message", message}, {"exit_code", res.exit_code}}.dump();
        if (!res.out_dir.empty()) {
            std::error_code ec;
            fs::create_directories(res.out_dir, ec);
            std::ofstream(fs::path(res.out_dir) / "error.json") << res.error_record << "\n";
        }
    };
    if (opts.out_dir) res.out_dir = *opts.out_dir;
    try {
        const Scenario s = load_scenario(path);
        if (!opts.out_dir) res.out_dir = s.output;
        const Outputs out = run_experiment(s, opts);
        fs::create_directories(res.out_dir);
        for (const Artifact& a : out.files) {
            const fs::path p = fs::path(res.out_dir) / a.name;
            std::ofstream f(p, std::ios::binary);
            f << a.content;
            if (!f) throw ConfigError("cannot write " + p.string(), "io_error");
            res.artifacts.push_back(p.string());
        }
        const fs::path sp = fs::path(res.out_dir) / "summary.txt";
        std::ofstream(sp, std::ios::binary) << out.summary;
        res.artifacts.push_back(sp.string());
        res.summary = out.summary;
    } catch (const Error& e) {
        fail(e.code(), e.what());
    } catch (const fs::filesystem_error& e) {
        fail("io_error", e.what());
    } catch (const std::exception& e) {
        fail("internal_error", e.what());
    }
    return res;
}

}  // namespace formation::cli
