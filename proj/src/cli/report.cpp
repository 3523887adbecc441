#include "formation/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace formation::cli {

std::string format_number(double v, int significant) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, v);
    return buf;
}

namespace {

std::string complex_text(const num::Complex& c) {
    std::string s = format_number(c.real());
    if (c.imag() != 0.0) s += (c.imag() > 0.0 ? "+" : "-") + format_number(std::abs(c.imag())) + "i";
    return s;
}

}  // namespace

std::string format_spectrum(const num::Spectrum& s) {
    std::string out;
    for (const num::Complex& c : s.values) out += (out.empty() ? "" : " ") + complex_text(c);
    return out;
}

namespace {

bool same_spectrum(const num::Spectrum& a, const num::Spectrum& b) {
    if (a.size() != b.size()) return false;
    std::vector<num::Complex> vals = b.values;
    const std::vector<double> dev = match_spectrum(a, vals);
    return !dev.empty() && *std::max_element(dev.begin(), dev.end()) <= 1e-8 * std::max(1.0, a.spectral_radius());
}

}  // namespace

std::vector<std::string> assign_labels(const std::vector<EquilibriumRecord>& records,
                                       const std::vector<ReferenceSpectrum>& reference) {
    std::vector<std::string> labels(records.size());
    for (const ReferenceSpectrum& p : reference) {
        std::size_t best = records.size();
        double best_dev = 0.0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if ((records[i].kind == EquilibriumKind::design) != p.design) continue;
            const std::vector<double> dev = match_spectrum(records[i].spectrum_gauge, p.values);
            if (dev.empty()) continue;
            const double mx = *std::max_element(dev.begin(), dev.end());
            if (best == records.size() || mx < best_dev) {
                best = i;
                best_dev = mx;
            }
        }
        if (best == records.size()) continue;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].kind != records[best].kind) continue;
            if (i != best && !same_spectrum(records[i].spectrum_gauge, records[best].spectrum_gauge)) continue;
            labels[i] += (labels[i].empty() ? "" : "/") + p.name;
        }
    }
    return labels;
}

std::string census_csv(const CensusReport& rep, const std::vector<std::string>& labels) {
    std::size_t n = 0, m = 0, k = 0;
    for (const EquilibriumRecord& r : rep.records) {
        n = std::max(n, r.framework.graph().n());
        m = std::max(m, r.errors.size());
        k = std::max(k, r.spectrum_gauge.size());
    }
    std::ostringstream os;
    os << "kind,label,stable,index,hyperbolic,residual,leading_real";
    for (std::size_t i = 1; i <= m; ++i) os << ",e" << i;
    for (std::size_t i = 1; i <= k; ++i) os << ",eig" << i << "_re,eig" << i << "_im";
    for (std::size_t i = 1; i <= n; ++i) os << ",x" << i << ",y" << i;
    os << "\n";
    for (std::size_t r = 0; r < rep.records.size(); ++r) {
        const EquilibriumRecord& e = rep.records[r];
        os << to_string(e.kind) << "," << (r < labels.size() ? labels[r] : "") << "," << (e.stable ? 1 : 0) << ","
           << e.index << "," << (e.hyperbolic ? 1 : 0) << "," << format_number(e.residual, 3) << ","
           << format_number(e.spectrum_gauge.max_real(), 9);
        for (std::size_t i = 0; i < m; ++i) os << "," << (i < e.errors.size() ? format_number(e.errors[i], 9) : "");
        for (std::size_t i = 0; i < k; ++i) {
            if (i < e.spectrum_gauge.size())
                os << "," << format_number(e.spectrum_gauge.values[i].real(), 9) << ","
                   << format_number(e.spectrum_gauge.values[i].imag(), 9);
            else
                os << ",,";
        }
        for (std::size_t i = 0; i < 2 * n; ++i)
            os << "," << (i < e.framework.x().size() ? format_number(e.framework.x()[i], 9) : "");
        os << "\n";
    }
    return os.str();
}

std::string census_report(const std::string& title, const CensusReport& rep, const std::vector<std::string>& labels) {
    std::ostringstream os;
    os << "census: " << title << "\n";
    os << "records " << rep.records.size() << " (seeds " << rep.seeds_tried << ", dropped " << rep.seeds_failed << ")\n";
    os << std::left << std::setw(4) << "#" << std::setw(8) << "label" << std::setw(21) << "kind" << std::setw(8)
       << "stable" << std::setw(7) << "index" << "gauge spectrum\n";
    std::size_t stable_anc = 0;
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        const EquilibriumRecord& r = rep.records[i];
        if (r.stable && r.kind != EquilibriumKind::design) ++stable_anc;
        const std::string idx = r.hyperbolic ? std::to_string(r.index) : "n/h";
        os << std::left << std::setw(4) << i + 1 << std::setw(8) << (i < labels.size() && !labels[i].empty() ? labels[i] : "-")
           << std::setw(21) << to_string(r.kind) << std::setw(8) << (r.stable ? "yes" : "no") << std::setw(7) << idx
           << format_spectrum(r.spectrum_gauge) << "\n";
    }
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < rep.records.size() && i < labels.size(); ++i) {
        if (labels[i].empty() || std::find(seen.begin(), seen.end(), labels[i]) != seen.end()) continue;
        seen.push_back(labels[i]);
        os << labels[i] << ": " << to_string(rep.records[i].kind) << ", " << (rep.records[i].stable ? "stable" : "unstable")
           << "\n";
    }
    os << "verdict: feasible " << (rep.feasible ? "yes" : "no") << "; almost surely stable "
       << (rep.almost_surely_stable ? "yes" : "no") << " (stable ancillary records " << stable_anc << "); index sum "
       << rep.index_sum << "\n";
    return os.str();
}

std::string sweep_csv(const std::vector<BranchPoint>& points) {
    std::size_t n = 0, m = 0;
    for (const BranchPoint& p : points) {
        if (!p.framework) continue;
        n = std::max(n, p.framework->graph().n());
        m = std::max(m, p.errors.size());
    }
    std::ostringstream os;
    os << "mu,branch,status,leading_real,stable";
    for (std::size_t i = 1; i <= m; ++i) os << ",e" << i;
    for (std::size_t i = 1; i <= n; ++i) os << ",x" << i << ",y" << i;
    os << "\n";
    for (const BranchPoint& p : points) {
        os << format_number(p.mu, 9) << "," << to_string(p.branch);
        if (!p.framework) {
            os << ",gap,,";
            for (std::size_t i = 0; i < m + 2 * n; ++i) os << ",";
            os << "\n";
            continue;
        }
        os << ",ok," << format_number(p.leading_real, 9) << "," << (p.stable ? 1 : 0);
        for (std::size_t i = 0; i < m; ++i) os << "," << (i < p.errors.size() ? format_number(p.errors[i], 9) : "");
        for (std::size_t i = 0; i < 2 * n; ++i)
            os << "," << (i < p.framework->x().size() ? format_number(p.framework->x()[i], 9) : "");
        os << "\n";
    }
    return os.str();
}

std::string sweep_report(const std::vector<BranchPoint>& points, const TranscriticalReport& det) {
    std::ostringstream os;
    std::size_t design = 0, gaps = 0;
    double lo = 0.0, hi = 0.0;
    for (const BranchPoint& p : points) {
        if (p.branch == Branch::design) ++design;
        if (!p.framework) ++gaps;
        lo = std::min(lo, p.mu);
        hi = std::max(hi, p.mu);
    }
    os << "sweep: " << design << " samples per branch over mu in [" << format_number(lo) << ", " << format_number(hi)
       << "], gaps " << gaps << "\n";
    for (Branch b : {Branch::design, Branch::ancillary_aligned}) {
        os << to_string(b) << ":";
        for (const BranchPoint& p : points)
            if (p.branch == b) os << " " << (!p.framework ? "?" : (p.stable ? "s" : "u"));
        os << "\n";
    }
    os << "transcritical: " << to_string(det.status);
    if (det.status == Detection::detected)
        os << " (" << det.reason << "); crossing design " << format_number(det.crossing_design) << ", aligned "
           << format_number(det.crossing_aligned) << "; grid step " << format_number(det.grid_step);
    else if (!det.reason.empty())
        os << " (" << det.reason << ")";
    os << "\n";
    return os.str();
}

std::string rigidity_report(const Framework& f) {
    const std::size_t n = f.graph().n();
    const std::size_t target = n >= 2 ? 2 * n - 3 : 0;
    const std::size_t rank = num::rank_tol(rigidity_matrix(f));
    std::ostringstream os;
    os << "rank " << rank << " of " << target << " (";
    if (is_infinitesimally_rigid(f))
        os << "infinitesimally rigid, " << (is_minimally_rigid(f) ? "minimally rigid" : "not minimally rigid");
    else
        os << "not infinitesimally rigid";
    os << ")";
    return os.str();
}

}  // namespace formation::cli
