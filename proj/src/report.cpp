#include "flocksim/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "flocksim/errors.hpp"
#include "flocksim/numfmt.hpp"

namespace flocksim {

using nlohmann::json;

namespace {

json series_to_json(const SeriesStat& s) { return json{{"mean", s.mean}, {"se", s.se}}; }

SeriesStat series_from_json(const json& j) {
    SeriesStat s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.se = j.at("se").get<std::vector<double>>();
    return s;
}

json freq_to_json(const FreqStat& f) {
    return json{{"count", f.count}, {"n", f.n}, {"estimate", f.estimate}, {"lo", f.lo}, {"hi", f.hi}};
}

FreqStat freq_from_json(const json& j) {
    FreqStat f;
    f.count = j.at("count").get<long>();
    f.n = j.at("n").get<long>();
    f.estimate = j.at("estimate").get<double>();
    f.lo = j.at("lo").get<double>();
    f.hi = j.at("hi").get<double>();
    return f;
}

json fit_to_json(const NamedFit& nf) {
    return json{{"target", nf.target},
                {"model", nf.fit.model == DecayModel::Exponential ? "exp" : "alg"},
                {"rate", nf.fit.rate},
                {"intercept", nf.fit.intercept},
                {"r_squared", nf.fit.r_squared},
                {"window", {nf.fit.window_lo, nf.fit.window_hi}}};
}

NamedFit fit_from_json(const json& j) {
    NamedFit nf;
    nf.target = j.at("target").get<std::string>();
    nf.fit.model =
        j.at("model").get<std::string>() == "exp" ? DecayModel::Exponential : DecayModel::Algebraic;
    nf.fit.rate = j.at("rate").get<double>();
    nf.fit.intercept = j.at("intercept").get<double>();
    nf.fit.r_squared = j.at("r_squared").get<double>();
    nf.fit.window_lo = j.at("window").at(0).get<double>();
    nf.fit.window_hi = j.at("window").at(1).get<double>();
    return nf;
}

json series_list(const std::vector<SeriesStat>& v) {
    json arr = json::array();
    for (const SeriesStat& s : v) arr.push_back(series_to_json(s));
    return arr;
}

std::vector<SeriesStat> series_list_from(const json& arr) {
    std::vector<SeriesStat> v;
    for (const json& j : arr) v.push_back(series_from_json(j));
    return v;
}

// p = inf is legal in p_list but JSON has no literal for it; encode as "inf".
json p_list_to_json(const std::vector<double>& ps) {
    json arr = json::array();
    for (double p : ps) {
        if (std::isinf(p))
            arr.push_back("inf");
        else
            arr.push_back(p);
    }
    return arr;
}

std::vector<double> p_list_from_json(const json& arr) {
    std::vector<double> ps;
    for (const json& el : arr)
        ps.push_back(el.is_string() ? std::numeric_limits<double>::infinity()
                                    : el.get<double>());
    return ps;
}

} // namespace

std::string stats_to_json(const EnsembleStats& st) {
    json j;
    j["grid"] = st.grid;
    j["n_paths"] = st.n_paths;
    j["p_list"] = p_list_to_json(st.p_list);
    j["mean_vnorm"] = series_list(st.mean_vnorm);
    j["mean_xnorm"] = series_list(st.mean_xnorm);
    j["has_conditional"] = st.has_conditional;
    j["mask_count"] = st.mask_count;
    j["cond_mean_vnorm"] = series_list(st.cond_mean_vnorm);
    j["cond_mean_xnorm"] = series_list(st.cond_mean_xnorm);
    j["collision_frequency"] = freq_to_json(st.collision_frequency);
    j["has_event"] = st.has_event;
    j["event_frequency"] = freq_to_json(st.event_frequency);
    j["indeterminate_count"] = st.indeterminate_count;
    j["martingale_mean"] = series_to_json(st.martingale_mean);
    json fits = json::array();
    for (const NamedFit& nf : st.fits) fits.push_back(fit_to_json(nf));
    j["fits"] = fits;
    j["master_seed"] = st.master_seed;
    j["scenario_config"] = st.scenario_config;
    return j.dump(2);
}

EnsembleStats stats_from_json(const std::string& text) try {
    json j = json::parse(text);
    EnsembleStats st;
    st.grid = j.at("grid").get<std::vector<double>>();
    st.n_paths = j.at("n_paths").get<long>();
    st.p_list = p_list_from_json(j.at("p_list"));
    st.mean_vnorm = series_list_from(j.at("mean_vnorm"));
    st.mean_xnorm = series_list_from(j.at("mean_xnorm"));
    st.has_conditional = j.at("has_conditional").get<bool>();
    st.mask_count = j.at("mask_count").get<long>();
    st.cond_mean_vnorm = series_list_from(j.at("cond_mean_vnorm"));
    st.cond_mean_xnorm = series_list_from(j.at("cond_mean_xnorm"));
    st.collision_frequency = freq_from_json(j.at("collision_frequency"));
    st.has_event = j.at("has_event").get<bool>();
    st.event_frequency = freq_from_json(j.at("event_frequency"));
    st.indeterminate_count = j.at("indeterminate_count").get<long>();
    st.martingale_mean = series_from_json(j.at("martingale_mean"));
    for (const json& f : j.at("fits")) st.fits.push_back(fit_from_json(f));
    st.master_seed = j.at("master_seed").get<std::uint64_t>();
    st.scenario_config = j.at("scenario_config").get<std::string>();
    return st;
} catch (const json::exception& e) {
    throw IoError(std::string("stats payload: ") + e.what());
}

std::string manifest_to_json(const RunManifest& man) {
    json j;
    j["scenario"] = man.scenario;
    j["version"] = man.version;
    j["master_seed"] = man.master_seed;
    j["workers"] = man.workers;
    j["wall_seconds"] = man.wall_seconds;
    json arr = json::array();
    for (const CriterionResult& c : man.criteria)
        arr.push_back(json{{"id", c.id}, {"pass", c.pass}, {"detail", c.detail}});
    j["criteria"] = arr;
    return j.dump(2);
}

std::string stats_to_csv(const EnsembleStats& st) {
    std::string out = "t";
    for (double p : st.p_list) {
        std::string tag = "[p=" + num_to_string(p) + "]";
        out += ",mean_vnorm" + tag + ",se_vnorm" + tag;
        out += ",mean_xnorm" + tag + ",se_xnorm" + tag;
        if (st.has_conditional) {
            out += ",cond_mean_vnorm" + tag + ",cond_se_vnorm" + tag;
            out += ",cond_mean_xnorm" + tag + ",cond_se_xnorm" + tag;
        }
    }
    out += ",martingale_mean,martingale_se\n";
    for (std::size_t k = 0; k < st.grid.size(); ++k) {
        out += num_to_string(st.grid[k]);
        for (std::size_t pi = 0; pi < st.p_list.size(); ++pi) {
            out += ',' + num_to_string(st.mean_vnorm[pi].mean[k]);
            out += ',' + num_to_string(st.mean_vnorm[pi].se[k]);
            out += ',' + num_to_string(st.mean_xnorm[pi].mean[k]);
            out += ',' + num_to_string(st.mean_xnorm[pi].se[k]);
            if (st.has_conditional) {
                out += ',' + num_to_string(st.cond_mean_vnorm[pi].mean[k]);
                out += ',' + num_to_string(st.cond_mean_vnorm[pi].se[k]);
                out += ',' + num_to_string(st.cond_mean_xnorm[pi].mean[k]);
                out += ',' + num_to_string(st.cond_mean_xnorm[pi].se[k]);
            }
        }
        out += ',' + num_to_string(st.martingale_mean.mean[k]);
        out += ',' + num_to_string(st.martingale_mean.se[k]);
        out += '\n';
    }
    return out;
}

namespace {

struct Frame {
    double x0, y0, w, h;       // screen box
    double tmin, tmax;         // data x range
    double ymin, ymax;         // data y range (already log10 for log panels)

    double sx(double t) const { return x0 + (t - tmin) / (tmax - tmin) * w; }
    double sy(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

std::string fmt_pt(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

void span_of(const std::vector<double>& ys, bool log10scale, double& lo, double& hi) {
    for (double y : ys) {
        if (!std::isfinite(y)) continue;
        if (log10scale) {
            if (!(y > 0.0)) continue;
            y = std::log10(y);
        }
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
}

void frame_axes(std::string& svg, const Frame& f, const std::string& title, bool log10scale) {
    svg += "<rect x='" + fmt_pt(f.x0) + "' y='" + fmt_pt(f.y0) + "' width='" + fmt_pt(f.w) +
           "' height='" + fmt_pt(f.h) + "' fill='none' stroke='#888'/>\n";
    svg += "<text x='" + fmt_pt(f.x0 + 4) + "' y='" + fmt_pt(f.y0 - 6) +
           "' font-size='13' fill='#333'>" + title + "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        double t = f.tmin + (f.tmax - f.tmin) * i / 4.0;
        double y = f.ymin + (f.ymax - f.ymin) * i / 4.0;
        svg += "<text x='" + fmt_pt(f.sx(t) - 8) + "' y='" + fmt_pt(f.y0 + f.h + 14) +
               "' font-size='10' fill='#555'>" + num_to_string(std::round(t * 100) / 100) +
               "</text>\n";
        std::string label = log10scale ? ("1e" + num_to_string(std::round(y * 10) / 10))
                                       : num_to_string(std::round(y * 1000) / 1000);
        svg += "<text x='" + fmt_pt(f.x0 - 44) + "' y='" + fmt_pt(f.sy(y) + 3) +
               "' font-size='10' fill='#555'>" + label + "</text>\n";
    }
}

std::string path_points(const std::vector<double>& ts, const std::vector<double>& ys,
                        const Frame& f, bool log10scale) {
    std::string pts;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double y = ys[k];
        if (!std::isfinite(y)) continue;
        if (log10scale) {
            if (!(y > 0.0)) continue;
            y = std::log10(y);
        }
        if (!pts.empty()) pts += ' ';
        pts += fmt_pt(f.sx(ts[k])) + "," + fmt_pt(f.sy(y));
    }
    return pts;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

} // namespace

std::string stats_to_svg(const EnsembleStats& st) {
    const double width = 760, panel_h = 250, pad_l = 60, pad_r = 20, pad_t = 30, gap = 50;
    const double height = pad_t + panel_h + gap + panel_h + 40;
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num_to_string(width) +
                      "' height='" + num_to_string(height) + "' viewBox='0 0 " +
                      num_to_string(width) + " " + num_to_string(height) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";

    double tmin = st.grid.empty() ? 0.0 : st.grid.front();
    double tmax = st.grid.empty() ? 1.0 : st.grid.back();
    if (!(tmax > tmin)) tmax = tmin + 1.0;

    // Top panel: mean_vnorm, log scale (martingale mean when no norms exist).
    {
        double lo = 1e300, hi = -1e300;
        const bool have_p = !st.p_list.empty();
        if (have_p)
            for (const SeriesStat& s : st.mean_vnorm) span_of(s.mean, true, lo, hi);
        else
            span_of(st.martingale_mean.mean, false, lo, hi);
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) hi = lo + 1.0;
        Frame f{pad_l, pad_t, width - pad_l - pad_r, panel_h, tmin, tmax, lo, hi};
        frame_axes(svg, f,
                   have_p ? "mean velocity norm (log scale)" : "exponential martingale mean",
                   have_p);
        for (std::size_t pi = 0; pi < st.p_list.size(); ++pi) {
            svg += "<polyline fill='none' stroke='" + std::string(kPalette[pi % 6]) +
                   "' stroke-width='1.5' points='" +
                   path_points(st.grid, st.mean_vnorm[pi].mean, f, true) + "'/>\n";
            svg += "<text x='" + fmt_pt(f.x0 + f.w - 80) +
                   "' y='" + fmt_pt(f.y0 + 14 + 13 * static_cast<double>(pi)) +
                   "' font-size='11' fill='" + kPalette[pi % 6] + "'>p=" +
                   num_to_string(st.p_list[pi]) + "</text>\n";
        }
        if (!have_p && !st.martingale_mean.mean.empty()) {
            std::string pts = path_points(st.grid, st.martingale_mean.mean, f, false);
            if (!pts.empty()) {
                std::string d = "M" + pts;
                for (std::size_t q = 0; q < d.size(); ++q)
                    if (d[q] == ' ') d[q] = 'L';
                svg += "<path fill='none' stroke='#1f77b4' stroke-width='1.5' d='" + d + "'/>\n";
            }
        }
        // Fitted-rate overlays, drawn from the stored fit parameters.
        for (const NamedFit& nf : st.fits) {
            if (nf.target.rfind("mean_vnorm", 0) != 0) continue;
            std::vector<double> fit_y;
            fit_y.reserve(st.grid.size());
            for (double t : st.grid) {
                double y = nf.fit.model == DecayModel::Exponential
                               ? nf.fit.intercept * std::exp(-nf.fit.rate * t)
                               : nf.fit.intercept * std::pow(1.0 + t, -nf.fit.rate);
                fit_y.push_back(y);
            }
            std::string pts = path_points(st.grid, fit_y, f, true);
            if (!pts.empty()) {
                std::string d = "M" + pts;
                for (std::size_t q = 0; q < d.size(); ++q)
                    if (d[q] == ' ') d[q] = 'L';
                svg += "<path fill='none' stroke='#444' stroke-width='1' stroke-dasharray='5,4' d='" +
                       d + "'/>\n";
            }
        }
    }

    // Bottom panel: mean_xnorm, linear scale, drawn with <path> elements.
    {
        double lo = 1e300, hi = -1e300;
        for (const SeriesStat& s : st.mean_xnorm) span_of(s.mean, false, lo, hi);
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) hi = lo + 1.0;
        Frame f{pad_l, pad_t + panel_h + gap, width - pad_l - pad_r, panel_h, tmin, tmax, lo, hi};
        frame_axes(svg, f, "mean position norm", false);
        for (std::size_t pi = 0; pi < st.p_list.size(); ++pi) {
            std::string pts = path_points(st.grid, st.mean_xnorm[pi].mean, f, false);
            if (pts.empty()) continue;
            std::string d = "M" + pts;
            for (std::size_t q = 0; q < d.size(); ++q)
                if (d[q] == ' ') d[q] = 'L';
            svg += "<path fill='none' stroke='" + std::string(kPalette[pi % 6]) +
                   "' stroke-width='1.5' d='" + d + "'/>\n";
        }
    }

    svg += "</svg>\n";
    return svg;
}

std::string paths_to_csv(const std::vector<PathResult>& results) {
    if (results.empty()) throw EmptyEnsemble("paths_to_csv: no paths");
    const PathResult& first = results.front();
    std::string out = "path,t";
    const bool full = !first.p_list.empty();
    for (double p : first.p_list) {
        std::string tag = "[p=" + num_to_string(p) + "]";
        out += ",xnorm" + tag + ",vnorm" + tag + ",vint" + tag;
    }
    if (full) out += ",min_dist";
    out += ",m,qv\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const PathResult& r = results[i];
        for (std::size_t k = 0; k < r.sample_times.size(); ++k) {
            out += std::to_string(i) + ',' + num_to_string(r.sample_times[k]);
            for (std::size_t pi = 0; pi < r.p_list.size(); ++pi) {
                out += ',' + num_to_string(r.xnorm[pi][k]);
                out += ',' + num_to_string(r.vnorm[pi][k]);
                out += ',' + num_to_string(r.vint[pi][k]);
            }
            if (full) out += ',' + num_to_string(r.min_dist[k]);
            out += ',' + num_to_string(r.m_values[k]);
            out += ',' + num_to_string(r.qv_values[k]);
            out += '\n';
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_report(const EnsembleStats& stats, const RunManifest& man, const std::string& out_dir,
                 const std::string& formats) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

    std::stringstream ss(formats);
    std::string fmt;
    bool any = false;
    while (std::getline(ss, fmt, ',')) {
        if (fmt.empty()) continue;
        any = true;
        if (fmt == "json")
            write_text_file(out_dir + "/stats.json", stats_to_json(stats));
        else if (fmt == "csv")
            write_text_file(out_dir + "/stats.csv", stats_to_csv(stats));
        else if (fmt == "svg")
            write_text_file(out_dir + "/stats.svg", stats_to_svg(stats));
        else
            throw ConfigError("unknown report format '" + fmt + "'");
    }
    if (!any) throw ConfigError("no report format requested");
    write_text_file(out_dir + "/manifest.json", manifest_to_json(man));
}

} // namespace flocksim
