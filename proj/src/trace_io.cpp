#include "apfsim/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

namespace apfsim::io {

const char* kTraceHeader =
    "time,v_src_r,v_src_s,v_src_t,v_pcc_r,v_pcc_s,v_pcc_t,"
    "i_load_r,i_load_s,i_load_t,i_dist,"
    "i_meas_r,i_meas_s,i_meas_t,i_apf_r,i_apf_s,i_apf_t,i_apf_n,"
    "i_src_r,i_src_s,i_src_t,i_neutral_src,i_neutral_load,"
    "ref_r,ref_s,ref_t,ref_n,p,p_bar,p_tilde,q_alpha,q_beta,q_zero,"
    "sw_r,sw_s,sw_t,sw_n";

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_out(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    return f;
}

}  // namespace

void write_trace_csv(const std::string& path, const plant::SimulationTrace& tr) {
    FilePtr f = open_out(path);
    std::fprintf(f.get(), "%s\n", kTraceHeader);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& ps = tr.source_power[k];
        std::fprintf(
            f.get(),
            "%.9g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
            "%.12g,%.12g,%.12g,%.12g,"
            "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
            "%.12g,%.12g,%.12g,%.12g,%.12g,"
            "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
            "%d,%d,%d,%d\n",
            tr.time[k], tr.v_src[k].r, tr.v_src[k].s, tr.v_src[k].t, tr.v_pcc[k].r,
            tr.v_pcc[k].s, tr.v_pcc[k].t, tr.i_load[k].r, tr.i_load[k].s, tr.i_load[k].t,
            tr.i_dist[k], tr.i_meas[k].r,
            tr.i_meas[k].s, tr.i_meas[k].t, tr.i_apf[k].r, tr.i_apf[k].s, tr.i_apf[k].t,
            tr.i_apf_n[k], tr.i_src[k].r, tr.i_src[k].s, tr.i_src[k].t, tr.i_neutral_src[k],
            tr.i_neutral_load[k], tr.ref[k].r, tr.ref[k].s, tr.ref[k].t, tr.ref_n[k], ps.p,
            ps.p_bar, ps.p_tilde, ps.q[0], ps.q[1], ps.q[2], tr.switch_states[k][0],
            tr.switch_states[k][1], tr.switch_states[k][2], tr.switch_states[k][3]);
    }
}

void write_metrics_csv(const std::string& path, const metrics::MetricsSeries& s) {
    FilePtr f = open_out(path);
    std::fprintf(f.get(), "time,pf,p_avg,q_smoothed,thd_r,thd_s,thd_t,neutral_rms\n");
    for (std::size_t k = 0; k < s.time.size(); ++k) {
        std::fprintf(f.get(), "%.9g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.time[k],
                     s.pf[k], s.p_avg[k], s.q_smoothed[k], s.thd_r[k], s.thd_s[k], s.thd_t[k],
                     s.neutral_rms[k]);
    }
}

Signal read_signal_csv(const std::string& path, double sample_rate) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Signal out;
    out.sample_rate = sample_rate;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || (end && *end != '\0')) {
            if (line_no == 1) continue;  // header row
            throw CsvParseError(line_no, "not a number: '" + line + "'");
        }
        out.samples.push_back(v);
    }
    if (out.samples.empty()) throw CsvParseError(line_no == 0 ? 1 : line_no, "no samples found");
    return out;
}

void write_imfs_csv(const std::string& path, const emd::ImfSet& set) {
    FilePtr f = open_out(path);
    std::string header;
    for (std::size_t i = 0; i < set.imfs.size(); ++i) {
        header += "IMF" + std::to_string(i + 1) + ",";
    }
    header += "residue";
    std::fprintf(f.get(), "%s\n", header.c_str());
    for (std::size_t k = 0; k < set.residue.size(); ++k) {
        std::string row;
        char buf[40];
        for (const auto& imf : set.imfs) {
            std::snprintf(buf, sizeof buf, "%.12g,", imf.samples[k]);
            row += buf;
        }
        std::snprintf(buf, sizeof buf, "%.12g", set.residue.samples[k]);
        row += buf;
        std::fprintf(f.get(), "%s\n", row.c_str());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    FilePtr f = open_out(path);
    std::fwrite(content.data(), 1, content.size(), f.get());
}

}  // namespace apfsim::io
