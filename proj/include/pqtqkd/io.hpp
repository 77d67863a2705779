// io.hpp
// Line-delimited transcript serialization plus the CSV emitters for scan
// surfaces, trial statistics, and comparison reports. Every file starts
// with a header row naming its columns.

#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "pqtqkd/analysis.hpp"
#include "pqtqkd/protocol.hpp"

namespace pqtqkd {

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::DiscardMismatch: return "discard_mismatch";
        case Verdict::DiscardOutcome: return "discard_outcome";
        case Verdict::SiftedKept: return "sifted_kept";
        case Verdict::SiftedDisclosed: return "sifted_disclosed";
        case Verdict::Unresolved: return "unresolved";
    }
    return "?";
}

// One "run" line per round, "eve" audit lines when an active adversary
// was present, and a trailing "summary" line.
inline void write_transcript(std::ostream& os, const Transcript& t) {
    os << "record,round_id,n_index,m_index,key_bit,outcome,bob_bit,verdict\n";
    for (const auto& rec : t.records) {
        os << "run," << rec.round_id << ',';
        if (rec.bob_n_index == kUnrevealed)
            os << '-';
        else
            os << rec.bob_n_index;
        os << ',';
        if (rec.alice_m_index == kUnrevealed)
            os << '-';
        else
            os << rec.alice_m_index;
        os << ',' << rec.alice_key_bit << ',' << to_string(rec.gbm_outcome)
           << ',' << rec.bob_bit << ',' << to_string(rec.verdict) << '\n';
    }
    for (const auto& e : t.eve_records) {
        os << "eve," << e.round_id << ',' << e.guess_index << ','
           << e.eve_bit_guess << ',';
        if (e.eve_gbm_outcome < 0)
            os << '-';
        else
            os << kGbsOutcomeNames[e.eve_gbm_outcome];
        os << ',' << (e.knew_bit ? 1 : 0) << '\n';
    }
    os << "summary," << t.sifted_count << ',' << t.alice_key.size() << ','
       << std::setprecision(17) << t.qber << ',' << (t.aborted ? 1 : 0)
       << '\n';
}

inline std::string transcript_to_string(const Transcript& t) {
    std::ostringstream os;
    write_transcript(os, t);
    return os.str();
}

inline void write_scan_csv(std::ostream& os, const ScanResult& result) {
    os << "n1,n2,p_wrong,rate,objective\n" << std::setprecision(17);
    for (const auto& pt : result.surface)
        os << pt.n1 << ',' << pt.n2 << ',' << pt.wrong << ',' << pt.rate << ','
           << pt.objective << '\n';
}

inline void write_trial_stats_csv(std::ostream& os, const TrialStats& stats) {
    os << "statistic,value\n" << std::setprecision(17);
    os << "trials," << stats.trials << '\n';
    os << "sifted_count," << stats.sifted_count << '\n';
    os << "qber," << stats.qber << '\n';
    os << "key_rate_pre_disclosure," << stats.key_rate_pre_disclosure << '\n';
    os << "key_rate_post_disclosure," << stats.key_rate_post_disclosure << '\n';
    if (stats.eve_info) os << "eve_information," << *stats.eve_info << '\n';
    for (const auto& [name, z] : stats.z_scores)
        os << "z[" << name << "]," << z << '\n';
}

inline void write_report_csv(std::ostream& os, const ComparisonReport& report) {
    os << "statistic,empirical,expected,abs_deviation,z,pass\n"
       << std::setprecision(17);
    for (const auto& row : report.rows)
        os << row.name << ',' << row.empirical << ',' << row.expected << ','
           << row.abs_deviation << ',' << row.z << ','
           << (row.pass ? "pass" : "fail") << '\n';
}

}  // namespace pqtqkd
