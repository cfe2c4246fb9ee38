#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "image.hpp"
#include "label_codec.hpp"

namespace dentgan::metrics {

struct ConfusionCounts {
    std::uint8_t class_id = 0;
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// One-vs-rest counts for `class_id`.
inline ConfusionCounts confusion(const IndexMask& pred, const IndexMask& gt, std::uint8_t class_id) {
    if (pred.width != gt.width || pred.height != gt.height) {
        throw DimensionMismatch("prediction " + std::to_string(pred.width) + "x" + std::to_string(pred.height) +
                                " vs ground truth " + std::to_string(gt.width) + "x" + std::to_string(gt.height));
    }
    ConfusionCounts c;
    c.class_id = class_id;
    // Indexed by (pred == c) * 2 + (gt == c).
    std::uint64_t bins[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        ++bins[(pred.data[i] == class_id ? 2 : 0) + (gt.data[i] == class_id ? 1 : 0)];
    }
    c.tn = bins[0];
    c.fn = bins[1];
    c.fp = bins[2];
    c.tp = bins[3];
    return c;
}

/// Metric values; nullopt marks a 0/0 ratio.
struct ClassMetrics {
    std::optional<double> precision, tpr, tnr, dice, accuracy;
    friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline ClassMetrics class_metrics(const ConfusionCounts& c) {
    return {ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp),
            ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn), ratio(c.tp + c.tn, c.total())};
}

struct ClassRow {
    std::string name;
    ClassMetrics values;
    std::size_t images = 0;   // images contributing to P/TPR/D
    std::size_t skipped = 0;  // images where the class is absent from gt
    friend bool operator==(const ClassRow&, const ClassRow&) = default;
};

struct ImageBreakdown {
    std::string id;
    std::vector<ConfusionCounts> counts;  // one per reported class
};

struct MetricsReport {
    std::vector<ClassRow> rows;        // per-image macro averages
    ClassRow aggregate;                // mean of the class rows
    std::vector<ClassRow> micro_rows;  // pooled counts
    ClassRow micro_aggregate;
    std::vector<ImageBreakdown> images;
};

struct EvalPair {
    std::string id;
    IndexMask pred;
    IndexMask gt;
};

namespace detail {

struct Mean {
    double sum = 0;
    std::size_t n = 0;
    void add(const std::optional<double>& v) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    std::optional<double> get() const { return n ? std::optional<double>(sum / double(n)) : std::nullopt; }
};

inline ClassRow average_rows(const std::string& name, const std::vector<ClassRow>& rows, std::size_t images) {
    Mean p, r, s, d, a;
    for (const auto& row : rows) {
        p.add(row.values.precision);
        r.add(row.values.tpr);
        s.add(row.values.tnr);
        d.add(row.values.dice);
        a.add(row.values.accuracy);
    }
    return {name, {p.get(), r.get(), s.get(), d.get(), a.get()}, images, 0};
}

}  // namespace detail

/// Per class: P, TPR and D are averaged over images whose ground truth
/// contains the class; TNR and accuracy over all images. Undefined values
/// never enter an average. Background is excluded unless requested.
inline MetricsReport evaluate_dataset(const std::vector<EvalPair>& pairs, const ClassPalette& palette,
                                      bool include_background = false) {
    const std::uint8_t first = include_background ? 0 : 1;
    const std::size_t ncls = palette.size() - first;
    MetricsReport rep;
    std::vector<detail::Mean> mp(ncls), mr(ncls), ms(ncls), md(ncls), ma(ncls);
    std::vector<std::size_t> present(ncls, 0);
    std::vector<ConfusionCounts> pooled(ncls);
    for (const auto& pr : pairs) {
        ImageBreakdown ib{pr.id, {}};
        for (std::size_t k = 0; k < ncls; ++k) {
            const auto cls = static_cast<std::uint8_t>(first + k);
            ConfusionCounts c;
            try {
                c = confusion(pr.pred, pr.gt, cls);
            } catch (const DimensionMismatch& e) {
                throw DimensionMismatch(pr.id + ": " + e.what());
            }
            const auto m = class_metrics(c);
            if (c.tp + c.fn > 0) {
                ++present[k];
                mp[k].add(m.precision);
                mr[k].add(m.tpr);
                md[k].add(m.dice);
            }
            ms[k].add(m.tnr);
            ma[k].add(m.accuracy);
            pooled[k].class_id = cls;
            pooled[k] += c;
            ib.counts.push_back(c);
        }
        rep.images.push_back(std::move(ib));
    }
    for (std::size_t k = 0; k < ncls; ++k) {
        const std::string name(palette[first + k].name);
        rep.rows.push_back({name, {mp[k].get(), mr[k].get(), ms[k].get(), md[k].get(), ma[k].get()}, present[k],
                            pairs.size() - present[k]});
        rep.micro_rows.push_back({name, class_metrics(pooled[k]), present[k], pairs.size() - present[k]});
    }
    rep.aggregate = detail::average_rows("mean", rep.rows, pairs.size());
    rep.micro_aggregate = detail::average_rows("mean", rep.micro_rows, pairs.size());
    return rep;
}

// ---------------------------------------------------------------------------
// Rendering

enum class Format { text, csv };

struct RenderOptions {
    Format format = Format::text;
    bool accuracy = false;
};

namespace detail {

inline std::string fixed3(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
}

inline std::string exact(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, *v);
    return std::string(buf, r.ptr);
}

inline void text_block(std::ostringstream& os, const std::string& title, const std::vector<ClassRow>& rows,
                       const ClassRow& agg, bool accuracy) {
    os << title << "\n";
    os << std::left << std::setw(14) << "Class" << std::right << std::setw(7) << "P" << std::setw(7) << "TP"
       << std::setw(7) << "TN" << std::setw(7) << "D";
    if (accuracy) os << std::setw(7) << "Acc";
    os << std::setw(8) << "images" << std::setw(9) << "skipped" << "\n";
    const auto line = [&](const ClassRow& r) {
        os << std::left << std::setw(14) << r.name << std::right << std::setw(7) << fixed3(r.values.precision)
           << std::setw(7) << fixed3(r.values.tpr) << std::setw(7) << fixed3(r.values.tnr) << std::setw(7)
           << fixed3(r.values.dice);
        if (accuracy) os << std::setw(7) << fixed3(r.values.accuracy);
        os << std::setw(8) << r.images << std::setw(9) << r.skipped << "\n";
    };
    for (const auto& r : rows) line(r);
    line(agg);
}

inline void csv_row(std::ostringstream& os, const std::string& prefix, const ClassRow& r, bool accuracy) {
    os << prefix << r.name << ',' << exact(r.values.precision) << ',' << exact(r.values.tpr) << ','
       << exact(r.values.tnr) << ',' << exact(r.values.dice) << ',' << r.images << ',' << r.skipped;
    if (accuracy) os << ',' << exact(r.values.accuracy);
    os << '\n';
}

}  // namespace detail

/// Text: 3-decimal table (TP and TN columns are the TP and TN rates).
/// CSV: full precision, undefined values as "-"; micro rows carry a
/// "micro:" prefix.
inline std::string render_report(const MetricsReport& rep, const RenderOptions& opt = {}) {
    std::ostringstream os;
    if (opt.format == Format::text) {
        detail::text_block(os, "Per-image average (macro)", rep.rows, rep.aggregate, opt.accuracy);
        os << "\n";
        detail::text_block(os, "Pooled counts (micro)", rep.micro_rows, rep.micro_aggregate, opt.accuracy);
        return os.str();
    }
    os << "class,precision,tpr,tnr,dice,images,skipped" << (opt.accuracy ? ",accuracy" : "") << '\n';
    for (const auto& r : rep.rows) detail::csv_row(os, "", r, opt.accuracy);
    detail::csv_row(os, "", rep.aggregate, opt.accuracy);
    for (const auto& r : rep.micro_rows) detail::csv_row(os, "micro:", r, opt.accuracy);
    detail::csv_row(os, "micro:", rep.micro_aggregate, opt.accuracy);
    return os.str();
}

/// Inverse of the CSV rendering: one ClassRow per data line, names as
/// written (including any "micro:" prefix).
inline std::vector<ClassRow> parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw InvalidSpec("empty metrics CSV");
    const bool accuracy = line.find(",accuracy") != std::string::npos;
    const auto value = [](const std::string& s) -> std::optional<double> {
        if (s == "-") return std::nullopt;
        return std::stod(s);
    };
    std::vector<ClassRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != (accuracy ? 8u : 7u)) throw InvalidSpec("bad metrics CSV line: " + line);
        ClassRow r;
        r.name = f[0];
        r.values = {value(f[1]), value(f[2]), value(f[3]), value(f[4]), accuracy ? value(f[7]) : std::nullopt};
        r.images = std::stoul(f[5]);
        r.skipped = std::stoul(f[6]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace dentgan::metrics
