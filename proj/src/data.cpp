#include "h2g2/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "h2g2/contracts.hpp"
#include "h2g2/rng.hpp"

namespace h2g2 {

namespace {

constexpr double kPi = 3.14159265358979323846;
// waveform layout of the planted signal
constexpr double kWaveCycles = 3.0;
constexpr double kPhaseJitter = kPi / 6.0;  // per-sample phase range, +-

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<double> interpolate_linear(std::span<const double> signal, std::size_t target_len) {
    std::vector<double> out(target_len);
    if (signal.size() == 1) {
        std::fill(out.begin(), out.end(), signal[0]);
        return out;
    }
    const double step = static_cast<double>(signal.size() - 1) /
                        static_cast<double>(target_len - 1);
    for (std::size_t i = 0; i < target_len; ++i) {
        const double pos = step * static_cast<double>(i);
        const std::size_t lo = std::min<std::size_t>(static_cast<std::size_t>(pos),
                                                     signal.size() - 2);
        const double frac = pos - static_cast<double>(lo);
        out[i] = signal[lo] * (1.0 - frac) + signal[lo + 1] * frac;
    }
    return out;
}

Matrix read_channel_csv(const std::filesystem::path& path, std::size_t expected_channels) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path.string() + ": cannot open");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* endp = line.data() + line.size();
        while (p < endp) {
            while (p < endp && (*p == ' ' || *p == '\t')) ++p;
            double v;
            auto [next, ec] = std::from_chars(p, endp, v);
            if (ec != std::errc{}) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": malformed number near column " +
                                         std::to_string(p - line.data() + 1));
            }
            row.push_back(v);
            p = next;
            while (p < endp && (*p == ' ' || *p == '\t')) ++p;
            if (p < endp) {
                if (*p != ',') {
                    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                             ": expected ',' near column " +
                                             std::to_string(p - line.data() + 1));
                }
                ++p;
            }
        }
        if (row.empty()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": empty row");
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": ragged row (" + std::to_string(row.size()) + " vs " +
                                     std::to_string(rows.front().size()) + " values)");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error(path.string() + ": no data rows");
    }
    if (rows.size() != expected_channels) {
        throw std::runtime_error(path.string() + ": " + std::to_string(rows.size()) +
                                 " channel rows, schema expects " +
                                 std::to_string(expected_channels));
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

void zscore_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) mean += m(i, j);
        mean /= static_cast<double>(m.cols());
        double var = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double d = m(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m.cols());
        const double sd = std::sqrt(var);
        const double inv = sd > 0.0 ? 1.0 / sd : 0.0;  // constant channel -> zeros
        for (std::size_t j = 0; j < m.cols(); ++j) {
            m(i, j) = (m(i, j) - mean) * inv;
        }
    }
}

}  // namespace

std::vector<double> downsample(std::span<const double> signal, std::size_t target_len) {
    require(!signal.empty(), "downsample: empty signal");
    require(target_len >= 1, "downsample: target length must be positive");

    if (signal.size() < target_len) {
        return interpolate_linear(signal, target_len);
    }
    const std::size_t n = signal.size();
    std::vector<double> out(target_len);
    for (std::size_t i = 0; i < target_len; ++i) {
        const std::size_t lo = i * n / target_len;
        const std::size_t hi = (i + 1) * n / target_len;
        double sum = 0.0;
        for (std::size_t k = lo; k < hi; ++k) sum += signal[k];
        out[i] = sum / static_cast<double>(hi - lo);
    }
    return out;
}

RecordingManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("manifest: cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("manifest: " + path.string() + ": " + e.what());
    }

    RecordingManifest manifest;
    std::filesystem::path root = j.value("root", std::string("."));
    if (root.is_relative()) {
        root = path.parent_path() / root;
    }
    manifest.root = root;
    for (const auto& e : j.at("entries")) {
        ManifestEntry entry;
        entry.subject = e.at("subject").get<std::string>();
        entry.sample = e.at("sample").get<std::string>();
        entry.label = e.at("label").get<std::size_t>();
        for (const auto& [mod, file] : e.at("files").items()) {
            entry.files[mod] = file.get<std::string>();
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

nlohmann::json manifest_to_json(const RecordingManifest& manifest) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        nlohmann::json files = nlohmann::json::object();
        for (const auto& [mod, file] : e.files) {
            files[mod] = file;
        }
        entries.push_back({{"subject", e.subject},
                           {"sample", e.sample},
                           {"label", e.label},
                           {"files", files}});
    }
    return {{"root", manifest.root.string()}, {"entries", entries}};
}

LoadResult load_recordings(const RecordingManifest& manifest, const DatasetSchema& schema,
                           const LoadOptions& options) {
    validate_schema(schema);

    // Group entries by subject so one bad file drops the whole subject,
    // mirroring how incomplete subjects are excluded from the study data.
    std::map<std::string, std::vector<const ManifestEntry*>> by_subject;
    for (const auto& e : manifest.entries) {
        by_subject[e.subject].push_back(&e);
    }

    LoadResult result;
    for (const auto& [subject, entries] : by_subject) {
        std::vector<HierarchicalSample> subject_samples;
        std::string failure;
        for (const ManifestEntry* entry : entries) {
            HierarchicalSample sample;
            sample.subject_id = entry->subject;
            sample.sample_id = entry->sample;
            sample.label = entry->label;
            if (entry->label >= schema.class_count) {
                failure = "sample " + entry->sample + ": label " +
                          std::to_string(entry->label) + " outside [0, " +
                          std::to_string(schema.class_count) + ")";
                break;
            }
            for (const auto& mod : schema.modalities) {
                auto it = entry->files.find(mod.name);
                if (it == entry->files.end()) {
                    failure = "sample " + entry->sample + ": missing modality " + mod.name;
                    break;
                }
                std::filesystem::path file = it->second;
                if (file.is_relative()) {
                    file = manifest.root / file;
                }
                if (!std::filesystem::exists(file)) {
                    failure = "sample " + entry->sample + ": missing file " + file.string() +
                              " for modality " + mod.name;
                    break;
                }
                Matrix raw;
                try {
                    raw = read_channel_csv(file, mod.channel_count);
                } catch (const std::exception& e) {
                    failure = "sample " + entry->sample + ": " + e.what();
                    break;
                }
                Matrix shaped(mod.channel_count, schema.feature_len);
                for (std::size_t c = 0; c < raw.rows(); ++c) {
                    std::span<const double> row(raw.data().data() + c * raw.cols(), raw.cols());
                    auto down = downsample(row, schema.feature_len);
                    for (std::size_t t = 0; t < schema.feature_len; ++t) {
                        shaped(c, t) = down[t];
                    }
                }
                if (!shaped.all_finite()) {
                    failure = "sample " + entry->sample + ": non-finite values in modality " +
                              mod.name;
                    break;
                }
                if (options.zscore) {
                    zscore_rows(shaped);
                }
                sample.features.push_back(std::move(shaped));
            }
            if (!failure.empty()) break;
            subject_samples.push_back(std::move(sample));
        }
        if (!failure.empty()) {
            result.exclusions.push_back({subject, failure});
        } else {
            for (auto& s : subject_samples) {
                result.samples.push_back(std::move(s));
            }
        }
    }

    if (result.samples.empty()) {
        std::string detail;
        for (const auto& ex : result.exclusions) {
            detail += "\n  " + ex.subject + ": " + ex.reason;
        }
        throw std::runtime_error("load_recordings: no usable subjects" + detail);
    }
    std::sort(result.samples.begin(), result.samples.end(),
              [](const HierarchicalSample& a, const HierarchicalSample& b) {
                  return std::tie(a.subject_id, a.sample_id) < std::tie(b.subject_id, b.sample_id);
              });
    return result;
}

std::pair<std::vector<HierarchicalSample>, DatasetSchema> filter_modalities(
    const std::vector<HierarchicalSample>& dataset, const DatasetSchema& schema,
    const std::vector<std::string>& keep) {
    require(!keep.empty(), "filter_modalities: keep list is empty");
    std::set<std::string> keep_set;
    for (const auto& name : keep) {
        require(schema.index_of(name).has_value(),
                "filter_modalities: unknown modality " + name);
        keep_set.insert(name);
    }

    DatasetSchema filtered_schema = schema;
    filtered_schema.modalities.clear();
    std::vector<std::size_t> kept_indices;
    for (std::size_t i = 0; i < schema.modalities.size(); ++i) {
        if (keep_set.count(schema.modalities[i].name)) {
            filtered_schema.modalities.push_back(schema.modalities[i]);
            kept_indices.push_back(i);
        }
    }

    std::vector<HierarchicalSample> filtered;
    filtered.reserve(dataset.size());
    for (const auto& s : dataset) {
        HierarchicalSample out;
        out.subject_id = s.subject_id;
        out.sample_id = s.sample_id;
        out.label = s.label;
        for (std::size_t i : kept_indices) {
            out.features.push_back(i < s.features.size() ? s.features[i] : Matrix{});
        }
        filtered.push_back(std::move(out));
    }
    return {std::move(filtered), std::move(filtered_schema)};
}

std::vector<std::string> etk_modalities() {
    return {"PD", "EO", "GD"};
}

std::vector<std::string> no_etk_modalities(const DatasetSchema& schema) {
    const auto etk = etk_modalities();
    std::vector<std::string> keep;
    for (const auto& m : schema.modalities) {
        if (std::find(etk.begin(), etk.end(), m.name) == etk.end()) {
            keep.push_back(m.name);
        }
    }
    return keep;
}

void validate_synth_config(const SynthConfig& cfg) {
    validate_schema(cfg.schema);
    require(cfg.subject_count >= 1, "synth config: subject_count must be positive");
    require(cfg.samples_per_subject >= 1, "synth config: samples_per_subject must be positive");
    require(cfg.coupling_strength >= 0.0, "synth config: coupling_strength must be nonnegative");
    require(cfg.noise_sigma >= 0.0, "synth config: noise_sigma must be nonnegative");
    require(cfg.planted_source != cfg.planted_target,
            "synth config: planted source and target must differ");
    require(cfg.schema.index_of(cfg.planted_source).has_value(),
            "synth config: unknown planted source modality " + cfg.planted_source);
    require(cfg.schema.index_of(cfg.planted_target).has_value(),
            "synth config: unknown planted target modality " + cfg.planted_target);
}

nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
    return {{"subjects", cfg.subject_count},
            {"samples_per_subject", cfg.samples_per_subject},
            {"schema", schema_to_json(cfg.schema)},
            {"planted_source", cfg.planted_source},
            {"planted_target", cfg.planted_target},
            {"coupling_strength", cfg.coupling_strength},
            {"noise_sigma", cfg.noise_sigma},
            {"seed", cfg.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig cfg;
    cfg.subject_count = j.value("subjects", cfg.subject_count);
    cfg.samples_per_subject = j.value("samples_per_subject", cfg.samples_per_subject);
    if (j.contains("schema")) {
        cfg.schema = schema_from_json(j.at("schema"));
    }
    cfg.planted_source = j.value("planted_source", cfg.planted_source);
    cfg.planted_target = j.value("planted_target", cfg.planted_target);
    cfg.coupling_strength = j.value("coupling_strength", cfg.coupling_strength);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.seed = j.value("seed", cfg.seed);
    validate_synth_config(cfg);
    return cfg;
}

std::vector<HierarchicalSample> generate_synthetic(const SynthConfig& cfg) {
    validate_synth_config(cfg);
    Rng rng(cfg.seed);

    const std::size_t src = *cfg.schema.index_of(cfg.planted_source);
    const std::size_t tgt = *cfg.schema.index_of(cfg.planted_target);
    const std::size_t T = cfg.schema.feature_len;
    const double omega = 2.0 * kPi * kWaveCycles / static_cast<double>(T);
    const double delay = static_cast<double>(T) / (4.0 * kWaveCycles);  // quarter period

    std::vector<HierarchicalSample> dataset;
    dataset.reserve(cfg.subject_count * cfg.samples_per_subject);

    for (std::size_t s = 0; s < cfg.subject_count; ++s) {
        char subj_buf[16];
        std::snprintf(subj_buf, sizeof(subj_buf), "subj%02zu", s);

        // per-subject channel offsets make held-out subjects genuinely novel
        std::vector<std::vector<double>> offsets(cfg.schema.modality_count());
        for (std::size_t m = 0; m < cfg.schema.modality_count(); ++m) {
            offsets[m].resize(cfg.schema.modalities[m].channel_count);
            for (double& o : offsets[m]) {
                o = cfg.noise_sigma * rng.gaussian();
            }
        }

        for (std::size_t k = 0; k < cfg.samples_per_subject; ++k) {
            HierarchicalSample sample;
            sample.subject_id = subj_buf;
            char samp_buf[16];
            std::snprintf(samp_buf, sizeof(samp_buf), "s%03zu", k);
            sample.sample_id = samp_buf;
            sample.label = static_cast<std::size_t>(rng.coin_flip());

            const double y = static_cast<double>(sample.label);
            const double phase = rng.uniform(-kPhaseJitter, kPhaseJitter);
            const double src_amp = 1.0 + cfg.coupling_strength * y;
            const double tgt_amp = cfg.coupling_strength * y;

            for (std::size_t m = 0; m < cfg.schema.modality_count(); ++m) {
                const std::size_t channels = cfg.schema.modalities[m].channel_count;
                Matrix x(channels, T);
                for (std::size_t c = 0; c < channels; ++c) {
                    for (std::size_t t = 0; t < T; ++t) {
                        x(c, t) = offsets[m][c] + cfg.noise_sigma * rng.gaussian();
                    }
                }
                if (m == src) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        for (std::size_t t = 0; t < T; ++t) {
                            x(c, t) += src_amp * std::sin(omega * static_cast<double>(t) + phase);
                        }
                    }
                } else if (m == tgt) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        for (std::size_t t = 0; t < T; ++t) {
                            x(c, t) += tgt_amp *
                                       std::sin(omega * (static_cast<double>(t) - delay) + phase);
                        }
                    }
                }
                sample.features.push_back(std::move(x));
            }
            dataset.push_back(std::move(sample));
        }
    }
    return dataset;
}

void export_dataset(const std::vector<HierarchicalSample>& dataset, const DatasetSchema& schema,
                    const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir / "data");

    RecordingManifest manifest;
    manifest.root = ".";
    for (const auto& sample : dataset) {
        const std::filesystem::path rel =
            std::filesystem::path("data") / sample.subject_id / sample.sample_id;
        std::filesystem::create_directories(out_dir / rel);

        ManifestEntry entry;
        entry.subject = sample.subject_id;
        entry.sample = sample.sample_id;
        entry.label = sample.label;
        for (std::size_t m = 0; m < schema.modality_count(); ++m) {
            const std::string file = (rel / (schema.modalities[m].name + ".csv")).string();
            entry.files[schema.modalities[m].name] = file;

            std::ofstream out(out_dir / file);
            if (!out) {
                throw std::runtime_error("export_dataset: cannot write " +
                                         (out_dir / file).string());
            }
            const Matrix& x = sample.features[m];
            for (std::size_t c = 0; c < x.rows(); ++c) {
                for (std::size_t t = 0; t < x.cols(); ++t) {
                    if (t > 0) out << ',';
                    out << format_double(x(c, t));
                }
                out << '\n';
            }
        }
        manifest.entries.push_back(std::move(entry));
    }

    std::ofstream out(out_dir / "manifest.json");
    if (!out) {
        throw std::runtime_error("export_dataset: cannot write manifest.json");
    }
    out << manifest_to_json(manifest).dump(2) << "\n";
}

}  // namespace h2g2
