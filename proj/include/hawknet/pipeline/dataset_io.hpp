// Dataset disk format: one JSON manifest plus raw float64 blobs (flow and
// pressure) per subject.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawknet/io.hpp"
#include "hawknet/pipeline/synthetic.hpp"

namespace hawknet::pipeline {

inline void save_records(const std::vector<SignalRecord>& records,
                         const std::filesystem::path& dir, const nlohmann::json& provenance) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json subjects = nlohmann::json::array();
    for (const auto& rec : records) {
        const std::string flow_name = "subject_" + std::to_string(rec.subject_id) + "_flow.bin";
        const std::string pawp_name = "subject_" + std::to_string(rec.subject_id) + "_pawp.bin";
        const std::string flow_blob = io::doubles_to_bytes(rec.flow);
        const std::string pawp_blob = io::doubles_to_bytes(rec.pawp);
        io::write_file_atomic(dir / flow_name, flow_blob);
        io::write_file_atomic(dir / pawp_name, pawp_blob);
        subjects.push_back({{"subject_id", rec.subject_id},
                            {"fs", rec.fs},
                            {"n_samples", rec.flow.size()},
                            {"flow_blob", flow_name},
                            {"pawp_blob", pawp_name},
                            {"flow_checksum", io::to_hex(io::fnv1a64(flow_blob.data(), flow_blob.size()))},
                            {"pawp_checksum", io::to_hex(io::fnv1a64(pawp_blob.data(), pawp_blob.size()))}});
    }
    nlohmann::json manifest{{"format_version", 1},
                            {"dtype", "f64le"},
                            {"subjects", subjects},
                            {"provenance", provenance}};
    io::write_file_atomic(dir / "dataset.json", manifest.dump(2) + "\n");
}

inline std::vector<SignalRecord> load_records(const std::filesystem::path& dir) {
    const auto manifest = nlohmann::json::parse(io::read_file(dir / "dataset.json"));
    if (manifest.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported dataset format version");
    std::vector<SignalRecord> records;
    for (const auto& subject : manifest.at("subjects")) {
        SignalRecord rec;
        rec.subject_id = subject.at("subject_id").get<int>();
        rec.fs = subject.at("fs").get<double>();
        const std::string flow_blob = io::read_file(dir / subject.at("flow_blob").get<std::string>());
        const std::string pawp_blob = io::read_file(dir / subject.at("pawp_blob").get<std::string>());
        if (io::to_hex(io::fnv1a64(flow_blob.data(), flow_blob.size())) !=
                subject.at("flow_checksum").get<std::string>() ||
            io::to_hex(io::fnv1a64(pawp_blob.data(), pawp_blob.size())) !=
                subject.at("pawp_checksum").get<std::string>())
            throw std::runtime_error("dataset blob checksum mismatch for subject " +
                                     std::to_string(rec.subject_id));
        rec.flow = io::bytes_to_doubles(flow_blob);
        rec.pawp = io::bytes_to_doubles(pawp_blob);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace hawknet::pipeline
