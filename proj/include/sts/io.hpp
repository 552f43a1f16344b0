#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sts/core.hpp"

namespace sts {

/// A system plus any certificate lines carried with it.
struct SystemFile {
    PartialSts system;
    std::vector<std::string> cert_lines;
};

enum class FileFormat { text, structured };

/// Text format, line-based, LF, UTF-8:
///   sts v=<order> complete=<0|1>
///   b <p> <q> <r>        one line per block, p<q<r, sorted
///   cert ...             optional trailing certificate lines
inline std::string write_text(const SystemFile& doc) {
    std::ostringstream out;
    out << "sts v=" << doc.system.order() << " complete=" << (doc.system.complete() ? 1 : 0)
        << "\n";
    for (const Block& b : doc.system.blocks())
        out << "b " << b.p[0] << " " << b.p[1] << " " << b.p[2] << "\n";
    for (const std::string& c : doc.cert_lines) out << c << "\n";
    return out.str();
}

inline std::string write_structured(const SystemFile& doc) {
    nlohmann::json j;
    j["sts"]["v"] = doc.system.order();
    j["sts"]["complete"] = doc.system.complete() ? 1 : 0;
    auto& blocks = j["sts"]["blocks"];
    blocks = nlohmann::json::array();
    for (const Block& b : doc.system.blocks()) blocks.push_back({b.p[0], b.p[1], b.p[2]});
    j["sts"]["certs"] = doc.cert_lines;
    return j.dump(2) + "\n";
}

inline SystemFile read_text(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file");
    int order = -1, complete = -1;
    {
        std::istringstream h(line);
        std::string tag, kv;
        h >> tag;
        if (tag != "sts") throw ParseError("missing sts header");
        while (h >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw ParseError("bad header field: " + kv);
            std::string key = kv.substr(0, eq);
            int val = std::stoi(kv.substr(eq + 1));
            if (key == "v")
                order = val;
            else if (key == "complete")
                complete = val;
            else
                throw ParseError("unknown header field: " + key);
        }
    }
    if (order < 0) throw ParseError("header lacks v=");
    SystemFile doc;
    std::vector<Block> blocks;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("cert", 0) == 0) {
            doc.cert_lines.push_back(line);
            continue;
        }
        std::istringstream b(line);
        std::string tag;
        int p, q, r;
        b >> tag >> p >> q >> r;
        if (tag != "b" || b.fail()) throw ParseError("bad line: " + line);
        if (!(p < q && q < r)) throw BadBlock("block line not ascending: " + line);
        blocks.push_back(Block::of(p, q, r));
    }
    doc.system = PartialSts::make(order, std::move(blocks));
    if (complete != -1 && (complete != 0) != doc.system.complete())
        throw ParseError("complete flag does not match block set");
    return doc;
}

inline SystemFile read_structured(const std::string& content) {
    nlohmann::json j = nlohmann::json::parse(content);
    if (!j.contains("sts")) throw ParseError("missing sts object");
    const auto& s = j["sts"];
    int order = s.at("v").get<int>();
    std::vector<Block> blocks;
    for (const auto& t : s.at("blocks")) {
        if (t.size() != 3) throw BadBlock("block entry size != 3");
        blocks.push_back(Block::of(t[0].get<int>(), t[1].get<int>(), t[2].get<int>()));
    }
    SystemFile doc;
    doc.system = PartialSts::make(order, std::move(blocks));
    if (s.contains("complete") && (s["complete"].get<int>() != 0) != doc.system.complete())
        throw ParseError("complete flag does not match block set");
    if (s.contains("certs"))
        for (const auto& c : s["certs"]) doc.cert_lines.push_back(c.get<std::string>());
    return doc;
}

inline std::string serialize(const SystemFile& doc, FileFormat fmt) {
    return fmt == FileFormat::text ? write_text(doc) : write_structured(doc);
}

/// Auto-detects the format from the leading character.
inline SystemFile deserialize(const std::string& content) {
    auto pos = content.find_first_not_of(" \t\r\n");
    if (pos != std::string::npos && content[pos] == '{') return read_structured(content);
    return read_text(content);
}

inline void write_system_file(const std::string& path, const SystemFile& doc,
                              FileFormat fmt = FileFormat::text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << serialize(doc, fmt);
}

inline SystemFile read_system_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace sts
