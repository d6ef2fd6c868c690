#include "storyline/annotator.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "storyline/tokenize.hpp"
#include "storyline/types.hpp"

namespace storyline {

Annotation IdentityAnnotator::annotate(std::string_view text) const {
    Annotation out;
    out.tokens = tokenize(text);
    out.lemmas = out.tokens;
    return out;
}

ExternalCommandAnnotator::ExternalCommandAnnotator(std::string command)
    : command_(std::move(command)) {
    if (command_.empty()) {
        throw ConfigError("external annotator command must not be empty");
    }
}

namespace {

// Minimal scoped temp file; mkstemp keeps the name collision-free even
// with several processes annotating in parallel.
struct TempFile {
    std::string path;

    TempFile() {
        const char* dir = std::getenv("TMPDIR");
        path = std::string(dir && *dir ? dir : "/tmp") + "/storyline-ann-XXXXXX";
        int fd = ::mkstemp(path.data());
        if (fd < 0) {
            throw ConfigError("unable to create temp file for external annotator");
        }
        ::close(fd);
    }
    ~TempFile() { std::remove(path.c_str()); }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
};

std::vector<std::string> read_string_list(const nlohmann::json& obj, const char* key,
                                          bool fold) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return out;
    }
    if (!it->is_array()) {
        throw InputError(std::string("external annotator: '") + key + "' must be a list");
    }
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw InputError(std::string("external annotator: '") + key +
                             "' must contain only strings");
        }
        std::string s = v.get<std::string>();
        out.push_back(fold ? fold_case(s) : std::move(s));
    }
    return out;
}

}  // namespace

Annotation ExternalCommandAnnotator::annotate(std::string_view text) const {
    TempFile in_file;
    TempFile out_file;
    {
        std::ofstream in(in_file.path, std::ios::binary);
        in.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!in) {
            throw ConfigError("unable to write annotator input file");
        }
    }

    std::string cmd = command_ + " < " + in_file.path + " > " + out_file.path;
    int rc = std::system(cmd.c_str());
    if (rc != 0) {
        throw InputError("external annotator command failed (exit status " +
                         std::to_string(rc) + "): " + command_);
    }

    std::ifstream out(out_file.path, std::ios::binary);
    std::stringstream buf;
    buf << out.rdbuf();

    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("external annotator produced invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw InputError("external annotator must print a JSON object");
    }

    Annotation ann;
    ann.tokens = read_string_list(obj, "tokens", /*fold=*/true);
    ann.lemmas = read_string_list(obj, "lemmas", /*fold=*/true);
    ann.entities = read_string_list(obj, "entities", /*fold=*/false);
    return ann;
}

std::unique_ptr<Annotator> make_annotator(const std::string& setting) {
    if (setting.empty() || setting == "none") {
        return std::make_unique<IdentityAnnotator>();
    }
    const std::string prefix = "external-command:";
    if (setting.rfind(prefix, 0) == 0) {
        return std::make_unique<ExternalCommandAnnotator>(setting.substr(prefix.size()));
    }
    if (setting == "external-command") {
        throw ConfigError("annotator 'external-command' needs a command, e.g. "
                          "external-command:./annotate.sh");
    }
    throw ConfigError("unknown annotator '" + setting +
                      "' (expected none or external-command:<cmd>)");
}

}  // namespace storyline
