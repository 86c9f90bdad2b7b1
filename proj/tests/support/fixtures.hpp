#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "viewpoint/corpus.hpp"
#include "viewpoint/pipeline.hpp"
#include "viewpoint/runtime.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return VIEWPOINT_DATA_DIR; }

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir()
    {
        std::random_device rd;
        m_path = std::filesystem::temp_directory_path() /
                 ("viewpoint-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return m_path; }
    std::filesystem::path operator/(const std::string& name) const { return m_path / name; }

  private:
    std::filesystem::path m_path;
};

inline void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// A loopback port that was free a moment ago. The probe socket is closed
/// before returning, so nothing in this process keeps listening on it.
inline int free_port()
{
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    socklen_t len = sizeof addr;
    int port = 0;
    if (fd >= 0 && ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0 &&
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
        port = ntohs(addr.sin_port);
    }
    if (fd >= 0) {
        ::close(fd);
    }
    return port;
}

/// Settings pointing at the bundled mini corpus, with the given backend.
inline viewpoint::Settings mini_settings(viewpoint::ScorerBackend backend)
{
    viewpoint::Settings s;
    s.claims_path = data_dir() / "mini" / "claims.jsonl";
    s.perspectives_path = data_dir() / "mini" / "perspectives.jsonl";
    s.evidence_path = data_dir() / "mini" / "evidence.jsonl";
    s.gold_path = data_dir() / "mini" / "gold.jsonl";
    s.cue_lexicon_path = data_dir() / "cues.txt";
    s.scorer_backend = backend;
    return s;
}

inline viewpoint::Runtime mini_runtime(viewpoint::ScorerBackend backend)
{
    return viewpoint::build_runtime(mini_settings(backend));
}

}  // namespace fixtures
