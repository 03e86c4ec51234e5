#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "goose/ingest/csv.hpp"

namespace goose::ingest {

inline std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex(len * 2, '0');
    for (unsigned int i = 0; i < len; ++i) std::snprintf(&hex[i * 2], 3, "%02x", digest[i]);
    return hex;
}

// Content hash of the canonical CSV rendering.
inline std::string corpus_hash(const CorpusFile& corpus) { return sha256_hex(export_csv_string(corpus)); }

}  // namespace goose::ingest
