#include "montage/core/text.hpp"

#include "montage/util/errors.hpp"

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utf16.h>

#include <cctype>
#include <cstdio>
#include <ctime>

namespace montage {

namespace {

std::u16string utf8_to_utf16(std::string_view input) {
    std::u16string out(input.size() + 1, u'\0');
    UErrorCode status = U_ZERO_ERROR;
    int32_t written = 0;
    u_strFromUTF8(out.data(), static_cast<int32_t>(out.size()), &written,
                  input.data(), static_cast<int32_t>(input.size()), &status);
    if (U_FAILURE(status)) raise(Errc::invalid_input, "text is not valid UTF-8");
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::string utf16_to_utf8(const std::u16string& input) {
    std::string out(input.size() * 4 + 1, '\0');
    UErrorCode status = U_ZERO_ERROR;
    int32_t written = 0;
    u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &written,
                input.data(), static_cast<int32_t>(input.size()), &status);
    if (U_FAILURE(status)) raise(Errc::invalid_input, "UTF-16 round trip failed");
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::u16string nfc(const std::u16string& input) {
    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* norm = unorm2_getNFCInstance(&status);
    if (U_FAILURE(status)) raise(Errc::io_error, "ICU NFC instance unavailable");
    std::u16string out(input.size() * 2 + 8, u'\0');
    int32_t written = unorm2_normalize(norm, input.data(), static_cast<int32_t>(input.size()),
                                       out.data(), static_cast<int32_t>(out.size()), &status);
    if (U_FAILURE(status)) raise(Errc::invalid_input, "NFC normalization failed");
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::u16string fold_case(const std::u16string& input) {
    UErrorCode status = U_ZERO_ERROR;
    std::u16string out(input.size() * 2 + 8, u'\0');
    int32_t written = u_strFoldCase(out.data(), static_cast<int32_t>(out.size()),
                                    input.data(), static_cast<int32_t>(input.size()),
                                    U_FOLD_CASE_DEFAULT, &status);
    if (U_FAILURE(status)) raise(Errc::invalid_input, "case folding failed");
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::u16string collapse_whitespace(const std::u16string& input) {
    std::u16string out;
    out.reserve(input.size());
    bool pending_space = false;
    int32_t i = 0;
    const int32_t n = static_cast<int32_t>(input.size());
    while (i < n) {
        UChar32 c;
        U16_NEXT(input.data(), i, n, c);
        if (u_isUWhiteSpace(c) || c == 0x00A0 || c == 0x200B) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(u' ');
            pending_space = false;
        }
        char16_t units[2];
        int32_t len = 0;
        UBool err = false;
        U16_APPEND(units, len, 2, c, err);
        if (!err) out.append(units, static_cast<std::size_t>(len));
    }
    return out;
}

} // namespace

std::string normalize_text(std::string_view input) {
    if (input.empty()) return {};
    return utf16_to_utf8(collapse_whitespace(fold_case(nfc(utf8_to_utf16(input)))));
}

std::vector<std::string> tokenize(std::string_view normalized) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : normalized) {
        if (std::isalnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::set<std::string> token_set(std::string_view raw_text) {
    auto tokens = tokenize(normalize_text(raw_text));
    return std::set<std::string>(tokens.begin(), tokens.end());
}

double token_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double token_jaccard(std::string_view raw_a, std::string_view raw_b) {
    return token_jaccard(token_set(raw_a), token_set(raw_b));
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> parts;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        current.push_back(c);
        bool boundary = (c == '.' || c == '!' || c == '?');
        if (boundary && (i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\n')) {
            while (!current.empty() && (current.front() == ' ' || current.front() == '\n'))
                current.erase(current.begin());
            if (!current.empty()) parts.push_back(current);
            current.clear();
        }
    }
    while (!current.empty() && (current.front() == ' ' || current.front() == '\n'))
        current.erase(current.begin());
    while (!current.empty() && (current.back() == ' ' || current.back() == '\n'))
        current.pop_back();
    if (!current.empty()) parts.push_back(current);
    return parts;
}

std::vector<std::string> slice_into_parts(std::string_view text, std::size_t max_parts) {
    if (max_parts == 0) raise(Errc::invalid_input, "max_parts must be >= 1");
    auto sentences = split_sentences(text);
    if (sentences.empty()) return {};
    if (sentences.size() <= max_parts) return sentences;

    // Group consecutive sentences into max_parts slices of near-equal count.
    std::vector<std::string> parts;
    parts.reserve(max_parts);
    const std::size_t n = sentences.size();
    std::size_t start = 0;
    for (std::size_t p = 0; p < max_parts; ++p) {
        std::size_t end = (n * (p + 1)) / max_parts;
        std::string merged;
        for (std::size_t i = start; i < end; ++i) {
            if (!merged.empty()) merged += " ";
            merged += sentences[i];
        }
        if (!merged.empty()) parts.push_back(std::move(merged));
        start = end;
    }
    return parts;
}

std::string format_utc(std::int64_t epoch_seconds) {
    std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm_utc.tm_year + 1900, tm_utc.tm_mon + 1, tm_utc.tm_mday,
                  tm_utc.tm_hour, tm_utc.tm_min, tm_utc.tm_sec);
    return std::string(buf);
}

} // namespace montage
