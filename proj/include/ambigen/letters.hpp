#pragma once

#include <cctype>
#include <string>

#include "ambigen/errors.hpp"

namespace ambigen {

enum class Case { Upper, Lower };

inline const char* case_name(Case c) { return c == Case::Upper ? "upper" : "lower"; }

// A letter A-Z plus the case it is rendered in.
struct CasedLetter {
    char letter; // always stored as the uppercase A-Z form
    Case letter_case;

    CasedLetter(char l, Case c) : letter(char(std::toupper((unsigned char)l))), letter_case(c) {
        if (letter < 'A' || letter > 'Z')
            throw Error(std::string("letter out of range A-Z: '") + l + "'");
    }
    // The character as rendered, e.g. ('G', Lower) -> 'g'
    char rendered() const {
        return letter_case == Case::Upper ? letter : char(std::tolower((unsigned char)letter));
    }
    static CasedLetter from_char(char c) {
        return CasedLetter(c, std::isupper((unsigned char)c) ? Case::Upper : Case::Lower);
    }
    bool operator==(const CasedLetter& o) const {
        return letter == o.letter && letter_case == o.letter_case;
    }
};

} // namespace ambigen
