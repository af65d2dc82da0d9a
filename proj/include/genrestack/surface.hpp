#pragma once

#include <string>
#include <string_view>

// Surface-form classifiers shared by the tagger features and error analysis.
namespace genrestack {

// ASCII emoticons: ":)", ";-P", "D:>", "<3", "^_^", "-_-" and similar.
bool is_emoticon(std::string_view form);

// A letter sequence of one to three characters repeated at least three times
// in a row, case-insensitively ("sooo", "hahaha", "NANANANA").
bool has_elongation(std::string_view form);

// "punct-emo" for emoticons; otherwise X / x / d for upper, lower and digit
// characters, other characters kept, runs of one symbol capped at four.
std::string word_shape(std::string_view form);

// One of: punct-emo, digit, number, punct, allcaps, initcap, lower, mixed.
std::string word_class(std::string_view form);

}  // namespace genrestack
