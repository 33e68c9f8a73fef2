#pragma once

#include <string>
#include <vector>

#include "reader/sentence_reader.hpp"
#include "reader/text_reader.hpp"
#include "reader/word_recognizer.hpp"

namespace reader::rl {

// Fixed-dimension observation encodings per level. Belief distributions are
// padded/truncated to the top five probabilities plus entropy; indices are
// normalized; appraisals are windowed to the short-term span; the
// remaining-time fraction stays 1 when no budget applies.
constexpr int kWordFeatureDim = 9;
constexpr int kSentenceFeatureDim = 20;
constexpr int kTextFeatureDim = 13;

constexpr int kWordActions = 7;       // STOP + 6 fixation slots
constexpr int kSentenceActions = 8;   // STOP, NEXT, SKIP, REGRESS x5
constexpr int kTextActions = 7;       // STOP, NEXT, REGRESS x5

constexpr int kWordActionStop = 0;
constexpr int kSentenceActionStop = 0;
constexpr int kSentenceActionNext = 1;
constexpr int kSentenceActionSkip = 2;
constexpr int kTextActionStop = 0;
constexpr int kTextActionNext = 1;

std::vector<double> featurize(const WordObservation& obs);
std::vector<double> featurize(const SentenceObservation& obs);
std::vector<double> featurize(const TextObservation& obs);

// Decoders from flat action ids to environment actions.
WordAction decode_word_action(int action, int word_len);
SentenceAction decode_sentence_action(int action);
TextAction decode_text_action(int action);

std::uint32_t word_action_mask(const WordObservation& obs);
std::uint32_t sentence_action_mask(const SentenceEnv& env);
std::uint32_t text_action_mask(const TextEnv& env);

// Letter index for fixation slot q in {0..5}, spread across the word.
int slot_to_letter(int slot, int word_len);

}  // namespace reader::rl
