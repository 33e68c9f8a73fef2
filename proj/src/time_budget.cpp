#include "reader/time_budget.hpp"

#include "reader/sentence_reader.hpp"
#include "reader/text_reader.hpp"

namespace reader {

void wrap_sentence(SentenceEnv& env, TimeBudget* budget) { env.attach_budget(budget); }

void wrap_text(TextEnv& env, TimeBudget* budget) { env.attach_budget(budget); }

}  // namespace reader
