#pragma once

#include <stdexcept>
#include <string>

namespace hix {

struct Error : std::runtime_error {
  explicit Error(const std::string& w) : std::runtime_error(w) {}
};

#define HIX_ERROR(Name)                                       \
  struct Name : Error {                                       \
    explicit Name(const std::string& w = #Name) : Error(w) {} \
  }

HIX_ERROR(NonSuccessive);
HIX_ERROR(InvalidTree);
HIX_ERROR(ScheduleExhausted);
HIX_ERROR(BudgetExceeded);
HIX_ERROR(PoolExhausted);
HIX_ERROR(PreconditionFailed);
HIX_ERROR(SupplyExhausted);
HIX_ERROR(SearchFailed);
HIX_ERROR(WitnessFailed);
HIX_ERROR(TruncationTooTight);
HIX_ERROR(DeltaOutOfRange);
HIX_ERROR(PatternViolation);
HIX_ERROR(InputError);

#undef HIX_ERROR

}  // namespace hix
