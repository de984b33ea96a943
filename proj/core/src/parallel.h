#ifndef CHARGECHAIN_SRC_PARALLEL_H_
#define CHARGECHAIN_SRC_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace chargechain::internal {

// Worker count: CHARGECHAIN_THREADS when set to a positive integer,
// otherwise the hardware concurrency.
int WorkerCount();

// Runs fn(i) for i in [0, n) on up to WorkerCount() threads. Each index is
// processed by exactly one thread; callers write results into slot i so the
// outcome does not depend on scheduling. The first exception is rethrown.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace chargechain::internal

#endif  // CHARGECHAIN_SRC_PARALLEL_H_
