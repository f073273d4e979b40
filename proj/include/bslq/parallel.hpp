/*
 Copyright 2026 The bslq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Static block partition of path indices over std::threads. Work items
// write to disjoint per-path slots, so results never depend on the worker
// count; reductions happen afterwards in path order.

#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace bslq
{

/// 0 means "all hardware threads".
inline unsigned resolve_workers(unsigned requested)
{
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls body(worker, begin, end) on contiguous index blocks. The first
/// exception thrown by any worker is rethrown (lowest block wins).
template <class Body>
void parallel_blocks(long count, unsigned workers, Body &&body)
{
    const long w = std::max(1L, std::min<long>(static_cast<long>(resolve_workers(workers)), count));
    if (w == 1)
    {
        body(0u, 0L, count);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(w));
    for (long i = 0; i < w; ++i)
    {
        const long begin = count * i / w, end = count * (i + 1) / w;
        threads.emplace_back([&, i, begin, end] {
            try
            {
                body(static_cast<unsigned>(i), begin, end);
            }
            catch (...)
            {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        });
    }
    for (auto &t : threads)
        t.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace bslq
