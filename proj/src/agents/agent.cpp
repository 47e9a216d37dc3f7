#include "slicelab/agents/agent.hpp"

namespace slicelab::agents {

int argmax_lowest(const double* values, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

}  // namespace slicelab::agents
