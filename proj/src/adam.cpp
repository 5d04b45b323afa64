#include "hsfuse/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hsfuse::ad {

void adam_step(const std::vector<DiffValue>& params, AdamState& state, double learning_rate) {
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p->value.shape);
            state.v.emplace_back(p->value.shape);
        }
    }
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state does not match parameter list");

    state.step_count += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Node& p = *params[k];
        DenseArray& g = p.grad_ref();
        DenseArray& m = state.m[k];
        DenseArray& v = state.v[k];
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.value[i] -= learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
        p.zero_grad();
    }
}

}  // namespace hsfuse::ad
