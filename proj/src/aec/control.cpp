#include "aec/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aec/nn/layers.hpp"
#include "aec/rng.hpp"

namespace aec {

const char* joint_name(Joint j) {
    switch (j) {
        case Joint::Pan: return "pan";
        case Joint::Tilt: return "tilt";
        case Joint::Vergence: return "vergence";
    }
    return "?";
}

RewardMode reward_mode_from_string(const std::string& s) {
    if (s == "new") return RewardMode::New;
    if (s == "old") return RewardMode::Old;
    throw std::invalid_argument("reward mode must be 'new' or 'old', got '" + s + "'");
}

const char* reward_mode_name(RewardMode m) { return m == RewardMode::New ? "new" : "old"; }

double compute_reward(double l_t, double l_next, RewardMode mode, double scale_c) {
    if (scale_c <= 0.0) throw std::invalid_argument("compute_reward: C must be > 0");
    return mode == RewardMode::New ? scale_c * (l_t - l_next) : -scale_c * l_next;
}

CriticModel CriticModel::init(Joint joint, int cenc, int filters, std::mt19937& rng,
                              nn::AdamHyper hyper) {
    CriticModel m;
    m.joint = joint;
    m.cenc = cenc;
    m.filters = filters;
    const int flat = 2 * nn::kCriticPoolOut * nn::kCriticPoolOut * filters;
    m.conv_fine_w = Tensor({2, 2, cenc, filters});
    m.conv_fine_b = Tensor({filters});
    m.conv_coarse_w = Tensor({2, 2, cenc, filters});
    m.conv_coarse_b = Tensor({filters});
    m.fc0_w = Tensor({flat, m.hidden});
    m.fc0_b = Tensor({m.hidden});
    m.fc1_w = Tensor({m.hidden, nn::kNumActions});
    m.fc1_b = Tensor({nn::kNumActions});
    nn::glorot_fill(m.conv_fine_w, 4 * cenc, 4 * filters, rng);
    nn::glorot_fill(m.conv_coarse_w, 4 * cenc, 4 * filters, rng);
    nn::glorot_fill(m.fc0_w, flat, m.hidden, rng);
    nn::glorot_fill(m.fc1_w, m.hidden, nn::kNumActions, rng);
    m.conv_fine_w_adam = nn::AdamState(m.conv_fine_w.shape, hyper);
    m.conv_fine_b_adam = nn::AdamState(m.conv_fine_b.shape, hyper);
    m.conv_coarse_w_adam = nn::AdamState(m.conv_coarse_w.shape, hyper);
    m.conv_coarse_b_adam = nn::AdamState(m.conv_coarse_b.shape, hyper);
    m.fc0_w_adam = nn::AdamState(m.fc0_w.shape, hyper);
    m.fc0_b_adam = nn::AdamState(m.fc0_b.shape, hyper);
    m.fc1_w_adam = nn::AdamState(m.fc1_w.shape, hyper);
    m.fc1_b_adam = nn::AdamState(m.fc1_b.shape, hyper);
    return m;
}

nn::CriticParamsView<float> CriticModel::view() const {
    nn::CriticParamsView<float> v;
    v.wc_fine = conv_fine_w.data.data();
    v.bc_fine = conv_fine_b.data.data();
    v.wc_coarse = conv_coarse_w.data.data();
    v.bc_coarse = conv_coarse_b.data.data();
    v.w_fc0 = fc0_w.data.data();
    v.b_fc0 = fc0_b.data.data();
    v.w_fc1 = fc1_w.data.data();
    v.b_fc1 = fc1_b.data.data();
    v.cenc = cenc;
    v.f = filters;
    v.hidden = hidden;
    return v;
}

std::vector<std::pair<std::string, Tensor*>> CriticModel::named_tensors() {
    const std::string base = std::string("critic.") + joint_name(joint) + ".";
    return {{base + "conv_fine.w", &conv_fine_w},     {base + "conv_fine.b", &conv_fine_b},
            {base + "conv_coarse.w", &conv_coarse_w}, {base + "conv_coarse.b", &conv_coarse_b},
            {base + "fc0.w", &fc0_w},                 {base + "fc0.b", &fc0_b},
            {base + "fc1.w", &fc1_w},                 {base + "fc1.b", &fc1_b}};
}

std::vector<std::pair<std::string, nn::AdamState*>> CriticModel::named_adam() {
    const std::string base = std::string("critic.") + joint_name(joint) + ".";
    return {{base + "conv_fine.w", &conv_fine_w_adam},
            {base + "conv_fine.b", &conv_fine_b_adam},
            {base + "conv_coarse.w", &conv_coarse_w_adam},
            {base + "conv_coarse.b", &conv_coarse_b_adam},
            {base + "fc0.w", &fc0_w_adam},
            {base + "fc0.b", &fc0_b_adam},
            {base + "fc1.w", &fc1_w_adam},
            {base + "fc1.b", &fc1_b_adam}};
}

namespace {

void check_encoding(const Tensor& s, int cenc, const char* what) {
    require_shape(s, {nn::kCriticGrid, nn::kCriticGrid, cenc}, what);
}

}  // namespace

Tensor q_values(const Tensor& s_fine, const Tensor& s_coarse, const CriticModel& critic) {
    check_encoding(s_fine, critic.cenc, "q_values: fine encoding");
    check_encoding(s_coarse, critic.cenc, "q_values: coarse encoding");
    nn::CriticTrace<float> tr;
    nn::critic_forward(s_fine.data.data(), s_coarse.data.data(), 1, critic.view(), tr);
    return Tensor({nn::kNumActions}, std::move(tr.q));
}

int select_action(const Tensor& q, double epsilon, std::mt19937& rng) {
    if (q.rank() != 1 || q.dim(0) != nn::kNumActions)
        throw std::invalid_argument("select_action: expected 9 q-values, got " +
                                    shape_str(q.shape));
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("select_action: epsilon outside [0,1]");
    if (epsilon > 0.0 && rng_uniform(rng, 0.0, 1.0) < epsilon)
        return static_cast<int>(rng_index(rng, nn::kNumActions));
    int best = 0;
    for (int i = 1; i < nn::kNumActions; ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

void ReplayBuffer::push(Transition t) {
    if (slots_.size() < capacity_) {
        slots_.push_back(std::move(t));
        next_ = slots_.size() % capacity_;
    } else {
        slots_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= slots_.size()) throw std::out_of_range("replay buffer index");
    if (slots_.size() < capacity_) return slots_[i];
    return slots_[(next_ + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, std::mt19937& rng) const {
    if (slots_.empty()) throw std::runtime_error("cannot sample from an empty replay buffer");
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i)
        out.push_back(&slots_[rng_index(rng, static_cast<std::uint32_t>(slots_.size()))]);
    return out;
}

void ReplayBuffer::clear() {
    slots_.clear();
    next_ = 0;
}

void ReplayBuffer::restore(std::vector<Transition> slots, std::size_t next) {
    if (slots.size() > capacity_ || next >= std::max<std::size_t>(capacity_, 1))
        throw std::invalid_argument("replay restore: state exceeds capacity");
    slots_ = std::move(slots);
    next_ = slots_.size() < capacity_ ? slots_.size() % capacity_ : next;
}

nn::CriticGrads<float> critic_gradients(std::span<const Transition* const> batch,
                                        const CriticModel& critic, double gamma,
                                        double huber_delta, CriticStepStats* stats) {
    if (batch.empty()) throw std::invalid_argument("critic_gradients: empty batch");
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("critic_gradients: gamma must be in [0,1)");
    const int n = static_cast<int>(batch.size());
    const std::size_t enc_len =
        static_cast<std::size_t>(nn::kCriticGrid) * nn::kCriticGrid * critic.cenc;

    std::vector<float> s_fine(enc_len * static_cast<std::size_t>(n));
    std::vector<float> s_coarse(enc_len * static_cast<std::size_t>(n));
    std::vector<float> n_fine(enc_len * static_cast<std::size_t>(n));
    std::vector<float> n_coarse(enc_len * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Transition& t = *batch[static_cast<std::size_t>(i)];
        check_encoding(t.s_fine, critic.cenc, "critic batch: s fine");
        check_encoding(t.s_coarse, critic.cenc, "critic batch: s coarse");
        check_encoding(t.next_fine, critic.cenc, "critic batch: next fine");
        check_encoding(t.next_coarse, critic.cenc, "critic batch: next coarse");
        std::copy(t.s_fine.data.begin(), t.s_fine.data.end(),
                  s_fine.begin() + static_cast<std::size_t>(i) * enc_len);
        std::copy(t.s_coarse.data.begin(), t.s_coarse.data.end(),
                  s_coarse.begin() + static_cast<std::size_t>(i) * enc_len);
        std::copy(t.next_fine.data.begin(), t.next_fine.data.end(),
                  n_fine.begin() + static_cast<std::size_t>(i) * enc_len);
        std::copy(t.next_coarse.data.begin(), t.next_coarse.data.end(),
                  n_coarse.begin() + static_cast<std::size_t>(i) * enc_len);
    }

    const nn::CriticParamsView<float> view = critic.view();
    nn::CriticTrace<float> tr, tr_next;
    nn::critic_forward(s_fine.data(), s_coarse.data(), n, view, tr);
    nn::critic_forward(n_fine.data(), n_coarse.data(), n, view, tr_next);

    std::vector<float> dq(static_cast<std::size_t>(n) * nn::kNumActions, 0.0f);
    double loss_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const Transition& t = *batch[static_cast<std::size_t>(i)];
        if (t.action < 0 || t.action >= nn::kNumActions)
            throw std::invalid_argument("critic batch: action index out of range");
        double target = t.reward;
        if (!t.terminal) {
            const float* qn = tr_next.q.data() + static_cast<std::size_t>(i) * nn::kNumActions;
            target += gamma * *std::max_element(qn, qn + nn::kNumActions);
        }
        if (!std::isfinite(target))
            throw std::runtime_error("critic training: non-finite return target");
        const double pred =
            tr.q[static_cast<std::size_t>(i) * nn::kNumActions + static_cast<std::size_t>(t.action)];
        const auto [loss, grad] = nn::huber_loss(pred, target, huber_delta);
        loss_acc += loss;
        dq[static_cast<std::size_t>(i) * nn::kNumActions + static_cast<std::size_t>(t.action)] =
            static_cast<float>(grad / n);
    }
    if (stats) stats->mean_huber_loss = loss_acc / n;

    nn::CriticGrads<float> g;
    nn::critic_backward(view, tr, dq.data(), g);
    return g;
}

CriticStepStats critic_train_step(std::span<const Transition* const> batch, CriticModel& critic,
                                  double gamma, double huber_delta) {
    CriticStepStats stats;
    nn::CriticGrads<float> g = critic_gradients(batch, critic, gamma, huber_delta, &stats);
    auto step = [](Tensor& p, std::vector<float>& grad, nn::AdamState& st) {
        nn::adam_step(p, Tensor(p.shape, std::move(grad)), st);
    };
    step(critic.conv_fine_w, g.wc_fine, critic.conv_fine_w_adam);
    step(critic.conv_fine_b, g.bc_fine, critic.conv_fine_b_adam);
    step(critic.conv_coarse_w, g.wc_coarse, critic.conv_coarse_w_adam);
    step(critic.conv_coarse_b, g.bc_coarse, critic.conv_coarse_b_adam);
    step(critic.fc0_w, g.w_fc0, critic.fc0_w_adam);
    step(critic.fc0_b, g.b_fc0, critic.fc0_b_adam);
    step(critic.fc1_w, g.w_fc1, critic.fc1_w_adam);
    step(critic.fc1_b, g.b_fc1, critic.fc1_b_adam);
    return stats;
}

}  // namespace aec
