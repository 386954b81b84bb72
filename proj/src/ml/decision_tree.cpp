#include "gridad/ml/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gridad/error.hpp"

namespace gridad::ml {

int DecisionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].leaf()) continue;
        d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
        best = std::max(best, d[i] + 1);
    }
    return best;
}

int DecisionTree::leaves() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf(); }));
}

nlohmann::json DecisionTree::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& n : nodes) {
        if (n.leaf()) arr.push_back({{"v", n.value}});
        else arr.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
    }
    return arr;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& doc) {
    DecisionTree t;
    for (const auto& n : doc) {
        TreeNode node;
        if (n.contains("v")) {
            node.value = n["v"].get<std::vector<double>>();
        } else {
            node.feature = n.at("f").get<int>();
            node.threshold = n.at("t").get<double>();
            node.left = n.at("l").get<int>();
            node.right = n.at("r").get<int>();
        }
        t.nodes.push_back(std::move(node));
    }
    const int count = static_cast<int>(t.nodes.size());
    if (count == 0) throw DataError("model file: empty tree");
    for (const auto& n : t.nodes)
        if (!n.leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count))
            throw DataError("model file: tree child index out of range");
    return t;
}

Presorted::Presorted(const Eigen::MatrixXd& X) : X_(&X), order_(X.cols()) {
    const int n = static_cast<int>(X.rows());
    for (int f = 0; f < X.cols(); ++f) {
        auto& o = order_[f];
        o.resize(n);
        std::iota(o.begin(), o.end(), 0);
        std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return X(a, f) < X(b, f); });
    }
}

double gini_impurity(const std::vector<double>& counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double g = 0.0;
    for (double c : counts) {
        const double p = c / total;
        g += p * (1.0 - p);
    }
    return g;
}

namespace {

// Policies plug the impurity/gain arithmetic into the shared level-wise grower.

struct GiniPolicy {
    const std::vector<int>* labels;
    int classes;

    struct Totals {
        std::vector<double> counts;
        double weight = 0.0;
        double sumsq = 0.0;
    };
    struct Acc {
        std::vector<double> counts;
        double weight = 0.0;
        double sumsq_left = 0.0;
        double sumsq_right = 0.0;
    };

    Totals empty_totals() const { return {std::vector<double>(classes, 0.0), 0.0, 0.0}; }
    void add_total(Totals& t, int row, double w) const {
        t.counts[(*labels)[row]] += w;
        t.weight += w;
    }
    void finish_totals(Totals& t) const {
        t.sumsq = 0.0;
        for (double c : t.counts) t.sumsq += c * c;
    }
    bool splittable(const Totals& t, const TreeParams& p) const {
        if (t.weight < p.min_samples_split) return false;
        int nonzero = 0;
        for (double c : t.counts) nonzero += c > 0.0;
        return nonzero > 1;
    }
    void reset(Acc& a, const Totals& t) const {
        a.counts.assign(classes, 0.0);
        a.weight = 0.0;
        a.sumsq_left = 0.0;
        a.sumsq_right = t.sumsq;
    }
    void add(Acc& a, const Totals& t, int row, double w) const {
        const int c = (*labels)[row];
        const double left_old = a.counts[c];
        const double right_old = t.counts[c] - left_old;
        const double right_new = right_old - w;
        a.sumsq_left += 2.0 * left_old * w + w * w;
        a.sumsq_right += right_new * right_new - right_old * right_old;
        a.counts[c] += w;
        a.weight += w;
    }
    // Higher is better: sum_c cL^2/wL + sum_c cR^2/wR = total weight - weighted gini.
    bool eval(const Acc& a, const Totals& t, const TreeParams&, double& score) const {
        const double wr = t.weight - a.weight;
        if (a.weight <= 0.0 || wr <= 1e-12) return false;
        score = a.sumsq_left / a.weight + std::max(0.0, a.sumsq_right) / wr;
        return true;
    }
    bool accept(double, const Totals&, const TreeParams&) const { return true; }
    std::vector<double> leaf_value(const Totals& t) const {
        std::vector<double> v(t.counts);
        for (double& x : v) x /= t.weight;
        return v;
    }
};

struct GainPolicy {
    const std::vector<double>* g;
    const std::vector<double>* h;
    double lambda;

    struct Totals {
        double G = 0.0, H = 0.0, weight = 0.0;
    };
    struct Acc {
        double G = 0.0, H = 0.0;
    };

    Totals empty_totals() const { return {}; }
    void add_total(Totals& t, int row, double w) const {
        t.G += w * (*g)[row];
        t.H += w * (*h)[row];
        t.weight += w;
    }
    void finish_totals(Totals&) const {}
    bool splittable(const Totals& t, const TreeParams& p) const {
        return t.weight >= p.min_samples_split && t.H >= 2.0 * p.min_child_weight;
    }
    void reset(Acc& a, const Totals&) const { a = {}; }
    void add(Acc& a, const Totals&, int row, double w) const {
        a.G += w * (*g)[row];
        a.H += w * (*h)[row];
    }
    bool eval(const Acc& a, const Totals& t, const TreeParams& p, double& score) const {
        const double GR = t.G - a.G, HR = t.H - a.H;
        if (a.H < p.min_child_weight || HR < p.min_child_weight) return false;
        score = 0.5 * (a.G * a.G / (a.H + p.lambda) + GR * GR / (HR + p.lambda) -
                       t.G * t.G / (t.H + p.lambda));
        return true;
    }
    bool accept(double score, const Totals&, const TreeParams& p) const { return score - p.gamma >= 0.0; }
    std::vector<double> leaf_value(const Totals& t) const { return {-t.G / (t.H + lambda)}; }
};

template <class Policy>
DecisionTree grow(const Presorted& data, const Policy& pol, const std::vector<double>& weight,
                  const TreeParams& params, Rng& rng) {
    using Totals = typename Policy::Totals;
    using Acc = typename Policy::Acc;
    const Eigen::MatrixXd& X = data.data();
    const int n = data.rows();
    const int p = data.features();
    const int per_split =
        params.features_per_split <= 0 || params.features_per_split >= p ? p : params.features_per_split;

    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, -1);
    for (int r = 0; r < n; ++r)
        if (weight[r] > 0.0) node_of[r] = 0;

    std::vector<int> open{0};
    std::vector<int> feature_pool(p);
    for (int depth = 0; !open.empty(); ++depth) {
        const int slots = static_cast<int>(open.size());
        std::vector<int> slot_of(tree.nodes.size(), -1);
        for (int s = 0; s < slots; ++s) slot_of[open[s]] = s;

        std::vector<Totals> tot(slots, pol.empty_totals());
        for (int r = 0; r < n; ++r)
            if (node_of[r] >= 0 && slot_of[node_of[r]] >= 0) pol.add_total(tot[slot_of[node_of[r]]], r, weight[r]);
        for (auto& t : tot) pol.finish_totals(t);

        std::vector<char> active(slots, 0);
        std::vector<std::vector<int>> slots_for_feature(p);
        for (int s = 0; s < slots; ++s) {
            if (depth >= params.max_depth || !pol.splittable(tot[s], params)) {
                tree.nodes[open[s]].value = pol.leaf_value(tot[s]);
                continue;
            }
            active[s] = 1;
            if (per_split == p) {
                for (int f = 0; f < p; ++f) slots_for_feature[f].push_back(s);
            } else {
                std::iota(feature_pool.begin(), feature_pool.end(), 0);
                for (int k = 0; k < per_split; ++k) {
                    const int j = std::uniform_int_distribution<int>(k, p - 1)(rng);
                    std::swap(feature_pool[k], feature_pool[j]);
                    slots_for_feature[feature_pool[k]].push_back(s);
                }
            }
        }

        std::vector<double> best_score(slots, -std::numeric_limits<double>::infinity());
        std::vector<int> best_feature(slots, -1);
        std::vector<double> best_threshold(slots, 0.0);
        std::vector<Acc> acc(slots);
        std::vector<double> prev(slots, 0.0);
        std::vector<char> seen(slots, 0), wanted(slots, 0);
        for (int f = 0; f < p; ++f) {
            const auto& list = slots_for_feature[f];
            if (list.empty()) continue;
            for (int s : list) {
                wanted[s] = 1;
                seen[s] = 0;
                pol.reset(acc[s], tot[s]);
            }
            for (int r : data.order(f)) {
                const int nd = node_of[r];
                if (nd < 0) continue;
                const int s = slot_of[nd];
                if (s < 0 || !wanted[s]) continue;
                const double x = X(r, f);
                if (seen[s] && x > prev[s]) {
                    double score;
                    if (pol.eval(acc[s], tot[s], params, score) && score > best_score[s]) {
                        double thr = 0.5 * (prev[s] + x);
                        if (!(thr < x)) thr = prev[s];
                        best_score[s] = score;
                        best_feature[s] = f;
                        best_threshold[s] = thr;
                    }
                }
                pol.add(acc[s], tot[s], r, weight[r]);
                prev[s] = x;
                seen[s] = 1;
            }
            for (int s : list) wanted[s] = 0;
        }

        std::vector<int> next;
        for (int s = 0; s < slots; ++s) {
            if (!active[s]) continue;
            const int id = open[s];
            if (best_feature[s] < 0 || !pol.accept(best_score[s], tot[s], params)) {
                tree.nodes[id].value = pol.leaf_value(tot[s]);
                active[s] = 0;
                continue;
            }
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            tree.nodes[id].feature = best_feature[s];
            tree.nodes[id].threshold = best_threshold[s];
            tree.nodes[id].left = left;
            tree.nodes[id].right = left + 1;
            next.push_back(left);
            next.push_back(left + 1);
        }
        for (int r = 0; r < n; ++r) {
            const int nd = node_of[r];
            if (nd < 0) continue;
            const int s = slot_of[nd];
            if (s < 0) continue;
            if (!active[s]) {
                node_of[r] = -1;
                continue;
            }
            const auto& node = tree.nodes[nd];
            node_of[r] = X(r, node.feature) <= node.threshold ? node.left : node.right;
        }
        open = std::move(next);
    }
    return tree;
}

}  // namespace

DecisionTree grow_classification_tree(const Presorted& data, const std::vector<int>& labels,
                                      int classes, const std::vector<double>& weight,
                                      const TreeParams& params, Rng& rng) {
    GiniPolicy pol{&labels, classes};
    return grow(data, pol, weight, params, rng);
}

DecisionTree grow_boosting_tree(const Presorted& data, const std::vector<double>& g,
                                const std::vector<double>& h, const std::vector<double>& weight,
                                const TreeParams& params, Rng& rng) {
    GainPolicy pol{&g, &h, params.lambda};
    return grow(data, pol, weight, params, rng);
}

}  // namespace gridad::ml
